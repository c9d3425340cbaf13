"""Lower and upper bounds on the maximum mutual information of a complex
AWGN channel when the input is constrained in power and fourth moment.

The entropy-maximizing density under moment constraints (C0, C1, C2) on
|z|^0, |z|^2, |z|^4 has the form exp(g0 + g2*|z|^2 + g4*|z|^4) with
g4 <= 0.  In the radial power variable u = |z|^2 this is a Gaussian
truncated to u >= 0, so the scalar equation fixing g2 is solved through
the truncated-Gaussian shape parameter tau = mean/std, where it is well
conditioned all the way to the unit-modulus limit; g0 and g4 follow in
closed form.  The upper bound maximizes the entropy of the channel
output, the lower bound maximizes the input entropy and applies the
entropy power inequality.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import erfcx

__all__ = [
    "MomentConstraints",
    "MaxEntParams",
    "BoundPair",
    "BoundSide",
    "InfeasibleConstraintsError",
    "constraints_for",
    "solve_gamma2",
    "gamma0_gamma4",
    "solve_max_ent",
    "max_entropy_bits",
    "moment_closed_form",
    "moment_oracle",
    "noise_entropy_bits",
    "mi_bounds",
    "mi_bounds_detailed",
]

LN2 = math.log(2.0)
KAPPA_FLOOR = 1.0 + 1e-6  # unit-modulus limit is singular for the ansatz
_GAUSS_RTOL = 1e-10


class InfeasibleConstraintsError(ValueError):
    """Raised when no exponential-family density matches the moments."""


@dataclass(frozen=True)
class MomentConstraints:
    """Target moments E|z|^0 = c0, E|z|^2 = c1, E|z|^4 = c2."""

    c0: float
    c1: float
    c2: float

    def __post_init__(self):
        if self.c0 != 1.0:
            raise ValueError("normalization constraint c0 must be 1")
        if self.c1 <= 0:
            raise ValueError("second moment must be positive")
        if self.c2 < self.c1**2:
            raise InfeasibleConstraintsError(
                f"c2 = {self.c2} < c1^2 = {self.c1**2}: violates Cauchy-Schwarz"
            )


@dataclass(frozen=True)
class MaxEntParams:
    """Exponents of the entropy-maximizing density exp(g0 + g2|z|^2 + g4|z|^4)."""

    gamma0: float
    gamma2: float
    gamma4: float


@dataclass(frozen=True)
class BoundPair:
    lower: float  # bits/symbol
    upper: float  # bits/symbol


@dataclass(frozen=True)
class BoundSide:
    constraints: MomentConstraints
    params: MaxEntParams
    entropy_bits: float


def constraints_for(side: str, es: float, sigma_c2: float, kappa_tilde: float) -> MomentConstraints:
    """Moment constraints of the transmit (lower) or receive (upper) signal.

    The lower side constrains the channel input directly; the upper side
    maps the input constraints through y = x + w for noise variance
    ``sigma_c2``.  The fourth-moment targets assume unit signal power
    (kurtosis and fourth moment coincide for es = 1).
    """
    if es <= 0:
        raise ValueError("signal power must be positive")
    if sigma_c2 <= 0:
        raise ValueError("noise variance must be positive")
    if not 1.0 <= kappa_tilde <= 2.0:
        warnings.warn(
            f"kurtosis target {kappa_tilde} outside [1, 2]", RuntimeWarning, stacklevel=2
        )
    if side == "lower":
        return MomentConstraints(1.0, es, kappa_tilde)
    if side == "upper":
        return MomentConstraints(
            1.0, es + sigma_c2, kappa_tilde + 4.0 * es * sigma_c2 + 2.0 * sigma_c2**2
        )
    raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")


def _ln_erfcx(t: float) -> float:
    """log(erfcx(t)), stable for any real t."""
    if t >= 0:
        return math.log(erfcx(t))
    # erfcx(t) = 2*exp(t^2) - erfcx(-t)
    return t * t + math.log(2.0 - math.exp(-t * t) * erfcx(-t))


def normalization_residual(g2: float, c: MomentConstraints) -> float:
    """Value of the erfcx normalization expression implied by g2.

    Equals c0 = 1 at the solution.  The expression loses precision once
    the truncation tail becomes negligible (fourth-moment ratios close to
    the unit-modulus limit); use the moment oracle there instead.
    """
    p = g2 * c.c1 + 1.0
    if p <= 0:
        return -math.inf
    a = c.c1 * p / c.c2 - g2
    if a <= 0:
        return -math.inf
    t = -g2 * math.sqrt(c.c2 / (2.0 * p))
    lnf = math.log(a) + 0.5 * math.log(math.pi * c.c2 / (2.0 * p)) + _ln_erfcx(t)
    return math.exp(lnf)


_SERIES_TAU = -35.0  # below this, erfcx-based tau + mills(tau) cancels


def _delta(tau: float) -> float:
    """tau + phi(tau)/Phi(tau), computed without cancellation.

    For very negative tau the direct sum loses all digits, so the Mills
    ratio asymptotic series in 1/tau^2 is used instead.
    """
    if tau >= _SERIES_TAU:
        if tau >= 0:
            num = 2.0 * math.exp(-0.5 * tau * tau)
            den = math.sqrt(2.0 * math.pi) * (
                2.0 - erfcx(tau / math.sqrt(2.0)) * math.exp(-0.5 * tau * tau)
            )
            return tau + num / den
        return tau + 2.0 / (math.sqrt(2.0 * math.pi) * erfcx(-tau / math.sqrt(2.0)))
    x = -tau
    u = 1.0 / (x * x)
    return (1.0 / x) * (1.0 - u * (2.0 - u * (10.0 - u * (74.0 - u * (706.0 - u * 8162.0)))))


def _moment_ratio(tau: float) -> float:
    """Var(u)/E(u)^2 of a Gaussian truncated to u >= 0 with shape tau.

    Decreases monotonically from 1 (exponential-like, tau -> -inf) to 0
    (narrow ring, tau -> +inf).
    """
    d = _delta(tau)
    if tau >= _SERIES_TAU:
        num = 1.0 + tau * d - d * d
    else:
        x = -tau
        u = 1.0 / (x * x)
        # 1 - x*delta expanded directly to avoid the cancellation
        num = u * (2.0 - u * (10.0 - u * (74.0 - u * (706.0 - u * 8162.0)))) - d * d
    return num / (d * d)


def _solve_params(c: MomentConstraints) -> MaxEntParams:
    gauss_c2 = 2.0 * c.c1**2
    if c.c2 > gauss_c2 * (1.0 + _GAUSS_RTOL):
        raise InfeasibleConstraintsError(
            f"{c}: fourth moment exceeds the Gaussian value {gauss_c2}; "
            "no sub-Gaussian exponential-family density exists"
        )
    if c.c2 >= gauss_c2 * (1.0 - _GAUSS_RTOL):
        return MaxEntParams(
            gamma0=math.log(1.0 / (math.pi * c.c1)), gamma2=-1.0 / c.c1, gamma4=0.0
        )
    ratio = c.c2 / c.c1**2 - 1.0  # in (0, 1)
    if ratio <= 0:
        raise InfeasibleConstraintsError(
            f"{c}: fourth moment at the unit-modulus limit is singular"
        )
    tau_lo = -max(50.0, 4.0 / math.sqrt(1.0 - ratio))
    tau_hi = max(80.0, 3.0 / math.sqrt(ratio))
    f = lambda t: _moment_ratio(t) - ratio
    if f(tau_lo) <= 0 or f(tau_hi) >= 0:
        raise InfeasibleConstraintsError(
            f"no sign change of the moment-ratio residual for {c}"
        )
    tau = brentq(f, tau_lo, tau_hi, xtol=1e-14, rtol=8.9e-16)
    d = _delta(tau)  # tau + mills(tau)
    s = c.c1 / d  # std of the truncated Gaussian in u = |z|^2
    g2 = tau * d / c.c1
    g4 = -(d * d) / (2.0 * c.c1**2)
    # log normalization; the tau^2/2 term cancels algebraically for tau < 0
    ln_s_term = -math.log(math.pi * math.sqrt(2.0 * math.pi) * s)
    if tau < 0:
        g0 = ln_s_term - math.log(0.5 * erfcx(-tau / math.sqrt(2.0)))
    else:
        g0 = (
            ln_s_term
            - math.log1p(-0.5 * erfcx(tau / math.sqrt(2.0)) * math.exp(-0.5 * tau * tau))
            - 0.5 * tau * tau
        )
    params = MaxEntParams(gamma0=g0, gamma2=g2, gamma4=g4)
    resid = abs(moment_closed_form(params, 0) - 1.0)
    if resid > 1e-9:
        raise InfeasibleConstraintsError(
            f"normalization residual {resid:.3e} after solving {c}"
        )
    return params


def solve_gamma2(c: MomentConstraints) -> float:
    """Solve the scalar normalization equation for g2.

    Moments exactly at the Gaussian point c2 = 2*c1^2 short-circuit to
    the analytic solution g2 = -1/c1; fourth moments above it are
    infeasible for this density family.
    """
    return _solve_params(c).gamma2


def gamma0_gamma4(g2: float, c: MomentConstraints) -> tuple[float, float]:
    """Closed-form g0 and g4 given the solved g2.

    The g0 expression subtracts two nearly equal terms when the density
    approaches a narrow ring; prefer :func:`solve_max_ent` which computes
    g0 without cancellation.
    """
    p = g2 * c.c1 + 1.0
    a = c.c1 * p / c.c2 - g2
    if a <= 0:
        raise InfeasibleConstraintsError(
            f"log argument {a} not positive for g2 = {g2} under {c}"
        )
    g0 = math.log(a / math.pi)
    g4 = -p / (2.0 * c.c2)
    return g0, g4


def solve_max_ent(c: MomentConstraints) -> MaxEntParams:
    """All three exponents of the entropy-maximizing density."""
    return _solve_params(c)


def max_entropy_bits(p: MaxEntParams, c: MomentConstraints) -> float:
    """Differential entropy in bits of the solved density."""
    return (-p.gamma0 - c.c1 * p.gamma2 - c.c2 * p.gamma4) / LN2


def moment_closed_form(p: MaxEntParams, q: int) -> float:
    """E|z|^(2q), q in {0,1,2}, from the erfcx closed forms."""
    if q not in (0, 1, 2):
        raise ValueError("q must be 0, 1 or 2")
    g0, g2, g4 = p.gamma0, p.gamma2, p.gamma4
    if g4 > 0:
        raise ValueError("moments diverge for g4 > 0")
    if g4 == 0.0:
        if g2 >= 0:
            raise ValueError("moments diverge for g4 = 0, g2 >= 0")
        return math.pi * math.exp(g0) * math.factorial(q) / (-g2) ** (q + 1)
    b = -g4  # |g4|
    t = -g2 / (2.0 * math.sqrt(b))
    if g2 <= 0:
        e = erfcx(t)
        if q == 0:
            block = 0.5 * math.sqrt(math.pi / b) * e
        elif q == 1:
            block = 1.0 / (2.0 * b) + g2 * math.sqrt(math.pi) / (4.0 * b**1.5) * e
        else:
            block = g2 / (4.0 * b**2) + (
                1.0 / (4.0 * b) + g2**2 / (8.0 * b**2)
            ) * math.sqrt(math.pi / b) * e
        return math.pi * math.exp(g0) * block
    # g2 > 0: erfcx(t) is astronomically large; sum the (all positive)
    # terms in log space
    ln_e = _ln_erfcx(t)
    if q == 0:
        terms = [math.log(0.5) + 0.5 * math.log(math.pi / b) + ln_e]
    elif q == 1:
        terms = [
            -math.log(2.0 * b),
            math.log(g2 * math.sqrt(math.pi) / (4.0 * b**1.5)) + ln_e,
        ]
    else:
        terms = [
            math.log(g2 / (4.0 * b**2)),
            math.log((1.0 / (4.0 * b) + g2**2 / (8.0 * b**2)) * math.sqrt(math.pi / b))
            + ln_e,
        ]
    m = max(terms)
    return math.exp(g0 + math.log(math.pi) + m) * sum(math.exp(v - m) for v in terms)


def moment_oracle(p: MaxEntParams, q: int) -> float:
    """E|z|^(2q) by radial quadrature in u = r^2; independent of the
    closed forms and used for verification."""
    if q not in (0, 1, 2):
        raise ValueError("q must be 0, 1 or 2")
    g0, g2, g4 = p.gamma0, p.gamma2, p.gamma4
    if g4 > 0 or (g4 == 0 and g2 >= 0):
        raise ValueError("integral diverges for these exponents")
    if g4 == 0.0:
        u_lo, u_hi = 0.0, (140.0 + 10 * q) / (-g2)
        peak = 0.0
        pts = None
    else:
        u_star = max(g2 / (2.0 * -g4), 0.0)
        width = math.sqrt((140.0 + 10 * q) / -g4)
        u_lo = max(0.0, u_star - width)
        u_hi = u_star + width
        if g2 < 0:
            u_hi = max(u_hi, (140.0 + 10 * q) / (-g2))
        u_hi = max(u_hi, 1e-6)
        peak = g2 * u_star + g4 * u_star**2 if u_star > 0 else 0.0
        sig = 1.0 / math.sqrt(2.0 * -g4)
        pts = [u for u in (u_star - sig, u_star, u_star + sig) if u_lo < u < u_hi] or None

    def integrand(u):
        return u**q * math.exp(g2 * u + g4 * u * u - peak)

    val, _ = quad(
        integrand, u_lo, u_hi, points=pts, limit=500, epsabs=1e-14, epsrel=1e-13
    )
    return math.pi * math.exp(g0 + peak) * val


def noise_entropy_bits(sigma_c2: float) -> float:
    """Differential entropy of circular complex Gaussian noise, in bits."""
    return math.log2(math.pi * math.e * sigma_c2)


def mi_bounds_detailed(es: float, sigma_c2: float, kappa_tilde: float) -> dict:
    """Both bounds with the solved per-side parameters.

    Kurtosis targets at or below the unit-modulus limit are clamped to
    ``KAPPA_FLOOR`` for the entropy solve; the returned dict flags this.
    """
    clamped = kappa_tilde < KAPPA_FLOOR
    kt = max(kappa_tilde, KAPPA_FLOOR)
    sides = {}
    for side in ("lower", "upper"):
        c = constraints_for(side, es, sigma_c2, kt)
        params = solve_max_ent(c)
        sides[side] = BoundSide(c, params, max_entropy_bits(params, c))
    h_w = noise_entropy_bits(sigma_c2)
    upper = sides["upper"].entropy_bits - h_w
    lower = float(np.logaddexp2(sides["lower"].entropy_bits, h_w) - h_w)
    return {
        "bounds": BoundPair(lower=lower, upper=upper),
        "lower_side": sides["lower"],
        "upper_side": sides["upper"],
        "kappa_clamped": clamped,
        "kappa_effective": kt,
    }


def mi_bounds(es: float, sigma_c2: float, kappa_tilde: float) -> BoundPair:
    """Bounds in bits/symbol on the maximum mutual information, given the
    signal power, total complex noise variance and kurtosis target."""
    return mi_bounds_detailed(es, sigma_c2, kappa_tilde)["bounds"]
