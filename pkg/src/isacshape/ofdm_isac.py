"""Monostatic OFDM sensing-and-communication chain.

Single-symbol frames over N subcarriers: orthonormal IFFT/FFT with a
cyclic prefix, static point targets at integer sample delays inside the
prefix, per-subcarrier matched filtering by the conjugate transmit
symbol, delay-domain transform, and cell-averaging CFAR detection.
Closed-form SINR and detection probability accompany the Monte Carlo
simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constellation import Constellation

__all__ = [
    "OfdmConfig",
    "Target",
    "SensingScenario",
    "modulate",
    "demodulate",
    "awgn",
    "channel_frequency_response",
    "sensing_receive",
    "matched_filter",
    "delay_estimate",
    "cfar_threshold_factor",
    "cfar_detect",
    "analytic_sinr",
    "analytic_pd",
    "simulate_pd",
    "radar_amplitude",
    "wilson_interval",
]


@dataclass(frozen=True)
class OfdmConfig:
    """Subcarrier count (power of two) and cyclic prefix length in samples."""

    n_subcarriers: int
    cp_len: int
    seed: int = 0

    def __post_init__(self):
        n = self.n_subcarriers
        if n < 2 or n & (n - 1):
            raise ValueError(f"subcarrier count must be a power of two, got {n}")
        if not 0 <= self.cp_len <= n:
            raise ValueError("cyclic prefix length must be in [0, N]")


@dataclass(frozen=True)
class Target:
    """Static point reflector at an integer sample delay.

    ``model`` selects the amplitude draw per realization: ``fixed`` keeps
    the given complex amplitude, ``swerling0`` keeps a fixed modulus
    sqrt(power) with uniform random phase, ``swerling1`` draws a circular
    complex Gaussian with mean power ``power``.
    """

    delay: int
    model: str = "fixed"
    amplitude: complex = 1.0 + 0j
    power: float = 1.0
    is_toi: bool = False

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError("delay must be non-negative")
        if self.model not in ("fixed", "swerling0", "swerling1"):
            raise ValueError(f"unknown amplitude model {self.model!r}")
        if self.model != "fixed" and self.power <= 0:
            raise ValueError("target power must be positive")

    @property
    def mean_power(self) -> float:
        if self.model == "fixed":
            return abs(self.amplitude) ** 2
        return self.power

    def draw_amplitude(self, rng: np.random.Generator) -> complex:
        if self.model == "fixed":
            return complex(self.amplitude)
        if self.model == "swerling0":
            return math.sqrt(self.power) * np.exp(2j * np.pi * rng.random())
        re, im = rng.standard_normal(2)
        return complex(math.sqrt(self.power / 2.0) * (re + 1j * im))


@dataclass(frozen=True)
class SensingScenario:
    """Targets, sensing noise power and CFAR settings."""

    targets: tuple
    sigma_s2: float
    pfa: float = 1e-3
    n_win: int = 100  # total reference cells, split evenly on both sides
    n_guard: int = 2  # guard cells per side

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.sigma_s2 <= 0:
            raise ValueError("sensing noise variance must be positive")
        if not 0.0 < self.pfa < 1.0:
            raise ValueError("false alarm rate must be in (0, 1)")
        if self.n_win < 2 or self.n_win % 2:
            raise ValueError("reference window must be an even count >= 2")
        if self.n_guard < 0:
            raise ValueError("guard cell count must be non-negative")

    @property
    def toi(self) -> Target:
        flagged = [t for t in self.targets if t.is_toi]
        if len(flagged) != 1:
            raise ValueError(f"expected exactly one target of interest, found {len(flagged)}")
        return flagged[0]


def modulate(symbols: np.ndarray, cfg: OfdmConfig) -> np.ndarray:
    """Orthonormal IFFT plus cyclic prefix (last cp_len samples prepended)."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.shape != (cfg.n_subcarriers,):
        raise ValueError(f"expected {cfg.n_subcarriers} symbols, got {symbols.shape}")
    body = np.fft.ifft(symbols, norm="ortho")
    if cfg.cp_len == 0:
        return body
    return np.concatenate([body[-cfg.cp_len :], body])


def demodulate(signal: np.ndarray, cfg: OfdmConfig) -> np.ndarray:
    """Strip the cyclic prefix and apply the orthonormal FFT."""
    signal = np.asarray(signal, dtype=np.complex128)
    if signal.shape != (cfg.n_subcarriers + cfg.cp_len,):
        raise ValueError("signal length does not match N + cp_len")
    return np.fft.fft(signal[cfg.cp_len :], norm="ortho")


def awgn(signal: np.ndarray, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex Gaussian noise of total variance sigma2."""
    n = (rng.standard_normal(signal.shape) + 1j * rng.standard_normal(signal.shape)) * math.sqrt(
        sigma2 / 2.0
    )
    return signal + n


def channel_frequency_response(amplitudes, delays, n: int) -> np.ndarray:
    """h_k = sum_j a_j exp(-2j pi k tau_j / N) over subcarriers k.

    With this scaling the delay profile peaks at sqrt(N) * a_j, the
    phase-averaged response power is sum |a_j|^2, and the matched-filter
    SINR matches :func:`analytic_sinr`.
    """
    k = np.arange(n)
    h = np.zeros(n, dtype=np.complex128)
    for a, tau in zip(amplitudes, delays):
        h += a * np.exp(-2j * np.pi * k * tau / n)
    return h


def sensing_receive(
    tx_symbols: np.ndarray,
    scenario: SensingScenario,
    cfg: OfdmConfig,
    rng: np.random.Generator,
    return_state: bool = False,
):
    """Frequency-domain echo y_k = x_k h_k + w_k for one OFDM symbol.

    Target amplitudes are redrawn per call according to their fluctuation
    model.  With ``return_state`` the realized channel response is also
    returned.
    """
    tx_symbols = np.asarray(tx_symbols, dtype=np.complex128)
    n = cfg.n_subcarriers
    if tx_symbols.shape != (n,):
        raise ValueError(f"expected {n} symbols, got {tx_symbols.shape}")
    for t in scenario.targets:
        if t.delay >= cfg.cp_len:
            raise ValueError(f"target delay {t.delay} exceeds cyclic prefix {cfg.cp_len}")
    amps = [t.draw_amplitude(rng) for t in scenario.targets]
    h = channel_frequency_response(amps, [t.delay for t in scenario.targets], n)
    y = awgn(tx_symbols * h, scenario.sigma_s2, rng)
    if return_state:
        return y, h
    return y


def matched_filter(y_s: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Per-subcarrier channel estimate y_k * conj(x_k)."""
    return np.asarray(y_s) * np.conj(np.asarray(x))


def delay_estimate(h_hat: np.ndarray) -> np.ndarray:
    """Orthonormal IFFT of the frequency-domain channel estimate."""
    return np.fft.ifft(np.asarray(h_hat, dtype=np.complex128), norm="ortho")


def cfar_threshold_factor(pfa: float, n_win: int) -> float:
    """Scale alpha applied to the reference-cell mean: alpha = N(pfa^(-1/N) - 1)."""
    return n_win * (pfa ** (-1.0 / n_win) - 1.0)


def _reference_offsets(scenario: SensingScenario) -> np.ndarray:
    half = scenario.n_win // 2
    side = np.arange(scenario.n_guard + 1, scenario.n_guard + half + 1)
    return np.concatenate([-side[::-1], side])


def cfar_detect(power: np.ndarray, scenario: SensingScenario) -> np.ndarray:
    """Cell-averaging CFAR over a circular delay profile of |h[k]|^2.

    Each cell is compared against alpha/N_win times the sum of N_win
    reference cells (split evenly leading/trailing, guard cells excluded,
    wrapping at the ends).
    """
    power = np.asarray(power, dtype=np.float64)
    n = power.size
    offsets = _reference_offsets(scenario)
    if scenario.n_win + 2 * scenario.n_guard + 1 > n:
        raise ValueError("reference window does not fit the profile")
    ref_sum = np.zeros_like(power)
    for off in offsets:
        ref_sum += np.roll(power, -off)
    factor = cfar_threshold_factor(scenario.pfa, scenario.n_win) / scenario.n_win
    return power > factor * ref_sum


def _cfar_cell(power: np.ndarray, cell: int, scenario: SensingScenario) -> bool:
    offsets = _reference_offsets(scenario)
    ref = power[(cell + offsets) % power.size].sum()
    factor = cfar_threshold_factor(scenario.pfa, scenario.n_win) / scenario.n_win
    return bool(power[cell] > factor * ref)


def analytic_sinr(scenario: SensingScenario, kappa: float, n: int) -> float:
    """Average delay-domain SINR of the target of interest.

    gamma = N |a_toi|^2 / (sum_j |a_j|^2 (kappa - 1) + sigma_s2), using
    mean target powers.
    """
    toi = scenario.toi
    interference = sum(t.mean_power for t in scenario.targets) * (kappa - 1.0)
    return n * toi.mean_power / (interference + scenario.sigma_s2)


def analytic_pd(gamma: float, pfa: float) -> float:
    """Asymptotic detection probability pfa^(1/(1+gamma)) for a
    Rayleigh-fluctuating target under a large reference window."""
    if not 0.0 < pfa < 1.0:
        raise ValueError("false alarm rate must be in (0, 1)")
    if gamma < 0:
        raise ValueError("SINR must be non-negative")
    return pfa ** (1.0 / (1.0 + gamma))


def wilson_interval(hits: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score confidence interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("need at least one trial")
    p = hits / trials
    denom = 1.0 + z**2 / trials
    center = (p + z**2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def simulate_pd(
    c: Constellation,
    scenario: SensingScenario,
    cfg: OfdmConfig,
    trials: int,
    seed: int = 0,
) -> tuple[float, tuple[float, float]]:
    """Monte Carlo detection rate of the target-of-interest cell.

    Each trial draws fresh symbols from the constellation, fresh target
    amplitudes and fresh noise, then applies the matched filter, the
    delay transform and the CFAR test at the known delay cell.  Returns
    the hit rate and its 95% Wilson interval.
    """
    rng = np.random.default_rng(seed)
    n = cfg.n_subcarriers
    toi_delay = scenario.toi.delay
    hits = 0
    for _ in range(trials):
        idx = rng.choice(c.size, size=n, p=c.probs)
        x = c.points[idx]
        y = sensing_receive(x, scenario, cfg, rng)
        h_hat = matched_filter(y, x)
        profile = np.abs(delay_estimate(h_hat)) ** 2
        hits += _cfar_cell(profile, toi_delay, scenario)
    return hits / trials, wilson_interval(hits, trials)


def radar_amplitude(
    rcs_m2: float,
    range_m: float,
    const_k: float,
    sample_rate_hz: float | None = None,
) -> tuple[float, int | None]:
    """Mean received power and sample delay from an explicit link budget.

    ``const_k`` folds transmit power, antenna gains, wavelength and
    processing gains into a single user-supplied constant so that
    ``power = const_k * rcs / range^4``.  The sample delay is the rounded
    two-way travel time when a sample rate is given.
    """
    if range_m <= 0 or rcs_m2 <= 0 or const_k <= 0:
        raise ValueError("range, cross-section and link constant must be positive")
    power = const_k * rcs_m2 / range_m**4
    delay = None
    if sample_rate_hz is not None:
        delay = int(round(2.0 * range_m / 299_792_458.0 * sample_rate_hz))
    return power, delay
