"""Finite complex constellations with point probabilities and bit labels.

A constellation couples three arrays of equal length: complex points,
a probability mass over the points, and integer bit labels.  Labels are
read MSB-first, i.e. bit position ``m`` (1-based) of point ``i`` is bit
``M - m`` of ``labels[i]`` where ``M = log2(len(points))``.  All
generators in this module return unit-power, zero-mean constellations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

__all__ = [
    "Constellation",
    "Moments",
    "gray_code",
    "make_qam",
    "make_psk",
    "make_gpas_grid",
    "gpas_phase_labels",
    "moments",
    "normalize",
    "bit_matrix",
    "to_json_dict",
    "from_json_dict",
    "save_json",
    "load_json",
]

PROB_SUM_TOL = 1e-12
POWER_TOL = 1e-9


def gray_code(i):
    """Binary-reflected Gray code of ``i`` (element-wise for arrays)."""
    i = np.asarray(i)
    return i ^ (i >> 1)


@dataclass(frozen=True)
class Constellation:
    """Complex constellation with probabilities and bit labels.

    Attributes
    ----------
    points : complex ndarray, shape (2**M,)
        Constellation points.  Coincident points are allowed.
    probs : float ndarray, shape (2**M,)
        Probability mass per point, non-negative, summing to one.
    labels : int ndarray, shape (2**M,)
        Bit label of each point; together they enumerate {0, 1}^M.
    meta : dict
        Free-form metadata (family, shaping target, design SNR, ...).
    """

    points: np.ndarray
    probs: np.ndarray
    labels: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=np.complex128))
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=np.float64))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        n = self.points.size
        if self.probs.size != n or self.labels.size != n:
            raise ValueError("points, probs and labels must have equal length")
        if n < 2 or n & (n - 1):
            raise ValueError(f"constellation size must be a power of two >= 2, got {n}")

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def bits_per_symbol(self) -> int:
        return int(self.size).bit_length() - 1

    def validate(self):
        """Raise ``ValueError`` if any invariant is violated."""
        if np.any(self.probs < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(self.probs.sum() - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {self.probs.sum()!r}, not 1")
        power = float(np.sum(self.probs * np.abs(self.points) ** 2))
        if abs(power - 1.0) > POWER_TOL:
            raise ValueError(f"average power is {power!r}, not 1")
        if len(set(self.labels.tolist())) != self.size:
            raise ValueError("labels must be pairwise distinct")
        if self.labels.min() < 0 or self.labels.max() >= self.size:
            raise ValueError("labels must enumerate {0,1}^M")

    def with_meta(self, **kwargs) -> "Constellation":
        meta = dict(self.meta)
        meta.update(kwargs)
        return replace(self, meta=meta)


@dataclass(frozen=True)
class Moments:
    """First, second and fourth moment summary of a constellation."""

    mean: complex
    power: float
    kurtosis: float  # E|x|^4 / (E|x|^2)^2, scale invariant


def bit_matrix(labels: np.ndarray, m_bits: int) -> np.ndarray:
    """Bits of each label, MSB first: out[i, m-1] is bit position m."""
    labels = np.asarray(labels, dtype=np.int64)
    shifts = np.arange(m_bits - 1, -1, -1)
    return ((labels[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def moments(c: Constellation) -> Moments:
    """Probability-weighted mean, power and (scale-invariant) kurtosis."""
    p = c.probs
    mean = complex(np.sum(p * c.points))
    power = float(np.sum(p * np.abs(c.points) ** 2))
    fourth = float(np.sum(p * np.abs(c.points) ** 4))
    if power <= 0:
        raise ValueError("zero-power constellation has no kurtosis")
    return Moments(mean=mean, power=power, kurtosis=fourth / power**2)


def normalize(c: Constellation) -> Constellation:
    """Scale points to unit average power; probabilities and labels untouched."""
    power = float(np.sum(c.probs * np.abs(c.points) ** 2))
    if power <= 0:
        raise ValueError("cannot normalize a zero-power constellation")
    return replace(c, points=c.points / np.sqrt(power))


def make_qam(m_bits: int) -> Constellation:
    """Square Gray-labeled QAM with uniform probabilities and unit power.

    ``m_bits`` must be even; the first half of the label addresses the real
    axis, the second half the imaginary axis, each Gray-coded over the
    ascending amplitude levels.
    """
    if m_bits % 2 or m_bits < 2:
        raise ValueError(f"square QAM needs an even number of bits, got {m_bits}")
    half = m_bits // 2
    side = 1 << half
    levels = 2.0 * np.arange(side) - (side - 1)
    ii, qq = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    points = (levels[ii] + 1j * levels[qq]).ravel()
    labels = ((gray_code(ii) << half) | gray_code(qq)).ravel()
    probs = np.full(side * side, 1.0 / (side * side))
    c = Constellation(points, probs, labels, meta={"family": "qam", "bits": m_bits})
    return normalize(c)


def make_psk(m_bits: int) -> Constellation:
    """Equally spaced unit-circle points with a cyclic Gray labeling.

    BPSK (``m_bits == 1``) is the real pair {+1, -1}; larger orders place
    points at odd multiples of pi/2**m_bits so no point falls on an axis.
    """
    if m_bits < 1:
        raise ValueError(f"need at least one bit, got {m_bits}")
    n = 1 << m_bits
    k = np.arange(n)
    if m_bits == 1:
        points = np.array([1.0 + 0j, -1.0 + 0j])
    else:
        points = np.exp(1j * np.pi * (2 * k + 1) / n)
    labels = gray_code(k)
    probs = np.full(n, 1.0 / n)
    return Constellation(points, probs, labels, meta={"family": "psk", "bits": m_bits})


def gpas_phase_labels(mphi_bits: int) -> np.ndarray:
    """Phase labels for amplitude-phase grids, ordered by phase index.

    A column permutation of the binary-reflected Gray code chosen so that
    the first phase bit separates the Re<0 half-plane, the second the
    Im<0 half-plane, and the remaining bits oscillate with increasing
    angular period.  Adjacent phases still differ in exactly one bit.
    """
    n = 1 << mphi_bits
    g = gray_code(np.arange(n))
    if mphi_bits == 1:
        return g
    # source bit positions of the Gray word, MSB side first
    order = [mphi_bits - 2, mphi_bits - 1] + list(range(mphi_bits - 2))
    out = np.zeros(n, dtype=np.int64)
    for dest, src in enumerate(order):
        bit = (g >> src) & 1
        out |= bit << (mphi_bits - 1 - dest)
    return out


def make_gpas_grid(
    ma_bits: int,
    mphi_bits: int,
    radii: Sequence[float],
    ring_probs: Sequence[float] | None = None,
) -> Constellation:
    """Amplitude/phase grid of 2**ma_bits rings times 2**mphi_bits phases.

    Phases sit at odd multiples of pi/2**mphi_bits.  Labels are the ring
    Gray code (first ``ma_bits`` bits) followed by the phase labeling of
    :func:`gpas_phase_labels`.  Coincident rings are allowed; radii must
    be positive.  ``ring_probs`` defaults to uniform rings.
    """
    if ma_bits < 0 or mphi_bits < 1:
        raise ValueError("need ma_bits >= 0 and mphi_bits >= 1")
    n_rings = 1 << ma_bits
    n_ph = 1 << mphi_bits
    radii = np.asarray(radii, dtype=np.float64)
    if radii.size != n_rings:
        raise ValueError(f"expected {n_rings} radii, got {radii.size}")
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    if ring_probs is None:
        ring_probs = np.full(n_rings, 1.0 / n_rings)
    else:
        ring_probs = np.asarray(ring_probs, dtype=np.float64)
        if ring_probs.size != n_rings or np.any(ring_probs < 0):
            raise ValueError("ring_probs must be a distribution over the rings")
        ring_probs = ring_probs / ring_probs.sum()

    phases = np.exp(1j * np.pi * (2 * np.arange(n_ph) + 1) / n_ph)
    ph_labels = gpas_phase_labels(mphi_bits)
    ring_labels = gray_code(np.arange(n_rings))

    points = (radii[:, None] * phases[None, :]).ravel()
    labels = ((ring_labels[:, None] << mphi_bits) | ph_labels[None, :]).ravel()
    probs = np.repeat(ring_probs / n_ph, n_ph)
    c = Constellation(
        points,
        probs,
        labels,
        meta={"family": "gpas", "ma_bits": ma_bits, "mphi_bits": mphi_bits},
    )
    return normalize(c)


def to_json_dict(c: Constellation) -> dict:
    return {
        "points": [[float(z.real), float(z.imag)] for z in c.points],
        "probs": [float(p) for p in c.probs],
        "labels": [int(v) for v in c.labels],
        "meta": c.meta,
    }


def from_json_dict(d: dict) -> Constellation:
    pts = np.array([re + 1j * im for re, im in d["points"]], dtype=np.complex128)
    return Constellation(pts, d["probs"], d["labels"], meta=dict(d.get("meta", {})))


def save_json(c: Constellation, path):
    with open(path, "w") as f:
        json.dump(to_json_dict(c), f, indent=1)


def load_json(path) -> Constellation:
    with open(path) as f:
        return from_json_dict(json.load(f))
