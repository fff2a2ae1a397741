"""Explicit estimation of a linear polynomial part ``P0 + s P1``.

The coefficients are read off high-frequency data, subtracted from the
low-frequency samples, and the remainder is fitted with the ordinary
Loewner pencil.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import FrequencySample, PartitionConfig, TangentialDataset, check_samples, partition
from .errors import ConfigError, DegenerateDataError, IllPosedDirectionsError
from .loewner import DEFAULT_TOL, DescriptorRealization, build_quadruple, reduce

PINV_RCOND = 1e-12


@dataclass(frozen=True)
class PolyCoefficients:
    """Constant and linear coefficient matrices (p x m).

    ``imag_residual`` records the largest imaginary part that was dropped
    from ``P1`` (0 when nothing was dropped).
    """

    P0: np.ndarray
    P1: np.ndarray
    imag_residual: float = 0.0

    def __post_init__(self):
        P0 = np.atleast_2d(np.array(self.P0, dtype=np.complex128))
        P1 = np.atleast_2d(np.array(self.P1, dtype=np.complex128))
        if P0.shape != P1.shape:
            raise ValueError(f"P0 {P0.shape} and P1 {P1.shape} differ in shape")
        P0.setflags(write=False)
        P1.setflags(write=False)
        object.__setattr__(self, "P0", P0)
        object.__setattr__(self, "P1", P1)

    @classmethod
    def zeros(cls, p, m):
        return cls(np.zeros((p, m)), np.zeros((p, m)))

    @property
    def shape(self):
        return self.P0.shape

    def __call__(self, s):
        return self.P0 + s * self.P1

    def as_pair(self):
        return self.P0, self.P1


@dataclass(frozen=True)
class HighFreqWindow:
    omega_min: float = 1e7
    omega_max: float = 1e9
    count: int = 10
    spacing: str = "log"

    def __post_init__(self):
        if not 0 < self.omega_min < self.omega_max:
            raise ConfigError("high-frequency window needs 0 < omega_min < omega_max")
        if self.count < 1:
            raise ConfigError("high-frequency window needs count >= 1")
        if self.spacing not in ("log", "linear"):
            raise ConfigError(f"unknown spacing {self.spacing!r}")

    def omegas(self):
        if self.spacing == "log":
            return np.logspace(np.log10(self.omega_min), np.log10(self.omega_max), self.count)
        return np.linspace(self.omega_min, self.omega_max, self.count)

    def points(self):
        return 1j * self.omegas()


def _omega(sample):
    if sample.point.real != 0:
        raise ConfigError(f"sample point {sample.point} is not on the imaginary axis")
    if sample.point.imag == 0:
        raise ConfigError("sample point must be nonzero")
    return sample.point.imag


def estimate_single(sample: FrequencySample) -> PolyCoefficients:
    """Split one imaginary-axis sample into even (real) and odd (imaginary) parts."""
    w = _omega(sample)
    return PolyCoefficients(sample.value.real, sample.value.imag / w)


def estimate_pair(s1: FrequencySample, s2: FrequencySample) -> PolyCoefficients:
    """Divided-difference estimate from two imaginary-axis samples."""
    w1, w2 = _omega(s1), _omega(s2)
    if w1 == w2:
        raise ConfigError("the two sample frequencies must differ")
    z1, z2 = 1j * w1, 1j * w2
    H1, H2 = s1.value, s2.value
    P0 = ((z1 * H1 - z2 * H2) / (z1 - z2)).real
    P1 = (H1 - H2) / (z1 - z2)
    return PolyCoefficients(P0, P1)


def _pinv(X, what):
    Xp = np.linalg.pinv(X, rcond=PINV_RCOND)
    n = X.shape[1]
    if what == "left":
        check = Xp @ X
    else:
        check = X @ Xp
        n = X.shape[0]
    if np.linalg.norm(check - np.eye(n)) > 1e-8 * np.sqrt(n):
        raise IllPosedDirectionsError(f"{what} direction matrix is rank deficient")
    return Xp


def estimate_general(dataset_hi: TangentialDataset) -> PolyCoefficients:
    """Pseudo-inverse estimate from the Loewner pair of high-frequency data.

    ``P1 = pinv(Ldir) L pinv(R)`` and ``P0 = Re(pinv(Ldir) Ls pinv(R))``.
    The imaginary part of ``P1`` is kept unless the data are closed under
    conjugation; the dropped magnitude is reported in ``imag_residual``.
    """
    ds = dataset_hi
    if ds.q != ds.k or ds.k < 2:
        raise ConfigError(f"need q == k >= 2 high-frequency points per side, got q={ds.q}, k={ds.k}")
    if ds.k < max(ds.p, ds.m):
        raise ConfigError(f"need k >= max(p, m) = {max(ds.p, ds.m)}, got k={ds.k}")
    return poly_from_quadruple(build_quadruple(ds))


def poly_from_quadruple(quad) -> PolyCoefficients:
    """Pseudo-inverse formulas applied to an already assembled quadruple."""
    ds = quad.dataset
    Lp = _pinv(ds.left_directions, "left")
    Rp = _pinv(ds.right_directions, "right")
    P1 = Lp @ quad.L @ Rp
    P0 = (Lp @ quad.Ls @ Rp).real
    dropped = 0.0
    if ds.is_conjugate_closed():
        dropped = float(np.max(np.abs(P1.imag)))
        P1 = P1.real
    return PolyCoefficients(P0, P1, dropped)


def subtract_poly(samples: Sequence[FrequencySample], coeffs: PolyCoefficients):
    """Return samples of ``H(s) - (P0 + s P1)``."""
    out = []
    for smp in samples:
        if smp.shape != coeffs.shape:
            raise ConfigError(f"sample shape {smp.shape} does not match coefficients {coeffs.shape}")
        out.append(FrequencySample(smp.point, smp.value - coeffs(smp.point)))
    return out


def sample_window(H, window: HighFreqWindow):
    """Sample a callable ``H(s)`` on the window's points."""
    return [FrequencySample(s, H(s)) for s in window.points()]


def fit_poly_loewner(samples_lo, samples_hi, config: PartitionConfig | None = None,
                     tol=DEFAULT_TOL, atol=None, coeffs: PolyCoefficients | None = None):
    """Explicit poly-Loewner fit.

    Estimate ``P0, P1`` from ``samples_hi``, subtract them from
    ``samples_lo`` and reduce the Loewner pencil of the remainder. Passing
    ``coeffs`` skips the estimation step. ``atol`` is the absolute floor
    below which the rational remainder counts as zero; by default it is
    ``1e-13`` times the largest low-band magnitude.

    Returns
    -------
    realization, report, coeffs
        ``report`` is ``None`` when the rational part vanished.
    """
    samples_lo, samples_hi = list(samples_lo), list(samples_hi)
    check_samples(samples_lo + samples_hi)
    if coeffs is None:
        coeffs = estimate_general(partition(samples_hi, config))
    rest = subtract_poly(samples_lo, coeffs)
    if atol is None:
        scale = max(float(np.max(np.abs(s.value))) for s in samples_lo)
        atol = 1e-13 * scale
    p, m = coeffs.shape
    poly = (coeffs.P0, coeffs.P1)
    try:
        real, report = reduce(build_quadruple(partition(rest, config)), tol=tol, atol=atol)
    except DegenerateDataError:
        empty = np.zeros((0, 0))
        real = DescriptorRealization(empty, empty, np.zeros((0, m)), np.zeros((p, 0)), poly)
        return real, None, coeffs
    real = DescriptorRealization(real.E, real.A, real.B, real.C, poly)
    return real, report, coeffs
