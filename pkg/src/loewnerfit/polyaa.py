"""Antoulas-Anderson fitting with a free numerator constant.

The model is the modified barycentric form

    H(s) = (b + sum_i w_i h_i / (s - z_i)) / (sum_i w_i / (s - z_i)),

which interpolates ``h_i`` at the nodes ``z_i`` for any weights and grows
at most linearly at infinity. The weights and ``b`` come from the null
space of the Loewner matrix of the remaining (left) data with a column of
``-1`` appended.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as spla

from . import _kernels
from .data import FrequencySample, PartitionConfig, check_samples, partition
from .errors import (AssemblyError, ConfigError, DataFormatError, DegenerateDataError,
                     EvaluationError, ImproperModelError)
from .loewner import DescriptorRealization
from .polyfit import PolyCoefficients

DEFAULT_TOL = 1e-13


def _vec(a):
    a = np.array(a, dtype=np.complex128).ravel()
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BarycentricModel:
    nodes: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    b: complex = 0j

    def __post_init__(self):
        for name in ("nodes", "values", "weights"):
            object.__setattr__(self, name, _vec(getattr(self, name)))
        object.__setattr__(self, "b", complex(self.b))
        k = self.nodes.size
        if self.values.size != k or self.weights.size != k:
            raise ValueError("nodes, values and weights must have equal length")
        if np.unique(self.nodes).size != k:
            raise ValueError("nodes must be pairwise distinct")
        if k and not np.any(self.weights):
            raise ValueError("at least one weight must be nonzero")

    @property
    def k(self):
        return self.nodes.size

    def __call__(self, s):
        return eval_barycentric(self, s)

    def scaled(self, c):
        """Same rational function with ``(w, b)`` multiplied by ``c``."""
        return BarycentricModel(self.nodes, self.values, c * self.weights, c * self.b)

    def to_dict(self):
        pair = lambda z: [float(z.real), float(z.imag)]
        return {"nodes": [pair(z) for z in self.nodes],
                "values": [pair(z) for z in self.values],
                "weights": [pair(z) for z in self.weights],
                "b": pair(self.b)}

    @classmethod
    def from_dict(cls, doc):
        try:
            cz = lambda v: complex(v[0], v[1])
            return cls([cz(v) for v in doc["nodes"]], [cz(v) for v in doc["values"]],
                       [cz(v) for v in doc["weights"]], cz(doc["b"]))
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise DataFormatError(f"malformed barycentric model: {exc}") from None

    def to_json(self):
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class AugmentedLoewner:
    matrix: np.ndarray
    left_points: np.ndarray
    left_values: np.ndarray


@dataclass(frozen=True)
class NullVector:
    weights: np.ndarray
    b: complex
    sigma_min: float
    sigma_max: float
    singular_values: np.ndarray = field(repr=False)
    nullity: int = 1

    @property
    def ratio(self):
        return self.sigma_min / self.sigma_max

    @property
    def vector(self):
        return np.append(self.weights, self.b)


def build_augmented(nodes, node_values, left_points, left_values, backend=None):
    """Loewner block ``(g_j - h_i)/(s_j - z_i)`` with a trailing column of -1."""
    z, h = np.asarray(nodes, complex).ravel(), np.asarray(node_values, complex).ravel()
    s, g = np.asarray(left_points, complex).ravel(), np.asarray(left_values, complex).ravel()
    if z.size != h.size:
        raise ConfigError(f"{z.size} nodes but {h.size} node values")
    if s.size != g.size:
        raise ConfigError(f"{s.size} left points but {g.size} left values")
    hits = np.argwhere(s[:, None] == z[None, :])
    if hits.size:
        j, i = hits[0]
        raise AssemblyError(f"left point {j} coincides with node {i} ({s[j]})")
    block = _kernels.cauchy_block(s, g, z, h, backend=backend)
    mat = np.hstack([block, -np.ones((s.size, 1), dtype=complex)])
    mat.setflags(write=False)
    return AugmentedLoewner(mat, _vec(s), _vec(g))


def solve_null_vector(aug: AugmentedLoewner, tol=DEFAULT_TOL) -> NullVector:
    """Right singular vector of the smallest singular value of the augmented matrix.

    ``tol`` (relative to the largest singular value) only sets the
    reported ``nullity``; a nullity above one means the weights are not
    unique. The vector has unit norm and its largest entry is made
    real positive.
    """
    A = aug.matrix
    if A.size == 0:
        raise DegenerateDataError("augmented Loewner matrix is empty")
    _, sv, Vh = np.linalg.svd(A, full_matrices=True)
    n = A.shape[1]
    full = np.zeros(n)
    full[:sv.size] = sv
    if full[0] == 0:
        raise DegenerateDataError("augmented Loewner matrix is identically zero")
    a = Vh[-1].conj()
    a = a / np.linalg.norm(a)
    top = np.argmax(np.abs(a))
    a = a * (abs(a[top]) / a[top])
    a[top] = abs(a[top])
    nullity = int(np.sum(full < tol * full[0]))
    sv = np.array(full)
    sv.setflags(write=False)
    return NullVector(_vec(a[:-1]), complex(a[-1]), float(full[-1]), float(full[0]), sv, nullity)


def eval_barycentric(model: BarycentricModel, s, backend=None):
    """Evaluate the modified barycentric form; nodes return their values."""
    scalar = np.ndim(s) == 0
    x = np.atleast_1d(np.asarray(s, dtype=complex)).ravel()
    vals, dens = _kernels.barycentric(x, model.nodes, model.values, model.weights, model.b,
                                      backend=backend)
    bad = dens == 0
    if np.any(bad):
        raise EvaluationError(f"denominator vanishes at s={x[np.argmax(bad)]}",
                              complex(x[np.argmax(bad)]))
    return complex(vals[0]) if scalar else vals


def eval_barycentric_classic(nodes, values, weights, s):
    """Plain barycentric form without the free term (independent evaluator)."""
    out = []
    for x in np.atleast_1d(s):
        num = den = 0j
        hit = None
        for z, h, w in zip(nodes, values, weights):
            if x == z:
                hit = h
                break
            num += w * h / (x - z)
            den += w / (x - z)
        out.append(hit if hit is not None else num / den)
    return np.array(out)


def recover_poly_terms(model: BarycentricModel) -> PolyCoefficients:
    """Constant and linear terms of the expansion at infinity.

    With ``W0 = sum w``, ``W1 = sum w z`` and ``N0 = sum w h``:
    ``P1 = b / W0`` and ``P0 = N0 / W0 - b W1 / W0**2``.
    """
    w, z, h, b = model.weights, model.nodes, model.values, model.b
    W0 = np.sum(w)
    scale = np.sum(np.abs(w))
    if abs(W0) <= 1e-14 * scale:
        raise ImproperModelError("sum of weights vanishes; growth at infinity is super-linear")
    W1 = np.sum(w * z)
    N0 = np.sum(w * h)
    P1 = b / W0
    P0 = N0 / W0 - b * W1 / W0 ** 2
    return PolyCoefficients([[P0]], [[P1]])


def poles(model: BarycentricModel):
    """Finite zeros of the denominator, via the arrowhead pencil."""
    k = model.k
    if k == 0:
        return np.zeros(0, dtype=complex)
    A = np.zeros((k + 1, k + 1), dtype=complex)
    A[0, 1:] = model.weights
    A[1:, 0] = 1.0
    A[1:, 1:] = np.diag(model.nodes)
    B = np.eye(k + 1, dtype=complex)
    B[0, 0] = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        ev = spla.eigvals(A, B)
    return ev[np.isfinite(ev)]


def to_realization(model: BarycentricModel) -> DescriptorRealization:
    """Descriptor realization of order k + 1 with singular E.

    States are ``x_i = y / (s - z_i)`` and an algebraic state ``y`` fixed
    by ``sum w_i x_i = u``; the output is ``b y + sum w_i h_i x_i``.
    """
    k = model.k
    E = np.zeros((k + 1, k + 1), dtype=complex)
    E[:k, :k] = np.eye(k)
    A = np.zeros((k + 1, k + 1), dtype=complex)
    A[:k, :k] = np.diag(model.nodes)
    A[:k, k] = 1.0
    A[k, :k] = -model.weights
    B = np.zeros((k + 1, 1), dtype=complex)
    B[k, 0] = 1.0
    C = np.append(model.weights * model.values, model.b).reshape(1, k + 1)
    return DescriptorRealization(E, A, B, C)


@dataclass(frozen=True)
class PolyAAFit:
    """Result of :func:`fit_poly_aa` for one channel."""

    model: BarycentricModel
    null: NullVector
    residual: float
    coeffs: PolyCoefficients | None
    unstable_poles: np.ndarray


def _default_split():
    return PartitionConfig(scheme="alternating", stride=2)


def fit_poly_aa_siso(samples: Sequence[FrequencySample], config: PartitionConfig | None = None,
                     tol=DEFAULT_TOL) -> PolyAAFit:
    samples = list(samples)
    shape = check_samples(samples)
    if shape != (1, 1):
        raise ConfigError("fit_poly_aa_siso needs SISO samples")
    ds = partition(samples, config or _default_split())
    if ds.k < 2 or ds.q < 2:
        raise ConfigError(f"need at least 2 nodes and 2 left points, got k={ds.k}, q={ds.q}")
    z, h = ds.right_points, ds.right_responses[0]
    s, g = ds.left_points, ds.left_responses[:, 0]
    aug = build_augmented(z, h, s, g)
    nv = solve_null_vector(aug, tol)
    model = BarycentricModel(z, h, nv.weights, nv.b)
    try:
        fitted = eval_barycentric(model, s)
        residual = float(np.max(np.abs(fitted - g)))
    except EvaluationError:
        residual = float("inf")
    try:
        coeffs = recover_poly_terms(model)
    except ImproperModelError:
        coeffs = None
    pl = poles(model)
    return PolyAAFit(model, nv, residual, coeffs, pl[pl.real >= 0])


def fit_poly_aa(samples: Sequence[FrequencySample], config: PartitionConfig | None = None,
                tol=DEFAULT_TOL):
    """Fit every (output, input) channel separately.

    Returns a p x m nested list of :class:`PolyAAFit`.
    """
    samples = list(samples)
    p, m = check_samples(samples)
    fits = []
    for a in range(p):
        row = []
        for c in range(m):
            chan = [FrequencySample(smp.point, smp.value[a, c]) for smp in samples]
            row.append(fit_poly_aa_siso(chan, config, tol))
        fits.append(row)
    return fits


def coefficients(fits) -> PolyCoefficients:
    """Assemble channelwise polynomial terms into p x m matrices."""
    P0 = np.array([[f.coeffs.P0[0, 0] for f in row] for row in fits])
    P1 = np.array([[f.coeffs.P1[0, 0] for f in row] for row in fits])
    return PolyCoefficients(P0, P1)


def fits_to_realization(fits) -> DescriptorRealization:
    """Block-diagonal realization of channelwise barycentric fits."""
    p, m = len(fits), len(fits[0])
    blocks = [(a, c, to_realization(fits[a][c].model)) for a in range(p) for c in range(m)]
    n = sum(r.order for _, _, r in blocks)
    E = np.zeros((n, n), dtype=complex)
    A = np.zeros((n, n), dtype=complex)
    B = np.zeros((n, m), dtype=complex)
    C = np.zeros((p, n), dtype=complex)
    off = 0
    for a, c, r in blocks:
        sl = slice(off, off + r.order)
        E[sl, sl] = r.E
        A[sl, sl] = r.A
        B[sl, c] = r.B[:, 0]
        C[a, sl] = r.C[0]
        off += r.order
    return DescriptorRealization(E, A, B, C)
