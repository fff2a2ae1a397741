"""Loewner pencil assembly, interpolants and SVD-based reduction."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as spla

from . import _kernels
from .data import TangentialDataset
from .errors import (AssemblyError, ConfigError, DegenerateDataError, EvaluationError,
                     SingularPencilError)

DEFAULT_TOL = 1e-10
RCOND_MIN = 1e-14


def _ro(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LoewnerQuadruple:
    """Loewner matrix ``L``, shifted Loewner matrix ``Ls`` and data blocks.

    ``V`` is q x m (left responses as rows), ``W`` is p x k (right
    responses as columns). ``D`` is a feed-through term, nonzero only
    after :func:`apply_k_parameterization`.
    """

    L: np.ndarray
    Ls: np.ndarray
    V: np.ndarray
    W: np.ndarray
    dataset: TangentialDataset = field(repr=False, compare=False)
    D: np.ndarray | None = None

    def __post_init__(self):
        for name in ("L", "Ls", "V", "W"):
            object.__setattr__(self, name, _ro(getattr(self, name)))
        if self.D is not None:
            object.__setattr__(self, "D", _ro(self.D))

    @property
    def shape(self):
        return self.L.shape


@dataclass(frozen=True)
class DescriptorRealization:
    """Descriptor model ``C (sE - A)^{-1} B`` plus optional ``P0 + s P1``."""

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    poly: tuple | None = None

    def __post_init__(self):
        for name in ("E", "A", "B", "C"):
            object.__setattr__(self, name, _ro(getattr(self, name)))
        r = self.A.shape[0]
        if self.E.shape != (r, r) or self.A.shape != (r, r):
            raise ValueError("E and A must be square and of equal size")
        if self.B.shape[0] != r or self.C.shape[1] != r:
            raise ValueError("B/C do not match the state dimension")
        if self.poly is not None:
            P0, P1 = (_ro(P) for P in self.poly)
            if P0.shape != (self.p, self.m) or P1.shape != (self.p, self.m):
                raise ValueError("polynomial coefficients must be p x m")
            object.__setattr__(self, "poly", (P0, P1))

    @property
    def order(self):
        return self.A.shape[0]

    @property
    def p(self):
        return self.C.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    def __call__(self, s):
        return eval_transfer(self, s)


@dataclass(frozen=True)
class ReductionReport:
    singular_values_row: np.ndarray
    singular_values_col: np.ndarray
    rank: int
    tol: float

    def to_csv(self):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["index", "sigma_row", "sigma_col"])
        n = max(self.singular_values_row.size, self.singular_values_col.size)
        for t in range(n):
            a = self.singular_values_row[t] if t < self.singular_values_row.size else ""
            b = self.singular_values_col[t] if t < self.singular_values_col.size else ""
            wr.writerow([t + 1, repr(float(a)) if a != "" else "", repr(float(b)) if b != "" else ""])
        return buf.getvalue()


def build_quadruple(dataset: TangentialDataset, backend=None) -> LoewnerQuadruple:
    """Assemble ``(L, Ls, V, W)`` from tangential data."""
    mu, lam = dataset.left_points, dataset.right_points
    hits = np.argwhere(mu[:, None] == lam[None, :])
    if hits.size:
        j, i = hits[0]
        raise AssemblyError(f"left point {j} and right point {i} coincide ({mu[j]})")
    L, Ls = _kernels.loewner_pair(mu, lam, dataset.left_responses, dataset.left_directions,
                                  dataset.right_directions, dataset.right_responses,
                                  backend=backend)
    return LoewnerQuadruple(L, Ls, dataset.left_responses, dataset.right_responses, dataset)


def _rel(res, ref):
    if ref == 0.0:
        return 0.0 if res == 0.0 else float("inf")
    return float(res / ref)


def sylvester_residuals(quad: LoewnerQuadruple):
    """Relative residuals of the two Sylvester equations of the quadruple."""
    ds = quad.dataset
    M, Lam = ds.M, ds.Lambda
    Ldir, R = ds.left_directions, ds.right_directions
    L, Ls, V, W = quad.L, quad.Ls, quad.V, quad.W
    lhs1 = M @ L - L @ Lam
    rhs1 = V @ R - Ldir @ W
    lhs2 = M @ Ls - Ls @ Lam
    rhs2 = M @ V @ R - Ldir @ W @ Lam
    r1 = _rel(np.linalg.norm(lhs1 - rhs1), max(np.linalg.norm(lhs1), np.linalg.norm(rhs1)))
    r2 = _rel(np.linalg.norm(lhs2 - rhs2), max(np.linalg.norm(lhs2), np.linalg.norm(rhs2)))
    return r1, r2


def projection_residuals(quad: LoewnerQuadruple):
    """Relative residuals of ``Ls - L Lam = V R`` and ``Ls - M L = Ldir W``."""
    ds = quad.dataset
    ref = max(np.linalg.norm(quad.Ls), np.finfo(float).tiny)
    V, W, Ls = quad.V, quad.W, quad.Ls
    e1 = np.linalg.norm(Ls - quad.L @ ds.Lambda - V @ ds.right_directions)
    e2 = np.linalg.norm(Ls - ds.M @ quad.L - ds.left_directions @ W)
    return float(e1 / ref), float(e2 / ref)


def probe_sequence(count):
    """Deterministic probe points off the imaginary and real axes."""
    t = np.arange(count)
    return 10.0 ** (t / 3.0 - 1.0) * np.exp(1j * (0.3 + 0.7 * t)) + 0.1371 * (t + 1)


def check_regularity(obj, probes=8, threshold=None):
    """Probe ``det(A - zeta E)`` for a nonzero value.

    ``obj`` is a quadruple (pencil ``(Ls, L)``) or a realization (pencil
    ``(A, E)``). Returns ``(True, zeta)`` for the first probe at which the
    shifted pencil is numerically nonsingular, else ``(False, None)``.
    The test uses the smallest singular value of ``A - zeta E`` relative to
    ``||A|| + |zeta| ||E||``, a scale-free stand-in for the determinant.
    """
    if isinstance(obj, LoewnerQuadruple):
        A, E = obj.Ls, obj.L
    else:
        A, E = obj.A, obj.E
    if A.shape[0] != A.shape[1]:
        raise ConfigError(f"pencil is not square: {A.shape}")
    n = A.shape[0]
    if n == 0:
        return True, complex(probe_sequence(1)[0])
    if threshold is None:
        threshold = 10 * n * np.finfo(float).eps
    nA, nE = np.linalg.norm(A, 2), np.linalg.norm(E, 2)
    for zeta in probe_sequence(probes):
        scale = nA + abs(zeta) * nE
        if scale == 0:
            break
        smin = np.linalg.svd(A - zeta * E, compute_uv=False)[-1]
        if smin > threshold * scale:
            return True, complex(zeta)
    return False, None


def direct_interpolant(quad: LoewnerQuadruple) -> DescriptorRealization:
    """Realization ``(E, A, B, C) = (-L, -Ls, V, W)`` of a square regular pencil."""
    q, k = quad.shape
    if q != k:
        raise ConfigError(f"direct interpolant needs q == k, got {q} x {k}; use reduce()")
    ok, _ = check_regularity(quad)
    if not ok:
        raise SingularPencilError("Loewner pencil is singular; use reduce() instead")
    return DescriptorRealization(-quad.L, -quad.Ls, quad.V, quad.W, _feedthrough(quad))


def _feedthrough(quad):
    if quad.D is None:
        return None
    return quad.D, np.zeros_like(quad.D)


def _count(sv, tol):
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv >= tol * sv[0]))


def reduce(quad: LoewnerQuadruple, tol=DEFAULT_TOL, atol=0.0, rank=None):
    """Compress the Loewner pencil with the two short SVDs.

    The rank is the larger of the numerical ranks of ``[L, Ls]`` and
    ``[L; Ls]`` at relative tolerance ``tol`` unless given explicitly.
    Projection uses the conjugate transpose of the row-space factor.

    Returns
    -------
    realization, report
    """
    if tol < 0:
        raise ConfigError("tolerance must be nonnegative")
    L, Ls = quad.L, quad.Ls
    Y, s_row, _ = np.linalg.svd(np.hstack([L, Ls]), full_matrices=False)
    _, s_col, Xh = np.linalg.svd(np.vstack([L, Ls]), full_matrices=False)
    smax = max(s_row[0] if s_row.size else 0.0, s_col[0] if s_col.size else 0.0)
    if not np.isfinite(smax) or smax <= atol:
        raise DegenerateDataError(
            f"largest singular value {smax:.3e} is below the absolute floor {atol:.3e}")
    r = max(_count(s_row, tol), _count(s_col, tol)) if rank is None else int(rank)
    r = min(r, *quad.shape)
    Yr = Y[:, :r]
    Xr = Xh[:r].conj().T
    Yh = Yr.conj().T
    real = DescriptorRealization(-Yh @ L @ Xr, -Yh @ Ls @ Xr, Yh @ quad.V, quad.W @ Xr,
                                 _feedthrough(quad))
    return real, ReductionReport(_ro_real(s_row), _ro_real(s_col), r, float(tol))


def _ro_real(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def apply_k_parameterization(quad: LoewnerQuadruple, K) -> LoewnerQuadruple:
    """Shift the quadruple by a feed-through ``K`` (p x m).

    Returns ``(W - K R, L, Ls - Ldir K R, V - Ldir K)`` with feed-through
    ``K``; every such quadruple interpolates the same tangential data.
    """
    ds = quad.dataset
    K = np.atleast_2d(np.asarray(K, dtype=np.complex128))
    if K.shape != (ds.p, ds.m):
        raise ConfigError(f"K must have shape {(ds.p, ds.m)}, got {K.shape}")
    Ldir, R = ds.left_directions, ds.right_directions
    D = K if quad.D is None else quad.D + K
    return replace(quad, Ls=quad.Ls - Ldir @ K @ R, V=quad.V - Ldir @ K,
                   W=quad.W - K @ R, D=D)


def _gecon(lu, anorm):
    gecon, = spla.get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    return rcond


def eval_transfer(model: DescriptorRealization, s) -> np.ndarray:
    """Evaluate ``C (sE - A)^{-1} B [+ P0 + s P1]`` at one point."""
    s = complex(s)
    if model.order:
        T = s * model.E - model.A
        # row/column equilibration: descriptor pencils at large |s| are badly scaled, not singular
        rs = np.max(np.abs(T), axis=1)
        if np.any(rs == 0):
            raise EvaluationError(f"shifted pencil has a zero row at s={s}", s)
        T = T / rs[:, None]
        cs = np.max(np.abs(T), axis=0)
        if np.any(cs == 0):
            raise EvaluationError(f"shifted pencil has a zero column at s={s}", s)
        T = T / cs[None, :]
        lu, piv = spla.lu_factor(T, check_finite=False)
        rcond = _gecon(lu, np.linalg.norm(T, 1))
        if not rcond >= RCOND_MIN:
            raise EvaluationError(f"shifted pencil singular at s={s} (rcond={rcond:.2e})", s)
        X = spla.lu_solve((lu, piv), model.B / rs[:, None], check_finite=False)
        H = model.C @ (X / cs[:, None])
    else:
        H = np.zeros((model.p, model.m), dtype=np.complex128)
    if model.poly is not None:
        H = H + model.poly[0] + s * model.poly[1]
    return H


def eval_grid(model, points, on_error="raise"):
    """Evaluate a model on many points; returns an array ``(N, p, m)``.

    With ``on_error="nan"`` points where evaluation fails get NaN entries.
    """
    points = np.asarray(points, dtype=np.complex128).ravel()
    out = np.empty((points.size, model.p, model.m), dtype=np.complex128)
    for t, s in enumerate(points):
        try:
            out[t] = model(s)
        except EvaluationError:
            if on_error != "nan":
                raise
            out[t] = np.nan
    return out
