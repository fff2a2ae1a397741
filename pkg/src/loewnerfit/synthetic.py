"""Synthetic test systems with known proper/polynomial decomposition.

Also holds the intrusive projector oracle, which rebuilds the Loewner
quadruple from a known realization without going through the data.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spla

from .data import FrequencySample, TangentialDataset
from .errors import ConfigError, EvaluationError
from .loewner import DescriptorRealization, build_quadruple, eval_transfer
from .polyfit import PolyCoefficients


@dataclass(frozen=True)
class SyntheticSystem:
    """Strictly proper realization plus a linear polynomial part.

    When ``embedded`` is true the polynomial part is already contained in
    the (singular ``E``) realization and ``poly_truth`` only documents it.
    """

    realization: DescriptorRealization
    poly_truth: PolyCoefficients
    poles: np.ndarray
    residues: tuple = field(default=(), repr=False)
    symmetric: bool = False
    embedded: bool = False

    @property
    def order(self):
        return self.poles.size

    @property
    def p(self):
        return self.realization.p

    @property
    def m(self):
        return self.realization.m

    @property
    def is_proper(self):
        return not (np.any(self.poly_truth.P0) or np.any(self.poly_truth.P1))

    def __call__(self, s):
        H = eval_transfer(self.realization, s)
        if not self.embedded:
            H = H + self.poly_truth(s)
        return H

    def strictly_proper(self):
        """Same system with the polynomial part removed."""
        if self.embedded:
            raise ConfigError("polynomial part is embedded in the realization")
        p, m = self.poly_truth.shape
        return SyntheticSystem(self.realization, PolyCoefficients.zeros(p, m), self.poles,
                               self.residues, self.symmetric)

    def partial_fractions(self, s):
        """Independent evaluation ``sum_i c_i b_i^T / (s - p_i) + P0 + s P1``."""
        cols, rows = self.residues
        H = np.zeros((self.p, self.m), dtype=complex)
        for pole, c, b in zip(self.poles, cols, rows):
            H += np.outer(c, b) / (s - pole)
        return H + self.poly_truth(s)


def _pole_set(n, band, damping, symmetric):
    lo, hi = band
    if not (0 < lo <= hi):
        raise ConfigError(f"invalid pole band {band}")
    if not 0 < damping <= 1:
        raise ConfigError("damping must lie in (0, 1]")
    if n == 0:
        return np.zeros(0, dtype=complex)
    if not symmetric:
        mags = np.geomspace(lo, hi, n)
        return mags * complex(-damping, np.sqrt(1 - damping ** 2))
    npairs, nreal = divmod(n, 2)
    mags = np.geomspace(lo, hi, npairs + nreal)
    out = []
    for t, r in enumerate(mags):
        if nreal and t == 0:
            out.append(complex(-r, 0))
            continue
        z = r * complex(-damping, np.sqrt(1 - damping ** 2))
        out.extend([z, z.conjugate()])
    return np.array(out)


def _draw(rng, shape, symmetric_real=False):
    mag = rng.uniform(0.5, 1.5, shape)
    if symmetric_real:
        return mag * rng.choice([-1.0, 1.0], shape)
    return mag * np.exp(2j * np.pi * rng.uniform(size=shape))


def make_synthetic(order, band=(1.0, 100.0), P0=0.0, P1=0.0, p=1, m=1, seed=0,
                   symmetric=True, damping=0.2, poles=None, residues=None) -> SyntheticSystem:
    """Build a stable synthetic system ``C (sI - A)^{-1} B + P0 + s P1``.

    Pole magnitudes are log-spaced over ``band`` (conjugate pairs when
    ``symmetric``); residue factors have magnitudes uniform in
    ``[0.5, 1.5]``. ``poles``/``residues`` override the generated ones;
    for SISO, ``residues`` may be a plain vector.
    """
    if order < 0:
        raise ConfigError("order must be nonnegative")
    rng = np.random.default_rng(seed)
    pol = (np.asarray(poles, dtype=complex) if poles is not None
           else _pole_set(order, band, damping, symmetric))
    if pol.size != order:
        raise ConfigError(f"got {pol.size} poles for order {order}")
    if np.any(pol.real >= 0):
        raise ConfigError("poles must lie in the open left half-plane")
    if symmetric and not np.allclose(np.sort_complex(pol), np.sort_complex(pol.conj())):
        raise ConfigError("symmetric systems need conjugate-closed poles")

    if residues is not None:
        res = residues
        if not isinstance(res, tuple):
            res = (np.asarray(res, dtype=complex).reshape(order, 1), np.ones((order, 1)))
        cols = np.asarray(res[0], dtype=complex).reshape(order, p)
        rows = np.asarray(res[1], dtype=complex).reshape(order, m)
    else:
        cols = np.zeros((order, p), dtype=complex)
        rows = np.zeros((order, m), dtype=complex)
        t = 0
        while t < order:
            z = pol[t]
            real_pole = z.imag == 0
            c = _draw(rng, p, symmetric and real_pole)
            b = _draw(rng, m, symmetric and real_pole)
            if p == 1 and m == 1:
                b = np.ones(1, dtype=complex)
            cols[t], rows[t] = c, b
            if symmetric and not real_pole:
                cols[t + 1], rows[t + 1] = c.conj(), b.conj()
                t += 1
            t += 1

    A = np.diag(pol)
    B = rows.copy()
    C = cols.T.copy()
    if symmetric:
        A, B, C = _realify(pol, A, B, C)
    E = np.eye(order)
    P0 = np.broadcast_to(np.asarray(P0, dtype=complex), (p, m))
    P1 = np.broadcast_to(np.asarray(P1, dtype=complex), (p, m))
    real = DescriptorRealization(E, A, B, C)
    return SyntheticSystem(real, PolyCoefficients(P0, P1), pol, (cols, rows), symmetric)


def _realify(pol, A, B, C):
    n = pol.size
    T = np.eye(n, dtype=complex)
    t = 0
    while t < n:
        if pol[t].imag != 0:
            T[t:t + 2, t:t + 2] = [[1, 1], [1j, -1j]]
            t += 2
        else:
            t += 1
    Ti = np.linalg.inv(T)
    Ar, Br, Cr = T @ A @ Ti, T @ B, C @ Ti
    for X in (Ar, Br, Cr):
        scale = max(1.0, np.max(np.abs(X), initial=0.0))
        assert np.max(np.abs(X.imag), initial=0.0) <= 1e-12 * scale
    return Ar.real, Br.real, Cr.real


def dae_example(pole=-1.0, residue=1.0, P0=1.0, P1=2.0) -> SyntheticSystem:
    """SISO descriptor system with a nilpotent 2 x 2 block.

    ``H(s) = residue / (s - pole) + P0 + s P1``; the polynomial part comes
    from the infinite eigenvalues of the pencil, not from a separate term.
    """
    E = np.array([[1, 0, 0], [0, 0, 1], [0, 0, 0]], dtype=float)
    A = np.array([[pole, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    B = np.array([[1.0], [0.0], [1.0]])
    C = np.array([[residue, -P1, -P0]])
    real = DescriptorRealization(E, A, B, C)
    coeffs = PolyCoefficients([[P0]], [[P1]])
    res = (np.array([[residue]], dtype=complex), np.ones((1, 1)))
    return SyntheticSystem(real, coeffs, np.array([complex(pole)]), res, True, embedded=True)


def log_grid(a, b, n):
    """``n`` imaginary-axis points ``i*omega``, omega log-spaced on [a, b] inclusive."""
    if not (0 < a < b) or n < 1:
        raise ConfigError(f"invalid grid {a}:{b}:{n}")
    return 1j * np.geomspace(a, b, int(n))


def parse_grid(spec: str):
    """Parse ``"a:b:N"`` into log-spaced imaginary points."""
    try:
        a, b, n = spec.split(":")
        return log_grid(float(a), float(b), int(n))
    except ValueError:
        raise ConfigError(f"grid spec must look like a:b:N, got {spec!r}") from None


def sample_system(sys: SyntheticSystem, points) -> list[FrequencySample]:
    """Exact samples of ``sys`` at the given complex points."""
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    if sys.poles.size and np.any(np.isclose(points[:, None], sys.poles[None, :], rtol=0, atol=0)):
        raise EvaluationError("sample point hits a pole")
    return [FrequencySample(s, sys(s)) for s in points]


def projector_oracle(sys: SyntheticSystem, dataset: TangentialDataset):
    """Compare the projected realization with the data-built quadruple.

    Returns relative Frobenius residuals keyed ``"E"``, ``"A"``, ``"B"``,
    ``"C"`` for ``O E R = -L``, ``O A R = -Ls``, ``O B = V``, ``C R = W``.
    """
    if not sys.embedded and not sys.is_proper:
        raise ConfigError("projector oracle needs a strictly proper system")
    real = sys.realization
    E, A, B, C = real.E, real.A, real.B, real.C
    R = np.column_stack([
        spla.solve(lam * E - A, B @ r) for lam, r in
        zip(dataset.right_points, dataset.right_directions.T)
    ]) if dataset.k else np.zeros((real.order, 0))
    O = np.vstack([
        spla.solve((mu * E - A).T, C.T @ l) for mu, l in
        zip(dataset.left_points, dataset.left_directions)
    ]) if dataset.q else np.zeros((0, real.order))
    quad = build_quadruple(dataset)

    def rel(x, ref):
        d = np.linalg.norm(ref)
        return float(np.linalg.norm(x - ref) / (d if d > 0 else 1.0))

    return {"E": rel(O @ E @ R, -quad.L), "A": rel(O @ A @ R, -quad.Ls),
            "B": rel(O @ B, quad.V), "C": rel(C @ R, quad.W)}


# --------------------------------------------------------------------------
# named benchmarks for the CLI
# --------------------------------------------------------------------------

BENCHMARKS = {
    "spr_siso_5": dict(order=5, P0=0.0, P1=0.0, seed=1,
                       help="order-5 strictly proper SISO"),
    "msd_like": dict(order=10, band=(0.1, 100.0), P0=1.0, P1=2.0, seed=42,
                     help="order-10 SISO with P0=1, P1=2 (mass-spring-damper stand-in)"),
    "mimo_2x2": dict(order=6, p=2, m=2, P0=[[1.0, 0.5], [0.0, 2.0]],
                     P1=[[1.0, 0.0], [0.0, 2.0]], seed=7,
                     help="order-6 2x2 system with linear part"),
    "dae_index2": dict(dae=True, help="3-state descriptor system with nilpotent block"),
}


def get_benchmark(name) -> SyntheticSystem:
    try:
        opts = dict(BENCHMARKS[name])
    except KeyError:
        raise ConfigError(f"unknown benchmark {name!r}; try one of {sorted(BENCHMARKS)}") from None
    opts.pop("help")
    if opts.pop("dae", False):
        return dae_example()
    return make_synthetic(**opts)


def truth_document(sys: SyntheticSystem, name=None):
    pair = lambda M: {"re": np.real(M).tolist(), "im": np.imag(M).tolist()}
    doc = {"order": sys.order, "p": sys.p, "m": sys.m,
           "P0": pair(sys.poly_truth.P0), "P1": pair(sys.poly_truth.P1),
           "poles": [[z.real, z.imag] for z in sys.poles]}
    if name is not None:
        doc["name"] = name
    return doc


def truth_from_document(doc):
    """Rebuild ``(P0, P1, order)`` from a sidecar ``truth.json`` document."""
    mat = lambda d: np.array(d["re"], dtype=float) + 1j * np.array(d["im"], dtype=float)
    return mat(doc["P0"]), mat(doc["P1"]), int(doc["order"])
