"""Inner loops for Loewner assembly and barycentric evaluation.

Each kernel exists twice: a numba ``@njit`` version and a vectorized numpy
version. The numba path is used when numba imports cleanly and the
environment variable ``LOEWNERFIT_DISABLE_NUMBA`` is unset (or ``0``).
Both paths must agree to rounding; ``tests/test_kernels.py`` checks this.
"""
import os

import numpy as np

_FLAG = os.environ.get("LOEWNERFIT_DISABLE_NUMBA", "0").strip().lower()
_WANT_NUMBA = _FLAG in ("", "0", "false", "no")

try:
    if not _WANT_NUMBA:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------

def loewner_pair_numpy(mu, lam, V, Ldir, R, W):
    # V: q x m, Ldir: q x p, R: m x k, W: p x k
    vr = V @ R
    lw = Ldir @ W
    den = mu[:, None] - lam[None, :]
    L = (vr - lw) / den
    Ls = (mu[:, None] * vr - lw * lam[None, :]) / den
    return L, Ls


def cauchy_block_numpy(s, g, z, h):
    return (g[:, None] - h[None, :]) / (s[:, None] - z[None, :])


def barycentric_numpy(x, z, h, w, b):
    out = np.empty(x.shape[0], dtype=np.complex128)
    exact = np.zeros(x.shape[0], dtype=np.int64) - 1
    diff = x[:, None] - z[None, :]
    hit = diff == 0
    rows = np.nonzero(hit.any(axis=1))[0]
    for r in rows:
        exact[r] = np.argmax(hit[r])
    with np.errstate(divide="ignore", invalid="ignore"):
        C = 1.0 / diff
        num = b + C @ (w * h)
        den = C @ w
        out[:] = num / den
    for r in rows:
        out[r] = h[exact[r]]
        den[r] = np.inf
    return out, den


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def loewner_pair_numba(mu, lam, V, Ldir, R, W):
        q = mu.shape[0]
        k = lam.shape[0]
        m = V.shape[1]
        p = Ldir.shape[1]
        L = np.empty((q, k), dtype=np.complex128)
        Ls = np.empty((q, k), dtype=np.complex128)
        for j in range(q):
            for i in range(k):
                vr = 0j
                for a in range(m):
                    vr += V[j, a] * R[a, i]
                lw = 0j
                for c in range(p):
                    lw += Ldir[j, c] * W[c, i]
                den = mu[j] - lam[i]
                L[j, i] = (vr - lw) / den
                Ls[j, i] = (mu[j] * vr - lw * lam[i]) / den
        return L, Ls

    @njit(cache=True)
    def cauchy_block_numba(s, g, z, h):
        q = s.shape[0]
        k = z.shape[0]
        out = np.empty((q, k), dtype=np.complex128)
        for j in range(q):
            for i in range(k):
                out[j, i] = (g[j] - h[i]) / (s[j] - z[i])
        return out

    @njit(cache=True)
    def barycentric_numba(x, z, h, w, b):
        n = x.shape[0]
        k = z.shape[0]
        out = np.empty(n, dtype=np.complex128)
        dens = np.empty(n, dtype=np.complex128)
        for t in range(n):
            num = b
            den = 0j
            node = -1
            for i in range(k):
                d = x[t] - z[i]
                if d == 0:
                    node = i
                    break
                c = w[i] / d
                num += c * h[i]
                den += c
            if node >= 0:
                out[t] = h[node]
                dens[t] = np.inf
            elif den == 0:
                out[t] = np.nan
                dens[t] = den
            else:
                out[t] = num / den
                dens[t] = den
        return out, dens


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def loewner_pair(mu, lam, V, Ldir, R, W, backend=None):
    """Return ``(L, Ls)`` built entrywise from tangential data."""
    args = tuple(_c(a) for a in (mu, lam, V, Ldir, R, W))
    if _use_numba(backend):
        return loewner_pair_numba(*args)
    return loewner_pair_numpy(*args)


def cauchy_block(s, g, z, h, backend=None):
    """Return the divided-difference block ``(g_j - h_i)/(s_j - z_i)``."""
    args = tuple(_c(a) for a in (s, g, z, h))
    if _use_numba(backend):
        return cauchy_block_numba(*args)
    return cauchy_block_numpy(*args)


def barycentric(x, z, h, w, b, backend=None):
    """Evaluate the modified barycentric form on ``x``.

    Returns values and denominators. At a node the value is the nodal
    value (the denominator entry is meaningless there).
    """
    x, z, h, w = (_c(a) for a in (x, z, h, w))
    b = complex(b)
    if _use_numba(backend):
        return barycentric_numba(x, z, h, w, b)
    return barycentric_numpy(x, z, h, w, b)


def _use_numba(backend):
    if backend is None:
        return HAVE_NUMBA
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but unavailable")
        return True
    if backend == "numpy":
        return False
    raise ValueError(f"unknown backend {backend!r}")


def active_backend():
    return "numba" if HAVE_NUMBA else "numpy"
