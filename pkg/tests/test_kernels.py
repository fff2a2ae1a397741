import os
import subprocess
import sys

import numpy as np
import pytest

from loewnerfit import _kernels as K

needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba unavailable")


def cplx(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def loewner_double_loop(mu, lam, V, Ldir, R, W):
    q, k = len(mu), len(lam)
    L = np.zeros((q, k), complex)
    Ls = np.zeros((q, k), complex)
    for j in range(q):
        for i in range(k):
            vr = sum(V[j, a] * R[a, i] for a in range(V.shape[1]))
            lw = sum(Ldir[j, a] * W[a, i] for a in range(Ldir.shape[1]))
            L[j, i] = (vr - lw) / (mu[j] - lam[i])
            Ls[j, i] = (mu[j] * vr - lw * lam[i]) / (mu[j] - lam[i])
    return L, Ls


def tangential(rng, q=5, k=4, p=2, m=3):
    return (1j * np.arange(1, q + 1) + 0.1, -1j * np.arange(1, k + 1) - 0.3,
            cplx(rng, q, m), cplx(rng, q, p), cplx(rng, m, k), cplx(rng, p, k))


@pytest.mark.parametrize("backend", ["numpy", pytest.param("numba", marks=needs_numba)])
def test_loewner_pair_matches_double_loop(rng, backend):
    args = tangential(rng)
    L, Ls = K.loewner_pair(*args, backend=backend)
    L0, Ls0 = loewner_double_loop(*args)
    np.testing.assert_allclose(L, L0, rtol=1e-13, atol=0)
    np.testing.assert_allclose(Ls, Ls0, rtol=1e-13, atol=0)


@needs_numba
def test_backends_agree(rng):
    args = tangential(rng, 7, 6, 3, 2)
    for a, b in zip(K.loewner_pair(*args, backend="numba"), K.loewner_pair(*args, backend="numpy")):
        np.testing.assert_allclose(a, b, rtol=1e-14, atol=0)

    s, g, z, h = cplx(rng, 9), cplx(rng, 9), cplx(rng, 4), cplx(rng, 4)
    np.testing.assert_allclose(K.cauchy_block(s, g, z, h, backend="numba"),
                               K.cauchy_block(s, g, z, h, backend="numpy"), rtol=1e-14)

    w, b = cplx(rng, 4), 0.7 - 0.2j
    x = np.r_[cplx(rng, 12), z[2]]
    v1, d1 = K.barycentric(x, z, h, w, b, backend="numba")
    v2, d2 = K.barycentric(x, z, h, w, b, backend="numpy")
    np.testing.assert_allclose(v1, v2, rtol=1e-13)
    np.testing.assert_allclose(d1[:-1], d2[:-1], rtol=1e-13)
    assert v1[-1] == v2[-1] == h[2]


def test_cauchy_block_entries(rng):
    s, g, z, h = cplx(rng, 3), cplx(rng, 3), cplx(rng, 2), cplx(rng, 2)
    C = K.cauchy_block(s, g, z, h, backend="numpy")
    for j in range(3):
        for i in range(2):
            assert abs(C[j, i] - (g[j] - h[i]) / (s[j] - z[i])) <= 1e-15 * abs(C[j, i])


def test_unknown_backend():
    with pytest.raises(ValueError):
        K.cauchy_block([1], [1], [0], [0], backend="cuda")


def test_env_flag_disables_numba():
    env = dict(os.environ, LOEWNERFIT_DISABLE_NUMBA="1")
    code = "from loewnerfit import _kernels as K; print(K.active_backend(), K.HAVE_NUMBA)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True).stdout.split()
    assert out == ["numpy", "False"]


def test_numpy_fallback_runs_a_fit():
    """The full pipeline must work with numba switched off."""
    env = dict(os.environ, LOEWNERFIT_DISABLE_NUMBA="1")
    code = (
        "import numpy as np\n"
        "from loewnerfit.synthetic import make_synthetic, sample_system, log_grid\n"
        "from loewnerfit.data import partition\n"
        "from loewnerfit.loewner import build_quadruple, reduce\n"
        "sys_ = make_synthetic(4, seed=3)\n"
        "real, rep = reduce(build_quadruple(partition(sample_system(sys_, log_grid(0.1, 1e3, 16)))))\n"
        "s = 3.3j\n"
        "print(rep.rank, abs(real(s) - sys_(s)).max() / abs(sys_(s)).max() < 1e-8)\n"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True).stdout.split()
    assert out == ["4", "True"]
