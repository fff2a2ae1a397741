import numpy as np
import pytest

from conftest import closed_form, max_rel_error
from loewnerfit.data import FrequencySample, PartitionConfig, TangentialDataset, partition
from loewnerfit.errors import ConfigError, IllPosedDirectionsError
from loewnerfit.loewner import build_quadruple, reduce
from loewnerfit.polyfit import (HighFreqWindow, PolyCoefficients, estimate_general, estimate_pair,
                                estimate_single, fit_poly_loewner, poly_from_quadruple,
                                sample_window, subtract_poly)
from loewnerfit.synthetic import log_grid, make_synthetic, sample_system


def lin(s):
    return 2 + 3 * s


def mixed(s):
    return 1 + s + 1 / (s + 1)


def sample(f, s):
    return FrequencySample(s, np.atleast_2d(f(s)))


class TestSingle:
    def test_linear(self):
        c = estimate_single(sample(lin, 10j))
        assert (c.P0[0, 0], c.P1[0, 0]) == (2, 3)

    def test_mimo_odd_part(self):
        P1 = np.array([[1, 0], [0, 2]])
        c = estimate_single(FrequencySample(5j, 5j * P1))
        np.testing.assert_array_equal(c.P0, 0)
        np.testing.assert_array_equal(c.P1, P1)

    def test_mixed_at_high_frequency(self):
        s = 1e6j
        c = estimate_single(sample(mixed, s))
        assert abs(c.P0[0, 0] - (1 + (1 / (s + 1)).real)) <= 1e-12
        assert abs(c.P0[0, 0] - 1) <= 1e-11
        assert abs(c.P1[0, 0] - 1) <= 1e-7

    @pytest.mark.parametrize("s", [0j, 1 + 1j])
    def test_bad_point(self, s):
        with pytest.raises(ConfigError):
            estimate_single(FrequencySample(s, [[1]]))


class TestPair:
    def test_linear(self):
        c = estimate_pair(sample(lin, 10j), sample(lin, 20j))
        assert (c.P0[0, 0], c.P1[0, 0]) == (2, 3)

    def test_constant(self):
        c = estimate_pair(sample(lambda s: 4.5, 3j), sample(lambda s: 4.5, 7j))
        assert (c.P0[0, 0], c.P1[0, 0]) == (4.5, 0)

    def test_mixed(self):
        c = estimate_pair(sample(mixed, 1e7j), sample(mixed, 2e7j))
        assert abs(c.P1[0, 0] - 1) <= 1e-13
        assert abs(c.P0[0, 0] - 1) <= 1e-6

    def test_equal_frequencies(self):
        with pytest.raises(ConfigError):
            estimate_pair(sample(lin, 2j), sample(lin, 2j))

    def test_exact_on_linear_functions(self, rng):
        for _ in range(20):
            P0, P1 = rng.standard_normal(2) * 10 ** rng.uniform(-3, 3, 2)
            w1, w2 = 10 ** rng.uniform(-2, 9, 2)
            c = estimate_pair(sample(lambda s: P0 + P1 * s, 1j * w1),
                              sample(lambda s: P0 + P1 * s, 1j * w2))
            assert abs(c.P1[0, 0] - P1) <= 1e-13 * abs(P1) + 1e-13 * abs(P0) / max(w1, w2)
            assert abs(c.P0[0, 0] - P0) <= 1e-13 * (abs(P0) + abs(P1) * max(w1, w2))


class TestGeneral:
    def test_linear_siso(self):
        ds = partition(closed_form(lin, [10j, 20j, 30j, 40j]))
        c = estimate_general(ds)
        assert abs(c.P1[0, 0] - 3) <= 1e-12
        assert abs(c.P0[0, 0] - 2) <= 1e-12

    def test_mixed_siso(self):
        ds = partition(closed_form(mixed, log_grid(1e7, 1e9, 20)))
        c = estimate_general(ds)
        assert abs(c.P1[0, 0] - 1) <= 1e-7
        assert abs(c.P0[0, 0] - 1) <= 1e-5

    def test_formula_independently(self):
        pts = log_grid(1e7, 1e9, 20)
        ds = partition(closed_form(mixed, pts))
        # with unit directions pinv(ones) = ones^T / n, so P1 is the mean of L
        mu, lam = ds.left_points, ds.right_points
        v, w = ds.left_responses[:, 0], ds.right_responses[0]
        L = (v[:, None] - w[None, :]) / (mu[:, None] - lam[None, :])
        ones_l, ones_r = np.ones(ds.q), np.ones(ds.k)
        P1 = ones_l @ L @ ones_r / (ds.q * ds.k)
        c = estimate_general(ds)
        assert abs(c.P1[0, 0] - P1.real) <= 1e-12

    def test_reduces_to_pair_for_one_point_per_side(self):
        one = np.ones((1, 1))
        s1, s2 = 3e5j, 7e5j
        ds = TangentialDataset([s1], one, [[mixed(s1)]], [s2], one, [[mixed(s2)]])
        c = poly_from_quadruple(build_quadruple(ds))
        ref = estimate_pair(sample(mixed, s1), sample(mixed, s2))
        assert abs(c.P1[0, 0] - ref.P1[0, 0]) <= 1e-14 * abs(ref.P1[0, 0])
        assert abs(c.P0[0, 0] - ref.P0[0, 0]) <= 1e-9 * abs(ref.P0[0, 0])

    def test_mimo_against_least_squares(self):
        P1 = np.array([[1.0, 0.0], [0.0, 2.0]])
        P0 = np.array([[0.5, 1.0], [-1.0, 0.25]])
        sys_ = make_synthetic(4, P0=P0, P1=P1, p=2, m=2, seed=3)
        ds = partition(sample_system(sys_, log_grid(1e7, 1e9, 8)))
        assert (ds.q, ds.k) == (4, 4)
        c = estimate_general(ds)
        # oracle: L[j,i] = l_j^T P1 r_i solved as an overdetermined system for vec(P1)
        L = build_quadruple(ds).L
        rows = [np.kron(ds.left_directions[j], ds.right_directions[:, i])
                for j in range(ds.q) for i in range(ds.k)]
        vecP1 = np.linalg.lstsq(np.array(rows), L.ravel(), rcond=None)[0]
        np.testing.assert_allclose(c.P1, vecP1.reshape(2, 2), rtol=0, atol=1e-12)
        np.testing.assert_allclose(c.P1.real, P1, rtol=0, atol=1e-6)

    def test_rank_deficient_directions(self):
        H = [np.array([[1.0, 2.0], [3.0, 4.0]]) * (1 + t) for t in range(4)]
        samples = [FrequencySample(1j * (t + 1), H[t]) for t in range(4)]
        cfg = PartitionConfig(direction_rule="given", left_directions=np.ones((2, 2)),
                              right_directions=np.eye(2))
        with pytest.raises(IllPosedDirectionsError):
            estimate_general(partition(samples, cfg))

    def test_needs_enough_points(self):
        with pytest.raises(ConfigError):
            estimate_general(partition(closed_form(lin, [1j, 2j])))
        sys_ = make_synthetic(2, p=3, m=1, seed=0)
        with pytest.raises(ConfigError):
            estimate_general(partition(sample_system(sys_, log_grid(1e7, 1e9, 4))))

    def test_imaginary_part_reported_when_closed(self):
        pts = log_grid(1e7, 1e9, 10)
        samples = closed_form(mixed, np.r_[pts, pts.conj()])
        c = estimate_general(partition(samples, PartitionConfig(conjugate_closure=True)))
        assert c.P1.imag.max() == 0
        assert c.imag_residual <= 1e-10

    def test_monotone_window_improvement(self):
        sys_ = make_synthetic(5, P0=1, P1=2, seed=6)
        errs = []
        for lo in (1e2, 1e3, 1e4):
            win = HighFreqWindow(lo, 100 * lo, 10)
            c = estimate_general(partition(sample_window(sys_, win)))
            errs.append(abs(c.P1[0, 0] - 2))
        assert errs[1] * 5 <= errs[0]
        assert errs[2] * 5 <= errs[1]


class TestSubtract:
    def test_zero(self):
        samples = closed_form(mixed, [1j, 2j])
        out = subtract_poly(samples, PolyCoefficients.zeros(1, 1))
        assert [s.value[0, 0] for s in out] == [s.value[0, 0] for s in samples]

    def test_exact_cancel(self):
        out = subtract_poly(closed_form(lin, [1j, 5j, 9j]), PolyCoefficients(2, 3))
        assert all(s.value[0, 0] == 0 for s in out)

    def test_remainder(self):
        pts = log_grid(0.01, 100, 9)
        out = subtract_poly(closed_form(mixed, pts), PolyCoefficients(1, 1))
        for s, smp in zip(pts, out):
            assert smp.point == s
            assert abs(smp.value[0, 0] - 1 / (s + 1)) <= 1e-14 * max(1, abs(s))

    def test_shape_mismatch(self):
        with pytest.raises(ConfigError):
            subtract_poly(closed_form(lin, [1j]), PolyCoefficients.zeros(2, 2))


class TestWindow:
    def test_defaults(self):
        w = HighFreqWindow()
        assert w.omegas()[0] == 1e7 and w.omegas()[-1] == pytest.approx(1e9)
        assert w.points().size == 10

    @pytest.mark.parametrize("args", [(1e9, 1e7), (0, 1), (1, 2, 0), (1, 2, 3, "cubic")])
    def test_invalid(self, args):
        with pytest.raises(ConfigError):
            HighFreqWindow(*args)


class TestFit:
    def test_end_to_end(self):
        sys_ = make_synthetic(5, P0=1, P1=2, seed=5)
        lo = sample_system(sys_, log_grid(1e-2, 1e4, 40))
        hi = sample_system(sys_, log_grid(1e7, 1e9, 10))
        real, rep, c = fit_poly_loewner(lo, hi)
        assert rep.rank == 5
        probes = log_grid(1e-2, 1e4, 200) * (1 + 1e-3)
        assert max_rel_error(sys_, real, probes) <= 1e-6
        np.testing.assert_allclose(real.poly[1], c.P1)

    def test_strictly_proper_truth(self):
        sys_ = make_synthetic(4, seed=12)
        lo = sample_system(sys_, log_grid(1e-2, 1e4, 40))
        hi = sample_system(sys_, log_grid(1e7, 1e9, 10))
        _, _, c = fit_poly_loewner(lo, hi)
        band = max(np.linalg.norm(s.value) for s in lo)
        assert np.linalg.norm(c.P1) <= 1e-7 * band

    def test_pure_polynomial(self):
        lo = closed_form(lin, log_grid(1e-2, 1e2, 20))
        hi = closed_form(lin, [10j * t for t in range(1, 5)] + [1e3j * t for t in range(1, 5)])
        real, rep, c = fit_poly_loewner(lo, hi)
        assert rep is None and real.order == 0
        assert abs(c.P1[0, 0] - 3) <= 1e-12 and abs(c.P0[0, 0] - 2) <= 1e-12
        assert real(7j)[0, 0] == pytest.approx(2 + 21j, rel=1e-12)

    def test_composition_identity(self):
        sys_ = make_synthetic(4, P0=0.5, P1=1.5, seed=21)
        lo = sample_system(sys_, log_grid(1e-2, 1e4, 30))
        hi = sample_system(sys_, log_grid(1e7, 1e9, 10))
        truth = sys_.poly_truth
        real, rep, _ = fit_poly_loewner(lo, hi, coeffs=truth)
        plain, rep2 = reduce(build_quadruple(partition(subtract_poly(lo, truth))))
        assert rep.rank == rep2.rank
        np.testing.assert_array_equal(real.E, plain.E)
        np.testing.assert_array_equal(real.A, plain.A)
        np.testing.assert_array_equal(real.B, plain.B)
        np.testing.assert_array_equal(real.C, plain.C)

    def test_mimo(self):
        P0 = np.array([[1, 0.5], [0, 2]])
        P1 = np.array([[1, 0], [0, 2]])
        sys_ = make_synthetic(6, P0=P0, P1=P1, p=2, m=2, seed=7)
        lo = sample_system(sys_, log_grid(1e-2, 1e4, 40))
        hi = sample_system(sys_, log_grid(1e7, 1e9, 10))
        real, rep, c = fit_poly_loewner(lo, hi)
        assert rep.rank == 6
        np.testing.assert_allclose(c.P1, P1, atol=1e-6)
        assert max_rel_error(sys_, real, log_grid(1e-2, 1e9, 100) * (1 + 1e-3)) <= 1e-6
