import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from truncmode.errors import ZeroWeightError
from truncmode.kde import (
    EPANECHNIKOV,
    GAUSSIAN,
    BandwidthRule,
    DensityCurve,
    EvaluationDomain,
    KernelSpec,
    bandwidth,
    default_domain,
    density_curve,
    density_estimated,
    density_known_G,
    kernel_eval,
    mode_estimate,
    parzen,
)
from truncmode.truncation import ObservedSample, estimate_alpha, lynden_bell_G

import oracles
from conftest import truncated_sample, vacuous_sample


class TestKernels:
    def test_gaussian_at_zero(self):
        assert kernel_eval(GAUSSIAN, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
        assert kernel_eval(GAUSSIAN, 0.0) == pytest.approx(0.39894, abs=1e-5)

    @pytest.mark.parametrize("kernel", [GAUSSIAN, EPANECHNIKOV])
    def test_symmetric_nonnegative(self, kernel):
        u = np.linspace(-5, 5, 101)
        np.testing.assert_array_equal(kernel(u), kernel(-u))
        assert np.all(kernel(u) >= 0)

    @pytest.mark.parametrize("kernel, lim", [(GAUSSIAN, 8.0), (EPANECHNIKOV, 1.0)])
    def test_integrates_to_one(self, kernel, lim):
        total, _ = integrate.quad(kernel, -lim, lim, epsabs=1e-12)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            KernelSpec("triangular")


class TestBandwidth:
    @pytest.mark.parametrize(
        "c, n, expected",
        [
            (1.0, 1, 1.0),
            (1.0, 32, 0.5),
            # 0.9 * 100 ** -0.2, evaluated independently: 0.9 / 10 ** 0.4
            (0.9, 100, 0.3582964534981475),
        ],
    )
    def test_values(self, c, n, expected):
        assert bandwidth(BandwidthRule(c), n) == pytest.approx(expected, rel=1e-12)

    def test_decreasing_in_n(self):
        hs = [bandwidth(BandwidthRule(2.0), n) for n in (1, 10, 100, 1000)]
        assert all(a > b for a, b in zip(hs, hs[1:]))

    @pytest.mark.parametrize("c", [0.0, -1.0])
    def test_rejects_nonpositive(self, c):
        with pytest.raises(ValueError):
            BandwidthRule(c)

    def test_normal_reference(self):
        x = np.array([0.0, 1.0, 2.0, 3.0])
        expected = 1.06 * np.std(x, ddof=1) * 4 ** -0.2
        assert BandwidthRule().for_sample(x) == pytest.approx(expected)


class TestDensityKnownG:
    def test_single_point(self):
        s = ObservedSample([0.0], [-1.0])
        assert density_known_G(s, 1.0, lambda t: np.ones_like(t), 0.0, 1.0) == pytest.approx(
            1 / math.sqrt(2 * math.pi)
        )

    def test_collapses_to_parzen(self):
        s = truncated_sample(np.random.default_rng(1), 50)
        t = np.linspace(-3, 3, 17)
        ones = lambda v: np.ones_like(np.asarray(v, dtype=float))
        np.testing.assert_allclose(
            density_known_G(s, 1.0, ones, t, 0.4), parzen(s.x, t, 0.4), rtol=1e-13
        )

    def test_three_pairs_term_by_term(self, three_pairs):
        G = lynden_bell_G(three_pairs)
        got = density_known_G(three_pairs, 1.0, G, 0.7, 0.5)
        assert got == pytest.approx(oracles.weighted_kde(three_pairs.pairs, 1.0, G, 0.7, 0.5))

    def test_zero_weight(self, three_pairs):
        with pytest.raises(ZeroWeightError):
            density_known_G(three_pairs, 1.0, lambda t: np.zeros_like(t), 0.7, 0.5)


class TestDensityEstimated:
    def test_three_pairs_hand_value(self, three_pairs):
        # alpha_n = 1 and G_n(X_i) = 1, so only the kernel terms remain
        k = oracles.gauss
        expected = (k(0.4) + k(0.0) + k(-0.4)) / (3 * 0.5)
        assert expected == pytest.approx(0.7569883740053863, rel=1e-15)
        assert density_estimated(three_pairs, 0.7, 0.5) == pytest.approx(expected, rel=1e-14)

    def test_matches_oracle_on_truncated_sample(self):
        s = truncated_sample(np.random.default_rng(3), 60)
        alpha = estimate_alpha(s).value
        G = lambda t: oracles.lb_G(s.pairs, t)
        for t in (-1.0, 0.0, 0.8):
            assert density_estimated(s, t, 0.3) == pytest.approx(
                oracles.weighted_kde(s.pairs, alpha, G, t, 0.3), rel=1e-10
            )

    def test_vacuous_equals_parzen(self):
        s = vacuous_sample(np.random.default_rng(2), 80)
        t = np.linspace(8, 12, 50)
        np.testing.assert_allclose(density_estimated(s, t, 0.3), parzen(s.x, t, 0.3), rtol=1e-12)

    def test_far_tail_underflows(self, three_pairs):
        assert density_estimated(three_pairs, 100.0, 0.5) < 1e-300

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_nonnegative(self, seed):
        s = truncated_sample(np.random.default_rng(seed), 40)
        assert np.all(density_estimated(s, np.linspace(-4, 4, 41), 0.3) >= 0)

    def test_vacuous_integrates_to_one(self):
        s = vacuous_sample(np.random.default_rng(5), 100)
        grid = np.linspace(s.x.min() - 4, s.x.max() + 4, 4001)
        total = integrate.trapezoid(density_estimated(s, grid, 0.3), grid)
        assert total == pytest.approx(1.0, abs=1e-3)


class TestDensityCurve:
    def test_matches_scalar_calls(self, three_pairs):
        dom = EvaluationDomain(0.4, 1.0, 3)
        curve = density_curve(three_pairs, dom, 0.5)
        scalars = [density_estimated(three_pairs, t, 0.5) for t in dom.grid]
        assert curve.values.tolist() == scalars

    def test_refinement_shares_values_bitwise(self):
        s = truncated_sample(np.random.default_rng(8), 80)
        dom = EvaluationDomain(-2.0, 2.0, 51)
        coarse = density_curve(s, dom, 0.35)
        fine = density_curve(s, dom.refined(), 0.35)
        np.testing.assert_array_equal(fine.grid[::2], coarse.grid)
        np.testing.assert_array_equal(fine.values[::2], coarse.values)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(9)
        s = truncated_sample(rng, 80)
        perm = rng.permutation(s.n)
        shuffled = ObservedSample(s.x[perm], s.y[perm])
        dom = EvaluationDomain(-2.0, 2.0, 40)
        np.testing.assert_array_equal(
            density_curve(s, dom, 0.3).values, density_curve(shuffled, dom, 0.3).values
        )

    def test_csv_roundtrip(self, tmp_path, three_pairs):
        curve = density_curve(three_pairs, EvaluationDomain(-1.0, 2.0, 25), 0.5)
        path = tmp_path / "curve.csv"
        curve.to_csv(path)
        assert path.read_text().splitlines()[0] == "x,fhat"
        back = DensityCurve.from_csv(path)
        np.testing.assert_array_equal(back.values, curve.values)
        np.testing.assert_array_equal(back.grid, curve.grid)

    def test_default_domain_inside_data(self):
        x = np.arange(101, dtype=float)
        dom = default_domain(x)
        assert (dom.a, dom.b, dom.grid_points) == (5.0, 95.0, 100)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            EvaluationDomain(1.0, 1.0)


class TestModeEstimate:
    def _curve(self, values):
        return DensityCurve(EvaluationDomain(-1.0, 1.0, 3), values)

    def test_unique_max(self):
        assert mode_estimate(self._curve([0.1, 0.5, 0.2])) == 0.0

    def test_tie_takes_smallest_abscissa(self):
        assert mode_estimate(self._curve([0.5, 0.3, 0.5])) == -1.0

    @given(st.floats(-100, 100, allow_nan=False), st.integers(0, 1000))
    def test_shift_equivariance(self, c, seed):
        values = np.random.default_rng(seed).random(11)
        base = DensityCurve(EvaluationDomain(0.0, 1.0, 11), values)
        shifted = DensityCurve(EvaluationDomain(c, c + 1.0, 11), values)
        idx = int(np.argmax(values))
        assert mode_estimate(shifted) == shifted.grid[idx]
        assert mode_estimate(shifted) - mode_estimate(base) == pytest.approx(c, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_refinement_never_lowers_peak(self, seed):
        s = truncated_sample(np.random.default_rng(seed), 60)
        dom = EvaluationDomain(-2.0, 2.0, 21)
        coarse = density_curve(s, dom, 0.3)
        fine = density_curve(s, dom.refined(), 0.3)
        assert fine.values.max() >= coarse.values.max()
