import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from truncmode.kde import DensityCurve, EvaluationDomain
from truncmode.montecarlo import (
    ExperimentConfig,
    GmseReport,
    MseReport,
    Report,
    gmse,
    rate_diagnostic,
    run_experiment,
    run_gmse_experiment,
    run_mode_experiment,
)
from truncmode.simulation import Ma1Config, true_density

DOM2 = EvaluationDomain(0.0, 1.0, 2)


def small_config(**kw):
    base = dict(sample_sizes=(30, 60), truncation_rates=(0.1, 0.5), replications=4, base_seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


class TestGmse:
    def test_zero_for_exact_curves(self):
        dom = EvaluationDomain(-3, 3, 100)
        truth = lambda t: true_density(Ma1Config(), t)
        curves = [DensityCurve(dom, truth(dom.grid)) for _ in range(3)]
        assert gmse(curves, truth, dom) == 0.0

    def test_arithmetic(self):
        curve = DensityCurve(DOM2, [0.1, 0.3])
        assert gmse([curve], np.zeros(2), DOM2) == pytest.approx(0.05, rel=1e-15)

    def test_average_of_per_curve_values(self):
        a = DensityCurve(DOM2, [0.1, 0.3])
        b = DensityCurve(DOM2, [0.2, 0.0])
        ga, gb = gmse([a], np.zeros(2)), gmse([b], np.zeros(2))
        assert gmse([a, b], np.zeros(2)) == pytest.approx((ga + gb) / 2)

    @given(st.permutations(range(5)))
    def test_permutation_invariant(self, perm):
        rng = np.random.default_rng(0)
        curves = [DensityCurve(DOM2, rng.random(2)) for _ in range(5)]
        base = gmse(curves, np.zeros(2))
        assert gmse([curves[i] for i in perm], np.zeros(2)) == pytest.approx(base, rel=1e-14)

    def test_mismatched_grids(self):
        with pytest.raises(ValueError):
            gmse([DensityCurve(DOM2, [0, 0]), DensityCurve(EvaluationDomain(0, 2, 2), [0, 0])],
                 np.zeros(2))


class TestExperiments:
    def test_deterministic(self):
        cfg = small_config(replications=1)
        assert run_gmse_experiment(cfg) == run_gmse_experiment(cfg)
        assert run_mode_experiment(cfg) == run_mode_experiment(cfg)

    def test_parallel_matches_serial_bitwise(self):
        cfg = small_config()
        serial = run_experiment(cfg, workers=1)
        parallel = run_experiment(cfg, workers=2)
        assert serial == parallel

    def test_stubbed_mode_estimator(self):
        report = run_mode_experiment(small_config(), mode_estimator=lambda curve: 0.0)
        assert all(v == 0.0 for v in report.entries.values())

    def test_report_shape(self):
        g = run_gmse_experiment(small_config())
        assert sorted(g.entries) == [(30, 0.1), (30, 0.5), (60, 0.1), (60, 0.5)]
        assert g.table().shape == (2, 2)
        assert all(v >= 0 for v in g.entries.values())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(sample_sizes=(0,))
        with pytest.raises(ValueError):
            ExperimentConfig(truncation_rates=(1.0,))
        with pytest.raises(ValueError):
            ExperimentConfig(replications=0)
        with pytest.raises(ValueError):
            ExperimentConfig(domain=EvaluationDomain(-3, 3, 1))

    def test_config_roundtrip(self):
        cfg = small_config()
        d = cfg.to_dict()
        d.pop("rng")
        assert ExperimentConfig.from_dict(d) == cfg


class TestReports:
    @pytest.fixture
    def report(self):
        return run_gmse_experiment(small_config())

    def test_json_roundtrip(self, report):
        back = Report.from_json(report.to_json())
        assert isinstance(back, GmseReport)
        assert back == report

    def test_json_kind_check(self, report):
        with pytest.raises(ValueError):
            MseReport.from_json(report.to_json())

    def test_csv_layout(self, report):
        lines = report.to_csv().splitlines()
        assert lines[0] == "n,truncation_rate,metric,value,M,seed"
        assert len(lines) == 5
        n, rate, metric, value, M, seed = lines[1].split(",")
        assert (n, rate, metric, M, seed) == ("30", "0.1", "gmse", "4", "3")
        assert float(value) == report.entries[(30, 0.1)]

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            MseReport({(1, 0.1): -1.0})


class TestRateDiagnostic:
    def _report(self, pts):
        return GmseReport({(n, 0.1): v for n, v in pts})

    def test_inverse_power(self):
        r = self._report([(n, 1.0 / n) for n in (50, 100, 500)])
        assert rate_diagnostic(r) == pytest.approx(-1.0, rel=1e-12)

    def test_constant(self):
        r = self._report([(n, 0.01) for n in (50, 100, 500)])
        assert rate_diagnostic(r) == pytest.approx(0.0, abs=1e-12)

    def test_published_row(self):
        # least squares on (log 50, log .0061), (log 100, log .0031), (log 500, log .0011)
        r = self._report([(50, 0.0061), (100, 0.0031), (500, 0.0011)])
        assert rate_diagnostic(r) == pytest.approx(-0.72629249, abs=1e-6)

    def test_needs_three_points(self):
        with pytest.raises(ValueError):
            rate_diagnostic(self._report([(50, 0.1), (100, 0.05)]))
