"""Monte-Carlo tables for the truncated density and mode estimators.

Every replica of a cell ``(n, truncation_rate)`` draws a fresh truncated
MA(1) sample from seed ``base_seed + replica``, fits the density estimator on
the evaluation grid and records the squared errors.  Replica results are
reduced in replica order, so serial and parallel runs agree bit for bit.
"""

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ExperimentError, TruncModeError
from .kde import GAUSSIAN, BandwidthRule, DensityCurve, EvaluationDomain, KernelSpec
from .kde import density_curve, mode_estimate
from .simulation import RNG_ALGORITHM, Ma1Config, TruncationDesign
from .simulation import simulate_observed, true_density, true_mode

__all__ = [
    "ExperimentConfig",
    "Report",
    "GmseReport",
    "MseReport",
    "gmse",
    "run_gmse_experiment",
    "run_mode_experiment",
    "run_experiment",
    "rate_diagnostic",
]


@dataclass(frozen=True)
class ExperimentConfig:
    sample_sizes: tuple = (50, 100, 500)
    truncation_rates: tuple = (0.1, 0.3, 0.5)
    replications: int = 300
    domain: EvaluationDomain = field(default_factory=lambda: EvaluationDomain(-3.0, 3.0, 100))
    base_seed: int = 0
    bandwidth: BandwidthRule = field(default_factory=BandwidthRule)
    kernel: KernelSpec = GAUSSIAN
    x_config: Ma1Config = field(default_factory=Ma1Config)
    y_config: Ma1Config = field(default_factory=Ma1Config)

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "truncation_rates", tuple(float(r) for r in self.truncation_rates))
        if not self.sample_sizes or min(self.sample_sizes) < 1:
            raise ValueError("sample sizes must be >= 1")
        if not self.truncation_rates or not all(0 < r < 1 for r in self.truncation_rates):
            raise ValueError("truncation rates must lie in (0, 1)")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.domain.grid_points < 2:
            raise ValueError("the grid needs at least 2 points")
        if self.base_seed < 0:
            raise ValueError("base_seed must be nonnegative")

    @property
    def grid_points(self):
        return self.domain.grid_points

    def to_dict(self):
        d = asdict(self)
        d["sample_sizes"] = list(self.sample_sizes)
        d["truncation_rates"] = list(self.truncation_rates)
        d["rng"] = RNG_ALGORITHM
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            sample_sizes=tuple(d["sample_sizes"]),
            truncation_rates=tuple(d["truncation_rates"]),
            replications=d["replications"],
            domain=EvaluationDomain(**d["domain"]),
            base_seed=d["base_seed"],
            bandwidth=BandwidthRule(**d["bandwidth"]),
            kernel=KernelSpec(**d["kernel"]),
            x_config=Ma1Config(**d["x_config"]),
            y_config=Ma1Config(**d["y_config"]),
        )


@dataclass
class Report:
    """Monte-Carlo results keyed by ``(n, truncation_rate)``."""

    entries: dict
    metadata: dict = field(default_factory=dict)

    metric = None
    CSV_COLUMNS = ("n", "truncation_rate", "metric", "value", "M", "seed")

    def __post_init__(self):
        if any(v < 0 for v in self.entries.values()):
            raise ValueError(f"{self.metric} values must be nonnegative")

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and self.entries == other.entries
            and self.metadata == other.metadata
        )

    def sizes(self):
        return sorted({n for n, _ in self.entries})

    def rates(self):
        return sorted({r for _, r in self.entries})

    def table(self):
        """Rows per truncation rate, columns per sample size."""
        return np.array([[self.entries[(n, r)] for n in self.sizes()] for r in self.rates()])

    def to_csv(self, path=None):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_COLUMNS)
        M = self.metadata.get("replications", "")
        seed = self.metadata.get("base_seed", "")
        for (n, r), v in sorted(self.entries.items()):
            writer.writerow([n, repr(r), self.metric, repr(v), M, seed])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_json(self, path=None):
        payload = {
            "metric": self.metric,
            "entries": [
                {"n": n, "truncation_rate": r, "value": v}
                for (n, r), v in sorted(self.entries.items())
            ],
            "metadata": self.metadata,
        }
        text = json.dumps(payload, indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_json(cls, text):
        payload = json.loads(text)
        kind = {"gmse": GmseReport, "mse": MseReport}[payload["metric"]]
        if cls is not Report and kind is not cls:
            raise ValueError(f"expected a {cls.metric} report, got {payload['metric']}")
        entries = {(e["n"], e["truncation_rate"]): e["value"] for e in payload["entries"]}
        return kind(entries, payload["metadata"])


class GmseReport(Report):
    metric = "gmse"


class MseReport(Report):
    metric = "mse"


def gmse(curves, truth, domain=None):
    """Mean over curves and grid points of the squared pointwise error.

    ``truth`` is either a callable density or an array of true values on
    the shared grid.
    """
    curves = list(curves)
    if not curves:
        raise ValueError("at least one curve is required")
    domain = curves[0].domain if domain is None else domain
    if any(c.domain != domain for c in curves):
        raise ValueError("all curves must share the evaluation grid")
    target = truth(domain.grid) if callable(truth) else np.asarray(truth, dtype=float)
    if np.shape(target) != (domain.grid_points,):
        raise ValueError("truth must give one value per grid point")
    per_curve = [np.mean((c.values - target) ** 2) for c in curves]
    return float(np.mean(per_curve))


def _fit_replica(config, n, rate, replica):
    design = TruncationDesign.for_rate(rate, config.x_config, config.y_config)
    try:
        sample = simulate_observed(design, n, config.base_seed + replica)
        h = config.bandwidth.for_sample(sample.x)
        return density_curve(sample, config.domain, h, config.kernel)
    except (TruncModeError, ValueError) as exc:
        raise ExperimentError(n, rate, replica, exc) from exc


def _cell_curves(config, n, rate, pool):
    reps = range(config.replications)
    if pool is None:
        return [_fit_replica(config, n, rate, k) for k in reps]
    m = config.replications
    return list(pool.map(_fit_replica, [config] * m, [n] * m, [rate] * m, reps))


def _metadata(config, metric):
    meta = config.to_dict()
    meta["metric"] = metric
    return meta


def run_experiment(config, workers=1, mode_estimator=mode_estimate):
    """Fill both tables from a single pass over the simulated curves.

    Returns ``(GmseReport, MseReport)``.
    """
    truth = true_density(config.x_config, config.domain.grid)
    mode = true_mode(config.x_config)
    g_entries, m_entries = {}, {}
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for rate in config.truncation_rates:
            for n in config.sample_sizes:
                curves = _cell_curves(config, n, rate, pool)
                g_entries[(n, rate)] = gmse(curves, truth, config.domain)
                errors = [(mode_estimator(c) - mode) ** 2 for c in curves]
                m_entries[(n, rate)] = float(np.mean(errors))
    finally:
        if pool is not None:
            pool.shutdown()
    return (
        GmseReport(g_entries, _metadata(config, "gmse")),
        MseReport(m_entries, _metadata(config, "mse")),
    )


def run_gmse_experiment(config, workers=1):
    return run_experiment(config, workers)[0]


def run_mode_experiment(config, workers=1, mode_estimator=mode_estimate):
    return run_experiment(config, workers, mode_estimator)[1]


def rate_diagnostic(report, truncation_rate=None):
    """Least-squares slope of ``log(metric)`` against ``log(n)`` at one rate."""
    rate = min(report.rates()) if truncation_rate is None else truncation_rate
    pts = sorted((n, v) for (n, r), v in report.entries.items() if r == rate)
    if len(pts) < 3:
        raise ValueError(f"need at least 3 sample sizes at rate {rate}, got {len(pts)}")
    n, v = np.array(pts, dtype=float).T
    if np.any(v <= 0):
        raise ValueError("metric values must be positive for a log-log fit")
    slope, _ = np.polyfit(np.log(n), np.log(v), 1)
    return float(slope)
