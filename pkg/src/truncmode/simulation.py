"""Negatively associated Gaussian MA(1) series and random left truncation.

An MA(1) process ``X_t = Z_t - nu * Z_{t-1}`` driven by Gaussian white noise
has a tridiagonal covariance with off-diagonal ``-nu * sigma**2``; for
``nu > 0`` the series is negatively associated and therefore widely orthant
dependent.  Truncation pairs an independent MA(1) series ``Y`` with ``X`` and
keeps the index-aligned pairs with ``x >= y``.
"""

import csv
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.stats import norm

from .errors import EmptySampleError
from .truncation import ObservedSample

__all__ = [
    "RNG_ALGORITHM",
    "Ma1Config",
    "TruncationDesign",
    "make_rng",
    "generate_ma1",
    "calibrate_truncation_mean",
    "truncation_process_mean",
    "apply_truncation",
    "simulate_observed",
    "true_density",
    "true_mode",
    "write_pairs_csv",
]

RNG_ALGORITHM = "numpy.random.Generator(PCG64)"


@dataclass(frozen=True)
class Ma1Config:
    """MA(1) parameters: moving-average coefficient, innovation sd and mean."""

    nu: float = 0.9
    sigma: float = 0.7
    mu: float = 0.0

    def __post_init__(self):
        # nu = 0 is allowed: it degenerates to white noise
        if not 0.0 <= self.nu < 1.0:
            raise ValueError(f"nu must lie in [0, 1), got {self.nu}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def mean(self):
        return self.mu * (1.0 - self.nu)

    @property
    def variance(self):
        return (1.0 + self.nu**2) * self.sigma**2

    @property
    def lag1_covariance(self):
        return -self.nu * self.sigma**2


@dataclass(frozen=True)
class TruncationDesign:
    x_config: Ma1Config = field(default_factory=Ma1Config)
    y_config: Ma1Config = field(default_factory=Ma1Config)
    target_alpha: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.target_alpha < 1.0:
            raise ValueError(f"target_alpha must lie in (0, 1), got {self.target_alpha}")

    @classmethod
    def for_rate(cls, truncation_rate, x_config=None, y_config=None):
        return cls(x_config or Ma1Config(), y_config or Ma1Config(), 1.0 - truncation_rate)

    def calibrated(self):
        """Copy whose ``y_config`` innovation mean hits ``target_alpha``."""
        return replace(self, y_config=replace(self.y_config, mu=calibrate_truncation_mean(self)))

    def to_dict(self):
        return asdict(self)


def make_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def generate_ma1(config, N, seed):
    """Draw ``N`` consecutive values of the MA(1) process from ``N + 1`` innovations."""
    if int(N) < 1:
        raise ValueError(f"series length must be >= 1, got {N}")
    z = make_rng(seed).normal(config.mu, config.sigma, int(N) + 1)
    return z[1:] - config.nu * z[:-1]


def truncation_process_mean(design):
    """Mean of the ``Y`` process giving ``P(X >= Y) = target_alpha``.

    ``X - Y`` is Gaussian with variance equal to the sum of the two marginal
    variances, so the mean gap is a normal quantile times its sd.
    """
    if not 0.0 < design.target_alpha < 1.0:
        raise ValueError(f"target_alpha must lie in (0, 1), got {design.target_alpha}")
    sd_gap = math.sqrt(design.x_config.variance + design.y_config.variance)
    return design.x_config.mean - sd_gap * float(norm.ppf(design.target_alpha))


def calibrate_truncation_mean(design):
    """Innovation mean of the ``Y`` process for the requested truncation rate."""
    return truncation_process_mean(design) / (1.0 - design.y_config.nu)


def apply_truncation(xs, ys):
    """Keep the index-aligned pairs with ``x >= y``.

    Returns the observed sample and the empirical truncation rate ``1 - n/N``.
    """
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.size != ys.size or xs.size == 0:
        raise ValueError("xs and ys must have equal, nonzero length")
    keep = xs >= ys
    n = int(keep.sum())
    if n == 0:
        raise EmptySampleError(f"no pair out of {xs.size} satisfies x >= y")
    return ObservedSample(xs[keep], ys[keep]), 1.0 - n / xs.size


def simulate_observed(design, n, seed, calibrate=True):
    """Simulate until at least ``n`` pairs survive truncation; keep the first ``n``.

    The ``X`` and ``Y`` series use independent child streams of ``seed``.
    The raw length starts near ``n / alpha`` and doubles on shortfall.
    """
    if int(n) < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if calibrate:
        design = design.calibrated()
    x_seed, y_seed = np.random.SeedSequence(seed).spawn(2)
    N = math.ceil(1.1 * n / design.target_alpha) + 20
    while True:
        xs = generate_ma1(design.x_config, N, make_rng(x_seed))
        ys = generate_ma1(design.y_config, N, make_rng(y_seed))
        keep = np.flatnonzero(xs >= ys)
        if keep.size >= n:
            idx = keep[:n]
            return ObservedSample(xs[idx], ys[idx])
        N *= 2


def true_density(config, x):
    """Marginal density of the MA(1) process."""
    out = norm.pdf(np.asarray(x, dtype=float), config.mean, math.sqrt(config.variance))
    return float(out) if np.ndim(out) == 0 else out


def true_mode(config):
    return config.mean


def write_pairs_csv(sample, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for x, y in zip(sample.x.tolist(), sample.y.tolist()):
            writer.writerow([repr(x), repr(y)])
