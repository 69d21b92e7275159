"""Kernel density and mode estimation corrected for left truncation."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import AllTermsDroppedError, ZeroWeightError
from .truncation import estimate_alpha, lynden_bell_G

__all__ = [
    "KernelSpec",
    "GAUSSIAN",
    "EPANECHNIKOV",
    "BandwidthRule",
    "EvaluationDomain",
    "DensityCurve",
    "kernel_eval",
    "bandwidth",
    "normal_reference_constant",
    "default_domain",
    "parzen",
    "density_known_G",
    "density_estimated",
    "density_curve",
    "mode_estimate",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _gaussian(u):
    return _INV_SQRT_2PI * np.exp(-0.5 * u * u)


def _epanechnikov(u):
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


_KERNELS = {"gaussian": _gaussian, "epanechnikov": _epanechnikov}


@dataclass(frozen=True)
class KernelSpec:
    family: str = "gaussian"

    def __post_init__(self):
        if self.family not in _KERNELS:
            raise ValueError(
                f"unknown kernel {self.family!r}; choose from {sorted(_KERNELS)}"
            )

    def __call__(self, u):
        out = _KERNELS[self.family](np.asarray(u, dtype=float))
        return float(out) if out.ndim == 0 else out


GAUSSIAN = KernelSpec("gaussian")
EPANECHNIKOV = KernelSpec("epanechnikov")


def kernel_eval(kernel, u):
    return kernel(u)


@dataclass(frozen=True)
class BandwidthRule:
    """``h_n = c * n**(-1/5)``.

    With ``c=None`` the constant is chosen per sample by the normal-reference
    rule, ``1.06 * std(x)``.
    """

    c: float = None

    def __post_init__(self):
        if self.c is not None and not self.c > 0:
            raise ValueError(f"bandwidth constant must be positive, got {self.c}")

    def constant_for(self, x):
        return normal_reference_constant(x) if self.c is None else self.c

    def for_sample(self, x):
        x = np.asarray(x)
        return bandwidth(BandwidthRule(self.constant_for(x)), x.size)


def normal_reference_constant(x):
    x = np.asarray(x, dtype=float)
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    if not sd > 0:
        raise ValueError("normal-reference bandwidth needs a non-degenerate sample")
    return 1.06 * sd


def bandwidth(rule, n):
    if rule.c is None:
        raise ValueError("rule has no fixed constant; use rule.for_sample(x)")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return rule.c * n ** -0.2


@dataclass(frozen=True)
class EvaluationDomain:
    a: float
    b: float
    grid_points: int = 100

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"domain needs a < b, got [{self.a}, {self.b}]")
        if int(self.grid_points) < 1:
            raise ValueError("grid_points must be positive")

    @property
    def grid(self):
        return np.linspace(self.a, self.b, int(self.grid_points))

    def refined(self):
        """Domain whose grid contains this grid plus all midpoints."""
        return EvaluationDomain(self.a, self.b, 2 * int(self.grid_points) - 1)


def default_domain(x, grid_points=100):
    """Domain spanning the 5th to 95th percentile of the observed lifetimes."""
    a, b = np.percentile(np.asarray(x, dtype=float), [5.0, 95.0])
    return EvaluationDomain(float(a), float(b), grid_points)


@dataclass(frozen=True, eq=False)
class DensityCurve:
    domain: EvaluationDomain
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if values.size != self.domain.grid_points:
            raise ValueError("one value per grid point is required")
        if np.any(values < 0):
            raise ValueError("density values must be nonnegative")
        object.__setattr__(self, "values", values)

    @property
    def grid(self):
        return self.domain.grid

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "fhat"])
            for x, v in zip(self.grid.tolist(), self.values.tolist()):
                writer.writerow([repr(x), repr(v)])

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        domain = EvaluationDomain(data[0, 0], data[-1, 0], data.shape[0])
        return cls(domain, data[:, 1])


def _kernel_sum(kernel, x, centers, weights, h):
    # fixed summation order: rows are reduced independently, centers sorted
    x = np.asarray(x, dtype=float)
    order = np.argsort(centers, kind="stable")
    centers, weights = centers[order], weights[order]
    u = (np.atleast_1d(x)[:, None] - centers[None, :]) / h
    out = (kernel(u) * weights).sum(axis=1)
    return float(out[0]) if x.ndim == 0 else out


def parzen(data, x, h, kernel=GAUSSIAN):
    """Plain Parzen-Rosenblatt estimator on ``data``."""
    data = np.asarray(data, dtype=float).ravel()
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    return _kernel_sum(kernel, x, data, np.full(data.size, 1.0 / (data.size * h)), h)


def density_known_G(sample, alpha, G, x, h, kernel=GAUSSIAN):
    """Truncation-weighted kernel estimator with a known ``alpha`` and ``G``.

    ``G`` is any callable evaluating the truncation distribution function,
    e.g. a fitted :class:`StepFunction` or a true CDF.
    """
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    g = np.asarray(G(sample.x), dtype=float)
    if np.any(g <= 0):
        raise ZeroWeightError("G(X_i) = 0 for some observation; shrink the domain")
    weights = alpha / (sample.n * h) / g
    return _kernel_sum(kernel, x, sample.x, weights, h)


def _estimated_weights(sample, h, alpha=None, G=None):
    alpha = estimate_alpha(sample).value if alpha is None else alpha
    G = lynden_bell_G(sample) if G is None else G
    g = np.asarray(G(sample.x), dtype=float)
    keep = g != 0
    if not np.any(keep):
        raise AllTermsDroppedError("G_n(X_i) = 0 for every observation")
    weights = np.zeros(sample.n)
    weights[keep] = alpha / (sample.n * h) / g[keep]
    return weights


def density_estimated(sample, x, h, kernel=GAUSSIAN):
    """Kernel density estimate of the lifetime density from truncated data.

    Both the observation probability and the truncation distribution are
    replaced by their product-limit estimates; terms with ``G_n(X_i) = 0``
    are dropped.
    """
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    return _kernel_sum(kernel, x, sample.x, _estimated_weights(sample, h), h)


def density_curve(sample, domain, h, kernel=GAUSSIAN):
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    weights = _estimated_weights(sample, h)
    return DensityCurve(domain, _kernel_sum(kernel, domain.grid, sample.x, weights, h))


def mode_estimate(curve):
    """Smallest grid abscissa at which the curve attains its maximum."""
    return float(curve.grid[int(np.argmax(curve.values))])
