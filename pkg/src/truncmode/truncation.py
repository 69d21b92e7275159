"""Product-limit estimation for randomly left-truncated samples.

A pair ``(x, y)`` is only observed when ``y <= x``.  From the observed pairs we
build the risk-set fraction ``C_n``, the Lynden-Bell estimators ``F_n`` (of the
lifetime distribution) and ``G_n`` (of the truncation distribution), and the
estimator of the observation probability ``alpha = P(X >= Y)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, DegenerateRiskSetError, EmptyRiskSetsError

__all__ = [
    "ObservedSample",
    "StepFunction",
    "AlphaEstimate",
    "empirical_c",
    "risk_set_counts",
    "lynden_bell_F",
    "lynden_bell_G",
    "alpha_at",
    "estimate_alpha",
    "ecdf",
]


@dataclass(frozen=True, eq=False)
class ObservedSample:
    """Observed ``(x, y)`` pairs of a left-truncated sample.

    Parameters
    ----------
    x : array_like
        Lifetimes.
    y : array_like
        Truncation times, index-aligned with ``x``; ``y[i] <= x[i]`` for all i.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        y = np.array(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise DataFormatError(f"x and y lengths differ ({x.size} vs {y.size})")
        if x.size == 0:
            raise DataFormatError("an observed sample needs at least one pair")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataFormatError("observed pairs must be finite")
        bad = np.flatnonzero(y > x)
        if bad.size:
            raise DataFormatError(
                f"truncation condition y <= x violated at rows {(bad + 1).tolist()}",
                rows=(bad + 1).tolist(),
            )
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_pairs(cls, pairs):
        arr = np.asarray(list(pairs), dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @property
    def n(self):
        return self.x.size

    @property
    def pairs(self):
        return list(zip(self.x.tolist(), self.y.tolist()))

    def __len__(self):
        return self.n


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Right-continuous piecewise-constant function.

    ``values[k]`` holds on ``[locations[k], locations[k + 1])`` and
    ``value_before`` holds below ``locations[0]``.
    """

    locations: np.ndarray
    values: np.ndarray
    value_before: float = 0.0

    def __post_init__(self):
        loc = np.array(self.locations, dtype=float).ravel()
        val = np.array(self.values, dtype=float).ravel()
        if loc.shape != val.shape:
            raise ValueError("locations and values must have equal length")
        if loc.size > 1 and np.any(np.diff(loc) <= 0):
            raise ValueError("jump locations must be strictly increasing")
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "value_before", float(self.value_before))

    def _lookup(self, x, side):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.locations, x, side=side) - 1
        table = np.concatenate(([self.value_before], self.values))
        out = table[idx + 1]
        return float(out) if out.ndim == 0 else out

    def __call__(self, x):
        return self._lookup(x, "right")

    def left_limit(self, x):
        """Value just below ``x``."""
        return self._lookup(x, "left")

    @property
    def jumps(self):
        return list(zip(self.locations.tolist(), self.values.tolist()))


@dataclass(frozen=True)
class AlphaEstimate:
    value: float
    evaluation_points: np.ndarray = field(repr=False)
    max_spread: float


def risk_set_counts(sample, t):
    """Return ``n * C_n(t)``, the number of pairs with ``y_i <= t <= x_i``."""
    # y_i <= x_i, so {x_i < t} is a subset of {y_i <= t}
    t = np.asarray(t, dtype=float)
    xs = np.sort(sample.x)
    ys = np.sort(sample.y)
    return np.searchsorted(ys, t, side="right") - np.searchsorted(xs, t, side="left")


def empirical_c(sample, x):
    """Fraction of observed pairs whose interval ``[y_i, x_i]`` contains ``x``."""
    out = risk_set_counts(sample, x) / sample.n
    return float(out) if np.ndim(out) == 0 else out


def _product_limit_factors(sample, points):
    counts = risk_set_counts(sample, points)
    if np.any(counts <= 0):
        raise DegenerateRiskSetError(
            "empty risk set at a jump point; the sample violates y_i <= x_i"
        )
    return (counts - 1.0) / counts


def _merge_ties(sorted_points, cumulative):
    # keep the value after the last index of each tied group
    locs, first = np.unique(sorted_points, return_index=True)
    last = np.append(first[1:], sorted_points.size) - 1
    return locs, cumulative[last]


def lynden_bell_F(sample):
    """Lynden-Bell product-limit estimator of the lifetime distribution."""
    order = np.argsort(sample.x, kind="stable")
    xs = sample.x[order]
    surv = np.cumprod(_product_limit_factors(sample, xs))
    locs, surv = _merge_ties(xs, surv)
    return StepFunction(locs, 1.0 - surv, 0.0)


def lynden_bell_G(sample):
    """Lynden-Bell product-limit estimator of the truncation distribution.

    ``G_n(y)`` is the product of the factors attached to every ``y_i > y``.
    """
    order = np.argsort(sample.y, kind="stable")
    ys = sample.y[order]
    factors = _product_limit_factors(sample, ys)
    # suffix[k] = prod_{j >= k} factors[j]; G_n at ys[k] excludes index k itself
    suffix = np.append(np.cumprod(factors[::-1])[::-1], 1.0)
    locs, vals = _merge_ties(ys, suffix[1:])
    return StepFunction(locs, vals, suffix[0])


def ecdf(data):
    """Right-continuous empirical distribution function of ``data``."""
    data = np.sort(np.asarray(data, dtype=float).ravel())
    locs, counts = np.unique(data, return_counts=True)
    return StepFunction(locs, np.cumsum(counts) / data.size, 0.0)


def alpha_at(sample, t, F=None, G=None):
    """Evaluate ``G_n(t) [1 - F_n(t-)] / C_n(t)``; 0 where ``C_n(t) == 0``.

    The lifetime estimator enters through its left limit, which makes the
    ratio constant in ``t`` over the region where the risk set is nonempty.
    """
    F = lynden_bell_F(sample) if F is None else F
    G = lynden_bell_G(sample) if G is None else G
    t = np.asarray(t, dtype=float)
    c = np.asarray(empirical_c(sample, t), dtype=float)
    num = np.asarray(G(t), dtype=float) * (1.0 - np.asarray(F.left_limit(t), dtype=float))
    out = np.divide(num, c, out=np.zeros_like(num), where=c > 0)
    return float(out) if out.ndim == 0 else out


def estimate_alpha(sample, F=None, G=None):
    """Estimate ``P(X >= Y)`` from an observed sample.

    The ratio is evaluated at every distinct observed ``x_i`` and ``y_i`` with
    a nonempty risk set; the reported value is their mean and ``max_spread``
    their range, which is zero up to rounding.
    """
    points = np.unique(np.concatenate((sample.x, sample.y)))
    points = points[risk_set_counts(sample, points) > 0]
    if points.size == 0:
        raise EmptyRiskSetsError("C_n vanishes at every observed point")
    vals = np.atleast_1d(alpha_at(sample, points, F, G))
    value = float(np.clip(vals.mean(), 0.0, 1.0))
    return AlphaEstimate(value, points, float(vals.max() - vals.min()))
