"""Ingestion of observed pairs, gamma maximum likelihood and the K-S statistic."""

import csv
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import special
from scipy.stats import kstwo

from .errors import ConvergenceError, DataFormatError
from .truncation import ObservedSample

__all__ = [
    "GammaFit",
    "KsResult",
    "load_pairs_csv",
    "load_column_csv",
    "gamma_loglik",
    "gamma_loglik_gradient",
    "gamma_mle",
    "gamma_cdf",
    "gamma_pdf",
    "ks_statistic",
    "kolmogorov_sf",
    "ks_pvalue",
]


def _read_rows(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]  # header
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return rows


def _parse_row(row, lineno, width):
    if len(row) < width:
        raise DataFormatError(f"row {lineno}: expected {width} columns, got {len(row)}", [lineno])
    try:
        vals = [float(c) for c in row[:width]]
    except ValueError:
        raise DataFormatError(f"row {lineno}: non-numeric value in {row!r}", [lineno]) from None
    if not all(math.isfinite(v) for v in vals):
        raise DataFormatError(f"row {lineno}: non-finite value in {row!r}", [lineno])
    return vals


def load_pairs_csv(path):
    """Read ``x, y`` pairs from a CSV file (header optional).

    Row numbers in error messages count data rows from 1, excluding the
    header.  Every row violating ``y <= x`` is reported at once.
    """
    rows = _read_rows(path)
    data = np.array([_parse_row(r, i, 2) for i, r in enumerate(rows, 1)])
    bad = (np.flatnonzero(data[:, 1] > data[:, 0]) + 1).tolist()
    if bad:
        raise DataFormatError(f"{path}: truncation condition y <= x violated at rows {bad}", bad)
    return ObservedSample(data[:, 0], data[:, 1])


def load_column_csv(path, column=0, positive=True):
    rows = _read_rows(path)
    vals = np.array([_parse_row(r[column:], i, 1)[0] for i, r in enumerate(rows, 1)])
    if positive:
        bad = (np.flatnonzero(vals <= 0) + 1).tolist()
        if bad:
            raise DataFormatError(f"{path}: non-positive values at rows {bad}", bad)
    return vals


@dataclass(frozen=True)
class GammaFit:
    """Shape-scale gamma fit; the mean is ``shape * scale``."""

    shape: float
    scale: float
    log_likelihood: float
    iterations: int = 0

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class KsResult:
    statistic: float
    n: int


def _check_positive(data):
    x = np.asarray(data, dtype=float).ravel()
    if x.size < 2:
        raise DataFormatError("gamma fitting needs at least 2 observations")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise DataFormatError("gamma fitting needs finite, strictly positive data")
    return x


def gamma_loglik(data, shape, scale):
    x = np.asarray(data, dtype=float)
    n = x.size
    return (
        (shape - 1.0) * math.fsum(np.log(x))
        - math.fsum(x) / scale
        - n * (special.gammaln(shape) + shape * math.log(scale))
    )


def gamma_loglik_gradient(data, shape, scale):
    """Gradient of the log-likelihood with respect to ``(shape, scale)``."""
    x = np.asarray(data, dtype=float)
    n = x.size
    d_shape = math.fsum(np.log(x)) - n * math.log(scale) - n * special.digamma(shape)
    d_scale = math.fsum(x) / scale**2 - n * shape / scale
    return np.array([d_shape, d_scale])


def gamma_mle(data, max_iter=100, tol=1e-14):
    """Maximum-likelihood gamma fit.

    The shape solves ``log(k) - digamma(k) = log(mean) - mean(log x)`` by
    Newton's method, falling back to bisection whenever a step leaves the
    current bracket; the scale is then ``mean / shape``.
    """
    x = _check_positive(data)
    mean = math.fsum(x) / x.size
    s = math.log(mean) - math.fsum(np.log(x)) / x.size
    if not s > 0:
        raise DataFormatError("gamma fitting needs non-constant data")

    def g(k):
        return math.log(k) - special.digamma(k) - s

    # log(k) - digamma(k) decreases from +inf to 0, between 1/(2k) and 1/k
    lo, hi = 0.25 / s, 2.0 / s
    while g(lo) <= 0:
        lo /= 2.0
    while g(hi) >= 0:
        hi *= 2.0
    k = (3.0 - s + math.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)
    if not lo < k < hi:
        k = 0.5 * (lo + hi)
    for it in range(1, max_iter + 1):
        gk = g(k)
        if gk == 0:
            break
        if gk > 0:
            lo = k
        else:
            hi = k
        step = gk / (1.0 / k - special.polygamma(1, k))
        new = k - step
        if not lo < new < hi:
            new = 0.5 * (lo + hi)
        if abs(new - k) <= tol * k:
            k = new
            break
        k = new
    else:
        raise ConvergenceError(f"shape equation did not converge in {max_iter} iterations", last=k)
    scale = mean / k
    return GammaFit(float(k), float(scale), float(gamma_loglik(x, k, scale)), it)


def gamma_cdf(shape, scale):
    return lambda t: special.gammainc(shape, np.maximum(np.asarray(t, dtype=float), 0.0) / scale)


def gamma_pdf(x, shape, scale):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        logp = (shape - 1.0) * np.log(x) - x / scale - special.gammaln(shape) - shape * math.log(scale)
    return np.where(x > 0, np.exp(logp), 0.0)


def ks_statistic(data, cdf):
    """Kolmogorov-Smirnov distance between the sample and a continuous CDF."""
    x = np.sort(np.asarray(data, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise DataFormatError("K-S statistic needs at least one observation")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = np.maximum(np.abs(F - i / n), np.abs(F - (i - 1) / n))
    return KsResult(float(d.max()), n)


def kolmogorov_sf(t, tol=1e-10):
    """Survival function of the limiting Kolmogorov distribution at ``t``.

    Uses the alternating series for large ``t`` and the theta-function form
    for small ``t``; both are truncated once a term drops below ``tol``.
    """
    if t <= 0:
        return 1.0
    if t < 1.0:
        c = math.pi**2 / (8.0 * t * t)
        total, k = 0.0, 1
        while True:
            term = math.exp(-((2 * k - 1) ** 2) * c)
            total += term
            if term < tol:
                break
            k += 1
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / t * total))
    total, k = 0.0, 1
    while True:
        term = math.exp(-2.0 * k * k * t * t)
        total += term if k % 2 else -term
        if term < tol:
            break
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_pvalue(result, method="exact"):
    """P-value of a one-sample K-S statistic.

    ``method="exact"`` uses the finite-``n`` distribution of the statistic;
    ``"asymptotic"`` uses the limiting Kolmogorov law at ``sqrt(n) * D``.
    """
    if method == "exact":
        return float(kstwo.sf(result.statistic, result.n))
    if method == "asymptotic":
        return kolmogorov_sf(math.sqrt(result.n) * result.statistic)
    raise ValueError(f"unknown p-value method {method!r}")
