"""Goodness-of-fit tooling: ECDF, K-S test, Q-Q points, and summary-plot data."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .bladder import Dataset
from .gumbel import ModelParams, baseline_cdf, baseline_pdf, baseline_quantile
from .sampling import make_rng

__all__ = [
    "Dataset",
    "KsResult",
    "BoxStats",
    "SummaryPlotData",
    "ecdf",
    "ks_test",
    "ks_test_bootstrap",
    "kolmogorov_pvalue",
    "qq_points",
    "summary_plots_data",
    "fit_baseline_mle",
]


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n: int


@dataclass(frozen=True)
class BoxStats:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    whisker_lo: float
    whisker_hi: float
    outliers: np.ndarray


@dataclass(frozen=True)
class SummaryPlotData:
    hist_edges: np.ndarray
    hist_density: np.ndarray
    box: BoxStats
    density_grid: np.ndarray
    density_values: np.ndarray


def ecdf(d: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Empirical CDF as sorted (x, F_n(x)) pairs; tied values share one step."""
    xs, counts = np.unique(d.values, return_counts=True)
    return xs, np.cumsum(counts) / d.n


def kolmogorov_pvalue(statistic: float, n: int) -> float:
    """Asymptotic two-sided K-S p-value 2*sum_k (-1)^(k-1) exp(-2 k^2 n D^2).

    The alternating series is truncated once a term drops below 1e-10.
    """
    x = math.sqrt(n) * statistic
    if x <= 0:
        return 1.0
    total = 0.0
    for k in range(1, 201):
        term = (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * x * x)
        total += term
        if abs(term) < 1e-10:
            break
    return min(1.0, max(0.0, 2.0 * total))


def ks_test(d: Dataset, p: ModelParams) -> KsResult:
    """One-sample K-S distance against the baseline CDF, with asymptotic p-value.

    Both one-sided gaps are evaluated at every jump point of the ECDF.
    """
    x = np.sort(d.values)
    n = x.size
    f = np.asarray(baseline_cdf(p, x))
    i = np.arange(1, n + 1)
    d_plus = float(np.max(i / n - f))
    d_minus = float(np.max(f - (i - 1) / n))
    stat = max(d_plus, d_minus)
    return KsResult(statistic=stat, p_value=kolmogorov_pvalue(stat, n), n=n)


def fit_baseline_mle(values) -> ModelParams:
    """Complete-sample MLE of the baseline law (no censoring, no tampering).

    The scale is closed-form given the shape, leaving a 1-D profile-score
    root-find for the shape.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 2 or np.any(~(v > 0)):
        raise ValueError("need at least two positive observations")
    log_v = np.log(v)
    n = v.size

    def profile_score(a: float) -> float:
        pw = np.exp(-a * log_v)
        lam = n / pw.sum()
        return n / a - log_v.sum() + lam * float((pw * log_v).sum())

    lo, hi = 1e-3, 1.0
    while profile_score(hi) > 0 and hi < 1e3:
        hi *= 2.0
    a_hat = brentq(profile_score, lo, hi, xtol=1e-12)
    lam_hat = n / float(np.exp(-a_hat * log_v).sum())
    return ModelParams(a_hat, lam_hat, 1.0)


def ks_test_bootstrap(d: Dataset, b: int = 200, seed: int | None = None) -> KsResult:
    """Parametric-bootstrap K-S p-value (corrects for estimated parameters).

    Refits the baseline MLE on each bootstrap sample; p is the fraction of
    bootstrap distances at or above the observed one (add-one estimator).
    """
    fitted = fit_baseline_mle(d.values)
    observed = ks_test(d, fitted).statistic
    rng = make_rng(seed)
    exceed = 0
    for _ in range(b):
        u = rng.random(d.n)
        u[u == 0.0] = math.ulp(0.0)
        sim = np.asarray(baseline_quantile(fitted, u))
        refit = fit_baseline_mle(sim)
        if ks_test(Dataset(values=sim, label="bootstrap"), refit).statistic >= observed:
            exceed += 1
    return KsResult(statistic=observed, p_value=(exceed + 1) / (b + 1), n=d.n)


def qq_points(d: Dataset, p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Model quantiles at i/(n+1) against the ordered data."""
    x = np.sort(d.values)
    u = np.arange(1, x.size + 1) / (x.size + 1.0)
    return np.asarray(baseline_quantile(p, u)), x


def _quartiles(x: np.ndarray) -> tuple[float, float, float]:
    return tuple(float(q) for q in np.percentile(x, [25.0, 50.0, 75.0]))


def summary_plots_data(d: Dataset, p: ModelParams, bins: int = 20) -> SummaryPlotData:
    """Histogram densities, box-plot statistics, and a model density curve.

    Histogram bars are equal-width over the data range and normalized to unit
    area; whiskers extend to the most extreme points within 1.5 IQR of the
    quartiles; the density curve is sampled on a 200-point grid spanning the
    histogram.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    x = np.sort(d.values)
    density, edges = np.histogram(x, bins=bins, density=True)
    q1, med, q3 = _quartiles(x)
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    box = BoxStats(
        minimum=float(x[0]),
        q1=q1,
        median=med,
        q3=q3,
        maximum=float(x[-1]),
        whisker_lo=float(inside[0]),
        whisker_hi=float(inside[-1]),
        outliers=x[(x < lo_fence) | (x > hi_fence)],
    )
    grid = np.linspace(max(edges[0], 1e-9 * edges[-1]), edges[-1], 200)
    return SummaryPlotData(
        hist_edges=edges,
        hist_density=density,
        box=box,
        density_grid=grid,
        density_values=np.asarray(baseline_pdf(p, grid)),
    )
