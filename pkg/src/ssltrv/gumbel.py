"""Gumbel Type-II baseline distribution and its tampered step-stress variant.

The baseline law has CDF ``F(t) = exp(-lam * t**-alpha)`` on ``t > 0`` with
shape ``alpha`` and scale ``lam`` (an inverse-Weibull / Frechet-type law).
Under a simple step-stress test with stress change at time ``tau``, the
tampered-random-variable (TRV) model rescales the remaining life by the
tampering coefficient ``beta``: an item that would have failed at ``T > tau``
under constant stress fails at ``tau + beta * (T - tau)`` instead.

All functions are pure, accept scalars or arrays for the time/probability
argument, and raise :class:`ValueError` on domain violations instead of
returning NaN.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "TamperingTime",
    "baseline_pdf",
    "baseline_logpdf",
    "baseline_cdf",
    "baseline_sf",
    "baseline_quantile",
    "baseline_hazard",
    "trv_pdf",
    "trv_logpdf",
    "trv_cdf",
    "trv_quantile",
]


@dataclass(frozen=True)
class ModelParams:
    """Parameter triple (shape, scale, tampering coefficient).

    ``beta = 1`` is the no-tampering identity and is allowed even though a
    tampering coefficient is typically below one; the Bayesian beta prior
    lives on the open interval (0, 1).
    """

    alpha: float
    lam: float
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not (self.lam > 0):
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if not (0 < self.beta <= 1):
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.lam, self.beta], dtype=float)


@dataclass(frozen=True)
class TamperingTime:
    """Stress-change instant of the simple step-stress test."""

    tau: float

    def __post_init__(self):
        if not (self.tau > 0):
            raise ValueError(f"tau must be > 0, got {self.tau}")


def _pow_neg(t: np.ndarray, alpha: float) -> np.ndarray:
    # t**-alpha via exp(-alpha*log t); keeps precision for extreme t and
    # reuses the log the likelihood needs anyway.
    return np.exp(-alpha * np.log(t))


def _as_positive(t, name: str = "t") -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError(f"{name} must be > 0")
    return arr, arr.ndim == 0


def _ret(x: np.ndarray, scalar: bool):
    return float(x) if scalar else x


def baseline_logpdf(p: ModelParams, t) -> np.ndarray | float:
    """Log-density of the baseline law; requires ``t > 0``."""
    arr, scalar = _as_positive(t)
    logt = np.log(arr)
    out = np.log(p.alpha) + np.log(p.lam) - (p.alpha + 1.0) * logt - p.lam * np.exp(-p.alpha * logt)
    return _ret(out, scalar)


def baseline_pdf(p: ModelParams, t) -> np.ndarray | float:
    """Density ``alpha*lam*t**-(alpha+1)*exp(-lam*t**-alpha)`` for ``t > 0``."""
    arr, scalar = _as_positive(t)
    return _ret(np.exp(baseline_logpdf(p, arr)), scalar)


def baseline_cdf(p: ModelParams, t) -> np.ndarray | float:
    """CDF ``exp(-lam*t**-alpha)``, continuously extended to 0 at ``t = 0``."""
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    if np.any(arr < 0):
        raise ValueError("t must be >= 0")
    if scalar:
        return float(np.exp(-p.lam * _pow_neg(arr, p.alpha))) if arr > 0 else 0.0
    out = np.zeros(np.shape(arr), dtype=float)
    pos = arr > 0
    out[pos] = np.exp(-p.lam * _pow_neg(arr[pos], p.alpha))
    return out


def baseline_sf(p: ModelParams, t) -> np.ndarray | float:
    """Survival function ``1 - F(t)``, computed via expm1 for accuracy."""
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    if np.any(arr < 0):
        raise ValueError("t must be >= 0")
    out = np.ones(np.shape(arr), dtype=float)
    if scalar:
        return float(-np.expm1(-p.lam * _pow_neg(arr, p.alpha))) if arr > 0 else 1.0
    pos = arr > 0
    out[pos] = -np.expm1(-p.lam * _pow_neg(arr[pos], p.alpha))
    return out


def _check_prob(u) -> tuple[np.ndarray, bool]:
    arr = np.asarray(u, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise ValueError("u must lie strictly inside (0, 1)")
    return arr, arr.ndim == 0


def baseline_quantile(p: ModelParams, u) -> np.ndarray | float:
    """Inverse CDF: ``(lam / -log(u))**(1/alpha)`` for ``u`` in (0, 1)."""
    arr, scalar = _check_prob(u)
    out = np.exp((np.log(p.lam) - np.log(-np.log(arr))) / p.alpha)
    return _ret(out, scalar)


def baseline_hazard(p: ModelParams, t) -> np.ndarray | float:
    """Hazard rate pdf/(1-cdf); decreasing or upside-down bathtub shaped."""
    arr, scalar = _as_positive(t)
    w = p.lam * _pow_neg(arr, p.alpha)
    # pdf/sf = alpha*lam*t**-(alpha+1) * exp(-w)/(1-exp(-w)); the last factor
    # equals 1/expm1(w), which stays finite for all w > 0.
    out = p.alpha * p.lam * np.exp(-(p.alpha + 1.0) * np.log(arr)) / np.expm1(w)
    return _ret(out, scalar)


def _stretch(tau: float, t: np.ndarray, beta: float) -> np.ndarray:
    # Inverse tampering map tau + (t - tau)/beta applied to the post-tau branch.
    return tau + (t - tau) / beta


def trv_cdf(p: ModelParams, tau: TamperingTime, t) -> np.ndarray | float:
    """CDF of the tampered lifetime: baseline below tau, stretched above."""
    if p.beta == 1.0:
        return baseline_cdf(p, t)
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    if np.any(arr < 0):
        raise ValueError("t must be >= 0")
    if scalar:
        x = float(arr)
        return baseline_cdf(p, x) if x < tau.tau else baseline_cdf(p, _stretch(tau.tau, x, p.beta))
    out = np.empty(np.shape(arr), dtype=float)
    lo = arr < tau.tau
    out[lo] = baseline_cdf(p, arr[lo])
    out[~lo] = baseline_cdf(p, _stretch(tau.tau, arr[~lo], p.beta))
    return out


def trv_logpdf(p: ModelParams, tau: TamperingTime, t) -> np.ndarray | float:
    """Log-density of the tampered lifetime; ``t = tau`` uses the upper branch."""
    if p.beta == 1.0:
        return baseline_logpdf(p, t)
    arr, scalar = _as_positive(t)
    if scalar:
        x = float(arr)
        if x < tau.tau:
            return baseline_logpdf(p, x)
        return baseline_logpdf(p, _stretch(tau.tau, x, p.beta)) - np.log(p.beta)
    out = np.empty(np.shape(arr), dtype=float)
    lo = arr < tau.tau
    out[lo] = baseline_logpdf(p, arr[lo])
    out[~lo] = baseline_logpdf(p, _stretch(tau.tau, arr[~lo], p.beta)) - np.log(p.beta)
    return out


def trv_pdf(p: ModelParams, tau: TamperingTime, t) -> np.ndarray | float:
    """Density of the tampered lifetime; integrates to one over (0, inf)."""
    if p.beta == 1.0:
        return baseline_pdf(p, t)
    arr, scalar = _as_positive(t)
    return _ret(np.exp(trv_logpdf(p, tau, arr)), scalar)


def trv_quantile(p: ModelParams, tau: TamperingTime, u) -> np.ndarray | float:
    """Inverse of :func:`trv_cdf`: compress the baseline quantile above tau."""
    if p.beta == 1.0:
        return baseline_quantile(p, u)
    arr, scalar = _check_prob(u)
    x = baseline_quantile(p, arr)
    if scalar:
        return x if x <= tau.tau else tau.tau + p.beta * (x - tau.tau)
    x = np.asarray(x)
    hi = x > tau.tau
    x[hi] = tau.tau + p.beta * (x[hi] - tau.tau)
    return x
