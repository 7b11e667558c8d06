"""Bayesian estimation: priors, posterior kernel, Metropolis-Hastings, losses.

Independent priors: Gamma(a, b) on the shape, Gamma(c, d) on the scale, and
Beta(p, q) on the tampering coefficient. The sampler is coordinate-wise
random-walk Metropolis-Hastings with normal proposals; each coordinate is
accepted against its full-conditional density ratio. Point estimates come
from the chain under squared-error (posterior mean) or LINEX loss; interval
estimates are equal-tailed percentile intervals and Chen-Shao
minimum-width HPD intervals over the post-burn-in order statistics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from .gumbel import ModelParams
from .mle import IntervalEstimate, MleFit, _loglik_raw, _SampleTerms
from .sampling import CensoredSample

__all__ = [
    "PriorSpec",
    "Loss",
    "LossSpec",
    "PosteriorChain",
    "log_prior",
    "log_posterior_unnorm",
    "log_conditional",
    "run_mh",
    "default_mh_inputs",
    "study_prior",
    "point_estimate",
    "credible_interval",
    "hpd_interval",
]

_PARAM_NAMES = ("alpha", "lam", "beta")


@dataclass(frozen=True)
class PriorSpec:
    """Hyperparameters (a, b) gamma-shape, (c, d) gamma-scale, (p, q) beta-tamper.

    ``b = d = 0`` is allowed as the improper flat limit of the gamma factors
    (handy for likelihood-only runs); all other hyperparameters must be
    strictly positive.
    """

    a: float = 1.0
    b: float = 0.0
    c: float = 1.0
    d: float = 0.0
    p: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        if min(self.a, self.c, self.p, self.q) <= 0:
            raise ValueError("hyperparameters a, c, p, q must be > 0")
        if self.b < 0 or self.d < 0:
            raise ValueError("hyperparameters b, d must be >= 0")

    @property
    def means(self) -> tuple[float, float, float]:
        alpha0 = self.a / self.b if self.b > 0 else 1.0
        lam0 = self.c / self.d if self.d > 0 else 1.0
        return alpha0, lam0, self.p / (self.p + self.q)


class Loss(Enum):
    SEL = "SEL"
    LINEX = "LINEX"


@dataclass(frozen=True)
class LossSpec:
    kind: Loss = Loss.SEL
    u: float = 1.0

    def __post_init__(self):
        if self.kind is Loss.LINEX and self.u == 0.0:
            raise ValueError("LINEX shape u must be nonzero")

    def label(self) -> str:
        return "SEL" if self.kind is Loss.SEL else f"LINEX(u={self.u:g})"


@dataclass(frozen=True)
class PosteriorChain:
    """MCMC draws (columns alpha, lam, beta) with burn-in metadata."""

    draws: np.ndarray
    burn_in: int
    acceptance_rates: tuple[float, float, float]
    seed: int | None

    def __post_init__(self):
        draws = np.asarray(self.draws, dtype=float)
        object.__setattr__(self, "draws", draws)
        if draws.ndim != 2 or draws.shape[1] != 3:
            raise ValueError("draws must have shape (M, 3)")
        if not (0 <= self.burn_in < draws.shape[0]):
            raise ValueError("burn_in must be smaller than the chain length")

    @property
    def post_burn(self) -> np.ndarray:
        return self.draws[self.burn_in :]


def _log_prior_raw(alpha: float, lam: float, beta: float, h: PriorSpec) -> float:
    if alpha <= 0 or lam <= 0 or not (0.0 < beta < 1.0):
        return -math.inf
    return (
        (h.a - 1.0) * math.log(alpha)
        - h.b * alpha
        + (h.c - 1.0) * math.log(lam)
        - h.d * lam
        + (h.p - 1.0) * math.log(beta)
        + (h.q - 1.0) * math.log1p(-beta)
    )


def log_prior(p: ModelParams, h: PriorSpec) -> float:
    """Joint log prior density, up to an additive constant; -inf off support."""
    return _log_prior_raw(p.alpha, p.lam, p.beta, h)


class _PosteriorKernel:
    """Unnormalized log posterior with a per-beta cache of the stretched times."""

    def __init__(self, s: CensoredSample, h: PriorSpec):
        self.t = _SampleTerms(s)
        self.h = h
        self._beta_key: float | None = None
        self._log_z: np.ndarray | None = None

    def __call__(self, alpha: float, lam: float, beta: float) -> float:
        lp = _log_prior_raw(alpha, lam, beta, self.h)
        if not math.isfinite(lp):
            return -math.inf
        if beta != self._beta_key:
            self._beta_key = beta
            self._log_z = np.log(self.t.tau + (self.t.y - self.t.tau) / beta)
        return lp + _loglik_raw(alpha, lam, beta, self.t, log_z=self._log_z)


def log_posterior_unnorm(p: ModelParams, h: PriorSpec, s: CensoredSample) -> float:
    """log prior + log likelihood; the normalizing constant is omitted."""
    return _PosteriorKernel(s, h)(p.alpha, p.lam, p.beta)


def log_conditional(which: str, p: ModelParams, h: PriorSpec, s: CensoredSample) -> float:
    """Full-conditional log density of one coordinate, up to a constant.

    Evaluated as the joint unnormalized posterior: terms free of the selected
    coordinate shift the result by a constant only, so density ratios in that
    coordinate are exact.
    """
    if which not in _PARAM_NAMES:
        raise ValueError(f"which must be one of {_PARAM_NAMES}")
    return log_posterior_unnorm(p, h, s)


def default_mh_inputs(
    fit: MleFit | None, h: PriorSpec, fallback_sd: float = 0.1
) -> tuple[ModelParams, tuple[float, float, float]]:
    """Chain start and proposal scales: the MLE and its standard errors.

    Falls back to the prior means with a fixed proposal scale when no
    converged fit is available.
    """
    if fit is not None and fit.converged and np.all(np.diag(fit.cov_matrix) > 0):
        sds = np.sqrt(np.diag(fit.cov_matrix))
        init = fit.params_hat
        if init.beta >= 1.0:
            init = ModelParams(init.alpha, init.lam, 1.0 - 1e-9)
        return init, (float(sds[0]), float(sds[1]), float(sds[2]))
    a0, l0, b0 = h.means
    return ModelParams(a0, l0, b0), (fallback_sd, fallback_sd, fallback_sd)


def study_prior(true_params: ModelParams, beta_sd: float = 0.15) -> PriorSpec:
    """Informative prior centered on given values.

    Gamma factors get prior SD equal to half the prior mean (shape 4); the
    beta factor matches the given mean with the given SD.
    """
    mu = true_params.beta
    var = beta_sd * beta_sd
    if var >= mu * (1.0 - mu):
        raise ValueError("beta_sd too large for a Beta prior with this mean")
    nu = mu * (1.0 - mu) / var - 1.0
    return PriorSpec(
        a=4.0,
        b=4.0 / true_params.alpha,
        c=4.0,
        d=4.0 / true_params.lam,
        p=mu * nu,
        q=(1.0 - mu) * nu,
    )


def run_mh(
    s: CensoredSample,
    h: PriorSpec,
    m: int,
    burn: int,
    init: ModelParams,
    proposal_sds,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
    scan: str = "literal",
) -> PosteriorChain:
    """Coordinate-wise random-walk Metropolis-Hastings chain of length m.

    Per iteration each coordinate gets a normal proposal centered at its
    current value and is accepted with probability min(1, conditional density
    ratio); proposals off the support auto-reject. ``scan="literal"``
    evaluates all three ratios at the previous iteration's values of the
    other coordinates (simultaneous update); ``scan="systematic"`` refreshes
    coordinates one at a time so each ratio sees the latest values.
    """
    sds = np.asarray(proposal_sds, dtype=float)
    if sds.shape != (3,) or np.any(~(sds > 0)):
        raise ValueError("proposal_sds must be three positive reals")
    if not (0 <= burn < m):
        raise ValueError("need 0 <= burn < m")
    if scan not in ("literal", "systematic"):
        raise ValueError("scan must be 'literal' or 'systematic'")
    gen = rng if rng is not None else np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))

    kernel = _PosteriorKernel(s, h)
    draws = np.empty((m, 3))
    state = np.array([init.alpha, init.lam, init.beta], dtype=float)
    if state[2] >= 1.0:
        state[2] = 1.0 - 1e-12  # prior support is the open interval
    draws[0] = state
    l_cur = kernel(*state)
    accepts = np.zeros(3, dtype=np.int64)

    for i in range(1, m):
        if scan == "literal":
            props = state + sds * gen.standard_normal(3)
            us = gen.random(3)
            l_num = np.array(
                [
                    kernel(props[0], state[1], state[2]),
                    kernel(state[0], props[1], state[2]),
                    kernel(state[0], state[1], props[2]),
                ]
            )
            with np.errstate(divide="ignore"):
                ok = np.isfinite(l_num) & (np.log(us) <= l_num - l_cur)
            n_acc = int(np.count_nonzero(ok))
            if n_acc:
                accepts[ok] += 1
                state = np.where(ok, props, state)
                l_cur = float(l_num[np.flatnonzero(ok)[0]]) if n_acc == 1 else kernel(*state)
        else:
            for k in range(3):
                prop = state[k] + sds[k] * gen.standard_normal()
                u = gen.random()
                cand = state.copy()
                cand[k] = prop
                l_cand = kernel(*cand)
                if math.isfinite(l_cand) and (u > 0.0 and math.log(u) <= l_cand - l_cur):
                    state = cand
                    l_cur = l_cand
                    accepts[k] += 1
        draws[i] = state

    rates = tuple(float(a) / (m - 1) for a in accepts) if m > 1 else (0.0, 0.0, 0.0)
    for name, rate in zip(_PARAM_NAMES, rates):
        if rate < 0.05 or rate > 0.95:
            warnings.warn(f"{name} acceptance rate {rate:.3f} outside [0.05, 0.95]", stacklevel=2)
    return PosteriorChain(draws=draws, burn_in=burn, acceptance_rates=rates, seed=seed)


def point_estimate(chain: PosteriorChain, loss: LossSpec) -> ModelParams:
    """Bayes point estimate from the post-burn-in draws.

    SEL is the coordinate-wise mean; LINEX is -(1/u)*log E[exp(-u*theta)],
    computed through a shifted log-sum-exp so large |u| cannot overflow.
    """
    x = chain.post_burn
    if x.shape[0] == 0:
        raise ValueError("chain is empty after burn-in")
    if loss.kind is Loss.SEL:
        est = x.mean(axis=0)
    else:
        u = loss.u
        est = np.array(
            [-(logsumexp(-u * x[:, j]) - math.log(x.shape[0])) / u for j in range(3)]
        )
    return ModelParams(float(est[0]), float(est[1]), min(float(est[2]), 1.0))


def _rank_interval(sorted_draws: np.ndarray, gamma: float) -> tuple[float, float]:
    m = sorted_draws.shape[0]
    lo_rank = min(max(math.ceil(m * gamma / 2.0), 1), m)
    hi_rank = min(max(math.ceil(m * (1.0 - gamma / 2.0)), 1), m)
    return float(sorted_draws[lo_rank - 1]), float(sorted_draws[hi_rank - 1])


def credible_interval(chain: PosteriorChain, gamma: float = 0.05) -> dict[str, IntervalEstimate]:
    """Equal-tailed percentile interval from the ordered post-burn-in draws.

    Bounds are the order statistics at (1-based) ranks ceil(M*gamma/2) and
    ceil(M*(1-gamma/2)).
    """
    if not (0 <= gamma < 1):
        raise ValueError("gamma must lie in [0, 1)")
    x = chain.post_burn
    if gamma > 0 and x.shape[0] * gamma / 2.0 < 1.0:
        raise ValueError("chain too short for the requested gamma")
    out = {}
    for j, name in enumerate(_PARAM_NAMES):
        lo, hi = _rank_interval(np.sort(x[:, j]), gamma)
        out[name] = IntervalEstimate(lo, hi, 1.0 - gamma)
    return out


def hpd_interval(chain: PosteriorChain, gamma: float = 0.05) -> dict[str, IntervalEstimate]:
    """Chen-Shao minimum-width interval over ceil(M*(1-gamma)) consecutive order statistics."""
    if not (0 <= gamma < 1):
        raise ValueError("gamma must lie in [0, 1)")
    x = chain.post_burn
    m = x.shape[0]
    k = min(max(math.ceil(m * (1.0 - gamma)), 2), m)
    out = {}
    for j, name in enumerate(_PARAM_NAMES):
        xs = np.sort(x[:, j])
        widths = xs[k - 1 :] - xs[: m - k + 1]
        i = int(np.argmin(widths))
        out[name] = IntervalEstimate(float(xs[i]), float(xs[i + k - 1]), 1.0 - gamma)
    return out
