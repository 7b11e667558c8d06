"""Likelihood, score, observed information, and Newton-Raphson fitting.

For a Type-II censored step-stress sample with N pre-tau failures x_1..x_N,
post-tau failures mapped to z_i = tau + (t_i - tau)/beta, and c = n - r
survivors censored at the r-th failure, the log-likelihood is

    l = r*log(a) + r*log(lam) - (r-N)*log(beta)
        - (a+1) * (sum log x + sum log z)
        - lam * (sum x**-a + sum z**-a)
        + c * log(1 - exp(-lam * z_r**-a))

The -(r-N)*log(beta) term is the Jacobian of the tampering map: each
post-tau observation contributes density (1/beta) * f(z_i). Dropping or
inverting it makes beta run to its upper bound instead of being estimated.

Score and Hessian are implemented analytically (validated against finite
differences in the test suite) and the observed information matrix is the
negative Hessian. Optimization runs in the unconstrained space
(log a, log lam, logit beta), which keeps Newton steps quadratic while
enforcing a > 0, lam > 0, 0 < beta < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .gumbel import ModelParams
from .sampling import Case, CensoredSample

__all__ = [
    "IdentifiabilityError",
    "ConvergenceError",
    "SolverOptions",
    "MleFit",
    "IntervalEstimate",
    "log_likelihood",
    "score",
    "observed_information",
    "fit_mle",
    "asymptotic_ci",
]

_LOG_EPS = -745.0  # exp() underflows to 0 below this


class IdentifiabilityError(ValueError):
    """Raised when a sample cannot identify all three parameters."""


class ConvergenceError(RuntimeError):
    """Raised when Newton-Raphson exhausts max_iter; carries the last iterate."""

    def __init__(self, message: str, last_fit: "MleFit"):
        super().__init__(message)
        self.last_fit = last_fit


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 200
    score_tol: float = 1e-8
    step_tol: float = 1e-10


@dataclass(frozen=True)
class IntervalEstimate:
    lower: float
    upper: float
    level: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("interval lower bound exceeds upper bound")

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class MleFit:
    params_hat: ModelParams
    loglik: float
    score_norm: float
    info_matrix: np.ndarray
    cov_matrix: np.ndarray
    converged: bool
    iterations: int
    notes: tuple[str, ...] = field(default=())

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov_matrix))


class _SampleTerms:
    """Data quantities that do not depend on the parameters."""

    __slots__ = ("x", "y", "tau", "n", "r", "n_pre", "m", "c", "log_x", "sum_log_x")

    def __init__(self, s: CensoredSample):
        if s.case is Case.I:
            raise IdentifiabilityError(
                "all failures precede tau (Case I): beta does not enter the likelihood"
            )
        self.tau = float(s.design.tau)
        self.n = s.design.n
        self.r = s.design.r
        self.n_pre = s.n_pre_tau
        self.m = self.r - self.n_pre
        self.c = self.n - self.r
        self.x = s.times[: self.n_pre]
        self.y = s.times[self.n_pre :]
        self.log_x = np.log(self.x)
        self.sum_log_x = float(np.sum(self.log_x))


def _censor_factors(lam: float, w_r: float) -> tuple[float, float]:
    # A = 1/(exp(lam*w_r) - 1) and B = exp(lam*w_r)/(exp(lam*w_r) - 1)**2,
    # both written with expm1 so neither overflows for large exponents.
    v = lam * w_r
    em = -math.expm1(-v)
    if em <= 0.0:
        return math.inf, math.inf
    e = math.exp(-v)
    a = e / em
    return a, a / em


def _loglik_raw(
    alpha: float, lam: float, beta: float, t: _SampleTerms, log_z: np.ndarray | None = None
) -> float:
    if not (0 < alpha < math.inf and 0 < lam < math.inf and 0 < beta <= 1):
        return -math.inf
    if log_z is None:
        log_z = np.log(t.tau + (t.y - t.tau) / beta)
    sum_pow_x = float(np.sum(np.exp(-alpha * t.log_x)))
    sum_pow_z = float(np.sum(np.exp(-alpha * log_z)))
    ll = (
        t.r * math.log(alpha)
        + t.r * math.log(lam)
        - t.m * math.log(beta)
        - (alpha + 1.0) * (t.sum_log_x + float(np.sum(log_z)))
        - lam * (sum_pow_x + sum_pow_z)
    )
    if t.c > 0:
        w_r = math.exp(-alpha * float(log_z[-1]))
        v = lam * w_r
        if v <= 0.0 or not math.isfinite(v):
            return -math.inf
        # log(1 - exp(-v)) without cancellation on either side of log(2)
        ll += t.c * (math.log(-math.expm1(-v)) if v < 0.6931471805599453 else math.log1p(-math.exp(-v)))
    return ll


def _score_raw(alpha: float, lam: float, beta: float, t: _SampleTerms) -> np.ndarray:
    z = t.tau + (t.y - t.tau) / beta
    log_z = np.log(z)
    pow_x = np.exp(-alpha * t.log_x)
    pow_z = np.exp(-alpha * log_z)
    rho = (t.tau - t.y) / (beta * beta) / z  # z_i'/z_i with z_i' = (tau - t_i)/beta^2

    d_alpha = (
        t.r / alpha
        - (t.sum_log_x + float(np.sum(log_z)))
        + lam * (float(np.sum(pow_x * t.log_x)) + float(np.sum(pow_z * log_z)))
    )
    d_lam = t.r / lam - (float(np.sum(pow_x)) + float(np.sum(pow_z)))
    d_beta = (
        -t.m / beta
        - (alpha + 1.0) * float(np.sum(rho))
        + alpha * lam * float(np.sum(pow_z * rho))
    )
    if t.c > 0:
        w_r = float(pow_z[-1])
        u_r = float(log_z[-1])
        rho_r = float(rho[-1])
        a_fac, _ = _censor_factors(lam, w_r)
        d_alpha -= t.c * lam * w_r * u_r * a_fac
        d_lam += t.c * w_r * a_fac
        d_beta -= t.c * alpha * lam * w_r * rho_r * a_fac
    return np.array([d_alpha, d_lam, d_beta])


def _hessian_raw(alpha: float, lam: float, beta: float, t: _SampleTerms) -> np.ndarray:
    z = t.tau + (t.y - t.tau) / beta
    log_z = np.log(z)
    pow_x = np.exp(-alpha * t.log_x)
    pow_z = np.exp(-alpha * log_z)
    rho = (t.tau - t.y) / (beta * beta) / z

    s_v = float(np.sum(pow_x * t.log_x))
    s_v2 = float(np.sum(pow_x * t.log_x**2))
    w_u = float(np.sum(pow_z * log_z))
    w_u2 = float(np.sum(pow_z * log_z**2))

    h_aa = -t.r / alpha**2 - lam * (s_v2 + w_u2)
    h_al = s_v + w_u
    h_ab = -float(np.sum(rho)) + lam * float(np.sum(pow_z * rho * (1.0 - alpha * log_z)))
    h_ll = -t.r / lam**2
    h_lb = alpha * float(np.sum(pow_z * rho))
    h_bb = (
        t.m / beta**2
        + (alpha + 1.0) * float(np.sum(2.0 * rho / beta + rho**2))
        - alpha * lam * float(np.sum(pow_z * ((alpha + 1.0) * rho**2 + 2.0 * rho / beta)))
    )

    if t.c > 0:
        w = float(pow_z[-1])
        u = float(log_z[-1])
        rr = float(rho[-1])
        a_fac, b_fac = _censor_factors(lam, w)
        lwb = lam * w * b_fac
        h_aa += t.c * lam * w * u * u * (a_fac - lwb)
        h_al -= t.c * w * u * (a_fac - lwb)
        h_ab += t.c * (lam * a_fac * w * rr * (alpha * u - 1.0) - lam * lwb * alpha * w * rr * u)
        h_ll -= t.c * w * w * b_fac
        h_lb -= t.c * alpha * w * rr * (a_fac - lwb)
        h_bb += t.c * (
            lam * a_fac * alpha * w * ((alpha + 1.0) * rr * rr + 2.0 * rr / beta)
            - lam * lwb * alpha * alpha * w * rr * rr
        )

    return np.array([[h_aa, h_al, h_ab], [h_al, h_ll, h_lb], [h_ab, h_lb, h_bb]])


def log_likelihood(p: ModelParams, s: CensoredSample) -> float:
    """Log-likelihood of a Case II or Case III sample; -inf on log-domain failures."""
    return _loglik_raw(p.alpha, p.lam, p.beta, _SampleTerms(s))


def score(p: ModelParams, s: CensoredSample) -> np.ndarray:
    """Gradient of the log-likelihood in (alpha, lam, beta)."""
    return _score_raw(p.alpha, p.lam, p.beta, _SampleTerms(s))


def observed_information(p: ModelParams, s: CensoredSample) -> np.ndarray:
    """Negative Hessian of the log-likelihood; symmetric by construction."""
    return -_hessian_raw(p.alpha, p.lam, p.beta, _SampleTerms(s))


def _profile_start(t: _SampleTerms) -> tuple[float, float]:
    # Pre-tau failures are untampered, so profile the baseline likelihood over
    # them: lam-hat(a) is closed-form, a is a 1-D grid search. Falls back to
    # all observed times when too few pre-tau failures exist (Case III).
    v = t.x if t.n_pre >= 3 else np.concatenate([t.x, t.y])
    log_v = np.log(v)
    k = v.size
    grid = np.exp(np.linspace(math.log(0.05), math.log(20.0), 241))
    best_a, best_val = 1.0, -math.inf
    for a in grid:
        s_pow = float(np.sum(np.exp(-a * log_v)))
        lam_hat = k / s_pow
        val = k * math.log(a) + k * math.log(lam_hat) - (a + 1.0) * float(np.sum(log_v)) - k
        if val > best_val:
            best_a, best_val = float(a), val
    lam0 = k / float(np.sum(np.exp(-best_a * log_v)))
    return best_a, lam0


def _theta(phi: np.ndarray) -> tuple[float, float, float]:
    # np.exp saturates to inf instead of raising; the likelihood guard turns
    # such iterates into -inf and the line search backs off.
    return float(np.exp(phi[0])), float(np.exp(phi[1])), float(expit(phi[2]))


def fit_mle(s: CensoredSample, opts: SolverOptions = SolverOptions()) -> MleFit:
    """Damped Newton-Raphson MLE of (alpha, lam, beta).

    Runs on the score in the reparameterized space with step-halving on the
    log-likelihood; converged when the raw-space score drops below
    ``opts.score_tol`` (sup norm) or the relative step below ``opts.step_tol``.
    Raises :class:`ConvergenceError` (carrying the last iterate) otherwise,
    and :class:`IdentifiabilityError` for Case I samples or r < 3.
    """
    if s.design.r < 3:
        raise IdentifiabilityError("need at least 3 observed failures for 3 parameters")
    t = _SampleTerms(s)
    notes: list[str] = []
    if s.case is Case.III:
        notes.append("no pre-tau failures (Case III): identifiability is data-dependent")

    a0, lam0 = _profile_start(t)
    phi = np.array([math.log(a0), math.log(lam0), 0.0])  # logit(0.5) = 0
    ll = _loglik_raw(*_theta(phi), t)
    if not math.isfinite(ll):
        phi = np.zeros(3)
        ll = _loglik_raw(*_theta(phi), t)

    converged = False
    iterations = 0
    g_raw = _score_raw(*_theta(phi), t)
    for iterations in range(1, opts.max_iter + 1):
        alpha, lam, beta = _theta(phi)
        jac = np.array([alpha, lam, beta * (1.0 - beta)])
        g_phi = jac * g_raw
        h_raw = _hessian_raw(alpha, lam, beta, t)
        # chain rule: H_phi = J H J + diag(d2theta/dphi2 * g_raw)
        curv = np.array([alpha, lam, beta * (1.0 - beta) * (1.0 - 2.0 * beta)])
        h_phi = (jac[:, None] * h_raw) * jac[None, :] + np.diag(curv * g_raw)

        step = None
        ridge = 0.0
        scale = max(1.0, float(np.max(np.abs(np.diag(h_phi)))))
        for _ in range(40):
            try:
                cand = np.linalg.solve(ridge * np.eye(3) - h_phi, g_phi)
            except np.linalg.LinAlgError:
                cand = None
            if cand is not None and np.all(np.isfinite(cand)) and float(g_phi @ cand) > 0.0:
                step = cand
                break
            ridge = max(1e-8 * scale, 10.0 * ridge)
        if step is None:
            step = g_phi / scale  # last-resort gradient ascent
        norm = float(np.max(np.abs(step)))
        if norm > 20.0:  # wild steps from near-singular curvature
            step = step * (20.0 / norm)

        # step-halving line search; non-finite likelihood halves, never aborts
        t_ls = 1.0
        new_phi, new_ll = phi, ll
        for _ in range(60):
            trial = phi + t_ls * step
            trial_ll = _loglik_raw(*_theta(trial), t)
            if math.isfinite(trial_ll) and trial_ll > ll:
                new_phi, new_ll = trial, trial_ll
                break
            t_ls *= 0.5

        rel_step = float(np.max(np.abs(new_phi - phi))) / max(1.0, float(np.max(np.abs(phi))))
        phi, ll = new_phi, new_ll
        g_raw = _score_raw(*_theta(phi), t)
        if float(np.max(np.abs(g_raw))) < opts.score_tol or rel_step < opts.step_tol:
            converged = True
            break

    alpha, lam, beta = _theta(phi)
    info = -_hessian_raw(alpha, lam, beta, t)
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        cov = np.full((3, 3), np.nan)
        notes.append("observed information singular: no covariance available")
    fit = MleFit(
        params_hat=ModelParams(alpha, lam, beta),
        loglik=ll,
        score_norm=float(np.max(np.abs(g_raw))),
        info_matrix=info,
        cov_matrix=cov,
        converged=converged,
        iterations=iterations,
        notes=tuple(notes),
    )
    if not converged:
        raise ConvergenceError(f"Newton-Raphson did not converge in {opts.max_iter} iterations", fit)
    return fit


def asymptotic_ci(fit: MleFit, gamma: float = 0.05) -> dict[str, IntervalEstimate]:
    """Normal-theory intervals theta_hat +/- z_{gamma/2} * sqrt(var) at level 1-gamma."""
    if not (0 < gamma < 1):
        raise ValueError("gamma must lie in (0, 1)")
    if not fit.converged:
        raise ValueError("intervals require a converged fit")
    variances = np.diag(fit.cov_matrix)
    if np.any(~(variances > 0)) and gamma < 1:
        raise ValueError("nonpositive variance estimate: information matrix not positive definite")
    from statistics import NormalDist

    z = NormalDist().inv_cdf(1.0 - gamma / 2.0)
    est = fit.params_hat.as_array()
    half = z * np.sqrt(variances)
    names = ("alpha", "lam", "beta")
    return {
        name: IntervalEstimate(float(est[i] - half[i]), float(est[i] + half[i]), 1.0 - gamma)
        for i, name in enumerate(names)
    }
