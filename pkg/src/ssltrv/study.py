"""Monte Carlo study harness: AE / MSE / AL / CP tables over many replicates.

Each replicate draws a Type-II censored step-stress sample at the true
parameters, fits the MLE with asymptotic intervals and (optionally) runs an
MCMC chain for Bayes estimates and percentile/HPD intervals. Replicates that
come out Case I/III or fail to converge are redrawn from a fresh
sub-stream (counted and reported). Aggregation happens in replicate order
over stored per-replicate values, so results are independent of how the
replicates were scheduled.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bayes import (
    Loss,
    LossSpec,
    PriorSpec,
    credible_interval,
    default_mh_inputs,
    hpd_interval,
    point_estimate,
    run_mh,
    study_prior,
)
from .gumbel import ModelParams
from .mle import ConvergenceError, asymptotic_ci, fit_mle
from .sampling import Case, ExperimentDesign, generate_censored_sample, replicate_rng

__all__ = ["StudyConfig", "StudyRow", "StudyResult", "run_study", "emit_table", "parse_table_csv"]

_PARAM_NAMES = ("alpha", "lam", "beta")
_MAX_ATTEMPTS_PER_REPLICATE = 64


@dataclass(frozen=True)
class StudyConfig:
    true_params: ModelParams
    design: ExperimentDesign
    replicates: int
    gamma: float = 0.05
    prior: PriorSpec | None = None
    losses: tuple[LossSpec, ...] = (
        LossSpec(Loss.SEL),
        LossSpec(Loss.LINEX, -0.05),
        LossSpec(Loss.LINEX, 1.0),
    )
    chain_length: int = 10_000
    burn_in: int = 2_000
    scan: str = "literal"
    seed: int = 0
    max_resample_rate: float = 0.2
    jobs: int | None = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not (0 < self.gamma < 1):
            raise ValueError("gamma must lie in (0, 1)")


@dataclass(frozen=True)
class StudyRow:
    """One method x parameter cell of the results table."""

    tau: float
    beta: float
    n: int
    r: int
    parameter: str
    method: str
    ae: float | None
    mse: float | None
    al: float | None
    cp: float | None


@dataclass(frozen=True)
class StudyResult:
    rows: tuple[StudyRow, ...]
    replicates: int
    resamples: int
    seed: int
    case_redraws: dict = field(default_factory=dict)


def default_prior_for(cfg: StudyConfig) -> PriorSpec:
    return study_prior(cfg.true_params)


def _one_replicate(cfg: StudyConfig, rep: int) -> dict:
    truth = cfg.true_params
    out: dict = {}
    attempt = 0
    while True:
        if attempt >= _MAX_ATTEMPTS_PER_REPLICATE:
            raise RuntimeError(
                f"replicate {rep}: exceeded {_MAX_ATTEMPTS_PER_REPLICATE} redraws; design likely degenerate"
            )
        rng = replicate_rng(cfg.seed, rep, attempt)
        sample = generate_censored_sample(truth, cfg.design, rng)
        if sample.case is not Case.II:
            attempt += 1
            continue
        try:
            fit = fit_mle(sample)
            intervals = asymptotic_ci(fit, cfg.gamma)
        except (ConvergenceError, ValueError):
            attempt += 1
            continue
        break
    out["resamples"] = attempt
    out["mle"] = fit.params_hat.as_array()
    out["aci_lo"] = np.array([intervals[k].lower for k in _PARAM_NAMES])
    out["aci_hi"] = np.array([intervals[k].upper for k in _PARAM_NAMES])

    if cfg.prior is not None:
        init, sds = default_mh_inputs(fit, cfg.prior)
        chain = run_mh(
            sample,
            cfg.prior,
            m=cfg.chain_length,
            burn=cfg.burn_in,
            init=init,
            proposal_sds=sds,
            rng=rng,
            scan=cfg.scan,
        )
        for loss in cfg.losses:
            out[f"bayes:{loss.label()}"] = point_estimate(chain, loss).as_array()
        ci = credible_interval(chain, cfg.gamma)
        hpd = hpd_interval(chain, cfg.gamma)
        out["ci_lo"] = np.array([ci[k].lower for k in _PARAM_NAMES])
        out["ci_hi"] = np.array([ci[k].upper for k in _PARAM_NAMES])
        out["hpd_lo"] = np.array([hpd[k].lower for k in _PARAM_NAMES])
        out["hpd_hi"] = np.array([hpd[k].upper for k in _PARAM_NAMES])
    return out


def _interval_rows(cfg, method, lo, hi, truth):
    rows = []
    width = (hi - lo).mean(axis=0)
    cover = ((lo <= truth[None, :]) & (truth[None, :] <= hi)).mean(axis=0)
    for j, name in enumerate(_PARAM_NAMES):
        rows.append(
            StudyRow(
                tau=cfg.design.tau,
                beta=cfg.true_params.beta,
                n=cfg.design.n,
                r=cfg.design.r,
                parameter=name,
                method=method,
                ae=None,
                mse=None,
                al=float(width[j]),
                cp=float(cover[j]),
            )
        )
    return rows


def _point_rows(cfg, method, est, truth, al=None, cp=None):
    rows = []
    ae = est.mean(axis=0)
    mse = ((est - truth[None, :]) ** 2).mean(axis=0)
    for j, name in enumerate(_PARAM_NAMES):
        rows.append(
            StudyRow(
                tau=cfg.design.tau,
                beta=cfg.true_params.beta,
                n=cfg.design.n,
                r=cfg.design.r,
                parameter=name,
                method=method,
                ae=float(ae[j]),
                mse=float(mse[j]),
                al=None if al is None else float(al[j]),
                cp=None if cp is None else float(cp[j]),
            )
        )
    return rows


def run_study(cfg: StudyConfig) -> StudyResult:
    """Run all replicates and aggregate the table rows.

    Deterministic for a fixed config (including seed) regardless of worker
    count: per-replicate streams are keyed by (seed, replicate, attempt) and
    aggregation runs over replicate-indexed arrays.
    """
    reps = cfg.replicates
    jobs = cfg.jobs if cfg.jobs is not None else (1 if reps < 16 else (os.cpu_count() or 1))
    results: list[dict | None] = [None] * reps
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for rep, res in enumerate(pool.map(_worker, [(cfg, rep) for rep in range(reps)], chunksize=8)):
                results[rep] = res
    else:
        for rep in range(reps):
            results[rep] = _one_replicate(cfg, rep)

    resamples = int(sum(r["resamples"] for r in results))
    rate = resamples / (reps + resamples)
    if rate > cfg.max_resample_rate:
        raise RuntimeError(
            f"resample rate {rate:.1%} exceeds {cfg.max_resample_rate:.0%}: design likely degenerate"
        )

    truth = cfg.true_params.as_array()
    rows: list[StudyRow] = []
    mle = np.stack([r["mle"] for r in results])
    aci_lo = np.stack([r["aci_lo"] for r in results])
    aci_hi = np.stack([r["aci_hi"] for r in results])
    width = (aci_hi - aci_lo).mean(axis=0)
    cover = ((aci_lo <= truth[None, :]) & (truth[None, :] <= aci_hi)).mean(axis=0)
    rows += _point_rows(cfg, "MLE+ACI", mle, truth, al=width, cp=cover)

    if cfg.prior is not None:
        for loss in cfg.losses:
            est = np.stack([r[f"bayes:{loss.label()}"] for r in results])
            rows += _point_rows(cfg, loss.label(), est, truth)
        rows += _interval_rows(cfg, "PercentileCI", np.stack([r["ci_lo"] for r in results]),
                               np.stack([r["ci_hi"] for r in results]), truth)
        rows += _interval_rows(cfg, "HPD", np.stack([r["hpd_lo"] for r in results]),
                               np.stack([r["hpd_hi"] for r in results]), truth)

    return StudyResult(rows=tuple(rows), replicates=reps, resamples=resamples, seed=cfg.seed)


def _worker(args):
    cfg, rep = args
    return _one_replicate(cfg, rep)


_COLUMNS = ("tau", "beta", "n", "r", "parameter", "method", "AE", "MSE", "AL", "CP")


def _row_values(row: StudyRow):
    return (row.tau, row.beta, row.n, row.r, row.parameter, row.method, row.ae, row.mse, row.al, row.cp)


def emit_table(rows, fmt: str = "csv") -> str:
    """Render study rows as csv, markdown, or json (full float precision)."""
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to emit")
    if fmt == "csv":
        lines = [",".join(_COLUMNS)]
        for row in rows:
            lines.append(",".join("" if v is None else repr(v) if isinstance(v, float) else str(v)
                                  for v in _row_values(row)))
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        lines = ["| " + " | ".join(_COLUMNS) + " |", "|" + "---|" * len(_COLUMNS)]
        for row in rows:
            cells = []
            for v in _row_values(row):
                if v is None:
                    cells.append("")
                elif isinstance(v, float):
                    cells.append(f"{v:.4f}")
                else:
                    cells.append(str(v))
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        import json

        payload = [dict(zip(_COLUMNS, _row_values(row))) for row in rows]
        return json.dumps(payload, indent=2, sort_keys=False) + "\n"
    raise ValueError(f"unknown table format {fmt!r}")


def parse_table_csv(text: str) -> list[StudyRow]:
    """Inverse of ``emit_table(..., "csv")``."""
    lines = [ln for ln in text.strip().splitlines() if ln and not ln.startswith("#")]
    if not lines or lines[0] != ",".join(_COLUMNS):
        raise ValueError("unrecognized table header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(_COLUMNS):
            raise ValueError(f"malformed table row: {ln!r}")
        tau, beta, n, r, parameter, method, ae, mse, al, cp = parts
        conv = lambda s: None if s == "" else float(s)
        rows.append(
            StudyRow(
                tau=float(tau),
                beta=float(beta),
                n=int(n),
                r=int(r),
                parameter=parameter,
                method=method,
                ae=conv(ae),
                mse=conv(mse),
                al=conv(al),
                cp=conv(cp),
            )
        )
    return rows
