"""Command-line front end.

Subcommands: simulate, fit-mle, fit-bayes, mc-study, gof, real-data.
Exit codes: 0 success, 1 validation error, 2 numerical failure (e.g.
non-convergence), 64 usage error. The default seed comes from --seed, then
the SSLTRV_SEED environment variable, then 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
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
from .bladder import BLADDER_CONFIGS, Dataset, bladder_remission_times, bladder_sslt_sample
from .gof import ecdf, fit_baseline_mle, ks_test, ks_test_bootstrap, qq_points, summary_plots_data
from .gumbel import ModelParams
from .mle import ConvergenceError, IdentifiabilityError, asymptotic_ci, fit_mle, SolverOptions
from .report import (
    MANIFEST_SIDECAR,
    RunManifest,
    SampleCsvError,
    json_dumps,
    manifest_dict,
    parse_sample_csv,
    sample_to_csv,
    sample_to_json,
)
from .sampling import ExperimentDesign, generate_censored_sample, make_rng
from .study import StudyConfig, emit_table, run_study

_DISPLAY = {"alpha": "alpha", "lam": "lambda", "beta": "beta"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(64)


def _default_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("SSLTRV_SEED")
    return int(env) if env else 0


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _interval_block(intervals) -> dict:
    return {
        _DISPLAY[k]: {"lower": v.lower, "upper": v.upper, "level": v.level, "length": v.width}
        for k, v in intervals.items()
    }


def _params_block(p: ModelParams) -> dict:
    return {"alpha": p.alpha, "lambda": p.lam, "beta": p.beta}


def _mle_block(fit, intervals) -> dict:
    se = fit.std_errors
    return {
        "estimates": _params_block(fit.params_hat),
        "std_errors": {"alpha": se[0], "lambda": se[1], "beta": se[2]},
        "intervals": _interval_block(intervals),
        "loglik": fit.loglik,
        "convergence": {
            "converged": fit.converged,
            "iterations": fit.iterations,
            "score_norm": fit.score_norm,
            "notes": list(fit.notes),
        },
        "info_matrix": fit.info_matrix,
        "cov_matrix": fit.cov_matrix,
    }


def _write_sidecar(out_dir: Path, manifest: RunManifest) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / MANIFEST_SIDECAR).write_text(json_dumps(manifest_dict(manifest, volatile=True)))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_simulate(args) -> int:
    seed = _default_seed(args.seed)
    params = ModelParams(args.alpha, getattr(args, "lambda"), args.beta)
    design = ExperimentDesign(n=args.n, r=args.r, tau=args.tau)
    sample = generate_censored_sample(params, design, make_rng(seed))
    manifest = RunManifest(
        command="simulate",
        config={
            "alpha": params.alpha, "lambda": params.lam, "beta": params.beta,
            "tau": design.tau, "n": design.n, "r": design.r, "format": args.format,
        },
        seed=seed,
    )
    if args.format == "csv":
        _emit(sample_to_csv(sample, manifest), args.out)
    else:
        _emit(sample_to_json(sample, manifest, seed=seed), args.out)
    return 0


def _load_sample(args):
    return parse_sample_csv(args.data, tau=args.tau, n=args.n)


def _cmd_fit_mle(args) -> int:
    sample = _load_sample(args)
    fit = fit_mle(sample, SolverOptions(max_iter=args.max_iter))
    intervals = asymptotic_ci(fit, args.gamma)
    manifest = RunManifest(
        command="fit-mle",
        config={"data": str(args.data), "tau": sample.design.tau, "n": sample.design.n,
                "gamma": args.gamma, "max_iter": args.max_iter},
        seed=None,
    )
    report = {
        "manifest": manifest_dict(manifest),
        "design": {"n": sample.design.n, "r": sample.design.r, "tau": sample.design.tau},
        "n_pre_tau": sample.n_pre_tau,
        "case": sample.case,
        "mle": _mle_block(fit, intervals),
    }
    _emit(json_dumps(report), args.out)
    return 0


def _prior_from_args(args, default: PriorSpec) -> PriorSpec:
    keys = ("a", "b", "c", "d", "p", "q")
    given = {k: getattr(args, k) for k in keys if getattr(args, k) is not None}
    if not given:
        return default
    merged = {k: getattr(default, k) for k in keys}
    merged.update(given)
    return PriorSpec(**merged)


def _bayes_block(sample, prior, args, seed, fit=None):
    init, sds = default_mh_inputs(fit, prior)
    chain = run_mh(
        sample, prior,
        m=args.chain_length, burn=args.burn_in,
        init=init, proposal_sds=sds, seed=seed, scan=args.scan,
    )
    losses = [LossSpec(Loss.SEL), LossSpec(Loss.LINEX, -0.05), LossSpec(Loss.LINEX, args.linex_u)]
    estimates = {}
    for loss in losses:
        if loss.label() not in estimates:
            estimates[loss.label()] = _params_block(point_estimate(chain, loss))
    block = {
        "prior": {"a": prior.a, "b": prior.b, "c": prior.c, "d": prior.d, "p": prior.p, "q": prior.q},
        "chain": {
            "length": args.chain_length,
            "burn_in": args.burn_in,
            "scan": args.scan,
            "seed": seed,
            "acceptance_rates": {
                "alpha": chain.acceptance_rates[0],
                "lambda": chain.acceptance_rates[1],
                "beta": chain.acceptance_rates[2],
            },
        },
        "estimates": estimates,
        "intervals": {
            "percentile": _interval_block(credible_interval(chain, args.gamma)),
            "hpd": _interval_block(hpd_interval(chain, args.gamma)),
        },
    }
    return block, chain


def _cmd_fit_bayes(args) -> int:
    sample = _load_sample(args)
    seed = _default_seed(args.seed)
    prior = _prior_from_args(args, PriorSpec())
    try:
        fit = fit_mle(sample)
    except (ConvergenceError, IdentifiabilityError, ValueError):
        fit = None
    block, chain = _bayes_block(sample, prior, args, seed, fit=fit)
    manifest = RunManifest(
        command="fit-bayes",
        config={"data": str(args.data), "tau": sample.design.tau, "n": sample.design.n,
                "gamma": args.gamma, "chain_length": args.chain_length, "burn_in": args.burn_in,
                "linex_u": args.linex_u, "scan": args.scan,
                "prior": block["prior"]},
        seed=seed,
    )
    report = {
        "manifest": manifest_dict(manifest),
        "design": {"n": sample.design.n, "r": sample.design.r, "tau": sample.design.tau},
        "n_pre_tau": sample.n_pre_tau,
        "case": sample.case,
        "bayes": block,
    }
    if args.dump_chain:
        lines = ["iter,alpha,lambda,beta"]
        for i, row in enumerate(chain.draws):
            lines.append(f"{i},{float(row[0])!r},{float(row[1])!r},{float(row[2])!r}")
        Path(args.dump_chain).parent.mkdir(parents=True, exist_ok=True)
        Path(args.dump_chain).write_text("\n".join(lines) + "\n")
    _emit(json_dumps(report), args.out)
    return 0


def _load_toml(path: str) -> dict:
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _cmd_mc_study(args) -> int:
    raw = _load_toml(args.config) if args.config else {}
    unknown = set(raw) - {
        "alpha", "lambda", "beta", "tau", "n", "r", "replicates", "gamma", "seed", "bayes",
        "chain_length", "burn_in", "scan", "linex_u", "jobs",
        "prior_a", "prior_b", "prior_c", "prior_d", "prior_p", "prior_q",
    }
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    truth = ModelParams(raw.get("alpha", 1.0), raw.get("lambda", 0.75), raw.get("beta", 0.35))
    design = ExperimentDesign(n=raw.get("n", 50), r=raw.get("r", 30), tau=raw.get("tau", 0.6))
    seed = args.seed if args.seed is not None else raw.get("seed")
    seed = _default_seed(seed)
    prior = None
    if raw.get("bayes", False):
        if any(f"prior_{k}" in raw for k in "abcdpq"):
            prior = PriorSpec(
                a=raw.get("prior_a", 1.0), b=raw.get("prior_b", 0.0),
                c=raw.get("prior_c", 1.0), d=raw.get("prior_d", 0.0),
                p=raw.get("prior_p", 1.0), q=raw.get("prior_q", 1.0),
            )
        else:
            prior = study_prior(truth)
    losses = tuple(
        LossSpec(Loss.SEL) if u is None else LossSpec(Loss.LINEX, float(u))
        for u in [None] + list(raw.get("linex_u", [-0.05, 1.0]))
    )
    cfg = StudyConfig(
        true_params=truth,
        design=design,
        replicates=args.replicates if args.replicates is not None else raw.get("replicates", 1000),
        gamma=raw.get("gamma", 0.05),
        prior=prior,
        losses=losses,
        chain_length=raw.get("chain_length", 10_000),
        burn_in=raw.get("burn_in", 2_000),
        scan=raw.get("scan", "literal"),
        seed=seed,
        jobs=args.jobs if args.jobs is not None else raw.get("jobs"),
    )
    t0 = time.perf_counter()
    result = run_study(cfg)
    wall = time.perf_counter() - t0
    manifest = RunManifest(
        command="mc-study",
        config={
            "alpha": truth.alpha, "lambda": truth.lam, "beta": truth.beta,
            "tau": design.tau, "n": design.n, "r": design.r,
            "replicates": cfg.replicates, "gamma": cfg.gamma,
            "bayes": prior is not None,
            "prior": None if prior is None else
                {"a": prior.a, "b": prior.b, "c": prior.c, "d": prior.d, "p": prior.p, "q": prior.q},
            "chain_length": cfg.chain_length, "burn_in": cfg.burn_in, "scan": cfg.scan,
        },
        seed=seed,
        wall_time_s=wall,
    )
    provenance = {
        "manifest": manifest_dict(manifest),
        "replicates": result.replicates,
        "resamples": result.resamples,
    }
    if args.out is None:
        sys.stdout.write(f"# manifest: {json.dumps(manifest_dict(manifest), sort_keys=True)}\n")
        sys.stdout.write(f"# resamples: {result.resamples}\n")
        sys.stdout.write(emit_table(result.rows, args.format))
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        head = (f"# manifest: {json.dumps(manifest_dict(manifest), sort_keys=True)}\n"
                f"# resamples: {result.resamples}\n")
        (out / "table.csv").write_text(head + emit_table(result.rows, "csv"))
        (out / "table.md").write_text(emit_table(result.rows, "markdown"))
        (out / "table.json").write_text(json_dumps({"provenance": provenance,
                                                    "rows": json.loads(emit_table(result.rows, "json"))}))
        _write_sidecar(out, manifest)
        sys.stderr.write(f"mc-study: {result.replicates} replicates, {result.resamples} resamples, "
                         f"{wall:.1f}s -> {out}\n")
    return 0


def _read_values_csv(path: str) -> np.ndarray:
    values = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.lower() in ("value", "time"):
            continue
        token = line.split(",")[0]
        try:
            values.append(float(token))
        except ValueError as e:
            raise SampleCsvError(f"line {lineno}: {e}") from e
    if not values:
        raise SampleCsvError("no values in file")
    return np.array(values)


def _write_plot_data(data: Dataset, params: ModelParams, summary, out: Path) -> None:
    xs, fn = ecdf(data)
    lines = ["x,ecdf"] + [f"{float(a)!r},{float(b)!r}" for a, b in zip(xs, fn)]
    (out / "ecdf.csv").write_text("\n".join(lines) + "\n")
    theo, emp = qq_points(data, params)
    lines = ["theoretical,empirical"] + [f"{float(a)!r},{float(b)!r}" for a, b in zip(theo, emp)]
    (out / "qq.csv").write_text("\n".join(lines) + "\n")
    lines = ["bin_left,bin_right,density"] + [
        f"{float(l)!r},{float(rgt)!r},{float(d)!r}"
        for l, rgt, d in zip(summary.hist_edges[:-1], summary.hist_edges[1:], summary.hist_density)
    ]
    (out / "histogram.csv").write_text("\n".join(lines) + "\n")
    lines = ["t,pdf"] + [f"{float(a)!r},{float(b)!r}" for a, b in zip(summary.density_grid, summary.density_values)]
    (out / "density.csv").write_text("\n".join(lines) + "\n")
    box = summary.box
    lines = ["statistic,value"]
    for key in ("minimum", "q1", "median", "q3", "maximum", "whisker_lo", "whisker_hi"):
        lines.append(f"{key},{float(getattr(box, key))!r}")
    for v in box.outliers:
        lines.append(f"outlier,{float(v)!r}")
    (out / "boxplot.csv").write_text("\n".join(lines) + "\n")


def _gof_outputs(data: Dataset, params: ModelParams, args, manifest: RunManifest, extra: dict | None = None):
    ks = ks_test(data, params)
    summary = summary_plots_data(data, params, bins=args.bins)
    report = {
        "manifest": manifest_dict(manifest),
        "dataset": {"label": data.label, "n": data.n,
                    "mean": float(np.mean(data.values)), "median": float(np.median(data.values))},
        "params": _params_block(params),
        "ks": {"statistic": ks.statistic, "p_value": ks.p_value, "n": ks.n},
        "box": {
            "minimum": summary.box.minimum, "q1": summary.box.q1, "median": summary.box.median,
            "q3": summary.box.q3, "maximum": summary.box.maximum,
            "whisker_lo": summary.box.whisker_lo, "whisker_hi": summary.box.whisker_hi,
            "outliers": summary.box.outliers,
        },
    }
    if extra:
        report.update(extra)
    if getattr(args, "bootstrap_p", None):
        boot = ks_test_bootstrap(data, b=args.bootstrap_p, seed=_default_seed(args.seed))
        report["ks"]["bootstrap_p_value"] = boot.p_value
        report["ks"]["bootstrap_replicates"] = args.bootstrap_p

    if args.out is None:
        sys.stdout.write(json_dumps(report))
        return 0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_plot_data(data, params, summary, out)
    if not args.no_figures:
        from .figures import render_gof_figures

        report["figures"] = render_gof_figures(data, params, summary, out)
    (out / "report.json").write_text(json_dumps(report))
    _write_sidecar(out, manifest)
    return 0


def _cmd_gof(args) -> int:
    if args.bladder:
        data = bladder_remission_times()
        source = "embedded bladder dataset"
    else:
        if args.data is None:
            raise SampleCsvError("gof needs --data FILE or --bladder")
        data = Dataset(values=_read_values_csv(args.data), label=str(args.data))
        source = str(args.data)
    lam = getattr(args, "lambda")
    if (args.alpha is None) != (lam is None):
        raise ValueError("give both --alpha and --lambda, or neither (to fit them)")
    fitted = args.alpha is None
    params = fit_baseline_mle(data.values) if fitted else ModelParams(args.alpha, lam, 1.0)
    manifest = RunManifest(
        command="gof",
        config={"data": source, "alpha": params.alpha, "lambda": params.lam,
                "fitted": fitted, "bins": args.bins},
        seed=_default_seed(args.seed) if args.bootstrap_p else None,
    )
    return _gof_outputs(data, params, args, manifest, extra={"params_fitted": fitted})


def _cmd_real_data(args) -> int:
    tau, r = args.tau, args.r
    if (tau, r) not in BLADDER_CONFIGS:
        raise ValueError(f"tau must be one of {{2.5, 4}} and r one of {{50, 60}}")
    seed = _default_seed(args.seed)
    sample = bladder_sslt_sample(tau, r)
    fit = fit_mle(sample)
    intervals = asymptotic_ci(fit, args.gamma)
    prior = _prior_from_args(args, study_prior(ModelParams(0.75, 2.5, 0.5)))
    block, _chain = _bayes_block(sample, prior, args, seed, fit=fit)

    full = bladder_remission_times()
    baseline = fit_baseline_mle(full.values)
    ks = ks_test(full, baseline)

    manifest = RunManifest(
        command="real-data",
        config={"tau": tau, "r": r, "gamma": args.gamma,
                "chain_length": args.chain_length, "burn_in": args.burn_in,
                "linex_u": args.linex_u, "scan": args.scan, "prior": block["prior"]},
        seed=seed,
    )
    report = {
        "manifest": manifest_dict(manifest),
        "dataset": {
            "tau": tau, "r": r, "n": sample.design.n, "n_pre_tau": sample.n_pre_tau,
            "construction_beta": 0.5, "case": sample.case,
        },
        "mle": _mle_block(fit, intervals),
        "bayes": block,
        "ks_full_data": {
            "statistic": ks.statistic, "p_value": ks.p_value, "n": ks.n,
            "baseline_mle": {"alpha": baseline.alpha, "lambda": baseline.lam},
        },
    }
    if args.out is None:
        sys.stdout.write(json_dumps(report))
        return 0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = summary_plots_data(full, baseline, bins=args.bins)
    _write_plot_data(full, baseline, summary, out)
    if not args.no_figures:
        from .figures import render_gof_figures

        report["figures"] = render_gof_figures(full, baseline, summary, out)
    (out / "report.json").write_text(json_dumps(report))
    _write_sidecar(out, manifest)
    sys.stderr.write(f"real-data: wrote report and plot data to {out}\n")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    parser = _Parser(prog="ssltrv", description=__doc__)
    parser.add_argument("--version", action="version", version=f"ssltrv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw a Type-II censored step-stress sample")
    sim.add_argument("--alpha", type=float, required=True)
    sim.add_argument("--lambda", type=float, required=True, dest="lambda")
    sim.add_argument("--beta", type=float, required=True)
    sim.add_argument("--tau", type=float, required=True)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--r", type=int, required=True)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--out", default=None)
    sim.set_defaults(func=_cmd_simulate)

    fm = sub.add_parser("fit-mle", help="Newton-Raphson MLE with asymptotic intervals")
    fm.add_argument("--data", required=True)
    fm.add_argument("--tau", type=float, default=None, help="override tau from the file")
    fm.add_argument("--n", type=int, default=None, help="override units-on-test from the file")
    fm.add_argument("--gamma", type=float, default=0.05)
    fm.add_argument("--max-iter", type=int, default=200)
    fm.add_argument("--out", default=None)
    fm.set_defaults(func=_cmd_fit_mle)

    fb = sub.add_parser("fit-bayes", help="Metropolis-Hastings Bayes estimates and intervals")
    fb.add_argument("--data", required=True)
    fb.add_argument("--tau", type=float, default=None)
    fb.add_argument("--n", type=int, default=None)
    for flag in ("a", "b", "c", "d", "p", "q"):
        fb.add_argument(f"--{flag}", type=float, default=None, help=f"prior hyperparameter {flag}")
    fb.add_argument("--chain-length", type=int, default=10_000)
    fb.add_argument("--burn-in", type=int, default=2_000)
    fb.add_argument("--linex-u", type=float, default=1.0)
    fb.add_argument("--gamma", type=float, default=0.05)
    fb.add_argument("--seed", type=int, default=None)
    fb.add_argument("--scan", choices=("literal", "systematic"), default="literal")
    fb.add_argument("--dump-chain", default=None, metavar="FILE.csv")
    fb.add_argument("--out", default=None)
    fb.set_defaults(func=_cmd_fit_bayes)

    mc = sub.add_parser("mc-study", help="Monte Carlo AE/MSE/AL/CP study")
    mc.add_argument("--config", default=None, help="TOML config file")
    mc.add_argument("--replicates", type=int, default=None)
    mc.add_argument("--seed", type=int, default=None)
    mc.add_argument("--jobs", type=int, default=None)
    mc.add_argument("--format", choices=("csv", "markdown", "json"), default="csv")
    mc.add_argument("--out", default=None, help="output directory")
    mc.set_defaults(func=_cmd_mc_study)

    gf = sub.add_parser("gof", help="goodness-of-fit report (K-S, ECDF, Q-Q, histogram, box plot)")
    gf.add_argument("--data", default=None, help="CSV of positive values, one per line")
    gf.add_argument("--bladder", action="store_true", help="use the embedded bladder dataset")
    gf.add_argument("--alpha", type=float, default=None)
    gf.add_argument("--lambda", type=float, default=None, dest="lambda")
    gf.add_argument("--bins", type=int, default=20)
    gf.add_argument("--parametric-bootstrap", type=int, default=None, dest="bootstrap_p",
                    metavar="B", help="bootstrap p-value with B refits")
    gf.add_argument("--seed", type=int, default=None)
    gf.add_argument("--out", default=None, help="output directory")
    gf.add_argument("--no-figures", action="store_true")
    gf.set_defaults(func=_cmd_gof)

    rd = sub.add_parser("real-data", help="bladder case study: MLE + Bayes + GOF report")
    rd.add_argument("--tau", type=float, required=True, choices=(2.5, 4.0))
    rd.add_argument("--r", type=int, required=True, choices=(50, 60))
    for flag in ("a", "b", "c", "d", "p", "q"):
        rd.add_argument(f"--{flag}", type=float, default=None, help=f"prior hyperparameter {flag}")
    rd.add_argument("--gamma", type=float, default=0.05)
    rd.add_argument("--chain-length", type=int, default=10_000)
    rd.add_argument("--burn-in", type=int, default=2_000)
    rd.add_argument("--linex-u", type=float, default=1.0)
    rd.add_argument("--seed", type=int, default=None)
    rd.add_argument("--scan", choices=("literal", "systematic"), default="literal")
    rd.add_argument("--bins", type=int, default=20)
    rd.add_argument("--out", default=None, help="output directory")
    rd.add_argument("--no-figures", action="store_true")
    rd.set_defaults(func=_cmd_real_data)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SampleCsvError, IdentifiabilityError, ValueError) as e:
        sys.stderr.write(f"ssltrv: validation error: {e}\n")
        return 1
    except (ConvergenceError, RuntimeError, np.linalg.LinAlgError) as e:
        sys.stderr.write(f"ssltrv: numerical failure: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
