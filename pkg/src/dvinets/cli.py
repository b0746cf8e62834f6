"""Batch command-line interface: fitting, sampling, prediction, summaries.

Every command validates its configuration before any compute, echoes it into
the output files, and is deterministic given identical inputs and seed (the
only varying field is meta.created_utc).  Exit codes: 0 success, 2 input
error, 3 numerical failure, 4 stuck chain (outputs still written,
success-with-status).  File layouts are documented in FORMATS.md.
"""

from __future__ import annotations

import csv
import datetime
import functools
import json
import math
import os
import sys
from dataclasses import asdict, dataclass

import click
import numpy as np

from . import __version__
from ._rng import resolve_threads
from .dgp import simulate_autologistic
from .analysis import (
    posterior_summaries,
    predict,
    spearman_continuous,
    spearman_discrete,
    spearman_mixed,
    SpearmanReport,
    write_predictions_csv,
    write_summary_csv,
)
from .dvine import DvineSpec, n_paircopulas, simulate
from .errors import InputError, NumericalFailure
from .margins import (
    CONTINUOUS,
    DISCRETE,
    ContinuousMargin,
    OrdinalMargin,
    fit_empirical_ordinal,
    normalize_kinds,
)
from .mcmc import McmcConfig, McmcResult, run_sampler
from .paircopula import MixtureParam, PARAM_NAMES, mix_logpdf, transform
from .vbda import FitResult, VBConfig, fit

FAMILIES = ("gumbel_mix",)
GRID_SIDE = 30


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """Validated invocation record, echoed into every output file."""

    command: str
    input: str = ""
    types: tuple = ()
    family: str = "gumbel_mix"
    p: int = 1
    K: int = 1
    S: int = 500
    steps: int = 5000
    variant: int = 2
    seed: int = 0
    output: str = ""
    threads: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(
                f"unsupported family {self.family!r}; choose from {FAMILIES}"
            )
        if self.p < 1:
            raise InputError("p must be >= 1")
        if self.seed < 0:
            raise InputError("seed must be >= 0")


def _cli_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except InputError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(2)
        except NumericalFailure as e:
            click.echo(f"numerical failure: {e}", err=True)
            sys.exit(3)

    return wrapper


def _meta(command):
    now = datetime.datetime.now(datetime.timezone.utc)
    return {"created_utc": now.isoformat(timespec="seconds"), "command": command}


def _write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=1)
        f.write("\n")


def read_data_csv(path, n_series=None):
    """(T, r) float array from a CSV of numeric rows; optional header line.

    Errors carry 1-based line numbers.
    """
    if not os.path.exists(path):
        raise InputError(f"input file not found: {path}")
    rows = []
    start_line = 1
    with open(path, newline="") as f:
        reader = csv.reader(f)
        for lineno, cells in enumerate(reader, start=1):
            if not cells or all(c.strip() == "" for c in cells):
                continue
            if lineno == 1:
                try:
                    [float(c) for c in cells]
                except ValueError:
                    start_line = 2
                    continue
            vals = []
            for col, c in enumerate(cells):
                try:
                    v = float(c)
                except ValueError:
                    raise InputError(
                        f"{path}:{lineno}: column {col} is not numeric: {c!r}"
                    )
                if math.isnan(v) or math.isinf(v):
                    raise InputError(f"{path}:{lineno}: column {col} is {c.strip()}")
                vals.append(v)
            rows.append((lineno, vals))
    if not rows:
        raise InputError(f"{path}: no data rows")
    width = len(rows[0][1])
    for lineno, vals in rows:
        if len(vals) != width:
            raise InputError(
                f"{path}:{lineno}: expected {width} columns, found {len(vals)}"
            )
    if n_series is not None and width != n_series:
        raise InputError(
            f"{path}:{rows[0][0]}: expected {n_series} columns, found {width}"
        )
    return np.array([vals for _, vals in rows], dtype=float), [ln for ln, _ in rows]


def _check_types(path, y, kinds, line_numbers):
    for l, kind in enumerate(kinds):
        if kind == DISCRETE:
            col = y[:, l]
            bad = np.nonzero(col != np.floor(col))[0]
            if bad.size:
                raise InputError(
                    f"{path}:{line_numbers[bad[0]]}: column {l} is declared "
                    f"discrete but holds non-integer value {float(col[bad[0]])!r}"
                )


def _parse_types(types, r):
    if not types:
        return normalize_kinds(None, r)
    names = [t.strip().lower() for t in types.split(",")]
    if len(names) == 1 and r > 1:
        names = names * r
    return normalize_kinds(names, r)


def _fit_margins(y, kinds):
    margins = []
    for l, kind in enumerate(kinds):
        if kind == DISCRETE:
            margins.append(fit_empirical_ordinal(y[:, l]))
        else:
            margins.append(ContinuousMargin.from_sample(y[:, l]))
    return margins


def load_source(path):
    """FitResult or McmcResult from a result file; rejects version mismatch."""
    if not os.path.exists(path):
        raise InputError(f"result file not found: {path}")
    with open(path) as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise InputError(f"{path}: not valid JSON ({e})")
    ver = obj.get("version")
    if ver != __version__:
        raise InputError(
            f"{path}: written by version {ver!r}, library is {__version__}; "
            "refit rather than mixing versions"
        )
    kind = obj.get("kind")
    if kind == "vb_fit_file":
        return FitResult.from_json(obj["fit"])
    if kind == "mcmc_fit_file":
        return _chain_from_file(path, obj)
    raise InputError(f"{path}: unknown result kind {kind!r}")


def _chain_from_file(path, obj):
    from .margins import margin_from_json

    draws_csv = os.path.join(os.path.dirname(os.path.abspath(path)),
                             obj["draws_csv"])
    if not os.path.exists(draws_csv):
        raise InputError(f"{path}: draws file {obj['draws_csv']!r} is missing")
    rows = []
    with open(draws_csv, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or header[0] != "sweep":
            raise InputError(f"{draws_csv}:1: expected a draws header")
        for cells in reader:
            rows.append([float(c) for c in cells[1:]])
    if not rows:
        raise InputError(f"{draws_csv}: no draws")
    constrained = np.asarray(rows).reshape(len(rows), -1, 5)
    diag = obj["diagnostics"]
    cfg = McmcConfig(
        burnin=int(diag["burnin"]),
        iterates=int(diag["iterates"]),
        seed=int(diag["seed"]),
    )
    return McmcResult(
        psi_draws=transform(constrained),
        r=int(obj["r"]),
        p=int(obj["p"]),
        acc_rate_u=float(diag["acc_rate_u"]),
        acc_rate_theta=np.asarray(diag["acc_rate_theta"], dtype=float),
        stuck=bool(diag["stuck"]),
        stuck_sweep=diag["stuck_sweep"],
        zero_width_failures=int(diag["zero_width_failures"]),
        rw_scales=np.asarray(diag["rw_scales"], dtype=float),
        wall_seconds=float(diag["wall_seconds"]),
        config=cfg,
        kinds=list(obj["series_kinds"]),
        margins=tuple(margin_from_json(m) for m in obj["margins"]),
    )


def _load_raw(path):
    if not os.path.exists(path):
        raise InputError(f"result file not found: {path}")
    with open(path) as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise InputError(f"{path}: not valid JSON ({e})")
    if obj.get("version") != __version__:
        raise InputError(f"{path}: version mismatch")
    return obj


# ---------------------------------------------------------------------------
# Command group
# ---------------------------------------------------------------------------


@click.group()
@click.version_option(__version__, prog_name="dvinets")
def main():
    """Bayesian D-vine copula time-series models for discrete and mixed margins."""


_threads_option = click.option(
    "--threads", type=int, default=None,
    help="Worker threads (default: DVINETS_THREADS or all cores).",
)


def _run_vb_fit(command, input_path, types, family, p, K, S, steps, va, seed,
                out, lb_trace, threads, n_series):
    threads = resolve_threads(threads)
    runcfg = RunConfig(
        command=command, input=input_path, types=tuple(types),
        family=family, p=p, K=K, S=S, steps=steps, variant=va,
        seed=seed, output=out, threads=threads,
    )
    y, line_numbers = read_data_csv(input_path, n_series)
    r = y.shape[1]
    kinds = _parse_types(",".join(types) if types else "", r)
    runcfg = RunConfig(**{**asdict(runcfg), "types": tuple(kinds)})
    _check_types(input_path, y, kinds, line_numbers)
    margins = _fit_margins(y, kinds)
    config = VBConfig(S=S, steps=steps, K=K, variant=va, seed=seed,
                      threads=threads)
    result = fit(y, margins, kinds, r, p, config)
    lb_path = lb_trace or (os.path.splitext(out)[0] + "_lb.csv")
    _write_fit_file(out, lb_path, result, runcfg)
    click.echo(f"wrote {out} and {lb_path}")


def _write_fit_file(out, lb_path, result, runcfg):
    summary = posterior_summaries(result, n_psi_draws=100_000, seed=result.seed)
    outputs = {
        "gamma_mean": summary["mean"],
        "gamma_sd": summary["sd"],
        "mu": result.q_theta.mu.tolist(),
        "B": result.q_theta.B.tolist(),
        "D": result.q_theta.d.tolist(),
        "lambda": result.lambda_blocks(),
        "LB": np.asarray(result.lb_trace).tolist(),
    }
    if result.va.variant >= 2:
        outputs["muz"] = result.va.eta.tolist()
    if result.va.variant == 2:
        outputs["logsigmaz"] = result.va.logomega.tolist()
    if result.va.variant == 3:
        outputs["C"] = {
            "L_diag": result.va.L_diag.tolist(),
            "L_band": result.va.L_band.tolist(),
        }
    doc = {
        "version": __version__,
        "kind": "vb_fit_file",
        "meta": _meta(runcfg.command),
        "config_echo": asdict(runcfg),
        "block_labels": summary["labels"],
        "outputs": outputs,
        "fit": result.to_json(),
    }
    _write_json(out, doc)
    with open(lb_path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["step", "lb"])
        for s, v in enumerate(np.asarray(result.lb_trace), start=1):
            w.writerow([s, repr(float(v))])


def _fit_options(func):
    for opt in reversed([
        click.option("--types", multiple=True,
                     help="Comma-separated series kinds (discrete/continuous)."),
        click.option("--family", default="gumbel_mix", show_default=True),
        click.option("--p", type=int, default=1, show_default=True,
                     help="Markov order."),
        click.option("--K", "K", type=int, default=1, show_default=True,
                     help="Covariance factors of the parameter Gaussian."),
        click.option("--S", "S", type=int, default=500, show_default=True,
                     help="Monte Carlo samples per gradient step."),
        click.option("--steps", type=int, default=5000, show_default=True),
        click.option("--va", type=click.Choice(["1", "2", "3"]), default="2",
                     show_default=True, help="Latent approximation family."),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--out", required=True, help="Fit JSON path."),
        click.option("--lb-trace", default=None,
                     help="Lower-bound trace CSV (default: <out>_lb.csv)."),
        _threads_option,
    ]):
        func = opt(func)
    return func


@main.command("fit-uni")
@click.argument("input_path", metavar="DATA_CSV")
@_fit_options
@_cli_errors
def fit_uni(input_path, types, family, p, K, S, steps, va, seed, out,
            lb_trace, threads):
    """Fit the variational posterior for a univariate series."""
    _run_vb_fit("fit-uni", input_path, types, family, p, K, S, steps,
                int(va), seed, out, lb_trace, threads, n_series=1)


@main.command("fit-multi")
@click.argument("input_path", metavar="DATA_CSV")
@_fit_options
@_cli_errors
def fit_multi(input_path, types, family, p, K, S, steps, va, seed, out,
              lb_trace, threads):
    """Fit the variational posterior for a multivariate series."""
    _run_vb_fit("fit-multi", input_path, types, family, p, K, S, steps,
                int(va), seed, out, lb_trace, threads, n_series=None)


@main.command("mcmc-fit")
@click.argument("input_path", metavar="DATA_CSV")
@click.option("--types", multiple=True)
@click.option("--family", default="gumbel_mix", show_default=True)
@click.option("--p", type=int, default=1, show_default=True)
@click.option("--burnin", type=int, default=10000, show_default=True)
@click.option("--iterates", type=int, default=20000, show_default=True)
@click.option("--rw-scale", type=float, default=0.2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, help="Chain JSON path.")
@click.option("--draws", default=None,
              help="Draws CSV (default: <out>_draws.csv).")
@click.option("--threads", type=int, default=None,
              help="Accepted for interface symmetry; the chain is sequential.")
@_cli_errors
def mcmc_fit(input_path, types, family, p, burnin, iterates, rw_scale, seed,
             out, draws, threads):
    """Run the exact data-augmentation sampler (baseline for comparisons)."""
    runcfg = RunConfig(
        command="mcmc-fit", input=input_path, types=tuple(types),
        family=family, p=p, K=0, S=0, steps=burnin + iterates,
        variant=1, seed=seed, output=out, threads=1,
    )
    y, line_numbers = read_data_csv(input_path)
    r = y.shape[1]
    kinds = _parse_types(",".join(types) if types else "", r)
    _check_types(input_path, y, kinds, line_numbers)
    margins = _fit_margins(y, kinds)
    draws_path = draws or (os.path.splitext(out)[0] + "_draws.csv")
    config = McmcConfig(burnin=burnin, iterates=iterates,
                        rw_scales=rw_scale, seed=seed)
    chain = run_sampler(y, margins, DvineSpec.independence(r, p), config,
                        kinds=kinds, draws_path=draws_path)
    from .margins import margin_to_json

    doc = {
        "version": __version__,
        "kind": "mcmc_fit_file",
        "meta": _meta("mcmc-fit"),
        "config_echo": {**asdict(runcfg), "types": list(kinds)},
        "r": r,
        "p": p,
        "series_kinds": list(kinds),
        "margins": [margin_to_json(m) for m in margins],
        "draws_csv": os.path.basename(draws_path),
        "diagnostics": chain.diagnostics(),
    }
    _write_json(out, doc)
    click.echo(f"wrote {out} and {draws_path}")
    if chain.stuck:
        click.echo(
            f"warning: chain flagged stuck at sweep {chain.stuck_sweep} "
            f"(u acceptance {chain.acc_rate_u:.4f}); draws are unreliable",
            err=True,
        )
        sys.exit(4)


@main.command("predict")
@click.option("--fit", "fit_path", required=True, help="Fit or chain JSON.")
@click.option("--data", "data_path", required=True,
              help="CSV holding at least the last p observations.")
@click.option("--horizon", type=int, default=1, show_default=True)
@click.option("--n-draws", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, help="Predictions CSV path.")
@_cli_errors
def cmd_predict(fit_path, data_path, horizon, n_draws, seed, out):
    """Simulate draws from the posterior predictive distribution."""
    source = load_source(fit_path)
    y_tail, line_numbers = read_data_csv(data_path, source.r)
    _check_types(data_path, y_tail, list(source.kinds), line_numbers)
    values = predict(source, y_tail, horizon, n_draws, seed=seed)
    write_predictions_csv(out, values)
    click.echo(f"wrote {out}")


@main.command("spearman")
@click.option("--fit", "fit_path", required=True, help="Fit or chain JSON.")
@click.option("--n-sim", type=int, default=100_000, show_default=True)
@click.option("--n-param-draws", type=int, default=200, show_default=True)
@click.option("--max-lag", type=int, default=None,
              help="Largest lag k (default: the fitted p).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, help="Report CSV path (JSON alongside).")
@_threads_option
@_cli_errors
def cmd_spearman(fit_path, n_sim, n_param_draws, max_lag, seed, out, threads):
    """Posterior Spearman correlations for every pair and lag k = 0..p."""
    threads = resolve_threads(threads)
    source = load_source(fit_path)
    margins, kinds = list(source.margins), list(source.kinds)
    r = source.r
    kmax = source.p if max_lag is None else max_lag
    report = SpearmanReport(n_sim=n_sim, n_param_draws=n_param_draws, seed=seed)
    common = dict(n_sim=n_sim, n_param_draws=n_param_draws, seed=seed,
                  report=report, threads=threads)

    def one(i, j, k):
        if kinds[i] == DISCRETE and kinds[j] == DISCRETE:
            spearman_discrete(margins[i], margins[j], source, i, j, k, **common)
        elif kinds[i] == CONTINUOUS and kinds[j] == CONTINUOUS:
            spearman_continuous(source, i, j, k, **common)
        elif kinds[i] == CONTINUOUS:
            spearman_mixed(margins[j], source, i, j, k,
                           discrete_slot="j", **common)
        else:
            spearman_mixed(margins[i], source, i, j, k,
                           discrete_slot="i", **common)

    for i in range(r):
        for j in range(i):
            one(i, j, 0)
    for k in range(1, kmax + 1):
        for i in range(r):
            for j in range(r):
                one(i, j, k)
    report.write_csv(out)
    report.write_json(os.path.splitext(out)[0] + ".json")
    click.echo(f"wrote {out} and {os.path.splitext(out)[0] + '.json'}")


def _margin_for_token(token):
    token = token.strip().lower()
    if token == "uniform":
        return None
    if token.startswith("binary"):
        p1 = float(token.split(":", 1)[1]) if ":" in token else 0.5
        if not 0.0 < p1 < 1.0:
            raise InputError("binary margin needs a success probability in (0,1)")
        return OrdinalMargin.from_pmf([0.0, 1.0], [1.0 - p1, p1])
    if token.startswith("poisson"):
        if ":" not in token:
            raise InputError("poisson margin needs a mean, e.g. poisson:3")
        lam = float(token.split(":", 1)[1])
        if lam <= 0:
            raise InputError("poisson mean must be positive")
        from scipy.stats import poisson

        top = int(poisson.ppf(1.0 - 1e-12, lam)) + 1
        support = np.arange(top + 1, dtype=float)
        pmf = poisson.pmf(support, lam)
        return OrdinalMargin.from_pmf(support, pmf / pmf.sum())
    raise InputError(f"unknown margin {token!r}; use uniform, binary[:p], poisson:mean")


@main.command("simulate-dgp")
@click.option("--kind", type=click.Choice(["autologistic", "dvine"]),
              required=True)
@click.option("--T", "T", type=int, required=True, help="Series length.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--r", "r", type=int, default=1, show_default=True,
              help="Series per time point (dvine kind).")
@click.option("--p", "p", type=int, default=1, show_default=True,
              help="Markov order (dvine kind).")
@click.option("--tau", type=float, default=0.5, show_default=True,
              help="Gumbel Kendall tau for every block (dvine kind).")
@click.option("--margin", "margin_tokens", multiple=True,
              help="uniform | binary[:p1] | poisson:mean per series (dvine kind).")
@click.option("--out", required=True, help="Data CSV path.")
@_cli_errors
def simulate_dgp(kind, T, seed, r, p, tau, margin_tokens, out):
    """Generate benchmark series with a known data-generating process."""
    if T < 1:
        raise InputError("T must be >= 1")
    if kind == "autologistic":
        y = simulate_autologistic(T, seed).astype(float)[:, None]
        header = ["series0"]
    else:
        blocks = tuple(MixtureParam(tau, 1.0, tau, 1.0, 1.0)
                       for _ in range(n_paircopulas(r, p)))
        spec = DvineSpec(r, p, blocks)
        tokens = list(margin_tokens) or ["uniform"]
        if len(tokens) == 1 and r > 1:
            tokens = tokens * r
        if len(tokens) != r:
            raise InputError(f"need 1 or {r} --margin values, got {len(tokens)}")
        u = simulate(spec, T, 1, seed)[0].reshape(T, r)
        y = np.empty((T, r))
        for l, token in enumerate(tokens):
            margin = _margin_for_token(token)
            y[:, l] = u[:, l] if margin is None else margin.quantile(u[:, l])
        header = [f"series{l}" for l in range(r)]
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in y:
            w.writerow([repr(float(v)) for v in row])
    click.echo(f"wrote {out}")


@main.command("summary")
@click.option("--fit", "fit_path", required=True, help="Fit or chain JSON.")
@click.option("--out", required=True, help="Summary CSV path.")
@click.option("--json", "json_path", default=None,
              help="Also write the summary as JSON.")
@click.option("--seed", type=int, default=0, show_default=True)
@_cli_errors
def cmd_summary(fit_path, out, json_path, seed):
    """Posterior mean/SD/quantiles of every pair-copula parameter."""
    source = load_source(fit_path)
    summary = posterior_summaries(source, seed=seed)
    write_summary_csv(out, summary)
    if json_path:
        _write_json(json_path, summary)
    click.echo(f"wrote {out}")


def _gamma_mean_of(path):
    obj = _load_raw(path)
    if obj.get("kind") == "vb_fit_file":
        return np.asarray(obj["outputs"]["gamma_mean"], dtype=float), obj
    if obj.get("kind") == "mcmc_fit_file":
        chain = _chain_from_file(path, obj)
        return chain.draws_constrained().mean(axis=0), obj
    raise InputError(f"{path}: unknown result kind")


@main.command("plotdata")
@click.option("--fit", "fit_paths", multiple=True, required=True,
              help="Fit or chain JSON (repeat for several).")
@click.option("--chain", "chain_path", default=None,
              help="Chain JSON for the moment-comparison scatter.")
@click.option("--outdir", required=True)
@_cli_errors
def cmd_plotdata(fit_paths, chain_path, outdir):
    """Tidy CSVs behind the standard diagnostics plots."""
    os.makedirs(outdir, exist_ok=True)
    lb_rows, lbk_rows, grid_rows = [], [], []
    first_vb = None
    for path in fit_paths:
        name = os.path.basename(path)
        gamma_mean, obj = _gamma_mean_of(path)
        if obj.get("kind") == "vb_fit_file":
            trace = obj["fit"]["lb_trace"]
            for s, v in enumerate(trace, start=1):
                lb_rows.append([name, s, repr(float(v))])
            tail = np.asarray(trace[-min(100, len(trace)):], dtype=float)
            lbk_rows.append([name, obj["fit"]["config"]["K"],
                             repr(float(tail.mean()))])
            if first_vb is None:
                first_vb = path
        labels = obj.get("block_labels") or [
            f"block{b}" for b in range(gamma_mean.shape[0])
        ]
        centers = (np.arange(GRID_SIDE) + 0.5) / GRID_SIDE
        uu, vv = np.meshgrid(centers, centers, indexing="ij")
        for b, label in enumerate(labels):
            lp = mix_logpdf(uu.ravel(), vv.ravel(), gamma_mean[b])
            for ui, vi, li in zip(uu.ravel(), vv.ravel(), lp):
                grid_rows.append([name, label, repr(float(ui)),
                                  repr(float(vi)), repr(float(li))])

    def dump(fname, header, rows):
        with open(os.path.join(outdir, fname), "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    dump("lb_vs_step.csv", ["file", "step", "lb"], lb_rows)
    dump("lb_vs_k.csv", ["file", "K", "lb_final"], lbk_rows)
    dump("pc_grids.csv", ["file", "block", "u", "v", "logpdf"], grid_rows)
    wrote = ["lb_vs_step.csv", "lb_vs_k.csv", "pc_grids.csv"]
    if chain_path is not None:
        if first_vb is None:
            raise InputError("--chain needs at least one variational --fit")
        vb = posterior_summaries(load_source(first_vb))
        mc = posterior_summaries(load_source(chain_path))
        rows = []
        for bi, label in enumerate(vb["labels"]):
            for pi, pname in enumerate(PARAM_NAMES):
                rows.append([
                    label, pname,
                    repr(vb["mean"][bi][pi]), repr(vb["sd"][bi][pi]),
                    repr(mc["mean"][bi][pi]), repr(mc["sd"][bi][pi]),
                ])
        dump("vb_vs_mcmc.csv",
             ["block", "param", "vb_mean", "vb_sd", "mcmc_mean", "mcmc_sd"],
             rows)
        wrote.append("vb_vs_mcmc.csv")
    click.echo("wrote " + ", ".join(os.path.join(outdir, w) for w in wrote))


if __name__ == "__main__":
    main()
