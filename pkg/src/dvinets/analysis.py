"""Posterior dependence summaries and predictive simulation.

Spearman correlations between series i at time t and series j at time t-k
are copula functionals, so they are estimated by simulating stationary
windows from the fitted vine, forming the bivariate empirical copula of the
lagged latent pairs, and plugging it into the margin-appropriate formula:

  discrete-discrete:  3 * sum_{y,y'} g_i g_j [Cbar(b,b') + Cbar(b,a') +
                      Cbar(a,b') + Cbar(a,a')] - 3
  continuous pair:    sample rank correlation of the simulated pairs
  mixed:              6 * sum_y g_j [ I(b_y) + I(a_y) ] - 3 with
                      I(s) = int_0^1 Cbar(s, v) dv by Gauss-Legendre

where (a, b) are the margin's CDF bounds per category and g its pmf.  The
posterior over the correlation is induced by repeating the computation over
parameter draws (variational samples or chain draws).

Predictive simulation anchors the conditioning history by sampling the
latent PITs of the last p observations inside their boxes; for a
variational fit the fitted latent family supplies these draws (so the
anchors reflect the approximate posterior of the latents), while chain fits
use box uniforms.  Paths then roll forward through the conditional inverse
CDF and map into data space through the margin quantile functions.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from . import EPS_U, __version__
from ._rng import map_chunks, stream
from .dvine import DvineSpec, boxes_for_data, conditional_cdf_inv, simulate
from .errors import InputError
from .margins import DISCRETE, normalize_kinds, quantile
from .mcmc import McmcResult
from .paircopula import PARAM_NAMES, inverse_transform, transform
from .vbda import FitResult, sample_theta

MAX_CELLS = 10_000
N_QUAD = 256


# ---------------------------------------------------------------------------
# Parameter-draw sources
# ---------------------------------------------------------------------------


def _psi_draws(source, n_param_draws, seed, key):
    """(n_draws, n_pc, 5) psi draws from a VB fit, a chain, or a fixed spec."""
    if isinstance(source, FitResult):
        rng = stream(seed, key)
        psi = sample_theta(source.q_theta, int(n_param_draws), rng)
        return psi.reshape(int(n_param_draws), -1, 5)
    if isinstance(source, McmcResult):
        stored = source.psi_draws
        take = min(int(n_param_draws), stored.shape[0])
        idx = np.linspace(0, stored.shape[0] - 1, take).astype(int)
        return stored[idx]
    if isinstance(source, DvineSpec):
        return transform(source.param_array())[None]
    raise InputError("parameter source must be FitResult, McmcResult, or DvineSpec")


def _spec_of(source):
    if isinstance(source, DvineSpec):
        return source
    if isinstance(source, (FitResult, McmcResult)):
        return DvineSpec.independence(source.r, source.p)
    raise InputError("parameter source must be FitResult, McmcResult, or DvineSpec")


# ---------------------------------------------------------------------------
# Empirical copula machinery
# ---------------------------------------------------------------------------


def _ecop_grid(u1, u2, levels1, levels2):
    """Empirical copula of the pair sample at the grid levels1 x levels2.

    Levels must lie in [0, 1]; returns Cbar with Cbar[m, l] =
    mean(u1 <= levels1[m] and u2 <= levels2[l]).
    """
    e1 = np.unique(np.concatenate(([0.0], np.asarray(levels1, float), [1.0])))
    e2 = np.unique(np.concatenate(([0.0], np.asarray(levels2, float), [1.0])))
    counts, _, _ = np.histogram2d(u1, u2, bins=[e1, e2])
    grid = np.zeros((e1.size, e2.size))
    grid[1:, 1:] = counts.cumsum(axis=0).cumsum(axis=1) / u1.size
    i1 = np.searchsorted(e1, levels1)
    i2 = np.searchsorted(e2, levels2)
    return grid[np.ix_(i1, i2)]


def _levels(margin):
    """Per-category (lower bound a, upper bound b, mass g) of an ordinal margin."""
    b = np.asarray(margin.cdf, dtype=float)
    a = np.concatenate(([0.0], b[:-1]))
    g = np.asarray(margin.pmf, dtype=float)
    return a, b, g


def _coarsen(a, b, g, max_levels):
    """Group consecutive categories into at most max_levels mass bins."""
    cum_before = np.concatenate(([0.0], np.cumsum(g)[:-1]))
    group = np.minimum((cum_before * max_levels).astype(int), max_levels - 1)
    out_a, out_b, out_g = [], [], []
    for gid in np.unique(group):
        mask = group == gid
        out_a.append(a[mask][0])
        out_b.append(b[mask][-1])
        out_g.append(g[mask].sum())
    return np.asarray(out_a), np.asarray(out_b), np.asarray(out_g)


def _lagged_pairs(spec, params, i, j, k, n_sim, seed, key):
    """n_sim latent pairs (series i at time k, series j at time 0).

    Each pair comes from an independent stationary window of length k+1, so
    pairs are i.i.d. draws from the lag-k copula.
    """
    r = spec.r
    t_len = k + 1
    if k == 0 and i == j:
        raise InputError("lag-0 self-correlation is identically 1")
    n = r * t_len
    uniforms = stream(seed, *key).uniform(size=(int(n_sim), n))
    u = simulate(spec, t_len, int(n_sim), seed=0, params=params, uniforms=uniforms)
    return u[:, i + r * k], u[:, j]


# ---------------------------------------------------------------------------
# Spearman estimators
# ---------------------------------------------------------------------------


@dataclass
class SpearmanReport:
    """Posterior summaries of lagged Spearman correlations."""

    entries: list = field(default_factory=list)
    n_sim: int = 0
    n_param_draws: int = 0
    seed: int = 0

    def add(self, i, j, k, rhos):
        rhos = np.asarray(rhos, dtype=float)
        mean = math.fsum(rhos.tolist()) / rhos.size
        entry = {
            "i": int(i),
            "j": int(j),
            "k": int(k),
            "mean": float(mean),
            "q05": float(np.quantile(rhos, 0.05)),
            "q95": float(np.quantile(rhos, 0.95)),
        }
        self.entries.append(entry)
        return entry

    def to_json(self):
        return {
            "version": __version__,
            "kind": "spearman_report",
            "n_sim": int(self.n_sim),
            "n_param_draws": int(self.n_param_draws),
            "seed": int(self.seed),
            "entries": self.entries,
        }

    def write_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["i", "j", "k", "mean", "q05", "q95"])
            for e in self.entries:
                w.writerow([e["i"], e["j"], e["k"],
                            repr(e["mean"]), repr(e["q05"]), repr(e["q95"])])

    def write_json(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json(), f, indent=1)
            f.write("\n")


def _per_draw(psi, spec, worker, threads=1):
    """Evaluate worker(d, params_d) for each parameter draw, in draw order."""
    n_draws = psi.shape[0]
    out = [None] * n_draws

    def run(sl):
        for d in range(sl.start, sl.stop):
            out[d] = worker(d, inverse_transform(psi[d]).as_array())

    map_chunks(run, n_draws, threads, n_chunks=max(threads, 1))
    return out


def spearman_discrete(margin_i, margin_j, source, i, j, k,
                      n_sim=100_000, n_param_draws=200, seed=0,
                      report=None, threads=1):
    """Lagged Spearman correlation between two discrete series.

    source supplies parameter draws (FitResult, McmcResult, or a DvineSpec
    point mass).  Supports larger than MAX_CELLS product are coarsened into
    mass bins with a warning.
    """
    spec = _spec_of(source)
    psi = _psi_draws(source, n_param_draws, seed, 901)
    ai, bi, gi = _levels(margin_i)
    aj, bj, gj = _levels(margin_j)
    if gi.size * gj.size > MAX_CELLS:
        warnings.warn(
            f"support product {gi.size * gj.size} exceeds {MAX_CELLS} cells; "
            "coarsening categories into mass bins"
        )
        side = max(2, int(math.isqrt(MAX_CELLS)))
        if gi.size > side:
            ai, bi, gi = _coarsen(ai, bi, gi, side)
        if gj.size > side:
            aj, bj, gj = _coarsen(aj, bj, gj, side)
    lv_i = np.concatenate([ai, bi])
    lv_j = np.concatenate([aj, bj])
    ni = ai.size

    def worker(d, params):
        u1, u2 = _lagged_pairs(spec, params, i, j, k, n_sim, seed, (911, d))
        grid = _ecop_grid(u1, u2, lv_i, lv_j)
        corners = (grid[ni:, ni:] + grid[ni:, :ni] + grid[:ni, ni:] + grid[:ni, :ni])
        return 3.0 * float(gi @ corners @ gj) - 3.0

    rhos = _per_draw(psi, spec, worker, threads)
    report = report if report is not None else SpearmanReport(
        n_sim=int(n_sim), n_param_draws=psi.shape[0], seed=int(seed))
    return report.add(i, j, k, rhos), report


def spearman_continuous(source, i, j, k, n_sim=100_000, n_param_draws=200,
                        seed=0, report=None, threads=1):
    """Lagged Spearman correlation between two continuous series.

    Estimated as the sample rank correlation of simulated latent pairs
    (ranks are invariant to the strictly increasing margins).
    """
    spec = _spec_of(source)
    psi = _psi_draws(source, n_param_draws, seed, 903)

    def worker(d, params):
        u1, u2 = _lagged_pairs(spec, params, i, j, k, n_sim, seed, (912, d))
        return float(spearmanr(u1, u2).statistic)

    rhos = _per_draw(psi, spec, worker, threads)
    report = report if report is not None else SpearmanReport(
        n_sim=int(n_sim), n_param_draws=psi.shape[0], seed=int(seed))
    return report.add(i, j, k, rhos), report


def spearman_mixed(margin_discrete, source, i, j, k,
                   n_sim=100_000, n_param_draws=200, seed=0,
                   report=None, threads=1, n_quad=N_QUAD, discrete_slot="j"):
    """Lagged Spearman correlation of a mixed discrete/continuous pair.

    discrete_slot names which of the two series is discrete (the one
    margin_discrete describes); the other is continuous.  The integral over
    the continuous grade is evaluated by Gauss-Legendre quadrature of the
    empirical copula, Cbar taken with the discrete slot first.
    """
    if discrete_slot not in ("i", "j"):
        raise InputError("discrete_slot must be 'i' or 'j'")
    spec = _spec_of(source)
    psi = _psi_draws(source, n_param_draws, seed, 905)
    aj, bj, gj = _levels(margin_discrete)
    if gj.size == 1:
        # a single category carries no rank information
        report = report if report is not None else SpearmanReport(
            n_sim=int(n_sim), n_param_draws=psi.shape[0], seed=int(seed))
        return report.add(i, j, k, np.zeros(psi.shape[0])), report
    if gj.size * n_quad > MAX_CELLS:
        warnings.warn(
            f"support x quadrature product {gj.size * n_quad} exceeds "
            f"{MAX_CELLS} cells; coarsening categories into mass bins"
        )
        aj, bj, gj = _coarsen(aj, bj, gj, max(2, MAX_CELLS // n_quad))
    nodes, weights = np.polynomial.legendre.leggauss(int(n_quad))
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    lv_j = np.concatenate([aj, bj])
    nj = aj.size

    def worker(d, params):
        u1, u2 = _lagged_pairs(spec, params, i, j, k, n_sim, seed, (913, d))
        u_disc, u_cont = (u1, u2) if discrete_slot == "i" else (u2, u1)
        grid = _ecop_grid(u_disc, u_cont, lv_j, nodes)
        integrals = grid @ weights
        return 6.0 * float(gj @ (integrals[nj:] + integrals[:nj])) - 3.0

    rhos = _per_draw(psi, spec, worker, threads)
    report = report if report is not None else SpearmanReport(
        n_sim=int(n_sim), n_param_draws=psi.shape[0], seed=int(seed))
    return report.add(i, j, k, rhos), report


# ---------------------------------------------------------------------------
# Prediction
# ---------------------------------------------------------------------------


def _anchor_tail(source, y_tail, margins, kinds, r, p, n_draws, rng):
    """Latent PITs for the last p observations, (n_draws, p*r) flat.

    Variational fits draw the discrete cells from the fitted latent family
    (full-vector sampling, tail coordinates kept, so VA3's chain dependence
    is honored); chain fits and VA1 use box uniforms.  Continuous cells are
    pinned at their PIT values.
    """
    a, b = boxes_for_data(y_tail, margins, kinds)
    disc_flat = np.array([kinds[l] == DISCRETE for l in range(r)] * p)
    n_disc = int(disc_flat.sum())
    u = np.broadcast_to(a, (n_draws, a.size)).copy()
    if n_disc == 0:
        return u
    if (isinstance(source, FitResult) and source.va.variant >= 2
            and source.va.eta.size >= n_disc):
        from scipy.special import ndtr

        z = source.va.sample_z(n_draws, rng=rng)
        z_tail = z[:, z.shape[1] - n_disc:]
        w = np.clip(ndtr(z_tail), EPS_U, 1.0 - EPS_U)
    else:
        w = np.clip(rng.uniform(size=(n_draws, n_disc)), EPS_U, 1.0 - EPS_U)
    cols = np.flatnonzero(disc_flat)
    u[:, cols] = a[cols] + (b[cols] - a[cols]) * w
    return u


def predict(source, y_tail, h, n_draws, seed=0, margins=None, kinds=None):
    """Simulate from the posterior predictive: returns (h, r, n_draws) values.

    y_tail must contain at least the last p observations of the series the
    model was fitted to (extra leading rows are ignored).  Each draw pairs
    one parameter draw with one anchored latent history and rolls the vine
    forward h steps through the conditional inverse CDF, mapping into data
    space through the margin quantile functions.
    """
    if h < 1:
        raise InputError("horizon must be >= 1")
    if isinstance(source, (FitResult, McmcResult)):
        margins = margins if margins is not None else list(source.margins)
        kinds = kinds if kinds is not None else list(source.kinds)
        r, p = source.r, source.p
    elif isinstance(source, DvineSpec):
        if margins is None or kinds is None:
            raise InputError("margins and kinds are required with a DvineSpec source")
        r, p = source.r, source.p
    else:
        raise InputError("source must be FitResult, McmcResult, or DvineSpec")
    kinds = normalize_kinds(kinds, r)
    y_tail = np.asarray(y_tail, dtype=float)
    if y_tail.ndim == 1:
        y_tail = y_tail[:, None]
    if y_tail.shape[1] != r:
        raise InputError("y_tail width does not match the fitted r")
    if y_tail.shape[0] < p:
        raise InputError(f"y_tail must contain at least p={p} rows")
    y_tail = y_tail[-p:]

    rng = stream(seed, 801)
    n_draws = int(n_draws)
    if isinstance(source, DvineSpec):
        params = np.broadcast_to(
            source.param_array(), (n_draws,) + source.param_array().shape
        )
    else:
        psi = _psi_draws(source, n_draws, seed, 802)
        if psi.shape[0] < n_draws:
            reps = -(-n_draws // psi.shape[0])
            psi = np.tile(psi, (reps, 1, 1))[:n_draws]
        params = inverse_transform(psi).as_array()

    spec_struct = _spec_of(source) if not isinstance(source, DvineSpec) else source
    history = _anchor_tail(source, y_tail, margins, kinds, r, p, n_draws, rng)
    m = spec_struct.window
    out = np.empty((h, r, n_draws))
    for s in range(h):
        for l in range(r):
            w = np.clip(rng.uniform(size=n_draws), EPS_U, 1.0 - EPS_U)
            u_next = conditional_cdf_inv(
                w, history[:, -m:], spec_struct, position=l, params=params
            )
            out[s, l] = quantile(margins[l], u_next)
            history = np.concatenate([history, u_next[:, None]], axis=1)[:, -m:]
    return out


def write_predictions_csv(path, values):
    """Long-format CSV of a (h, r, n_draws) predictive array."""
    h, r, n_draws = values.shape
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["step", "series", "draw", "value"])
        for s in range(h):
            for l in range(r):
                for d in range(n_draws):
                    w.writerow([s + 1, l, d, repr(float(values[s, l, d]))])


# ---------------------------------------------------------------------------
# Posterior summaries
# ---------------------------------------------------------------------------


def posterior_summaries(source, n_psi_draws=100_000, seed=0):
    """Constrained-space mean/SD/quantiles per pair-copula parameter.

    Variational fits are summarized through Monte Carlo draws from the fitted
    Gaussian; chains summarize their stored draws.  Returns a dict with one
    row per pair-copula block in canonical order.
    """
    if isinstance(source, FitResult):
        rng = stream(seed, 701)
        psi = sample_theta(source.q_theta, int(n_psi_draws), rng)
        draws = inverse_transform(psi.reshape(psi.shape[0], -1, 5)).as_array()
        labels = _canonical_labels(source.r, source.p)
    elif isinstance(source, McmcResult):
        draws = source.draws_constrained()
        labels = _canonical_labels(source.r, source.p)
    else:
        raise InputError("source must be FitResult or McmcResult")
    q05, q50, q95 = np.quantile(draws, [0.05, 0.5, 0.95], axis=0)
    return {
        "version": __version__,
        "kind": "posterior_summary",
        "labels": labels,
        "param_names": list(PARAM_NAMES),
        "mean": draws.mean(axis=0).tolist(),
        "sd": draws.std(axis=0, ddof=1).tolist(),
        "q05": q05.tolist(),
        "q50": q50.tolist(),
        "q95": q95.tolist(),
        "n_draws": int(draws.shape[0]),
    }


def _canonical_labels(r, p):
    labels = []
    for l1 in range(r):
        for l2 in range(l1):
            labels.append(f"k0.{l1}.{l2}")
    for k in range(1, p + 1):
        for l1 in range(r):
            for l2 in range(r):
                labels.append(f"k{k}.{l1}.{l2}")
    return labels


def write_summary_csv(path, summary):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["block", "param", "mean", "sd", "q05", "q50", "q95"])
        for bi, label in enumerate(summary["labels"]):
            for pi, name in enumerate(summary["param_names"]):
                w.writerow([
                    label, name,
                    repr(summary["mean"][bi][pi]), repr(summary["sd"][bi][pi]),
                    repr(summary["q05"][bi][pi]), repr(summary["q50"][bi][pi]),
                    repr(summary["q95"][bi][pi]),
                ])
