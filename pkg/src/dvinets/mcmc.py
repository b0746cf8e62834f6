"""Exact-baseline MCMC for the latent-PIT vine model by data augmentation.

Each sweep alternates two Metropolis-Hastings moves:

1. A joint proposal of the whole latent PIT vector u.  Positions are drawn
   sequentially from the conditional density restricted to the cell box,
   u_i = F^{-1}(F(a_i|hist) + (F(b_i|hist) - F(a_i|hist)) * w), so the
   proposal factorizes exactly like the vine density and the acceptance
   ratio collapses to the ratio of conditional box masses,

       sum_{i>=1} [ log dF_i(new) - log dF_i(old) ],

   the i = 0 factor (b_0 - a_0) cancelling.  Continuous cells keep their
   fixed PIT value and contribute conditional log-density terms instead.
2. A Gaussian random-walk update of each five-parameter pair-copula block in
   psi-space, scale-adapted toward 0.234 acceptance during burnin only
   (diminishing adaptation, step size sweep^-0.6) and frozen afterwards.

The chain is strictly sequential, so kernels run on plain floats
(_scalar.py); parallelism never enters a single chain, which makes draw
files byte-identical for any worker-thread setting.  A collapsing u-move
(acceptance < 0.1% over a 1000-sweep window) sets a stuck flag -- a warning
status, not an abort.
"""

from __future__ import annotations

import csv
import json
import math
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import EPS_U, __version__
from ._rng import stream
from ._scalar import mix_h1_s, mix_h2_s, mix_hinv1_s, mix_logpdf_s
from .dvine import DvineSpec, _edge_table, boxes_for_data, lattice_logdensity
from .errors import InputError, NumericalFailure
from .margins import DISCRETE, normalize_kinds
from .paircopula import PARAM_NAMES, inverse_transform, log_prior_psi, transform

STUCK_WINDOW = 1000
STUCK_RATE = 0.001
ZERO_WIDTH = 1e-14
ADAPT_TARGET = 0.234
ADAPT_DECAY = 0.6
_SCALE_MIN = 1e-5
_SCALE_MAX = 10.0
_LO = EPS_U
_HI = 1.0 - EPS_U


def _c(x):
    return _LO if x < _LO else (_HI if x > _HI else x)


@dataclass
class McmcConfig:
    """Sampler settings: sweep counts, per-block proposal scales, seed.

    rw_scales may be a scalar (shared initial scale) or one value per
    pair-copula block; free_mask optionally freezes psi coordinates (False
    entries stay at their initial values), which supports low-dimensional
    validation runs against grid posteriors.
    """

    burnin: int = 10000
    iterates: int = 20000
    rw_scales: object = 0.2
    seed: int = 0
    free_mask: object = None

    def __post_init__(self):
        if int(self.burnin) < 1 or int(self.iterates) < 1:
            raise InputError("burnin and iterates must be >= 1")
        scales = np.atleast_1d(np.asarray(self.rw_scales, dtype=float))
        if np.any(scales <= 0.0):
            raise InputError("rw_scales must be positive")
        self.burnin = int(self.burnin)
        self.iterates = int(self.iterates)


@dataclass
class ChainState:
    """Current chain position plus monotone acceptance counters."""

    theta_psi: np.ndarray
    u: np.ndarray
    acc_u: int = 0
    acc_theta: np.ndarray = field(default=None)

    def __post_init__(self):
        self.theta_psi = np.asarray(self.theta_psi, dtype=float)
        if self.theta_psi.ndim != 2 or self.theta_psi.shape[1] != 5:
            raise InputError("theta_psi must have shape (n_blocks, 5)")
        self.u = np.asarray(self.u, dtype=float)
        if self.acc_theta is None:
            self.acc_theta = np.zeros(self.theta_psi.shape[0], dtype=np.int64)


class _ZeroWidthError(Exception):
    """A proposed conditional box collapsed below ZERO_WIDTH."""


def _u_pass(u_old, a, b, disc, params_t, table, r, m, rng):
    """One sequential pass over flat positions of the u-proposal kernel.

    With rng given, draws a fresh latent vector inside the boxes and returns
    (u_new, log_terms); with rng None, evaluates the stored u_old and returns
    (u_old, log_terms).  log_terms sums, over positions i >= 1, the log
    conditional box mass for discrete cells and the conditional log density
    for continuous cells.
    """
    n = a.size
    draw = rng is not None
    u_out = u_old if not draw else np.empty(n)
    log_terms = 0.0
    back = []
    for i in range(n):
        series = i % r
        depth = min(i, m)
        pidx_row = table[series]
        if disc[i]:
            # conditional CDF chain for both box ends
            fa = _c(a[i])
            fb = _c(b[i])
            for ell in range(1, depth + 1):
                pidx = pidx_row[ell]
                if pidx < 0:
                    continue
                x = back[ell - 1]
                pm = params_t[pidx]
                fa = _c(mix_h1_s(x, fa, pm))
                fb = _c(mix_h1_s(x, fb, pm))
            width = fb - fa
            if draw:
                if width < ZERO_WIDTH:
                    raise _ZeroWidthError
                q = fa + width * rng.uniform()
                # invert the chain, keeping the per-level forward values
                fwd = [0.0] * (depth + 1)
                val = _c(q)
                fwd[depth] = val
                for ell in range(depth, 0, -1):
                    pidx = pidx_row[ell]
                    if pidx >= 0:
                        val = mix_hinv1_s(val, back[ell - 1], params_t[pidx])
                    val = _c(val)
                    fwd[ell - 1] = val
                u_i = min(max(val, a[i]), b[i])
                u_out[i] = u_i
            else:
                u_i = u_old[i]
                fwd = [0.0] * (depth + 1)
                val = _c(u_i)
                fwd[0] = val
                for ell in range(1, depth + 1):
                    pidx = pidx_row[ell]
                    if pidx >= 0:
                        val = _c(mix_h1_s(back[ell - 1], val, params_t[pidx]))
                    fwd[ell] = val
            if i >= 1:
                log_terms += math.log(width) if width > 1e-300 else math.log(1e-300)
        else:
            # continuous cell: latent fixed at its PIT, contributes density
            u_i = u_old[i] if not draw else a[i]
            if draw:
                u_out[i] = u_i
            fwd = [0.0] * (depth + 1)
            val = _c(u_i)
            fwd[0] = val
            for ell in range(1, depth + 1):
                pidx = pidx_row[ell]
                if pidx >= 0:
                    pm = params_t[pidx]
                    log_terms += mix_logpdf_s(back[ell - 1], val, pm)
                    val = _c(mix_h1_s(back[ell - 1], val, pm))
                fwd[ell] = val
        # backward buffer update for the next position
        new_back = [_c(u_i)]
        for ell in range(1, depth + 1):
            x = back[ell - 1]
            pidx = pidx_row[ell]
            if pidx < 0:
                new_back.append(x)
            else:
                new_back.append(_c(mix_h2_s(x, fwd[ell - 1], params_t[pidx])))
        back = new_back[:m]
    return u_out, log_terms


def _params_tuples(theta_psi):
    arr = inverse_transform(theta_psi).as_array()
    return [tuple(float(v) for v in row) for row in np.atleast_2d(arr)]


def propose_u(state, boxes, spec, rng):
    """Joint sequential inverse-CDF proposal of the latent vector.

    boxes is (a, b, is_discrete) as flat arrays (see boxes_for_data).
    Returns (u_new, log_weight_ratio); a proposal whose conditional box
    collapses below ZERO_WIDTH is retried once with fresh randomness, and a
    second failure returns (None, -inf), which the caller treats as a
    rejection.
    """
    a, b, disc = boxes
    r, p = spec.r, spec.p
    table = _edge_table(r, p)
    m = r * (p + 1) - 1
    params_t = _params_tuples(state.theta_psi)
    _, terms_old = _u_pass(state.u, a, b, disc, params_t, table, r, m, None)
    for _ in range(2):
        try:
            u_new, terms_new = _u_pass(None, a, b, disc, params_t, table, r, m, rng)
        except _ZeroWidthError:
            continue
        return u_new, terms_new - terms_old
    return None, -math.inf


def accept_u(log_weight_ratio, rng):
    """Accept with probability min(1, exp(log_weight_ratio))."""
    if log_weight_ratio >= 0.0:
        return True
    if log_weight_ratio == -math.inf:
        return False
    return rng.uniform() < math.exp(log_weight_ratio)


def _log_target(theta_psi, u, r, p):
    params = inverse_transform(theta_psi).as_array()
    return float(lattice_logdensity(u, params, r, p)) + float(
        log_prior_psi(theta_psi).sum()
    )


def rw_mh_theta(state, spec, rng, scales, free_mask=None):
    """One Gaussian random-walk sweep over the pair-copula blocks.

    Updates state in place, block by block in canonical order, against the
    target exp(log vine density + log prior) at the current u.  The proposal
    is symmetric, so the Hastings correction is zero in log space.  Returns
    the realized acceptance probabilities per block (used for adaptation).
    """
    r, p = spec.r, spec.p
    n_blocks = state.theta_psi.shape[0]
    alphas = np.zeros(n_blocks)
    cur = _log_target(state.theta_psi, state.u, r, p)
    for j in range(n_blocks):
        noise = rng.standard_normal(5) * scales[j]
        if free_mask is not None:
            noise = noise * free_mask[j]
        if not np.any(noise != 0.0):
            alphas[j] = 1.0
            state.acc_theta[j] += 1
            continue
        prop = state.theta_psi.copy()
        prop[j] = prop[j] + noise
        cand = _log_target(prop, state.u, r, p)
        log_alpha = cand - cur
        alphas[j] = min(1.0, math.exp(min(log_alpha, 0.0)))
        if log_alpha >= 0.0 or rng.uniform() < math.exp(log_alpha):
            state.theta_psi = prop
            state.acc_theta[j] += 1
            cur = cand
    return alphas


@dataclass
class McmcResult:
    """Posterior draws (psi-space, post-burnin) plus chain diagnostics."""

    psi_draws: np.ndarray
    r: int
    p: int
    acc_rate_u: float
    acc_rate_theta: np.ndarray
    stuck: bool
    stuck_sweep: object
    zero_width_failures: int
    rw_scales: np.ndarray
    wall_seconds: float
    config: McmcConfig
    kinds: list
    margins: tuple = ()

    def draws_constrained(self):
        """(iterates, n_blocks, 5) draws mapped to the constrained space."""
        return inverse_transform(self.psi_draws).as_array()

    def diagnostics(self):
        return {
            "version": __version__,
            "kind": "mcmc_diagnostics",
            "r": self.r,
            "p": self.p,
            "burnin": self.config.burnin,
            "iterates": self.config.iterates,
            "seed": int(self.config.seed),
            "acc_rate_u": self.acc_rate_u,
            "acc_rate_theta": [float(x) for x in self.acc_rate_theta],
            "stuck": bool(self.stuck),
            "stuck_sweep": self.stuck_sweep,
            "zero_width_failures": int(self.zero_width_failures),
            "rw_scales": [float(s) for s in self.rw_scales],
            "wall_seconds": self.wall_seconds,
        }


def _block_labels(spec):
    labels = []
    for blk in spec.to_json()["blocks"]:
        labels.append(f"k{blk['k']}.{blk['l1']}.{blk['l2']}")
    return labels


def run_sampler(y, margins, spec_template, config, kinds=None,
                draws_path=None, diagnostics_path=None, progress=None):
    """Run the data-augmentation chain; returns an McmcResult.

    spec_template fixes the vine structure (r, p) and the chain's starting
    parameters.  kinds defaults to all-discrete.  draws_path streams one CSV
    row per post-burnin sweep in the constrained space; diagnostics_path
    writes the JSON sidecar.  A stuck chain (u-acceptance < 0.1% over 1000
    consecutive sweeps) is flagged in the diagnostics, not raised.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    r, p = spec_template.r, spec_template.p
    if y.shape[1] != r:
        raise InputError("data width does not match spec r")
    kinds = normalize_kinds(kinds if kinds is not None else [DISCRETE] * r, r)
    a, b = boxes_for_data(y, margins, kinds)
    disc = np.zeros(a.size, dtype=bool)
    for l in range(r):
        if kinds[l] == DISCRETE:
            disc[l + r * np.arange(y.shape[0])] = True
    if not np.any(disc) and np.any(b - a <= 0.0):
        raise InputError("no latent cells to sample")

    n_blocks = len(spec_template.params)
    scales = np.atleast_1d(np.asarray(config.rw_scales, dtype=float)).copy()
    if scales.size == 1:
        scales = np.full(n_blocks, float(scales[0]))
    if scales.size != n_blocks:
        raise InputError("rw_scales must be scalar or one per pair-copula block")
    free_mask = None
    if config.free_mask is not None:
        free_mask = np.asarray(config.free_mask, dtype=float)
        if free_mask.shape != (n_blocks, 5):
            raise InputError("free_mask must have shape (n_blocks, 5)")

    u0 = np.where(disc, 0.5 * (a + b), a)
    state = ChainState(theta_psi=transform(spec_template.param_array()), u=u0)
    rng = stream(config.seed, 77)
    table = _edge_table(r, p)
    m = r * (p + 1) - 1
    boxes = (a, b, disc)

    total = config.burnin + config.iterates
    psi_draws = np.empty((config.iterates, n_blocks, 5))
    window = deque(maxlen=STUCK_WINDOW)
    window_sum = 0
    stuck = False
    stuck_sweep = None
    zero_width_failures = 0
    labels = _block_labels(spec_template)
    writer = None
    fh = None
    if draws_path is not None:
        fh = open(draws_path, "w", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["sweep"] + [f"{lab}.{nm}" for lab in labels for nm in PARAM_NAMES]
        )
    t0 = time.perf_counter()
    try:
        for sweep in range(1, total + 1):
            params_t = _params_tuples(state.theta_psi)
            _, terms_old = _u_pass(state.u, a, b, disc, params_t, table, r, m, None)
            accepted = 0
            u_new = None
            for _ in range(2):
                try:
                    u_new, terms_new = _u_pass(
                        None, a, b, disc, params_t, table, r, m, rng
                    )
                    break
                except _ZeroWidthError:
                    u_new = None
            if u_new is None:
                zero_width_failures += 1
            elif accept_u(terms_new - terms_old, rng):
                state.u = u_new
                state.acc_u += 1
                accepted = 1
            if not np.all((state.u >= a) & (state.u <= b)):
                raise NumericalFailure("latent vector left its boxes", sweep=sweep)

            if len(window) == STUCK_WINDOW:
                window_sum -= window[0]
            window.append(accepted)
            window_sum += accepted
            if (not stuck and len(window) == STUCK_WINDOW
                    and window_sum < STUCK_RATE * STUCK_WINDOW):
                stuck = True
                stuck_sweep = sweep

            alphas = rw_mh_theta(state, spec_template, rng, scales, free_mask)
            if sweep <= config.burnin:
                step = sweep ** (-ADAPT_DECAY)
                scales = np.clip(
                    scales * np.exp(step * (alphas - ADAPT_TARGET)),
                    _SCALE_MIN, _SCALE_MAX,
                )
            else:
                idx = sweep - config.burnin - 1
                psi_draws[idx] = state.theta_psi
                if writer is not None:
                    row = inverse_transform(state.theta_psi).as_array().ravel()
                    writer.writerow([sweep] + [repr(float(v)) for v in row])
            if progress is not None and sweep % 1000 == 0:
                progress(sweep, total)
    finally:
        if fh is not None:
            fh.close()
    wall = time.perf_counter() - t0

    result = McmcResult(
        psi_draws=psi_draws,
        r=r,
        p=p,
        acc_rate_u=state.acc_u / total,
        acc_rate_theta=state.acc_theta / total,
        stuck=stuck,
        stuck_sweep=stuck_sweep,
        zero_width_failures=zero_width_failures,
        rw_scales=scales,
        wall_seconds=wall,
        config=config,
        kinds=list(kinds),
        margins=tuple(margins),
    )
    if diagnostics_path is not None:
        with open(diagnostics_path, "w") as f:
            json.dump(result.diagnostics(), f, indent=1)
            f.write("\n")
    return result
