"""Parsimonious Markov-p D-vine copula over flattened series-within-time order.

A length-T block of r series flattens to N = r*T positions, index
i = l + r*t for series l at time t (0-based).  The D-vine density over the
flattened vector factorizes into pair copulas on edges (i-ell, i); the pair
for an edge depends only on the time gap k and the two series labels, so the
model carries r(r-1)/2 cross parameters (k=0, l2 < l1) plus p*r^2 lagged
parameters (k=1..p).  Edges with k > p are independence and pass through.

Density evaluation sweeps the vine level by level, vectorized across time
positions (see lattice_logdensity).  Sequential operations (conditioning on
a fixed history, path simulation) use a rolling recursion instead: after
absorbing position i-1 it keeps

    back[m] = u_{(i-1-m) | i-1},  m = 0..M-1,

the conditional PITs of recent positions given everything up to i-1, with
window M = r*(p+1) - 1.  Absorbing position i walks tree levels
ell = 1..min(i, M): with x = back[ell-1] and y the running forward value
u_{i|i-ell+1}, the edge advances the forward value via dC/dx and emits the
new backward value via dC/dy.  Everything is vectorized over leading batch
axes of both u and the parameter stack, so one code path serves scalars,
Monte Carlo batches, and per-sample parameters (which also makes the r=1
multivariate path bit-identical to univariate).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import EPS_U
from .errors import InputError, NumericalFailure
from .margins import CONTINUOUS, DISCRETE
from .paircopula import MixtureParam, hfunc, hfunc_inv, mix_edge, mix_logpdf
from ._rng import stream


def n_paircopulas(r, p):
    return r * (r - 1) // 2 + p * r * r


def param_index(k, l2, l1, r, p):
    """Canonical index of the pair-copula block theta^(k)_{l2,l1}; -1 if k > p."""
    if k > p:
        return -1
    if k == 0:
        if not l2 < l1:
            raise InputError("cross-parameter blocks require l2 < l1")
        return l1 * (l1 - 1) // 2 + l2
    return r * (r - 1) // 2 + (k - 1) * r * r + l1 * r + l2


def edge_key(series_idx, ell, r):
    """Time gap k and earlier-series label l2 of the edge ell steps back."""
    l2 = (series_idx - ell) % r
    k = (ell - series_idx + l2) // r
    return k, l2


def _edge_table(r, p):
    """Edge -> parameter index per (target series, tree level); -1 = independence."""
    m = r * (p + 1) - 1
    table = np.full((r, m + 1), -1, dtype=np.int64)
    for a in range(r):
        for ell in range(1, m + 1):
            k, l2 = edge_key(a, ell, r)
            if k <= p:
                table[a, ell] = param_index(k, l2, a, r, p)
    return table


@dataclass(frozen=True, eq=False)
class DvineSpec:
    """Structure plus pair-copula parameters of the Markov-p D-vine.

    ``params`` is a list of MixtureParam in canonical order: the cross block
    k=0 ordered by (l1, l2 < l1), then k = 1..p each ordered by (l1, l2).
    """

    r: int
    p: int
    params: tuple

    def __post_init__(self):
        if self.r < 1 or self.p < 1:
            raise InputError("need r >= 1 and p >= 1")
        params = tuple(self.params)
        expected = n_paircopulas(self.r, self.p)
        if len(params) != expected:
            raise InputError(
                f"expected {expected} pair-copula parameter blocks, got {len(params)}"
            )
        for blk in params:
            if not isinstance(blk, MixtureParam):
                raise InputError("parameter blocks must be MixtureParam")
        object.__setattr__(self, "params", params)

    @property
    def window(self):
        return self.r * (self.p + 1) - 1

    def param_array(self):
        """(n_pc, 5) stacked constrained parameters in canonical order."""
        return np.stack([np.asarray(b.as_array(), dtype=float) for b in self.params])

    @classmethod
    def univariate(cls, p, lag_params):
        return cls(1, p, tuple(lag_params))

    @classmethod
    def independence(cls, r, p):
        n = n_paircopulas(r, p)
        return cls(r, p, tuple(MixtureParam.independence() for _ in range(n)))

    @classmethod
    def from_param_array(cls, r, p, arr):
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (n_paircopulas(r, p), 5):
            raise InputError("parameter array shape mismatch")
        return cls(r, p, tuple(MixtureParam.from_array(row) for row in arr))

    def to_json(self):
        blocks = []
        i = 0
        for l1 in range(self.r):
            for l2 in range(l1):
                blocks.append({"k": 0, "l1": l1, "l2": l2,
                               "params": list(self.params[i].as_tuple())})
                i += 1
        for k in range(1, self.p + 1):
            for l1 in range(self.r):
                for l2 in range(self.r):
                    blocks.append({"k": k, "l1": l1, "l2": l2,
                                   "params": list(self.params[i].as_tuple())})
                    i += 1
        return {"r": self.r, "p": self.p, "blocks": blocks}

    @classmethod
    def from_json(cls, obj):
        r, p = int(obj["r"]), int(obj["p"])
        blocks = obj["blocks"]
        if len(blocks) != n_paircopulas(r, p):
            raise InputError("wrong number of pair-copula blocks in spec JSON")
        arr = np.full((n_paircopulas(r, p), 5), np.nan)
        for blk in blocks:
            idx = param_index(int(blk["k"]), int(blk["l2"]), int(blk["l1"]), r, p)
            arr[idx] = np.asarray(blk["params"], dtype=float)
        if np.any(~np.isfinite(arr)):
            raise InputError("duplicate or missing pair-copula blocks in spec JSON")
        return cls.from_param_array(r, p, arr)


def _clamp(x):
    return np.clip(x, EPS_U, 1.0 - EPS_U)


def lattice_logdensity(u, params, r, p):
    """Log D-vine copula density, vectorized over leading batch axes.

    u: (..., N) with N = r*T; params: (..., n_pc, 5) constrained, broadcasting
    against u's batch axes.  Returns (...) log density.

    Sweeps the vine tree by tree: at level ell the edge (i, i+ell) pairs
    x = u_{i | i+1..i+ell-1} with y = u_{i+ell | i+1..i+ell-1}, both read off
    the previous level's buffers, so each level is one fused kernel call per
    series-residue class (positions with the same target series share a
    parameter block and form a strided slice).
    """
    u = np.asarray(u, dtype=float)
    params = np.asarray(params, dtype=float)
    n = u.shape[-1]
    if n % r != 0 or n // r < 2:
        raise InputError(f"flat length {n} incompatible with r={r}, T >= 2")
    if not np.all(np.isfinite(u)):
        bad = np.argwhere(~np.isfinite(u))[0]
        raise NumericalFailure("non-finite PIT value", position=bad.tolist())
    table = _edge_table(r, p)
    m = r * (p + 1) - 1
    batch = np.broadcast_shapes(u.shape[:-1], params.shape[:-2])
    total = np.zeros(batch)
    fwd = _clamp(u)
    back = fwd
    max_ell = min(m, n - 1)
    for ell in range(1, max_ell + 1):
        x = back[..., : n - ell]
        y = fwd[..., 1:]
        last = ell == max_ell
        if not last:
            new_fwd = np.empty(batch + (n - ell,))
            new_back = np.empty(batch + (n - ell,))
        for cls in range(r):
            start = (cls - ell) % r
            if start >= n - ell:
                continue
            sl = slice(start, n - ell, r)
            pidx = table[cls, ell]
            if pidx < 0:
                if not last:
                    new_fwd[..., sl] = y[..., sl]
                    new_back[..., sl] = x[..., sl]
                continue
            blk = params[..., pidx, :][..., None, :]
            if last:
                total = total + mix_logpdf(x[..., sl], y[..., sl], blk).sum(axis=-1)
            else:
                lp, h1, h2 = mix_edge(x[..., sl], y[..., sl], blk)
                total = total + lp.sum(axis=-1)
                new_fwd[..., sl] = _clamp(h1)
                new_back[..., sl] = _clamp(h2)
        if not last:
            fwd, back = new_fwd, new_back
    return total if total.ndim else float(total)


def log_density(u, spec):
    """Log density of the D-vine copula at a flat PIT vector (or batch)."""
    return lattice_logdensity(u, spec.param_array(), spec.r, spec.p)


def _absorb_history(history, params, r, p, position):
    """Backward buffers after absorbing the flat history preceding `position`.

    history: (..., n_h) contiguous flat predecessors, most recent last; the
    element at slot m has series label (position - n_h + m) mod r.
    """
    history = np.asarray(history, dtype=float)
    n_h = history.shape[-1]
    table = _edge_table(r, p)
    m = r * (p + 1) - 1
    back = []
    for j in range(n_h):
        a = (position - n_h + j) % r
        fwd = _clamp(history[..., j])
        new_back = [fwd]
        for ell in range(1, min(j, m) + 1):
            x = back[ell - 1]
            pidx = table[a, ell]
            if pidx < 0:
                new_back.append(x)
                continue
            blk = params[..., pidx, :]
            new_fwd = _clamp(hfunc(x, fwd, blk, "first"))
            new_back.append(_clamp(hfunc(x, fwd, blk, "second")))
            fwd = new_fwd
        back = new_back[:m]
    return back


def conditional_cdf(u_t, history, spec, position=0, params=None):
    """F(u_t | history): the h-function composition along the target's edges.

    params optionally overrides the spec's parameters with a batch of shape
    (..., n_pc, 5) broadcasting against the history's leading axes.
    """
    if params is None:
        params = spec.param_array()
    else:
        params = np.asarray(params, dtype=float)
    r, p = spec.r, spec.p
    back = _absorb_history(history, params, r, p, position)
    table = _edge_table(r, p)
    m = r * (p + 1) - 1
    val = _clamp(np.asarray(u_t, dtype=float))
    scalar = val.ndim == 0 and np.asarray(history).ndim <= 1
    for ell in range(1, min(len(back), m) + 1):
        pidx = table[position % r, ell]
        if pidx < 0:
            continue
        val = _clamp(hfunc(back[ell - 1], val, params[..., pidx, :], "first"))
    return float(val) if scalar else val


def conditional_cdf_inv(q, history, spec, position=0, params=None):
    """Inverse of conditional_cdf in u_t: h-inverses applied in reverse order.

    params optionally overrides the spec's parameters as in conditional_cdf.
    """
    if params is None:
        params = spec.param_array()
    else:
        params = np.asarray(params, dtype=float)
    r, p = spec.r, spec.p
    back = _absorb_history(history, params, r, p, position)
    table = _edge_table(r, p)
    m = r * (p + 1) - 1
    val = _clamp(np.asarray(q, dtype=float))
    scalar = val.ndim == 0 and np.asarray(history).ndim <= 1
    for ell in range(min(len(back), m), 0, -1):
        pidx = table[position % r, ell]
        if pidx < 0:
            continue
        val = hfunc_inv(val, back[ell - 1], params[..., pidx, :], "first")
    val = _clamp(val)
    return float(val) if scalar else val


def simulate(spec, T, n_paths, seed, params=None, uniforms=None):
    """Simulate PIT paths: (n_paths, r*T), sequential inverse-CDF generation.

    ``params`` may override the spec's parameters with a batch of shape
    (n_paths, n_pc, 5) (one parameter draw per path).  ``uniforms`` injects
    the driving uniforms (n_paths, r*T) instead of drawing them from seed.
    """
    if T < 1:
        raise InputError("T must be >= 1")
    r, p = spec.r, spec.p
    n = r * T
    if params is None:
        params = spec.param_array()
    else:
        params = np.asarray(params, dtype=float)
    if uniforms is None:
        w = stream(seed).uniform(size=(n_paths, n))
    else:
        w = np.asarray(uniforms, dtype=float)
        if w.shape != (n_paths, n):
            raise InputError("uniforms must have shape (n_paths, r*T)")
    table = _edge_table(r, p)
    m = r * (p + 1) - 1
    out = np.empty((n_paths, n))
    back = []
    for i in range(n):
        a = i % r
        depth = min(i, m)
        # invert the conditional CDF, keeping the forward intermediates
        fwd_vals = [None] * (depth + 1)
        val = _clamp(w[:, i])
        fwd_vals[depth] = val
        for ell in range(depth, 0, -1):
            pidx = table[a, ell]
            if pidx >= 0:
                val = hfunc_inv(val, back[ell - 1], params[..., pidx, :], "first")
            val = _clamp(val)
            fwd_vals[ell - 1] = val
        out[:, i] = val
        # backward update for the next position
        new_back = [fwd_vals[0]]
        for ell in range(1, depth + 1):
            x = back[ell - 1]
            pidx = table[a, ell]
            if pidx < 0:
                new_back.append(x)
            else:
                new_back.append(
                    _clamp(hfunc(x, fwd_vals[ell - 1], params[..., pidx, :], "second"))
                )
        back = new_back[:m]
    return out


def boxes_for_data(y, margins, kinds):
    """Latent bounds (a, b) per flat cell; continuous cells get a == b == PIT."""
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    t_len, r = y.shape
    if len(margins) != r:
        raise InputError("one margin per series required")
    a = np.empty(t_len * r)
    b = np.empty(t_len * r)
    for l, margin in enumerate(margins):
        idx = l + r * np.arange(t_len)
        if kinds[l] == DISCRETE:
            al, bl = margin.bounds_array(y[:, l])
            a[idx], b[idx] = al, bl
        elif kinds[l] == CONTINUOUS:
            pit = np.asarray(margin.cdf_value(y[:, l]))
            a[idx] = pit
            b[idx] = pit
        else:
            raise InputError(f"unknown series kind {kinds[l]!r}")
    return a, b


def discrete_loglik_oracle(y, margins, spec, n_mc, seed):
    """Monte Carlo estimate of the exact discrete likelihood on the PIT box.

    f(y) = E[ c(u) ] * prod(b - a) with u uniform on the box; desk-scale only
    (T*r <= 12).  Returns (estimate, standard error).
    """
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    t_len, r = y.shape
    if r != spec.r:
        raise InputError("data width does not match spec.r")
    if t_len * r > 12:
        raise InputError("discrete_loglik_oracle is desk-scale only (T*r <= 12)")
    kinds = [DISCRETE] * r
    a, b = boxes_for_data(y, margins, kinds)
    vol = float(np.prod(b - a))
    if t_len < 2:
        return vol, 0.0
    params = spec.param_array()
    rng = stream(seed)
    chunk = 1 << 16
    s1 = 0.0
    s2 = 0.0
    left = int(n_mc)
    while left > 0:
        take = min(chunk, left)
        u = a + (b - a) * rng.uniform(size=(take, a.size))
        c = np.exp(lattice_logdensity(u, params, spec.r, spec.p))
        s1 += float(c.sum())
        s2 += float((c * c).sum())
        left -= take
    mean = s1 / n_mc
    var = max(s2 / n_mc - mean * mean, 0.0)
    se = vol * np.sqrt(var / n_mc)
    return vol * mean, se
