"""Bivariate pair-copula kernels.

The single family is a five-parameter mixture of rotated Gumbel copulas,

    c(u, v) = w * c_cg(u, v; tau_a, delta_a) + (1-w) * c_cg(1-u, v; tau_b, delta_b),

where c_cg is the convex Gumbel

    c_cg(u, v; tau, delta) = delta * c_g(u, v; tau) + (1-delta) * c_g(1-u, 1-v; tau)

and c_g is the Gumbel copula density parameterized by Kendall's tau through
theta = 1/(1-tau).  The reflection of the first argument in the second
mixture component spreads mass over all four corners of the unit square.

Everything is computed in log space and vectorized: all inputs broadcast, so
the same kernels serve scalar calls, sample batches, and per-sample parameter
batches.  tau = 0 collapses to the independence copula exactly (log-density
identically 0.0), which downstream code relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import EPS_U
from .errors import InputError, NumericalFailure

TAU_MAX = 0.99
_BOUNDARY_CLAMP = 1e-8
PARAM_NAMES = ("tau_a", "delta_a", "tau_b", "delta_b", "w")


def _clamp_u(u):
    return np.clip(np.asarray(u, dtype=float), EPS_U, 1.0 - EPS_U)


@dataclass(frozen=True, eq=False)
class GumbelParam:
    """Gumbel copula in Kendall-tau parameterization, tau in [0, 0.99)."""

    tau: object

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        if np.any(tau < 0.0) or np.any(tau > TAU_MAX):
            raise InputError(f"tau must lie in [0, {TAU_MAX}]")
        object.__setattr__(self, "tau", tau if tau.ndim else float(tau))

    @property
    def theta(self):
        return 1.0 / (1.0 - np.asarray(self.tau, dtype=float))


@dataclass(frozen=True, eq=False)
class ConvexGumbelParam:
    """Convex combination of a Gumbel copula and its 180-degree rotation."""

    tau: object
    delta: object

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        delta = np.asarray(self.delta, dtype=float)
        if np.any(tau < 0.0) or np.any(tau > TAU_MAX):
            raise InputError(f"tau must lie in [0, {TAU_MAX}]")
        if np.any(delta < 0.0) or np.any(delta > 1.0):
            raise InputError("delta must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class MixtureParam:
    """Five-parameter mixture of two convex Gumbels.

    Component a applies to (u, v); component b applies to (1-u, v).  Fields
    may be scalars or broadcastable arrays (one parameter set per sample).
    """

    tau_a: object
    delta_a: object
    tau_b: object
    delta_b: object
    w: object

    def __post_init__(self):
        for name in ("tau_a", "tau_b"):
            x = np.asarray(getattr(self, name), dtype=float)
            if np.any(x < 0.0) or np.any(x > TAU_MAX):
                raise InputError(f"{name} must lie in [0, {TAU_MAX}]")
        for name in ("delta_a", "delta_b", "w"):
            x = np.asarray(getattr(self, name), dtype=float)
            if np.any(x < 0.0) or np.any(x > 1.0):
                raise InputError(f"{name} must lie in [0, 1]")

    def as_array(self):
        """Stack the five parameters along a trailing axis."""
        return np.stack(
            np.broadcast_arrays(
                *(np.asarray(getattr(self, n), dtype=float) for n in PARAM_NAMES)
            ),
            axis=-1,
        )

    def as_tuple(self):
        return tuple(float(getattr(self, n)) for n in PARAM_NAMES)

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float)
        if arr.shape[-1] != 5:
            raise InputError("parameter array must have a trailing axis of 5")
        return cls(*(arr[..., i] for i in range(5)))

    @classmethod
    def independence(cls):
        return cls(0.0, 1.0, 0.0, 1.0, 1.0)


def _as_theta(p):
    if isinstance(p, GumbelParam):
        tau = np.asarray(p.tau, dtype=float)
    else:
        tau = np.asarray(p, dtype=float)
    return 1.0 / (1.0 - tau)


# ---------------------------------------------------------------------------
# Gumbel kernels.  theta == 1 is independence and must short-circuit exactly.
# ---------------------------------------------------------------------------


def _gum_parts(u, v, theta_safe):
    xt = -np.log(u)
    yt = -np.log(v)
    lxt = np.log(xt)
    lyt = np.log(yt)
    log_s = np.logaddexp(theta_safe * lxt, theta_safe * lyt)
    s1t = np.exp(log_s / theta_safe)
    return xt, yt, lxt, lyt, log_s, s1t


def gumbel_cdf(u, v, p):
    """Gumbel copula CDF C(u, v) = exp(-((-ln u)^theta + (-ln v)^theta)^(1/theta))."""
    theta = _as_theta(p)
    u = _clamp_u(u)
    v = _clamp_u(v)
    indep = theta == 1.0
    theta_safe = np.where(indep, 2.0, theta)
    _, _, _, _, _, s1t = _gum_parts(u, v, theta_safe)
    return np.where(indep, u * v, np.exp(-s1t))


def gumbel_logpdf(u, v, p):
    """Log density of the Gumbel copula; exactly 0.0 at tau = 0."""
    theta = _as_theta(p)
    u = _clamp_u(u)
    v = _clamp_u(v)
    indep = theta == 1.0
    theta_safe = np.where(indep, 2.0, theta)
    xt, yt, lxt, lyt, log_s, s1t = _gum_parts(u, v, theta_safe)
    logc = (
        -s1t
        + (theta_safe - 1.0) * (lxt + lyt)
        + (xt + yt)
        + (1.0 / theta_safe - 2.0) * log_s
        + np.log(s1t + theta_safe - 1.0)
    )
    return np.where(indep, 0.0, logc)


def _gumbel_h1(u, v, theta):
    """dC/du for the Gumbel copula: conditional CDF of V given U = u."""
    indep = theta == 1.0
    theta_safe = np.where(indep, 2.0, theta)
    xt, _, lxt, _, log_s, s1t = _gum_parts(u, v, theta_safe)
    logh = -s1t + (1.0 / theta_safe - 1.0) * log_s + (theta_safe - 1.0) * lxt + xt
    return np.where(indep, v, np.clip(np.exp(logh), 0.0, 1.0))


# ---------------------------------------------------------------------------
# Convex Gumbel: delta * c_g(u,v) + (1-delta) * c_g(1-u,1-v)
# ---------------------------------------------------------------------------


def _wsum_logs(la, lb, wa, wb):
    """log(wa*exp(la) + wb*exp(lb)) with wa + wb = 1; exact 0.0 at la=lb=0.

    When one weight is exactly zero and the other component underflows, the
    sum is exactly zero and the correct log-density is -inf; silence numpy's
    divide-by-zero warning for that legitimate case.
    """
    m = np.maximum(la, lb)
    with np.errstate(divide="ignore"):
        return m + np.log(wa * np.exp(la - m) + wb * np.exp(lb - m))


def _cg_logpdf(u, v, tau, delta):
    la = gumbel_logpdf(u, v, tau)
    lb = gumbel_logpdf(1.0 - u, 1.0 - v, tau)
    return _wsum_logs(la, lb, delta, 1.0 - delta)


def _cg_cdf(u, v, tau, delta):
    return delta * gumbel_cdf(u, v, tau) + (1.0 - delta) * (
        u + v - 1.0 + gumbel_cdf(1.0 - u, 1.0 - v, tau)
    )


def _cg_h1(u, v, tau, delta):
    """dC_cg/du."""
    theta = _as_theta(tau)
    return delta * _gumbel_h1(u, v, theta) + (1.0 - delta) * (
        1.0 - _gumbel_h1(1.0 - u, 1.0 - v, theta)
    )


def _cg_h2(u, v, tau, delta):
    """dC_cg/dv; the Gumbel is exchangeable so this is h1 with swapped slots."""
    return _cg_h1(v, u, tau, delta)


# ---------------------------------------------------------------------------
# Five-parameter mixture
# ---------------------------------------------------------------------------


def _g_all(xt, lxt, yt, lyt, theta_safe, indep, x_val, y_val):
    """Gumbel log density and both partial derivatives from shared pieces.

    xt, yt are -log of the two arguments and lxt, lyt their logs; x_val and
    y_val are the raw arguments, substituted at exact independence.
    """
    log_s = np.logaddexp(theta_safe * lxt, theta_safe * lyt)
    s1t = np.exp(log_s / theta_safe)
    logc = (
        -s1t
        + (theta_safe - 1.0) * (lxt + lyt)
        + (xt + yt)
        + (1.0 / theta_safe - 2.0) * log_s
        + np.log(s1t + theta_safe - 1.0)
    )
    core = -s1t + (1.0 / theta_safe - 1.0) * log_s
    h1 = np.minimum(np.exp(core + (theta_safe - 1.0) * lxt + xt), 1.0)
    h2 = np.minimum(np.exp(core + (theta_safe - 1.0) * lyt + yt), 1.0)
    return (
        np.where(indep, 0.0, logc),
        np.where(indep, y_val, h1),
        np.where(indep, x_val, h2),
    )


def mix_edge(u, v, p):
    """Fused (log density, dC/du, dC/dv) of the mixture at one edge.

    Agrees with mix_logpdf / hfunc(..., "first") / hfunc(..., "second") but
    shares the log computations across all three outputs, so the vine
    recursion makes one kernel call per edge instead of three.
    """
    ta, da, tb, db, w = _mix_fields(p)
    u = _clamp_u(u)
    v = _clamp_u(v)
    ru = 1.0 - u
    rv = 1.0 - v
    lu, lru, lv, lrv = -np.log(u), -np.log(ru), -np.log(v), -np.log(rv)
    llu, llru, llv, llrv = np.log(lu), np.log(lru), np.log(lv), np.log(lrv)

    tha = 1.0 / (1.0 - ta)
    thb = 1.0 / (1.0 - tb)
    ia = tha == 1.0
    ib = thb == 1.0
    tsa = np.where(ia, 2.0, tha)
    tsb = np.where(ib, 2.0, thb)

    lc1, h11, h21 = _g_all(lu, llu, lv, llv, tsa, ia, u, v)
    lc2, h12, h22 = _g_all(lru, llru, lrv, llrv, tsa, ia, ru, rv)
    la = _wsum_logs(lc1, lc2, da, 1.0 - da)
    h1a = da * h11 + (1.0 - da) * (1.0 - h12)
    h2a = da * h21 + (1.0 - da) * (1.0 - h22)

    lc3, h13, h23 = _g_all(lru, llru, lv, llv, tsb, ib, ru, v)
    lc4, h14, h24 = _g_all(lu, llu, lrv, llrv, tsb, ib, u, rv)
    lb = _wsum_logs(lc3, lc4, db, 1.0 - db)
    h1b = db * h13 + (1.0 - db) * (1.0 - h14)
    h2b = db * h23 + (1.0 - db) * (1.0 - h24)

    wm = 1.0 - w
    logpdf = _wsum_logs(la, lb, w, wm)
    h_first = np.clip(w * h1a + wm * h1b, 0.0, 1.0)
    h_second = np.clip(w * h2a + wm * (1.0 - h2b), 0.0, 1.0)
    return logpdf, h_first, h_second


def _mix_fields(p):
    if isinstance(p, MixtureParam):
        return (
            np.asarray(p.tau_a, dtype=float),
            np.asarray(p.delta_a, dtype=float),
            np.asarray(p.tau_b, dtype=float),
            np.asarray(p.delta_b, dtype=float),
            np.asarray(p.w, dtype=float),
        )
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1] != 5:
        raise InputError("mixture parameters must be MixtureParam or (..., 5) array")
    return tuple(arr[..., i] for i in range(5))


def mix_logpdf(u, v, p):
    """Log density of the rotated-Gumbel mixture; exactly 0.0 at full independence."""
    ta, da, tb, db, w = _mix_fields(p)
    u = _clamp_u(u)
    v = _clamp_u(v)
    la = _cg_logpdf(u, v, ta, da)
    lb = _cg_logpdf(1.0 - u, v, tb, db)
    return _wsum_logs(la, lb, w, 1.0 - w)


def mix_cdf(u, v, p):
    """Mixture CDF; the reflected component contributes v - C_b(1-u, v)."""
    ta, da, tb, db, w = _mix_fields(p)
    u = _clamp_u(u)
    v = _clamp_u(v)
    out = w * _cg_cdf(u, v, ta, da) + (1.0 - w) * (v - _cg_cdf(1.0 - u, v, tb, db))
    return np.clip(out, 0.0, 1.0)


def hfunc(u, v, p, direction):
    """Directional conditional CDF of the mixture.

    direction="first" returns dC/du, the conditional CDF of V given U = u;
    direction="second" returns dC/dv, the conditional CDF of U given V = v.
    """
    ta, da, tb, db, w = _mix_fields(p)
    u = _clamp_u(u)
    v = _clamp_u(v)
    if direction == "first":
        out = w * _cg_h1(u, v, ta, da) + (1.0 - w) * _cg_h1(1.0 - u, v, tb, db)
    elif direction == "second":
        out = w * _cg_h2(u, v, ta, da) + (1.0 - w) * (
            1.0 - _cg_h2(1.0 - u, v, tb, db)
        )
    else:
        raise InputError(f"direction must be 'first' or 'second', got {direction!r}")
    return np.clip(out, 0.0, 1.0)


def hfunc_inv(q, v, p, direction, tol=1e-10, max_iter=200):
    """Invert hfunc in its free argument, holding the conditioning value fixed.

    direction="first": v is the conditioning value in the first slot; returns
    y with hfunc(v, y, p, "first") = q.  direction="second": v conditions the
    second slot; returns x with hfunc(x, v, p, "second") = q.  Newton steps
    (the derivative is the mixture density) safeguarded by bisection;
    converged elements drop out of the iteration, so large batches pay only
    for their stragglers.
    """
    if direction not in ("first", "second"):
        raise InputError(f"direction must be 'first' or 'second', got {direction!r}")
    q = _clamp_u(q)
    cond = _clamp_u(v)
    fields = _mix_fields(p)
    scalar = q.ndim == 0 and cond.ndim == 0 and all(np.ndim(f) == 0 for f in fields)

    shape = np.broadcast_shapes(q.shape, cond.shape, *(np.shape(f) for f in fields))
    q_f = np.broadcast_to(q, shape).ravel()
    cond_f = np.broadcast_to(cond, shape).ravel()
    p_f = np.stack(
        [np.broadcast_to(f, shape).ravel().astype(float) for f in fields], axis=-1
    )
    lo = np.full(q_f.size, EPS_U)
    hi = np.full(q_f.size, 1.0 - EPS_U)
    x = np.clip(q_f.astype(float).copy(), EPS_U, 1.0 - EPS_U)
    f_prev = np.full(q_f.size, np.inf)
    active = np.arange(q_f.size)

    def _resid(xa, idx):
        ca, pa = cond_f[idx], p_f[idx]
        if direction == "first":
            return hfunc(ca, xa, pa, "first") - q_f[idx], np.exp(
                mix_logpdf(ca, xa, pa)
            )
        return hfunc(xa, ca, pa, "second") - q_f[idx], np.exp(
            mix_logpdf(xa, ca, pa)
        )

    # converged on value, or bracket pinned below u-space resolution (the
    # h-function can be too steep for the value tolerance to be reachable);
    # bisection is forced whenever Newton fails to shrink |f|, since it can
    # oscillate across a density valley without tightening the bracket
    for _ in range(max_iter):
        xa = x[active]
        f, d = _resid(xa, active)
        la, ha = lo[active], hi[active]
        la = np.where(f < 0.0, xa, la)
        ha = np.where(f > 0.0, xa, ha)
        lo[active], hi[active] = la, ha
        done = (np.abs(f) <= tol) | (ha - la < 1e-14)
        force = np.abs(f) > 0.7 * f_prev[active]
        f_prev[active] = np.abs(f)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_new = xa - f / d
        bad = force | ~np.isfinite(x_new) | (x_new <= la) | (x_new >= ha)
        x[active] = np.where(done, xa, np.where(bad, 0.5 * (la + ha), x_new))
        active = active[~done]
        if active.size == 0:
            break
    else:
        f, _ = _resid(x[active], active)
        unresolved = (np.abs(f) > tol) & (hi[active] - lo[active] >= 1e-14)
        if np.any(unresolved):
            idx = int(active[np.argmax(np.where(unresolved, np.abs(f), -np.inf))])
            raise NumericalFailure(
                "hfunc_inv did not converge",
                q=float(q_f[idx]),
                v=float(cond_f[idx]),
                params=[float(c) for c in p_f[idx]],
                direction=direction,
            )
    x = np.clip(x.reshape(shape), EPS_U, 1.0 - EPS_U)
    return float(x) if scalar else x


# ---------------------------------------------------------------------------
# Logit transform between the constrained box and psi-space
# ---------------------------------------------------------------------------


def _logit(x):
    x = np.clip(x, _BOUNDARY_CLAMP, 1.0 - _BOUNDARY_CLAMP)
    return np.log(x) - np.log1p(-x)


def transform(p):
    """Map constrained parameters to the unconstrained psi vector.

    Order (tau_a, delta_a, tau_b, delta_b, w); tau components are scaled by
    1/0.99 first so psi covers tau in (0, 0.99).
    """
    ta, da, tb, db, w = _mix_fields(p)
    return np.stack(
        np.broadcast_arrays(
            _logit(ta / TAU_MAX),
            _logit(da),
            _logit(tb / TAU_MAX),
            _logit(db),
            _logit(w),
        ),
        axis=-1,
    )


def inverse_transform(psi):
    """Map psi back into the constrained box; always lands strictly inside."""
    psi = np.asarray(psi, dtype=float)
    if psi.shape[-1] != 5:
        raise InputError("psi must have a trailing axis of 5")
    s = expit(psi)
    return MixtureParam(
        TAU_MAX * s[..., 0], s[..., 1], TAU_MAX * s[..., 2], s[..., 3], s[..., 4]
    )


def log_prior_psi(psi):
    """Log prior density over psi implied by uniform priors on the box.

    Each component contributes the standard-logistic log-density
    psi - 2*log(1+exp(psi)); constants from the 0.99 tau-scaling cancel
    against the uniform density and are dropped.  Sums over the trailing axis.
    """
    psi = np.asarray(psi, dtype=float)
    terms = psi - 2.0 * np.logaddexp(0.0, psi)
    return terms.sum(axis=-1)
