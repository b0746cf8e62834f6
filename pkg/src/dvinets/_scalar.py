"""Scalar pair-copula kernels on plain floats.

The MCMC sweep is inherently sequential in t, so it evaluates copula kernels
one point at a time; math-module scalars run several times faster than numpy
0-d calls there.  These mirror the vectorized kernels in paircopula.py
(cross-checked by tests) and take parameters as the plain 5-tuple
(tau_a, delta_a, tau_b, delta_b, w).
"""

from __future__ import annotations

import math

from . import EPS_U
from .errors import NumericalFailure

_LO = EPS_U
_HI = 1.0 - EPS_U


def _c(u):
    return _LO if u < _LO else (_HI if u > _HI else u)


def _g_logpdf(u, v, theta):
    if theta == 1.0:
        return 0.0
    xt = -math.log(u)
    yt = -math.log(v)
    lxt = math.log(xt)
    lyt = math.log(yt)
    a = theta * lxt
    b = theta * lyt
    m = a if a > b else b
    log_s = m + math.log(math.exp(a - m) + math.exp(b - m))
    s1t = math.exp(log_s / theta)
    return (
        -s1t
        + (theta - 1.0) * (lxt + lyt)
        + (xt + yt)
        + (1.0 / theta - 2.0) * log_s
        + math.log(s1t + theta - 1.0)
    )


def _g_cdf(u, v, theta):
    if theta == 1.0:
        return u * v
    xt = -math.log(u)
    yt = -math.log(v)
    a = theta * math.log(xt)
    b = theta * math.log(yt)
    m = a if a > b else b
    log_s = m + math.log(math.exp(a - m) + math.exp(b - m))
    return math.exp(-math.exp(log_s / theta))


def _g_h1(u, v, theta):
    if theta == 1.0:
        return v
    xt = -math.log(u)
    lxt = math.log(xt)
    a = theta * lxt
    b = theta * math.log(-math.log(v))
    m = a if a > b else b
    log_s = m + math.log(math.exp(a - m) + math.exp(b - m))
    s1t = math.exp(log_s / theta)
    logh = -s1t + (1.0 / theta - 1.0) * log_s + (theta - 1.0) * lxt + xt
    h = math.exp(logh)
    return 0.0 if h < 0.0 else (1.0 if h > 1.0 else h)


def _cg_logpdf(u, v, tau, delta):
    theta = 1.0 / (1.0 - tau)
    la = _g_logpdf(u, v, theta)
    lb = _g_logpdf(1.0 - u, 1.0 - v, theta)
    m = la if la > lb else lb
    return m + math.log(delta * math.exp(la - m) + (1.0 - delta) * math.exp(lb - m))


def _cg_cdf(u, v, tau, delta):
    theta = 1.0 / (1.0 - tau)
    return delta * _g_cdf(u, v, theta) + (1.0 - delta) * (
        u + v - 1.0 + _g_cdf(1.0 - u, 1.0 - v, theta)
    )


def _cg_h1(u, v, tau, delta):
    theta = 1.0 / (1.0 - tau)
    return delta * _g_h1(u, v, theta) + (1.0 - delta) * (
        1.0 - _g_h1(1.0 - u, 1.0 - v, theta)
    )


def _cg_h2(u, v, tau, delta):
    return _cg_h1(v, u, tau, delta)


def mix_logpdf_s(u, v, pm):
    ta, da, tb, db, w = pm
    u = _c(u)
    v = _c(v)
    la = _cg_logpdf(u, v, ta, da)
    lb = _cg_logpdf(1.0 - u, v, tb, db)
    m = la if la > lb else lb
    return m + math.log(w * math.exp(la - m) + (1.0 - w) * math.exp(lb - m))


def mix_cdf_s(u, v, pm):
    ta, da, tb, db, w = pm
    u = _c(u)
    v = _c(v)
    out = w * _cg_cdf(u, v, ta, da) + (1.0 - w) * (v - _cg_cdf(1.0 - u, v, tb, db))
    return 0.0 if out < 0.0 else (1.0 if out > 1.0 else out)


def mix_h1_s(u, v, pm):
    """dC/du: conditional CDF of V given U = u."""
    ta, da, tb, db, w = pm
    u = _c(u)
    v = _c(v)
    out = w * _cg_h1(u, v, ta, da) + (1.0 - w) * _cg_h1(1.0 - u, v, tb, db)
    return 0.0 if out < 0.0 else (1.0 if out > 1.0 else out)


def mix_h2_s(u, v, pm):
    """dC/dv: conditional CDF of U given V = v."""
    ta, da, tb, db, w = pm
    u = _c(u)
    v = _c(v)
    out = w * _cg_h2(u, v, ta, da) + (1.0 - w) * (1.0 - _cg_h2(1.0 - u, v, tb, db))
    return 0.0 if out < 0.0 else (1.0 if out > 1.0 else out)


def mix_hinv1_s(q, u_cond, pm, tol=1e-10, max_iter=200):
    """Solve mix_h1_s(u_cond, y, pm) = q for y: Newton with bisection safeguard.

    Converges on the function value, or on the bisection bracket when the
    h-function is too steep for the value tolerance to be reachable (the
    bracket then pins y to ~1e-14 in u-space, far below any sampling noise).
    """
    q = _c(q)
    u_cond = _c(u_cond)
    lo, hi = _LO, _HI
    y = q
    f_prev = math.inf
    for _ in range(max_iter):
        f = mix_h1_s(u_cond, y, pm) - q
        if -tol <= f <= tol:
            return y
        if f < 0.0:
            lo = y
        else:
            hi = y
        if hi - lo < 1e-14:
            return 0.5 * (lo + hi)
        # force bisection when Newton fails to shrink |f| (it can oscillate
        # across a density valley without ever tightening the bracket)
        force = abs(f) > 0.7 * f_prev
        f_prev = abs(f)
        y_new = 0.5 * (lo + hi)
        if not force:
            dens = math.exp(mix_logpdf_s(u_cond, y, pm))
            if dens > 0.0:
                cand = y - f / dens
                if lo < cand < hi:
                    y_new = cand
        if y_new == y:
            return y
        y = y_new
    raise NumericalFailure(
        "mix_hinv1_s did not converge", q=q, v=u_cond, params=list(pm)
    )
