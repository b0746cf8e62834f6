"""Bundled data-generating processes for tests, demos and the CLI.

The auto-logistic chain is the binary benchmark: Pr(Y_t = 1 | y_{t-1}) =
sigmoid(-2.197 + 4.394 * y_{t-1}), i.e. 0.100 after a 0, 0.900 after a 1,
with symmetric stationary distribution (1/2, 1/2).  The dvine generator
simulates latent PITs from a given spec and quantizes them through margins.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .errors import InputError
from ._rng import stream
from .dvine import simulate

AUTOLOGISTIC_INTERCEPT = -2.197
AUTOLOGISTIC_SLOPE = 4.394


def autologistic_transition():
    """(Pr(1|0), Pr(1|1)) of the auto-logistic chain."""
    p10 = float(expit(AUTOLOGISTIC_INTERCEPT))
    p11 = float(expit(AUTOLOGISTIC_INTERCEPT + AUTOLOGISTIC_SLOPE))
    return p10, p11


def simulate_autologistic(t_len, seed):
    """Binary series of length t_len; y_0 drawn from the stationary law."""
    if t_len < 1:
        raise InputError("T must be >= 1")
    p10, p11 = autologistic_transition()
    # stationary Pr(Y=1) = p10 / (1 - p11 + p10); symmetric coefficients give 1/2
    pi1 = p10 / (1.0 - p11 + p10)
    gen = stream(seed)
    unif = gen.uniform(size=t_len)
    y = np.empty(t_len, dtype=np.int64)
    y[0] = 1 if unif[0] < pi1 else 0
    for t in range(1, t_len):
        p = p11 if y[t - 1] == 1 else p10
        y[t] = 1 if unif[t] < p else 0
    return y


def simulate_dvine_quantized(spec, margins, t_len, seed):
    """Latent D-vine paths pushed through margin quantiles; (t_len, r) values."""
    u = simulate(spec, t_len, 1, seed)[0]
    r = spec.r
    out = np.empty((t_len, r))
    for l, margin in enumerate(margins):
        out[:, l] = margin.quantile(u[l::r])
    return out
