"""Marginal distribution models.

Each series gets a margin G_i.  Ordinal margins produce the latent box
(a_t, b_t] = (G(y_t^-), G(y_t)] that the data augmentation integrates over;
continuous margins produce a fixed probability-integral-transform point
u = G(y_t).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import EPS_U
from .errors import InputError, UnknownCategoryError

DISCRETE = "discrete"
CONTINUOUS = "continuous"


def normalize_kinds(kinds, r):
    """Validate per-series kind tags; None means all discrete."""
    if kinds is None:
        return (DISCRETE,) * r
    kinds = tuple(kinds)
    if len(kinds) != r:
        raise InputError(f"expected {r} series kinds, got {len(kinds)}")
    for k in kinds:
        if k not in (DISCRETE, CONTINUOUS):
            raise InputError(f"unknown series kind {k!r}")
    return kinds


@dataclass(frozen=True, eq=False)
class OrdinalMargin:
    """Discrete margin over a finite sorted support.

    ``cdf`` is the primary array; ``pmf`` is stored as its first difference so
    that bounds satisfy b - a = pmf(v) exactly in floating point.
    """

    support: np.ndarray
    cdf: np.ndarray
    pmf: np.ndarray = field(default=None)

    def __post_init__(self):
        support = np.asarray(self.support, dtype=float)
        cdf = np.asarray(self.cdf, dtype=float)
        if support.ndim != 1 or support.size == 0:
            raise InputError("ordinal support must be a nonempty 1-D array")
        if cdf.shape != support.shape:
            raise InputError("cdf and support must have matching shapes")
        if np.any(np.diff(support) <= 0):
            raise InputError("ordinal support must be strictly increasing")
        if abs(cdf[-1] - 1.0) > 1e-12:
            raise InputError("ordinal cdf must end at 1 within 1e-12")
        cdf = cdf.copy()
        cdf[-1] = 1.0
        pmf = np.diff(cdf, prepend=0.0)
        if np.any(pmf <= 0.0):
            raise InputError("ordinal pmf entries must be strictly positive")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "cdf", cdf)
        object.__setattr__(self, "pmf", pmf)

    @property
    def kind(self):
        return DISCRETE

    def _index(self, v):
        i = int(np.searchsorted(self.support, v))
        if i == len(self.support) or self.support[i] != v:
            raise UnknownCategoryError(
                f"value {v!r} not in margin support "
                f"[{self.support[0]!r}..{self.support[-1]!r}]"
            )
        return i

    def bounds(self, v):
        """Latent box (a, b] for an observed value: a = G(v^-), b = G(v)."""
        i = self._index(v)
        a = 0.0 if i == 0 else float(self.cdf[i - 1])
        return a, float(self.cdf[i])

    def bounds_array(self, y):
        """Vectorized bounds for a whole series; returns (a, b) arrays."""
        y = np.asarray(y)
        idx = np.searchsorted(self.support, y)
        idx = np.clip(idx, 0, len(self.support) - 1)
        bad = self.support[idx] != y
        if np.any(bad):
            v = np.asarray(y)[bad].ravel()[0]
            raise UnknownCategoryError(f"value {v!r} not in margin support")
        a = np.where(idx == 0, 0.0, self.cdf[np.maximum(idx - 1, 0)])
        return a, self.cdf[idx]

    def quantile(self, u):
        """Smallest support value v with G(v) > u, for u in [0, 1)."""
        u = np.asarray(u, dtype=float)
        if np.any(u < 0.0) or np.any(u >= 1.0):
            raise InputError("quantile argument must lie in [0, 1)")
        idx = np.searchsorted(self.cdf, u, side="right")
        out = self.support[idx]
        return out if out.ndim else out.item()

    def to_json(self):
        return {
            "kind": "ordinal",
            "support": self.support.tolist(),
            "pmf": self.pmf.tolist(),
        }

    @classmethod
    def from_pmf(cls, support, pmf):
        pmf = np.asarray(pmf, dtype=float)
        if np.any(pmf <= 0):
            raise InputError("pmf entries must be strictly positive")
        return cls(np.asarray(support, dtype=float), np.cumsum(pmf))


@dataclass(frozen=True, eq=False)
class ContinuousMargin:
    """Continuous margin: a monotone CDF map and its inverse.

    Empirical form interpolates order statistics at plotting positions
    k/(T+1); a parametric form wraps user-supplied cdf/ppf callables.
    """

    xs: np.ndarray = None
    ps: np.ndarray = None
    cdf_fn: object = None
    ppf_fn: object = None

    def __post_init__(self):
        if self.cdf_fn is None:
            xs = np.asarray(self.xs, dtype=float)
            ps = np.asarray(self.ps, dtype=float)
            if xs.ndim != 1 or xs.size == 0 or xs.shape != ps.shape:
                raise InputError("continuous margin needs matching 1-D xs, ps")
            if np.any(np.diff(xs) <= 0) or np.any(np.diff(ps) <= 0):
                raise InputError("xs and ps must be strictly increasing")
            if ps[0] <= 0.0 or ps[-1] >= 1.0:
                raise InputError("ps must lie strictly inside (0, 1)")
            object.__setattr__(self, "xs", xs)
            object.__setattr__(self, "ps", ps)
        elif self.ppf_fn is None:
            raise InputError("parametric margin needs both cdf and ppf")

    @property
    def kind(self):
        return CONTINUOUS

    def cdf_value(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise InputError("continuous margin evaluated at non-finite value")
        if self.cdf_fn is not None:
            u = np.asarray(self.cdf_fn(x), dtype=float)
        else:
            u = np.interp(x, self.xs, self.ps)
        u = np.clip(u, EPS_U, 1.0 - EPS_U)
        return u if u.ndim else u.item()

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise InputError("quantile argument must lie in [0, 1]")
        if self.ppf_fn is not None:
            x = np.asarray(self.ppf_fn(u), dtype=float)
        else:
            x = np.interp(u, self.ps, self.xs)
        return x if x.ndim else x.item()

    def to_json(self):
        if self.cdf_fn is None:
            xs, ps = self.xs, self.ps
        else:
            # Parametric margins tabulate onto a 512-point quantile grid;
            # the JSON form cannot carry callables.
            ps = np.arange(1, 513) / 513.0
            xs = np.asarray(self.ppf_fn(ps), dtype=float)
        return {"kind": "continuous", "xs": xs.tolist(), "ps": ps.tolist()}

    @classmethod
    def from_sample(cls, y):
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size == 0:
            raise InputError("sample must be a nonempty 1-D array")
        if not np.all(np.isfinite(y)):
            raise InputError("sample contains non-finite values")
        t = y.size
        order = np.sort(y)
        pos = np.arange(1, t + 1) / (t + 1.0)
        # collapse ties onto the highest plotting position so the CDF is a map
        xs, last_idx = np.unique(order[::-1], return_index=True)
        ps = pos[t - 1 - last_idx]
        if xs.size < 2:
            raise InputError("continuous margin needs at least 2 distinct values")
        return cls(xs=xs, ps=ps)

    @classmethod
    def from_cdf(cls, cdf, ppf):
        return cls(xs=None, ps=None, cdf_fn=cdf, ppf_fn=ppf)


def fit_empirical_ordinal(y, full_support=None, laplace=False):
    """Empirical ordinal margin: pmf(v) = count(v)/T over observed values.

    With ``laplace=True`` a +1 count is added to every value of the declared
    ``full_support`` so unseen categories get positive mass.
    """
    y = np.asarray(y)
    if y.ndim != 1 or y.size == 0:
        raise InputError("series must be a nonempty 1-D array")
    if not np.all(np.isfinite(np.asarray(y, dtype=float))):
        raise InputError("series contains non-finite values")
    values, counts = np.unique(y, return_counts=True)
    if laplace:
        if full_support is None:
            raise InputError("laplace smoothing requires a declared full support")
        support = np.unique(np.asarray(full_support, dtype=float))
        if not np.all(np.isin(values.astype(float), support)):
            raise InputError("observed values outside the declared full support")
        counts_full = np.zeros(support.size, dtype=np.int64)
        counts_full[np.searchsorted(support, values.astype(float))] = counts
        counts = counts_full + 1
        values = support
    cdf = np.cumsum(counts) / counts.sum()
    return OrdinalMargin(values.astype(float), cdf)


def bounds(margin, v):
    """Latent box (a, b] of an ordinal value; see OrdinalMargin.bounds."""
    return margin.bounds(v)


def quantile(margin, u):
    """Generalized inverse CDF; see the margin classes."""
    return margin.quantile(u)


def continuous_pit(margin, x):
    """G_i(x) clamped into (EPS_U, 1-EPS_U) for copula evaluation."""
    return margin.cdf_value(x)


def margin_to_json(margin):
    return margin.to_json()


def margin_from_json(obj):
    kind = obj.get("kind")
    if kind == "ordinal":
        return OrdinalMargin.from_pmf(obj["support"], obj["pmf"])
    if kind == "continuous":
        return ContinuousMargin(
            xs=np.asarray(obj["xs"], dtype=float),
            ps=np.asarray(obj["ps"], dtype=float),
        )
    raise InputError(f"unknown margin kind {kind!r}")
