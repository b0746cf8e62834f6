"""Variational Bayes estimation of the augmented posterior p(theta, u | y).

The variational family factorizes as q(theta) * q(u).  q(theta) is a Gaussian
with factor covariance Sigma = B B' + diag(d^2) on the unconstrained psi
parameters.  q(u) covers the latent PITs of the discrete cells only
(continuous cells are fixed at their margin CDF points) and comes in three
variants: VA1 independent uniforms on the boxes, VA2 independent transformed
normals, VA3 transformed normals with a band-1 lower-triangular Cholesky
factor L of the precision matrix.

Gradients use the score-function (log-derivative) estimator with per
coordinate control variates, and updates use ADADELTA.  All randomness for a
step is pre-drawn in fixed order from a stream keyed (seed, step), so results
do not depend on thread scheduling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import ndtr, ndtri

from . import EPS_U, __version__
from .errors import InputError, NumericalFailure
from .margins import DISCRETE, normalize_kinds, margin_to_json
from .dvine import boxes_for_data, lattice_logdensity, n_paircopulas
from .paircopula import log_prior_psi, inverse_transform
from ._rng import stream, resolve_threads, map_chunks

PSI_INIT = float(np.log(0.01 / 0.99))  # logit(0.01): near-independence start
_POS_FLOOR = 1e-8


# ---------------------------------------------------------------------------
# q(theta): Gaussian with factor covariance
# ---------------------------------------------------------------------------


def vech_indices(n, k):
    """Row/column indices of the free (lower-triangular) entries of B, column-major."""
    rows, cols = [], []
    for j in range(k):
        for i in range(j, n):
            rows.append(i)
            cols.append(j)
    return np.asarray(rows, dtype=int), np.asarray(cols, dtype=int)


@dataclass(eq=False)
class FactorGaussian:
    """N(mu, B B' + diag(d^2)) with B n x K, zero above the diagonal."""

    mu: np.ndarray
    B: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        self.d = np.asarray(self.d, dtype=float)
        n = self.mu.size
        if self.B.ndim != 2 or self.B.shape[0] != n:
            raise InputError("B must be n x K")
        k = self.B.shape[1]
        if k >= n and k > 0:
            raise InputError("need K < n")
        if np.any(self.d <= 0.0):
            raise InputError("d entries must be positive")
        iu = np.triu_indices(n, 1)
        mask = iu[1] < k
        if np.any(self.B[iu[0][mask], iu[1][mask]] != 0.0):
            raise InputError("B must have a zero upper triangle")

    @property
    def n(self):
        return self.mu.size

    @property
    def K(self):
        return self.B.shape[1]

    def n_free(self):
        n, k = self.n, self.K
        return n + (n * k - k * (k - 1) // 2) + n

    def sigma(self):
        return self.B @ self.B.T + np.diag(self.d**2)

    def _sigma_inv_logdet(self):
        """Woodbury inverse and matrix-determinant-lemma log|Sigma|."""
        d2inv = 1.0 / (self.d**2)
        if self.K == 0:
            return np.diag(d2inv), float(2.0 * np.log(self.d).sum())
        bt_d = self.B.T * d2inv  # K x n
        a = np.eye(self.K) + bt_d @ self.B
        sign, logdet_a = np.linalg.slogdet(a)
        if sign <= 0:
            raise NumericalFailure("factor covariance lost positive definiteness")
        sinv = np.diag(d2inv) - bt_d.T @ np.linalg.solve(a, bt_d)
        return sinv, float(logdet_a + 2.0 * np.log(self.d).sum())

    def sample(self, count, rng=None, z=None, eps=None):
        """theta = mu + B z + d * eps; z, eps may be injected for determinism."""
        if z is None:
            z = rng.standard_normal((count, self.K))
        if eps is None:
            eps = rng.standard_normal((count, self.n))
        return self.mu + z @ self.B.T + eps * self.d

    def logq(self, theta):
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        sinv, logdet = self._sigma_inv_logdet()
        r = theta - self.mu
        quad = np.einsum("si,ij,sj->s", r, sinv, r)
        out = -0.5 * (self.n * np.log(2.0 * np.pi) + logdet + quad)
        return out

    def grad_lambda(self, theta):
        """Per-sample score of log q in (mu, vech(B), d); shapes (S, ...)."""
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        sinv, _ = self._sigma_inv_logdet()
        r = theta - self.mu
        y = r @ sinv  # (S, n); Sigma^{-1} r since Sigma^{-1} symmetric
        g_mu = y
        sb = sinv @ self.B  # n x K
        yb = y @ self.B  # (S, K)
        g_b_full = y[:, :, None] * yb[:, None, :] - sb  # (S, n, K)
        rows, cols = vech_indices(self.n, self.K)
        g_b = g_b_full[:, rows, cols]
        g_d = (y**2 - np.diag(sinv)) * self.d
        return g_mu, g_b, g_d

    def pack(self):
        rows, cols = vech_indices(self.n, self.K)
        return np.concatenate([self.mu, self.B[rows, cols], self.d])

    def unpack_update(self, delta):
        n, k = self.n, self.K
        nb = n * k - k * (k - 1) // 2
        self.mu = self.mu + delta[:n]
        rows, cols = vech_indices(n, k)
        b = self.B.copy()
        b[rows, cols] += delta[n:n + nb]
        self.B = b
        self.d = np.maximum(self.d + delta[n + nb:], _POS_FLOOR)


def sample_theta(q, count, rng):
    return q.sample(count, rng=rng)


def logq_theta(theta, q):
    out = q.logq(theta)
    return out if np.asarray(theta).ndim > 1 else float(out[0])


def grad_lambda_a(theta, q):
    return q.grad_lambda(theta)


# ---------------------------------------------------------------------------
# q(u): latent variational families over the discrete-cell PITs
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class LatentVA:
    """Latent variational family; holds parameters for the n_d discrete cells."""

    variant: int
    n_d: int
    eta: np.ndarray = None
    logomega: np.ndarray = None
    L_diag: np.ndarray = None
    L_band: np.ndarray = None

    def __post_init__(self):
        if self.variant not in (1, 2, 3):
            raise InputError("VA variant must be 1, 2 or 3")
        nd = self.n_d
        if self.variant >= 2 and self.eta is None:
            self.eta = np.zeros(nd)
        if self.variant == 2 and self.logomega is None:
            self.logomega = np.zeros(nd)
        if self.variant == 3:
            if self.L_diag is None:
                self.L_diag = np.ones(nd)
            if self.L_band is None:
                self.L_band = np.zeros(max(nd - 1, 0))
        for name in ("eta", "logomega", "L_diag", "L_band"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, np.asarray(v, dtype=float))
        if self.variant == 3 and np.any(self.L_diag <= 0.0):
            raise InputError("L diagonal must be positive")

    def n_free(self):
        if self.variant == 1:
            return 0
        if self.variant == 2:
            return 2 * self.n_d
        return 2 * self.n_d + max(self.n_d - 1, 0)

    # -- z-space helpers ----------------------------------------------------

    def sample_z(self, count, rng=None, eps=None):
        """VA2: z = eta + omega*eps; VA3: solve L' x = eps, z = eta + x."""
        if eps is None:
            eps = rng.standard_normal((count, self.n_d))
        if self.variant == 2:
            return self.eta + np.exp(self.logomega) * eps
        x = np.empty_like(eps)
        nd = self.n_d
        x[:, nd - 1] = eps[:, nd - 1] / self.L_diag[nd - 1]
        for i in range(nd - 2, -1, -1):
            x[:, i] = (eps[:, i] - self.L_band[i] * x[:, i + 1]) / self.L_diag[i]
        return self.eta + x

    def _lt_m(self, m):
        """(L' m)_i = L_diag[i] m_i + L_band[i] m_{i+1}."""
        out = self.L_diag * m
        out[..., :-1] += self.L_band * m[..., 1:]
        return out

    def _l_w(self, w):
        """(L w)_i = L_diag[i] w_i + L_band[i-1] w_{i-1}."""
        out = self.L_diag * w
        out[..., 1:] += self.L_band * w[..., :-1]
        return out

    def logq_z(self, z, a, b):
        """log q(u) expressed through z; includes the box Jacobian."""
        width = b - a
        base = 0.5 * (z**2).sum(axis=-1) - np.log(width).sum()
        if self.variant == 1:
            raise InputError("VA1 has no z-space parameterization")
        m = z - self.eta
        if self.variant == 2:
            omega2 = np.exp(2.0 * self.logomega)
            return base - self.logomega.sum() - 0.5 * (m**2 / omega2).sum(axis=-1)
        w = self._lt_m(m)
        return base + np.log(self.L_diag).sum() - 0.5 * (w**2).sum(axis=-1)

    def grad_z(self, z):
        """Per-sample score of log q in the free latent parameters."""
        m = z - self.eta
        if self.variant == 2:
            omega2 = np.exp(2.0 * self.logomega)
            g_eta = m / omega2
            g_c = m**2 / omega2 - 1.0
            return {"eta": g_eta, "logomega": g_c}
        w = self._lt_m(m)
        g_eta = self._l_w(w)
        g_diag = 1.0 / self.L_diag - m * w
        g_band = -m[..., 1:] * w[..., :-1]
        return {"eta": g_eta, "L_diag": g_diag, "L_band": g_band}

    def pack(self):
        if self.variant == 1:
            return np.zeros(0)
        if self.variant == 2:
            return np.concatenate([self.eta, self.logomega])
        return np.concatenate([self.eta, self.L_diag, self.L_band])

    def unpack_update(self, delta):
        nd = self.n_d
        if self.variant == 1:
            return
        self.eta = self.eta + delta[:nd]
        if self.variant == 2:
            self.logomega = self.logomega + delta[nd:]
        else:
            self.L_diag = np.maximum(self.L_diag + delta[nd:2 * nd], _POS_FLOOR)
            self.L_band = self.L_band + delta[2 * nd:]


def _z_from_u(u, a, b):
    frac = (np.asarray(u) - a) / (b - a)
    return ndtri(np.clip(frac, EPS_U, 1.0 - EPS_U))


def sample_u(va, boxes, count, rng=None, raw=None):
    """Draw latent PITs strictly inside the boxes; returns (u, z or None)."""
    a, b = boxes
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if va.variant == 1:
        if raw is None:
            raw = rng.uniform(size=(count, a.size))
        w = np.clip(raw, EPS_U, 1.0 - EPS_U)
        return a + (b - a) * w, None
    z = va.sample_z(count, rng=rng, eps=raw)
    w = np.clip(ndtr(z), EPS_U, 1.0 - EPS_U)
    return a + (b - a) * w, z


def logq_u(u, va, boxes):
    """log q(u); for VA2/VA3 u is mapped back to z-space first."""
    a, b = boxes
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    u = np.asarray(u, dtype=float)
    if va.variant == 1:
        out = np.broadcast_to(-np.log(b - a).sum(), u.shape[:-1]).copy()
        return out if u.ndim > 1 else float(out)
    z = _z_from_u(u, a, b)
    out = va.logq_z(np.atleast_2d(z), a, b)
    return out if u.ndim > 1 else float(out[0])


def grad_lambda_b(u, va, boxes):
    """Per-sample scores of log q(u) in the latent parameters (dict of arrays)."""
    if va.variant == 1:
        return {}
    a, b = boxes
    z = _z_from_u(u, np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return va.grad_z(np.atleast_2d(z))


# ---------------------------------------------------------------------------
# Objective pieces
# ---------------------------------------------------------------------------


def log_h(theta_psi, u, r, p):
    """log of the unnormalized augmented posterior at (psi, u).

    The box indicator factors are identically 1 because u is always sampled
    inside its boxes, leaving the D-vine log density plus the psi prior.
    """
    theta_psi = np.asarray(theta_psi, dtype=float)
    npc = n_paircopulas(r, p)
    psi = theta_psi.reshape(theta_psi.shape[:-1] + (npc, 5))
    params = inverse_transform(psi).as_array()
    return lattice_logdensity(u, params, r, p) + log_prior_psi(theta_psi)


def update_control_variates(f, scores):
    """Per-coordinate control variates from the step's S samples.

    cv_i = Cov((f)*score_i, score_i) / Var(score_i), sample estimates; zero
    where the score variance underflows.
    """
    s = f.shape[0]
    if s < 2:
        raise InputError("control variates need S >= 2")
    fs = f[:, None] * scores
    sc_c = scores - scores.mean(axis=0)
    cov = np.einsum("si,si->i", fs - fs.mean(axis=0), sc_c) / (s - 1)
    var = np.einsum("si,si->i", sc_c, sc_c) / (s - 1)
    out = np.zeros(scores.shape[1])
    ok = var >= 1e-12
    out[ok] = cov[ok] / var[ok]
    return out


@dataclass(eq=False)
class AdadeltaState:
    """Running averages for ADADELTA; both start at zero."""

    eg2: np.ndarray
    ed2: np.ndarray
    epsilon: float = 1e-6
    zeta: float = 0.95

    @classmethod
    def zeros(cls, n, epsilon=1e-6, zeta=0.95):
        return cls(np.zeros(n), np.zeros(n), epsilon, zeta)

    def step(self, g):
        """Update order: E(g^2) first, then rho and Delta, then E(Delta^2)."""
        g = np.asarray(g, dtype=float)
        self.eg2 = self.zeta * self.eg2 + (1.0 - self.zeta) * g**2
        rho = np.sqrt(self.ed2 + self.epsilon) / np.sqrt(self.eg2 + self.epsilon)
        delta = rho * g
        self.ed2 = self.zeta * self.ed2 + (1.0 - self.zeta) * delta**2
        return delta


def adadelta_step(state, gradient):
    return state.step(gradient)


# ---------------------------------------------------------------------------
# Configuration and results
# ---------------------------------------------------------------------------


@dataclass
class VBConfig:
    S: int = 500
    steps: int = 5000
    K: int = 1
    variant: int = 2
    epsilon: float = 1e-6
    zeta: float = 0.95
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.S < 2:
            raise InputError("S must be >= 2 (control variates need a sample covariance)")
        if self.steps < 1:
            raise InputError("steps must be >= 1")
        if self.variant not in (1, 2, 3):
            raise InputError("VA variant must be 1, 2 or 3")
        if self.K < 0:
            raise InputError("K must be >= 0")


@dataclass(eq=False)
class FitResult:
    """Converged variational parameters plus the optimization trace."""

    q_theta: FactorGaussian
    va: LatentVA
    lb_trace: np.ndarray
    cv: np.ndarray
    config: VBConfig
    seed: int
    r: int
    p: int
    kinds: tuple
    margins: tuple
    dropped_total: int = 0

    def lambda_blocks(self):
        out = {
            "mu": self.q_theta.mu.tolist(),
            "B": self.q_theta.B.tolist(),
            "d": self.q_theta.d.tolist(),
        }
        if self.va.variant >= 2:
            out["eta"] = self.va.eta.tolist()
        if self.va.variant == 2:
            out["logomega"] = self.va.logomega.tolist()
        if self.va.variant == 3:
            out["L_diag"] = self.va.L_diag.tolist()
            out["L_band"] = self.va.L_band.tolist()
        return out

    def to_json(self):
        return {
            "version": __version__,
            "kind": "vb_fit",
            "r": self.r,
            "p": self.p,
            "series_kinds": list(self.kinds),
            "margins": [margin_to_json(m) for m in self.margins],
            "lambda": self.lambda_blocks(),
            "lb_trace": np.asarray(self.lb_trace).tolist(),
            "cv": np.asarray(self.cv).tolist(),
            "config": asdict(self.config),
            "seed": self.seed,
            "dropped_samples": int(self.dropped_total),
        }

    @classmethod
    def from_json(cls, obj):
        from .margins import margin_from_json

        cfg = VBConfig(**obj["config"])
        lam = obj["lambda"]
        q = FactorGaussian(
            np.asarray(lam["mu"], dtype=float),
            np.asarray(lam["B"], dtype=float),
            np.asarray(lam["d"], dtype=float),
        )
        nd = len(lam["eta"]) if "eta" in lam else 0
        va = LatentVA(
            cfg.variant,
            nd,
            eta=np.asarray(lam["eta"], dtype=float) if "eta" in lam else None,
            logomega=(np.asarray(lam["logomega"], dtype=float)
                      if "logomega" in lam else None),
            L_diag=(np.asarray(lam["L_diag"], dtype=float)
                    if "L_diag" in lam else None),
            L_band=(np.asarray(lam["L_band"], dtype=float)
                    if "L_band" in lam else None),
        )
        return cls(
            q_theta=q,
            va=va,
            lb_trace=np.asarray(obj["lb_trace"], dtype=float),
            cv=np.asarray(obj["cv"], dtype=float),
            config=cfg,
            seed=int(obj["seed"]),
            r=int(obj["r"]),
            p=int(obj["p"]),
            kinds=tuple(obj["series_kinds"]),
            margins=tuple(margin_from_json(m) for m in obj["margins"]),
            dropped_total=int(obj.get("dropped_samples", 0)),
        )


# ---------------------------------------------------------------------------
# The SGA loop
# ---------------------------------------------------------------------------


class _Problem:
    """Data-dependent pieces of the objective shared across steps."""

    def __init__(self, y, margins, kinds, r, p, config, threads):
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        self.t_len, width = y.shape
        if width != r:
            raise InputError(f"data has {width} columns but r={r}")
        if self.t_len < 2:
            raise InputError("need T >= 2")
        self.kinds = normalize_kinds(kinds, r)
        self.r, self.p = r, p
        a, b = boxes_for_data(y, margins, self.kinds)
        self.a_full, self.b_full = a, b
        flat_kinds = np.array([self.kinds[i % r] == DISCRETE
                               for i in range(r * self.t_len)])
        self.discrete_idx = np.flatnonzero(flat_kinds)
        self.n_d = int(self.discrete_idx.size)
        if self.n_d == 0:
            raise InputError("no discrete cells: data augmentation is not needed")
        self.boxes_d = (a[self.discrete_idx], b[self.discrete_idx])
        self.n_theta = 5 * n_paircopulas(r, p)
        self.config = config
        self.threads = threads

    def assemble_u(self, u_d, count):
        n_flat = self.a_full.size
        u = np.broadcast_to(self.a_full, (count, n_flat)).copy()
        u[:, self.discrete_idx] = u_d
        return u

    def log_h(self, theta_psi, u):
        out = np.empty(theta_psi.shape[0])
        npc = n_paircopulas(self.r, self.p)

        def work(sl):
            psi = theta_psi[sl].reshape(-1, npc, 5)
            params = inverse_transform(psi).as_array()
            out[sl] = lattice_logdensity(u[sl], params, self.r, self.p)
            out[sl] += log_prior_psi(theta_psi[sl])
            return None

        # disjoint elementwise writes: per-sample values do not depend on the
        # chunking, so chunk count can follow the thread count
        map_chunks(work, theta_psi.shape[0], self.threads,
                   n_chunks=max(self.threads, 1))
        return out


def _draw_step(problem, q, va, seed, step_idx):
    """All randomness of a step, drawn in fixed order from one stream."""
    gen = stream(seed, step_idx)
    s = problem.config.S
    z = gen.standard_normal((s, q.K))
    eps = gen.standard_normal((s, q.n))
    if va.variant == 1:
        raw = gen.uniform(size=(s, problem.n_d))
    else:
        raw = gen.standard_normal((s, problem.n_d))
    theta = q.sample(s, z=z, eps=eps)
    u_d, z_lat = sample_u(va, problem.boxes_d, s, raw=raw)
    return theta, u_d, z_lat


def _scores_and_f(problem, q, va, theta, u_d, z_lat):
    """Stacked per-sample scores and the centered integrand f = log h - log q."""
    a_d, b_d = problem.boxes_d
    u = problem.assemble_u(u_d, theta.shape[0])
    logh = problem.log_h(theta, u)
    lq_t = q.logq(theta)
    g_mu, g_b, g_d = q.grad_lambda(theta)
    blocks = [g_mu, g_b, g_d]
    if va.variant == 1:
        lq_u = np.full(theta.shape[0], -np.log(b_d - a_d).sum())
    else:
        lq_u = va.logq_z(z_lat, a_d, b_d)
        gz = va.grad_z(z_lat)
        if va.variant == 2:
            blocks += [gz["eta"], gz["logomega"]]
        else:
            blocks += [gz["eta"], gz["L_diag"], gz["L_band"]]
    scores = np.concatenate(blocks, axis=1) if blocks else np.zeros((theta.shape[0], 0))
    f = logh - lq_t - lq_u
    return f, scores


def estimate_gradient(f, scores, cv):
    """Score-function gradient with control variates; drops non-finite samples.

    Returns (gradient, n_dropped, kept_f).  Raises NumericalFailure when more
    than 10% of the samples are non-finite.
    """
    finite = np.isfinite(f) & np.all(np.isfinite(scores), axis=1)
    n_drop = int(f.shape[0] - finite.sum())
    if n_drop > 0.1 * f.shape[0]:
        raise NumericalFailure(
            "more than 10% of gradient samples non-finite", dropped=n_drop
        )
    fk = f[finite]
    sk = scores[finite]
    g = ((fk[:, None] - cv) * sk).mean(axis=0)
    return g, n_drop, fk


def fit(y, margins, kinds, r, p, config, checkpoint_path=None, progress=None):
    """Run the full SGA loop; returns a FitResult.

    Writes a resumable checkpoint every 500 steps when checkpoint_path is
    given, and also on abort (partial state persists before the error
    propagates).
    """
    threads = resolve_threads(config.threads)
    problem = _Problem(y, margins, kinds, r, p, config, threads)
    q = FactorGaussian(
        mu=np.full(problem.n_theta, PSI_INIT),
        B=np.zeros((problem.n_theta, config.K)),
        d=np.full(problem.n_theta, np.sqrt(0.1)),
    )
    va = LatentVA(config.variant, problem.n_d)
    n_free = q.n_free() + va.n_free()
    state = AdadeltaState.zeros(n_free, config.epsilon, config.zeta)
    lb_trace = np.empty(config.steps)
    dropped_total = 0

    # Step 1 of the SGA scheme: control-variate warmup at the initial lambda.
    theta, u_d, z_lat = _draw_step(problem, q, va, config.seed, 0)
    f, scores = _scores_and_f(problem, q, va, theta, u_d, z_lat)
    finite = np.isfinite(f) & np.all(np.isfinite(scores), axis=1)
    cv = update_control_variates(f[finite], scores[finite])

    def write_checkpoint(step_done):
        if checkpoint_path is None:
            return
        payload = {
            "version": __version__,
            "kind": "vb_checkpoint",
            "step_done": step_done,
            "lambda": _result(step_done).lambda_blocks(),
            "cv": cv.tolist(),
            "eg2": state.eg2.tolist(),
            "ed2": state.ed2.tolist(),
            "lb_trace": lb_trace[:step_done].tolist(),
            "config": asdict(config),
        }
        with open(checkpoint_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)

    def _result(steps_done):
        return FitResult(
            q_theta=q,
            va=va,
            lb_trace=lb_trace[:steps_done].copy(),
            cv=cv.copy(),
            config=config,
            seed=config.seed,
            r=r,
            p=p,
            kinds=problem.kinds,
            margins=tuple(margins),
            dropped_total=dropped_total,
        )

    for step in range(1, config.steps + 1):
        theta, u_d, z_lat = _draw_step(problem, q, va, config.seed, step)
        f, scores = _scores_and_f(problem, q, va, theta, u_d, z_lat)
        try:
            g, n_drop, fk = estimate_gradient(f, scores, cv)
        except NumericalFailure:
            write_checkpoint(step - 1)
            raise
        dropped_total += n_drop
        delta = state.step(g)
        nq = q.n_free()
        q.unpack_update(delta[:nq])
        va.unpack_update(delta[nq:])
        finite = np.isfinite(f) & np.all(np.isfinite(scores), axis=1)
        cv = update_control_variates(f[finite], scores[finite])
        lb_trace[step - 1] = fk.mean()
        if step % 500 == 0:
            write_checkpoint(step)
        if progress is not None and (step % 100 == 0 or step == config.steps):
            progress(step, lb_trace[step - 1])

    return _result(config.steps)
