"""Acceptance gate: twelve end-to-end criteria, one PASS/FAIL line each.

Every instance is frozen (data seeds, budgets, tolerances).  Closed-form
oracle constants used here are derived in the module test files; the two
ADADELTA deltas are hand-computed from the recursion with E[g^2] updated
before the step ratio (g = 1, epsilon = 1e-6, zeta = 0.95):

  step 1: eg2 = 0.05, delta = 1*sqrt(0+1e-6)/sqrt(0.05+1e-6)
        = 0.0044720912343108364
  step 2: eg2 = 0.0975, ed2 = 0.05*delta1^2,
    delta = sqrt(1e-6 + ed2)/sqrt(0.0975 + 1e-6) = 0.004529062265533204

Criterion 6 compares the variational means against a long exact-chain
reference on one frozen Poisson instance; criterion 12 reuses that instance
for the wall-clock comparison at the stated budgets (5000 VB steps versus
30000 chain sweeps).
"""

import time

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from dvinets._rng import stream
from dvinets.analysis import spearman_discrete, spearman_mixed
from dvinets.cli import _margin_for_token
from dvinets.dgp import (
    AUTOLOGISTIC_INTERCEPT,
    AUTOLOGISTIC_SLOPE,
    autologistic_transition,
    simulate_autologistic,
    simulate_dvine_quantized,
)
from dvinets.dvine import (
    DvineSpec,
    boxes_for_data,
    discrete_loglik_oracle,
    lattice_logdensity,
    log_density,
)
from dvinets.margins import OrdinalMargin, fit_empirical_ordinal
from dvinets.mcmc import McmcConfig, run_sampler
from dvinets.paircopula import (
    MixtureParam,
    hfunc,
    hfunc_inv,
    inverse_transform,
    log_prior_psi,
    mix_cdf,
    mix_logpdf,
    transform,
)
from dvinets.vbda import (
    AdadeltaState,
    FactorGaussian,
    LatentVA,
    VBConfig,
    adadelta_step,
    estimate_gradient,
    fit,
    grad_lambda_b,
    sample_u,
    update_control_variates,
)

ADADELTA_DELTA_1 = 0.0044720912343108364
ADADELTA_DELTA_2 = 0.004529062265533204

# closed-form Gumbel functionals (derivations in test_analysis.py)
RHO_DISC_BINARY_TAU05 = 0.37564268173944537

# frozen instance for criteria 6 and 12: Poisson(3) margin, pure Gumbel
# tau=0.5 univariate order-1 vine, T=100, data seed chosen so the exact
# posterior is well identified on every coordinate
POISSON_DATA_SEED = 28


def check(num, name, failures, detail=""):
    status = "PASS" if not failures else f"FAIL {failures}"
    line = f"acceptance criterion {num:2d} ({name}): {status}"
    if detail:
        line += f" [{detail}]"
    print(line)
    assert not failures, line


def random_mixture(rng):
    return MixtureParam(
        rng.uniform(0.05, 0.8),
        rng.uniform(0.1, 0.9),
        rng.uniform(0.05, 0.8),
        rng.uniform(0.1, 0.9),
        rng.uniform(0.1, 0.9),
    )


def rel_close(analytic, numeric, tol):
    scale = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    return float(np.max(np.abs(analytic - numeric) / scale)) <= tol


# ---------------------------------------------------------------------------
# criterion 1: pair-copula kernel identities
# ---------------------------------------------------------------------------


def test_criterion_01_pair_copula_kernels():
    failures = []
    rng = stream(11, 1)

    p0 = MixtureParam.independence()
    u = rng.uniform(0.01, 0.99, size=200)
    v = rng.uniform(0.01, 0.99, size=200)
    if not np.array_equal(mix_logpdf(u, v, p0), np.zeros(200)):
        failures.append("independence logpdf")
    if not np.array_equal(mix_cdf(u, v, p0), u * v):
        failures.append("independence cdf")
    if not np.array_equal(hfunc(u, v, p0, "first"), v):
        failures.append("independence h1")
    if not np.array_equal(hfunc(u, v, p0, "second"), u):
        failures.append("independence h2")
    if not np.array_equal(hfunc_inv(u, v, p0, "first"), u):
        failures.append("independence hinv")

    nodes, wts = leggauss(128)
    x = 0.5 * (nodes + 1.0)
    w = 0.5 * wts
    uu, vv = np.meshgrid(x, x, indexing="ij")
    worst_mass = 0.0
    for _ in range(20):
        p = random_mixture(rng)
        dens = np.exp(mix_logpdf(uu.ravel(), vv.ravel(), p)).reshape(128, 128)
        mass = float(w @ dens @ w)
        worst_mass = max(worst_mass, abs(mass - 1.0))
    if worst_mass > 1e-3:
        failures.append(f"quadrature mass off by {worst_mass:.2e}")

    h_fd = 1e-6
    worst_h = 0.0
    for _ in range(20):
        p = random_mixture(rng)
        pu = rng.uniform(0.05, 0.95, size=16)
        pv = rng.uniform(0.05, 0.95, size=16)
        fd1 = (mix_cdf(pu + h_fd, pv, p) - mix_cdf(pu - h_fd, pv, p)) / (2 * h_fd)
        fd2 = (mix_cdf(pu, pv + h_fd, p) - mix_cdf(pu, pv - h_fd, p)) / (2 * h_fd)
        worst_h = max(
            worst_h,
            float(np.max(np.abs(hfunc(pu, pv, p, "first") - fd1))),
            float(np.max(np.abs(hfunc(pu, pv, p, "second") - fd2))),
        )
    if worst_h > 1e-5:
        failures.append(f"h vs finite-difference C off by {worst_h:.2e}")

    worst_rt = 0.0
    for _ in range(20):
        p = random_mixture(rng)
        q = rng.uniform(0.01, 0.99, size=50)
        cond = rng.uniform(0.01, 0.99, size=50)
        for direction in ("first", "second"):
            sol = hfunc_inv(q, cond, p, direction)
            if direction == "first":
                back = hfunc(cond, sol, p, direction)
            else:
                back = hfunc(sol, cond, p, direction)
            worst_rt = max(worst_rt, float(np.max(np.abs(back - q))))
    if worst_rt > 1e-8:
        failures.append(f"hfunc_inv round trip off by {worst_rt:.2e}")

    check(1, "pair-copula kernels", failures,
          f"mass {worst_mass:.1e}, h-fd {worst_h:.1e}, roundtrip {worst_rt:.1e}")


# ---------------------------------------------------------------------------
# criterion 2: vine density normalization and path identities
# ---------------------------------------------------------------------------


def test_criterion_02_vine_normalization():
    failures = []
    rng = stream(11, 2)

    blocks = (random_mixture(rng), random_mixture(rng))
    spec = DvineSpec.univariate(2, blocks)
    u = stream(11, 22).uniform(size=(1_000_000, 4))
    vals = np.exp(lattice_logdensity(u, spec.param_array(), 1, 2))
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(vals.size))
    if abs(mean - 1.0) > 3.0 * se:
        failures.append(f"MC integral {mean:.5f} (+- {se:.5f}) not 1")

    x = rng.uniform(0.05, 0.95, size=12)
    alias = log_density(x, DvineSpec.univariate(2, blocks))
    direct = log_density(x, DvineSpec(1, 2, blocks))
    if alias != direct:
        failures.append("univariate alias differs bitwise")

    s1 = DvineSpec.univariate(1, (random_mixture(rng),))
    s2 = DvineSpec.univariate(1, (random_mixture(rng),))
    ind = MixtureParam.independence()
    stacked = DvineSpec(2, 1, (ind, s1.params[0], ind, ind, s2.params[0]))
    u1 = rng.uniform(0.05, 0.95, size=6)
    u2 = rng.uniform(0.05, 0.95, size=6)
    flat = np.empty(12)
    flat[0::2], flat[1::2] = u1, u2
    joint = log_density(flat, stacked)
    parts = log_density(u1, s1) + log_density(u2, s2)
    if abs(joint - parts) > 1e-12:
        failures.append("stacked independent series do not factorize")

    check(2, "vine normalization", failures,
          f"integral {mean:.5f} +- {se:.5f}")


# ---------------------------------------------------------------------------
# criterion 3: analytic gradients against finite differences
# ---------------------------------------------------------------------------


def _fd_vs_analytic_q(q, theta, tol):
    """Max relative error of grad_lambda against central differences."""
    from dvinets.vbda import vech_indices

    n, k = q.n, q.K
    rows, cols = vech_indices(n, k)
    g_mu, g_b, g_d = q.grad_lambda(theta)
    analytic = np.concatenate([g_mu, g_b, g_d], axis=1)

    def logq_at(mu, b, d):
        return FactorGaussian(mu=mu, B=b, d=d).logq(theta)

    cols_fd = []
    h = 1e-5
    for j in range(n):
        e = np.zeros(n); e[j] = h
        cols_fd.append((logq_at(q.mu + e, q.B, q.d)
                        - logq_at(q.mu - e, q.B, q.d)) / (2 * h))
    for rr, cc in zip(rows, cols):
        b1, b2 = q.B.copy(), q.B.copy()
        b1[rr, cc] += h
        b2[rr, cc] -= h
        cols_fd.append((logq_at(q.mu, b1, q.d) - logq_at(q.mu, b2, q.d)) / (2 * h))
    for j in range(n):
        e = np.zeros(n); e[j] = h
        cols_fd.append((logq_at(q.mu, q.B, q.d + e)
                        - logq_at(q.mu, q.B, q.d - e)) / (2 * h))
    numeric = np.stack(cols_fd, axis=1)
    return rel_close(analytic, numeric, tol), float(
        np.max(np.abs(analytic - numeric)))


def _fd_vs_analytic_va(va, z, a, b, tol):
    gz = va.grad_z(z)
    names = ["eta", "logomega"] if va.variant == 2 else ["eta", "L_diag", "L_band"]
    analytic = np.concatenate([gz[nm] for nm in names], axis=1)

    def clone(**over):
        kw = dict(eta=va.eta, logomega=va.logomega,
                  L_diag=va.L_diag, L_band=va.L_band)
        kw.update(over)
        return LatentVA(va.variant, va.n_d, **kw)

    h = 1e-5
    cols_fd = []
    for nm in names:
        base = getattr(va, nm)
        for j in range(base.size):
            e = np.zeros(base.size); e[j] = h
            lo = clone(**{nm: base - e}).logq_z(z, a, b)
            hi = clone(**{nm: base + e}).logq_z(z, a, b)
            cols_fd.append((hi - lo) / (2 * h))
    numeric = np.stack(cols_fd, axis=1)
    return rel_close(analytic, numeric, tol), float(
        np.max(np.abs(analytic - numeric)))


def test_criterion_03_gradient_suite():
    failures = []
    rng = stream(11, 3)
    tol = 1e-5

    n, k = 6, 3
    b = np.zeros((n, k))
    idx = np.tril_indices(n, k=0)
    mask = idx[1] < k
    b[idx[0][mask], idx[1][mask]] = rng.normal(size=int(mask.sum())) * 0.4
    q = FactorGaussian(mu=rng.normal(size=n), B=b,
                       d=rng.uniform(0.6, 1.4, size=n))
    theta = q.sample(3, rng=rng)
    ok, err = _fd_vs_analytic_q(q, theta, tol)
    if not ok:
        failures.append(f"factor-Gaussian gradients off by {err:.2e}")

    n_d = 8
    a_box = rng.uniform(0.1, 0.4, size=n_d)
    b_box = a_box + rng.uniform(0.2, 0.5, size=n_d)
    va2 = LatentVA(2, n_d, eta=rng.normal(size=n_d) * 0.5,
                   logomega=rng.normal(size=n_d) * 0.3)
    z2 = va2.sample_z(3, rng=rng)
    ok, err = _fd_vs_analytic_va(va2, z2, a_box, b_box, tol)
    if not ok:
        failures.append(f"va2 gradients off by {err:.2e}")

    va3 = LatentVA(3, n_d, eta=rng.normal(size=n_d) * 0.5,
                   L_diag=rng.uniform(0.7, 1.5, size=n_d),
                   L_band=rng.normal(size=n_d - 1) * 0.3)
    z3 = va3.sample_z(3, rng=rng)
    ok, err = _fd_vs_analytic_va(va3, z3, a_box, b_box, tol)
    if not ok:
        failures.append(f"va3 gradients off by {err:.2e}")

    # score identity: E[grad_lambda log q] = 0, n = 1e5 samples, 3 SE
    s = 100_000
    gen = stream(11, 33)
    theta_s = q.sample(s, rng=gen)
    scores_q = np.concatenate(q.grad_lambda(theta_s), axis=1)
    u_s, _ = sample_u(va2, (a_box, b_box), s, rng=gen)
    gb = grad_lambda_b(u_s, va2, (a_box, b_box))
    scores = np.concatenate(
        [scores_q, gb["eta"], gb["logomega"]], axis=1)
    mean = scores.mean(axis=0)
    se = scores.std(axis=0, ddof=1) / np.sqrt(s)
    worst = float(np.max(np.abs(mean) / se))
    if np.any(np.abs(mean) > 3.0 * se):
        failures.append(f"score identity violated ({worst:.2f} SE)")

    check(3, "gradient suite", failures, f"worst score z = {worst:.2f} SE")


# ---------------------------------------------------------------------------
# criterion 4: latent family nesting
# ---------------------------------------------------------------------------


def test_criterion_04_family_nesting():
    failures = []
    rng = stream(11, 4)
    n_d = 7
    a = rng.uniform(0.1, 0.4, size=n_d)
    b = a + rng.uniform(0.2, 0.5, size=n_d)
    eta = rng.normal(size=n_d) * 0.6
    logomega = rng.normal(size=n_d) * 0.4
    va2 = LatentVA(2, n_d, eta=eta, logomega=logomega)
    va3 = LatentVA(3, n_d, eta=eta, L_diag=np.exp(-logomega),
                   L_band=np.zeros(n_d - 1))

    raw = rng.standard_normal((64, n_d))
    u2, z2 = sample_u(va2, (a, b), 64, raw=raw)
    u3, z3 = sample_u(va3, (a, b), 64, raw=raw)
    if float(np.max(np.abs(u2 - u3))) > 1e-12:
        failures.append("samples differ")
    lq2 = va2.logq_z(z2, a, b)
    lq3 = va3.logq_z(z3, a, b)
    if float(np.max(np.abs(lq2 - lq3))) > 1e-12:
        failures.append("log-densities differ")
    g2, g3 = va2.grad_z(z2), va3.grad_z(z3)
    if float(np.max(np.abs(g2["eta"] - g3["eta"]))) > 1e-12:
        failures.append("eta scores differ")
    # d/d logomega = -omega^-1 * d/d L_diag at L = diag(1/omega)
    conv = -np.exp(-logomega) * g3["L_diag"]
    if float(np.max(np.abs(g2["logomega"] - conv))) > 1e-12:
        failures.append("scale scores inconsistent")

    check(4, "latent family nesting", failures)


# ---------------------------------------------------------------------------
# criterion 5: grid-posterior oracle versus both fitters
# ---------------------------------------------------------------------------


def test_criterion_05_oracle_grid_posterior():
    failures = []
    margin = OrdinalMargin.from_pmf([0.0, 1.0], [0.4, 0.6])
    y = np.array([0.0, 0.0, 1.0, 1.0, 1.0])[:, None]
    psi_fix = transform(MixtureParam(0.2, 1 - 1e-8, 0.2, 1 - 1e-8,
                                     0.5).as_array())
    grid = np.linspace(-8.0, 8.0, 200)

    logpost = np.empty(grid.size)
    for gi, g in enumerate(grid):
        psi = psi_fix.copy()
        psi[4] = g
        spec = DvineSpec.from_param_array(
            1, 1, inverse_transform(psi).as_array()[None])
        est, _ = discrete_loglik_oracle(y, [margin], spec, 1_000_000, seed=42)
        logpost[gi] = np.log(est) + g - 2.0 * np.logaddexp(0.0, g)
    prob = np.exp(logpost - logpost.max())
    prob /= prob.sum()
    grid_mean = float(prob @ grid)

    # exact chain restricted to the free coordinate
    template = DvineSpec.from_param_array(
        1, 1, MixtureParam(0.2, 1 - 1e-8, 0.2, 1 - 1e-8, 0.5).as_array()[None])
    mask = np.array([[0.0, 0.0, 0.0, 0.0, 1.0]])
    chain = run_sampler(
        y, [margin], template,
        McmcConfig(burnin=20_000, iterates=200_000, seed=13, free_mask=mask),
    )
    draws = chain.psi_draws[:, 0, 4]
    step = grid[1] - grid[0]
    edges = np.concatenate([[grid[0] - step / 2], grid + step / 2])
    counts, _ = np.histogram(draws, bins=edges)
    phat = counts / draws.size
    tv = 0.5 * float(np.abs(phat - prob).sum()) + 0.5 * (1.0 - phat.sum())
    if tv >= 0.05:
        failures.append(f"chain TV {tv:.3f} >= 0.05")

    # restricted variational loop over the same free coordinate, assembled
    # from the exported building blocks (mirrors the full fitter)
    a_d, b_d = boxes_for_data(y, [margin], ["discrete"])
    q = FactorGaussian(mu=np.array([0.0]), B=np.zeros((1, 0)),
                       d=np.array([np.sqrt(0.1)]))
    va = LatentVA(2, n_d=5)
    state = AdadeltaState.zeros(q.n_free() + va.n_free())
    s_mc, seed, steps = 100, 7, 1500

    def step_eval(gen):
        theta = q.sample(s_mc, rng=gen)
        u, z = sample_u(va, (a_d, b_d), s_mc, rng=gen)
        psi_full = np.tile(psi_fix, (s_mc, 1))
        psi_full[:, 4] = theta[:, 0]
        params = inverse_transform(psi_full.reshape(s_mc, 1, 5)).as_array()
        logh = lattice_logdensity(u, params, 1, 1) + log_prior_psi(psi_full)
        f = logh - q.logq(theta) - va.logq_z(z, a_d, b_d)
        g_mu, g_b, g_d = q.grad_lambda(theta)
        gz = va.grad_z(z)
        scores = np.hstack([g_mu, g_b, g_d, gz["eta"], gz["logomega"]])
        return f, scores

    cv = update_control_variates(*step_eval(stream(seed, 0)))
    mu_trace = np.empty(steps)
    for t in range(1, steps + 1):
        f, scores = step_eval(stream(seed, t))
        g, _, _ = estimate_gradient(f, scores, cv)
        cv = update_control_variates(f, scores)
        delta = adadelta_step(state, g)
        q.unpack_update(delta[: q.n_free()])
        va.unpack_update(delta[q.n_free():])
        mu_trace[t - 1] = q.mu[0]
    vb_mean = float(mu_trace[-200:].mean())
    if abs(vb_mean - grid_mean) > 0.05:
        failures.append(
            f"VB mean {vb_mean:.4f} vs grid {grid_mean:.4f} off by "
            f"{abs(vb_mean - grid_mean):.4f} > 0.05")

    check(5, "grid-posterior oracle", failures,
          f"grid mean {grid_mean:.4f}, chain TV {tv:.4f}, VB mean {vb_mean:.4f}")


# ---------------------------------------------------------------------------
# criteria 6 and 12: variational versus exact chain on a Poisson instance
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def poisson_instance():
    margin = _margin_for_token("poisson:3")
    dgp = DvineSpec.univariate(1, (MixtureParam(0.5, 1.0, 0.5, 1.0, 1.0),))
    y = simulate_dvine_quantized(dgp, [margin], 100, seed=POISSON_DATA_SEED)

    t0 = time.perf_counter()
    vb = fit(y, [margin], ["discrete"], 1, 1,
             VBConfig(S=100, steps=5000, K=1, variant=2, seed=5, threads=1))
    vb_wall = time.perf_counter() - t0

    # fixed 30000-sweep budget for the criterion-12 wall comparison
    t0 = time.perf_counter()
    chain_budget = run_sampler(
        y, [margin], DvineSpec.independence(1, 1),
        McmcConfig(burnin=10_000, iterates=20_000, seed=9))
    mcmc_wall = time.perf_counter() - t0

    # longer reference chain for the criterion-6 moment comparison
    chain_ref = run_sampler(
        y, [margin], DvineSpec.independence(1, 1),
        McmcConfig(burnin=10_000, iterates=40_000, seed=9))

    return {
        "vb": vb, "vb_wall": vb_wall,
        "chain_budget": chain_budget, "mcmc_wall": mcmc_wall,
        "chain_ref": chain_ref,
    }


def test_criterion_06_vb_matches_chain(poisson_instance):
    failures = []
    vb = poisson_instance["vb"]
    draws = poisson_instance["chain_ref"].psi_draws.reshape(-1, 5)
    vb_mean = vb.q_theta.mu
    vb_sd = np.sqrt(np.diag(vb.q_theta.sigma()))
    mc_mean = draws.mean(axis=0)
    mc_sd = draws.std(axis=0, ddof=1)
    mean_diff = np.abs(vb_mean - mc_mean)
    sd_rel = np.abs(vb_sd - mc_sd) / mc_sd
    if np.any(mean_diff > 0.15):
        failures.append(
            f"mean diffs {np.round(mean_diff, 3).tolist()} exceed 0.15")
    if np.any(sd_rel > 0.5):
        failures.append(
            f"sd rel errors {np.round(sd_rel, 3).tolist()} exceed 0.5")
    check(6, "variational matches exact chain", failures,
          f"max mean diff {mean_diff.max():.3f}, max sd rel {sd_rel.max():.3f}")


def test_criterion_12_vb_faster_than_chain(poisson_instance):
    failures = []
    vb_wall = poisson_instance["vb_wall"]
    mcmc_wall = poisson_instance["mcmc_wall"]
    if not vb_wall < mcmc_wall:
        failures.append(f"VB {vb_wall:.1f}s not below chain {mcmc_wall:.1f}s")
    check(12, "variational is faster", failures,
          f"VB 5000 steps {vb_wall:.1f}s vs chain 30000 sweeps {mcmc_wall:.1f}s")


# ---------------------------------------------------------------------------
# criterion 7: auto-logistic benchmark
# ---------------------------------------------------------------------------


def test_criterion_07_autologistic_benchmark():
    failures = []
    if AUTOLOGISTIC_INTERCEPT != -2.197 or AUTOLOGISTIC_SLOPE != 4.394:
        failures.append("transition coefficients are not (-2.197, 4.394)")
    p10, p11 = autologistic_transition()
    if abs(p10 - 0.1) > 0.001 or abs(p11 - 0.9) > 0.001:
        failures.append(f"transition probabilities ({p10:.4f}, {p11:.4f})")

    y = simulate_autologistic(200, seed=11).astype(float)[:, None]
    margin = fit_empirical_ordinal(y[:, 0])
    fits = {}
    for variant in (2, 3):
        fits[variant] = fit(
            y, [margin], ["discrete"], 1, 1,
            VBConfig(S=100, steps=1000, K=1, variant=variant, seed=5,
                     threads=1))
        lead = fits[variant].lb_trace[:500]
        trail = fits[variant].lb_trace[-500:]
        if not trail.mean() > lead.mean():
            failures.append(f"va{variant} bound did not improve")

    trail2 = fits[2].lb_trace[-500:]
    trail3 = fits[3].lb_trace[-500:]
    se = float(np.sqrt(trail2.var(ddof=1) / 500 + trail3.var(ddof=1) / 500))
    if not trail3.mean() >= trail2.mean() - 3.0 * se:
        failures.append(
            f"va3 bound {trail3.mean():.2f} below va2 {trail2.mean():.2f} "
            f"- 3*{se:.2f}")

    entry, _ = spearman_discrete(
        margin, margin, fits[3], 0, 0, 1,
        n_sim=50_000, n_param_draws=100, seed=6)
    if not (entry["q05"] > 0.0 and entry["q95"] > 0.0):
        failures.append("lag-1 interval does not exclude 0")
    if not entry["mean"] > 0.3:
        failures.append(f"lag-1 mean {entry['mean']:.3f} <= 0.3")

    check(7, "auto-logistic benchmark", failures,
          f"LB va2 {trail2.mean():.1f}, va3 {trail3.mean():.1f}, "
          f"rho1 {entry['mean']:.3f} [{entry['q05']:.3f}, {entry['q95']:.3f}]")


# ---------------------------------------------------------------------------
# criterion 8: stuck-chain detection where the variational fit completes
# ---------------------------------------------------------------------------


def test_criterion_08_stuck_chain_detection():
    failures = []
    y = simulate_autologistic(500, seed=11).astype(float)[:, None]
    margin = fit_empirical_ordinal(y[:, 0])

    chain = run_sampler(
        y, [margin], DvineSpec.independence(1, 1),
        McmcConfig(burnin=3_000, iterates=3_000, seed=2))
    if not chain.stuck:
        failures.append("chain was not flagged stuck")
    if chain.stuck and not chain.stuck_sweep >= 1:
        failures.append("stuck sweep not recorded")

    vb = fit(y, [margin], ["discrete"], 1, 1,
             VBConfig(S=50, steps=300, K=1, variant=2, seed=5, threads=1))
    if not np.isfinite(vb.lb_trace).all():
        failures.append("variational bound not finite")
    lead, trail = vb.lb_trace[:100], vb.lb_trace[-100:]
    if not trail.mean() > lead.mean():
        failures.append("variational bound did not improve")

    check(8, "stuck-chain detection", failures,
          f"stuck at sweep {chain.stuck_sweep}, u acceptance "
          f"{chain.acc_rate_u:.5f}, VB bound {trail.mean():.1f}")


# ---------------------------------------------------------------------------
# criterion 9: Spearman estimators at one million draws
# ---------------------------------------------------------------------------


def test_criterion_09_spearman_estimators():
    failures = []
    binary = OrdinalMargin.from_pmf([0.0, 1.0], [0.5, 0.5])

    e_ind, _ = spearman_discrete(
        binary, binary, DvineSpec.independence(1, 1), 0, 0, 1,
        n_sim=1_000_000, seed=1)
    if abs(e_ind["mean"]) >= 0.01:
        failures.append(f"discrete independence rho {e_ind['mean']:.4f}")

    gumbel = DvineSpec.univariate(1, (MixtureParam(0.5, 1.0, 0.5, 1.0, 1.0),))
    e_gum, _ = spearman_discrete(
        binary, binary, gumbel, 0, 0, 1, n_sim=1_000_000, seed=2)
    err = abs(e_gum["mean"] - RHO_DISC_BINARY_TAU05)
    if err >= 0.01:
        failures.append(f"binary Gumbel rho off by {err:.4f}")

    e_mix, _ = spearman_mixed(
        binary, DvineSpec.independence(1, 1), 0, 0, 1,
        n_sim=1_000_000, seed=3)
    if abs(e_mix["mean"]) >= 0.01:
        failures.append(f"mixed independence rho {e_mix['mean']:.4f}")

    check(9, "Spearman estimators", failures,
          f"indep {e_ind['mean']:.4f}, Gumbel err {err:.4f}, "
          f"mixed {e_mix['mean']:.4f}")


# ---------------------------------------------------------------------------
# criterion 10: optimizer steps match the hand-computed recursion
# ---------------------------------------------------------------------------


def test_criterion_10_adadelta_steps():
    failures = []
    state = AdadeltaState.zeros(1, epsilon=1e-6, zeta=0.95)
    d1 = float(adadelta_step(state, np.array([1.0]))[0])
    d2 = float(adadelta_step(state, np.array([1.0]))[0])
    if d1 != ADADELTA_DELTA_1:
        failures.append(f"step 1 {d1!r}")
    if d2 != ADADELTA_DELTA_2:
        failures.append(f"step 2 {d2!r}")
    check(10, "ADADELTA steps", failures, f"{d1!r}, {d2!r}")


# ---------------------------------------------------------------------------
# criterion 11: byte-identical outputs across worker thread counts
# ---------------------------------------------------------------------------


def test_criterion_11_thread_determinism(tmp_path):
    from click.testing import CliRunner
    from dvinets.cli import main

    failures = []
    runner = CliRunner()
    data = tmp_path / "data.csv"
    res = runner.invoke(main, [
        "simulate-dgp", "--kind", "dvine", "--T", "40", "--seed", "3",
        "--margin", "poisson:3", "--out", str(data)])
    assert res.exit_code == 0, res.output

    lb_bytes, draw_bytes = [], []
    for n in (1, 2, 8):
        fit_out = tmp_path / f"fit{n}.json"
        res = runner.invoke(main, [
            "fit-uni", str(data), "--steps", "60", "--S", "20", "--seed", "5",
            "--threads", str(n), "--out", str(fit_out)])
        if res.exit_code != 0:
            failures.append(f"fit at {n} threads failed")
            continue
        lb_bytes.append((tmp_path / f"fit{n}_lb.csv").read_bytes())

        mc_out = tmp_path / f"mc{n}.json"
        res = runner.invoke(main, [
            "mcmc-fit", str(data), "--burnin", "150", "--iterates", "200",
            "--seed", "4", "--threads", str(n), "--out", str(mc_out)])
        if res.exit_code != 0:
            failures.append(f"chain at {n} threads failed")
            continue
        draw_bytes.append((tmp_path / f"mc{n}_draws.csv").read_bytes())

    if len(set(lb_bytes)) != 1:
        failures.append("bound traces differ across thread counts")
    # the chain is sequential by design, so thread invariance is structural
    if len(set(draw_bytes)) != 1:
        failures.append("chain draw files differ across thread counts")

    check(11, "thread determinism", failures,
          f"{len(lb_bytes)} bound traces and {len(draw_bytes)} draw files "
          "compared")
