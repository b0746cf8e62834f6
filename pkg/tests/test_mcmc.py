"""Data-augmentation sampler: proposals, acceptance, adaptation, diagnostics."""

import json
import math

import numpy as np
import pytest

import dvinets.mcmc as mcmc_mod
from dvinets._rng import stream
from dvinets.errors import InputError
from dvinets.margins import ContinuousMargin, fit_empirical_ordinal
from dvinets.paircopula import PARAM_NAMES, MixtureParam, inverse_transform
from dvinets.dvine import DvineSpec, boxes_for_data, n_paircopulas
from dvinets.mcmc import (
    ChainState,
    McmcConfig,
    accept_u,
    propose_u,
    run_sampler,
    _block_labels,
)


def binary_series(t_len, seed, persist=0.8):
    rng = stream(seed)
    y = np.empty(t_len, dtype=float)
    y[0] = 0.0
    for t in range(1, t_len):
        stay = rng.uniform() < persist
        y[t] = y[t - 1] if stay else 1.0 - y[t - 1]
    return y


def random_spec(r, p, rng):
    n = n_paircopulas(r, p)
    return DvineSpec(
        r, p,
        tuple(
            MixtureParam(
                rng.uniform(0.1, 0.7), rng.uniform(0.2, 0.9),
                rng.uniform(0.1, 0.7), rng.uniform(0.2, 0.9),
                rng.uniform(0.2, 0.8),
            )
            for _ in range(n)
        ),
    )


class TestAcceptU:
    def test_certain_and_impossible_cases(self):
        rng = stream(1)
        assert accept_u(0.0, rng) is True
        assert accept_u(2.5, rng) is True
        assert accept_u(-math.inf, rng) is False

    def test_acceptance_frequency_matches_ratio(self):
        rng = stream(2)
        ratio = 0.3
        n = 20000
        hits = sum(accept_u(math.log(ratio), rng) for _ in range(n))
        se = math.sqrt(ratio * (1 - ratio) / n)
        assert abs(hits / n - ratio) < 3.5 * se


class TestProposeU:
    def test_proposal_stays_inside_boxes(self):
        rng_data = np.random.default_rng(3)
        y = rng_data.integers(0, 3, 15).astype(float)
        margin = fit_empirical_ordinal(y)
        spec = random_spec(1, 2, np.random.default_rng(4))
        a, b = boxes_for_data(y, [margin], ["discrete"])
        disc = np.ones(a.size, dtype=bool)
        state = ChainState(
            theta_psi=mcmc_mod.transform(spec.param_array()),
            u=0.5 * (a + b),
        )
        u_new, logratio = propose_u(state, (a, b, disc), spec, stream(5))
        assert np.all(u_new >= a) and np.all(u_new <= b)
        assert np.isfinite(logratio)

    def test_independence_proposal_is_exact_conditional(self):
        # under the independence template the joint proposal equals the
        # target conditional; the weight ratio is zero up to the psi-space
        # boundary clamp, which keeps tau at ~1e-8 instead of exactly 0
        y = binary_series(20, seed=6)
        margin = fit_empirical_ordinal(y)
        spec = DvineSpec.independence(1, 1)
        a, b = boxes_for_data(y, [margin], ["discrete"])
        disc = np.ones(a.size, dtype=bool)
        state = ChainState(
            theta_psi=mcmc_mod.transform(spec.param_array()),
            u=0.5 * (a + b),
        )
        for k in range(5):
            u_new, logratio = propose_u(state, (a, b, disc), spec, stream(7, k))
            assert abs(logratio) < 1e-6


class TestRunSampler:
    def test_independence_template_with_frozen_params_accepts_everything(self):
        y = binary_series(30, seed=8)
        margin = fit_empirical_ordinal(y)
        template = DvineSpec.independence(1, 1)
        cfg = McmcConfig(
            burnin=50, iterates=100, seed=1,
            free_mask=np.zeros((1, 5)),
        )
        res = run_sampler(y, [margin], template, cfg, kinds=["discrete"])
        assert res.acc_rate_u == 1.0
        assert np.all(res.acc_rate_theta == 1.0)  # zero-noise proposals count
        assert np.all(res.psi_draws == res.psi_draws[0])  # theta frozen

    def test_seeded_runs_are_bitwise_identical(self):
        y = binary_series(25, seed=9)
        margin = fit_empirical_ordinal(y)
        template = random_spec(1, 1, np.random.default_rng(10))
        cfg = McmcConfig(burnin=100, iterates=150, seed=5)
        a = run_sampler(y, [margin], template, cfg, kinds=["discrete"])
        b = run_sampler(y, [margin], template, cfg, kinds=["discrete"])
        assert np.array_equal(a.psi_draws, b.psi_draws)
        c = run_sampler(
            y, [margin], template,
            McmcConfig(burnin=100, iterates=150, seed=6),
            kinds=["discrete"],
        )
        assert not np.array_equal(a.psi_draws, c.psi_draws)

    def test_adaptation_lands_near_target_acceptance(self):
        y = binary_series(40, seed=11)
        margin = fit_empirical_ordinal(y)
        template = random_spec(1, 1, np.random.default_rng(12))
        cfg = McmcConfig(burnin=2500, iterates=2500, seed=2)
        res = run_sampler(y, [margin], template, cfg, kinds=["discrete"])
        # Robbins-Monro tuning toward 0.234; wide band to stay behavioral
        assert 0.08 <= float(res.acc_rate_theta[0]) <= 0.45
        assert np.all(res.rw_scales > mcmc_mod._SCALE_MIN)
        assert res.stuck is False

    def test_stuck_flag_fires_when_window_threshold_crossed(self, monkeypatch):
        # force the detector with an unreachable rate: any full window flags,
        # and the chain still completes with success-plus-status semantics
        monkeypatch.setattr(mcmc_mod, "STUCK_WINDOW", 40)
        monkeypatch.setattr(mcmc_mod, "STUCK_RATE", 1.1)
        y = binary_series(20, seed=13)
        margin = fit_empirical_ordinal(y)
        template = random_spec(1, 1, np.random.default_rng(13))
        cfg = McmcConfig(burnin=30, iterates=60, seed=3)
        res = run_sampler(y, [margin], template, cfg, kinds=["discrete"])
        assert res.stuck is True
        assert res.stuck_sweep == 40
        assert res.psi_draws.shape == (60, 1, 5)

    def test_draws_file_streams_constrained_values(self, tmp_path):
        y = binary_series(18, seed=14)
        margin = fit_empirical_ordinal(y)
        template = random_spec(1, 2, np.random.default_rng(15))
        path = tmp_path / "draws.csv"
        diag = tmp_path / "diag.json"
        cfg = McmcConfig(burnin=20, iterates=30, seed=4)
        res = run_sampler(
            y, [margin], template, cfg, kinds=["discrete"],
            draws_path=str(path), diagnostics_path=str(diag),
        )
        lines = path.read_text().splitlines()
        labels = _block_labels(template)
        want_header = ["sweep"] + [
            f"{lab}.{nm}" for lab in labels for nm in PARAM_NAMES
        ]
        assert lines[0].split(",") == want_header
        assert len(lines) == 1 + 30
        first = lines[1].split(",")
        assert int(first[0]) == 21  # first post-burnin sweep index
        got = np.array([float(v) for v in first[1:]])
        want = inverse_transform(res.psi_draws[0]).as_array().ravel()
        assert np.array_equal(got, want)  # repr round-trips exactly
        dobj = json.loads(diag.read_text())
        assert dobj["kind"] == "mcmc_diagnostics"
        assert dobj["stuck"] is False
        assert dobj["iterates"] == 30

    def test_block_labels_follow_canonical_order(self):
        spec = DvineSpec.independence(2, 1)
        assert _block_labels(spec) == [
            "k0.1.0", "k1.0.0", "k1.0.1", "k1.1.0", "k1.1.1",
        ]

    def test_mixed_kinds_smoke(self):
        rng = np.random.default_rng(16)
        y = np.column_stack([
            rng.integers(0, 2, 14).astype(float),
            rng.normal(size=14),
        ])
        margins = [
            fit_empirical_ordinal(y[:, 0]),
            ContinuousMargin.from_sample(y[:, 1]),
        ]
        template = DvineSpec.independence(2, 1)
        cfg = McmcConfig(burnin=30, iterates=40, seed=7)
        res = run_sampler(
            y, margins, template, cfg, kinds=["discrete", "continuous"]
        )
        assert res.psi_draws.shape == (40, 5, 5)
        constrained = res.draws_constrained()
        assert constrained.shape == (40, 5, 5)
        assert np.all(constrained[..., [0, 2]] >= 0.0)
        assert np.all(constrained[..., [0, 2]] < 0.99)
        assert np.all((constrained[..., [1, 3, 4]] >= 0.0)
                      & (constrained[..., [1, 3, 4]] <= 1.0))

    def test_config_validation(self):
        with pytest.raises(InputError):
            McmcConfig(burnin=0)
        with pytest.raises(InputError):
            McmcConfig(rw_scales=-0.5)
        y = binary_series(10, seed=17)
        margin = fit_empirical_ordinal(y)
        template = DvineSpec.independence(1, 1)
        with pytest.raises(InputError):
            run_sampler(
                y, [margin], template,
                McmcConfig(burnin=5, iterates=5, free_mask=np.ones((2, 5))),
                kinds=["discrete"],
            )
        with pytest.raises(InputError):
            run_sampler(
                np.column_stack([y, y]), [margin], template,
                McmcConfig(burnin=5, iterates=5), kinds=["discrete"],
            )

    def test_wall_clock_and_zero_width_fields(self):
        y = binary_series(12, seed=18)
        margin = fit_empirical_ordinal(y)
        template = DvineSpec.independence(1, 1)
        cfg = McmcConfig(burnin=10, iterates=10, seed=8)
        res = run_sampler(y, [margin], template, cfg, kinds=["discrete"])
        assert res.wall_seconds > 0.0
        assert res.zero_width_failures == 0
