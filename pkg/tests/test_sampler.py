import math

import numpy as np
import pytest
from scipy import stats

from gmrf_curvature.lattice import Lattice, ModelParams, NeighborhoodSpec, init_lattice
from gmrf_curvature.sampler import (FieldChain, SamplerConfig, SamplerMode, SweepOrder,
                                    estimate_params, local_conditional_logdensity,
                                    metropolis_sweep, natural_decomposition,
                                    pseudo_log_likelihood, sweep_values)

GIBBS = SamplerConfig(mode=SamplerMode.GIBBS)
HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def test_logdensity_standard_normal_at_zero():
    v = local_conditional_logdensity(0.0, np.arange(8.0), ModelParams(0.0, 1.0, 0.0))
    assert v == pytest.approx(-0.9189385332046727, abs=1e-15)


def test_logdensity_at_conditional_mode():
    p = ModelParams(0.3, 2.0, 0.07)
    nb = np.linspace(-1, 2, 8)
    x = p.mu + p.beta * np.sum(nb - p.mu)
    assert local_conditional_logdensity(x, nb, p) == pytest.approx(-0.5 * math.log(2 * math.pi * 2.0))


def test_logdensity_hand_value():
    v = local_conditional_logdensity(0.0, np.ones(8), ModelParams(0.0, 1.0, 0.1))
    assert v == pytest.approx(-HALF_LOG_2PI - 0.5 * 0.8 ** 2, abs=1e-14)
    assert v == pytest.approx(-1.2389385332046727, abs=1e-12)


def test_logdensity_rejects_degenerate():
    with pytest.raises(ValueError):
        local_conditional_logdensity(0.0, np.zeros(8), ModelParams(0.0, 0.0, 0.0))


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(proposal_std=0.0)
    with pytest.raises(ValueError):
        SamplerConfig(mode="metropolis")
    assert SamplerConfig(mode="gibbs").mode is SamplerMode.GIBBS


@pytest.mark.parametrize("order", [SweepOrder.RASTER, SweepOrder.CHECKERBOARD])
def test_gibbs_beta0_marginal(order):
    p = ModelParams(2.0, 3.0, 0.0)
    lat = init_lattice(64, ModelParams(0.0, 1.0, 0.0), seed=1)
    rng = np.random.default_rng(2)
    cfg = SamplerConfig(mode=SamplerMode.GIBBS, sweep_order=order)
    for _ in range(5):
        sweep_values(lat, p, cfg, rng)
    x = lat.values
    n = x.size
    assert abs(x.mean() - 2.0) < 3 * math.sqrt(3.0 / n)
    # var of the sample variance of a Gaussian is 2 sigma^4 / n
    assert abs(x.var() - 3.0) < 3 * math.sqrt(2 * 9.0 / n)


def test_gibbs_single_site_ks():
    p = ModelParams(-1.0, 0.5, 0.0)
    lat = init_lattice(5, ModelParams(0.0, 1.0, 0.0), seed=5)
    rng = np.random.default_rng(6)
    trace = np.empty(3000)
    for i in range(trace.size):
        sweep_values(lat, p, GIBBS, rng)
        trace[i] = lat.values[2, 3]
    res = stats.kstest(trace, "norm", args=(p.mu, math.sqrt(p.sigma_sq)))
    assert res.pvalue > 0.01


def test_mh_tiny_proposal_accepts_everything():
    lat = init_lattice(32, ModelParams(0.0, 1.0, 0.0), seed=7)
    before = lat.values.copy()
    cfg = SamplerConfig(proposal_std=1e-9)
    acc = sweep_values(lat, ModelParams(0.0, 1.0, 0.1), cfg, np.random.default_rng(8))
    assert acc > 0.99
    assert np.max(np.abs(lat.values - before)) < 1e-7


def test_mh_targets_conditional_at_beta0():
    p = ModelParams(1.0, 2.0, 0.0)
    lat = init_lattice(64, ModelParams(0.0, 1.0, 0.0), seed=9)
    rng = np.random.default_rng(10)
    for _ in range(60):
        acc = sweep_values(lat, p, SamplerConfig(), rng)
    assert 0.3 < acc < 0.9
    assert abs(lat.values.mean() - 1.0) < 0.1
    assert abs(lat.values.var() - 2.0) < 0.15


def _nn_corr(x):
    d = x - x.mean()
    return float(np.mean(d * np.roll(d, 1, axis=1)) / np.mean(d * d))


def test_neighbor_correlation_increases_with_beta():
    corr = {}
    for beta in (0.05, 0.2):
        lat = init_lattice(128, ModelParams(0.0, 1.0, 0.0), seed=11)
        chain = FieldChain(lat, GIBBS, np.random.default_rng(12))
        for _ in range(200):
            chain.sweep(beta)
        corr[beta] = _nn_corr(chain.lattice.values)
    assert corr[0.05] > 0
    assert corr[0.2] > corr[0.05]


def test_metropolis_sweep_returns_copy():
    lat = init_lattice(16, ModelParams(0.0, 1.0, 0.0), seed=13)
    before = lat.values.copy()
    out = metropolis_sweep(lat, ModelParams(0.0, 1.0, 0.1), GIBBS, np.random.default_rng(0))
    assert np.array_equal(lat.values, before)
    assert not np.array_equal(out.values, before)


@pytest.mark.parametrize("cfg", [GIBBS, SamplerConfig(),
                                 SamplerConfig(sweep_order=SweepOrder.CHECKERBOARD)])
def test_sweeps_deterministic(cfg):
    p = ModelParams(0.0, 1.0, 0.11)
    outs = []
    for _ in range(2):
        lat = init_lattice(20, ModelParams(0.0, 1.0, 0.0), seed=14)
        rng = np.random.default_rng(15)
        for _ in range(3):
            sweep_values(lat, p, cfg, rng)
        outs.append(lat.values.tobytes())
    assert outs[0] == outs[1]


def test_checkerboard_side_must_match_coloring():
    cfg = SamplerConfig(mode=SamplerMode.GIBBS, sweep_order=SweepOrder.CHECKERBOARD)
    with pytest.raises(ValueError):
        sweep_values(init_lattice(7, ModelParams(0.0, 1.0, 0.0), 0), ModelParams(0, 1, 0.1), cfg,
                     np.random.default_rng(0))
    lat = Lattice(np.zeros((9, 9)), NeighborhoodSpec(3))
    sweep_values(lat, ModelParams(0.0, 1.0, 0.05), cfg, np.random.default_rng(0))
    assert np.all(np.isfinite(lat.values))


def test_estimate_constant_lattice_degenerate():
    p = estimate_params(Lattice(np.full((6, 6), 7.0)), 0.1)
    assert p.mu == 7.0 and p.sigma_sq == 0.0 and p.degenerate


def test_estimate_two_point():
    x = (np.add.outer(np.arange(6), np.arange(6)) % 2).astype(float)
    p = estimate_params(Lattice(x), 0.0)
    assert p.mu == 0.5 and p.sigma_sq == 0.25


def test_estimate_permutation_invariant(rng):
    x = rng.normal(size=(9, 9))
    a = estimate_params(Lattice(x), 0.0)
    b = estimate_params(Lattice(rng.permutation(x.ravel()).reshape(9, 9)), 0.0)
    assert a.mu == pytest.approx(b.mu, abs=1e-15)
    assert a.sigma_sq == pytest.approx(b.sigma_sq, rel=1e-14)


def test_natural_params_beta0():
    lat = init_lattice(8, ModelParams(0.0, 1.0, 0.0), seed=1)
    nd = natural_decomposition(lat, ModelParams(1.5, 2.0, 0.0))
    assert np.allclose(nd.c, [1.5 / 2.0, -1 / 4.0, 0, 0, 0], atol=0, rtol=1e-15)
    assert nd.c.shape == nd.t.shape == (5,)


def test_natural_stats_zero_lattice():
    nd = natural_decomposition(Lattice(np.zeros((6, 6))), ModelParams(0.0, 1.0, 0.2))
    assert np.array_equal(nd.t, np.zeros(5))


def test_pseudo_likelihood_zero_lattice():
    v = pseudo_log_likelihood(Lattice(np.zeros((5, 5))), ModelParams(0.0, 1.0, 0.0))
    assert v == pytest.approx(25 * -HALF_LOG_2PI, rel=1e-15)


def test_pseudo_likelihood_is_sum_of_conditionals(rng):
    lat = Lattice(rng.normal(size=(6, 6)))
    p = ModelParams(0.2, 1.3, 0.09)
    from gmrf_curvature.lattice import neighbors
    total = sum(
        local_conditional_logdensity(lat.values[r, c],
                                     [lat.values[i, j] for i, j in neighbors(lat, r, c)], p)
        for r in range(6) for c in range(6)
    )
    assert pseudo_log_likelihood(lat, p) == pytest.approx(total, rel=1e-12)


def test_pseudo_likelihood_mle_mu_at_beta0(rng):
    lat = Lattice(rng.normal(3.0, 1.0, size=(10, 10)))
    m = lat.values.mean()
    best = pseudo_log_likelihood(lat, ModelParams(m, 1.0, 0.0))
    for shift in (-1e-3, 1e-3):
        assert pseudo_log_likelihood(lat, ModelParams(m + shift, 1.0, 0.0)) < best


def test_exponential_family_identity_small(rng):
    for _ in range(20):
        lat = Lattice(rng.normal(rng.normal(), 2.0, size=(8, 8)))
        p = ModelParams(rng.normal(), rng.uniform(0.3, 3.0), rng.uniform(0.0, 0.3))
        pl = pseudo_log_likelihood(lat, p)
        assert natural_decomposition(lat, p).log_value() == pytest.approx(pl, rel=1e-8)


def test_field_chain_rescale_matches_raw_below_critical():
    cfg = SamplerConfig(mode=SamplerMode.GIBBS)
    raw = FieldChain(init_lattice(24, ModelParams(0.0, 1.0, 0.0), 1), cfg,
                     np.random.default_rng(2), rescale=False)
    scaled = FieldChain(init_lattice(24, ModelParams(0.0, 1.0, 0.0), 1), cfg,
                        np.random.default_rng(2), rescale=True)
    for beta in np.linspace(0.0, 0.1, 30):
        raw.sweep(beta)
        scaled.sweep(beta)
    x = raw.lattice.values
    z = (x - x.mean()) / x.std()
    assert np.allclose(scaled.lattice.values, z, atol=1e-9)
    assert scaled.log_scale == pytest.approx(math.log(x.std()), abs=1e-9)


def test_field_chain_rescale_needs_reestimate():
    with pytest.raises(ValueError):
        FieldChain(init_lattice(8, ModelParams(0, 1, 0), 0), GIBBS, np.random.default_rng(0),
                   reestimate=False, rescale=True)
