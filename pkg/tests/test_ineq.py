import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benlab.errors import InsufficientSamples, LatticeBudget
from benlab.evolve import SolverConfig, solve
from benlab.grid import SpectralGrid
from benlab.gwp import smooth_field
from benlab.imethod import IMultiplier
from benlab.ineq import (
    DyadicConfig,
    block_norm_estimate,
    block_sweep,
    bourgain_diagnostics,
    ediff_check,
    m4_bound_check,
    m5_bound_check,
    multiplier_suite,
    product_estimate_probe,
    random_admissible_config,
    resonance_check,
    sigma3_bound_check,
    strichartz_probe,
)
from benlab.spectral import SymbolParams


def test_dyadic_config_validation_and_regimes():
    with pytest.raises(ValueError):
        DyadicConfig(4, 4, 4, -1, 0, 0)
    # comparable frequencies with the resonant modulation: regime (i)
    cfg_i = DyadicConfig(5, 5, 5, 15, 0, 0)
    assert cfg_i.regime() == "i"
    assert cfg_i.is_admissible()
    # two large, one small, resonance carried opposite the small one: (ii)
    cfg_ii = DyadicConfig(8, 8, 2, 0, 0, 18)
    assert cfg_ii.regime() == "ii"
    # generic: (iii)
    cfg_iii = DyadicConfig(8, 8, 2, 5, 4, 3)
    assert cfg_iii.regime() == "iii"
    assert all(c.bound_value() > 0 for c in (cfg_i, cfg_ii, cfg_iii))


def test_inadmissible_configs():
    assert not DyadicConfig(3, 9, 4, 0, 0, 0).is_admissible()  # spread ks
    assert not DyadicConfig(5, 5, 5, 20, 0, 0).is_admissible()  # jmax off target
    assert not DyadicConfig(4, 8, 6, 2, 1, 0).is_admissible()


def test_random_admissible_config_is_admissible():
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert random_admissible_config(rng).is_admissible()


def test_block_norm_estimate_determinism_and_budget(params):
    cfg = DyadicConfig(5, 5, 5, 15, 0, 0)
    a = block_norm_estimate(cfg, params, trials=8, seed=3)
    b = block_norm_estimate(cfg, params, trials=8, seed=3)
    assert a == b
    assert a > 0.0
    with pytest.raises(ValueError):
        block_norm_estimate(cfg, params, cells=5)
    with pytest.raises(LatticeBudget):
        block_norm_estimate(cfg, params, cells=64, pair_budget=100)


def test_block_sweep_report(params):
    rep = block_sweep(params, count=8, trials=8, seed=0)
    assert rep.bound_id == "block-estimates"
    assert rep.samples == 8
    assert len(rep.extras["rows"]) == 8
    assert rep.fitted_constant > 0.0
    d = rep.to_dict()
    assert d["worst_config"] is not None and "ks" in d["worst_config"]


def test_resonance_check_identities(params):
    rep = resonance_check(params, samples=20000, seed=0)
    assert rep.violations_at_C == 0
    assert rep.extras["pigeonhole_violations"] == 0
    assert rep.extras["size_violations"] == 0
    assert 1.0 / 8.0 <= rep.extras["min_ratio"] <= rep.fitted_constant <= 8.0


def test_sigma3_bound_check(params):
    im = IMultiplier(N=16.0, s=-0.5)
    rep = sigma3_bound_check(im, params, samples=20000, seed=0)
    assert rep.bound_id == "sigma3-zeroth"
    assert 0.0 < rep.fitted_constant < 10.0
    again = sigma3_bound_check(im, params, samples=20000, seed=0)
    assert again.fitted_constant == rep.fitted_constant


def test_m4_m5_bound_checks(params):
    im = IMultiplier(N=16.0, s=-0.5)
    rep4 = m4_bound_check(im, params, samples=20000, seed=1)
    assert rep4.bound_id == "m4-quotient"
    assert 0.0 < rep4.fitted_constant < 100.0
    # |v4 - h4| within a bounded factor of the pair-product factorization
    assert rep4.extras["factorization_min"] > 0.05
    assert rep4.extras["factorization_max"] < 20.0
    rep5 = m5_bound_check(im, params, samples=4000, seed=2)
    assert rep5.bound_id == "m5-pointwise"
    assert 0.0 < rep5.fitted_constant < 100.0


def test_multiplier_suite_keys(params):
    im = IMultiplier(N=16.0, s=-0.5)
    suite = multiplier_suite(im, params, seed=0, samples=(5000, 5000, 1000))
    assert set(suite) == {"sigma3", "m4", "m5"}
    assert all(rep.violations_at_C == 0 for rep in suite.values())


def test_ediff_check_slopes(params):
    im = IMultiplier(N=8.0, s=-0.5)
    grid = SpectralGrid(modes=32, length=2.0 * np.pi)
    rep = ediff_check(im, params, grid, samples=10, seed=0)
    assert rep.extras["min_cubic_slope"] > 2.9
    assert rep.extras["min_quartic_slope"] > 3.9
    assert rep.fitted_constant > 0.0
    assert rep.worst_config is not None


def test_strichartz_probe_and_product_probe(params):
    rep = strichartz_probe(params, k=10, trials=2, seed=0, nt=32)
    assert rep.bound_id == "free-evolution"
    assert rep.fitted_constant > 0.0
    with pytest.raises(ValueError):
        strichartz_probe(params, k=5)
    rep2 = product_estimate_probe([3, 4, 5, 10, 10], params, trials=1, seed=0, nt=16)
    assert rep2.bound_id == "product-estimate"
    assert rep2.fitted_constant >= 0.0
    with pytest.raises(ValueError):
        product_estimate_probe([3, 4, 5, 6, 10], params)


def test_bourgain_diagnostics(params):
    grid = SpectralGrid(modes=32, length=2.0 * np.pi)
    u0 = smooth_field(grid, xi0=6.0, norm=0.3, seed=0)
    traj = solve(u0, params, SolverConfig(dt=1e-3, t_end=0.5, record_stride=25))
    rep = bourgain_diagnostics(traj, s=-0.5, window=(0.0, 0.5))
    assert rep.fbar > 0.0
    assert rep.xbar0 >= 0.0
    assert rep.l2 > 0.0
    with pytest.raises(InsufficientSamples):
        bourgain_diagnostics(traj, s=-0.5, window=(0.0, 0.05))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_admissible_draw_property(seed):
    rng = np.random.default_rng(seed)
    cfg = random_admissible_config(rng)
    ks = sorted(cfg.ks)
    assert ks[2] - ks[1] <= 3
    assert cfg.bound_value() > 0.0
