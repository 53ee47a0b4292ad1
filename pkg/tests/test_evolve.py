import numpy as np
import pytest

from benlab.errors import NonFinite
from benlab.evolve import (
    SolverConfig,
    Trajectory,
    duhamel_residual,
    load_trajectory,
    nonlinear_coeffs,
    rescale_field,
    rescale_params,
    save_trajectory,
    solve,
    step_ifrk4,
)
from benlab.grid import RealField, SpectralGrid, enforce_conjugate_symmetry
from benlab.gwp import smooth_field
from benlab.spectral import SymbolParams, dispersion_symbol, free_propagator


def _random_field(grid, seed=0, scale=0.1):
    rng = np.random.default_rng(seed)
    c = scale * (rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size))
    c = enforce_conjugate_symmetry(c) * grid.dealias_mask
    c[grid.modes] = 0.0
    return RealField(grid, c)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0, t_end=1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_end=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_end=1.0, record_stride=0)
    with pytest.raises(ValueError):
        solve(
            _random_field(SpectralGrid(modes=8, length=2.0 * np.pi)),
            SymbolParams(alpha=1.0, beta=1.0),
            SolverConfig(dt=0.3, t_end=1.0),
        )


def test_nonlinear_coeffs_oracle():
    """-(u^2)_x coefficients against a brute-force truncated convolution."""
    grid = SpectralGrid(modes=8, length=2.0 * np.pi)
    u = _random_field(grid, seed=1, scale=1.0)
    nl = nonlinear_coeffs(u.coeffs, grid, dealias=True)
    K = grid.modes
    expected = np.zeros(grid.size, dtype=np.complex128)
    for m in range(-grid.dealias_cutoff, grid.dealias_cutoff + 1):
        acc = 0.0 + 0.0j
        for m1 in range(-K, K + 1):
            m2 = m - m1
            if abs(m2) <= K:
                acc += u.coeffs[m1 + K] * u.coeffs[m2 + K]
        expected[m + K] = -1j * grid.wavenumbers[m + K] * acc
    np.testing.assert_allclose(nl, expected, atol=1e-13)


def test_step_reduces_to_free_flow_on_linear_data():
    """Data supported above the 2/3 cutoff has a fully aliased square, so the
    dealiased nonlinearity vanishes and one step equals the free propagator."""
    grid = SpectralGrid(modes=16, length=2.0 * np.pi)
    params = SymbolParams(alpha=1.0, beta=1.0)
    c = np.zeros(grid.size, dtype=np.complex128)
    m = grid.dealias_cutoff  # single high mode: square lands at 0 and +-2m
    c[grid.modes + m] = 0.3
    c[grid.modes - m] = 0.3
    u = RealField(grid, c)
    assert np.max(np.abs(nonlinear_coeffs(c, grid))) < 1e-15
    dt = 0.01
    stepped = step_ifrk4(u, dt, params)
    free = free_propagator(u, dt, params)
    # the only nonlinear image inside the cutoff is the zero mode, where xi=0
    np.testing.assert_allclose(stepped.coeffs, free.coeffs, atol=1e-13)


def test_step_against_reference_integration():
    """Single-step local error vs a converged substep reference of
    c' = i p c + nl(c): magnitude small and 5th-order in dt."""
    grid = SpectralGrid(modes=12, length=2.0 * np.pi)
    params = SymbolParams(alpha=1.0, beta=1.0)
    u = _random_field(grid, seed=2, scale=0.2)
    p = dispersion_symbol(params, grid.wavenumbers)

    def reference(c0, dt, n_sub=2048):
        c = c0.copy()
        h = dt / n_sub
        for _ in range(n_sub):
            k1 = 1j * p * c + nonlinear_coeffs(c, grid)
            k2 = 1j * p * (c + 0.5 * h * k1) + nonlinear_coeffs(c + 0.5 * h * k1, grid)
            k3 = 1j * p * (c + 0.5 * h * k2) + nonlinear_coeffs(c + 0.5 * h * k2, grid)
            k4 = 1j * p * (c + h * k3) + nonlinear_coeffs(c + h * k3, grid)
            c = c + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return c

    errs = []
    for dt in (2e-3, 1e-3):
        stepped = step_ifrk4(u, dt, params)
        ref = reference(u.coeffs, dt)
        errs.append(np.linalg.norm(stepped.coeffs - ref) / np.linalg.norm(ref))
    assert errs[0] < 1e-6
    order = np.log2(errs[0] / errs[1])
    assert order > 4.5  # local truncation order 5


def test_solve_records_and_conserves():
    grid = SpectralGrid(modes=32, length=2.0 * np.pi)
    params = SymbolParams(alpha=1.0, beta=1.0)
    u0 = _random_field(grid, seed=3, scale=0.05)
    traj = solve(u0, params, SolverConfig(dt=1e-4, t_end=0.01, record_stride=20))
    assert traj.times == pytest.approx([0.0, 0.002, 0.004, 0.006, 0.008, 0.01])
    assert len(traj.states) == 6
    assert abs(traj.stats["l2_drift"][-1]) < 1e-9
    # momentum (zero mode) conserved exactly
    assert traj.states[-1].mean() == u0.mean()
    for st in traj.states:
        assert st.is_conjugate_symmetric(tol=1e-10)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_solve_blowup_raises_with_time():
    grid = SpectralGrid(modes=32, length=2.0 * np.pi)
    params = SymbolParams(alpha=1.0, beta=1.0)
    u0 = _random_field(grid, seed=4, scale=50.0)
    with pytest.raises(NonFinite) as err:
        solve(u0, params, SolverConfig(dt=0.5, t_end=50.0))
    assert err.value.time is not None and err.value.time > 0


def test_duhamel_residual_converges_with_recording():
    grid = SpectralGrid(modes=8, length=2.0 * np.pi)
    params = SymbolParams(alpha=1.0, beta=1.0)
    u0 = _random_field(grid, seed=5, scale=0.2)
    res = []
    for stride in (8, 4):
        traj = solve(u0, params, SolverConfig(dt=5e-5, t_end=0.02, record_stride=stride))
        res.append(duhamel_residual(traj))
    # trapezoid quadrature: halving the recording interval gains ~4x
    assert res[1] < res[0] / 3.0
    assert res[1] < 1e-4


def test_rescale_field_scaling_laws():
    grid = SpectralGrid(modes=16, length=2.0 * np.pi)
    u = _random_field(grid, seed=6, scale=1.0)
    lam = 0.25
    v = rescale_field(u, lam)
    assert v.grid.length == pytest.approx(grid.length / lam)
    # u -> lam^2 u(lam x): L2 norm scales by lam^(3/2)
    assert v.l2_norm() == pytest.approx(lam**1.5 * u.l2_norm(), rel=1e-12)
    back = rescale_field(v, 1.0 / lam)
    assert back.grid.length == pytest.approx(grid.length)
    np.testing.assert_allclose(back.coeffs, u.coeffs, atol=1e-14)
    with pytest.raises(Exception):
        rescale_field(u, -1.0)
    scaled = rescale_params(SymbolParams(alpha=1.0, beta=1.0), lam)
    assert scaled.alpha == pytest.approx(lam)


def test_rescaled_dynamics_commute_with_scaling():
    """u_lam(x, t) = lam^2 u(lam x, lam^3 t) solves the rescaled equation."""
    lam = 0.5
    grid = SpectralGrid(modes=24, length=2.0 * np.pi)
    params = SymbolParams(alpha=1.0, beta=1.0)
    u0 = smooth_field(grid, xi0=4.0, norm=0.2, seed=7)
    dt = 1e-4
    t_end = 0.02
    traj = solve(u0, params, SolverConfig(dt=dt, t_end=t_end, record_stride=10**9))
    direct = rescale_field(traj.states[-1], lam)
    v0 = rescale_field(u0, lam)
    p_lam = rescale_params(params, lam)
    traj2 = solve(
        v0, p_lam, SolverConfig(dt=dt / lam**3, t_end=t_end / lam**3, record_stride=10**9)
    )
    err = np.linalg.norm(traj2.states[-1].coeffs - direct.coeffs)
    assert err / np.linalg.norm(direct.coeffs) < 1e-7


def test_save_load_round_trip(tmp_path):
    grid = SpectralGrid(modes=16, length=2.0 * np.pi)
    params = SymbolParams(alpha=1.0, beta=1.0, gamma=0.25)
    u0 = _random_field(grid, seed=8, scale=0.1)
    traj = solve(u0, params, SolverConfig(dt=1e-3, t_end=0.01, record_stride=5))
    save_trajectory(traj, str(tmp_path / "traj"))
    loaded = load_trajectory(str(tmp_path / "traj"))
    assert loaded.grid == traj.grid
    assert loaded.params.alpha == params.alpha
    assert loaded.params.gamma == params.gamma
    assert loaded.times == traj.times
    assert loaded.scheme == traj.scheme
    for a, b in zip(loaded.states, traj.states):
        np.testing.assert_array_equal(a.coeffs, b.coeffs)


def test_trajectory_state_matrix():
    grid = SpectralGrid(modes=4, length=2.0 * np.pi)
    fields = [RealField.zero(grid) for _ in range(3)]
    traj = Trajectory(
        grid=grid,
        params=SymbolParams(alpha=1.0, beta=1.0),
        times=[0.0, 1.0, 2.0],
        states=fields,
        dt=1.0,
    )
    assert traj.state_matrix().shape == (3, grid.size)
    with pytest.raises(ValueError):
        Trajectory(
            grid=grid,
            params=SymbolParams(alpha=1.0, beta=1.0),
            times=[0.0],
            states=fields,
            dt=1.0,
        )
