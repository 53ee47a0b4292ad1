from fractions import Fraction

import numpy as np
import pytest

from benlab.errors import InfeasiblePlan, ScalingFailed
from benlab.evolve import SolverConfig, solve
from benlab.grid import RealField, SpectralGrid
from benlab.gwp import (
    GwpPlan,
    almost_conservation_scan,
    growth_experiment,
    illposed_probe,
    packet_field,
    rough_field,
    run_gwp_iteration,
    scaling_exponents,
    select_scaling,
    smooth_field,
    third_iterate,
)
from benlab.spectral import SymbolParams, dispersion_symbol, sobolev_norm


def test_rough_field_properties():
    grid = SpectralGrid(modes=64, length=2.0 * np.pi)
    u = rough_field(grid, s=-0.5, norm=0.7, seed=3)
    assert sobolev_norm(u, -0.5) == pytest.approx(0.7, rel=1e-12)
    assert u.mean() == 0.0
    assert u.is_conjugate_symmetric()
    assert np.all(u.coeffs[~grid.dealias_mask] == 0.0)


def test_smooth_field_properties():
    grid = SpectralGrid(modes=64, length=2.0 * np.pi)
    u = smooth_field(grid, xi0=5.0, norm=0.2, seed=1)
    assert u.l2_norm() == pytest.approx(0.2, rel=1e-12)
    assert u.mean() == 0.0
    # Gaussian envelope: negligible mass beyond 4*xi0
    xi = grid.wavenumbers
    tail = np.sum(np.abs(u.coeffs[np.abs(xi) > 20.0]) ** 2)
    assert tail < 1e-8 * np.sum(np.abs(u.coeffs) ** 2)


def test_scaling_exponents_rational():
    n_exp, lam_exp = scaling_exponents(-0.75)
    assert n_exp == Fraction(4, 3)
    assert lam_exp == Fraction(-1, 1)
    n_exp0, lam_exp0 = scaling_exponents(0.0)
    assert n_exp0 == Fraction(12, 45)
    assert lam_exp0 == 0
    with pytest.raises(InfeasiblePlan):
        scaling_exponents(-0.8)
    with pytest.raises(InfeasiblePlan):
        scaling_exponents(0.1)


def test_select_scaling_plan():
    plan = select_scaling(T=10.0, s=-0.75, phi_norm=0.05, eps0=0.05)
    assert plan.N_exponent == Fraction(4, 3)
    assert plan.N == 32.0
    assert plan.lam == pytest.approx(1.0 / 32.0)
    assert plan.M == int(np.ceil(plan.lam**-3 * plan.T))
    # defining inequality: the iteration count fits the E4 budget
    assert plan.N**3.75 > plan.lam**-3 * plan.T
    assert plan.budget_ratio() < 1.0
    assert plan.to_dict()["N_exponent"] == "4/3"
    with pytest.raises(InfeasiblePlan):
        select_scaling(T=-1.0, s=-0.75, phi_norm=0.05)
    with pytest.raises(ValueError):
        GwpPlan(T=1.0, s=-0.75, phi_norm=1.0, eps0=0.05, N=32.0, lam=2.0, M=1,
                N_exponent=Fraction(4, 3), lambda_exponent=Fraction(-1))


def test_run_gwp_iteration_smoke(params):
    grid = SpectralGrid(modes=64, length=2.0 * np.pi)
    phi = rough_field(grid, s=-0.75, norm=0.05, seed=0)
    plan = select_scaling(T=2.0, s=-0.75, phi_norm=0.05, eps0=0.05)
    rep = run_gwp_iteration(plan, phi, params, dt=0.1, max_steps=2)
    assert rep.stats["steps_run"] == 2
    assert max(rep.e2) < rep.ceiling
    assert len(rep.e4_increments) == 2
    assert rep.growth_ratio > 0.0
    # oversized data violates the smallness precondition
    big = rough_field(grid, s=-0.75, norm=5.0, seed=0)
    with pytest.raises(ScalingFailed):
        run_gwp_iteration(plan, big, params, max_steps=1)


def test_growth_experiment_zero_and_smoke(params):
    grid = SpectralGrid(modes=32, length=2.0 * np.pi)
    zero = RealField.zero(grid)
    assert growth_experiment(zero, params, T=1.0)["ratio"] == 0.0
    u0 = rough_field(grid, s=-0.75, norm=0.1, seed=0)
    rep = growth_experiment(u0, params, s=-0.75, T=0.5, dt=0.0025, record_stride=50)
    assert 0.0 < rep["ratio"] <= 1.05
    assert len(rep["times"]) == len(rep["norms"])


def test_almost_conservation_scan_monotone(params):
    grid = SpectralGrid(modes=64, length=2.0 * np.pi)
    u0 = smooth_field(grid, xi0=6.0, norm=0.2, seed=0)
    scan = almost_conservation_scan(u0, params, s=-0.5, n_values=[4, 16],
                                    T=0.2, dt=0.002, records=4)
    assert scan[16.0] < scan[4.0]


def test_packet_field():
    grid = SpectralGrid(modes=96, length=2.0 * np.pi)
    phi = packet_field(grid, s=-1.0, nf=16)
    assert phi.mean() == 0.0
    nz = np.nonzero(np.abs(phi.coeffs))[0] - grid.modes
    assert sorted(nz.tolist()) == [-18, -17, -16, 16, 17, 18]
    assert np.max(np.abs(phi.coeffs)) == pytest.approx(16.0**0.5, rel=1e-12)
    with pytest.raises(ValueError):
        packet_field(grid, s=-1.0, nf=grid.dealias_cutoff)


def test_third_iterate_against_variational_integration(params):
    """Oracle: integrate the variational chain u1' = L u1,
    u2' = L u2 + B(u1, u1), u3' = L u3 + 2 B(u1, u2) in the interaction
    picture with fine RK4 and compare at time T."""
    grid = SpectralGrid(modes=96, length=2.0 * np.pi)
    phi = packet_field(grid, s=-1.0, nf=16)
    # T and h sized so the fastest oscillatory phase in the variational
    # right-hand side (~3*a*b*(a+b) for carrier modes a, b) is resolved
    T = 0.01
    p = dispersion_symbol(params, grid.wavenumbers)
    xi = grid.wavenumbers
    mask = grid.dealias_mask

    def B(a, b):
        # coefficients of -d/dx(ab), truncated
        n = grid.size
        ua = np.real(np.fft.ifft(np.fft.ifftshift(a)) * n)
        ub = np.real(np.fft.ifft(np.fft.ifftshift(b)) * n)
        prod = np.fft.fftshift(np.fft.fft(ua * ub)) / n
        return -1j * xi * np.where(mask, prod, 0.0)

    # interaction picture: v_k(t) = e^{-itp} u_k(t)
    def rhs(t, v2, v3):
        u1 = np.exp(1j * t * p) * phi.coeffs
        u2 = np.exp(1j * t * p) * v2
        dv2 = np.exp(-1j * t * p) * B(u1, u1)
        dv3 = np.exp(-1j * t * p) * 2.0 * B(u1, u2)
        return dv2, dv3

    n_steps = 4000
    h = T / n_steps
    v2 = np.zeros(grid.size, dtype=np.complex128)
    v3 = np.zeros(grid.size, dtype=np.complex128)
    for i in range(n_steps):
        t = i * h
        a2, a3 = rhs(t, v2, v3)
        b2, b3 = rhs(t + 0.5 * h, v2 + 0.5 * h * a2, v3 + 0.5 * h * a3)
        c2, c3 = rhs(t + 0.5 * h, v2 + 0.5 * h * b2, v3 + 0.5 * h * b3)
        d2, d3 = rhs(t + h, v2 + h * c2, v3 + h * c3)
        v2 = v2 + (h / 6.0) * (a2 + 2.0 * b2 + 2.0 * c2 + d2)
        v3 = v3 + (h / 6.0) * (a3 + 2.0 * b3 + 2.0 * c3 + d3)
    u3_ref = np.exp(1j * T * p) * v3
    u3 = third_iterate(phi, params, T)
    err = np.linalg.norm(u3 - u3_ref) / np.linalg.norm(u3_ref)
    assert err < 1e-5


def test_third_iterate_matches_solver_derivative(params):
    """FD third derivative through the solver at a low, fully resolved
    frequency agrees with 6 * third_iterate."""
    grid = SpectralGrid(modes=48, length=2.0 * np.pi)
    phi = packet_field(grid, s=-0.5, nf=8)
    T = 0.05
    delta = 1e-3
    finals = {}
    for mult in (2.0, 1.0, -1.0, -2.0):
        data = RealField(grid, mult * delta * phi.coeffs)
        traj = solve(data, params, SolverConfig(dt=1e-5, t_end=T, record_stride=10**9))
        finals[mult] = traj.states[-1].coeffs
    third = (finals[2.0] - 2.0 * finals[1.0] + 2.0 * finals[-1.0] - finals[-2.0]) / (
        2.0 * delta**3
    )
    exact = 6.0 * third_iterate(phi, params, T)
    rel = np.linalg.norm(third - exact) / np.linalg.norm(exact)
    assert rel < 0.02


def test_illposed_probe_structure(params):
    rep = illposed_probe(
        s=-1.0,
        freq_list=[8, 16],
        params=params,
        modes=96,
        T=0.2,
        dt=1e-4,
        fd_check_nf=8,
        fd_modes=48,
    )
    assert rep["method"] == "exact-trilinear"
    assert [r["nf"] for r in rep["rows"]] == [8, 16]
    assert all(r["norm"] > 0 for r in rep["rows"])
    assert rep["fd_check"]["rel_err"] is not None
    with pytest.raises(ValueError):
        illposed_probe(s=0.5, freq_list=[8])
