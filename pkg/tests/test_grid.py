import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benlab.errors import GridMismatch
from benlab.grid import (
    RealField,
    SpectralGrid,
    dealiased_product,
    enforce_conjugate_symmetry,
    require_same_grid,
)


def _random_field(grid, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    c = scale * (rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size))
    return RealField(grid, enforce_conjugate_symmetry(c))


def test_grid_basics():
    grid = SpectralGrid(modes=16, length=2.0 * np.pi)
    assert grid.size == 33
    xi = grid.wavenumbers
    assert xi[0] == -16.0 and xi[-1] == 16.0 and xi[grid.modes] == 0.0
    assert np.all(np.diff(xi) > 0)
    assert grid.dealias_cutoff == 10
    mask = grid.dealias_mask
    assert np.array_equal(mask, mask[::-1])
    assert int(mask.sum()) == 2 * grid.dealias_cutoff + 1


def test_grid_validation():
    with pytest.raises(ValueError):
        SpectralGrid(modes=0, length=1.0)
    with pytest.raises(ValueError):
        SpectralGrid(modes=4, length=0.0)
    grid = SpectralGrid(modes=4, length=1.0)
    with pytest.raises(ValueError):
        RealField(grid, np.zeros(5))


def test_physical_round_trip():
    grid = SpectralGrid(modes=12, length=2.0 * np.pi)
    rng = np.random.default_rng(1)
    values = rng.standard_normal(grid.size)
    f = RealField.from_physical(grid, values)
    assert f.is_conjugate_symmetric()
    np.testing.assert_allclose(f.to_physical(), values, atol=1e-12)


def test_from_function_single_mode():
    grid = SpectralGrid(modes=8, length=2.0 * np.pi)
    f = RealField.from_function(grid, lambda x: np.cos(3.0 * x))
    expected = np.zeros(grid.size, dtype=np.complex128)
    expected[grid.modes + 3] = 0.5
    expected[grid.modes - 3] = 0.5
    np.testing.assert_allclose(f.coeffs, expected, atol=1e-14)


def test_parseval():
    grid = SpectralGrid(modes=20, length=2.0 * np.pi)
    f = _random_field(grid, seed=2)
    u = f.to_physical()
    discrete = np.sqrt(np.sum(u**2) * grid.length / grid.size)
    assert f.l2_norm() == pytest.approx(discrete, rel=1e-12)


def test_mean_is_zero_mode():
    grid = SpectralGrid(modes=8, length=2.0 * np.pi)
    f = RealField.from_function(grid, lambda x: 1.5 + np.sin(x))
    assert f.mean() == pytest.approx(1.5, abs=1e-13)


def test_enforce_conjugate_symmetry_is_projection():
    rng = np.random.default_rng(3)
    c = rng.standard_normal(21) + 1j * rng.standard_normal(21)
    once = enforce_conjugate_symmetry(c)
    np.testing.assert_allclose(enforce_conjugate_symmetry(once), once, atol=1e-15)
    grid = SpectralGrid(modes=10, length=2.0 * np.pi)
    assert RealField(grid, once).is_conjugate_symmetric()


def test_algebra_and_grid_mismatch():
    grid = SpectralGrid(modes=8, length=2.0 * np.pi)
    f = _random_field(grid, seed=4)
    g = _random_field(grid, seed=5)
    np.testing.assert_allclose((f + g).coeffs, f.coeffs + g.coeffs)
    np.testing.assert_allclose((f - g).coeffs, f.coeffs - g.coeffs)
    np.testing.assert_allclose((2.0 * f).coeffs, 2.0 * f.coeffs)
    other = _random_field(SpectralGrid(modes=9, length=2.0 * np.pi))
    with pytest.raises(GridMismatch):
        require_same_grid(f, other)
    with pytest.raises(GridMismatch):
        f + other


def test_dealiased_product_matches_convolution():
    """Brute-force truncated convolution oracle on a tiny grid."""
    grid = SpectralGrid(modes=6, length=2.0 * np.pi)
    f = _random_field(grid, seed=6).dealiased()
    g = _random_field(grid, seed=7).dealiased()
    prod = dealiased_product(f, g)
    K = grid.modes
    expected = np.zeros(grid.size, dtype=np.complex128)
    for m in range(-grid.dealias_cutoff, grid.dealias_cutoff + 1):
        acc = 0.0 + 0.0j
        for m1 in range(-K, K + 1):
            m2 = m - m1
            if abs(m2) <= K:
                acc += f.coeffs[m1 + K] * g.coeffs[m2 + K]
        expected[m + K] = acc
    np.testing.assert_allclose(prod.coeffs, expected, atol=1e-12)
    assert np.all(prod.coeffs[~grid.dealias_mask] == 0.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), modes=st.integers(2, 24))
def test_round_trip_property(seed, modes):
    grid = SpectralGrid(modes=modes, length=2.0 * np.pi)
    rng = np.random.default_rng(seed)
    values = rng.standard_normal(grid.size)
    f = RealField.from_physical(grid, values)
    np.testing.assert_allclose(f.to_physical(), values, atol=1e-10)
    assert f.is_conjugate_symmetric(tol=1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_dealias_idempotent_property(seed):
    grid = SpectralGrid(modes=15, length=2.0 * np.pi)
    f = _random_field(grid, seed=seed)
    once = f.dealiased()
    np.testing.assert_allclose(once.dealiased().coeffs, once.coeffs, atol=0)
