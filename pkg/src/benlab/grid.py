"""Periodic spectral grids and real-valued fields stored as Fourier coefficients.

Conventions fixed here and used everywhere else:

* A grid with ``modes = K`` and period ``L`` retains wavenumbers
  ``xi_m = 2*pi*m/L`` for ``m = -K..K`` (``2K+1`` coefficients, ascending m).
* Coefficients follow the 1/L-forward convention
  ``u_hat(xi) = (1/L) * integral_0^L u(x) exp(-i xi x) dx``,
  so ``u(x) = sum_m u_hat(xi_m) exp(i xi_m x)`` and Parseval reads
  ``||u||_{L^2}^2 = L * sum_m |u_hat(xi_m)|^2``.
* Real fields keep conjugate symmetry ``u_hat(-xi) = conj(u_hat(xi))``.
* The 2/3 dealiasing rule zeroes every index with ``|m| > dealias_cutoff``
  after any nonlinear operation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch

CONJ_SYM_TOL = 1e-12


@dataclass(frozen=True)
class SpectralGrid:
    """Descriptor of a periodic domain: mode count per sign and period."""

    modes: int
    length: float

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError("modes must be a positive integer")
        if not self.length > 0:
            raise ValueError("length must be positive")

    @property
    def size(self) -> int:
        """Number of retained coefficients, 2*modes + 1."""
        return 2 * self.modes + 1

    @property
    def wavenumbers(self) -> np.ndarray:
        """Ascending wavenumbers xi_m = 2*pi*m/L, m = -K..K."""
        m = np.arange(-self.modes, self.modes + 1)
        return 2.0 * np.pi * m / self.length

    @property
    def dealias_cutoff(self) -> int:
        """Largest retained |m| after a nonlinear operation (2/3 rule)."""
        return (2 * self.modes) // 3

    @property
    def dealias_mask(self) -> np.ndarray:
        m = np.arange(-self.modes, self.modes + 1)
        return np.abs(m) <= self.dealias_cutoff

    def points(self) -> np.ndarray:
        """Collocation points x_j = j*L/n, j = 0..n-1."""
        n = self.size
        return self.length * np.arange(n) / n


@dataclass
class RealField:
    """One real-valued periodic function stored by its Fourier coefficients."""

    grid: SpectralGrid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != (self.grid.size,):
            raise ValueError(
                f"expected {self.grid.size} coefficients, got {self.coeffs.shape}"
            )

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, grid: SpectralGrid) -> "RealField":
        return cls(grid, np.zeros(grid.size, dtype=np.complex128))

    @classmethod
    def from_physical(cls, grid: SpectralGrid, values: np.ndarray) -> "RealField":
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.size,):
            raise ValueError("physical samples must match the collocation grid")
        coeffs = np.fft.fftshift(np.fft.fft(values)) / grid.size
        return cls(grid, coeffs)

    @classmethod
    def from_function(cls, grid: SpectralGrid, fn) -> "RealField":
        return cls.from_physical(grid, fn(grid.points()))

    # -- basic queries ------------------------------------------------

    def to_physical(self) -> np.ndarray:
        """Collocation samples; imaginary residue is dropped."""
        return np.real(np.fft.ifft(np.fft.ifftshift(self.coeffs)) * self.grid.size)

    def is_conjugate_symmetric(self, tol: float = CONJ_SYM_TOL) -> bool:
        scale = np.max(np.abs(self.coeffs)) or 1.0
        return bool(
            np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1]))) <= tol * scale
        )

    def l2_norm(self) -> float:
        """L^2(0, L) norm via Parseval."""
        return float(
            np.sqrt(self.grid.length * np.sum(np.abs(self.coeffs) ** 2))
        )

    def mean(self) -> float:
        return float(np.real(self.coeffs[self.grid.modes]))

    def copy(self) -> "RealField":
        return RealField(self.grid, self.coeffs.copy())

    # -- algebra ------------------------------------------------------

    def __add__(self, other: "RealField") -> "RealField":
        require_same_grid(self, other)
        return RealField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "RealField") -> "RealField":
        require_same_grid(self, other)
        return RealField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "RealField":
        return RealField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def dealiased(self) -> "RealField":
        return RealField(self.grid, np.where(self.grid.dealias_mask, self.coeffs, 0.0))


def require_same_grid(*fields: RealField) -> SpectralGrid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatch("fields live on different grids")
    return grid


def enforce_conjugate_symmetry(coeffs: np.ndarray) -> np.ndarray:
    """Project onto the conjugate-symmetric subspace (real-valued fields)."""
    return 0.5 * (coeffs + np.conj(coeffs[::-1]))


def dealiased_product(f: RealField, g: RealField) -> RealField:
    """Pointwise product computed in physical space, then 2/3-truncated.

    With 2K+1 collocation points and both inputs supported within the 2/3
    cutoff, every aliased quadratic image lands above the cutoff and is
    removed by the final truncation.
    """
    grid = require_same_grid(f, g)
    prod = f.to_physical() * g.to_physical()
    out = RealField.from_physical(grid, prod)
    return out.dealiased()
