"""Dispersion symbol, free propagator, dyadic projections, and norms.

The linearized equation ``u_t = gamma*u_x - alpha*H(u_xx) - beta*u_xxx``
acts mode-wise as multiplication by ``i*p(xi)`` with
``p(xi) = beta*xi^3 - alpha*xi*|xi| + gamma*xi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .grid import RealField, SpectralGrid

ETA_INNER = 1.25  # eta0 == 1 on [-5/4, 5/4]
ETA_OUTER = 1.60  # supp eta0 within [-8/5, 8/5]


@dataclass(frozen=True)
class SymbolParams:
    """Equation coefficients (alpha, beta, gamma).

    ``alpha*beta != 0`` is required unless ``allow_degenerate`` is set; the
    degenerate constructor exists for KdV/Benjamin-Ono cross-checks and is
    flagged on the instance.
    """

    alpha: float
    beta: float
    gamma: float = 0.0
    allow_degenerate: bool = False

    def __post_init__(self):
        if not self.allow_degenerate and self.alpha * self.beta == 0.0:
            raise ValueError(
                "alpha*beta must be nonzero (pass allow_degenerate=True to bypass)"
            )

    def rescaled(self, lam: float) -> "SymbolParams":
        """Coefficients of the lambda-rescaled equation: alpha->lam*alpha,
        gamma->lam^2*gamma, beta unchanged."""
        return SymbolParams(
            alpha=lam * self.alpha,
            beta=self.beta,
            gamma=lam * lam * self.gamma,
            allow_degenerate=True,
        )

    def is_normalized(self) -> bool:
        return self.beta == 1.0 and abs(self.alpha) <= 1.0 and abs(self.gamma) <= 1.0


def dispersion_symbol(params: SymbolParams, xi):
    """p(xi) = beta*xi^3 - alpha*xi*|xi| + gamma*xi (odd in xi)."""
    xi = np.asarray(xi, dtype=np.float64)
    out = params.beta * xi**3 - params.alpha * xi * np.abs(xi) + params.gamma * xi
    return out if out.ndim else float(out)


def hilbert_transform(f: RealField) -> RealField:
    """Fourier multiplier -i*sgn(xi); the mean mode is annihilated."""
    xi = f.grid.wavenumbers
    return RealField(f.grid, -1j * np.sign(xi) * f.coeffs)


def free_propagator(f: RealField, t: float, params: SymbolParams) -> RealField:
    """Exact linear flow: every coefficient multiplied by exp(i*t*p(xi))."""
    phase = np.exp(1j * t * dispersion_symbol(params, f.grid.wavenumbers))
    return RealField(f.grid, phase * f.coeffs)


# -- dyadic bumps ----------------------------------------------------------


def _smoothstep(t):
    """C^2 quintic ramp: 0 at t<=0, 1 at t>=1, two flat derivatives at ends."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def eta0(xi):
    """C^2 bump equal to 1 on [-5/4, 5/4], supported in [-8/5, 8/5]."""
    a = np.abs(np.asarray(xi, dtype=np.float64))
    out = 1.0 - _smoothstep((a - ETA_INNER) / (ETA_OUTER - ETA_INNER))
    return out if out.ndim else float(out)


def eta_bump(xi, k: int):
    """eta_k(xi): eta0 for k = 0, the dyadic ring eta0(xi/2^k)-eta0(xi/2^(k-1))
    for k >= 1, and 0 for k <= -1."""
    if k < 0:
        out = np.zeros_like(np.asarray(xi, dtype=np.float64))
        return out if out.ndim else 0.0
    if k == 0:
        return eta0(xi)
    xi = np.asarray(xi, dtype=np.float64)
    out = eta0(xi / 2.0**k) - eta0(xi / 2.0 ** (k - 1))
    return out if out.ndim else float(out)


def project_dyadic(f: RealField, k: int) -> RealField:
    """Littlewood-Paley piece P_k f with symbol eta_k(xi)."""
    if k < 0:
        raise ValueError("dyadic index must be nonnegative")
    return RealField(f.grid, eta_bump(f.grid.wavenumbers, k) * f.coeffs)


def max_dyadic_index(grid: SpectralGrid) -> int:
    """Smallest k_max with sum_{k<=k_max} eta_k == 1 on the whole grid."""
    xi_max = float(np.max(np.abs(grid.wavenumbers)))
    k = 0
    while 2.0**k * ETA_INNER < xi_max:
        k += 1
    return k


# -- norms -----------------------------------------------------------------


def sobolev_norm(f: RealField, s: float) -> float:
    """Discrete H^s norm (L * sum (1+xi^2)^s |u_hat|^2)^(1/2).

    The L prefactor makes s = 0 coincide with the L^2(0, L) norm under the
    1/L coefficient convention.
    """
    xi = f.grid.wavenumbers
    w = (1.0 + xi**2) ** s
    return float(np.sqrt(f.grid.length * np.sum(w * np.abs(f.coeffs) ** 2)))


@dataclass
class NormReport:
    """Bundle of norms for one field or trajectory window."""

    l2: float
    sobolev: dict = dc_field(default_factory=dict)
    fbar: Optional[float] = None
    xbar0: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "l2": self.l2,
            "sobolev": {str(s): v for s, v in sorted(self.sobolev.items())},
            "fbar": self.fbar,
            "xbar0": self.xbar0,
        }


def norm_report(f: RealField, orders=(-0.75, 0.0, 1.0)) -> NormReport:
    return NormReport(
        l2=f.l2_norm(),
        sobolev={float(s): sobolev_norm(f, s) for s in orders},
    )
