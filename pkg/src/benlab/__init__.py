"""benlab: a desk-scale pseudospectral laboratory for the Benjamin equation.

Modules
-------
grid       periodic spectral grids and real fields in coefficient form
spectral   dispersion symbol, propagator, dyadic projections, Sobolev norms
evolve     integrating-factor RK4 solver, scaling map, trajectory storage
imethod    I-multiplier, correction multipliers, modified energies and fluxes
ineq       dyadic block estimates, multiplier bounds, Strichartz-type probes
gwp        rescaling bookkeeping, almost-conservation scans, ill-posedness probe
cli        argparse front door (``benlab <subcommand>``)
reports    deterministic JSON/CSV report writers
"""

from .errors import (
    BenlabError,
    BootstrapViolated,
    BudgetExceeded,
    ConfigError,
    GridMismatch,
    InfeasiblePlan,
    InsufficientSamples,
    LatticeBudget,
    NonFinite,
    OffHyperplane,
    ResonantDenominator,
    ScaleMismatch,
    ScalingFailed,
)
from .grid import RealField, SpectralGrid
from .spectral import SymbolParams, dispersion_symbol, sobolev_norm
from .evolve import SolverConfig, Trajectory, solve, step_ifrk4
from .imethod import EnergyReport, IMultiplier, energy2, energy3, energy4, modified_energies
from .gwp import GwpPlan, GwpReport, select_scaling, run_gwp_iteration

__version__ = "0.1.0"

__all__ = [
    "BenlabError",
    "BootstrapViolated",
    "BudgetExceeded",
    "ConfigError",
    "EnergyReport",
    "GridMismatch",
    "GwpPlan",
    "GwpReport",
    "IMultiplier",
    "InfeasiblePlan",
    "InsufficientSamples",
    "LatticeBudget",
    "NonFinite",
    "OffHyperplane",
    "RealField",
    "ResonantDenominator",
    "ScaleMismatch",
    "ScalingFailed",
    "SolverConfig",
    "SpectralGrid",
    "SymbolParams",
    "Trajectory",
    "dispersion_symbol",
    "energy2",
    "energy3",
    "energy4",
    "modified_energies",
    "run_gwp_iteration",
    "select_scaling",
    "sobolev_norm",
    "solve",
    "step_ifrk4",
    "__version__",
]
