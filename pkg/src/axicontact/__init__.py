"""Steady axisymmetric subsonic Euler flow with a contact discontinuity.

A uniform subsonic jet in a cylinder of radius 1/2, surrounded by gas at
rest, is perturbed at the inlet; the package computes the perturbed flow
and the free interface between the two gases in mass (Lagrangian)
coordinates, and checks the result independently.

Typical use::

    from axicontact import GasConstants, Grid, Perturbation, make_background
    from axicontact import make_inlet, newton_solve

    bg = make_background(GasConstants(), rho_minus=1.0, P_b=5.0, rho_plus=1.0)
    inlet = make_inlet(bg, Perturbation({"A": ("bump", 1.0)}), 1e-2)
    result = newton_solve(inlet, bg, Grid(1.0, 64, 64))
"""

from .core import (
    BASES,
    CHANNELS,
    BackgroundState,
    ContactCurve,
    GasConstants,
    Grid,
    InletData,
    LagrangianState,
    Perturbation,
    PhysicalSolution,
    TildeProfiles,
    discrete_norm,
    make_background,
    make_inlet,
    tabulated_inlet,
)
from .errors import (
    BallExit,
    ConfigError,
    DomainError,
    LinearSolveFailure,
    NoConvergence,
    OuterDivergence,
    SolverError,
)
from .fixed_point import picard_step, solve_nonlinear
from .free_boundary import (
    derivative_apply_background,
    derivative_inverse_background,
    newton_solve,
    pressure_mismatch,
)
from .lagrangian import inlet_to_lagrangian, mass_flux_parameter, to_physical

__all__ = [
    "BASES", "CHANNELS", "BackgroundState", "BallExit", "ConfigError", "ContactCurve",
    "DomainError", "GasConstants", "Grid", "InletData", "LagrangianState", "LinearSolveFailure",
    "NoConvergence", "OuterDivergence", "Perturbation", "PhysicalSolution", "SolverError",
    "TildeProfiles", "derivative_apply_background", "derivative_inverse_background",
    "discrete_norm", "inlet_to_lagrangian", "make_background", "make_inlet",
    "mass_flux_parameter", "newton_solve", "picard_step", "pressure_mismatch",
    "solve_nonlinear", "tabulated_inlet", "to_physical",
]
