"""Picard iteration for the interior problem with a prescribed contact slope."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .closure import DEFAULT_ADMISSIBILITY, Admissibility, assemble_sources, swirl_solve
from .core import BackgroundState, ContactCurve, Grid, InletData, LagrangianState, TildeProfiles
from .elliptic import get_solver
from .errors import NoConvergence
from .lagrangian import background_state, build_state, inlet_to_lagrangian, mass_flux_parameter


@dataclass
class PicardTrace:
    """Sup-norm differences between successive iterates."""

    differences: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.differences)

    @property
    def ratios(self) -> np.ndarray:
        d = np.asarray(self.differences, dtype=float)
        if d.size < 2:
            return np.empty(0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return d[1:] / d[:-1]


def adapt_grid(inlet: InletData, grid: Grid) -> Grid:
    """The same grid with its mass-coordinate height set from the inlet."""
    m = float(np.sqrt(mass_flux_parameter(inlet)))
    return grid if m == grid.m else grid.with_m(m)


def prepare(inlet, grid: Grid):
    """Grid and tilde profiles for either raw inlet data or tilde profiles."""
    if isinstance(inlet, TildeProfiles):
        if abs(inlet.m - grid.m) > 0.0 or inlet.y2.size != grid.N2:
            grid = grid.with_m(inlet.m)
        return grid, inlet
    grid = adapt_grid(inlet, grid)
    return grid, inlet_to_lagrangian(inlet, grid)


def picard_step(hat_state: LagrangianState, tilde: TildeProfiles, contact: ContactCurve,
                background: BackgroundState,
                limits: Admissibility = DEFAULT_ADMISSIBILITY) -> LagrangianState:
    """One application of the solution map: swirl from the transported
    angular momentum, sources at the hat state, then the linear solve."""
    grid = hat_state.grid
    W3 = swirl_solve(hat_state, tilde)
    sources = assemble_sources(hat_state, hat_state.A_prof, hat_state.B_prof, tilde,
                               contact, background, limits)
    W1, W2 = get_solver(grid, background.mach_sq).solve_linear(sources)
    return build_state(grid, W1, W2, W3, tilde, background)


def _sup_diff(a: LagrangianState, b: LagrangianState) -> float:
    return a.deviation(b)


def solve_nonlinear(inlet, contact: ContactCurve, background: BackgroundState, grid: Grid,
                    tol: float = 1e-10, max_iter: int = 100, theta: float = 1.0,
                    initial: LagrangianState | None = None,
                    limits: Admissibility = DEFAULT_ADMISSIBILITY):
    """Iterate the solution map from the background (or ``initial``).

    Returns ``(state, trace)``.  Raises NoConvergence after ``max_iter``
    steps or when the difference grows three times in a row.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must lie in (0, 1]")
    grid, tilde = prepare(inlet, grid)
    if contact.N1 != grid.N1:
        raise ValueError("contact slope and grid disagree on N1")
    state = initial if initial is not None else background_state(grid, tilde, background)
    trace = PicardTrace()
    growth = 0
    for _ in range(max_iter):
        new = picard_step(state, tilde, contact, background, limits)
        if theta < 1.0:
            new = build_state(grid, theta * new.W1 + (1 - theta) * state.W1,
                              theta * new.W2 + (1 - theta) * state.W2,
                              theta * new.W3 + (1 - theta) * state.W3, tilde, background)
        diff = _sup_diff(new, state)
        trace.differences.append(diff)
        state = new
        if diff < tol:
            return state, trace
        if len(trace.differences) > 1 and diff > trace.differences[-2]:
            growth += 1
            if growth >= 3:
                raise NoConvergence("Picard differences grew three times in a row",
                                    trace.differences)
        else:
            growth = 0
    raise NoConvergence(f"no convergence in {max_iter} Picard steps", trace.differences)
