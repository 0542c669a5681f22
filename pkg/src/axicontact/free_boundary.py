"""Locating the contact discontinuity.

For a prescribed interface slope ``w`` the interior problem is solved and
the interface pressure mismatch

    Q(w)(y1) = A(m) rho^gamma (y1, m) - P_b

is evaluated.  The contact curve is the zero of Q.  The derivative of Q
with respect to w at the background is the map
``w1 -> -J_b W1(., m)`` where (W1, W2) solves the linear system with zero
sources and interface data ``W2 = u_b w1``; it is inverted through a
potential problem with Dirichlet data on the interface.  A simplified
Newton iteration with this frozen derivative finds the zero.

The potential-problem inverse agrees with the discrete derivative only up
to O(h^2) on smooth profiles; on grid-scale modes near the inlet it is far
from the discrete inverse, which stalls the outer iteration.  The Newton
loop therefore defaults to the exact inverse of the assembled discrete
derivative matrix (one linear solve per axial cell, cached per grid).

Because the discrete derivative is nearly blind to odd-even modes of w
(its singular values there scale like h), the outer equation carries a
small fourth-difference damping term,

    R(w) = Q(w) + kappa J_b u_b delta^4 w,

which is O(h^4) on smooth slopes and removes the odd-even component that
the corner singularity at the inlet would otherwise seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .closure import (DEFAULT_ADMISSIBILITY, Admissibility, SourceTerms, density_from_bernoulli,
                      pressure_from_density)
from .core import BackgroundState, ContactCurve, Grid, LagrangianState, TildeProfiles, to_inlet, to_interface
from .elliptic import get_solver
from .errors import DomainError, OuterDivergence
from .fixed_point import PicardTrace, prepare, solve_nonlinear


def interface_pressure(state: LagrangianState, tilde: TildeProfiles,
                       background: BackgroundState) -> np.ndarray:
    """Pressure on y2 = m at the axial cell centres (extrapolated traces)."""
    ub = background.u_minus
    q2 = (ub + to_interface(state.W1)) ** 2 + to_interface(state.W2) ** 2 + to_interface(state.W3) ** 2
    rho = density_from_bernoulli(tilde.B_m, tilde.A_m, q2, background.gamma, background)
    return pressure_from_density(tilde.A_m, rho, background)


def _as_contact(w, grid: Grid) -> ContactCurve:
    if isinstance(w, ContactCurve):
        return w
    return ContactCurve(grid.L, np.asarray(w, dtype=float))


@dataclass
class MismatchEvaluation:
    Q: np.ndarray
    state: LagrangianState
    trace: PicardTrace
    tilde: TildeProfiles


def evaluate_mismatch(inlet, w, background: BackgroundState, grid: Grid,
                      inner_tol: float = 1e-11, max_iter: int = 100,
                      initial: LagrangianState | None = None,
                      limits: Admissibility = DEFAULT_ADMISSIBILITY,
                      theta: float = 1.0) -> MismatchEvaluation:
    grid, tilde = prepare(inlet, grid)
    contact = _as_contact(w, grid)
    state, trace = solve_nonlinear(tilde, contact, background, grid, inner_tol, max_iter,
                                   theta=theta, initial=initial, limits=limits)
    Q = interface_pressure(state, tilde, background) - background.P_b
    return MismatchEvaluation(Q, state, trace, tilde)


def pressure_mismatch(inlet, w, background: BackgroundState, grid: Grid,
                      inner_tol: float = 1e-11) -> np.ndarray:
    """Q(y1) at the axial cell centres for the slope ``w``."""
    return evaluate_mismatch(inlet, w, background, grid, inner_tol).Q


def derivative_apply_background(w1, background: BackgroundState, grid: Grid) -> np.ndarray:
    """Derivative of Q in the direction w1 at the background state."""
    w1 = np.asarray(w1.w if isinstance(w1, ContactCurve) else w1, dtype=float)
    z = np.zeros(grid.shape)
    sources = SourceTerms(z, z, np.zeros(grid.N2), background.u_minus * w1)
    W1, _ = get_solver(grid, background.mach_sq).solve_linear(sources)
    return -background.J_b_minus * to_interface(W1)


def _dirichlet_data(P: np.ndarray, grid: Grid) -> np.ndarray:
    """d(y1_i) = int_{y1_i}^{L} P / 2 from centre samples of P."""
    h = grid.h1
    P_L = 1.5 * P[-1] - 0.5 * P[-2]
    tail = 0.125 * h * (P[-1] + P_L)
    seg = 0.25 * h * (P[1:] + P[:-1])
    d = np.empty_like(P)
    d[-1] = tail
    d[:-1] = tail + np.cumsum(seg[::-1])[::-1]
    return d


def derivative_inverse_background(P_star, background: BackgroundState, grid: Grid,
                                  check: bool = True, tol: float = 1e-3) -> np.ndarray:
    """Slope w* whose background derivative reproduces P_star.

    ``P_star`` is sampled at the axial cell centres, or a callable of y1.
    With ``check`` set, a value at y1 = 0 larger than ``tol`` times the sup
    norm raises DomainError.
    """
    if callable(P_star):
        P0 = float(P_star(np.array([0.0]))[0])
        P = np.asarray(P_star(grid.y1), dtype=float)
    else:
        P = np.asarray(P_star, dtype=float)
        P0 = float(to_inlet(P))
    if check and abs(P0) > tol * max(np.max(np.abs(P)), 1e-300) and abs(P0) > 1e-14:
        raise DomainError(f"P_star(0) = {P0:.3g} is not zero")
    d = _dirichlet_data(P, grid)
    solver = get_solver(grid, background.mach_sq)
    phi = solver.potential_dirichlet(np.zeros(grid.shape), d)
    W2_face = (8.0 * d - 9.0 * phi[:, -1] + phi[:, -2]) / (3.0 * grid.h2)
    return W2_face / background.u_minus


@lru_cache(maxsize=8)
def _derivative_lu(background: BackgroundState, grid: Grid):
    return sla.lu_factor(background_derivative_matrix(background, grid))


def background_derivative_matrix(background: BackgroundState, grid: Grid) -> np.ndarray:
    """Matrix of the discrete background derivative (columns = unit slopes)."""
    eye = np.eye(grid.N1)
    return np.column_stack([derivative_apply_background(eye[:, k], background, grid)
                            for k in range(grid.N1)])


def discrete_derivative_inverse(P, background: BackgroundState, grid: Grid) -> np.ndarray:
    """Exact inverse of the discrete background derivative."""
    return sla.lu_solve(_derivative_lu(background, grid), np.asarray(P, dtype=float))


DEFAULT_DAMPING = 0.01


def fourth_difference(w: np.ndarray) -> np.ndarray:
    """delta^4 w; the two cells next to each end reuse the nearest
    interior five-point stencil, so no reflection of w is assumed."""
    w = np.asarray(w)
    inner = w[:-4] - 4.0 * w[1:-3] + 6.0 * w[2:-2] - 4.0 * w[3:-1] + w[4:]
    return np.concatenate((inner[:1], inner[:1], inner, inner[-1:], inner[-1:]))


def _damping_matrix(N: int) -> np.ndarray:
    return np.column_stack([fourth_difference(c) for c in np.eye(N)])


@lru_cache(maxsize=8)
def _damped_lu(background: BackgroundState, grid: Grid, damping: float):
    D = background_derivative_matrix(background, grid)
    D = D + damping * background.J_b_minus * background.u_minus * _damping_matrix(grid.N1)
    return sla.lu_factor(D)


@dataclass
class NewtonResult:
    contact: ContactCurve
    state: LagrangianState
    tilde: TildeProfiles
    grid: Grid
    q_history: list = field(default_factory=list)
    q0_history: list = field(default_factory=list)
    traces: list = field(default_factory=list)
    mismatch_history: list = field(default_factory=list)
    Q: np.ndarray | None = None

    def __iter__(self):
        yield self.contact
        yield self.state

    @property
    def outer_iterations(self) -> int:
        return len(self.q_history) - 1

    @property
    def contraction_ratio(self) -> float:
        """Largest Picard successive-difference ratio over all inner solves."""
        ratios = [r for t in self.traces for r in t.ratios[np.isfinite(t.ratios)]]
        return float(max(ratios)) if ratios else 0.0


def newton_solve(inlet, background: BackgroundState, grid: Grid, outer_tol: float = 1e-9,
                 max_outer: int = 30, inner_tol: float = 1e-11, max_inner: int = 100,
                 limits: Admissibility = DEFAULT_ADMISSIBILITY,
                 callback: Callable | None = None, inverse: str = "discrete",
                 damping: float = DEFAULT_DAMPING, theta: float = 1.0) -> NewtonResult:
    """Simplified Newton iteration ``w <- w - D^{-1} R(w)`` from ``w = 0``.

    ``R`` is the damped mismatch described in the module docstring
    (``damping = 0`` gives the plain pressure mismatch).  ``inverse``
    selects the frozen inverse: ``"discrete"`` (exact inverse of the
    assembled, damped background derivative) or ``"potential"``
    (:func:`derivative_inverse_background`).  Each inner solve is
    warm-started from the previous converged state and uses the Picard
    relaxation ``theta``.  ``q_history`` holds
    sup|R|, ``mismatch_history`` sup|Q| and ``q0_history`` |Q(0)|
    (extrapolated).
    """
    if inverse not in ("discrete", "potential"):
        raise ValueError(f"unknown inverse {inverse!r}")
    if damping < 0.0:
        raise ValueError("damping must be non-negative")
    grid, tilde = prepare(inlet, grid)
    scale = damping * background.J_b_minus * background.u_minus
    w = np.zeros(grid.N1)
    state = None
    result = None
    stalls = 0
    for k in range(max_outer + 1):
        ev = evaluate_mismatch(tilde, w, background, grid, inner_tol, max_inner, state, limits,
                               theta)
        state = ev.state
        R = ev.Q + scale * fourth_difference(w) if scale else ev.Q
        qn = float(np.max(np.abs(R)))
        if result is None:
            result = NewtonResult(ContactCurve(grid.L, w.copy()), state, tilde, grid)
        result.contact = ContactCurve(grid.L, w.copy())
        result.state = state
        result.Q = ev.Q
        result.q_history.append(qn)
        result.mismatch_history.append(float(np.max(np.abs(ev.Q))))
        result.q0_history.append(abs(float(to_inlet(ev.Q))))
        result.traces.append(ev.trace)
        if callback is not None:
            callback(k, w, ev)
        if qn < outer_tol:
            return result
        if k > 0 and qn >= result.q_history[-2]:
            stalls += 1
            if stalls >= 3:
                raise OuterDivergence("interface mismatch stopped decreasing", result.q_history)
        else:
            stalls = 0
        if k == max_outer:
            break
        if inverse == "discrete":
            w = w - sla.lu_solve(_damped_lu(background, grid, float(damping)), R)
        else:
            w = w - derivative_inverse_background(R, background, grid, check=False)
    raise OuterDivergence(f"no convergence in {max_outer} outer steps", result.q_history)
