"""Thermodynamic closure, transported invariants, swirl and the nonlinear
source terms of the linearised first-order system.

The linear operator acting on (W1, W2) is

    L1(W) = (1 - M^2) d1 W1 + d2 W2 + W2 / y2,
    L2(W) = d1 W2 - d2 W1,

and the sources are written so that the exact nonlinear equations read
``L(W) = F(W)``:

* ``F1 = L1(W) - E1(W) / c_b^2`` where E1 is the continuity equation
  multiplied by c^2/rho with density derivatives eliminated by Bernoulli,
* ``F2 = L2(W) - (curl residual)`` from the radial momentum equation in
  Crocco form,
* ``F3`` is the axial velocity at the inlet implied by the mass flux J,
* ``F4 = u_x g'`` is the slip condition on the interface.

All of F1..F3 are quadratic in the deviation from the background, so the
derivative of the Picard map at the background vanishes exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._stencils import EVEN, ODD, d1, d2
from .core import BackgroundState, ContactCurve, LagrangianState, TildeProfiles, to_inlet, to_interface
from .errors import BallExit, VacuumOrCavitation


@dataclass(frozen=True)
class Admissibility:
    """Proxies for the solution ball: bounds every iterate must respect."""

    rho_lo: float = 0.1
    rho_hi: float = 10.0
    mach_sq_max: float = 0.99
    jacobian_min: float = 0.01


DEFAULT_ADMISSIBILITY = Admissibility()


@dataclass(frozen=True)
class SourceTerms:
    F1: np.ndarray
    F2: np.ndarray
    F3: np.ndarray
    F4: np.ndarray


def density_from_bernoulli(B, A, speed_sq, gamma: float = 1.4,
                           reference: BackgroundState | None = None):
    """rho = ((gamma-1)/(A gamma) (B - |u|^2/2))^(1/(gamma-1)).

    With a ``reference`` background the same quantity is evaluated as
    rho_b ((A_b / A) (h / h_b))^(1/(gamma-1)) with h = B - |u|^2/2, which
    returns rho_b exactly (not just to rounding) at the background.
    """
    B = np.asarray(B, dtype=float)
    A = np.asarray(A, dtype=float)
    speed_sq = np.asarray(speed_sq)
    h = B - 0.5 * speed_sq
    if np.any(np.real(h) <= 0.0):
        raise VacuumOrCavitation("B - |u|^2/2 must stay positive")
    if reference is None:
        rho = ((gamma - 1.0) / (A * gamma) * h) ** (1.0 / (gamma - 1.0))
    else:
        ref = reference
        h_b = ref.B_b_minus - 0.5 * ref.u_minus**2
        rho = ref.rho_minus * ((ref.A_b_minus / A) * (h / h_b)) ** (1.0 / (ref.gamma - 1.0))
    return rho if rho.ndim else float(rho)


def pressure_from_density(A, rho, background: BackgroundState):
    """P = A rho^gamma, written relative to the background so that the
    background state gives P_b exactly."""
    g = background.gamma
    return background.P_b * (np.asarray(A) / background.A_b_minus) * (
        np.asarray(rho) / background.rho_minus) ** g


def density_from_flux(J, B, A, ut_sq, background: BackgroundState):
    """Subsonic density carrying axial mass flux J with given A, B and swirl.

    Solves J^2/(2 rho^2) + ut^2/2 + gamma A rho^(gamma-1)/(gamma-1) = B on
    the branch above the sonic density.
    """
    g = background.gamma
    J, B, A, ut_sq = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                            for v in (J, B, A, ut_sq)))
    out = np.empty(J.shape)
    for idx in np.ndindex(J.shape):
        j, b, a, s = J[idx], B[idx], A[idx], ut_sq[idx]
        rho_s = (j * j / (g * a)) ** (1.0 / (g + 1.0))
        rho_max = ((g - 1.0) / (g * a) * (b - 0.5 * s)) ** (1.0 / (g - 1.0))

        def f(r):
            return 0.5 * j * j / (r * r) + 0.5 * s + g * a * r ** (g - 1.0) / (g - 1.0) - b

        if not (rho_max > rho_s and f(rho_s) < 0.0):
            raise VacuumOrCavitation("no subsonic density carries the requested flux")
        out[idx] = brentq(f, rho_s, rho_max, xtol=1e-15, rtol=1e-15)
    return out


def transport_invariants(tilde: TildeProfiles):
    """A and B are constant along streamlines: the inlet profiles in y2."""
    return tilde.A.copy(), tilde.B.copy()


def swirl_solve(hat_state: LagrangianState, tilde: TildeProfiles) -> np.ndarray:
    """W3 = Lambda(y2) / rhat, i.e. r u_theta is carried by each streamline."""
    return tilde.Lam[None, :] / hat_state.rhat


def closure_density(W1, W2, W3, A_prof, B_prof, background: BackgroundState):
    q2 = (background.u_minus + W1) ** 2 + W2**2 + W3**2
    return density_from_bernoulli(B_prof, A_prof, q2, background.gamma, background)


def check_admissible(state: LagrangianState, background: BackgroundState,
                     limits: Admissibility = DEFAULT_ADMISSIBILITY):
    """Raise BallExit if the state leaves the admissible set."""
    g = background.gamma
    rho = np.real(state.rho)
    rb = background.rho_minus
    if not np.all(np.isfinite(rho)) or rho.min() < limits.rho_lo * rb or rho.max() > limits.rho_hi * rb:
        raise BallExit("density left [%g, %g] x rho_b" % (limits.rho_lo, limits.rho_hi))
    ux, ur, ut = (np.real(v) for v in state.velocity())
    c2 = g * state.A_prof[None, :] * rho ** (g - 1.0)
    mach_sq = (ux**2 + ur**2 + ut**2) / c2
    if mach_sq.max() > limits.mach_sq_max:
        raise BallExit(f"Mach^2 reached {mach_sq.max():.4g}")
    jac = np.real(state.rhat) * rho * ux / (2.0 * state.grid.y2[None, :])
    if jac.min() < limits.jacobian_min:
        raise BallExit(f"Jacobian dropped to {jac.min():.4g}")


def linear_operators(W1, W2, grid, mach_sq):
    """Discrete L1, L2 with the same stencils used inside the sources."""
    h1, h2 = grid.h1, grid.h2
    y2 = grid.y2[None, :]
    L1 = (1.0 - mach_sq) * d1(W1, h1) + d2(W2, h2, ODD) + W2 / y2
    L2 = d1(W2, h1) - d2(W1, h2, EVEN)
    return L1, L2


def nonlinear_residuals(state: LagrangianState, tilde: TildeProfiles,
                        background: BackgroundState):
    """Residuals (E1, E2) of the two nonlinear elliptic equations.

    E1 is the continuity equation times c^2/rho; E2 is the axial velocity
    times the azimuthal vorticity balance.  Both vanish for exact solutions.
    """
    grid = state.grid
    g = background.gamma
    h1, h2 = grid.h1, grid.h2
    y2 = grid.y2[None, :]
    ux, ur, ut = state.velocity()
    rho, rhat = state.rho, state.rhat
    B = state.B_prof[None, :]
    q2 = ux**2 + ur**2 + ut**2
    c2 = (g - 1.0) * (B - 0.5 * q2)
    D = rhat * rho / (2.0 * y2)
    Jx, Jr = D * ux, D * ur

    d1ux, d1ur = d1(ux, h1), d1(ur, h1)
    d2ux, d2ur, d2ut = d2(ux, h2, EVEN), d2(ur, h2, ODD), d2(ut, h2, ODD)
    E1 = ((c2 - ux**2) * (d1ux - Jr * d2ux) + (c2 - ur**2) * Jx * d2ur
          + (c2 + ut**2) * ur / rhat - ux * ur * (d1ur - Jr * d2ur + Jx * d2ux))
    dA = tilde.dA[None, :]
    dB = tilde.dB[None, :]
    E2 = (ux * (d1ur - Jr * d2ur - Jx * d2ux)
          - ut**2 / rhat - Jx * (ut * d2ut + rho ** (g - 1.0) / (g - 1.0) * dA - dB))
    return E1, E2


def assemble_sources(hat_state: LagrangianState, A_prof, B_prof, tilde: TildeProfiles,
                     contact: ContactCurve, background: BackgroundState,
                     limits: Admissibility = DEFAULT_ADMISSIBILITY) -> SourceTerms:
    """Evaluate the scaled sources (F1/c_b^2, F2, F3, F4) at the hat state."""
    check_admissible(hat_state, background, limits)
    grid = hat_state.grid
    g = background.gamma
    ub = background.u_minus
    W1, W2, W3 = hat_state.W1, hat_state.W2, hat_state.W3
    if hat_state.A_prof is not A_prof or hat_state.B_prof is not B_prof:
        hat_state = LagrangianState(grid, W1, W2, W3, np.asarray(A_prof), np.asarray(B_prof),
                                    hat_state.rhat, hat_state.rhat_m, hat_state.rho, ub)

    L1, L2 = linear_operators(W1, W2, grid, background.mach_sq)
    E1, E2 = nonlinear_residuals(hat_state, tilde, background)
    ux = ub + W1
    F1 = L1 - E1 / background.c_sq
    F2 = L2 - E2 / ux

    W1_in, W2_in, W3_in = to_inlet(W1), to_inlet(W2), to_inlet(W3)
    rho_in = density_from_bernoulli(tilde.B, tilde.A, (ub + W1_in) ** 2 + W2_in**2 + W3_in**2, g,
                                    background)
    F3 = W1_in + (tilde.J - rho_in * (ub + W1_in)) / (
        background.rho_minus * (1.0 - background.mach_sq))
    F4 = (ub + to_interface(W1)) * contact.w
    return SourceTerms(F1, F2, F3, F4)
