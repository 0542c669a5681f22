"""Modified Lagrangian coordinates.

The mass coordinate is ``y2^2 = int_0^r s rho u_x ds``; streamlines become
the lines ``y2 = const`` and the contact discontinuity becomes ``y2 = m``.
The radius is recovered from the fields through

    rhat(y1, y2) = (4 int_0^y2 s / (rho u_x)(y1, s) ds)^(1/2).
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .closure import closure_density
from .core import (
    BackgroundState,
    ContactCurve,
    Grid,
    InletData,
    LagrangianState,
    PhysicalSolution,
    TildeProfiles,
    to_interface,
)
from .errors import DegenerateFlow, JacobianDegenerate, NonMonotoneRadius, RootBracketFailure

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)
ROOT_TOL = 1e-13


def _flux_integral(J0, r):
    """int_0^r s J0(s) ds by Gauss-Legendre (vectorised over r)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    s = 0.5 * r[:, None] * (_GL_NODES[None, :] + 1.0)
    vals = s * J0(s)
    return 0.5 * r * (vals @ _GL_WEIGHTS)


def mass_flux_parameter(inlet: InletData) -> float:
    """m^2 = int_0^{1/2} s J0(s) ds."""
    return float(_flux_integral(inlet.J0, 0.5)[0])


def lagrangian_grid(inlet: InletData, L: float, N1: int, N2: int) -> Grid:
    """Grid on (0, L) x (0, m) with m taken from the inlet mass flux."""
    return Grid(L, N1, N2, float(np.sqrt(mass_flux_parameter(inlet))))


def inlet_radius(inlet: InletData, y2) -> np.ndarray:
    """r0(y2): root of int_0^{r0} s J0 ds = y2^2."""
    y2 = np.atleast_1d(np.asarray(y2, dtype=float))
    out = np.empty_like(y2)
    total = mass_flux_parameter(inlet)
    for k, t in enumerate(y2):
        target = t * t
        if target == 0.0:
            out[k] = 0.0
            continue
        if target > total * (1.0 + 1e-12):
            raise RootBracketFailure(f"y2 = {t:g} exceeds the inlet mass flux")
        if target >= total:
            out[k] = 0.5
            continue
        try:
            out[k] = brentq(lambda r: _flux_integral(inlet.J0, r)[0] - target,
                            0.0, 0.5, xtol=ROOT_TOL, rtol=1e-15)
        except ValueError as exc:
            raise RootBracketFailure(str(exc)) from exc
    return out


def inlet_to_lagrangian(inlet: InletData, grid: Grid) -> TildeProfiles:
    """Inlet profiles as functions of the mass coordinate at the cell centres."""
    y2 = grid.y2
    r0 = inlet_radius(inlet, y2)
    J = inlet.J0(r0)
    dr0 = 2.0 * y2 / (r0 * J)
    rm = inlet_radius(inlet, [grid.m])
    return TildeProfiles(
        m=grid.m, y2=y2, r0=r0, J=J, nu=inlet.nu0(r0),
        A=inlet.A0(r0), B=inlet.B0(r0),
        dA=inlet.A0.deriv(r0) * dr0, dB=inlet.B0.deriv(r0) * dr0,
        A_m=float(inlet.A0(rm)[0]), B_m=float(inlet.B0(rm)[0]),
    )


def radius_from_flux(flux: np.ndarray, grid: Grid):
    """rhat at the cell centres and at the interface for a given rho*u_x.

    The integrand s/(rho u_x) vanishes linearly at the axis, so the first
    half cell uses the exact rule for a linear function; the remaining
    intervals use the trapezoid rule between centres and a final half cell
    to the interface with the integrand extrapolated there.
    """
    if np.any(np.real(flux) <= 0.0) or not np.all(np.isfinite(flux)):
        raise DegenerateFlow("rho * u_x must be positive")
    h = grid.h2
    g = grid.y2[None, :] / flux
    I = np.empty_like(g)
    I[:, 0] = 0.25 * h * g[:, 0]
    I[:, 1:] = I[:, :1] + np.cumsum(0.5 * h * (g[:, 1:] + g[:, :-1]), axis=1)
    g_m = 1.5 * g[:, -1] - 0.5 * g[:, -2]
    I_m = I[:, -1] + 0.25 * h * (g[:, -1] + g_m)
    return np.sqrt(4.0 * I), np.sqrt(4.0 * I_m)


def reconstruct_radius(state: LagrangianState) -> np.ndarray:
    return radius_from_flux(state.rho * state.ux, state.grid)[0]


def jacobian(state: LagrangianState, floor: float = 0.01) -> np.ndarray:
    """rhat rho u_x / (2 y2); identically one for the background."""
    jac = state.rhat * state.rho * state.ux / (2.0 * state.grid.y2[None, :])
    if jac.min() < floor:
        raise JacobianDegenerate(f"Jacobian {jac.min():.4g} below floor {floor:g}")
    return jac


def build_state(grid: Grid, W1, W2, W3, tilde: TildeProfiles,
                background: BackgroundState) -> LagrangianState:
    """Close a velocity triple: density by Bernoulli and radius by the mass integral."""
    A, B = tilde.A, tilde.B
    rho = closure_density(W1, W2, W3, A, B, background)
    rhat, rhat_m = radius_from_flux(rho * (background.u_minus + W1), grid)
    return LagrangianState(grid, W1, W2, W3, A, B, rhat, rhat_m, rho, background.u_minus)


def background_state(grid: Grid, tilde: TildeProfiles,
                     background: BackgroundState) -> LagrangianState:
    z = np.zeros(grid.shape)
    return build_state(grid, z, z.copy(), z.copy(), tilde, background)


# --------------------------------------------------------------------------
# inverse map


def _along_y1(f: np.ndarray, y1: np.ndarray, L: float, x: np.ndarray) -> np.ndarray:
    """Linear interpolation in y1 of every column, with end traces extrapolated."""
    nodes = np.concatenate(([0.0], y1, [L]))
    ext = np.vstack((1.5 * f[0] - 0.5 * f[1], f, 1.5 * f[-1] - 0.5 * f[-2]))
    idx = np.clip(np.searchsorted(nodes, x) - 1, 0, nodes.size - 2)
    t = ((x - nodes[idx]) / (nodes[idx + 1] - nodes[idx]))[:, None]
    return (1.0 - t) * ext[idx] + t * ext[idx + 1]


class InnerSampler:
    """Evaluate the inner fields at physical points.

    Columns are extended with an axis row (even quantities extrapolated by
    a fit in y2^2, odd ones zero) and an interface row (linear
    extrapolation from the last two rows).  Along y1 fields are
    interpolated linearly; a physical radius is mapped to its streamline
    label by monotone linear interpolation of rhat.
    """

    FIELDS = ("rho", "ux", "ur", "ut", "P")

    def __init__(self, state: LagrangianState, background: BackgroundState):
        self.state = state
        self.background = background
        grid = state.grid
        self.y2e = np.concatenate(([0.0], grid.y2, [grid.m]))
        P = state.pressure(background.gamma, background)
        cols = {}
        for name, f, even in (("ux", state.W1 + background.u_minus, True),
                              ("ur", state.W2, False), ("ut", state.W3, False),
                              ("rho", state.rho, True), ("P", P, True)):
            axis = (9.0 * f[:, 0] - f[:, 1]) / 8.0 if even else np.zeros(grid.N1)
            cols[name] = np.column_stack((axis, f, to_interface(f)))
        cols["rhat"] = np.column_stack((np.zeros(grid.N1), state.rhat, state.rhat_m))
        self.cols = cols

    def columns(self, x: np.ndarray) -> dict:
        grid = self.state.grid
        at_x = {k: _along_y1(v, grid.y1, grid.L, x) for k, v in self.cols.items()}
        if np.any(np.diff(at_x["rhat"], axis=1) <= 0.0):
            raise NonMonotoneRadius("rhat is not strictly increasing along a column")
        return at_x

    def sample(self, x: np.ndarray, r: np.ndarray):
        """Fields at points (x_i, r_ij); ``r`` has shape (len(x), k)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        r = np.asarray(r, dtype=float)
        at_x = self.columns(x)
        label = np.empty(r.shape)
        out = {k: np.empty(r.shape) for k in self.FIELDS}
        for i in range(x.size):
            label[i] = np.interp(r[i], at_x["rhat"][i], self.y2e)
            for k in self.FIELDS:
                out[k][i] = np.interp(label[i], self.y2e, at_x[k][i])
        return out, label

    def __call__(self, x, r):
        return self.sample(x, r)[0]

    def interface(self, x) -> dict:
        at_x = self.columns(np.atleast_1d(np.asarray(x, dtype=float)))
        out = {k: at_x[k][:, -1] for k in self.FIELDS}
        out["r"] = at_x["rhat"][:, -1]
        return out


def to_physical(state: LagrangianState, contact: ContactCurve, background: BackgroundState,
                x: np.ndarray, r: np.ndarray) -> PhysicalSolution:
    """Sample the solution on the physical lattice ``x`` (axial) by ``r``.

    Inner points (r < g(x)) are located on their streamline by monotone
    linear interpolation of rhat; outer points get the constant outer
    state.
    """
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    sampler = InnerSampler(state, background)
    fields, label = sampler.sample(x, np.broadcast_to(r, (x.size, r.size)))
    g = contact.g(x)
    inner = r[None, :] < g[:, None]
    label = np.where(inner, label, np.nan)
    outer = {"rho": background.rho_plus, "ux": 0.0, "ur": 0.0, "ut": 0.0, "P": background.P_b}
    for key, val in outer.items():
        fields[key] = np.where(inner, fields[key], val)
    return PhysicalSolution(x=x, r=r, inner=inner, label=label, g=g, slope=contact.slope(x),
                            background=background, interface=sampler.interface(x),
                            sampler=sampler, **fields)
