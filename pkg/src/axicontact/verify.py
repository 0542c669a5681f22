"""Independent checks of computed solutions.

Differencing here uses ``numpy.gradient`` (second-order one-sided at the
edges, no axis ghosts) and quadrature uses ``scipy.integrate``; none of the
solver stencils are reused, so agreement between the two is evidence
rather than tautology.

The weak form is the axisymmetric reduction of the three-dimensional one
with volume element ``r dr dx``.  For an axisymmetric test function eta
the five integrals are

    mass      int (rho u_x eta_x + rho u_r eta_r) r
    x-mom     int ((rho u_x^2 + P) eta_x + rho u_x u_r eta_r) r
    r-mom     int (rho u_x u_r eta_x + (rho u_r^2 + P) eta_r) r + (rho u_t^2 + P) eta
    t-mom     int (rho u_x u_t eta_x + rho u_r u_t (eta_r - eta / r)) r
    energy    int rho B (u_x eta_x + u_r eta_r) r

where the r- and theta-momentum tests are eta e_r and eta e_theta.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid, simpson, trapezoid
from scipy.interpolate import CubicSpline

from .core import BackgroundState, ContactCurve, Grid, LagrangianState, PhysicalSolution, TildeProfiles
from .fixed_point import picard_step, prepare, solve_nonlinear
from .lagrangian import build_state

EQUATIONS = ("mass", "x_momentum", "r_momentum", "theta_momentum", "energy")


def _extrapolate(f0, f1, f2):
    """Quadratic extrapolation of three cell values to the adjacent face."""
    return (15.0 * f0 - 10.0 * f1 + 3.0 * f2) / 8.0


@dataclass
class Residuals:
    sup: dict = field(default_factory=dict)
    l2: dict = field(default_factory=dict)
    fields: dict = field(default_factory=dict)
    interior: dict = field(default_factory=dict)

    def worst(self) -> float:
        return max(self.sup.values()) if self.sup else 0.0


def _store(res: Residuals, name: str, values, weight: float):
    res.fields[name] = np.asarray(values, dtype=float)
    v = np.abs(res.fields[name])
    res.sup[name] = float(v.max()) if v.size else 0.0
    res.l2[name] = float(np.sqrt(np.sum(v**2) * weight)) if v.size else 0.0


def lagrangian_residual(state: LagrangianState, contact: ContactCurve, tilde: TildeProfiles,
                        background: BackgroundState, P_b: float | None = None,
                        margin: float = 0.125, layer: int = 2) -> Residuals:
    """Residuals of the nonlinear system in mass coordinates and of its
    boundary conditions.

    Interior equations (made dimensionless by c_b^2 and u_b): continuity,
    the vorticity identity u_x omega = u_t (d_r u_t + u_t / r) +
    rho^(gamma-1)/(gamma-1) d_r A - d_r B with omega = d_x u_r - d_r u_x
    (``fields["omega"]`` holds omega), and transport of r u_theta, A and
    B.  Boundary lines: inlet mass flux and swirl, outlet W2, interface
    slip and pressure, axis W2.

    ``sup``/``l2`` cover every cell.  ``interior`` holds sup norms of the
    interior equations over cells at least ``margin * L`` from the inlet
    and outlet and ``layer`` cells from the axis and the interface.  The
    solution is only piecewise smooth up to the inlet corners, and the
    discrete fields carry an O(h^3) layer in the first cell off the axis,
    so the full sup norm converges more slowly than the interior one.
    """
    g = background.gamma
    ub = background.u_minus
    grid = state.grid
    h1, h2 = grid.h1, grid.h2
    y2 = grid.y2
    W1, W2, W3 = (np.real(np.asarray(v)) for v in (state.W1, state.W2, state.W3))
    A = np.broadcast_to(state.A_prof[None, :], grid.shape)
    B = np.broadcast_to(state.B_prof[None, :], grid.shape)
    ux, ur, ut = ub + W1, W2, W3
    q2 = ux**2 + ur**2 + ut**2
    h = B - 0.5 * q2
    rho = ((g - 1.0) / (g * A) * h) ** (1.0 / (g - 1.0))
    c2 = (g - 1.0) * h
    integrand = np.column_stack((np.zeros(grid.N1), y2[None, :] / (rho * ux)))
    r = np.sqrt(4.0 * cumulative_trapezoid(integrand, np.concatenate(([0.0], y2)), axis=1))
    Jx = r * rho * ux / (2.0 * y2)
    Jr = r * rho * ur / (2.0 * y2)

    def D1(f):
        return np.gradient(f, h1, axis=0, edge_order=2)

    def D2(f):
        return np.gradient(f, h2, axis=1, edge_order=2)

    dA = np.gradient(state.A_prof, h2, edge_order=2)[None, :]
    dB = np.gradient(state.B_prof, h2, edge_order=2)[None, :]
    dxux = D1(ux) - Jr * D2(ux)
    dxur = D1(ur) - Jr * D2(ur)
    drux, drur, drut = Jx * D2(ux), Jx * D2(ur), Jx * D2(ut)
    cont = ((c2 - ux**2) * dxux + (c2 - ur**2) * drur + (c2 + ut**2) * ur / r
            - ux * ur * (dxur + drux)) / background.c_sq
    omega = dxur - drux
    vort = (ux * omega - ut**2 / r - ut * drut
            - Jx * (rho ** (g - 1.0) / (g - 1.0) * dA - dB)) / ub

    res = Residuals()
    cell = h1 * h2
    _store(res, "continuity", cont, cell)
    _store(res, "vorticity", vort, cell)
    res.fields["omega"] = omega
    _store(res, "angular_momentum", D1(r * ut), cell)
    _store(res, "entropy", D1(np.array(A)), cell)
    _store(res, "bernoulli", D1(np.array(B)), cell)

    n_cut = int(round(margin * grid.N1))
    win = (slice(n_cut, grid.N1 - n_cut), slice(layer, grid.N2 - layer))
    for name in ("continuity", "vorticity", "angular_momentum", "entropy", "bernoulli"):
        res.interior[name] = float(np.max(np.abs(res.fields[name][win])))

    flux_in = _extrapolate(*(rho * ux)[:3])
    _store(res, "inlet_flux", flux_in - tilde.J, h2)
    r_in = _extrapolate(*r[:3])
    _store(res, "inlet_swirl", r_in * _extrapolate(*ut[:3]) - tilde.Lam, h2)
    _store(res, "outlet_W2", _extrapolate(ur[-1], ur[-2], ur[-3]), h2)
    top = [f[:, ::-1][:, :3].T for f in (ux, ur, ut)]
    ux_m, ur_m, ut_m = (_extrapolate(*t) for t in top)
    w = np.real(np.asarray(contact.w))
    _store(res, "interface_slip", ur_m - ux_m * w, h1)
    rho_m = ((g - 1.0) / (g * tilde.A_m) * (tilde.B_m - 0.5 * (ux_m**2 + ur_m**2 + ut_m**2))) ** (
        1.0 / (g - 1.0))
    P_ref = background.P_b if P_b is None else P_b
    _store(res, "interface_pressure", tilde.A_m * rho_m**g - P_ref, h1)
    _store(res, "axis_W2", _extrapolate(*ur[:, :3].T), h1)
    return res


def physical_euler_residual(sol: PhysicalSolution, buffer: int = 1,
                            margin: float = 0.125) -> dict:
    """Sup norms of the conservative axisymmetric Euler equations.

    Returns ``{"inner": {...}, "outer": {...}}`` keyed by equation.  Only
    points whose whole ``buffer`` neighbourhood lies on one side of the
    curve, and whose axial position is at least ``margin`` times the
    length from either end, are used (the inlet corner is singular).
    """
    x, r = sol.x, sol.r
    g = sol.background.gamma
    R = r[None, :]
    rho, ux, ur, ut, P = sol.rho, sol.ux, sol.ur, sol.ut, sol.P
    E = 0.5 * (ux**2 + ur**2 + ut**2) + g * P / ((g - 1.0) * rho)

    hx, hr = x[1] - x[0], r[1] - r[0]
    if not (np.allclose(np.diff(x), hx) and np.allclose(np.diff(r), hr)):
        raise ValueError("the lattice must be uniform in x and r")

    def dx(f):
        return np.gradient(f, hx, axis=0, edge_order=2)

    def dr(f):
        return np.gradient(f, hr, axis=1, edge_order=2)

    # r-weighted conservative form with the r derivative of the weight
    # taken analytically, so constant states give exactly zero
    eqs = {
        "mass": R * (dx(rho * ux) + dr(rho * ur)) + rho * ur,
        "x_momentum": R * (dx(rho * ux**2 + P) + dr(rho * ux * ur)) + rho * ux * ur,
        "r_momentum": R * (dx(rho * ux * ur) + dr(rho * ur**2 + P)) + rho * (ur**2 - ut**2),
        "theta_momentum": R * (dx(rho * ux * ut) + dr(rho * ur * ut)) + 2.0 * rho * ur * ut,
        "energy": R * (dx(rho * ux * E) + dr(rho * ur * E)) + rho * ur * E,
    }
    out = {}
    for side, mask in (("inner", sol.inner), ("outer", ~sol.inner)):
        keep = mask.copy()
        for s in range(1, buffer + 1):
            for ax in (0, 1):
                for sh in (s, -s):
                    keep &= np.roll(mask, sh, axis=ax)
        keep[:buffer] = keep[-buffer:] = False
        keep[:, -buffer:] = False
        length = x[-1] - x[0]
        keep[(x < x[0] + margin * length) | (x > x[-1] - margin * length)] = False
        out[side] = {k: float(np.max(np.abs(v[keep]))) if keep.any() else 0.0
                     for k, v in eqs.items()}
    return out


@dataclass(frozen=True)
class RHReport:
    normal_velocity: float
    pressure_jump: float
    tangential_jump: float


def rankine_hugoniot_check(sol: PhysicalSolution, slope=None) -> RHReport:
    """Contact conditions on the curve: u.n = 0, [P] = 0, and a nonzero
    tangential jump (minimum over the stations).

    ``slope`` overrides the interpolated curve slope at the stations; at
    the axial cell centres pass the centre slopes, which are the values
    the discrete slip condition imposes.
    """
    tr = sol.interface
    gp = sol.slope if slope is None else np.asarray(slope, dtype=float)
    norm = np.sqrt(1.0 + gp**2)
    un = (-gp * tr["ux"] + tr["ur"]) / norm
    ut_inner = (tr["ux"] + gp * tr["ur"]) / norm
    jump = np.sqrt(ut_inner**2 + tr["ut"] ** 2)
    return RHReport(float(np.max(np.abs(un))), float(np.max(np.abs(tr["P"] - sol.outer_P))),
                    float(np.min(jump)))


def streamline_reference(inlet, n: int = 4001):
    """Inlet radius and invariants as functions of the streamline label.

    Returns a callable ``label -> (r0, r0 nu0, A0, B0)`` built from the
    inlet data alone: y2(r)^2 = int_0^r s J0 by cumulative Simpson on a
    fine grid, inverted by a cubic spline.
    """
    r = np.linspace(0.0, 0.5, n)
    y2 = np.sqrt(cumulative_simpson(r * inlet.J0(r), x=r, initial=0.0))
    r_of = CubicSpline(y2, r)

    def at(label):
        r0 = np.clip(r_of(label), 0.0, 0.5)
        return r0, r0 * inlet.nu0(r0), inlet.A0(r0), inlet.B0(r0)

    return at


def conservation_checks(sol: PhysicalSolution, m_sq: float, inlet=None) -> dict:
    """Mass flux per station and streamline constancy of r u_theta, A, B.

    With ``inlet`` the invariants at every inner sample are compared with
    their inlet values on the same streamline label; otherwise with the
    samples of the first station, interpolated in the label.
    """
    g = sol.background.gamma
    tr = sol.interface
    flux_err = []
    for i in range(sol.x.size):
        inside = sol.inner[i]
        s = np.concatenate((sol.r[inside], [sol.g[i]]))
        f = np.concatenate((sol.rho[i, inside] * sol.ux[i, inside], [tr["rho"][i] * tr["ux"][i]]))
        flux_err.append(trapezoid(s * f, s) - m_sq)
    flux_err = np.asarray(flux_err)

    lam = sol.r[None, :] * sol.ut
    A = sol.P / sol.rho**g
    Bq = 0.5 * (sol.ux**2 + sol.ur**2 + sol.ut**2) + g * sol.P / ((g - 1.0) * sol.rho)
    out = {"mass_flux": float(np.max(np.abs(flux_err))), "mass_flux_profile": flux_err}
    if inlet is not None:
        _, lam0, A0, B0 = streamline_reference(inlet)(sol.label[sol.inner])
        for name, q, ref in (("angular_momentum", lam, lam0), ("entropy", A, A0),
                             ("bernoulli", Bq, B0)):
            out[name] = float(np.max(np.abs(q[sol.inner] - ref)))
        return out
    ref_labels = sol.label[0][sol.inner[0]]
    for name, q in (("angular_momentum", lam), ("entropy", A), ("bernoulli", Bq)):
        ref = q[0][sol.inner[0]]
        worst = 0.0
        for i in range(1, sol.x.size):
            inside = sol.inner[i]
            lab = sol.label[i][inside]
            use = (ref_labels >= lab.min()) & (ref_labels <= lab.max())
            vi = np.interp(ref_labels[use], lab, q[i][inside])
            if use.any():
                worst = max(worst, float(np.max(np.abs(vi - ref[use]))))
        out[name] = worst
    return out


# weak form ---------------------------------------------------------------


@dataclass(frozen=True)
class Bump:
    """Product test function (1 - s^2)^3 (1 - t^2)^3 on a rectangle."""

    x0: float
    r0: float
    ax: float
    ar: float

    @staticmethod
    def _b(s):
        inside = np.abs(s) < 1.0
        return np.where(inside, (1.0 - s**2) ** 3, 0.0), np.where(inside, -6.0 * s * (1.0 - s**2) ** 2, 0.0)

    def __call__(self, x, r):
        bx, dbx = self._b((x - self.x0) / self.ax)
        br, dbr = self._b((r - self.r0) / self.ar)
        return bx * br, dbx * br / self.ax, bx * dbr / self.ar


def default_bumps(L: float, g_mid: float = 0.5):
    """Test functions straddling the interface plus one fully inside."""
    return [Bump(0.5 * L, g_mid, 0.3 * L, 0.2), Bump(0.3 * L, g_mid, 0.2 * L, 0.15),
            Bump(0.6 * L, 0.25, 0.25 * L, 0.15)]


def _weak_integrands(eta, ex, er, r, rho, ux, ur, ut, P, gamma):
    Bq = 0.5 * (ux**2 + ur**2 + ut**2) + gamma * P / ((gamma - 1.0) * rho)
    return np.stack((
        (rho * ux * ex + rho * ur * er) * r,
        ((rho * ux**2 + P) * ex + rho * ux * ur * er) * r,
        (rho * ux * ur * ex + (rho * ur**2 + P) * er) * r + (rho * ut**2 + P) * eta,
        rho * ux * ut * ex * r + rho * ur * ut * (er * r - eta),
        rho * Bq * (ux * ex + ur * er) * r,
    ))


def _odd(n):
    return n + 1 if n % 2 == 0 else n


_GL4 = np.polynomial.legendre.leggauss(4)


def _composite_gauss(a: float, b: float, panels: int):
    """Nodes and weights of 4-point Gauss-Legendre on ``panels`` equal panels."""
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL4[0][None, :]).ravel()
    weights = (half[:, None] * _GL4[1][None, :]).ravel()
    return nodes, weights


def weak_form_check(sol: PhysicalSolution, bumps, resolution: int = 1) -> np.ndarray:
    """Weak-form integrals, shape (len(bumps), 5).

    Inner and outer parts are integrated separately, each in a coordinate
    that follows the curve, by composite 4-point Gauss-Legendre with
    ``resolution`` panels per solver cell (four nodes per cell at the
    default).  The rule is exact for the polynomial bumps against constant
    states, so piecewise-constant solutions give zero to rounding.
    """
    grid = sol.sampler.state.grid
    gamma = sol.background.gamma
    out = np.zeros((len(bumps), 5))
    for k, bump in enumerate(bumps):
        xlo, xhi = max(bump.x0 - bump.ax, 0.0), min(bump.x0 + bump.ax, grid.L)
        x, wx = _composite_gauss(xlo, xhi, max(1, int(np.ceil(resolution * (xhi - xlo) / grid.h1))))
        t, wt = _composite_gauss(0.0, 1.0, max(1, int(np.ceil(resolution * 2.0 * bump.ar / grid.h2))))
        gx = _curve(sol, x)
        rlo, rhi = max(bump.r0 - bump.ar, 0.0), bump.r0 + bump.ar
        total = np.zeros((5, x.size))
        a_in, b_in = np.full(x.size, rlo), np.clip(gx, rlo, rhi)
        r_in = a_in[:, None] + (b_in - a_in)[:, None] * t[None, :]
        fields = sol.sampler(x, r_in)
        eta, ex, er = bump(x[:, None], r_in)
        vals = _weak_integrands(eta, ex, er, r_in, fields["rho"], fields["ux"], fields["ur"],
                                fields["ut"], fields["P"], gamma)
        total += (vals @ wt) * (b_in - a_in)[None, :]
        a_out, b_out = np.clip(gx, rlo, rhi), np.full(x.size, rhi)
        r_out = a_out[:, None] + (b_out - a_out)[:, None] * t[None, :]
        eta, ex, er = bump(x[:, None], r_out)
        z = np.zeros_like(r_out)
        vals = _weak_integrands(eta, ex, er, r_out, z + sol.outer_rho, z, z, z,
                                z + sol.outer_P, gamma)
        total += (vals @ wt) * (b_out - a_out)[None, :]
        out[k] = total @ wx
    return out


def _curve(sol: PhysicalSolution, x):
    curve = getattr(sol, "curve", None)
    if curve is not None:
        return curve(x)
    return np.interp(x, sol.x, sol.g)


def corrupt_outer_pressure(sol: PhysicalSolution, eps: float) -> PhysicalSolution:
    """Copy of ``sol`` whose outer gas has pressure P_b + eps (detector case)."""
    outer_P = sol.outer_P + eps
    return replace(sol, P=np.where(sol.inner, sol.P, outer_P), outer_P=outer_P)


def pressure_surface_term(sol: PhysicalSolution, bump: Bump, eps: float, n: int = 2001) -> float:
    """r-momentum integral produced by raising the outer pressure by eps:
    -eps * int g(x) eta(x, g(x)) dx."""
    x = np.linspace(max(bump.x0 - bump.ax, 0.0), bump.x0 + bump.ax, _odd(n))
    gx = _curve(sol, x)
    eta, _, _ = bump(x, gx)
    return float(-eps * simpson(gx * eta, x=x))


# full derivative system -------------------------------------------------


def linearized_mismatch(inlet, w, w1, grid: Grid, background: BackgroundState,
                        inner_tol: float = 1e-13, max_iter: int = 60, base=None):
    """D_w Q(w) w1 from the state-dependent linear system.

    The system is the derivative of the Picard map (in the state and in
    the slope) at the converged state; its coefficients come from
    complex-step differentiation of the closed-form source formulas, which
    is exact to rounding, and it is solved by fixed-point iteration.
    Returns ``(dQ, base_state, tilde, grid)``.
    """
    from .free_boundary import interface_pressure

    grid, tilde = prepare(inlet, grid)
    w = np.asarray(w, dtype=float)
    w1 = np.asarray(w1, dtype=float)
    if w.size != grid.N1 or w1.size != grid.N1:
        raise ValueError("slopes must have one value per axial cell")
    if base is None:
        base, _ = solve_nonlinear(tilde, ContactCurve(grid.L, w), background, grid, inner_tol)
    h = 1e-30
    V = [np.zeros(grid.shape)] * 3
    for _ in range(max_iter):
        hat = build_state(grid, base.W1 + 1j * h * V[0], base.W2 + 1j * h * V[1],
                          base.W3 + 1j * h * V[2], tilde, background)
        new = picard_step(hat, tilde, ContactCurve(grid.L, w + 1j * h * w1), background)
        Vn = [np.imag(f) / h for f in (new.W1, new.W2, new.W3)]
        change = max(np.max(np.abs(a - b)) for a, b in zip(Vn, V))
        V = Vn
        if change <= 1e-14 * max(1.0, max(np.max(np.abs(v)) for v in V)):
            break
    lin = build_state(grid, base.W1 + 1j * h * V[0], base.W2 + 1j * h * V[1],
                      base.W3 + 1j * h * V[2], tilde, background)
    dQ = np.imag(interface_pressure(lin, tilde, background)) / h
    return dQ, base, tilde, grid


def derivative_system_check(inlet, w, w1, grid: Grid, background: BackgroundState,
                            tau: float = 1e-5, inner_tol: float = 1e-13,
                            max_iter: int = 60) -> float:
    """Sup discrepancy between :func:`linearized_mismatch` and the
    difference quotient (Q(w + tau w1) - Q(w)) / tau.

    Both mismatches are computed by Picard iterations warm-started from the
    converged state at ``w``, so ``w1 = 0`` gives exactly zero.
    """
    from .free_boundary import interface_pressure

    dQ, base, tilde, grid = linearized_mismatch(inlet, w, w1, grid, background, inner_tol,
                                                max_iter)
    w = np.asarray(w, dtype=float)

    def Q_of(wv):
        st, _ = solve_nonlinear(tilde, ContactCurve(grid.L, wv), background, grid, inner_tol,
                                initial=base)
        return interface_pressure(st, tilde, background) - background.P_b

    fd = (Q_of(w + tau * np.asarray(w1, dtype=float)) - Q_of(w)) / tau
    return float(np.max(np.abs(dQ - fd)))
