"""Shared types: gas constants, the two-layer background flow, inlet data,
the Lagrangian grid and the containers passed between solver stages.

Conventions used everywhere in the package:

* ``y1`` is the axial coordinate (identical to ``x``), ``y2`` the mass
  coordinate.  The inner layer occupies ``0 < y2 < m`` with ``m**2`` the
  inlet mass flux; for the background ``m = 1/2``.
* 2D fields are ``(N1, N2)`` arrays sampled at cell centres
  ``y1_i = (i + 1/2) h1``, ``y2_j = (j + 1/2) h2``.  No unknown sits on the
  axis ``y2 = 0``.
* The background is normalised so that ``rho_minus * u_minus = 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import (
    CompatibilityViolation,
    NonPositive,
    NonPositiveFlux,
    SupersonicBackground,
)

#: Hölder exponent used for the inlet size ``sigma``.
HOLDER_ALPHA = 0.75
#: Number of samples on [0, 1/2] used to measure inlet profiles.
PROFILE_SAMPLES = 401
COMPAT_TOL = 1e-12


@dataclass(frozen=True)
class GasConstants:
    gamma: float = 1.4
    R: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise NonPositive(f"gamma must exceed 1, got {self.gamma}")
        if not self.R > 0.0:
            raise NonPositive(f"R must be positive, got {self.R}")

    def entropy_function(self, S):
        """A(S) = R exp(S)."""
        return self.R * np.exp(S)


@dataclass(frozen=True)
class BackgroundState:
    """Piecewise-constant reference flow: a uniform axial jet inside
    ``r < 1/2`` and gas at rest outside, both at pressure ``P_b``."""

    gas: GasConstants
    rho_minus: float
    u_minus: float
    rho_plus: float
    P_b: float

    @property
    def gamma(self) -> float:
        return self.gas.gamma

    @property
    def A_b_minus(self) -> float:
        return self.P_b / self.rho_minus**self.gamma

    @property
    def B_b_minus(self) -> float:
        g = self.gamma
        return 0.5 * self.u_minus**2 + g * self.P_b / ((g - 1.0) * self.rho_minus)

    @property
    def A_b_plus(self) -> float:
        return self.P_b / self.rho_plus**self.gamma

    @property
    def B_b_plus(self) -> float:
        g = self.gamma
        return g * self.P_b / ((g - 1.0) * self.rho_plus)

    @property
    def J_b_minus(self) -> float:
        return self.rho_minus * self.u_minus

    @property
    def c_sq(self) -> float:
        """Squared sound speed of the inner layer."""
        return self.gamma * self.P_b / self.rho_minus

    @property
    def mach_sq(self) -> float:
        return self.u_minus**2 / self.c_sq

    @property
    def beta(self) -> float:
        """sqrt(1 - M^2), the axial stretching factor of the linear problem."""
        return float(np.sqrt(1.0 - self.mach_sq))


def make_background(gas: GasConstants, rho_minus: float, P_b: float,
                    rho_plus: float) -> BackgroundState:
    """Build the background state with ``u_minus = 2 / rho_minus``."""
    for name, val in (("rho_minus", rho_minus), ("P_b", P_b), ("rho_plus", rho_plus)):
        if not val > 0.0:
            raise NonPositive(f"{name} must be positive, got {val}")
    u = 2.0 / rho_minus
    c_sq = gas.gamma * P_b / rho_minus
    if u**2 >= c_sq:
        raise SupersonicBackground(
            f"inner layer is not subsonic: u^2 = {u**2:g} >= c^2 = {c_sq:g}")
    return BackgroundState(gas, float(rho_minus), float(u), float(rho_plus), float(P_b))


# --------------------------------------------------------------------------
# inlet profiles


@dataclass(frozen=True)
class Profile:
    """A scalar profile of ``r`` together with its derivative."""

    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]

    def __call__(self, r):
        return self.f(np.asarray(r, dtype=float))

    def deriv(self, r):
        return self.df(np.asarray(r, dtype=float))

    def scaled(self, a: float, offset: float = 0.0) -> "Profile":
        f, df = self.f, self.df
        return Profile(lambda r: offset + a * f(r), lambda r: a * df(r))


def _const(c):
    return Profile(lambda r: np.full_like(r, c, dtype=float),
                   lambda r: np.zeros_like(r, dtype=float))


_TWO_PI = 2.0 * np.pi

#: Named basis functions on [0, 1/2].  ``bump`` and ``swirl`` vanish at
#: r = 1/2, so perturbations built from them leave the interface corner
#: pressure at P_b.
BASES: dict[str, Profile] = {
    "zero": _const(0.0),
    "cos": Profile(lambda r: np.cos(_TWO_PI * r) - 1.0,
                   lambda r: -_TWO_PI * np.sin(_TWO_PI * r)),
    "bump": Profile(lambda r: 0.5 * (1.0 + np.cos(_TWO_PI * r)),
                    lambda r: -np.pi * np.sin(_TWO_PI * r)),
    "swirl": Profile(lambda r: np.sin(_TWO_PI * r) ** 2,
                     lambda r: 2.0 * np.pi * np.sin(2.0 * _TWO_PI * r)),
    "quad": Profile(lambda r: r**2, lambda r: 2.0 * r),
    "linear": Profile(lambda r: r.copy(), lambda r: np.ones_like(r)),
}

CHANNELS = ("J", "nu", "A", "B")


@dataclass(frozen=True)
class Perturbation:
    """Parametric perturbation family: for each channel a basis name and a
    coefficient, e.g. ``Perturbation({"A": ("bump", 1.0)})``."""

    terms: Mapping[str, tuple[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        for ch, (name, _) in self.terms.items():
            if ch not in CHANNELS:
                raise ValueError(f"unknown channel {ch!r}")
            if name not in BASES:
                raise ValueError(f"unknown basis {name!r}")

    def profile(self, channel: str) -> Profile:
        if channel not in self.terms:
            return BASES["zero"]
        name, coef = self.terms[channel]
        return BASES[name].scaled(coef)


@dataclass(frozen=True)
class InletData:
    """Entrance profiles (J0, nu0, A0, B0) on ``0 <= r <= 1/2``."""

    background: BackgroundState
    J0: Profile
    nu0: Profile
    A0: Profile
    B0: Profile
    sigma: float

    def profiles(self):
        return {"J": self.J0, "nu": self.nu0, "A": self.A0, "B": self.B0}

    def corner_pressure(self) -> float:
        """Pressure at (x, r) = (0, 1/2) implied by the data when u_r = 0.

        Equals P_b whenever the perturbation vanishes at r = 1/2; otherwise
        no contact curve can make the interface pressure match there.
        """
        from .closure import density_from_flux

        r = np.array([0.5])
        rho = density_from_flux(self.J0(r), self.B0(r), self.A0(r), self.nu0(r) ** 2,
                                self.background)
        return float(self.A0(r)[0] * rho[0] ** self.background.gamma)


def _deviation_norm(prof: Profile, base: float) -> float:
    r = np.linspace(0.0, 0.5, PROFILE_SAMPLES)
    h = r[1] - r[0]
    return profile_norm(prof(r) - base, prof.deriv(r), h, HOLDER_ALPHA)


def _check_compat(inlet: InletData):
    zero = np.array([0.0])
    checks = [
        ("nu0(0)", inlet.nu0(zero)[0]),
        ("nu0'(0)", inlet.nu0.deriv(zero)[0]),
        ("A0'(0)", inlet.A0.deriv(zero)[0]),
        ("B0'(0)", inlet.B0.deriv(zero)[0]),
    ]
    for label, val in checks:
        if abs(val) > COMPAT_TOL:
            raise CompatibilityViolation(f"{label} = {val:g} breaks axis compatibility")
    r = np.linspace(0.0, 0.5, PROFILE_SAMPLES)
    if np.any(inlet.J0(r) <= 0.0):
        raise NonPositiveFlux("J0 must be positive on [0, 1/2]")


def make_inlet(background: BackgroundState, perturbation: Perturbation | None = None,
               sigma: float = 0.0) -> InletData:
    """Inlet data ``phi_b + sigma * perturbation``.

    The returned ``sigma`` field is the measured C^{1,alpha} size of the
    deviation from (J_b, 0, A_b, B_b), i.e. the requested amplitude times
    the norm of the basis combination.
    """
    pert = perturbation or Perturbation()
    base = {"J": background.J_b_minus, "nu": 0.0,
            "A": background.A_b_minus, "B": background.B_b_minus}
    profs = {}
    for ch in CHANNELS:
        p = pert.profile(ch)
        profs[ch] = p.scaled(sigma, base[ch])
    measured = sum(_deviation_norm(profs[ch], base[ch]) for ch in CHANNELS)
    inlet = InletData(background, profs["J"], profs["nu"], profs["A"], profs["B"],
                      float(measured))
    _check_compat(inlet)
    return inlet


def tabulated_inlet(background: BackgroundState, r, J, nu, A, B) -> InletData:
    """Inlet data from samples on [0, 1/2].

    The tables are splined with clamped (zero-slope) ends at the axis for
    nu, A and B, and are rejected if nu(0) is not zero.
    """
    from scipy.interpolate import CubicSpline

    r = np.asarray(r, dtype=float)
    if r[0] != 0.0 or abs(r[-1] - 0.5) > 1e-14:
        raise ValueError("tables must span [0, 1/2]")

    def spline(v, clamp):
        bc = ((1, 0.0), "not-a-knot") if clamp else "not-a-knot"
        s = CubicSpline(r, np.asarray(v, dtype=float), bc_type=bc)
        ds = s.derivative()
        return Profile(lambda x: s(x), lambda x: ds(x))

    profs = dict(J=spline(J, False), nu=spline(nu, True), A=spline(A, True),
                 B=spline(B, True))
    base = {"J": background.J_b_minus, "nu": 0.0,
            "A": background.A_b_minus, "B": background.B_b_minus}
    measured = sum(_deviation_norm(profs[ch], base[ch]) for ch in CHANNELS)
    inlet = InletData(background, profs["J"], profs["nu"], profs["A"], profs["B"],
                      float(measured))
    _check_compat(inlet)
    return inlet


# --------------------------------------------------------------------------
# grid and containers


@dataclass(frozen=True)
class Grid:
    L: float
    N1: int
    N2: int
    m: float = 0.5

    def __post_init__(self):
        if self.N1 < 8 or self.N2 < 8:
            raise ValueError("need at least 8 cells in each direction")
        if not (self.L > 0 and self.m > 0):
            raise NonPositive("L and m must be positive")

    @property
    def h1(self) -> float:
        return self.L / self.N1

    @property
    def h2(self) -> float:
        return self.m / self.N2

    @property
    def shape(self):
        return (self.N1, self.N2)

    @property
    def y1(self) -> np.ndarray:
        return (np.arange(self.N1) + 0.5) * self.h1

    @property
    def y2(self) -> np.ndarray:
        return (np.arange(self.N2) + 0.5) * self.h2

    @property
    def y1_nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.N1 + 1)

    @property
    def y2_faces(self) -> np.ndarray:
        return np.linspace(0.0, self.m, self.N2 + 1)

    def mesh(self):
        return np.meshgrid(self.y1, self.y2, indexing="ij")

    def with_m(self, m: float) -> "Grid":
        return Grid(self.L, self.N1, self.N2, float(m))

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.L, self.N1 * factor, self.N2 * factor, self.m)


def to_inlet(f: np.ndarray) -> np.ndarray:
    """Second-order extrapolation of a cell-centred field to y1 = 0."""
    return 1.5 * f[0] - 0.5 * f[1]


def to_outlet(f: np.ndarray) -> np.ndarray:
    return 1.5 * f[-1] - 0.5 * f[-2]


def to_interface(f: np.ndarray) -> np.ndarray:
    """Second-order extrapolation from the last two rows to y2 = m."""
    return 1.5 * f[..., -1] - 0.5 * f[..., -2]


@dataclass(frozen=True)
class TildeProfiles:
    """Inlet data expressed in the mass coordinate, sampled at the cell
    centres ``y2`` plus the interface values at ``y2 = m``."""

    m: float
    y2: np.ndarray
    r0: np.ndarray
    J: np.ndarray
    nu: np.ndarray
    A: np.ndarray
    B: np.ndarray
    dA: np.ndarray
    dB: np.ndarray
    A_m: float
    B_m: float

    @property
    def Lam(self) -> np.ndarray:
        """Angular momentum r * u_theta carried by each streamline."""
        return self.r0 * self.nu


@dataclass(frozen=True)
class LagrangianState:
    grid: Grid
    W1: np.ndarray
    W2: np.ndarray
    W3: np.ndarray
    A_prof: np.ndarray
    B_prof: np.ndarray
    rhat: np.ndarray
    rhat_m: np.ndarray
    rho: np.ndarray
    u_b: float

    @property
    def ux(self) -> np.ndarray:
        return self.u_b + self.W1

    def velocity(self):
        return self.u_b + self.W1, self.W2, self.W3

    def pressure(self, gamma: float, background: "BackgroundState | None" = None) -> np.ndarray:
        """A rho^gamma; relative to ``background`` when given (exact P_b
        for the background state)."""
        if background is None:
            return self.A_prof[None, :] * self.rho**gamma
        return background.P_b * (self.A_prof[None, :] / background.A_b_minus) * (
            self.rho / background.rho_minus) ** gamma

    def deviation(self, other: "LagrangianState") -> float:
        return max(np.max(np.abs(self.W1 - other.W1)),
                   np.max(np.abs(self.W2 - other.W2)),
                   np.max(np.abs(self.W3 - other.W3)))


@dataclass(frozen=True)
class ContactCurve:
    """Slope ``w`` of the interface at the axial cell centres.

    Node values are averages of neighbouring centres, with linear
    extrapolation at the inlet and an odd reflection at the outlet, so
    ``w(L) = 0`` and ``g(0) = 1/2`` hold exactly.
    """

    L: float
    w: np.ndarray

    @classmethod
    def flat(cls, N1: int, L: float) -> "ContactCurve":
        return cls(L, np.zeros(N1))

    @property
    def N1(self) -> int:
        return self.w.size

    @property
    def h(self) -> float:
        return self.L / self.N1

    @property
    def x_nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.N1 + 1)

    @property
    def x_centers(self) -> np.ndarray:
        return (np.arange(self.N1) + 0.5) * self.h

    @property
    def w_nodes(self) -> np.ndarray:
        ext = np.concatenate(([2.0 * self.w[0] - self.w[1]], self.w, [-self.w[-1]]))
        return 0.5 * (ext[:-1] + ext[1:])

    @property
    def g_nodes(self) -> np.ndarray:
        return 0.5 + np.concatenate(([0.0], np.cumsum(self.w) * self.h))

    @property
    def g_centers(self) -> np.ndarray:
        g = self.g_nodes
        return 0.5 * (g[:-1] + g[1:])

    def g(self, x) -> np.ndarray:
        return np.interp(x, self.x_nodes, self.g_nodes)

    def slope(self, x) -> np.ndarray:
        return np.interp(x, self.x_nodes, self.w_nodes)


@dataclass(frozen=True)
class PhysicalSolution:
    """Fields on a physical (x, r) lattice; arrays are ``(nx, nr)``.

    Points with ``r > g(x)`` carry the constant outer state
    (outer_rho, 0, 0, 0, outer_P).  ``label`` is the mass coordinate y2 of
    inner points (NaN outside), i.e. the streamline each sample lies on.
    ``interface`` holds inner traces on the curve at the stations ``x``
    (keys rho, ux, ur, ut, P) and ``sampler(x, r)`` evaluates the inner
    fields at arbitrary points below the curve.
    """

    x: np.ndarray
    r: np.ndarray
    rho: np.ndarray
    ux: np.ndarray
    ur: np.ndarray
    ut: np.ndarray
    P: np.ndarray
    inner: np.ndarray
    label: np.ndarray
    g: np.ndarray
    slope: np.ndarray
    background: BackgroundState
    interface: dict = field(default_factory=dict)
    sampler: Callable | None = None
    outer_rho: float | None = None
    outer_P: float | None = None

    def __post_init__(self):
        if self.outer_rho is None:
            object.__setattr__(self, "outer_rho", self.background.rho_plus)
        if self.outer_P is None:
            object.__setattr__(self, "outer_P", self.background.P_b)


# --------------------------------------------------------------------------
# discrete norms


def profile_norm(f, df, h, alpha=HOLDER_ALPHA) -> float:
    """C^{1,alpha} size of a 1D profile given samples of f and f'."""
    f = np.asarray(f, dtype=float)
    df = np.asarray(df, dtype=float)
    return float(np.max(np.abs(f)) + np.max(np.abs(df)) + _holder_1d(df, h, alpha))


def _holder_1d(d, h, alpha):
    best = 0.0
    k = 1
    while k < d.size:
        q = np.abs(d[k:] - d[:-k]) / (k * h) ** alpha
        best = max(best, float(q.max()))
        k *= 2
    return best


def discrete_norm(values, spacing=1.0, kind="sup", alpha=HOLDER_ALPHA,
                  boundary_distance=None) -> float:
    """Discrete surrogate of the (weighted) Hölder norms.

    kind is one of ``"sup"``, ``"grad-sup"`` or ``"weighted-holder"``.
    ``boundary_distance`` (same shape as ``values``) switches on the
    distance weights: delta**(1-alpha) on the gradient and
    min(delta_p, delta_q) on the difference quotient.  The quotient is
    maximised over nearest and dyadic-distance neighbours along each axis.
    """
    f = np.asarray(values, dtype=float)
    sup = float(np.max(np.abs(f))) if f.size else 0.0
    if kind == "sup":
        return sup
    spacing = np.broadcast_to(np.atleast_1d(np.asarray(spacing, dtype=float)), (f.ndim,))
    grads = np.gradient(f, *spacing) if f.ndim > 1 else [np.gradient(f, spacing[0])]
    gmag = np.sqrt(sum(g**2 for g in grads))
    delta = None if boundary_distance is None else np.asarray(boundary_distance, float)
    wgrad = gmag if delta is None else gmag * delta ** (1.0 - alpha)
    total = sup + float(np.max(wgrad))
    if kind == "grad-sup":
        return total
    if kind != "weighted-holder":
        raise ValueError(f"unknown norm kind {kind!r}")
    G = np.stack(grads)
    best = 0.0
    for ax in range(f.ndim):
        n = f.shape[ax]
        k = 1
        while k < n:
            lo = [slice(None)] * f.ndim
            hi = [slice(None)] * f.ndim
            lo[ax] = slice(0, n - k)
            hi[ax] = slice(k, n)
            diff = np.sqrt(np.sum((G[(slice(None), *hi)] - G[(slice(None), *lo)]) ** 2, axis=0))
            q = diff / (k * spacing[ax]) ** alpha
            if delta is not None:
                q = q * np.minimum(delta[tuple(lo)], delta[tuple(hi)])
            best = max(best, float(q.max()))
            k *= 2
    return total + best
