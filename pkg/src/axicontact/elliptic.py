"""Linear first-order elliptic system and its two-potential solution.

The system solved for (W1, W2) on (0, L) x (0, m) is

    (1 - M^2) d1 W1 + d2 W2 + W2 / y2 = F1,      d1 W2 - d2 W1 = F2,
    W1(0, .) = F3,  W2(L, .) = 0,  W2(., m) = F4,  W2(., 0) = 0.

Stretching ``z1 = y1 / beta`` with ``beta = sqrt(1 - M^2)`` and
``V1 = beta W1`` turns it into a div-curl system in the (z1, z2) plane with
the axisymmetric weight z2.  Writing ``(V1, W2) = H + K``:

* H = (-(d2 Phi + Phi/z2), d1 Phi) is weighted divergence free; its curl
  gives ``d1^2 Phi + d2((1/z2) d2(z2 Phi)) = beta F2`` with Phi = 0 on the
  inlet, axis and interface and d1 Phi = 0 at the outlet;
* K = grad phi is curl free; ``d1^2 phi + (1/z2) d2(z2 d2 phi) = F1`` with
  d1 phi = beta F3 at the inlet, phi = 0 at the outlet, d2 phi = F4 on the
  interface and zero flux through the axis.

Both potentials are discretised with second-order cell-centred
differences; the boundary conditions enter through ghost cells.  The
matrices depend only on the grid and the Mach number, so each is factorised
once and reused.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .closure import SourceTerms
from .core import BackgroundState, Grid
from .errors import LinearSolveFailure


@dataclass(frozen=True)
class ScaledProblem:
    """Geometry of the stretched problem."""

    grid: Grid
    beta: float

    @property
    def Lstar(self) -> float:
        return self.grid.L / self.beta

    @property
    def h1(self) -> float:
        return self.grid.h1 / self.beta

    @property
    def z1(self) -> np.ndarray:
        return self.grid.y1 / self.beta

    @property
    def z2(self) -> np.ndarray:
        return self.grid.y2


# ghost-cell derivative helpers -------------------------------------------


def _deriv(f, h, axis, lo, hi):
    """Centred derivative along ``axis`` with ghost values lo/hi (arrays
    shaped like one slice of f)."""
    f = np.moveaxis(f, axis, 0)
    ext = np.concatenate((lo[None], f, hi[None]), axis=0)
    out = (ext[2:] - ext[:-2]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def _ghost_dirichlet(f0, f1, value=0.0):
    """Ghost value from the quadratic through (face, value), f0 and f1."""
    return 8.0 * value / 3.0 - 2.0 * f0 + f1 / 3.0


def _ghost_cubic(f0, f1, f2, value=0.0):
    """Ghost value from the cubic through (face, value), f0, f1 and f2."""
    return 3.2 * value - 3.0 * f0 + f1 - 0.2 * f2


def _second_difference(n, lo, hi):
    """Three-point second difference with boundary closures.

    ``lo``/``hi`` are ``"neumann"`` (ghost mirrors the boundary cell) or
    ``"dirichlet"`` (ghost from the quadratic through a zero face value).
    """
    T = sp.lil_matrix((n, n))
    for i in range(n):
        T[i, i] = -2.0
        if i > 0:
            T[i, i - 1] = 1.0
        if i < n - 1:
            T[i, i + 1] = 1.0
    for i, nb, kind in ((0, 1, lo), (n - 1, n - 2, hi)):
        if kind == "neumann":
            T[i, i] += 1.0
        else:
            T[i, i] += -2.0
            T[i, nb] += 1.0 / 3.0
    return T.tocsr()


class EllipticSolver:
    """Factorised potential solvers for one grid and one Mach number."""

    def __init__(self, grid: Grid, mach_sq: float):
        if not 0.0 <= mach_sq < 1.0:
            raise LinearSolveFailure(f"mach_sq = {mach_sq} is outside [0, 1)")
        self.grid = grid
        self.mach_sq = float(mach_sq)
        self.scaled = ScaledProblem(grid, float(np.sqrt(1.0 - mach_sq)))
        self._lu = {}

    # matrices ------------------------------------------------------------

    def _z_operator(self, kind: str) -> sp.csr_matrix:
        n = self.grid.N2
        h = self.grid.h2
        z = self.scaled.z2
        zf = self.grid.y2_faces
        rows, cols, vals = [], [], []

        def add(i, j, v):
            rows.append(i)
            cols.append(j)
            vals.append(v)

        if kind == "phi1":
            # flux q = (1/z) d(z Phi) on faces; row = (q_{j+1/2} - q_{j-1/2}) / h
            for j in range(n - 1):
                c = 1.0 / (h * h * zf[j + 1])
                for row, sgn in ((j, 1.0), (j + 1, -1.0)):
                    add(row, j + 1, sgn * c * z[j + 1])
                    add(row, j, -sgn * c * z[j])
            # interface face: Phi = 0 there, so q = d2 Phi from a quadratic fit
            add(n - 1, n - 1, -3.0 / (h * h))
            add(n - 1, n - 2, 1.0 / (3.0 * h * h))
            # axis face: q = 2 dPhi/dz (0) from the cubic through Phi(0) = 0
            for k, wgt in enumerate((3.75, -5.0 / 6.0, 0.15)):
                add(0, k, -2.0 * wgt / (h * h))
        else:
            for j in range(n - 1):
                c = zf[j + 1] / (h * h)
                for row, sgn in ((j, 1.0), (j + 1, -1.0)):
                    add(row, j + 1, sgn * c / z[row])
                    add(row, j, -sgn * c / z[row])
            if kind == "phi2_dirichlet":
                # face derivative (8 d - 9 phi_{N-1} + phi_{N-2}) / (3 h)
                c = zf[-1] / (z[-1] * h * h)
                add(n - 1, n - 1, -3.0 * c)
                add(n - 1, n - 2, c / 3.0)
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    def _matrix(self, kind: str) -> sp.csc_matrix:
        n1 = self.grid.N1
        h1 = self.scaled.h1
        if kind == "phi1":
            T1 = _second_difference(n1, "dirichlet", "neumann")
        else:
            T1 = _second_difference(n1, "neumann", "dirichlet")
        T2 = self._z_operator(kind)
        A = sp.kron(T1 / (h1 * h1), sp.identity(self.grid.N2)) + sp.kron(sp.identity(n1), T2)
        return A.tocsc()

    def _solve(self, kind: str, rhs: np.ndarray) -> np.ndarray:
        if np.iscomplexobj(rhs):
            return self._solve(kind, rhs.real) + 1j * self._solve(kind, rhs.imag)
        lu = self._lu.get(kind)
        if lu is None:
            try:
                lu = splu(self._matrix(kind))
            except RuntimeError as exc:
                raise LinearSolveFailure(f"factorisation failed: {exc}") from exc
            self._lu[kind] = lu
        sol = lu.solve(np.ascontiguousarray(rhs, dtype=float).ravel())
        if not np.all(np.isfinite(sol)):
            raise LinearSolveFailure("non-finite solution")
        return sol.reshape(self.grid.shape)

    # potentials ----------------------------------------------------------

    def potential_div_free(self, f2: np.ndarray) -> np.ndarray:
        return self._solve("phi1", f2)

    def potential_curl_free(self, f1, f3, f4) -> np.ndarray:
        rhs = np.array(f1, dtype=np.result_type(f1, f3, f4, float), copy=True)
        rhs[0, :] += np.asarray(f3) / self.scaled.h1
        rhs[:, -1] -= self.grid.m * np.asarray(f4) / (self.scaled.z2[-1] * self.grid.h2)
        return self._solve("phi2_neumann", rhs)

    def potential_dirichlet(self, f1, d) -> np.ndarray:
        """Curl-free potential with homogeneous inlet flux and phi = d on the
        interface (used by the derivative inverse)."""
        rhs = np.array(f1, dtype=float, copy=True)
        rhs[:, -1] -= 8.0 * self.grid.m * np.asarray(d) / (3.0 * self.scaled.z2[-1] * self.grid.h2**2)
        return self._solve("phi2_dirichlet", rhs)

    # velocity parts ------------------------------------------------------

    def div_free_field(self, Phi: np.ndarray):
        h1, h2 = self.scaled.h1, self.grid.h2
        z = self.scaled.z2[None, :]
        zero2 = np.zeros(self.grid.N1)
        d2 = _deriv(Phi, h2, 1,
                    _ghost_cubic(Phi[:, 0], Phi[:, 1], Phi[:, 2]),
                    _ghost_dirichlet(Phi[:, -1], Phi[:, -2], zero2))
        d1 = _deriv(Phi, h1, 0,
                    _ghost_dirichlet(Phi[0], Phi[1]),
                    Phi[-1])
        return -(d2 + Phi / z), d1

    def curl_free_field(self, phi, f3=0.0, top=None, dirichlet=False):
        h1, h2 = self.scaled.h1, self.grid.h2
        n1 = self.grid.N1
        f3 = np.broadcast_to(np.asarray(f3), (self.grid.N2,))
        d1 = _deriv(phi, h1, 0, phi[0] - h1 * f3, _ghost_dirichlet(phi[-1], phi[-2]))
        top = np.zeros(n1) if top is None else np.broadcast_to(np.asarray(top), (n1,))
        hi = (_ghost_dirichlet(phi[:, -1], phi[:, -2], top) if dirichlet
              else phi[:, -1] + h2 * top)
        d2 = _deriv(phi, h2, 1, phi[:, 0], hi)
        return d1, d2

    def solve_div_free(self, f2: np.ndarray):
        """(H1, H2) in scaled variables for the scaled vorticity source f2."""
        return self.div_free_field(self.potential_div_free(f2))

    def solve_curl_free(self, f1, f3, f4):
        """(K1, K2) in scaled variables; f3 is the scaled inlet flux."""
        phi = self.potential_curl_free(f1, f3, f4)
        return self.curl_free_field(phi, f3, f4)

    def solve_linear(self, sources: SourceTerms):
        beta = self.scaled.beta
        H1, H2 = self.solve_div_free(beta * sources.F2)
        K1, K2 = self.solve_curl_free(sources.F1, beta * sources.F3, sources.F4)
        return (H1 + K1) / beta, H2 + K2


@lru_cache(maxsize=16)
def get_solver(grid: Grid, mach_sq: float) -> EllipticSolver:
    return EllipticSolver(grid, mach_sq)


def solve_linear(sources: SourceTerms, background: BackgroundState, grid: Grid):
    """(W1, W2) solving the linear system with the given sources."""
    return get_solver(grid, background.mach_sq).solve_linear(sources)


def solve_div_free(f2: np.ndarray, grid: Grid, mach_sq: float):
    return get_solver(grid, mach_sq).solve_div_free(f2)


def solve_curl_free(f1: np.ndarray, f3, f4, grid: Grid, mach_sq: float):
    return get_solver(grid, mach_sq).solve_curl_free(f1, f3, f4)


# --------------------------------------------------------------------------
# manufactured solutions


def manufactured_errors(grid: Grid, mach_sq: float) -> dict:
    """Sup errors of both potential solvers on closed-form solutions.

    With k = pi / (2 Lstar):

    * Phi = z2 (z2 - m) sin(k z1) meets every boundary condition of the
      divergence-free problem and gives f2 = (3 - k^2 z2 (z2 - m)) sin(k z1);
    * phi = cos(pi z2 / m) cos(k z1) has zero inlet and interface fluxes and
      vanishes at the outlet; f1 follows from the operator.
    """
    solver = get_solver(grid, mach_sq)
    sc = solver.scaled
    m = grid.m
    k = np.pi / (2.0 * sc.Lstar)
    Z1, Z2 = np.meshgrid(sc.z1, sc.z2, indexing="ij")
    p = Z2 * (Z2 - m)
    Phi = p * np.sin(k * Z1)
    f2 = (3.0 - k * k * p) * np.sin(k * Z1)
    a = np.pi / m
    phi = np.cos(a * Z2) * np.cos(k * Z1)
    f1 = -(a * a * np.cos(a * Z2) + a * np.sin(a * Z2) / Z2 + k * k * np.cos(a * Z2)) * np.cos(k * Z1)
    zero = np.zeros(grid.N2)
    return {
        "div_free": float(np.max(np.abs(solver.potential_div_free(f2) - Phi))),
        "curl_free": float(np.max(np.abs(solver.potential_curl_free(f1, zero, np.zeros(grid.N1)) - phi))),
    }


def observed_orders(errors) -> np.ndarray:
    """log2 ratios of successive errors under grid doubling (NaN at the
    rounding floor)."""
    e = np.asarray(errors, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log2(e[:-1] / e[1:])
    floor = (e[:-1] < 1e-13) | (e[1:] < 1e-13)
    return np.where(floor, np.nan, out)
