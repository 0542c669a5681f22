import numpy as np
import pytest

from cases import BG, inlet

from axicontact.core import ContactCurve, Grid, InletData, LagrangianState, Perturbation, Profile, make_inlet
from axicontact.errors import DegenerateFlow, JacobianDegenerate, NonMonotoneRadius, RootBracketFailure
from axicontact.lagrangian import (
    InnerSampler,
    _along_y1,
    background_state,
    build_state,
    inlet_radius,
    inlet_to_lagrangian,
    jacobian,
    lagrangian_grid,
    mass_flux_parameter,
    radius_from_flux,
    to_physical,
)


def _flux_inlet(J, dJ):
    zero = Profile(lambda r: np.zeros_like(r), lambda r: np.zeros_like(r))
    const = lambda c: Profile(lambda r: np.full_like(r, c), lambda r: np.zeros_like(r))  # noqa: E731
    return InletData(BG, Profile(J, dJ), zero, const(BG.A_b_minus), const(BG.B_b_minus), 0.0)


@pytest.mark.parametrize("J, dJ, expected", [
    (lambda r: np.full_like(r, 2.0), np.zeros_like, 0.25),
    (lambda r: np.full_like(r, 4.0), np.zeros_like, 0.5),
    (lambda r: 2.0 + r**2, lambda r: 2.0 * r, 0.25 + 0.5**4 / 4.0),
])
def test_mass_flux_parameter(J, dJ, expected):
    assert mass_flux_parameter(_flux_inlet(J, dJ)) == pytest.approx(expected, rel=1e-14)


def test_lagrangian_grid_height():
    assert lagrangian_grid(make_inlet(BG), 1.0, 8, 8).m == pytest.approx(0.5, rel=1e-14)


def test_inlet_radius_background_is_identity():
    y2 = np.linspace(0.0, 0.5, 7)
    np.testing.assert_allclose(inlet_radius(make_inlet(BG), y2), y2, atol=1e-12)


def test_inlet_radius_doubled_flux():
    # J = 8: y2^2 = 4 r^2
    inl = _flux_inlet(lambda r: np.full_like(r, 8.0), np.zeros_like)
    y2 = np.linspace(0.0, 1.0, 5)
    np.testing.assert_allclose(inlet_radius(inl, y2), y2 / 2.0, atol=1e-12)


def test_inlet_radius_beyond_flux_rejected():
    with pytest.raises(RootBracketFailure):
        inlet_radius(make_inlet(BG), [0.6])


def test_swirl_profile_in_mass_coordinate():
    sigma = 1e-2
    inl = make_inlet(BG, Perturbation({"nu": ("quad", 1.0)}), sigma)
    tilde = inlet_to_lagrangian(inl, Grid(1.0, 8, 16))
    np.testing.assert_allclose(tilde.nu, sigma * tilde.y2**2, rtol=1e-11)
    np.testing.assert_allclose(tilde.Lam, sigma * tilde.y2**3, rtol=1e-11)


def test_radius_exact_for_background_flux():
    grid = Grid(1.0, 8, 16)
    rhat, rhat_m = radius_from_flux(np.full(grid.shape, 2.0), grid)
    np.testing.assert_allclose(rhat, np.broadcast_to(grid.y2, grid.shape), rtol=1e-14)
    np.testing.assert_allclose(rhat_m, 0.5, rtol=1e-14)


def test_radius_requires_positive_flux():
    grid = Grid(1.0, 8, 8)
    flux = np.full(grid.shape, 2.0)
    flux[3, 3] = 0.0
    with pytest.raises(DegenerateFlow):
        radius_from_flux(flux, grid)


def test_background_state_jacobian_is_one():
    grid = Grid(1.0, 8, 8)
    tilde = inlet_to_lagrangian(make_inlet(BG), grid)
    st = background_state(grid, tilde, BG)
    np.testing.assert_allclose(jacobian(st), 1.0, rtol=1e-14)
    assert np.all(st.rho == BG.rho_minus)


def test_degenerate_jacobian_detected():
    grid = Grid(1.0, 8, 8)
    tilde = inlet_to_lagrangian(make_inlet(BG), grid)
    st = background_state(grid, tilde, BG)
    squeezed = LagrangianState(grid, st.W1, st.W2, st.W3, st.A_prof, st.B_prof,
                               1e-3 * st.rhat, st.rhat_m, st.rho, st.u_b)
    with pytest.raises(JacobianDegenerate):
        jacobian(squeezed)


def _radius_error(N, a=4.0):
    grid = Grid(1.0, 8, N)
    flux = np.broadcast_to(2.0 * (1.0 + a * grid.y2**2), grid.shape)
    rhat, rhat_m = radius_from_flux(flux, grid)
    exact = np.sqrt(np.log1p(a * grid.y2**2) / a)
    exact_m = np.sqrt(np.log1p(a * grid.m**2) / a)
    return max(np.max(np.abs(rhat - exact)), np.max(np.abs(rhat_m - exact_m)))


def test_radius_quadrature_second_order():
    # flux 2 (1 + a y2^2) gives rhat^2 = log(1 + a y2^2) / a
    ratio = _radius_error(32) / _radius_error(64)
    assert 3.5 < ratio < 4.5


def test_along_y1_is_exact_for_linear_columns():
    grid = Grid(2.0, 8, 8)
    f = np.add.outer(3.0 * grid.y1, grid.y2)
    x = np.linspace(0.0, 2.0, 23)
    np.testing.assert_allclose(_along_y1(f, grid.y1, grid.L, x), np.add.outer(3.0 * x, grid.y2),
                               atol=1e-13)


def test_to_physical_background():
    grid = Grid(1.0, 16, 16)
    tilde = inlet_to_lagrangian(make_inlet(BG), grid)
    st = background_state(grid, tilde, BG)
    x = np.linspace(0.0, 1.0, 9)
    r = np.linspace(0.0, 0.8, 17)
    sol = to_physical(st, ContactCurve.flat(16, 1.0), BG, x, r)
    assert np.array_equal(sol.inner, np.broadcast_to(r < 0.5, sol.inner.shape))
    assert np.all(sol.rho[sol.inner] == BG.rho_minus)
    assert np.all(sol.rho[~sol.inner] == BG.rho_plus)
    assert np.all(sol.ux[sol.inner] == BG.u_minus) and np.all(sol.ux[~sol.inner] == 0.0)
    assert np.all(sol.P == BG.P_b)
    # labels are the radii for the background
    np.testing.assert_allclose(sol.label[sol.inner], np.broadcast_to(r, sol.inner.shape)[sol.inner],
                               atol=1e-14)
    assert np.all(np.isnan(sol.label[~sol.inner]))


def test_non_monotone_radius_detected():
    grid = Grid(1.0, 8, 8)
    tilde = inlet_to_lagrangian(make_inlet(BG), grid)
    st = background_state(grid, tilde, BG)
    rhat = st.rhat.copy()
    rhat[:, 4] = rhat[:, 2]
    bad = LagrangianState(grid, st.W1, st.W2, st.W3, st.A_prof, st.B_prof, rhat, st.rhat_m,
                          st.rho, st.u_b)
    with pytest.raises(NonMonotoneRadius):
        InnerSampler(bad, BG).columns(np.array([0.5]))


def test_perturbed_inlet_changes_height():
    assert lagrangian_grid(inlet("J", 0.1), 1.0, 8, 8).m > 0.5
