import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cases import BG

from axicontact.closure import (
    Admissibility,
    assemble_sources,
    check_admissible,
    closure_density,
    density_from_bernoulli,
    density_from_flux,
    nonlinear_residuals,
    pressure_from_density,
    swirl_solve,
    transport_invariants,
)
from axicontact.core import ContactCurve, Grid, Perturbation, make_inlet
from axicontact.errors import BallExit, VacuumOrCavitation
from axicontact.lagrangian import background_state, build_state, inlet_to_lagrangian


def test_density_examples():
    assert density_from_bernoulli(19.5, 5.0, 4.0) == pytest.approx(1.0, rel=1e-14)
    assert density_from_bernoulli(19.5, 5.0, 0.0) == pytest.approx((0.4 / 7.0 * 19.5) ** 2.5,
                                                                     rel=1e-14)
    assert density_from_bernoulli(BG.B_b_minus, BG.A_b_minus, 4.0, reference=BG) == 1.0


@given(B=st.floats(15.0, 25.0), A=st.floats(3.0, 7.0), q2=st.floats(0.0, 10.0))
def test_relative_density_matches_plain_formula(B, A, q2):
    plain = density_from_bernoulli(B, A, q2)
    rel = density_from_bernoulli(B, A, q2, reference=BG)
    assert rel == pytest.approx(plain, rel=1e-12)
    assert pressure_from_density(A, rel, BG) == pytest.approx(A * plain**1.4, rel=1e-12)


def test_vacuum_detected():
    with pytest.raises(VacuumOrCavitation):
        density_from_bernoulli(19.5, 5.0, 39.0)


def test_density_from_flux_background():
    assert density_from_flux(2.0, 19.5, 5.0, 0.0, BG)[()] == pytest.approx(1.0, rel=1e-13)


def test_density_from_flux_subsonic_branch():
    rho = density_from_flux(2.05, 19.5, 5.0, 0.1, BG)[()]
    u = 2.05 / rho
    assert 0.5 * u**2 + 0.05 + 1.4 * 5.0 * rho**0.4 / 0.4 == pytest.approx(19.5, rel=1e-13)
    assert u**2 < 1.4 * 5.0 * rho**0.4


def test_density_from_flux_no_subsonic_root():
    with pytest.raises(VacuumOrCavitation):
        density_from_flux(50.0, 19.5, 5.0, 0.0, BG)


def _setup(N=16, pert=None, sigma=0.0):
    grid = Grid(1.0, N, N)
    inl = make_inlet(BG, pert, sigma)
    tilde = inlet_to_lagrangian(inl, grid)
    return grid, tilde


def test_transport_invariants_are_inlet_copies():
    grid, tilde = _setup()
    A, B = transport_invariants(tilde)
    assert np.array_equal(A, tilde.A) and A is not tilde.A and np.array_equal(B, tilde.B)


def test_swirl_conserves_angular_momentum():
    grid = Grid(1.0, 16, 16)
    inl = make_inlet(BG, Perturbation({"nu": ("swirl", 1.0)}), 1e-2)
    tilde = inlet_to_lagrangian(inl, grid)
    st_ = background_state(grid, tilde, BG)
    W3 = swirl_solve(st_, tilde)
    np.testing.assert_allclose(W3 * st_.rhat, np.broadcast_to(tilde.Lam, grid.shape), rtol=1e-14)


def test_sources_vanish_at_background():
    grid, tilde = _setup()
    st_ = background_state(grid, tilde, BG)
    src = assemble_sources(st_, st_.A_prof, st_.B_prof, tilde, ContactCurve.flat(16, 1.0), BG)
    for F in (src.F1, src.F2, src.F3, src.F4):
        assert np.all(F == 0.0)
    E1, E2 = nonlinear_residuals(st_, tilde, BG)
    assert np.all(E1 == 0.0) and np.all(E2 == 0.0)


def test_slip_source_example():
    grid, tilde = _setup()
    st_ = background_state(grid, tilde, BG)
    src = assemble_sources(st_, st_.A_prof, st_.B_prof, tilde,
                           ContactCurve(1.0, np.full(16, 0.3)), BG)
    np.testing.assert_allclose(src.F4, 0.6, rtol=1e-15)


def _source_size(eps, grid, tilde):
    Y1, Y2 = grid.mesh()
    W1 = eps * np.cos(np.pi * Y1) * (1.0 + Y2**2)
    W2 = eps * Y2 * np.sin(np.pi * Y1)
    st_ = build_state(grid, W1, W2, np.zeros(grid.shape), tilde, BG)
    src = assemble_sources(st_, st_.A_prof, st_.B_prof, tilde, ContactCurve.flat(grid.N1, 1.0), BG)
    return np.array([np.max(np.abs(src.F1)), np.max(np.abs(src.F2)), np.max(np.abs(src.F3))])


def test_sources_are_quadratic():
    grid, tilde = _setup(32)
    ratio = _source_size(2e-3, grid, tilde) / _source_size(1e-3, grid, tilde)
    np.testing.assert_allclose(ratio, 4.0, rtol=0.02)


def test_closure_density_background():
    grid, tilde = _setup()
    z = np.zeros(grid.shape)
    assert np.all(closure_density(z, z, z, tilde.A, tilde.B, BG) == 1.0)


def test_ball_exit_on_large_density_window():
    grid, tilde = _setup()
    st_ = background_state(grid, tilde, BG)
    check_admissible(st_, BG)
    with pytest.raises(BallExit):
        check_admissible(st_, BG, Admissibility(rho_lo=1.5))
    with pytest.raises(BallExit):
        check_admissible(st_, BG, Admissibility(mach_sq_max=0.5))
    with pytest.raises(BallExit):
        check_admissible(st_, BG, Admissibility(jacobian_min=2.0))
