import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cases import BG

from axicontact.core import (
    ContactCurve,
    GasConstants,
    Grid,
    Perturbation,
    discrete_norm,
    make_background,
    make_inlet,
    profile_norm,
    to_inlet,
    to_interface,
)
from axicontact.errors import CompatibilityViolation, NonPositive, NonPositiveFlux, SupersonicBackground


def test_background_reference_values():
    assert BG.u_minus == 2.0
    assert BG.c_sq == pytest.approx(7.0, rel=1e-15)
    assert BG.mach_sq == pytest.approx(4.0 / 7.0, rel=1e-15)
    assert BG.J_b_minus == 2.0
    assert BG.A_b_minus == 5.0
    assert BG.B_b_minus == pytest.approx(19.5, rel=1e-15)
    assert BG.beta == pytest.approx(np.sqrt(3.0 / 7.0), rel=1e-15)


def test_outer_layer_invariants():
    bg = make_background(GasConstants(), 1.0, 5.0, 2.0)
    assert bg.A_b_plus == pytest.approx(5.0 / 2.0**1.4, rel=1e-15)
    assert bg.B_b_plus == pytest.approx(1.4 * 5.0 / (0.4 * 2.0), rel=1e-15)


def test_supersonic_background_rejected():
    # u = 4, c^2 = 14
    with pytest.raises(SupersonicBackground):
        make_background(GasConstants(), 0.5, 5.0, 1.0)


@pytest.mark.parametrize("args", [(0.0, 5.0, 1.0), (1.0, -1.0, 1.0), (1.0, 5.0, 0.0)])
def test_non_positive_background_rejected(args):
    with pytest.raises(NonPositive):
        make_background(GasConstants(), *args)


def test_gas_constants_validated():
    with pytest.raises(NonPositive):
        GasConstants(gamma=1.0)
    with pytest.raises(NonPositive):
        GasConstants(R=0.0)


@given(rho=st.floats(0.2, 5.0), P=st.floats(0.5, 50.0), gamma=st.floats(1.05, 3.0))
def test_mach_number_identity(rho, P, gamma):
    gas = GasConstants(gamma)
    u2 = (2.0 / rho) ** 2
    if u2 >= gamma * P / rho:
        with pytest.raises(SupersonicBackground):
            make_background(gas, rho, P, 1.0)
        return
    bg = make_background(gas, rho, P, 1.0)
    assert bg.mach_sq == pytest.approx(4.0 / (rho * gamma * P), rel=1e-12)
    assert bg.J_b_minus == pytest.approx(2.0, rel=1e-15)
    assert bg.P_b == pytest.approx(bg.A_b_minus * rho**gamma, rel=1e-12)


def test_zero_perturbation_gives_background_profiles():
    inlet = make_inlet(BG)
    r = np.linspace(0.0, 0.5, 11)
    assert inlet.sigma == 0.0
    assert np.all(inlet.J0(r) == 2.0)
    assert np.all(inlet.nu0(r) == 0.0)
    assert np.all(inlet.A0(r) == BG.A_b_minus)
    assert np.all(inlet.B0(r) == BG.B_b_minus)
    assert inlet.corner_pressure() == pytest.approx(BG.P_b, rel=1e-14)


def test_cos_flux_perturbation_profile_and_size():
    inlet = make_inlet(BG, Perturbation({"J": ("cos", 1.0)}), 0.1)
    r = np.linspace(0.0, 0.5, 5)
    np.testing.assert_allclose(inlet.J0(r), 2.0 + 0.1 * (np.cos(2 * np.pi * r) - 1.0), rtol=1e-15)
    np.testing.assert_allclose(inlet.J0.deriv(r), -0.2 * np.pi * np.sin(2 * np.pi * r),
                               atol=1e-15)
    # measured size scales linearly with the amplitude
    twice = make_inlet(BG, Perturbation({"J": ("cos", 1.0)}), 0.2)
    assert twice.sigma == pytest.approx(2.0 * inlet.sigma, rel=1e-12)


def test_axis_compatibility_enforced():
    with pytest.raises(CompatibilityViolation):
        make_inlet(BG, Perturbation({"nu": ("linear", 1.0)}), 1e-2)
    with pytest.raises(CompatibilityViolation):
        make_inlet(BG, Perturbation({"A": ("linear", 1.0)}), 1e-2)


def test_non_positive_flux_rejected():
    # J0(1/2) = 2 - 2 * 2 < 0
    with pytest.raises(NonPositiveFlux):
        make_inlet(BG, Perturbation({"J": ("cos", 1.0)}), 2.0)


def test_unknown_channel_or_basis():
    with pytest.raises(ValueError):
        Perturbation({"X": ("bump", 1.0)})
    with pytest.raises(ValueError):
        Perturbation({"J": ("nope", 1.0)})


def test_grid_geometry():
    g = Grid(2.0, 8, 16, 0.5)
    assert g.h1 == 0.25 and g.h2 == 0.5 / 16
    np.testing.assert_allclose(g.y1, 0.125 + 0.25 * np.arange(8))
    assert g.y2_faces[-1] == 0.5
    assert g.refined().N1 == 16
    with pytest.raises(ValueError):
        Grid(1.0, 4, 16)


def test_boundary_extrapolation_exact_for_linear_fields():
    g = Grid(1.0, 8, 8)
    Y1, Y2 = g.mesh()
    f = 3.0 + 2.0 * Y1 - 5.0 * Y2
    np.testing.assert_allclose(to_inlet(f), 3.0 - 5.0 * g.y2, atol=1e-14)
    np.testing.assert_allclose(to_interface(f), 3.0 + 2.0 * g.y1 - 5.0 * g.m, atol=1e-14)


@given(st.lists(st.floats(-1.0, 1.0), min_size=8, max_size=40))
def test_contact_curve_end_conditions_exact(w):
    c = ContactCurve(1.0, np.array(w))
    assert c.g_nodes[0] == 0.5
    assert c.w_nodes[-1] == 0.0
    assert c.g(0.0) == 0.5
    assert c.slope(1.0) == 0.0


def test_flat_contact_curve():
    c = ContactCurve.flat(16, 1.0)
    assert np.all(c.g_nodes == 0.5) and np.all(c.g_centers == 0.5)


def test_contact_curve_integrates_slope():
    c = ContactCurve(1.0, np.full(10, 0.2))
    np.testing.assert_allclose(c.g_nodes, 0.5 + 0.2 * np.linspace(0, 1, 11), atol=1e-15)


def test_discrete_norm_examples():
    f = np.full((5, 5), -2.0)
    assert discrete_norm(f) == 2.0
    assert discrete_norm(f, 0.1, "grad-sup") == 2.0
    assert discrete_norm(f, 0.1, "weighted-holder") == 2.0
    x = np.linspace(0.0, 1.0, 11)
    lin = np.add.outer(3.0 * x, np.zeros(4))
    assert discrete_norm(lin, (0.1, 1.0), "grad-sup") == pytest.approx(3.0 + 3.0)
    with pytest.raises(ValueError):
        discrete_norm(lin, 0.1, "nope")


def test_profile_norm_of_linear_profile():
    r = np.linspace(0.0, 0.5, 11)
    assert profile_norm(2.0 * r, np.full_like(r, 2.0), 0.05) == pytest.approx(1.0 + 2.0)


arrays = st.lists(st.floats(-10.0, 10.0), min_size=16, max_size=16).map(
    lambda v: np.array(v).reshape(4, 4))


@settings(max_examples=50)
@given(arrays, arrays, st.floats(-3.0, 3.0), st.sampled_from(["sup", "grad-sup", "weighted-holder"]))
def test_discrete_norm_is_a_seminorm(f, g, a, kind):
    nf, ng = discrete_norm(f, 0.1, kind), discrete_norm(g, 0.1, kind)
    assert discrete_norm(f + g, 0.1, kind) <= nf + ng + 1e-9 * (1 + nf + ng)
    assert discrete_norm(a * f, 0.1, kind) == pytest.approx(abs(a) * nf, rel=1e-9, abs=1e-12)


def test_boundary_distance_weights_reduce_norm():
    x = np.linspace(0.0, 1.0, 9)
    f = np.add.outer(x**2, x**2)
    delta = np.minimum.outer(np.minimum(x, 1 - x), np.minimum(x, 1 - x)) + 1e-3
    assert discrete_norm(f, 0.125, "weighted-holder", boundary_distance=delta) <= \
        discrete_norm(f, 0.125, "weighted-holder")


def test_tabulated_inlet_reproduces_smooth_tables():
    from axicontact.core import tabulated_inlet

    r = np.linspace(0.0, 0.5, 41)
    J = 2.0 + 0.01 * np.cos(2 * np.pi * r)
    inl = tabulated_inlet(BG, r, J, np.zeros_like(r), np.full_like(r, BG.A_b_minus),
                          np.full_like(r, BG.B_b_minus))
    s = np.linspace(0.0, 0.5, 7)
    np.testing.assert_allclose(inl.J0(s), 2.0 + 0.01 * np.cos(2 * np.pi * s), atol=1e-7)
    np.testing.assert_allclose(inl.A0(s), BG.A_b_minus, rtol=1e-14)
    assert inl.sigma > 0.0


def test_tabulated_inlet_validation():
    from axicontact.core import tabulated_inlet

    r = np.linspace(0.0, 0.5, 11)
    ones = np.ones_like(r)
    with pytest.raises(CompatibilityViolation):
        tabulated_inlet(BG, r, 2.0 * ones, 0.1 * ones, BG.A_b_minus * ones, BG.B_b_minus * ones)
    with pytest.raises(ValueError):
        tabulated_inlet(BG, r[1:], 2.0 * ones[1:], 0 * ones[1:], ones[1:], ones[1:])
