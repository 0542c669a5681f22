import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cases import BG

from axicontact.closure import SourceTerms, linear_operators
from axicontact.core import Grid, to_inlet, to_interface, to_outlet
from axicontact.elliptic import EllipticSolver, get_solver, manufactured_errors, observed_orders, solve_linear
from axicontact.errors import LinearSolveFailure


def _zero_sources(grid):
    z = np.zeros(grid.shape)
    return SourceTerms(z, z, np.zeros(grid.N2), np.zeros(grid.N1))


def test_zero_sources_give_zero_field():
    grid = Grid(1.0, 16, 16)
    W1, W2 = solve_linear(_zero_sources(grid), BG, grid)
    assert np.all(W1 == 0.0) and np.all(W2 == 0.0)


def test_manufactured_orders():
    errs = [manufactured_errors(Grid(1.0, N, N), BG.mach_sq) for N in (16, 32, 64)]
    for key in ("div_free", "curl_free"):
        orders = observed_orders([e[key] for e in errs])
        assert np.all((orders > 1.7) & (orders < 2.3)), (key, orders)


def test_observed_orders_floor():
    out = observed_orders([4e-2, 1e-2, 1e-14])
    assert out[0] == pytest.approx(2.0)
    assert np.isnan(out[1])


def _boundary_case(N):
    grid = Grid(1.0, N, N)
    F3 = 0.2 * (1.0 + np.cos(np.pi * grid.y2 / grid.m))
    F4 = 0.3 * np.sin(np.pi * grid.y1) ** 2
    z = np.zeros(grid.shape)
    W1, W2 = solve_linear(SourceTerms(z, z, F3, F4), BG, grid)
    return grid, F3, F4, W1, W2


def test_boundary_traces_converge_at_second_order():
    errs = []
    for N in (32, 64):
        grid, F3, F4, W1, W2 = _boundary_case(N)
        errs.append([np.max(np.abs(to_interface(W2) - F4)), np.max(np.abs(to_inlet(W1) - F3)),
                     np.max(np.abs(to_outlet(W2)))])
    ratios = np.array(errs[0]) / np.array(errs[1])
    assert np.all(ratios > 3.0), ratios


def test_axis_regularity():
    # W2 is odd in the radius: it vanishes linearly at the axis
    for N in (32, 64):
        grid, _, _, _, W2 = _boundary_case(N)
        assert np.max(np.abs(W2[:, 0])) <= 0.5 * grid.h2


def _operator_error(N, F1_of, F2_of, window):
    grid = Grid(1.0, N, N)
    Y1, Y2 = grid.mesh()
    F1, F2 = F1_of(Y1, Y2, grid.m), F2_of(Y1, Y2, grid.m)
    W1, W2 = solve_linear(SourceTerms(F1, F2, np.zeros(N), np.zeros(N)), BG, grid)
    L1, L2 = linear_operators(W1, W2, grid, BG.mach_sq)
    w = window(N)
    return np.max(np.abs(L1 - F1)[w]), np.max(np.abs(L2 - F2)[w])


def test_solver_inverts_operator_to_second_order():
    # sources compatible with the zero potential data at every corner
    def F1(y1, y2, m):
        return np.sin(np.pi * y1) * np.cos(y2)

    def F2(y1, y2, m):
        return y2 * (m - y2) * np.sin(np.pi * y1)

    def interior(N):
        return (slice(2, -2), slice(2, -2))

    coarse = np.array(_operator_error(64, F1, F2, interior))
    fine = np.array(_operator_error(128, F1, F2, interior))
    assert np.all(coarse / fine > 3.0), coarse / fine


def test_corner_incompatible_vorticity_converges_away_from_corner():
    # y2 cos(pi y1) does not vanish at the inlet-interface corner; the
    # operator error there stays O(1) but the bulk is second order
    def F1(y1, y2, m):
        return np.zeros_like(y1)

    def F2(y1, y2, m):
        return y2 * np.cos(np.pi * y1)

    def bulk(N):
        return (slice(N // 4, 3 * N // 4), slice(N // 4, 3 * N // 4))

    ratio = _operator_error(32, F1, F2, bulk)[1] / _operator_error(64, F1, F2, bulk)[1]
    assert ratio > 3.3


rows = st.lists(st.floats(-1.0, 1.0), min_size=16, max_size=16)


@settings(max_examples=20, deadline=None)
@given(rows, rows, st.floats(-2.0, 2.0))
def test_superposition(a, b, c):
    grid = Grid(1.0, 16, 16)
    Y1, Y2 = grid.mesh()
    base = np.sin(np.pi * Y1) * Y2
    s1 = SourceTerms(base * np.array(a)[None, :], np.cos(Y1) * np.array(b)[None, :],
                     np.array(a), np.array(b))
    s2 = SourceTerms(Y1 * Y2, base, np.ones(16), np.array(a))
    combo = SourceTerms(*(f + c * g for f, g in zip(
        (s1.F1, s1.F2, s1.F3, s1.F4), (s2.F1, s2.F2, s2.F3, s2.F4))))
    W = solve_linear(combo, BG, grid)
    U = solve_linear(s1, BG, grid)
    V = solve_linear(s2, BG, grid)
    for w, u, v in zip(W, U, V):
        np.testing.assert_allclose(w, u + c * v, atol=1e-10)


def test_stability_constant_bounded_under_refinement():
    consts = []
    for N in (16, 32, 64):
        grid = Grid(1.0, N, N)
        Y1, Y2 = grid.mesh()
        F1 = np.sin(np.pi * Y1) * np.cos(Y2)
        F2 = Y2 * np.cos(np.pi * Y1)
        W1, W2 = solve_linear(SourceTerms(F1, F2, np.zeros(N), np.zeros(N)), BG, grid)
        consts.append(max(np.abs(W1).max(), np.abs(W2).max()) / max(np.abs(F1).max(), np.abs(F2).max()))
    assert max(consts) / min(consts) < 1.1


def test_complex_sources_split_into_real_and_imaginary_solves():
    grid = Grid(1.0, 16, 16)
    Y1, Y2 = grid.mesh()
    F1 = np.sin(np.pi * Y1) * Y2
    s = SourceTerms(F1 + 1j * Y1, 1j * F1, np.zeros(16), np.zeros(16))
    W1, W2 = solve_linear(s, BG, grid)
    R1, R2 = solve_linear(SourceTerms(F1, np.zeros(grid.shape), np.zeros(16), np.zeros(16)), BG, grid)
    np.testing.assert_allclose(W1.real, R1, atol=1e-13)
    np.testing.assert_allclose(W2.real, R2, atol=1e-13)


def test_solver_is_cached_per_grid():
    grid = Grid(1.0, 16, 16)
    assert get_solver(grid, BG.mach_sq) is get_solver(Grid(1.0, 16, 16), BG.mach_sq)


def test_sonic_background_rejected():
    with pytest.raises(LinearSolveFailure):
        EllipticSolver(Grid(1.0, 16, 16), 1.0)
