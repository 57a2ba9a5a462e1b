import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from iham.analysis import fitted_order, refinement_study
from iham.averaging import AveragingPolicy
from iham.exceptions import ProblemValidationError, ZeroPivotError
from iham.fd1d import (
    Grid1D,
    IrregularPair,
    TridiagonalSystem,
    assemble1d,
    correction_terms,
    is_m_matrix,
    locate_interface,
    solve1d,
    thomas_solve,
)
from iham.problem import InterfaceProblem1D, JumpForm, PiecewiseField, catalog_case

from conftest import constant_problem, linear_case_1d, random_linear_case_1d


# ------------------------------------------------------------------ grids


def test_grid_nodes():
    g = Grid1D(0.0, 1.0, 4)
    np.testing.assert_array_equal(g.nodes, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert g.h == 0.25
    with pytest.raises(ValueError):
        Grid1D(0.0, 1.0, 0)
    with pytest.raises(ValueError):
        Grid1D(1.0, 0.0, 4)


@pytest.mark.parametrize(
    "N, alpha, j, h_l, h_r",
    [
        (32, 1 / 3, 10, 7 / 192, 5 / 192),
        (4, 0.5, 2, 0.125, 0.375),
        (4, 0.1, 0, 0.225, 0.275),
        (4, 0.9, 3, 0.275, 0.225),
    ],
)
def test_locate_interface(N, alpha, j, h_l, h_r):
    pair = locate_interface(Grid1D(0.0, 1.0, N), alpha)
    assert pair.j == j
    assert pair.h_l == pytest.approx(h_l, rel=1e-13)
    assert pair.h_r == pytest.approx(h_r, rel=1e-13)


def test_locate_interface_outside():
    with pytest.raises(ValueError):
        locate_interface(Grid1D(0.0, 1.0, 8), 1.0)


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=4, max_value=5000), st.floats(min_value=1e-6, max_value=1 - 1e-6))
def test_locate_ownership(N, alpha):
    g = Grid1D(0.0, 1.0, N)
    pair = locate_interface(g, alpha)
    x = g.nodes
    assert x[pair.j] <= alpha < x[pair.j + 1]
    assert pair.h_l + pair.h_r == pytest.approx(2 * g.h, rel=1e-12)
    assert 0.5 * g.h * (1 - 1e-12) <= pair.h_l <= 1.5 * g.h * (1 + 1e-12)


# ------------------------------------------------------------- corrections


def test_correction_terms_hand_computed():
    pair = IrregularPair(3, 0.1, 0.1)
    bar = 4 / 3
    c_j, c_j1 = correction_terms(bar, pair, 0.1, 0.3, 0.4, 0.35, 1.0, 1.0, 1.0, 2.0)
    assert c_j == pytest.approx(bar / 0.01 * 1.025, rel=1e-13)
    assert c_j1 == pytest.approx(-bar / 0.01 * 0.95, rel=1e-13)


def test_correction_terms_vanish_for_homogeneous_jumps():
    pair = IrregularPair(3, 0.1, 0.1)
    assert correction_terms(1.0, pair, 0.1, 0.3, 0.4, 0.35, 0.0, 0.0, 1.0, 2.0) == (0.0, 0.0)


def test_correction_terms_from_delta_strength():
    # a pure solution jump 2W/(bm + bp) gives C_j = bar_beta/(h_l h) * 2W/(bm + bp)
    pair = IrregularPair(5, 0.06, 0.04)
    bm, bp, W, h = 2.0, 5.0, 0.7, 0.05
    c_j, c_j1 = correction_terms(3.0, pair, h, 0.25, 0.3, 0.28, 2 * W / (bm + bp), 0.0, bm, bp)
    assert c_j == pytest.approx(3.0 / (0.06 * h) * 2 * W / (bm + bp), rel=1e-14)
    assert c_j1 == pytest.approx(-3.0 / (0.04 * h) * 2 * W / (bm + bp), rel=1e-14)


# ------------------------------------------------------------------ assembly


def test_laplacian_rows_classical():
    sys_ = assemble1d(constant_problem(1.0, 1.0, 0.4), Grid1D(0, 1, 8), "classical")
    h2 = (1 / 8) ** 2
    np.testing.assert_allclose(sys_.diag, -2 / h2, rtol=1e-14)
    np.testing.assert_allclose(sys_.lower[1:], 1 / h2, rtol=1e-14)
    np.testing.assert_allclose(sys_.upper[:-1], 1 / h2, rtol=1e-14)
    assert sys_.lower[0] == 0 and sys_.upper[-1] == 0


def test_laplacian_rows_improved_at_cell_midpoint():
    sys_ = assemble1d(constant_problem(1.0, 1.0, 0.4375), Grid1D(0, 1, 8), "improved")
    dense = sys_.to_dense()
    expected = (np.diag(np.full(7, -2.0)) + np.diag(np.ones(6), 1) + np.diag(np.ones(6), -1)) * 64
    np.testing.assert_allclose(dense, expected, rtol=1e-13)


def test_ex2_irregular_row_coefficients():
    case = catalog_case("ex2")
    sys_ = assemble1d(case.problem, Grid1D(0, 1, 32))
    j = sys_.pair.j
    assert j == 10
    # bar_beta = 1.8 for 1.5 / 3 at this position; h_l h = 7/6144
    assert sys_.upper[j - 1] == pytest.approx(1.8 * 6144 / 7, rel=1e-13)
    assert sys_.lower[j - 1] == pytest.approx(1.5 * 6144 / 7, rel=1e-13)
    assert sys_.lower[j] == pytest.approx(1.8 * 6144 / 5, rel=1e-13)
    assert sys_.upper[j] == pytest.approx(3.0 * 6144 / 5, rel=1e-13)


def test_dirichlet_values_folded_into_rhs():
    p = constant_problem(1.0, 1.0, 0.45, dirichlet=(2.0, 3.0))
    sys_ = assemble1d(p, Grid1D(0, 1, 10), "classical")
    assert sys_.rhs[0] == pytest.approx(-2.0 * 100)
    assert sys_.rhs[-1] == pytest.approx(-3.0 * 100)


def test_assembly_rejects_invalid_input():
    with pytest.raises(ProblemValidationError):
        assemble1d(constant_problem(1.0, -1.0, 0.5), Grid1D(0, 1, 8))
    with pytest.raises(ValueError):
        assemble1d(constant_problem(1.0, 1.0, 0.5), Grid1D(0, 1, 3))
    with pytest.raises(ValueError):
        assemble1d(constant_problem(1.0, 1.0, 0.5), Grid1D(0, 1, 8), method="upwind")


def test_symmetrize_makes_matrix_symmetric_and_keeps_solution():
    case = catalog_case("ex1")
    plain = solve1d(case.problem, 64, symmetrize=False)
    sym = solve1d(case.problem, 64, symmetrize=True)
    assert not plain.system.is_symmetric()
    assert sym.system.is_symmetric()
    np.testing.assert_allclose(sym.values, plain.values, rtol=1e-12, atol=1e-14)
    j = sym.pair.j
    assert sym.system.row_scale[j - 1] == pytest.approx(sym.pair.h_l * 64)
    assert sym.system.row_scale[j] == pytest.approx(sym.pair.h_r * 64)


def test_classical_ignores_symmetrize():
    p = catalog_case("ex1").problem
    a = assemble1d(p, Grid1D(0, 1, 16), "classical", symmetrize=True)
    np.testing.assert_array_equal(a.row_scale, 1.0)


# ----------------------------------------------------------------- solvers


def test_thomas_against_dense_lu(rng):
    for _ in range(50):
        n = 50
        lower, upper = rng.uniform(0.1, 1, n), rng.uniform(0.1, 1, n)
        lower[0] = upper[-1] = 0.0
        diag = -(lower + upper) - rng.uniform(0.01, 1, n)
        sys_ = TridiagonalSystem(lower, diag, upper, rng.normal(size=n))
        expected = scipy.linalg.lu_solve(scipy.linalg.lu_factor(sys_.to_dense()), sys_.rhs)
        np.testing.assert_allclose(thomas_solve(sys_), expected, rtol=1e-12, atol=1e-12 * np.max(np.abs(expected)))


def test_thomas_zero_pivot():
    sys_ = TridiagonalSystem(np.array([0.0, 1.0]), np.array([0.0, 1.0]), np.array([1.0, 0.0]), np.ones(2))
    with pytest.raises(ZeroPivotError):
        thomas_solve(sys_)


def test_quadratic_reproduced_by_classical_scheme():
    p = constant_problem(1.0, 1.0, 0.37, f=(-2.0, -2.0))
    sol = solve1d(p, 16, "classical")
    x = sol.nodes
    np.testing.assert_allclose(sol.values, x * (1 - x), atol=1e-14)


def test_ex1_solution_error():
    case = catalog_case("ex1")
    sol = solve1d(case.problem, 32)
    err = np.max(np.abs(sol.values - case.exact(sol.nodes)))
    assert err == pytest.approx(2.7133e-03, rel=1e-4)
    assert sol.values[0] == case.problem.dirichlet[0]
    assert sol.values[-1] == case.problem.dirichlet[1]


@pytest.mark.parametrize("alpha", [0.01, 0.99, 0.5, 0.4375])
def test_piecewise_linear_edge_positions(alpha):
    case = linear_case_1d(3.0, 0.2, alpha, 1.5, -0.5, -2.0, 1.0)
    sol = solve1d(case.problem, 8)
    np.testing.assert_allclose(sol.values, case.exact(sol.nodes), atol=1e-12)


def test_piecewise_linear_exactness_random(rng):
    for _ in range(100):
        case = random_linear_case_1d(rng)
        N = int(rng.integers(4, 300))
        sol = solve1d(case.problem, N)
        assert np.max(np.abs(sol.values - case.exact(sol.nodes))) <= 1e-11


# ---------------------------------------------------------- M-matrix checks


def test_is_m_matrix_examples():
    assert is_m_matrix(assemble1d(catalog_case("ex1").problem, Grid1D(0, 1, 32)))
    bad = TridiagonalSystem(np.array([0.0, 1.0]), np.array([-1.0, 1.0]), np.array([1.0, 0.0]), np.zeros(2))
    report = is_m_matrix(bad)
    assert not report
    assert any("diagonal" in issue for issue in report.issues)
    weak = TridiagonalSystem(np.array([0.0, 1.0]), np.array([-1.0, -1.0]), np.array([1.0, 0.0]), np.zeros(2))
    assert not is_m_matrix(weak)


def _random_sign_problem(rng):
    bm, bp = 10 ** rng.uniform(-1, np.log10(2000), size=2)
    alpha = rng.uniform(0.02, 0.98)
    sigma = tuple(rng.uniform(0, 10, size=2)) if rng.random() < 0.7 else (0.0, 0.0)
    f = tuple(-rng.uniform(0, 5, size=2))
    dirichlet = tuple(rng.uniform(0, 2, size=2))
    return constant_problem(bm, bp, alpha, f=f, sigma=sigma, dirichlet=dirichlet), int(rng.integers(4, 400))


def test_discrete_maximum_principle(rng):
    for _ in range(100):
        problem, N = _random_sign_problem(rng)
        for method in ("improved", "classical"):
            sol = solve1d(problem, N, method)
            assert is_m_matrix(sol.system)
            assert sol.values.min() >= -1e-12


def test_m_matrix_with_variable_coefficient():
    p = InterfaceProblem1D(
        0.0, 1.0, 0.6,
        PiecewiseField("1 + x^2", "2 + sin(x)", 0.6),
        PiecewiseField("x", "x", 0.6),
        PiecewiseField("-1", "-1", 0.6),
        JumpForm(),
        (0.0, 0.0),
    )
    for N in (5, 16, 101):
        for sym in (False, True):
            assert is_m_matrix(assemble1d(p, Grid1D(0, 1, N), symmetrize=sym))


# ---------------------------------------------------------- scheme relations


def test_improved_equals_classical_at_cell_midpoint_with_continuous_beta():
    alpha = 0.40625 + 1 / 64  # midpoint of cell [13/32, 14/32]
    p = InterfaceProblem1D(
        0.0, 1.0, alpha,
        PiecewiseField("1 + x", "1 + x", alpha),
        PiecewiseField("0", "0", alpha),
        PiecewiseField("exp(x)", "exp(x)", alpha),
        JumpForm(),
        (0.0, 1.0),
    )
    g = Grid1D(0, 1, 32)
    midpoint = AveragingPolicy("midpoint")
    a = assemble1d(p, g, "improved", policy=midpoint)
    b = assemble1d(p, g, "classical", policy=midpoint)
    np.testing.assert_allclose(a.to_dense(), b.to_dense(), rtol=1e-12)
    np.testing.assert_allclose(a.rhs, b.rhs, rtol=1e-12)


@pytest.mark.parametrize("name", ["ex1", "ex2", "ex3"])
def test_improved_method_is_second_order(name):
    table = refinement_study(catalog_case(name), [32 * 2**i for i in range(8)])
    assert 1.85 <= table.fitted_order() <= 2.4


def test_classical_method_does_not_converge_on_ex1():
    Ns = [32 * 2**i for i in range(6)]
    table = refinement_study(catalog_case("ex1"), Ns, method="classical")
    assert fitted_order(Ns, table.errors) < 0.5
