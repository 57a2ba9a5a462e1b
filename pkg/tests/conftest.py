"""Shared builders for the test suite."""

import numpy as np
import pytest

from iham.exprlang import as_expr
from iham.problem import (
    InterfaceProblem1D,
    InterfaceProblem2D,
    JumpForm,
    ManufacturedCase,
    PiecewiseField,
)

# lines collected by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def constant_problem(bm, bp, alpha, *, f=(0.0, 0.0), sigma=(0.0, 0.0), jumps=(0.0, 0.0),
                     dirichlet=(0.0, 0.0), a=0.0, b=1.0):
    """1D problem with piecewise-constant coefficient and data."""
    return InterfaceProblem1D(
        a=a,
        b=b,
        alpha=alpha,
        beta=PiecewiseField.constant(bm, bp, alpha),
        sigma=PiecewiseField.constant(*sigma, alpha),
        source=PiecewiseField.constant(*f, alpha),
        jumps=JumpForm(*jumps),
        dirichlet=dirichlet,
    )


def linear_case_1d(bm, bp, alpha, p1, r1, p2, r2):
    """Manufactured piecewise-linear solution ``p x + r`` on each side."""
    bm, bp, alpha, p1, r1, p2, r2 = map(float, (bm, bp, alpha, p1, r1, p2, r2))
    exact = PiecewiseField(as_expr(f"{p1!r}*x + {r1!r}"), as_expr(f"{p2!r}*x + {r2!r}"), alpha)
    jump_u = (p2 * alpha + r2) - (p1 * alpha + r1)
    jump_flux = bp * p2 - bm * p1
    problem = constant_problem(bm, bp, alpha, jumps=(jump_u, jump_flux), dirichlet=(r1, p2 + r2))
    return ManufacturedCase(problem, exact, {}, "linear")


def linear_case_2d(bm, bp, alpha, left, right):
    """Solution ``p x + q y + r`` on each side of ``x = alpha`` in the unit square."""
    (p1, q1, r1), (p2, q2, r2) = map(float, left), map(float, right)
    bm, bp, alpha = float(bm), float(bp), float(alpha)
    exact = PiecewiseField(
        as_expr(f"{p1!r}*x + {q1!r}*y + {r1!r}"), as_expr(f"{p2!r}*x + {q2!r}*y + {r2!r}"), alpha
    )
    jump_u = as_expr(f"{p2 * alpha + r2 - p1 * alpha - r1!r} + {q2 - q1!r}*y")
    jump_flux = bp * p2 - bm * p1
    zero = PiecewiseField.constant(0.0, 0.0, alpha)
    problem = InterfaceProblem2D(
        a=0.0,
        b=1.0,
        c=0.0,
        d=1.0,
        alpha=alpha,
        beta=PiecewiseField.constant(bm, bp, alpha),
        sigma=zero,
        source=zero,
        jumps=JumpForm(jump_u, jump_flux),
        boundary=exact,
    )
    return ManufacturedCase(problem, exact, {}, "linear2d")


def random_linear_case_1d(rng):
    bm, bp = 10 ** rng.uniform(-1, np.log10(2000), size=2)
    alpha = rng.uniform(0.05, 0.95)
    p1, r1, p2, r2 = rng.uniform(-2, 2, size=4)
    return linear_case_1d(bm, bp, alpha, p1, r1, p2, r2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
