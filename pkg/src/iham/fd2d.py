"""Five-point assembly for a rectangle cut by the line ``x = alpha``.

The x-direction is discretized exactly as in one dimension (irregular
columns ``k`` and ``k+1`` with ``x_k <= alpha < x_{k+1}``); the y-direction
uses the standard flux stencil with midpoint coefficients. Unknowns are
interior nodes in lexicographic order, ``index = (j-1)*(m-1) + (i-1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded

from .averaging import interface_average
from .exceptions import ConvergenceError, ProblemValidationError
from .fd1d import Grid1D, IrregularPair, correction_terms, locate_interface
from .problem import LEFT, RIGHT, validate

__all__ = [
    "Grid2D",
    "SparseSystem",
    "Solution2D",
    "CGInfo",
    "assemble2d",
    "solve2d",
    "direct_solve2d",
    "solve_interface2d",
]


@dataclass(frozen=True)
class Grid2D:
    a: float
    b: float
    c: float
    d: float
    m: int
    n: int

    def __post_init__(self):
        for name in ("m", "n"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not (self.a < self.b and self.c < self.d):
            raise ValueError("grid needs a < b and c < d")

    @property
    def hx(self):
        return (self.b - self.a) / self.m

    @property
    def hy(self):
        return (self.d - self.c) / self.n

    @property
    def xs(self):
        return Grid1D(self.a, self.b, self.m).nodes

    @property
    def ys(self):
        return Grid1D(self.c, self.d, self.n).nodes

    @property
    def unknowns(self):
        return (self.m - 1) * (self.n - 1)

    def locate(self, alpha):
        return locate_interface(Grid1D(self.a, self.b, self.m), alpha)


@dataclass(eq=False)
class SparseSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    grid: Grid2D
    pair: IrregularPair
    row_scale: np.ndarray
    symmetric: bool = False

    def __len__(self):
        return self.matrix.shape[0]


def assemble2d(problem, grid, symmetrize=True):
    """Build the sparse system for a 2D line-interface problem.

    With ``symmetrize`` the rows in the two irregular columns are scaled by
    ``h_l/h_x`` and ``h_r/h_x``, which makes the matrix symmetric (and
    negative definite), as required by :func:`solve2d`.
    """
    violations = validate(problem)
    if violations:
        raise ProblemValidationError(violations)
    if grid.m < 4 or grid.n < 4:
        raise ValueError("need at least 4 cells in each direction")
    m, n = grid.m, grid.n
    hx, hy = grid.hx, grid.hy
    x, y = grid.xs, grid.ys
    alpha = problem.alpha
    pair = grid.locate(alpha)
    k = pair.j
    beta = problem.beta

    xi, yj = x[1:m], y[1:n]
    XI, YJ = np.meshgrid(xi, yj)  # shape (n-1, m-1)

    # x-direction: cell midpoints for every interior row, interface cell replaced
    xm = 0.5 * (x[:-1] + x[1:])
    XM, YM = np.meshgrid(xm, yj)
    beta_x = beta(XM, YM)
    bm = beta.side_value(LEFT, np.full(n - 1, alpha), yj)
    bp = beta.side_value(RIGHT, np.full(n - 1, alpha), yj)
    bar = interface_average(bm, bp, x[k], x[k + 1], alpha)
    beta_x[:, k] = bar

    # y-direction: midpoints between grid rows at each interior column
    ym = 0.5 * (y[:-1] + y[1:])
    XC, YC = np.meshgrid(xi, ym)  # shape (n, m-1)
    beta_y = beta(XC, YC)

    west = beta_x[:, :-1] / hx**2
    east = beta_x[:, 1:] / hx**2
    south = beta_y[:-1, :] / hy**2
    north = beta_y[1:, :] / hy**2
    rhs = problem.source(XI, YJ)
    sigma = problem.sigma(XI, YJ)
    scale = np.ones_like(rhs)

    ju, jf = problem.jump_values(yj)
    c_k, c_k1 = correction_terms(bar, pair, hx, x[k], x[k + 1], alpha, ju, jf, bm, bp)
    if k >= 1:
        col = k - 1
        west[:, col] = beta_x[:, k - 1] / (pair.h_l * hx)
        east[:, col] = bar / (pair.h_l * hx)
        rhs[:, col] += c_k
        scale[:, col] = pair.h_l / hx
    if k + 1 <= m - 1:
        col = k
        west[:, col] = bar / (pair.h_r * hx)
        east[:, col] = beta_x[:, k + 1] / (pair.h_r * hx)
        rhs[:, col] += c_k1
        scale[:, col] = pair.h_r / hx

    diag = -(west + east + south + north) - sigma

    g = problem.boundary
    rhs[:, 0] -= west[:, 0] * g(np.full(n - 1, x[0]), yj)
    rhs[:, -1] -= east[:, -1] * g(np.full(n - 1, x[m]), yj)
    rhs[0, :] -= south[0, :] * g(xi, np.full(m - 1, y[0]))
    rhs[-1, :] -= north[-1, :] * g(xi, np.full(m - 1, y[n]))

    if not symmetrize:
        scale = np.ones_like(rhs)
    west, east, south, north, diag, rhs = (
        a * scale for a in (west, east, south, north, diag, rhs)
    )

    nx, ny = m - 1, n - 1
    idx = np.arange(nx * ny).reshape(ny, nx)
    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [diag.ravel()]
    for coef, sl_from, sl_to in (
        (west, np.s_[:, 1:], np.s_[:, :-1]),
        (east, np.s_[:, :-1], np.s_[:, 1:]),
        (south, np.s_[1:, :], np.s_[:-1, :]),
        (north, np.s_[:-1, :], np.s_[1:, :]),
    ):
        rows.append(idx[sl_from].ravel())
        cols.append(idx[sl_to].ravel())
        vals.append(coef[sl_from].ravel())
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nx * ny, nx * ny),
    )
    A.sort_indices()
    return SparseSystem(A, rhs.ravel(), grid, pair, scale.ravel(), symmetric=bool(symmetrize))


@dataclass
class CGInfo:
    iterations: int
    residual: float
    converged: bool


def _pcg(A, b, tol, max_iter):
    """Jacobi-preconditioned CG for a symmetric positive definite ``A``."""
    x = np.zeros_like(b)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return x, CGInfo(0, 0.0, True)
    inv_diag = 1.0 / A.diagonal()
    total = 0
    true_res = 1.0
    # restart from the true residual if the recurrence drifted below it
    for _restart in range(4):
        r = b - A @ x
        true_res = np.linalg.norm(r) / bnorm
        if true_res <= tol:
            return x, CGInfo(total, true_res, True)
        z = inv_diag * r
        p = z.copy()
        rz = r @ z
        while total < max_iter:
            total += 1
            Ap = A @ p
            step = rz / (p @ Ap)
            x += step * p
            r -= step * Ap
            if np.linalg.norm(r) / bnorm <= tol:
                break
            z = inv_diag * r
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
        else:
            break
    true_res = np.linalg.norm(b - A @ x) / bnorm
    return x, CGInfo(total, true_res, true_res <= tol)


def solve2d(system, tol=1e-12, max_iter=None, return_info=False):
    """Solve a symmetrized system by diagonally preconditioned CG.

    Raises :class:`ConvergenceError` (carrying the achieved residual) when
    the relative residual does not reach ``tol`` within ``max_iter``
    iterations (default ``20 * sqrt(unknowns)``).
    """
    A = system.matrix
    if not system.symmetric:
        diff = abs(A - A.T)
        if diff.nnz and diff.max() > 1e-13 * abs(A).max():
            raise ValueError("CG needs a symmetric system; assemble with symmetrize=True")
    n = A.shape[0]
    if max_iter is None:
        max_iter = max(int(20 * math.sqrt(n)), 50)
    x, info = _pcg(-A, -system.rhs, tol, max_iter)
    if not info.converged:
        raise ConvergenceError(
            f"CG stopped after {info.iterations} iterations at relative residual "
            f"{info.residual:.3e} (tol {tol:.1e})",
            residual=info.residual,
            iterations=info.iterations,
        )
    return (x, info) if return_info else x


def direct_solve2d(system, max_unknowns=10_000):
    """Banded LU solve, used to cross-check CG on small grids."""
    n = len(system)
    if n > max_unknowns:
        raise ValueError(f"direct solve limited to {max_unknowns} unknowns, got {n}")
    bw = system.grid.m - 1
    A = system.matrix.tocoo()
    ab = np.zeros((2 * bw + 1, n))
    ab[bw + A.row - A.col, A.col] = A.data
    return solve_banded((bw, bw), ab, system.rhs)


@dataclass(eq=False)
class Solution2D:
    grid: Grid2D
    values: np.ndarray  # shape (n+1, m+1), boundary included
    system: SparseSystem = field(repr=False)
    info: CGInfo | None = None


def solve_interface2d(problem, m, n=None, tol=1e-12, max_iter=None, direct=False):
    """Assemble (symmetrized) and solve; returns nodal values on the full grid."""
    n = m if n is None else n
    grid = Grid2D(problem.a, problem.b, problem.c, problem.d, m, n)
    system = assemble2d(problem, grid, symmetrize=True)
    if direct:
        interior, info = direct_solve2d(system), None
    else:
        interior, info = solve2d(system, tol, max_iter, return_info=True)
    X, Y = np.meshgrid(grid.xs, grid.ys)
    values = problem.boundary(X, Y)
    values[1:-1, 1:-1] = interior.reshape(n - 1, m - 1)
    return Solution2D(grid, values, system, info)
