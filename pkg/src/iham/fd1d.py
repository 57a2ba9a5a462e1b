"""One-dimensional grids, tridiagonal assembly and the Thomas solve.

Sign convention: rows discretize ``(beta u')' - sigma u``, so the main
diagonal is negative and the off-diagonals positive. Unknowns are the
interior nodes ``U_1 .. U_{N-1}``; Dirichlet values are moved to the
right-hand side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .averaging import AveragingPolicy, harmonic_averages, interface_average
from .exceptions import ProblemValidationError, ZeroPivotError
from .problem import validate

__all__ = [
    "Grid1D",
    "IrregularPair",
    "TridiagonalSystem",
    "Solution1D",
    "MMatrixReport",
    "locate_interface",
    "correction_terms",
    "assemble1d",
    "thomas_solve",
    "solve1d",
    "is_m_matrix",
    "METHODS",
]

METHODS = ("classical", "improved")


@dataclass(frozen=True)
class Grid1D:
    a: float
    b: float
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if not self.a < self.b:
            raise ValueError("grid needs a < b")
        object.__setattr__(self, "N", int(self.N))

    @property
    def h(self):
        return (self.b - self.a) / self.N

    @property
    def nodes(self):
        x = self.a + np.arange(self.N + 1) * self.h
        x[-1] = self.b
        return x


@dataclass(frozen=True)
class IrregularPair:
    """Index ``j`` with ``x_j <= alpha < x_{j+1}`` and the irregular widths."""

    j: int
    h_l: float
    h_r: float


def locate_interface(grid, alpha):
    """Find the irregular pair for ``alpha`` under ``x_j <= alpha < x_{j+1}``."""
    if not grid.a < alpha < grid.b:
        raise ValueError(f"alpha={alpha!r} lies outside ({grid.a!r}, {grid.b!r})")
    x = grid.nodes
    h = grid.h
    j = min(max(int(math.floor((alpha - grid.a) / h)), 0), grid.N - 1)
    while j + 1 < grid.N and x[j + 1] <= alpha:
        j += 1
    while j > 0 and x[j] > alpha:
        j -= 1
    h_l = alpha - (x[j] - 0.5 * h)
    h_r = (x[j + 1] + 0.5 * h) - alpha
    return IrregularPair(j, h_l, h_r)


def correction_terms(
    bar_beta, pair, h, x_j, x_j1, alpha, jump_u, jump_flux, beta_minus, beta_plus
):
    """Right-hand-side corrections ``(C_j, C_{j+1})`` for the irregular rows.

    Works elementwise when the jump data and one-sided coefficients are arrays
    (one entry per grid line in two dimensions).
    """
    c_j = bar_beta / (pair.h_l * h) * (jump_u + jump_flux / beta_plus * (x_j1 - alpha))
    c_j1 = -bar_beta / (pair.h_r * h) * (jump_u + jump_flux / beta_minus * (x_j - alpha))
    return c_j, c_j1


@dataclass(eq=False)
class TridiagonalSystem:
    """Interior-node tridiagonal system ``A U = F``.

    ``lower[0]`` and ``upper[-1]`` are always zero; ``row_scale`` records the
    factor each row was multiplied by (all ones unless symmetrized).
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray
    row_scale: np.ndarray = None
    pair: IrregularPair | None = None
    method: str = "improved"

    def __post_init__(self):
        n = len(self.diag)
        if not (len(self.lower) == len(self.upper) == len(self.rhs) == n):
            raise ValueError("diagonals and rhs must have equal length")
        if self.row_scale is None:
            self.row_scale = np.ones(n)

    def __len__(self):
        return len(self.diag)

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        out = self.diag * v
        out[1:] += self.lower[1:] * v[:-1]
        out[:-1] += self.upper[:-1] * v[1:]
        return out

    def to_dense(self):
        n = len(self)
        A = np.diag(self.diag)
        idx = np.arange(n - 1)
        A[idx + 1, idx] = self.lower[1:]
        A[idx, idx + 1] = self.upper[:-1]
        return A

    def is_symmetric(self, rtol=1e-14):
        scale = np.max(np.abs(self.diag)) if len(self) else 1.0
        return bool(np.all(np.abs(self.upper[:-1] - self.lower[1:]) <= rtol * scale))


def _regular_averages(problem, x, policy, skip=None):
    lo, hi = x[:-1], x[1:]
    if skip is None:
        return harmonic_averages(problem.beta, lo, hi, policy)
    out = np.empty(len(lo))
    keep = np.ones(len(lo), dtype=bool)
    keep[skip] = False
    out[keep] = harmonic_averages(problem.beta, lo[keep], hi[keep], policy)
    return out


def assemble1d(problem, grid, method="improved", symmetrize=False, policy=None):
    """Build the tridiagonal system for ``problem`` on ``grid``.

    Parameters
    ----------
    method : {"improved", "classical"}
        ``"classical"`` applies harmonic averages on every cell with no
        interface corrections. ``"improved"`` uses the interface-cell average
        and corrected irregular rows.
    symmetrize : bool
        Scale the two irregular rows by ``h_l/h`` and ``h_r/h`` so the matrix
        becomes symmetric.
    policy : AveragingPolicy, optional
        Defaults to integral harmonic averages for the classical method and
        midpoint sampling for the improved method.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    violations = validate(problem)
    if violations:
        raise ProblemValidationError(violations)
    if grid.N < 4:
        raise ValueError("need at least N = 4 cells")
    if policy is None:
        policy = AveragingPolicy("integral" if method == "classical" else "midpoint")

    x = grid.nodes
    h = grid.h
    N = grid.N
    alpha = problem.alpha
    pair = locate_interface(grid, alpha)
    j = pair.j
    interior = x[1:N]

    if method == "classical":
        beta_half = _regular_averages(problem, x, policy)
    else:
        beta_half = _regular_averages(problem, x, policy, skip=j)
        bm, bp = problem.beta_minus, problem.beta_plus
        bar_beta = interface_average(bm, bp, x[j], x[j + 1], alpha)
        beta_half[j] = bar_beta

    west = beta_half[:-1] / h**2
    east = beta_half[1:] / h**2
    sigma = problem.sigma(interior)
    rhs = problem.source(interior)
    scale = np.ones(N - 1)

    if method == "improved":
        c_j, c_j1 = correction_terms(
            bar_beta, pair, h, x[j], x[j + 1], alpha, *problem.jump_values(), bm, bp
        )
        # row index r corresponds to node r + 1
        if j >= 1:
            west[j - 1] = beta_half[j - 1] / (pair.h_l * h)
            east[j - 1] = bar_beta / (pair.h_l * h)
            rhs[j - 1] += c_j
            scale[j - 1] = pair.h_l / h
        if j + 1 <= N - 1:
            west[j] = bar_beta / (pair.h_r * h)
            east[j] = beta_half[j + 1] / (pair.h_r * h)
            rhs[j] += c_j1
            scale[j] = pair.h_r / h

    diag = -(west + east) - sigma
    ua, ub = problem.dirichlet
    rhs[0] -= west[0] * ua
    rhs[-1] -= east[-1] * ub
    lower = west.copy()
    upper = east.copy()
    lower[0] = 0.0
    upper[-1] = 0.0

    if not symmetrize or method == "classical":
        scale = np.ones(N - 1)
    else:
        lower, diag, upper, rhs = lower * scale, diag * scale, upper * scale, rhs * scale
    return TridiagonalSystem(lower, diag, upper, rhs, scale, pair, method)


def thomas_solve(system):
    """Solve a tridiagonal system by elimination without pivoting.

    Raises :class:`ZeroPivotError` if a pivot vanishes, which cannot happen
    for the diagonally dominant systems produced by :func:`assemble1d`.
    """
    a = system.lower.tolist()
    b = system.diag.tolist()
    c = system.upper.tolist()
    d = system.rhs.tolist()
    n = len(b)
    cp = [0.0] * n
    dp = [0.0] * n
    pivot = b[0]
    if pivot == 0.0:
        raise ZeroPivotError("zero pivot in row 0")
    cp[0] = c[0] / pivot
    dp[0] = d[0] / pivot
    for i in range(1, n):
        pivot = b[i] - a[i] * cp[i - 1]
        if pivot == 0.0:
            raise ZeroPivotError(f"zero pivot in row {i}")
        cp[i] = c[i] / pivot
        dp[i] = (d[i] - a[i] * dp[i - 1]) / pivot
    out = [0.0] * n
    out[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]
    return np.array(out)


@dataclass(eq=False)
class Solution1D:
    grid: Grid1D
    values: np.ndarray
    system: TridiagonalSystem = field(repr=False)
    pair: IrregularPair | None = None

    @property
    def nodes(self):
        return self.grid.nodes


def solve1d(problem, N, method="improved", symmetrize=False, policy=None):
    """Assemble and solve on an ``N``-cell grid; boundary values included."""
    grid = Grid1D(problem.a, problem.b, N)
    system = assemble1d(problem, grid, method, symmetrize, policy)
    interior = thomas_solve(system)
    ua, ub = problem.dirichlet
    values = np.concatenate([[ua], interior, [ub]])
    return Solution1D(grid, values, system, system.pair)


@dataclass
class MMatrixReport:
    ok: bool
    issues: list

    def __bool__(self):
        return self.ok


def is_m_matrix(system, rtol=1e-13):
    """Check the sufficient M-matrix conditions of a tridiagonal system.

    Negative diagonal, positive off-diagonals (which also makes the matrix
    irreducible), weak diagonal dominance in every row and strict dominance
    in at least one. ``rtol`` absorbs rounding from row scaling.
    """
    issues = []
    d = np.asarray(system.diag, dtype=float)
    lo = np.asarray(system.lower, dtype=float).copy()
    up = np.asarray(system.upper, dtype=float).copy()
    n = len(d)
    lo[0] = 0.0
    up[-1] = 0.0
    if np.any(d >= 0):
        issues.append(f"non-negative diagonal in rows {np.flatnonzero(d >= 0).tolist()}")
    off = np.concatenate([lo[1:], up[:-1]])
    if n > 1 and np.any(off <= 0):
        issues.append("off-diagonal entry not strictly positive (sign pattern / irreducibility)")
    offsum = lo + up
    excess = np.abs(d) - offsum
    slack = rtol * np.maximum(np.abs(d), offsum)
    if np.any(excess < -slack):
        issues.append(f"diagonal dominance fails in rows {np.flatnonzero(excess < -slack).tolist()}")
    if not np.any(excess > slack):
        issues.append("no row is strictly diagonally dominant")
    return MMatrixReport(not issues, issues)
