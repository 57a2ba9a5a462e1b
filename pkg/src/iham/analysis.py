"""Truncation errors, error norms and grid-refinement studies."""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fd1d import Grid1D, Solution1D, assemble1d, solve1d
from .fd2d import Solution2D, solve_interface2d
from .problem import ManufacturedCase

__all__ = [
    "TruncationReport",
    "RefinementRow",
    "RefinementTable",
    "truncation_errors",
    "infinity_error",
    "refinement_study",
    "parse_levels",
    "fitted_order",
]


@dataclass(eq=False)
class TruncationReport:
    N: int
    method: str
    nodes: np.ndarray
    values: np.ndarray
    j: int
    h_l: float
    h_r: float
    T_j: float
    T_j1: float

    @property
    def cancellation_residual(self):
        """``T_{j+1} + (h_l / h_r) T_j``; O(h) for the improved scheme."""
        return self.T_j1 + (self.h_l / self.h_r) * self.T_j

    @property
    def regular_max(self):
        """Largest ``|T_i|`` away from the two irregular nodes."""
        mask = np.ones(len(self.values), dtype=bool)
        for node in (self.j, self.j + 1):
            if 1 <= node <= len(self.values):
                mask[node - 1] = False
        return float(np.max(np.abs(self.values[mask]))) if mask.any() else 0.0


def truncation_errors(case, N, method="improved", policy=None):
    """Residual of the (unscaled) discrete equations at the exact solution."""
    problem = case.problem
    grid = Grid1D(problem.a, problem.b, N)
    system = assemble1d(problem, grid, method, symmetrize=False, policy=policy)
    x = grid.nodes
    u = case.exact(x[1:-1])
    T = system.matvec(u) - system.rhs
    pair = system.pair
    j = pair.j
    T_j = float(T[j - 1]) if j >= 1 else math.nan
    T_j1 = float(T[j]) if j + 1 <= N - 1 else math.nan
    return TruncationReport(N, method, x[1:-1], T, j, pair.h_l, pair.h_r, T_j, T_j1)


def infinity_error(solution, exact):
    """Max nodal error; a node on the interface is compared with the left limit."""
    if isinstance(solution, Solution2D):
        X, Y = np.meshgrid(solution.grid.xs, solution.grid.ys)
        return float(np.max(np.abs(solution.values - exact(X, Y))))
    if isinstance(solution, Solution1D):
        nodes, values = solution.nodes, solution.values
    else:
        nodes, values = solution
    return float(np.max(np.abs(np.asarray(values) - exact(np.asarray(nodes, dtype=float)))))


@dataclass(frozen=True)
class RefinementRow:
    N: int
    error: float
    order: float | None


def _fmt(value, digits, kind):
    if digits is None:
        return f"{value:.17g}"
    if kind == "error":
        return f"{value:.{digits - 1}e}"
    return f"{value:.{digits - 1}f}"


@dataclass(eq=False)
class RefinementTable:
    rows: list = field(default_factory=list)
    label: str = ""

    @classmethod
    def from_errors(cls, Ns, errors, label=""):
        rows = []
        for i, (N, err) in enumerate(zip(Ns, errors)):
            order = None
            if i > 0:
                order = math.log(errors[i - 1] / err) / math.log(N / Ns[i - 1])
            rows.append(RefinementRow(int(N), float(err), order))
        return cls(rows, label)

    @property
    def Ns(self):
        return [r.N for r in self.rows]

    @property
    def errors(self):
        return [r.error for r in self.rows]

    @property
    def orders(self):
        return [r.order for r in self.rows if r.order is not None]

    @property
    def average_order(self):
        orders = self.orders
        return sum(orders) / len(orders) if orders else math.nan

    def fitted_order(self):
        return fitted_order(self.Ns, self.errors)

    def to_csv(self, digits=None):
        out = io.StringIO()
        out.write("N,error,order\n")
        for r in self.rows:
            order = "" if r.order is None else _fmt(r.order, digits, "order")
            out.write(f"{r.N},{_fmt(r.error, digits, 'error')},{order}\n")
        out.write(f"average,,{_fmt(self.average_order, digits, 'order')}\n")
        return out.getvalue()

    def to_text(self, digits=5):
        lines = [f"{'N':>8}  {'||E||_inf':>12}  {'order':>8}"]
        for r in self.rows:
            order = "" if r.order is None else _fmt(r.order, digits, "order")
            lines.append(f"{r.N:>8}  {_fmt(r.error, digits, 'error'):>12}  {order:>8}")
        lines.append(f"{'average':>8}  {'':>12}  {_fmt(self.average_order, digits, 'order'):>8}")
        return "\n".join(lines) + "\n"


def fitted_order(Ns, errors):
    """Least-squares slope of ``log ||E||`` against ``log h``."""
    h = 1.0 / np.asarray(Ns, dtype=float)
    slope, _ = np.polyfit(np.log(h), np.log(np.asarray(errors, dtype=float)), 1)
    return float(slope)


def parse_levels(spec):
    """``"32:4096"`` (doubling) or ``"32,64,128"`` to a list of ints."""
    spec = str(spec).strip()
    if ":" in spec:
        lo, hi = (int(s) for s in spec.split(":", 1))
        if lo < 1 or hi < lo:
            raise ValueError(f"bad level range {spec!r}")
        levels = [lo]
        while levels[-1] * 2 <= hi:
            levels.append(levels[-1] * 2)
        if levels[-1] != hi:
            raise ValueError(f"{hi} is not {lo} times a power of two")
        return levels
    return [int(s) for s in spec.split(",") if s.strip()]


def _check_levels(N_list):
    if len(N_list) < 1:
        raise ValueError("need at least one grid level")
    for lo, hi in zip(N_list, N_list[1:]):
        if hi != 2 * lo:
            raise ValueError("grid levels must double: got {} then {}".format(lo, hi))


def _worker_count(workers):
    if workers is not None:
        return max(int(workers), 1)
    try:
        return max(int(os.environ.get("IHAM_THREADS", "1")), 1)
    except ValueError:
        return 1


def solve_case(case, N, method="improved", symmetrize=False, policy=None, tol=1e-12):
    """Solve a manufactured case (or bare problem) on an ``N`` (or ``N x N``) grid."""
    problem = case.problem if isinstance(case, ManufacturedCase) else case
    if problem.dim == 2:
        if method != "improved":
            raise ValueError("only the improved method is available in 2D")
        return solve_interface2d(problem, N, N, tol=tol)
    return solve1d(problem, N, method, symmetrize, policy)


def refinement_study(
    case, N_list, method="improved", symmetrize=False, policy=None, tol=1e-12, workers=None
):
    """Solve on each level and tabulate errors and pairwise orders.

    Levels may be solved concurrently (``workers`` or ``IHAM_THREADS``); rows
    are always reported in increasing ``N``.
    """
    N_list = list(N_list)
    _check_levels(N_list)

    def one(N):
        sol = solve_case(case, N, method, symmetrize, policy, tol)
        return infinity_error(sol, case.exact)

    nworkers = _worker_count(workers)
    if nworkers > 1 and len(N_list) > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            errors = list(pool.map(one, N_list))
    else:
        errors = [one(N) for N in N_list]
    return RefinementTable.from_errors(N_list, errors, label=getattr(case, "name", ""))
