"""Estimator-style front end: configure a solver, ``fit`` it to a problem, ``predict`` values.

The solvers follow the scikit-learn conventions (constructor arguments are
hyperparameters, fitted state ends in ``_``, ``get_params``/``set_params``
and ``clone`` work), so they drop into grid searches over ``N`` or the
averaging mode.

>>> from iham import HarmonicAverageSolver1D, catalog_case
>>> case = catalog_case("ex1")
>>> solver = HarmonicAverageSolver1D(N=32).fit(case)
>>> round(solver.max_error(case.exact), 7)
0.0027133
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_grid_size, check_method, check_points, check_problem
from .analysis import infinity_error
from .averaging import AveragingPolicy
from .fd1d import solve1d
from .fd2d import solve_interface2d

__all__ = ["HarmonicAverageSolver1D", "HarmonicAverageSolver2D"]


def _side_interp(xs, us, q):
    """Linear interpolation on one side, extrapolating with the end slopes."""
    if len(xs) == 1:
        return np.full(q.shape, us[0])
    out = np.interp(q, xs, us)
    lo, hi = q < xs[0], q > xs[-1]
    out[lo] = us[0] + (q[lo] - xs[0]) * (us[1] - us[0]) / (xs[1] - xs[0])
    out[hi] = us[-1] + (q[hi] - xs[-1]) * (us[-1] - us[-2]) / (xs[-1] - xs[-2])
    return out


def _interface_interp(nodes, values, j, alpha, q):
    """Interpolate nodal values without mixing data across the interface."""
    out = np.empty(q.shape)
    left = q <= alpha
    out[left] = _side_interp(nodes[: j + 1], values[: j + 1], q[left])
    out[~left] = _side_interp(nodes[j + 1 :], values[j + 1 :], q[~left])
    return out


class HarmonicAverageSolver1D(BaseEstimator):
    """Harmonic-average finite differences for a 1D interface problem.

    Parameters
    ----------
    N : int
        Number of grid cells.
    method : {"improved", "classical"}
    averaging : {"midpoint", "integral"} or None
        Coefficient averaging on regular cells; None picks the method's default.
    symmetrize : bool
        Row-scale the irregular equations so the matrix is symmetric.
    quad_tol : float
        Relative tolerance of the harmonic-average quadrature.
    """

    def __init__(self, N=64, method="improved", averaging=None, symmetrize=False, quad_tol=1e-12):
        self.N = N
        self.method = method
        self.averaging = averaging
        self.symmetrize = symmetrize
        self.quad_tol = quad_tol

    def _policy(self):
        if self.averaging is None:
            mode = "integral" if self.method == "classical" else "midpoint"
        else:
            mode = self.averaging
        return AveragingPolicy(mode, self.quad_tol)

    def fit(self, problem, y=None):
        """Assemble and solve ``problem`` (an interface problem or manufactured case)."""
        N = check_grid_size(self.N, "N")
        check_method(self.method)
        self.problem_ = check_problem(problem, dim=1)
        sol = solve1d(self.problem_, N, self.method, bool(self.symmetrize), self._policy())
        self.solution_ = sol
        self.grid_ = sol.grid
        self.system_ = sol.system
        self.pair_ = sol.pair
        self.nodes_ = sol.nodes
        self.values_ = sol.values
        return self

    def predict(self, X):
        """Piecewise-linear reconstruction at ``X`` that respects the interface."""
        check_is_fitted(self, "values_")
        q = check_points(X, dim=1)
        if np.any((q < self.grid_.a) | (q > self.grid_.b)):
            raise ValueError("query points must lie inside the problem domain")
        return _interface_interp(self.nodes_, self.values_, self.pair_.j, self.problem_.alpha, q)

    def max_error(self, exact):
        check_is_fitted(self, "values_")
        return infinity_error(self.solution_, exact)

    def score(self, X, y):
        """Negative max deviation of ``predict(X)`` from ``y`` (higher is better)."""
        return -float(np.max(np.abs(self.predict(X) - np.asarray(y, dtype=float))))


class HarmonicAverageSolver2D(BaseEstimator):
    """Improved harmonic-average method on a rectangle with the interface ``x = alpha``.

    Parameters
    ----------
    m, n : int
        Cells in x and y; ``n=None`` means ``n = m``.
    tol : float
        Relative residual for conjugate gradients.
    max_iter : int or None
        CG iteration cap; None means ``20 * sqrt(unknowns)``.
    solver : {"cg", "direct"}
    """

    def __init__(self, m=64, n=None, tol=1e-12, max_iter=None, solver="cg"):
        self.m = m
        self.n = n
        self.tol = tol
        self.max_iter = max_iter
        self.solver = solver

    def fit(self, problem, y=None):
        m = check_grid_size(self.m, "m")
        n = m if self.n is None else check_grid_size(self.n, "n")
        if self.solver not in ("cg", "direct"):
            raise ValueError(f"solver must be 'cg' or 'direct', got {self.solver!r}")
        self.problem_ = check_problem(problem, dim=2)
        sol = solve_interface2d(
            self.problem_, m, n, self.tol, self.max_iter, direct=self.solver == "direct"
        )
        self.solution_ = sol
        self.grid_ = sol.grid
        self.values_ = sol.values
        self.pair_ = sol.system.pair
        self.info_ = sol.info
        return self

    def predict(self, X):
        """Interpolate along x (interface-aware), then linearly along y."""
        check_is_fitted(self, "values_")
        P = check_points(X, dim=2)
        g = self.grid_
        if np.any((P[:, 0] < g.a) | (P[:, 0] > g.b) | (P[:, 1] < g.c) | (P[:, 1] > g.d)):
            raise ValueError("query points must lie inside the problem domain")
        xs, ys = g.xs, g.ys
        row = np.clip(np.searchsorted(ys, P[:, 1], side="right") - 1, 0, g.n - 1)
        out = np.empty(len(P))
        for r in np.unique(row):
            sel = row == r
            qx = P[sel, 0]
            lower = _interface_interp(xs, self.values_[r], self.pair_.j, self.problem_.alpha, qx)
            upper = _interface_interp(xs, self.values_[r + 1], self.pair_.j, self.problem_.alpha, qx)
            t = (P[sel, 1] - ys[r]) / (ys[r + 1] - ys[r])
            out[sel] = (1 - t) * lower + t * upper
        return out

    def max_error(self, exact):
        check_is_fitted(self, "values_")
        return infinity_error(self.solution_, exact)

    def score(self, X, y):
        return -float(np.max(np.abs(self.predict(X) - np.asarray(y, dtype=float))))
