"""Second-kind Green's function on (0, 1) and the exactness checks built on it.

``G`` solves ``(beta G')' = delta'(x - alpha)`` with ``G(0) = G(1) = 0`` for
piecewise-constant ``beta``. It is piecewise linear, jumps by
``2 / (beta_minus + beta_plus)`` at ``alpha`` and has continuous flux, so the
improved scheme must reproduce it to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exprlang import Num
from .fd1d import solve1d
from .problem import InterfaceProblem1D, JumpForm, PiecewiseField

__all__ = ["GreensFunction", "eval_green", "reproduction_check", "cancellation_bound"]


@dataclass(frozen=True)
class GreensFunction:
    alpha: float
    beta_minus: float
    beta_plus: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not (self.beta_minus > 0 and self.beta_plus > 0):
            raise ValueError("beta_minus and beta_plus must be positive")

    @property
    def denominator(self):
        return self.beta_minus * (1 - self.alpha) + self.beta_plus * self.alpha

    @property
    def left_slope(self):
        bm, bp = self.beta_minus, self.beta_plus
        return -2 * bp / (self.denominator * (bm + bp))

    @property
    def right_slope(self):
        bm, bp = self.beta_minus, self.beta_plus
        return -2 * bm / (self.denominator * (bm + bp))

    @property
    def jump(self):
        return 2.0 / (self.beta_minus + self.beta_plus)

    def max_abs(self):
        """Supremum of ``|G|`` on [0, 1], attained at one of the limits at alpha."""
        return max(abs(eval_green(self, self.alpha, "left")), abs(eval_green(self, self.alpha, "right")))

    def __call__(self, x, side=None):
        return eval_green(self, x, side)


def eval_green(gf, x, side=None):
    """Evaluate ``G`` at ``x``; at ``x == alpha`` a ``side`` must be given.

    Away from ``alpha`` the side is ignored. For arrays, entries equal to
    ``alpha`` default to the left limit, matching node ownership.
    """
    a, bm, bp = gf.alpha, gf.beta_minus, gf.beta_plus
    scale = 1.0 / gf.denominator
    if np.ndim(x) == 0:
        x = float(x)
        if not 0 <= x <= 1:
            raise ValueError(f"x={x!r} outside [0, 1]")
        if x == a:
            if side not in ("left", "right"):
                raise ValueError("G is discontinuous at alpha; pass side='left' or 'right'")
            use_left = side == "left"
        else:
            use_left = x < a
        if use_left:
            return scale * (-2 * bp / (bm + bp)) * x
        return scale * (2 * bm / (bm + bp)) * (1 - x)
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("x outside [0, 1]")
    left = (x < a) | ((x == a) & (side != "right"))
    return np.where(left, scale * (-2 * bp / (bm + bp)) * x, scale * (2 * bm / (bm + bp)) * (1 - x))


def green_problem(alpha, beta_minus, beta_plus, W):
    """The boundary value problem whose exact solution is ``W * G``."""
    zero = PiecewiseField(Num(0.0), Num(0.0), alpha)
    return InterfaceProblem1D(
        a=0.0,
        b=1.0,
        alpha=alpha,
        beta=PiecewiseField.constant(beta_minus, beta_plus, alpha),
        sigma=zero,
        source=zero,
        jumps=JumpForm(2.0 * W / (beta_minus + beta_plus), 0.0),
        dirichlet=(0.0, 0.0),
    )


def reproduction_check(alpha, beta_minus, beta_plus, W, N):
    """Max nodal deviation of the improved solution from ``W * G``."""
    if N < 8:
        raise ValueError("N must be at least 8")
    gf = GreensFunction(alpha, beta_minus, beta_plus)
    sol = solve1d(green_problem(alpha, beta_minus, beta_plus, W), N, "improved")
    return float(np.max(np.abs(sol.values - W * eval_green(gf, sol.nodes))))


def cancellation_bound(T_j, h_l, h, beta_minus, beta_plus, bar_beta, gf):
    """Bound on the error produced by the two irregular truncation errors.

    Returns ``max|G| * |W|`` with ``W = T_j h_l h (beta_minus + beta_plus) / (2 bar_beta)``.
    """
    W = T_j * h_l * h * (beta_minus + beta_plus) / (2.0 * bar_beta)
    return gf.max_abs() * abs(W)
