"""Coefficient averages on grid cells.

Two flavours are provided for a cell ``[x_lo, x_hi]``: sampling ``beta`` at
the midpoint, and the integral harmonic average
``(1/h * int beta^{-1} dx)^{-1}`` computed by adaptive Gauss-Legendre
quadrature that always splits at the interface. :func:`interface_average`
is the closed form used by the improved scheme on the cell that contains
the interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import IhamError
from .problem import LEFT, RIGHT

__all__ = [
    "AveragingPolicy",
    "QuadratureError",
    "harmonic_average_interval",
    "harmonic_averages",
    "interface_average",
]

MIDPOINT = "midpoint"
INTEGRAL = "integral_harmonic"
_MODE_ALIASES = {"midpoint": MIDPOINT, "integral": INTEGRAL, "integral_harmonic": INTEGRAL}

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(7)
_MAX_LEVELS = 40


class QuadratureError(IhamError, ArithmeticError):
    pass


@dataclass(frozen=True)
class AveragingPolicy:
    """How regular-cell coefficients are formed.

    Parameters
    ----------
    mode : {"midpoint", "integral_harmonic"}
        ``"integral"`` is accepted as an alias of ``"integral_harmonic"``.
    tol : float
        Relative quadrature tolerance, in ``(0, 1e-6]``.
    """

    mode: str = MIDPOINT
    tol: float = 1e-12

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", _MODE_ALIASES[self.mode])
        except KeyError:
            raise ValueError(
                f"averaging mode must be 'midpoint' or 'integral', got {self.mode!r}"
            ) from None
        if not 0 < self.tol <= 1e-6:
            raise ValueError(f"quadrature tolerance must lie in (0, 1e-6], got {self.tol!r}")

    @property
    def is_integral(self):
        return self.mode == INTEGRAL


def _gauss(f_side, lo, hi):
    """7-point rule on each panel, vectorized across panels."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]
    vals = f_side(pts.ravel()).reshape(pts.shape)
    return half * (vals @ _GAUSS_WEIGHTS)


def _integrate_reciprocal(beta, side, lo, hi, tol):
    """Adaptive integral of ``1/beta`` (one branch) over each ``[lo, hi]``."""

    def recip(x):
        return 1.0 / beta.side_value(side, x)

    total = np.zeros(len(lo))
    owner = np.arange(len(lo))
    coarse = _gauss(recip, lo, hi)
    for _ in range(_MAX_LEVELS):
        if len(lo) == 0:
            return total
        mid = 0.5 * (lo + hi)
        left = _gauss(recip, lo, mid)
        right = _gauss(recip, mid, hi)
        fine = left + right
        done = np.abs(fine - coarse) <= tol * np.abs(fine) + 1e-300
        np.add.at(total, owner[done], fine[done])
        keep = ~done
        lo, mid, hi, owner = lo[keep], mid[keep], hi[keep], owner[keep]
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        owner = np.concatenate([owner, owner])
        coarse = np.concatenate([left[keep], right[keep]])
    raise QuadratureError("harmonic-average quadrature did not reach its tolerance")


def harmonic_averages(beta, x_lo, x_hi, policy=None):
    """Averages of ``beta`` over many cells at once.

    ``x_lo`` and ``x_hi`` are equal-length arrays of cell endpoints. In
    midpoint mode a cell strictly containing the interface is an error
    unless ``beta`` is the same expression on both sides.
    """
    policy = policy or AveragingPolicy()
    x_lo = np.atleast_1d(np.asarray(x_lo, dtype=float))
    x_hi = np.atleast_1d(np.asarray(x_hi, dtype=float))
    if np.any(x_hi <= x_lo):
        raise ValueError("every cell needs x_lo < x_hi")
    alpha = beta.alpha
    straddle = (x_lo < alpha) & (alpha < x_hi)

    if not policy.is_integral:
        if straddle.any() and not beta.is_continuous:
            raise ValueError("midpoint averaging is undefined on a cell containing the interface")
        return beta(0.5 * (x_lo + x_hi))

    # cells entirely on one side keep their own branch; straddling cells split
    left_only = (x_hi <= alpha) & ~straddle
    right_only = (x_lo >= alpha) & ~straddle
    integral = np.zeros(len(x_lo))
    lo_l = np.concatenate([x_lo[left_only], x_lo[straddle]])
    hi_l = np.concatenate([x_hi[left_only], np.full(straddle.sum(), alpha)])
    idx_l = np.concatenate([np.flatnonzero(left_only), np.flatnonzero(straddle)])
    lo_r = np.concatenate([x_lo[right_only], np.full(straddle.sum(), alpha)])
    hi_r = np.concatenate([x_hi[right_only], x_hi[straddle]])
    idx_r = np.concatenate([np.flatnonzero(right_only), np.flatnonzero(straddle)])
    if len(idx_l):
        np.add.at(integral, idx_l, _integrate_reciprocal(beta, LEFT, lo_l, hi_l, policy.tol))
    if len(idx_r):
        np.add.at(integral, idx_r, _integrate_reciprocal(beta, RIGHT, lo_r, hi_r, policy.tol))
    return (x_hi - x_lo) / integral


def harmonic_average_interval(beta, x_lo, x_hi, policy=None):
    """Average of ``beta`` over a single cell; see :func:`harmonic_averages`."""
    return float(harmonic_averages(beta, [x_lo], [x_hi], policy)[0])


def interface_average(beta_minus, beta_plus, x_j, x_j1, alpha):
    """Harmonic average of a piecewise constant over the interface cell.

    The cell ``[x_j, x_j1)`` must contain ``alpha``; ``beta_minus`` applies
    on ``[x_j, alpha]`` and ``beta_plus`` on ``[alpha, x_j1]``.
    """
    if not x_j <= alpha < x_j1:
        raise ValueError(f"alpha={alpha!r} is not in [{x_j!r}, {x_j1!r})")
    if not (np.all(np.asarray(beta_minus) > 0) and np.all(np.asarray(beta_plus) > 0)):
        raise ValueError("one-sided coefficients must be positive")
    h = x_j1 - x_j
    return 1.0 / ((x_j1 - alpha) / (beta_plus * h) + (alpha - x_j) / (beta_minus * h))
