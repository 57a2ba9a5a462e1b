"""Interface problem model, jump conversions and the manufactured-case catalog."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .exceptions import ExprError, IhamError
from .exprlang import Expr, as_expr

__all__ = [
    "PiecewiseField",
    "DeltaForm",
    "JumpForm",
    "InterfaceProblem1D",
    "InterfaceProblem2D",
    "ManufacturedCase",
    "jumps_from_delta",
    "catalog_case",
    "list_cases",
    "CATALOG",
    "validate",
]

LEFT, RIGHT = "left", "right"


@dataclass(frozen=True, eq=False)
class PiecewiseField:
    """Scalar field given by one expression on each side of ``x = alpha``.

    A point exactly on the interface belongs to the left side unless a side
    is requested explicitly.
    """

    left: Expr
    right: Expr
    alpha: float
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "left", as_expr(self.left))
        object.__setattr__(self, "right", as_expr(self.right))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "params", dict(self.params))

    @classmethod
    def constant(cls, left, right, alpha, params=None):
        return cls(as_expr(float(left)), as_expr(float(right)), alpha, params or {})

    @property
    def is_continuous(self):
        """True when both sides carry the same expression."""
        return self.left == self.right

    def branch(self, side):
        if side == LEFT:
            return self.left
        if side == RIGHT:
            return self.right
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")

    def side_value(self, side, x, y=None):
        """Evaluate one branch regardless of where ``x`` lies."""
        expr = self.branch(side)
        point = {"x": x} if y is None else {"x": x, "y": y}
        value = expr.evaluate(point, self.params)
        if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
            shape = np.broadcast_shapes(np.shape(x), np.shape(y) if y is not None else ())
            return np.broadcast_to(np.asarray(value, dtype=float), shape).copy()
        return float(value)

    def one_sided(self, side, y=None):
        """Limit of the field at the interface from ``side``."""
        return self.side_value(side, self.alpha, y)

    def __call__(self, x, y=None, side=None):
        if side is not None:
            return self.side_value(side, x, y)
        if not isinstance(x, np.ndarray) and not isinstance(y, np.ndarray):
            return self.side_value(LEFT if x <= self.alpha else RIGHT, x, y)
        x = np.asarray(x, dtype=float)
        if y is not None:
            x, y = np.broadcast_arrays(x, np.asarray(y, dtype=float))
        out = np.empty(x.shape)
        mask = x <= self.alpha
        if mask.any():
            out[mask] = self.side_value(LEFT, x[mask], None if y is None else y[mask])
        if (~mask).any():
            out[~mask] = self.side_value(RIGHT, x[~mask], None if y is None else y[~mask])
        return out


@dataclass(frozen=True)
class DeltaForm:
    """Singular-source data: ``v*delta(x - alpha) + w*delta'(x - alpha)``."""

    v: float
    w: float


Scalar = Union[float, Expr]


@dataclass(frozen=True, eq=False)
class JumpForm:
    """Prescribed ``[u]`` and ``[beta u_x]`` at the interface.

    Each entry is a number or an expression; expressions are evaluated at
    ``x = alpha`` (and the row's ``y`` in two dimensions).
    """

    jump_u: Scalar = 0.0
    jump_flux: Scalar = 0.0

    def values(self, alpha, y=None, params=None):
        return (
            _eval_jump(self.jump_u, alpha, y, params),
            _eval_jump(self.jump_flux, alpha, y, params),
        )

    @property
    def is_homogeneous(self):
        return not isinstance(self.jump_u, Expr) and not isinstance(self.jump_flux, Expr) and (
            self.jump_u == 0 and self.jump_flux == 0
        )


def _eval_jump(value, alpha, y, params):
    if not isinstance(value, Expr):
        if y is not None and isinstance(y, np.ndarray):
            return np.full(y.shape, float(value))
        return float(value)
    point = {"x": alpha} if y is None else {"x": alpha, "y": y}
    out = value.evaluate(point, params or {})
    if isinstance(y, np.ndarray):
        return np.broadcast_to(np.asarray(out, dtype=float), y.shape).copy()
    return float(out)


def jumps_from_delta(v, w, beta_minus, beta_plus):
    """Convert singular-source strengths to jump conditions.

    Returns ``(jump_u, jump_flux) = (2 w / (beta_minus + beta_plus), v)``.
    """
    if not (beta_minus > 0 and beta_plus > 0):
        raise ValueError("beta_minus and beta_plus must be positive")
    return 2.0 * w / (beta_minus + beta_plus), float(v)


@dataclass(frozen=True, eq=False)
class InterfaceProblem1D:
    """``(beta u')' - sigma u = f`` on ``(a, b)`` with a single interface."""

    a: float
    b: float
    alpha: float
    beta: PiecewiseField
    sigma: PiecewiseField
    source: PiecewiseField
    jumps: Union[JumpForm, DeltaForm]
    dirichlet: tuple

    dim = 1

    @property
    def beta_minus(self):
        return self.beta.one_sided(LEFT)

    @property
    def beta_plus(self):
        return self.beta.one_sided(RIGHT)

    def jump_values(self):
        """``([u], [beta u_x])`` at the interface as floats."""
        if isinstance(self.jumps, DeltaForm):
            return jumps_from_delta(self.jumps.v, self.jumps.w, self.beta_minus, self.beta_plus)
        return self.jumps.values(self.alpha, params=self.beta.params)


@dataclass(frozen=True, eq=False)
class InterfaceProblem2D:
    """``div(beta grad u) - sigma u = f`` on a rectangle cut by ``x = alpha``.

    ``boundary`` supplies the Dirichlet trace as a piecewise field in
    ``(x, y)``.
    """

    a: float
    b: float
    c: float
    d: float
    alpha: float
    beta: PiecewiseField
    sigma: PiecewiseField
    source: PiecewiseField
    jumps: JumpForm
    boundary: PiecewiseField

    dim = 2

    def jump_values(self, y):
        return self.jumps.values(self.alpha, y, params=self.beta.params)


@dataclass(frozen=True, eq=False)
class ManufacturedCase:
    """A problem bundled with its exact solution."""

    problem: Union[InterfaceProblem1D, InterfaceProblem2D]
    exact: PiecewiseField
    params: Mapping[str, float] = field(default_factory=dict)
    name: str = ""

    @property
    def dim(self):
        return self.problem.dim


# ------------------------------------------------------------------ validation


def _sample_side(field_, side, lo, hi, ys=None, count=1000):
    if ys is None:
        xs = np.linspace(lo, hi, count)
        return field_.side_value(side, xs)
    nx = max(count // len(ys), 2)
    X, Y = np.meshgrid(np.linspace(lo, hi, nx), ys)
    return field_.side_value(side, X.ravel(), Y.ravel())


def validate(problem):
    """Return a list of human-readable violations; empty means valid."""
    violations = []
    a, b, alpha = problem.a, problem.b, problem.alpha
    if not a < b:
        violations.append("empty domain: need a < b")
    ys = None
    if problem.dim == 2:
        if not problem.c < problem.d:
            violations.append("empty domain: need c < d")
        ys = np.linspace(problem.c, problem.d, 25)
    if not a < alpha < b:
        violations.append("interface outside domain")
        sides = [(s, a, b) for s in (LEFT, RIGHT)]
    else:
        sides = [(LEFT, a, alpha), (RIGHT, alpha, b)]
    for name, fld, check in (
        ("β", problem.beta, lambda v: np.all(v > 0), ),
        ("σ", problem.sigma, lambda v: np.all(v >= 0)),
    ):
        for side, lo, hi in sides:
            try:
                vals = _sample_side(fld, side, lo, hi, ys)
            except ExprError as exc:
                violations.append(f"{name} cannot be evaluated ({side} side): {exc}")
                continue
            if not np.all(np.isfinite(vals)):
                violations.append(f"{name} not finite ({side} side)")
            elif not check(vals):
                word = "non-positive" if name == "β" else "negative"
                violations.append(f"{name} {word} ({side} side)")
    return violations


# --------------------------------------------------------------------- catalog


@dataclass(frozen=True)
class CaseSpec:
    name: str
    dim: int
    defaults: Mapping[str, float]
    description: str
    builder: object

    @property
    def signature(self):
        return ", ".join(f"{k}={v:.12g}" for k, v in self.defaults.items())


def _field(left, right, params, alpha=None):
    return PiecewiseField(left, right, params["alpha"] if alpha is None else alpha, params)


def _case_1d(name, params, beta, sigma, source, exact, jump_u, jump_flux, domain=(0.0, 1.0)):
    a, b = domain
    exact_f = _field(*exact, params)
    problem = InterfaceProblem1D(
        a=a,
        b=b,
        alpha=params["alpha"],
        beta=_field(*beta, params),
        sigma=_field(*sigma, params),
        source=_field(*source, params),
        jumps=JumpForm(as_expr(jump_u), as_expr(jump_flux)),
        dirichlet=(exact_f(a), exact_f(b)),
    )
    return ManufacturedCase(problem, exact_f, dict(params), name)


def _build_ex1(p):
    return _case_1d(
        "ex1",
        p,
        beta=("1 + x^2", "log(2 + x)"),
        sigma=("0", "0"),
        source=(
            "2*x*k1*cos(k1*x) - (x^2 + 1)*k1^2*sin(k1*x)",
            "-k2*sin(k2*x)/(2 + x) - log(x + 2)*k2^2*cos(k2*x)",
        ),
        exact=("sin(k1*x)", "cos(k2*x)"),
        jump_u="cos(k2*alpha) - sin(k1*alpha)",
        jump_flux="-log(2 + alpha)*k2*sin(k2*alpha) - (1 + alpha^2)*k1*cos(k1*alpha)",
    )


def _build_ex2(p):
    return _case_1d(
        "ex2",
        p,
        beta=("beta_minus", "beta_plus"),
        sigma=("0", "0"),
        source=("-beta_minus*k1^2*sin(k1*x)", "-beta_plus*k2^2*cos(k2*x)"),
        exact=("sin(k1*x)", "cos(k2*x)"),
        jump_u="cos(k2*alpha) - sin(k1*alpha)",
        jump_flux="-beta_plus*k2*sin(k2*alpha) - beta_minus*k1*cos(k1*alpha)",
    )


def _build_ex3(p):
    # right-branch source derived from the exact solution: (1.1*4x^3)' - x*x^4
    return _case_1d(
        "ex3",
        p,
        beta=("1 + x^2", "1.1"),
        sigma=("x", "x"),
        source=("2 + 6*x^2 - x^3", "13.2*x^2 - x^5"),
        exact=("x^2", "x^4"),
        jump_u="alpha^4 - alpha^2",
        jump_flux="4.4*alpha^3 - (1 + alpha^2)*2*alpha",
    )


def _build_ex2d(p):
    exact = _field("sin(k1*x)*cos(y)", "cos(k2*x)*cos(y)", p)
    problem = InterfaceProblem2D(
        a=0.0,
        b=1.0,
        c=0.0,
        d=1.0,
        alpha=p["alpha"],
        beta=_field("beta_minus", "beta_plus", p),
        sigma=_field("0", "0", p),
        source=_field(
            "-beta_minus*(k1^2 + 1)*sin(k1*x)*cos(y)",
            "-beta_plus*(k2^2 + 1)*cos(k2*x)*cos(y)",
            p,
        ),
        jumps=JumpForm(
            as_expr("(cos(k2*alpha) - sin(k1*alpha))*cos(y)"),
            as_expr("(-beta_plus*k2*sin(k2*alpha) - beta_minus*k1*cos(k1*alpha))*cos(y)"),
        ),
        boundary=exact,
    )
    return ManufacturedCase(problem, exact, dict(p), "ex2d")


CATALOG = {
    "ex1": CaseSpec(
        "ex1",
        1,
        {"k1": 5.0, "k2": 3.0, "alpha": 1.0 / 3.0},
        "variable discontinuous beta, u = sin(k1 x) | cos(k2 x)",
        _build_ex1,
    ),
    "ex2": CaseSpec(
        "ex2",
        1,
        {"k1": 5.0, "k2": 3.0, "alpha": 1.0 / 3.0, "beta_minus": 1.5, "beta_plus": 3.0},
        "piecewise-constant beta, u = sin(k1 x) | cos(k2 x)",
        _build_ex2,
    ),
    "ex3": CaseSpec(
        "ex3",
        1,
        {"alpha": 5.0 / 9.0},
        "self-adjoint with sigma = x, u = x^2 | x^4",
        _build_ex3,
    ),
    "ex2d": CaseSpec(
        "ex2d",
        2,
        {"k1": 5.0, "k2": 3.0, "alpha": 1.0 / 3.0, "beta_minus": 1.5, "beta_plus": 3.0},
        "2D line interface x = alpha, u = (sin(k1 x) | cos(k2 x)) cos(y)",
        _build_ex2d,
    ),
}


class CatalogError(IhamError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


def catalog_case(name, params=None):
    """Instantiate a built-in manufactured case.

    With ``params=None`` the case defaults are used; otherwise every
    parameter of the case must be supplied and no others.
    """
    try:
        spec = CATALOG[name]
    except KeyError:
        raise CatalogError(f"unknown case {name!r}; choose from {sorted(CATALOG)}") from None
    if params is None:
        params = dict(spec.defaults)
    else:
        params = {k: float(v) for k, v in params.items()}
        missing = [k for k in spec.defaults if k not in params]
        if missing:
            raise CatalogError(f"case {name!r} is missing parameter(s): {', '.join(missing)}")
        extra = [k for k in params if k not in spec.defaults]
        if extra:
            raise CatalogError(f"case {name!r} does not take parameter(s): {', '.join(extra)}")
    if not all(math.isfinite(v) for v in params.values()):
        raise CatalogError("case parameters must be finite")
    return spec.builder(params)


def list_cases():
    """``(name, dim, signature, description)`` for every catalog case."""
    return [(s.name, s.dim, s.signature, s.description) for s in CATALOG.values()]
