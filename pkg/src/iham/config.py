"""TOML problem files.

A file describes one interface problem; expressions are strings in the
expression language, numbers may be written directly::

    domain = [0.0, 1.0]              # [a, b, c, d] for a 2D problem
    alpha = 0.333333333333

    [params]
    k1 = 5.0
    k2 = 3.0

    [beta]
    left = "1 + x^2"
    right = "log(2 + x)"

    [sigma]                          # optional, zero by default
    [f]
    left = "..."
    right = "..."

    [jumps]                          # u/flux, or v/w (delta strengths, 1D only)
    u = "cos(k2*alpha) - sin(k1*alpha)"
    flux = "..."

    [boundary]                       # optional when [exact] is given
    [exact]                          # optional; enables error reporting
    left = "sin(k1*x)"
    right = "cos(k2*x)"

    [solver]                         # optional defaults for the command line
    method = "improved"
    averaging = "midpoint"
    symmetrize = false
    N = 64

``alpha`` is also visible to the expressions as a parameter.
"""

from __future__ import annotations

import sys

from .exceptions import IhamError
from .exprlang import Num, as_expr, unparse
from .problem import (
    DeltaForm,
    InterfaceProblem1D,
    InterfaceProblem2D,
    JumpForm,
    ManufacturedCase,
    PiecewiseField,
)

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

__all__ = ["ConfigError", "load_config", "loads_config", "case_to_toml"]

SOLVER_KEYS = {"method", "averaging", "symmetrize", "N", "N_list", "m", "n", "tol", "quad_tol"}


class ConfigError(IhamError, ValueError):
    pass


def _piecewise(table, name, alpha, params, required=True):
    section = table.get(name)
    if section is None:
        if required:
            raise ConfigError(f"missing [{name}] section")
        return None
    try:
        left, right = section["left"], section["right"]
    except KeyError as exc:
        raise ConfigError(f"[{name}] needs 'left' and 'right'") from exc
    return PiecewiseField(as_expr(left), as_expr(right), alpha, params)


def _jump_entry(value):
    return as_expr(value) if isinstance(value, str) else float(value)


def loads_config(text):
    """Parse TOML text into ``(problem_or_case, solver_options)``."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config file: {exc}") from exc
    unknown = set(data) - {
        "domain", "alpha", "dimension", "params",
        "beta", "sigma", "f", "jumps", "boundary", "exact", "solver",
    }
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    try:
        alpha = float(data["alpha"])
        domain = [float(v) for v in data["domain"]]
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc.args[0]!r}") from exc
    dim = int(data.get("dimension", 2 if len(domain) == 4 else 1))
    if (dim, len(domain)) not in ((1, 2), (2, 4)):
        raise ConfigError("domain must be [a, b] in 1D or [a, b, c, d] in 2D")
    params = {k: float(v) for k, v in data.get("params", {}).items()}
    params.setdefault("alpha", alpha)

    zero = PiecewiseField(Num(0.0), Num(0.0), alpha, params)
    beta = _piecewise(data, "beta", alpha, params)
    sigma = _piecewise(data, "sigma", alpha, params, required=False) or zero
    source = _piecewise(data, "f", alpha, params, required=False) or zero
    exact = _piecewise(data, "exact", alpha, params, required=False)
    boundary = _piecewise(data, "boundary", alpha, params, required=False) or exact
    if boundary is None:
        raise ConfigError("need a [boundary] section (or [exact] to take boundary data from)")

    jt = data.get("jumps", {})
    if "v" in jt or "w" in jt:
        if dim != 1:
            raise ConfigError("delta-form jumps (v, w) are only supported in 1D")
        if "u" in jt or "flux" in jt:
            raise ConfigError("give either u/flux or v/w in [jumps], not both")
        jumps = DeltaForm(float(jt.get("v", 0.0)), float(jt.get("w", 0.0)))
    else:
        jumps = JumpForm(_jump_entry(jt.get("u", 0.0)), _jump_entry(jt.get("flux", 0.0)))

    if dim == 1:
        a, b = domain
        problem = InterfaceProblem1D(
            a, b, alpha, beta, sigma, source, jumps, (boundary(a), boundary(b))
        )
    else:
        a, b, c, d = domain
        problem = InterfaceProblem2D(a, b, c, d, alpha, beta, sigma, source, jumps, boundary)

    solver = dict(data.get("solver", {}))
    bad = set(solver) - SOLVER_KEYS
    if bad:
        raise ConfigError(f"unknown [solver] keys: {', '.join(sorted(bad))}")
    if exact is not None:
        return ManufacturedCase(problem, exact, params, "config"), solver
    return problem, solver


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from exc
    return loads_config(text)


def _toml_value(value):
    if isinstance(value, (int, float)):
        return repr(float(value))
    return '"' + unparse(as_expr(value)) + '"'


def case_to_toml(case):
    """Serialize a manufactured case so that loading it reproduces it exactly."""
    p = case.problem
    lines = []
    if p.dim == 1:
        lines.append(f"domain = [{p.a!r}, {p.b!r}]")
    else:
        lines.append(f"domain = [{p.a!r}, {p.b!r}, {p.c!r}, {p.d!r}]")
    lines.append(f"alpha = {p.alpha!r}")
    lines.append("")
    lines.append("[params]")
    for k, v in case.params.items():
        lines.append(f"{k} = {float(v)!r}")
    for section, fld in (("beta", p.beta), ("sigma", p.sigma), ("f", p.source), ("exact", case.exact)):
        lines += ["", f"[{section}]", f'left = "{unparse(fld.left)}"', f'right = "{unparse(fld.right)}"']
    lines += ["", "[jumps]"]
    if isinstance(p.jumps, DeltaForm):
        lines += [f"v = {p.jumps.v!r}", f"w = {p.jumps.w!r}"]
    else:
        lines += [f"u = {_toml_value(p.jumps.jump_u)}", f"flux = {_toml_value(p.jumps.jump_flux)}"]
    return "\n".join(lines) + "\n"
