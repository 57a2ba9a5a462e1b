"""Input checks shared by the estimators and the command line."""

import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import ProblemValidationError
from .fd1d import METHODS
from .problem import ManufacturedCase, validate


def check_problem(obj, dim):
    """Return the interface problem held by ``obj`` after validating it."""
    problem = obj.problem if isinstance(obj, ManufacturedCase) else obj
    if getattr(problem, "dim", None) != dim:
        raise TypeError(f"expected a {dim}D interface problem, got {type(problem).__name__}")
    violations = validate(problem)
    if violations:
        raise ProblemValidationError(violations)
    return problem


def check_grid_size(value, name, minimum=4):
    if not isinstance(value, numbers.Integral) or isinstance(value, bool):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be at least {minimum}, got {value}")
    return int(value)


def check_method(method):
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    return method


def check_points(X, dim):
    """Coerce query points to shape ``(n_points,)`` in 1D or ``(n_points, 2)`` in 2D."""
    if dim == 1:
        X = check_array(X, ensure_2d=False, dtype=np.float64)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError(f"1D queries need one column, got {X.shape[1]}")
            X = X[:, 0]
        return np.atleast_1d(X)
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != 2:
        raise ValueError(f"2D queries need two columns, got {X.shape[1]}")
    return X
