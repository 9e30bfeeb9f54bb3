"""Input validation helpers shared by the public functions and estimators."""

import numbers

import numpy as np

from .exceptions import DomainError


def as_float_array(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def check_modulus(k, *, lower=0.0, upper=1.0, lower_open=False, upper_open=True, name="k"):
    """Return ``k`` as a float array after checking it lies in the interval.

    The default interval is ``[0, 1)``; ``upper=np.inf`` with ``lower=1`` and
    ``lower_open=True`` describes rotation moduli.
    """
    arr = np.asarray(k, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError(f"{name} must not be NaN")
    lo_bad = arr <= lower if lower_open else arr < lower
    hi_bad = arr >= upper if upper_open else arr > upper
    if np.any(lo_bad | hi_bad):
        lb = "(" if lower_open else "["
        ub = ")" if upper_open else "]"
        bad = arr[lo_bad | hi_bad].ravel()[0]
        raise DomainError(f"{name}={bad!r} outside {lb}{lower}, {upper}{ub}")
    return arr


def check_positive(value, name, *, strict=True, allow_inf=False):
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if np.isnan(value) or (np.isinf(value) and not allow_inf):
        raise DomainError(f"{name} must be finite, got {value}")
    if value < 0 or (strict and value == 0):
        raise DomainError(f"{name} must be {'> 0' if strict else '>= 0'}, got {value}")
    return value


def check_magnetization(M, name="M", *, allow_zero=False):
    M = check_positive(M, name, strict=not allow_zero)
    if M >= 1.0:
        raise DomainError(f"{name} must be < 1, got {M}")
    return M


def check_grid(grid):
    from .grid import PhaseGrid

    if not isinstance(grid, PhaseGrid):
        raise TypeError(f"expected a PhaseGrid, got {type(grid).__name__}")
    if not np.all(np.isfinite(grid.values)):
        raise DomainError("grid values must be finite")
    return grid


def maybe_scalar(arr):
    """Return a Python float for 0-d arrays, the array otherwise."""
    arr = np.asarray(arr)
    return float(arr) if arr.ndim == 0 else arr
