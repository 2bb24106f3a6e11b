"""Input validation helpers shared by the functional and estimator APIs."""

import math
import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import ConfigurationError

TWO_PI = 2.0 * math.pi


def check_path(values, name="path"):
    """Return ``values`` as a finite, non-empty 1-D float64 array."""
    if hasattr(values, "values") and not isinstance(values, np.ndarray):
        values = values.values
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_paths(X):
    """Return a 2-D (n_paths, n_steps) float64 array of realisations."""
    return check_array(X, dtype=np.float64, ensure_2d=True, ensure_min_samples=1)


def check_theta(theta):
    if isinstance(theta, bool) or not isinstance(theta, numbers.Real):
        raise TypeError(f"theta must be a real number, got {theta!r}")
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    return theta


def check_coeffs(coeffs):
    arr = np.asarray(coeffs, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ConfigurationError("coefficient list is empty")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError("coefficients must be finite")
    return arr


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def degenerate_frequency(theta, atol=1e-12):
    """Return ``"0"`` or ``"pi"`` if ``theta`` is (mod 2*pi) one of them."""
    r = math.fmod(theta, TWO_PI)
    if r < 0:
        r += TWO_PI
    if r < atol or TWO_PI - r < atol:
        return "0"
    if abs(r - math.pi) < atol:
        return "pi"
    return None
