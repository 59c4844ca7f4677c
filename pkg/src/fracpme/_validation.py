"""Input validation helpers shared by the public API."""

import numpy as np

from .errors import FracPMEError, OrderOutOfRangeError

S_MIN, S_MAX = 0.5, 1.0
DECAY_S_MIN, DECAY_S_MAX = 0.75, 1.0


def check_order(s):
    """Return ``s`` as float if it lies in (1/2, 1], else raise."""
    s = float(s)
    if not (S_MIN < s <= S_MAX):
        raise OrderOutOfRangeError(
            f"fractional order s={s!r} outside (1/2, 1] (torus existence range)"
        )
    return s


def check_decay_order(s):
    s = float(s)
    if not (DECAY_S_MIN <= s < DECAY_S_MAX):
        raise OrderOutOfRangeError(
            f"fractional order s={s!r} outside [3/4, 1) where the decay rate is proved"
        )
    return s


def check_field(grid, f, name="field"):
    """Coerce ``f`` to a float64 array on ``grid`` and reject non-finite values."""
    arr = np.asarray(f, dtype=np.float64)
    if arr.shape != grid.shape:
        raise FracPMEError(f"{name} has shape {arr.shape}, grid expects {grid.shape}")
    if not np.all(np.isfinite(arr)):
        raise FracPMEError(f"{name} contains NaN or Inf")
    return arr


def check_vector_field(grid, v, name="vector field"):
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape != (grid.dim,) + grid.shape:
        raise FracPMEError(
            f"{name} has shape {arr.shape}, grid expects {(grid.dim,) + grid.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise FracPMEError(f"{name} contains NaN or Inf")
    return arr


def check_positive(value, name):
    value = float(value)
    if not value > 0 or not np.isfinite(value):
        raise FracPMEError(f"{name} must be a positive finite number, got {value!r}")
    return value
