"""Problem parameters, the evolving (u, p) state and initial-data generators."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from ._validation import check_order, check_positive
from .errors import FracPMEError, InitialDataError
from .grid import Grid

__all__ = [
    "Params",
    "State",
    "GaussianBump",
    "CosinePerturbation",
    "FromSnapshot",
    "Zero",
    "make_initial",
    "admissibility_report",
    "TORUS",
    "TRUNCATION",
]

TORUS = "torus"
TRUNCATION = "truncation"
MODES = (TORUS, TRUNCATION)

# fraction of the box (per side) treated as the boundary shell in truncation mode
SHELL_FRACTION = 0.1
SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class Params:
    """Run parameters.

    ``dt_max`` caps the step size (the sampling cadence in time); ``None``
    leaves the step limited by the transport CFL condition only.
    """

    s: float
    grid: Grid
    t_end: float
    dt_safety: float = 0.4
    sample_every: int = 1
    mode: str = TORUS
    dt_max: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "s", check_order(self.s))
        if not 0 < self.dt_safety <= 1:
            raise FracPMEError(f"dt_safety must lie in (0, 1], got {self.dt_safety!r}")
        if self.t_end < 0:
            raise FracPMEError(f"t_end must be nonnegative, got {self.t_end!r}")
        if int(self.sample_every) < 1:
            raise FracPMEError("sample_every must be >= 1")
        if self.mode not in MODES:
            raise FracPMEError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.dt_max is not None:
            check_positive(self.dt_max, "dt_max")

    @property
    def decay_comparable(self):
        """True when ``s`` lies in [3/4, 1), where the algebraic decay rate is proved."""
        return 0.75 <= self.s < 1.0


@dataclass
class State:
    """Density ``u``, pressure ``p`` and time ``t`` on a grid."""

    grid: Grid
    u: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def copy(self):
        return State(self.grid, self.u.copy(), self.p.copy(), self.t)

    @property
    def mass(self):
        return self.grid.integrate(self.u)


# initial data generators


@dataclass(frozen=True)
class Zero:
    def sample(self, grid):
        return np.zeros(grid.shape)


@dataclass(frozen=True)
class GaussianBump:
    """``amplitude * exp(-|x - center|^2 / (2 width^2))`` with periodic distance.

    ``center`` defaults to the box center.
    """

    amplitude: float = 1.0
    width: float = 1.0
    center: Optional[Tuple[float, ...]] = None

    def sample(self, grid):
        if self.amplitude < 0:
            raise InitialDataError(f"negative amplitude {self.amplitude!r}")
        check_positive(self.width, "width")
        c = grid.center if self.center is None else np.asarray(self.center, float)
        if c.shape != (grid.dim,):
            raise InitialDataError(f"center must have {grid.dim} components")
        r = grid.distance_to(c)
        return self.amplitude * np.exp(-0.5 * (r / self.width) ** 2)


@dataclass(frozen=True)
class CosinePerturbation:
    """``base + amplitude * cos(2 pi mode x_0 / L)`` along the first axis."""

    base: float = 1.0
    amplitude: float = 0.0
    mode: int = 1

    def sample(self, grid):
        if self.amplitude < 0:
            raise InitialDataError(f"negative amplitude {self.amplitude!r}")
        if self.amplitude > self.base:
            raise InitialDataError("amplitude larger than base would make the field negative")
        x0 = grid.coords[0]
        f = self.base + self.amplitude * np.cos(2 * np.pi * self.mode * x0 / grid.length)
        return np.broadcast_to(f, grid.shape).copy()


@dataclass(frozen=True)
class FromSnapshot:
    path: Union[str, Path]

    def sample(self, grid):
        from .io import read_field

        header, values = read_field(self.path)
        if (header.dim, header.n) != (grid.dim, grid.n) or header.length != grid.length:
            from .errors import SnapshotGridMismatch

            raise SnapshotGridMismatch(
                f"snapshot {self.path} is on (dim={header.dim}, n={header.n}, "
                f"length={header.length!r}), expected (dim={grid.dim}, n={grid.n}, "
                f"length={grid.length!r})"
            )
        return values


def boundary_shell(grid):
    """Mask of nodes within ``SHELL_FRACTION * length`` of the box boundary."""
    w = SHELL_FRACTION * grid.length
    mask = np.zeros(grid.shape, dtype=bool)
    for xa in grid.coords:
        mask = mask | (xa < w) | (xa > grid.length - w)
    return mask


def make_initial(grid, u0=None, p0=None, mode=TORUS):
    """Sample ``u0`` and ``p0`` on ``grid`` and return the state at t = 0.

    ``p0`` defaults to zero. In truncation mode the data must vanish (to
    ``1e-12`` of the maximum) in the boundary shell, together with ``grad p0``.
    """
    u0 = Zero() if u0 is None else u0
    p0 = Zero() if p0 is None else p0
    u = np.array(u0.sample(grid), dtype=np.float64)
    p = np.array(p0.sample(grid), dtype=np.float64)
    if np.any(u < 0) or np.any(p < 0):
        raise InitialDataError("initial data must be nonnegative")
    if mode == TRUNCATION:
        shell = boundary_shell(grid)
        gp = np.sqrt(np.sum(grid.gradient(p) ** 2, axis=0))
        for name, f in (("u0", u), ("grad p0", gp)):
            peak = np.max(np.abs(f))
            if peak > 0 and np.max(np.abs(f[shell])) > SUPPORT_TOL * peak:
                raise InitialDataError(
                    f"{name} is not negligible near the boundary; enlarge the box "
                    "or shrink the data for truncation mode"
                )
    return State(grid, u, p, 0.0)


def gamma_weight(grid):
    """sqrt(1 + |x - x_c|^2) about the box center."""
    return np.sqrt(1.0 + grid.distance_to(grid.center) ** 2)


@dataclass
class AdmissibilityReport:
    values: dict = field(default_factory=dict)
    passed: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(self.passed.values())

    def __str__(self):
        lines = []
        for key, val in self.values.items():
            lines.append(f"{key}: {val!r} [{'pass' if self.passed[key] else 'FAIL'}]")
        return "\n".join(lines)


def admissibility_report(state, params=None):
    """Finite-value checks on the quantities the existence theory asks to be finite."""
    grid = state.grid
    rep = AdmissibilityReport()
    finite = bool(np.all(np.isfinite(state.u)) and np.all(np.isfinite(state.p)))
    rep.values["finite"] = finite
    rep.passed["finite"] = finite
    if finite:
        gp = grid.gradient(state.p)
        vals = {
            "u_l2sq": grid.integrate(state.u**2),
            "grad_p_l2sq": grid.integrate(np.sum(gp**2, axis=0)),
            "mass": grid.integrate(state.u),
        }
        if params is not None and params.mode == TRUNCATION:
            vals["weighted_mass"] = grid.integrate(state.u * gamma_weight(grid))
    else:
        vals = {"u_l2sq": np.nan, "grad_p_l2sq": np.nan, "mass": np.nan}
    for key, val in vals.items():
        rep.values[key] = val
        rep.passed[key] = bool(np.isfinite(val))
    return rep
