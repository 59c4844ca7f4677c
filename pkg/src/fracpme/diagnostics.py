"""Functionals evaluated along trajectories: entropy, dissipation, norms, moments.

Quadratic functionals are computed on the spectral side of the Parseval
identity of :mod:`fracpme.grid`; time integrals use the trapezoid rule.
"""

from dataclasses import astuple, dataclass, fields

import numpy as np

from ._validation import check_order
from .errors import FracPMEError, TrajectoryError
from .state import TRUNCATION, gamma_weight

__all__ = [
    "DiagnosticsRecord",
    "UAccumulator",
    "DiagnosticsTracker",
    "entropy",
    "dissipation",
    "norms",
    "moment",
    "weighted_mass",
    "entropy_balance_residual",
    "fourier_bound_check",
    "fourier_bound_exponent",
]


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One sample of the diagnostics time series; field order is the CSV column order."""

    t: float
    H: float
    D: float
    mass: float
    u_l2sq: float
    p_l1: float
    p_l2: float
    grad_p_l2sq: float
    mean_p: float
    moment: float
    weighted_mass: float
    int_u_l2sq: float
    int_D: float

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def as_row(self):
        return astuple(self)


def _grad_energy(grid, ph):
    return grid.spectral_sum(grid.k2, ph)


def entropy(state):
    """H = integral of u^2 + |grad p|^2 / 2."""
    grid = state.grid
    return grid.integrate(state.u**2) + 0.5 * _grad_energy(grid, grid.forward(state.p))


def dissipation(state, s):
    """Squared L2 norm of (-Laplacian)^(s/2) grad p."""
    return state.grid.frac_sobolev_seminorm(state.p, s)


def norms(state):
    grid = state.grid
    p = state.p
    return {
        "u_l2sq": grid.integrate(state.u**2),
        "p_l1": grid.integrate(np.abs(p)),
        "p_l2": float(np.sqrt(grid.integrate(p**2))),
        "grad_p_l2sq": _grad_energy(grid, grid.forward(p)),
        "mean_p": float(np.mean(p)),
    }


def moment(state, mode=TRUNCATION):
    """First moment of the entropy density about the box center (truncation mode only)."""
    if mode != TRUNCATION:
        raise FracPMEError("moment is only defined in truncation mode")
    grid = state.grid
    r = grid.distance_to(grid.center)
    gp = grid.gradient(state.p)
    dens = state.u**2 + 0.5 * np.sum(gp**2, axis=0)
    return grid.integrate(r * dens)


def weighted_mass(state):
    return state.grid.integrate(state.u * gamma_weight(state.grid))


class UAccumulator:
    """Running transform of U(x, t) = int_0^t u(x, tau)^2 dtau.

    Only the spectral coefficients at the current time are kept; each call to
    :meth:`update` adds one trapezoid panel.
    """

    def __init__(self, grid, u0):
        self.grid = grid
        self.t = 0.0
        self.U_hat = np.zeros(grid.spectral_shape, dtype=complex)
        self._last = grid.forward(u0 * u0)

    def update(self, u_new, dt):
        cur = self.grid.forward(u_new * u_new)
        self.U_hat += 0.5 * dt * (self._last + cur)
        self._last = cur
        self.t += dt

    @property
    def zero_mode(self):
        return float(self.U_hat.flat[0].real)

    def time_space_integral(self):
        """int_0^t int u^2 dx dtau recovered from the zero mode."""
        return self.zero_mode * np.sqrt(self.grid.volume)


def fourier_bound_exponent(s):
    return 3.0 - 5.0 / (2.0 * s)


def fourier_bound_check(acc, s, T):
    """Weighted norm sum |k|^(2(1-s)) |U_hat(k, T)|^2 and its ratio to T^(3 - 5/(2s))."""
    s = check_order(s)
    if not T > 0:
        raise FracPMEError("T must be positive")
    grid = acc.grid
    weight = np.power(grid.k2, 1.0 - s)
    lhs = grid.spectral_sum(weight, acc.U_hat)
    return lhs, lhs / T ** fourier_bound_exponent(s)


class DiagnosticsTracker:
    """Per-step bookkeeping of running time integrals plus sampled records.

    Call :meth:`advance` after every step; :meth:`record` returns the
    diagnostics at the current state.
    """

    def __init__(self, state, s, mode, accumulate=True):
        self.s = check_order(s)
        self.mode = mode
        self.int_u_l2sq = 0.0
        self.int_D = 0.0
        self._u_l2sq = state.grid.integrate(state.u**2)
        self._D = dissipation(state, self.s)
        self.acc = UAccumulator(state.grid, state.u) if accumulate else None

    def advance(self, state, dt):
        u_l2sq = state.grid.integrate(state.u**2)
        D = dissipation(state, self.s)
        self.int_u_l2sq += 0.5 * dt * (self._u_l2sq + u_l2sq)
        self.int_D += 0.5 * dt * (self._D + D)
        self._u_l2sq, self._D = u_l2sq, D
        if self.acc is not None:
            self.acc.update(state.u, dt)

    def record(self, state):
        nrm = norms(state)
        return DiagnosticsRecord(
            t=float(state.t),
            H=nrm["u_l2sq"] + 0.5 * nrm["grad_p_l2sq"],
            D=self._D,
            mass=state.mass,
            u_l2sq=nrm["u_l2sq"],
            p_l1=nrm["p_l1"],
            p_l2=nrm["p_l2"],
            grad_p_l2sq=nrm["grad_p_l2sq"],
            mean_p=nrm["mean_p"],
            moment=moment(state) if self.mode == TRUNCATION else float("nan"),
            weighted_mass=weighted_mass(state),
            int_u_l2sq=self.int_u_l2sq,
            int_D=self.int_D,
        )


def entropy_balance_residual(trajectory):
    """max_n |H(t_n) - H(t_0) + int_0^{t_n} D| / H(t_0), trapezoid rule over the samples."""
    if len(trajectory) < 2:
        raise TrajectoryError("entropy balance needs at least two samples")
    t = np.array([r.t for r in trajectory])
    H = np.array([r.H for r in trajectory])
    D = np.array([r.D for r in trajectory])
    intD = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (D[1:] + D[:-1]))])
    err = np.abs(H - H[0] + intD)
    if H[0] == 0:
        return 0.0 if np.all(err == 0) else float("inf")
    return float(np.max(err) / H[0])
