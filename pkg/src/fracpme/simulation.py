"""Estimator-style driver that integrates a state and collects diagnostics."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from sklearn.base import BaseEstimator

from .diagnostics import DiagnosticsRecord, DiagnosticsTracker, fourier_bound_check
from .state import TORUS, TRUNCATION, Params, State, boundary_shell
from .stepper import StepperConfig, choose_dt, step

__all__ = ["PorousMediumSolver", "Trajectory"]


@dataclass
class Trajectory:
    records: List[DiagnosticsRecord] = field(default_factory=list)
    shell_fraction: List[float] = field(default_factory=list)
    fourier: List[tuple] = field(default_factory=list)
    min_u: float = np.inf
    n_steps: int = 0

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])


class PorousMediumSolver(BaseEstimator):
    """Integrate du/dt = div(u grad p), dp/dt = -(-Laplacian)^s p + u^2.

    Parameters
    ----------
    s : float
        Fractional order in (1/2, 1].
    t_end : float
        Final time.
    cfl_safety : float
        Fraction of the positivity-limited transport step actually taken.
    splitting : {'strang', 'lie'}
    flux : {'muscl', 'donor'}
        Face reconstruction of the transport substep.
    sample_every : int
        Record diagnostics every this many steps (the final state is always
        recorded).
    dt_max : float or None
        Upper bound on the step size; defaults to ``t_end / 200``. A cap is
        always needed since a spatially constant pressure puts no limit on
        the transport step.
    mode : {'torus', 'truncation'}
    accumulate : bool
        Track the spectral time integral of u^2 (needed for the Fourier bound).

    Attributes
    ----------
    state_ : State
        Final state after :meth:`fit`.
    trajectory_ : Trajectory
    """

    def __init__(self, s=0.75, t_end=1.0, cfl_safety=0.4, splitting="strang",
                 sample_every=1, dt_max=None, mode=TORUS, accumulate=False, flux="muscl"):
        self.s = s
        self.t_end = t_end
        self.cfl_safety = cfl_safety
        self.splitting = splitting
        self.sample_every = sample_every
        self.dt_max = dt_max
        self.mode = mode
        self.accumulate = accumulate
        self.flux = flux

    def _params(self, grid):
        return Params(s=self.s, grid=grid, t_end=self.t_end, dt_safety=self.cfl_safety,
                      sample_every=self.sample_every, mode=self.mode,
                      dt_max=self.t_end / 200 if self.dt_max is None else self.dt_max)

    def _config(self):
        return StepperConfig(splitting=self.splitting, cfl_safety=self.cfl_safety,
                             flux=self.flux)

    def fit(self, X, y=None, callback=None):
        """Integrate from the initial state ``X`` to ``t_end``.

        ``callback(state, n_steps)`` is invoked after every step.
        """
        state: State = X
        params = self._params(state.grid)
        config = self._config()
        tracker = DiagnosticsTracker(state, params.s, params.mode, accumulate=self.accumulate)
        shell = boundary_shell(state.grid) if params.mode == TRUNCATION else None
        traj = Trajectory()

        def sample(st):
            traj.records.append(tracker.record(st))
            if shell is not None:
                m = st.mass
                traj.shell_fraction.append(
                    float(st.grid.integrate(np.where(shell, st.u, 0.0)) / m) if m > 0 else 0.0)
            if tracker.acc is not None and st.t > 0:
                traj.fourier.append((st.t,) + fourier_bound_check(tracker.acc, params.s, st.t))

        sample(state)
        traj.min_u = float(state.u.min())
        while state.t < params.t_end:
            dt = choose_dt(state, params, config)
            # absorb a final sliver rather than taking a vanishing step
            if params.t_end - (state.t + dt) < 1e-12 * max(1.0, params.t_end):
                dt = params.t_end - state.t
            state = step(state, params, config, dt=dt)
            if state.t > params.t_end or params.t_end - state.t < 1e-12 * max(1.0, params.t_end):
                state.t = params.t_end
            traj.n_steps += 1
            tracker.advance(state, dt)
            traj.min_u = min(traj.min_u, float(state.u.min()))
            if callback is not None:
                callback(state, traj.n_steps)
            if traj.n_steps % params.sample_every == 0 or state.t >= params.t_end:
                sample(state)
        self.state_ = state
        self.trajectory_ = traj
        self.accumulator_ = tracker.acc
        return self

    def run(self, state, callback=None):
        """Shortcut for ``fit(state).trajectory_``."""
        return self.fit(state, callback=callback).trajectory_
