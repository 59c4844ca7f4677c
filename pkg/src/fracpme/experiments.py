"""Multi-run studies: decay-rate fits and relative-entropy stability."""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import check_decay_order, check_order
from .diagnostics import entropy
from .errors import FracPMEError, TrajectoryError
from .state import TORUS, CosinePerturbation, Params, State, make_initial
from .stepper import StepperConfig, cfl_dt, step

__all__ = [
    "lambda_theory",
    "PowerLawDecayFit",
    "ExponentialRateFit",
    "DecayFit",
    "decay_fit",
    "finite_size_window",
    "relative_entropy",
    "RelEntropySeries",
    "weak_strong_experiment",
    "continuous_dependence_scan",
    "growth_exponent",
]


def lambda_theory(s):
    """Proved algebraic decay exponent 3(1-s) / (2s(5+2s)) of the entropy, s in [3/4, 1)."""
    s = check_decay_order(s)
    return 3.0 * (1.0 - s) / (2.0 * s * (5.0 + 2.0 * s))


class PowerLawDecayFit(BaseEstimator, RegressorMixin):
    """Least-squares fit of ``H = C t**(-rate)`` on log-log axes.

    Attributes
    ----------
    rate_ : float
        Minus the fitted slope of log H against log t.
    prefactor_ : float
    residual_ : float
        Largest absolute deviation of log H from the fitted line.
    """

    def fit(self, X, y):
        t = np.ravel(np.asarray(X, dtype=float))
        H = np.asarray(y, dtype=float)
        if t.shape != H.shape or t.size < 2:
            raise FracPMEError("need matching t and H arrays with at least two samples")
        if np.any(t <= 0):
            raise FracPMEError("times must be positive for a log-log fit")
        if np.any(H <= 0):
            raise FracPMEError("nonpositive H in the fit window")
        lt, lH = np.log(t), np.log(H)
        A = np.column_stack([lt, np.ones_like(lt)])
        (slope, icpt), *_ = np.linalg.lstsq(A, lH, rcond=None)
        self.rate_ = float(-slope)
        self.prefactor_ = float(np.exp(icpt))
        self.residual_ = float(np.max(np.abs(lH - (slope * lt + icpt))))
        return self

    def predict(self, X):
        t = np.ravel(np.asarray(X, dtype=float))
        return self.prefactor_ * t ** (-self.rate_)


class ExponentialRateFit(BaseEstimator, RegressorMixin):
    """Least-squares fit of ``log H = log H_fit(0) + K t`` (free intercept)."""

    def fit(self, X, y):
        t = np.ravel(np.asarray(X, dtype=float))
        H = np.asarray(y, dtype=float)
        if np.any(H <= 0):
            raise FracPMEError("exponential fit needs positive values")
        A = np.column_stack([t, np.ones_like(t)])
        (k, icpt), *_ = np.linalg.lstsq(A, np.log(H), rcond=None)
        self.rate_ = float(k)
        self.intercept_ = float(icpt)
        return self

    def predict(self, X):
        return np.exp(self.intercept_ + self.rate_ * np.ravel(np.asarray(X, dtype=float)))


@dataclass
class DecayFit:
    window: Tuple[float, float]
    rate: float
    residual: float
    theory: float
    n_samples: int

    @property
    def threshold(self):
        return self.theory - 2.0 * self.residual

    @property
    def verdict(self):
        # one-sided: decaying faster than the proved upper bound is fine
        return self.rate >= self.threshold

    def report(self):
        return "\n".join([
            f"window: {self.window[0]!r} {self.window[1]!r}",
            f"samples: {self.n_samples}",
            f"lambda_hat: {self.rate!r}",
            f"fit_residual: {self.residual!r}",
            f"lambda_theory: {self.theory!r}",
            f"threshold: {self.threshold!r}",
            f"verdict: {'pass' if self.verdict else 'fail'}",
        ])


MIN_FIT_SAMPLES = 8


def decay_fit(t, H, s, window=(1.0, np.inf)):
    """Fit the algebraic decay rate of ``H`` over ``window`` and compare with theory."""
    t = np.asarray(t, dtype=float)
    H = np.asarray(H, dtype=float)
    lo, hi = window
    sel = (t >= lo) & (t <= hi)
    if sel.sum() < MIN_FIT_SAMPLES:
        raise TrajectoryError(
            f"only {int(sel.sum())} samples in window {window}; need {MIN_FIT_SAMPLES}")
    if np.any(H[sel] <= 0):
        raise FracPMEError("nonpositive H in the fit window")
    est = PowerLawDecayFit().fit(t[sel], H[sel])
    return DecayFit(window=(float(t[sel][0]), float(t[sel][-1])), rate=est.rate_,
                    residual=est.residual_, theory=lambda_theory(s), n_samples=int(sel.sum()))


SHELL_MASS_LIMIT = 1e-6
FLOOR_FACTOR = 1.1


def finite_size_window(trajectory, grid, t_min=1.0):
    """Return ``(t_min, t_wrap)`` for a truncation run.

    ``t_wrap`` is the last sample before boundary-shell mass exceeds
    ``1e-6`` of the total or H comes within 10 % of its uniform-state floor.
    """
    t = trajectory.column("t")
    H = trajectory.column("H")
    mass = trajectory.column("mass")
    floor = mass**2 / grid.volume
    shell = np.asarray(trajectory.shell_fraction)
    bad = (shell > SHELL_MASS_LIMIT) | (H <= FLOOR_FACTOR * floor)
    bad &= t >= t_min
    t_wrap = t[-1] if not bad.any() else t[np.argmax(bad) - 1]
    return float(t_min), float(t_wrap)


def growth_exponent(T, values):
    """Least-squares slope of log(values) against log(T)."""
    est = PowerLawDecayFit().fit(T, values)
    return -est.rate_


def relative_entropy(a, b):
    """Integral of (u - v)^2 + |grad(p - q)|^2 / 2 between two states on one grid."""
    if a.grid != b.grid:
        raise FracPMEError("relative entropy needs states on the same grid")
    return entropy(State(a.grid, a.u - b.u, a.p - b.p, a.t))


@dataclass
class RelEntropySeries:
    eps: float
    t: np.ndarray
    H_rel: np.ndarray
    K_hat: float
    sup_laplacian_q: float
    grad_v_norm: float
    grad_v_exponent: float
    tol: float = 0.05
    H_strong: Optional[np.ndarray] = None

    @property
    def bound(self):
        return np.exp(self.K_hat * self.t) * self.H_rel[0] * (1 + self.tol)

    @property
    def bounded(self):
        return bool(np.all(self.H_rel <= self.bound))

    @property
    def finite(self):
        return bool(np.all(np.isfinite(self.H_rel)) and np.all(self.H_rel >= 0))

    @property
    def verdict(self):
        return self.finite and self.bounded

    def report(self):
        return "\n".join([
            f"eps: {self.eps!r}",
            f"T: {float(self.t[-1])!r}",
            f"samples: {self.t.size}",
            f"H_rel_0: {float(self.H_rel[0])!r}",
            f"H_rel_T: {float(self.H_rel[-1])!r}",
            f"K_hat: {self.K_hat!r}",
            f"sup_laplacian_q: {self.sup_laplacian_q!r}",
            f"grad_v_exponent: {self.grad_v_exponent!r}",
            f"sup_grad_v_norm: {self.grad_v_norm!r}",
            f"max_excess: {float(np.max(self.H_rel / np.where(self.bound > 0, self.bound, 1)))!r}",
            f"verdict: {'pass' if self.verdict else 'fail'}",
        ])


def _lp_norm(grid, f, r):
    return float(grid.integrate(np.abs(f) ** r) ** (1.0 / r))


def perturb(state, eps, mode=1):
    """Multiply the density by ``1 + eps cos(2 pi mode x_0 / L)``; the pressure is kept."""
    g = state.grid
    factor = 1.0 + eps * np.cos(2 * np.pi * mode * g.coords[0] / g.length)
    return State(g, state.u * factor, state.p.copy(), state.t)


def weak_strong_experiment(base, eps, s, T, *, cfl_safety=0.4, dt_max=None,
                           sample_every=1, nu=0.5, flux="muscl", tol=0.05):
    """Evolve ``base`` and its perturbation side by side and record the relative entropy.

    Both runs share every time step (the smaller of the two CFL limits), so
    ``eps = 0`` reproduces the base run bit for bit. ``K_hat`` is the
    log-linear least-squares rate of the relative entropy; the inputs of the
    theoretical Gronwall constant (sup of Laplacian q, the L^r norm of
    grad v with r = 12/(3+2s) + nu) are recorded alongside.
    """
    s = check_order(s)
    if eps < 0:
        raise FracPMEError("perturbation scale must be nonnegative")
    grid = base.grid
    dt_cap = T / 200 if dt_max is None else dt_max
    params = Params(s=s, grid=grid, t_end=T, dt_safety=cfl_safety, mode=TORUS, dt_max=dt_cap)
    config = StepperConfig(cfl_safety=cfl_safety, flux=flux)
    r = 12.0 / (3.0 + 2.0 * s) + nu

    strong = base.copy()
    weak = perturb(base, eps)
    ts, Hs, Hv = [], [], []
    sup_lap, sup_grad = -np.inf, 0.0

    def sample():
        nonlocal sup_lap, sup_grad
        ts.append(strong.t)
        Hs.append(relative_entropy(weak, strong))
        Hv.append(entropy(strong))
        sup_lap = max(sup_lap, float(np.max(grid.laplacian(strong.p))))
        gv = np.sqrt(np.sum(grid.gradient(strong.u) ** 2, axis=0))
        sup_grad = max(sup_grad, _lp_norm(grid, gv, r))

    sample()
    n = 0
    while strong.t < T:
        dt = min(cfl_dt(grid, strong.u, strong.p, cfl_safety),
                 cfl_dt(grid, weak.u, weak.p, cfl_safety), T - strong.t, dt_cap)
        if T - (strong.t + dt) < 1e-12 * max(1.0, T):
            dt = T - strong.t
        strong = step(strong, params, config, dt=dt)
        weak = step(weak, params, config, dt=dt)
        n += 1
        if n % sample_every == 0 or strong.t >= T - 1e-12 * max(1.0, T):
            sample()
    t = np.array(ts)
    H = np.array(Hs)
    if np.all(H > 0):
        K_hat = ExponentialRateFit().fit(t, H).rate_
    else:
        K_hat = 0.0
    return RelEntropySeries(eps=float(eps), t=t, H_rel=H, K_hat=float(K_hat),
                            sup_laplacian_q=sup_lap, grad_v_norm=sup_grad,
                            grad_v_exponent=r, tol=tol, H_strong=np.array(Hv))


def continuous_dependence_scan(base, eps_list, s, T, **kwargs):
    """Rows ``(eps, H_rel(0), H_rel(T), H_rel(T)/H_rel(0))`` for each ``eps``.

    The ratio is defined as 1 when ``H_rel(0) = 0``.
    """
    eps_list = [float(e) for e in eps_list]
    if any(e < 0 for e in eps_list) or eps_list != sorted(eps_list):
        raise FracPMEError("eps_list must be nonnegative and sorted")
    rows = []
    for eps in eps_list:
        ser = weak_strong_experiment(base, eps, s, T, **kwargs)
        h0, hT = float(ser.H_rel[0]), float(ser.H_rel[-1])
        rows.append((eps, h0, hT, hT / h0 if h0 > 0 else 1.0))
    return rows
