import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracpme import GaussianBump, State, make_grid, make_initial
from fracpme.diagnostics import DiagnosticsRecord
from fracpme.errors import FracPMEError, OrderOutOfRangeError, TrajectoryError
from fracpme.experiments import (DecayFit, ExponentialRateFit, PowerLawDecayFit,
                                 continuous_dependence_scan, decay_fit, finite_size_window,
                                 growth_exponent, lambda_theory, perturb, relative_entropy,
                                 weak_strong_experiment)
from fracpme.simulation import Trajectory


def test_lambda_theory_values():
    assert lambda_theory(0.75) == pytest.approx(1 / 13, rel=1e-15)
    assert lambda_theory(0.9) == pytest.approx(0.3 / (1.8 * 6.8), rel=1e-15)
    assert lambda_theory(0.9) == pytest.approx(0.0245098, abs=1e-7)
    assert lambda_theory(1 - 1e-9) == pytest.approx(0, abs=1e-8)


def test_lambda_theory_decreasing():
    s = np.linspace(0.75, 0.999, 500)
    vals = np.array([lambda_theory(x) for x in s])
    assert np.all(np.diff(vals) < 0) and np.all(vals > 0)


@pytest.mark.parametrize("s", [0.7, 1.0, 0.5])
def test_lambda_theory_range(s):
    with pytest.raises(OrderOutOfRangeError):
        lambda_theory(s)


def test_decay_fit_exact_power_law():
    t = np.geomspace(1, 50, 20)
    fit = decay_fit(t, 7 * t**-0.3, 0.75)
    assert abs(fit.rate - 0.3) <= 1e-12
    assert fit.residual <= 1e-12
    assert fit.verdict
    assert "verdict: pass" in fit.report()


def test_decay_fit_constant():
    t = np.linspace(1, 10, 12)
    fit = decay_fit(t, np.full(12, 3.0), 0.75)
    assert abs(fit.rate) <= 1e-12
    assert not fit.verdict


@settings(max_examples=30, deadline=None)
@given(rate=st.floats(0, 3), C=st.floats(1e-3, 1e3), t1=st.floats(1.5, 100))
def test_decay_fit_recovers_exponent(rate, C, t1):
    t = np.geomspace(1, t1, 16)
    assert decay_fit(t, C * t**-rate, 0.8).rate == pytest.approx(rate, abs=1e-10)


def test_decay_fit_window_and_errors():
    t = np.linspace(0.1, 20, 200)
    H = np.where(t < 1, 100.0, 5 * t**-0.5)
    fit = decay_fit(t, H, 0.75, window=(1.0, 10.0))
    assert fit.rate == pytest.approx(0.5, abs=1e-10)
    assert 1.0 <= fit.window[0] and fit.window[1] <= 10.0
    with pytest.raises(TrajectoryError):
        decay_fit(t, H, 0.75, window=(30.0, 40.0))
    with pytest.raises(FracPMEError):
        decay_fit(t, H - 2.0, 0.75, window=(1.0, 20.0))


def test_decay_fit_one_sided_threshold():
    fit = DecayFit(window=(1, 10), rate=0.05, residual=0.02, theory=1 / 13, n_samples=10)
    assert fit.threshold == pytest.approx(1 / 13 - 0.04)
    assert fit.verdict
    assert not DecayFit((1, 10), 0.03, 0.02, 1 / 13, 10).verdict


def test_sklearn_style_estimators():
    t = np.geomspace(1, 10, 9)
    est = PowerLawDecayFit().fit(t, 2 * t**-1.5)
    assert est.get_params() == {}
    assert np.allclose(est.predict(t), 2 * t**-1.5)
    ex = ExponentialRateFit().fit(t, 3 * np.exp(-0.2 * t))
    assert ex.rate_ == pytest.approx(-0.2) and ex.intercept_ == pytest.approx(np.log(3))


def test_growth_exponent():
    T = np.array([1.0, 2, 4, 8, 16])
    assert growth_exponent(T, 3 * T**0.5) == pytest.approx(0.5)


def _traj(t, H, mass, shell):
    cols = DiagnosticsRecord.columns()
    recs = []
    for ti, Hi, mi in zip(t, H, mass):
        v = dict.fromkeys(cols, 0.0)
        v.update(t=ti, H=Hi, mass=mi)
        recs.append(DiagnosticsRecord(**v))
    return Trajectory(records=recs, shell_fraction=list(shell))


def test_finite_size_window():
    g = make_grid(1, 16, 10.0)
    t = np.arange(0.0, 10.0)
    shell = np.where(t >= 6, 1e-4, 1e-12)
    tr = _traj(t, 10 / (1 + t), np.ones(10), shell)
    assert finite_size_window(tr, g) == (1.0, 5.0)
    # H approaching the uniform floor M^2/V ends the window too
    tr = _traj(t, np.maximum(10 / (1 + t) ** 3, 0.105), np.ones(10), np.zeros(10))
    assert finite_size_window(tr, g) == (1.0, 3.0)
    tr = _traj(t, 10 / (1 + t), np.ones(10), np.zeros(10))
    assert finite_size_window(tr, g) == (1.0, 9.0)


def test_relative_entropy_examples():
    g = make_grid(1, 32, 2 * np.pi)
    (x,) = g.coords
    rng = np.random.default_rng(1)
    a = State(g, rng.random(32), rng.random(32))
    assert relative_entropy(a, a) == 0.0
    assert relative_entropy(a, State(g, a.u, a.p + 4.0)) == pytest.approx(0, abs=1e-28)
    eps = 1e-2
    b = State(g, a.u + eps * np.cos(x), a.p)
    assert relative_entropy(b, a) == pytest.approx(eps**2 * np.pi, rel=1e-10)
    with pytest.raises(FracPMEError):
        relative_entropy(a, State(make_grid(1, 16, 2 * np.pi), np.zeros(16), np.zeros(16)))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), shift=st.floats(-10, 10))
def test_relative_entropy_properties(seed, shift):
    rng = np.random.default_rng(seed)
    g = make_grid(2, 8, 2.0)
    a = State(g, rng.random(g.shape), rng.random(g.shape))
    b = State(g, rng.random(g.shape), rng.random(g.shape))
    h = relative_entropy(a, b)
    assert h >= 0
    assert h == pytest.approx(relative_entropy(b, a), rel=1e-14)
    shifted = relative_entropy(State(g, a.u, a.p + shift), State(g, b.u, b.p + shift))
    assert shifted == pytest.approx(h, rel=1e-9)


def test_perturb():
    g = make_grid(2, 16, 4.0)
    base = make_initial(g, GaussianBump(1.0, 0.5))
    pert = perturb(base, 0.1)
    assert np.array_equal(pert.p, base.p)
    x = g.coords[0]
    assert np.allclose(pert.u, base.u * (1 + 0.1 * np.cos(2 * np.pi * x / 4.0)), rtol=1e-15, atol=0)


@pytest.fixture(scope="module")
def ws_base():
    g = make_grid(2, 32, 20.0)
    return make_initial(g, GaussianBump(1.0, 2.0))


def test_weak_strong_zero_eps_is_identical(ws_base):
    ser = weak_strong_experiment(ws_base, 0.0, 0.75, 0.5, dt_max=0.05)
    assert np.all(ser.H_rel == 0.0)
    assert ser.verdict


def test_weak_strong_sign_flip(ws_base):
    a = weak_strong_experiment(ws_base, 1e-3, 0.75, 0.1, dt_max=0.05)
    b = weak_strong_experiment(perturb(ws_base, 0.0), 1e-3, 0.75, 0.1, dt_max=0.05)
    assert a.H_rel[0] == b.H_rel[0]
    flipped = relative_entropy(perturb(ws_base, -1e-3), ws_base)
    assert flipped == pytest.approx(a.H_rel[0], rel=1e-12)


def test_weak_strong_rejects_negative_eps(ws_base):
    with pytest.raises(FracPMEError):
        weak_strong_experiment(ws_base, -1e-3, 0.75, 0.1)


def test_weak_strong_report_fields(ws_base):
    ser = weak_strong_experiment(ws_base, 1e-3, 0.75, 0.5, dt_max=0.05)
    rep = ser.report()
    for key in ("K_hat", "sup_laplacian_q", "grad_v_exponent", "max_excess", "verdict"):
        assert key in rep
    assert ser.grad_v_exponent == pytest.approx(12 / 4.5 + 0.5)
    assert ser.finite


def test_continuous_dependence_scan(ws_base):
    rows = continuous_dependence_scan(ws_base, [0.0, 1e-4, 3e-4, 1e-3], 0.75, 0.5, dt_max=0.05)
    assert rows[0] == (0.0, 0.0, 0.0, 1.0)
    h0 = [r[1] for r in rows]
    assert np.all(np.diff(h0) > 0)
    ratios = np.array([r[3] for r in rows[1:]])
    assert ratios.max() / ratios.min() <= 1.25
    with pytest.raises(FracPMEError):
        continuous_dependence_scan(ws_base, [1e-3, 1e-4], 0.75, 0.5)
