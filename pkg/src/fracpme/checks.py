"""Self-checks run by ``fracpme check``: dense-operator oracles and invariants."""

import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import Grid
from .simulation import PorousMediumSolver
from .state import CosinePerturbation, GaussianBump, State, make_initial

__all__ = ["CheckResult", "dense_operator", "run_checks"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _dft_matrix(n):
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n)


def _lattice_k(n, length, zero_nyquist):
    m = np.arange(n)
    m = np.where(m < n // 2, m, m - n).astype(float)
    if zero_nyquist:
        m[n // 2] = 0.0
    return 2 * np.pi / length * m


def dense_operator(dim, n, length, symbol):
    """Explicit (n^dim x n^dim) matrix F^-1 diag(symbol) F for a multiplier.

    ``symbol(ks, ks_odd)`` receives per-axis wavenumber grids (full lattice,
    ``indexing='ij'``), once plain and once with the Nyquist entry zeroed,
    and returns the multiplier on the full spectrum.
    """
    F1 = _dft_matrix(n)
    F = F1
    for _ in range(dim - 1):
        F = np.kron(F, F1)
    k = _lattice_k(n, length, False)
    kd = _lattice_k(n, length, True)
    ks = np.meshgrid(*([k] * dim), indexing="ij")
    kds = np.meshgrid(*([kd] * dim), indexing="ij")
    m = np.ravel(symbol(ks, kds))
    Finv = np.conj(F).T / F.shape[0]
    return Finv @ (m[:, None] * F)


def _check_operators():
    out = []
    rng = np.random.default_rng(7)
    for dim in (1, 2):
        g = Grid(dim, 16, 2 * np.pi * 1.3)
        f = rng.standard_normal(g.shape)
        v = rng.standard_normal((dim,) + g.shape)
        s = 0.75
        M = dense_operator(dim, 16, g.length, lambda ks, kd: sum(k**2 for k in ks) ** s)
        err = np.max(np.abs((M @ f.ravel()).real.reshape(g.shape) - g.frac_laplacian(f, s)))
        out.append(CheckResult(f"frac_laplacian dense oracle {dim}D", err <= 1e-10, f"max err {err:.2e}"))
        gerr = 0.0
        div = np.zeros(g.size, dtype=complex)
        gr = g.gradient(f)
        for a in range(dim):
            Ma = dense_operator(dim, 16, g.length, lambda ks, kd, a=a: 1j * kd[a])
            gerr = max(gerr, np.max(np.abs((Ma @ f.ravel()).real.reshape(g.shape) - gr[a])))
            div += Ma @ v[a].ravel()
        derr = np.max(np.abs(div.real.reshape(g.shape) - g.divergence(v)))
        out.append(CheckResult(f"gradient dense oracle {dim}D", gerr <= 1e-10, f"max err {gerr:.2e}"))
        out.append(CheckResult(f"divergence dense oracle {dim}D", derr <= 1e-10, f"max err {derr:.2e}"))
    return out


def _check_parseval():
    rng = np.random.default_rng(11)
    g = Grid(3, 16, 5.0)
    f = rng.standard_normal(g.shape)
    spatial = g.integrate(f**2)
    spectral = g.spectral_sum(1.0, g.forward(f))
    rel = abs(spatial - spectral) / spatial
    rt = np.max(np.abs(g.inverse(g.forward(f)) - f)) / np.max(np.abs(f))
    return [
        CheckResult("Parseval 3D", rel <= 1e-12, f"rel err {rel:.2e}"),
        CheckResult("transform round trip", rt <= 1e-12, f"rel err {rt:.2e}"),
    ]


def _check_conservation():
    g = Grid(2, 32, 20.0)
    st = make_initial(g, GaussianBump(1.0, 2.0))
    solver = PorousMediumSolver(s=0.75, t_end=2.0, dt_max=0.01, sample_every=20).fit(st)
    m = solver.trajectory_.column("mass")
    drift = np.max(np.abs(m - m[0])) / m[0]
    H = solver.trajectory_.column("H")
    mono = np.max(np.diff(H)) / H[0]
    return [
        CheckResult("mass conservation", drift <= 1e-12, f"rel drift {drift:.2e} over {solver.trajectory_.n_steps} steps"),
        CheckResult("positivity", solver.trajectory_.min_u >= 0, f"min u {solver.trajectory_.min_u:.3e}"),
        CheckResult("entropy monotone", mono <= 1e-3, f"max increase {mono:.2e} of H(0)"),
    ]


def _check_homogeneous():
    g = Grid(2, 16, 3.0)
    c = 0.7
    st = make_initial(g, CosinePerturbation(base=c, amplitude=0.0))
    solver = PorousMediumSolver(s=0.75, t_end=1.0, dt_max=0.1).fit(st)
    fin = solver.state_
    uerr = np.max(np.abs(fin.u - c)) / c
    perr = abs(np.mean(fin.p) - c**2 * fin.t) / (c**2 * fin.t)
    return [CheckResult("homogeneous solution", uerr <= 1e-13 and perr <= 1e-10,
                        f"u rel dev {uerr:.1e}, mean p rel err {perr:.1e}")]


def _check_snapshot():
    from .io import read_snapshot, write_snapshot

    rng = np.random.default_rng(3)
    g = Grid(2, 8, 1.5)
    st = State(g, rng.random(g.shape), rng.random(g.shape), 0.1 + 1e-17)
    with tempfile.TemporaryDirectory() as d:
        stem = Path(d) / "snap"
        write_snapshot(st, stem, 0.75)
        back, s = read_snapshot(stem)
    ok = (back.u.tobytes() == st.u.tobytes() and back.p.tobytes() == st.p.tobytes()
          and back.t == st.t and s == 0.75)
    return [CheckResult("snapshot round trip", ok, "bit-identical" if ok else "mismatch")]


def run_checks():
    results = []
    for fn in (_check_operators, _check_parseval, _check_conservation, _check_homogeneous,
               _check_snapshot):
        try:
            results.extend(fn())
        except Exception as exc:  # a crash is a failed check, not a crash of the suite
            results.append(CheckResult(fn.__name__.lstrip("_"), False, f"raised {exc!r}"))
    return results
