import numpy as np
import pytest


def dense_multiplier(n, length, dim, symbol):
    """Brute-force F^-1 diag(m) F built from explicit DFT sums.

    ``symbol`` maps a tuple of integer mode numbers (in -n/2..n/2-1) to the
    multiplier value. Independent of numpy.fft and of the package tables.
    """
    modes = [m if m < n // 2 else m - n for m in range(n)]
    idx = np.array(np.meshgrid(*([np.arange(n)] * dim), indexing="ij")).reshape(dim, -1).T
    N = n**dim
    M = np.zeros((N, N), dtype=complex)
    for kk in idx:
        kvec = tuple(modes[c] for c in kk)
        mval = symbol(kvec, 2 * np.pi / length)
        if mval == 0:
            continue
        phase = np.exp(2j * np.pi * (idx @ kk) / n)  # e_k evaluated at every node
        M += mval * np.outer(phase, np.conj(phase)) / N
    return M


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


_ACCEPTANCE = []


@pytest.fixture
def verdict():
    """Record one acceptance line; printed live and repeated in the terminal summary."""

    def record(name, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
