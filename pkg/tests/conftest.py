import numpy as np
import pytest

from rbfid.clifford import clifford_group

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0 + 0j, -1.0])
I2 = np.eye(2, dtype=complex)
PAULIS = (I2, X, Y, Z)


def apply_kraus(kraus, rho):
    return sum(k @ rho @ k.conj().T for k in kraus)


def ptm_oracle(kraus):
    """Transfer matrix by conjugating each basis element with the Kraus list."""
    basis = [p / np.sqrt(2) for p in PAULIS]
    out = np.empty((4, 4))
    for b, Ob in enumerate(basis):
        img = apply_kraus(kraus, Ob)
        for a, Oa in enumerate(basis):
            out[a, b] = np.trace(Oa @ img).real
    return out


def pauli_kraus(l):
    lx, ly, lz = l
    return [np.sqrt(1 - lx - ly - lz) * I2, np.sqrt(lx) * X, np.sqrt(ly) * Y, np.sqrt(lz) * Z]


def amp_damp_kraus(gamma):
    return [np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex),
            np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)]


@pytest.fixture(scope="session")
def group():
    return clifford_group()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = {}


def record(criterion, ok, detail):
    """Store a one-line verdict for the acceptance summary."""
    ACCEPTANCE_LINES[criterion] = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[criterion])
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
