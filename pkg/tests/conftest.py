"""Shared oracles and helpers for the test suite.

Oracles here are deliberately independent of the implementation paths
they check: dense matrix products and exponentials for gate/protocol
checks, an extended-precision Taylor series for the Pade exponential,
and brute-force statevector reductions for entanglement measures.
"""

import numpy as np
import pytest

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": SX, "Y": SY, "Z": SZ}


def kron_all(mats):
    out = np.array([[1.0]], dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def embed(factors: dict, n: int) -> np.ndarray:
    """Dense operator with the given single-qubit factors (1-based, MSB first)."""
    return kron_all([PAULI[factors.get(q, "I")] for q in range(1, n + 1)])


def dense_expm(a: np.ndarray) -> np.ndarray:
    import scipy.linalg

    return scipy.linalg.expm(a)


def taylor_expm_oracle(a: np.ndarray, terms: int = 200) -> np.ndarray:
    """exp(a) summed in extended precision with scaling and squaring."""
    a = np.asarray(a, dtype=np.clongdouble)
    norm = float(np.abs(a).sum(axis=0).max().real)
    s = max(0, int(np.ceil(np.log2(max(norm, 1e-30)) + 2)))
    b = a / np.clongdouble(2 ** s)
    out = np.eye(a.shape[0], dtype=np.clongdouble)
    term = np.eye(a.shape[0], dtype=np.clongdouble)
    for k in range(1, terms + 1):
        term = term @ b / np.clongdouble(k)
        out = out + term
    for _ in range(s):
        out = out @ out
    return out.astype(complex)


def random_state(n_qubits: int, rng) -> np.ndarray:
    amps = rng.normal(size=2 ** n_qubits) + 1j * rng.normal(size=2 ** n_qubits)
    return amps / np.linalg.norm(amps)


def random_hermitian(dim: int, rng) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def fock_annihilator_matrices(n_modes: int) -> list:
    """Occupied = |0> convention, matching the package's mapping."""
    sm = 0.5 * (SX - 1j * SY)
    ops = []
    for j in range(1, n_modes + 1):
        mats = [-SZ] * (j - 1) + [sm] + [I2] * (n_modes - j)
        ops.append(kron_all(mats))
    return ops


@pytest.fixture
def rng():
    return np.random.default_rng(20250808)
