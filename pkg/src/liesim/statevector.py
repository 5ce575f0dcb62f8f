"""Exact dense simulation of an n-qubit register.

Basis convention: qubit 1 is the most significant bit, so the ordered
basis is ``{|00...0>, |00...1>, ..., |11...1>}`` and amplitude ``a[k]``
belongs to the basis label ``k`` written in binary with qubit 1 first.
"""

from __future__ import annotations

import numpy as np

from .opalgebra import PauliSum, PauliTerm

__all__ = [
    "StateVector",
    "new_register",
    "apply_rotation",
    "apply_ising",
    "apply_pauli",
    "apply_pauli_string_exp",
    "apply_matrix",
    "expectation",
    "dense_matrix",
    "pauli_term_matrix",
    "sample_counts",
    "allclose_up_to_phase",
    "MAX_QUBITS",
]

MAX_QUBITS = 26  # 2^26 complex amplitudes is the desk-scale memory envelope

_I2 = np.eye(2, dtype=complex)
_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class StateVector:
    """Dense complex amplitudes over the 2^n logical basis."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray):
        if len(amplitudes) != 2 ** n_qubits:
            raise ValueError("amplitude vector length must be 2^n_qubits")
        self.n_qubits = int(n_qubits)
        self.amplitudes = np.asarray(amplitudes, dtype=complex)

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def probability(self, basis_label: int) -> float:
        return float(abs(self.amplitudes[basis_label]) ** 2)


def new_register(n: int, basis_label: int = 0) -> StateVector:
    """Computational basis state |basis_label> on n qubits."""
    if n < 1 or n > MAX_QUBITS:
        raise ValueError(f"n must be in 1..{MAX_QUBITS}, got {n}")
    if not 0 <= basis_label < 2 ** n:
        raise ValueError(f"basis label {basis_label} outside register range")
    amps = np.zeros(2 ** n, dtype=complex)
    amps[basis_label] = 1.0
    return StateVector(n, amps)


def _check_qubit(state: StateVector, q: int) -> None:
    if not 1 <= q <= state.n_qubits:
        raise ValueError(f"qubit {q} outside 1..{state.n_qubits}")


def apply_matrix(state: StateVector, m: np.ndarray, qubit: int) -> StateVector:
    """Apply a 2x2 matrix on one qubit, in place."""
    _check_qubit(state, qubit)
    n = state.n_qubits
    left = 2 ** (qubit - 1)
    right = 2 ** (n - qubit)
    a = state.amplitudes.reshape(left, 2, right)
    a0 = a[:, 0, :].copy()
    a1 = a[:, 1, :]
    a[:, 0, :] = m[0, 0] * a0 + m[0, 1] * a1
    a[:, 1, :] = m[1, 0] * a0 + m[1, 1] * a1
    return state


def rotation_matrix(axis: str, theta: float) -> np.ndarray:
    """R_axis(theta) = exp(-i theta/2 sigma_axis)."""
    s = _PAULI[axis.upper()]
    return np.cos(theta / 2) * _I2 - 1j * np.sin(theta / 2) * s


def apply_rotation(state: StateVector, axis: str, qubit: int, theta: float) -> StateVector:
    return apply_matrix(state, rotation_matrix(axis, theta), qubit)


def apply_ising(state: StateVector, j: int, k: int, omega: float) -> StateVector:
    """Two-qubit Ising gate exp(-i omega/2 Z_j Z_k): a diagonal parity phase."""
    if j == k:
        raise ValueError("Ising gate needs two distinct qubits")
    _check_qubit(state, j)
    _check_qubit(state, k)
    n = state.n_qubits
    idx = np.arange(2 ** n)
    parity = ((idx >> (n - j)) ^ (idx >> (n - k))) & 1
    phase = np.exp(-1j * omega / 2) * np.ones(2 ** n)
    phase[parity == 1] = np.exp(1j * omega / 2)
    state.amplitudes *= phase
    return state


def apply_pauli(state: StateVector, term: PauliTerm) -> StateVector:
    """Apply one Pauli string (including its coefficient), in place."""
    n = state.n_qubits
    for q, ax in term.factors:
        _check_qubit(state, q)
        left = 2 ** (q - 1)
        right = 2 ** (n - q)
        a = state.amplitudes.reshape(left, 2, right)
        if ax == "X":
            a[:, [0, 1], :] = a[:, [1, 0], :]
        elif ax == "Y":
            a0 = a[:, 0, :].copy()
            a[:, 0, :] = -1j * a[:, 1, :]
            a[:, 1, :] = 1j * a0
        else:
            a[:, 1, :] *= -1.0
    if term.coefficient != 1.0:
        state.amplitudes *= term.coefficient
    return state


def apply_pauli_string_exp(state: StateVector, term: PauliTerm, theta: float,
                           method: str = "direct") -> StateVector:
    """Apply exp(-i theta/2 P) for a single Pauli string P (coefficient ignored).

    method='direct' rotates every factor into the Z basis, applies the
    diagonal parity phase, and rotates back.  method='ladder' expands the
    same operation into elementary one- and two-qubit gates: the basis
    changes plus a CNOT parity chain around a single Z (or ZZ) core, each
    CNOT itself realized as five elementary rotations/Ising gates.
    """
    if not term.factors:
        raise ValueError("empty Pauli string")
    if method == "direct":
        return _string_exp_direct(state, term, theta)
    if method == "ladder":
        return _string_exp_ladder(state, term, theta)
    raise ValueError(f"unknown method {method!r}")


# basis changes U with U^dag Z U = sigma_axis, so exp(-i t/2 sigma) = U exp(-i t/2 Z) U^dag
_TO_Z_BASIS = {
    "X": rotation_matrix("Y", -np.pi / 2),
    "Y": rotation_matrix("X", np.pi / 2),
    "Z": _I2,
}


def _string_exp_direct(state: StateVector, term: PauliTerm, theta: float) -> StateVector:
    n = state.n_qubits
    for q, ax in term.factors:
        if ax != "Z":
            apply_matrix(state, _TO_Z_BASIS[ax], q)
    idx = np.arange(2 ** n)
    parity = np.zeros(2 ** n, dtype=np.int64)
    for q, _ in term.factors:
        parity ^= (idx >> (n - q)) & 1
    phase = np.where(parity == 0, np.exp(-1j * theta / 2), np.exp(1j * theta / 2))
    state.amplitudes *= phase
    for q, ax in term.factors:
        if ax != "Z":
            apply_matrix(state, _TO_Z_BASIS[ax].conj().T, q)
    return state


def _apply_cnot_elementary(state: StateVector, control: int, target: int,
                           dagger: bool = False) -> StateVector:
    """CNOT from five elementary gates (up to a global phase e^{-i pi/4})."""
    s = -1.0 if dagger else 1.0
    seq = [
        ("ry", target, s * np.pi / 2),
        ("zz", (control, target), s * np.pi / 2),
        ("ry", target, -s * np.pi / 2),
        ("rx", target, s * np.pi / 2),
        ("rz", control, s * np.pi / 2),
    ]
    if dagger:
        seq = seq[::-1]
    for kind, tgt, ang in seq:
        if kind == "zz":
            apply_ising(state, tgt[0], tgt[1], ang)
        else:
            apply_rotation(state, kind[1], tgt, ang)
    return state


def _string_exp_ladder(state: StateVector, term: PauliTerm, theta: float) -> StateVector:
    qs = [q for q, _ in term.factors]
    for q, ax in term.factors:
        if ax != "Z":
            apply_matrix(state, _TO_Z_BASIS[ax], q)
    # CNOT chain folds the string parity onto the last one or two qubits
    chain = qs[:-1] if len(qs) >= 2 else []
    for a, b in zip(chain[:-1], chain[1:]):
        _apply_cnot_elementary(state, a, b)
    if len(qs) == 1:
        apply_rotation(state, "z", qs[0], theta)
    else:
        apply_ising(state, qs[-2], qs[-1], theta)
    for a, b in zip(chain[:-1][::-1], chain[1:][::-1]):
        _apply_cnot_elementary(state, a, b, dagger=True)
    for q, ax in term.factors:
        if ax != "Z":
            apply_matrix(state, _TO_Z_BASIS[ax].conj().T, q)
    return state


def expectation(state: StateVector, op: PauliSum | PauliTerm) -> complex:
    """<psi| op |psi>, computed term by term without forming any matrix."""
    if isinstance(op, PauliTerm):
        op = PauliSum([op])
    if op.max_qubit() > state.n_qubits:
        raise ValueError("operator acts outside the register")
    total = 0.0 + 0.0j
    for term in op.terms():
        work = state.copy()
        apply_pauli(work, term)
        total += np.vdot(state.amplitudes, work.amplitudes)
    return complex(total)


def pauli_term_matrix(term: PauliTerm, n: int) -> np.ndarray:
    mats = []
    fac = dict(term.factors)
    for q in range(1, n + 1):
        mats.append(_PAULI[fac[q]] if q in fac else _I2)
    out = np.array([[term.coefficient]], dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def dense_matrix(op, n: int) -> np.ndarray:
    """2^n x 2^n matrix of a PauliTerm/PauliSum in the register basis.

    Intended for oracles and small-system checks only.
    """
    if n > 12:
        raise ValueError("dense_matrix is capped at 12 qubits")
    if isinstance(op, PauliTerm):
        return pauli_term_matrix(op, n)
    if isinstance(op, PauliSum):
        out = np.zeros((2 ** n, 2 ** n), dtype=complex)
        for t in op.terms():
            out += pauli_term_matrix(t, n)
        return out
    raise TypeError(f"cannot build a matrix from {type(op).__name__}")


def sample_counts(state: StateVector, shots: int, seed: int) -> dict[int, int]:
    """Multinomial sampling of logical-basis measurements (Bohm's rule).

    An explicit seed is mandatory; exact expectations are the default
    readout everywhere else in the package.
    """
    rng = np.random.default_rng(seed)
    probs = np.abs(state.amplitudes) ** 2
    probs = probs / probs.sum()
    draws = rng.multinomial(shots, probs)
    return {int(i): int(c) for i, c in enumerate(draws) if c > 0}


def allclose_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> bool:
    """Equality of states/matrices modulo one global phase."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return bool(na == nb)
    ov = np.vdot(a, b)
    return bool(abs(abs(ov) / (na * nb) - 1.0) <= tol)
