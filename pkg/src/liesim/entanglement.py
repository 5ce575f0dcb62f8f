"""Standard and algebra-relative entanglement measures for small systems.

Pure states come in as amplitude vectors (same basis convention as
`liesim.statevector`), mixed two-qubit states as 4x4 density matrices.
The algebra-relative measures reduce the state to expectation values of
a distinguished observable set and score the squared length of that
reduced state; product/coherent states sit at 1, maximally entangled
states relative to the set sit at 0.
"""

from __future__ import annotations

import numpy as np

from .gcs import h_purity
from .opalgebra import FermionExpr, jordan_wigner
from .statevector import StateVector, expectation

__all__ = [
    "check_density_matrix",
    "reduced_density",
    "schmidt_entropy",
    "concurrence",
    "local_purity",
    "uN_purity",
    "bell_correlation",
]

_SY = np.array([[0, -1j], [1j, 0]])
_PAULI3 = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
])


def check_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.abs(rho - rho.conj().T).max() > 1e-12 * max(1.0, np.abs(rho).max()):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-12 * rho.shape[0]:
        raise ValueError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def reduced_density(amplitudes: np.ndarray, dims: list[int],
                    keep: int) -> np.ndarray:
    """Trace out all subsystems except `keep` (0-based) of a pure state."""
    amps = np.asarray(amplitudes, dtype=complex).reshape(dims)
    axes = list(range(len(dims)))
    axes.remove(keep)
    psi = np.moveaxis(amps, keep, 0).reshape(dims[keep], -1)
    return psi @ psi.conj().T


def schmidt_entropy(amplitudes: np.ndarray, d_a: int, d_b: int) -> float:
    """Entanglement entropy (bits) across the declared bipartite cut."""
    amps = np.asarray(amplitudes, dtype=complex)
    if len(amps) != d_a * d_b:
        raise ValueError("cut dimensions do not factor the state")
    s = np.linalg.svd(amps.reshape(d_a, d_b), compute_uv=False)
    p = s ** 2
    p = p[p > 1e-15]
    return float(-np.sum(p * np.log2(p)))


def concurrence(rho: np.ndarray) -> float:
    """Two-qubit mixed-state concurrence from the spin-flipped spectrum."""
    rho = check_density_matrix(rho)
    if rho.shape != (4, 4):
        raise ValueError("concurrence is defined for two qubits (4x4)")
    yy = np.kron(_SY, _SY)
    rho_tilde = yy @ rho.conj() @ yy
    sqrt_rho = _psd_sqrt(rho)
    m = sqrt_rho @ rho_tilde @ sqrt_rho
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(m), 0.0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)  # clamp eigenvalue noise at -1e-10 scale
    return (v * np.sqrt(w)) @ v.conj().T


def local_purity(amplitudes: np.ndarray, dims: list[int]) -> float:
    """Purity relative to all local observables of the declared subsystems.

    K' sum_j (Tr rho_j^2 - 1/d_j) with K' = 1/(N - sum_j 1/d_j); equals 1
    exactly on full product states and 0 on states whose every subsystem
    is maximally mixed.
    """
    amps = np.asarray(amplitudes, dtype=complex)
    if int(np.prod(dims)) != len(amps):
        raise ValueError("subsystem dimensions do not factor the state")
    total = 0.0
    for j, d in enumerate(dims):
        rho_j = reduced_density(amps, dims, j)
        total += float(np.trace(rho_j @ rho_j).real) - 1.0 / d
    kprime = 1.0 / (len(dims) - sum(1.0 / d for d in dims))
    return kprime * total


def uN_purity(amplitudes: np.ndarray, n_modes: int) -> float:
    """Purity of a fermionic pure state relative to the bilinear algebra.

    Expectations are taken over the Hermitian basis
    {c_j^dag c_j' + h.c., i(c_j^dag c_j' - h.c.), sqrt(2)(n_j - 1/2)}
    and scored with K = 2/N.  Slater determinants in any mode basis give
    exactly 1.
    """
    amps = np.asarray(amplitudes, dtype=complex)
    if len(amps) != 2 ** n_modes:
        raise ValueError("state length must be 2^n_modes")
    state = StateVector(n_modes, amps.copy())
    values = []
    for i in range(1, n_modes + 1):
        ni = jordan_wigner(FermionExpr.number(i), n_modes)
        values.append(np.sqrt(2.0) * (expectation(state, ni).real - 0.5))
        for j in range(i + 1, n_modes + 1):
            hop = FermionExpr.creation(i) * FermionExpr.annihilation(j)
            sym = jordan_wigner(hop + hop.dagger(), n_modes)
            asym = jordan_wigner(1j * (hop - hop.dagger()), n_modes)
            values.append(expectation(state, sym).real)
            values.append(expectation(state, asym).real)
    return h_purity(np.array(values), 2.0 / n_modes)


def bell_correlation(amplitudes: np.ndarray, r1: np.ndarray,
                     r2: np.ndarray) -> float:
    """<(r1 . sigma)^A (r2 . sigma)^B> for a two-qubit pure state."""
    amps = np.asarray(amplitudes, dtype=complex)
    if len(amps) != 4:
        raise ValueError("bell_correlation takes a two-qubit state")
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    for r in (r1, r2):
        if abs(np.linalg.norm(r) - 1.0) > 1e-10:
            raise ValueError("measurement directions must be unit vectors")
    op = np.kron(np.einsum("a,aij->ij", r1, _PAULI3),
                 np.einsum("a,aij->ij", r2, _PAULI3))
    return float(np.real(np.vdot(amps, op @ amps)))
