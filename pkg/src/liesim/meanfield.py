"""Exact diagonalization of Lie-algebra elements by generalized Jacobi sweeps.

A Hermitian element H of a compact algebra splits over the Cartan-Weyl
basis into commuting (diagonal) and ladder parts.  Each sweep step picks
the ladder coefficient of largest magnitude, forms the su(2) subalgebra
attached to its root, and rotates within that subalgebra so the selected
coefficient vanishes.  The square distance to the diagonal subalgebra
contracts by at least (l-1)/l per step, so the element converges to its
diagonal form H_D = sum_k eps_k h_k = U H U^dag.

Eigenvalues of H on any irreducible representation then follow from the
weights: every weight state |w> of H_D gives the eigenvalue eps . w.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .liecore import AlgebraSpec, GroupElement, expm

__all__ = [
    "AlgebraElement",
    "DiagonalizationResult",
    "ConvergenceError",
    "cw_project",
    "jacobi_step",
    "diagonalize",
    "bogolubov_quadratic",
    "element_from_matrix",
]


class ConvergenceError(RuntimeError):
    """Sweep failed to reach the requested residual within the iteration cap."""


@dataclass
class AlgebraElement:
    """Hermitian element sum_m coeffs[m] O_m of an algebra."""

    spec: AlgebraSpec
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs)
        if self.coeffs.shape != (self.spec.dim,):
            raise ValueError("coefficient vector does not match algebra dimension")
        if np.abs(self.coeffs.imag).max(initial=0.0) > 1e-10:
            raise ValueError("Hermitian elements need real coefficients over "
                             "a Hermitian basis")
        self.coeffs = self.coeffs.real.astype(float)

    def matrix(self) -> np.ndarray:
        return self.spec.element(self.coeffs)


def element_from_matrix(spec: AlgebraSpec, mat: np.ndarray,
                        tol: float = 1e-12) -> AlgebraElement:
    """Project a Hermitian matrix onto the algebra; rejects anything outside."""
    coeffs = spec.project(mat)
    residual = np.linalg.norm(spec.element(coeffs) - mat)
    if residual > tol * max(1.0, np.linalg.norm(mat)):
        raise ValueError(f"matrix lies outside the algebra span "
                         f"(residual {residual:.2e})")
    return AlgebraElement(spec, coeffs.real)


def cw_project(spec: AlgebraSpec, h: "AlgebraElement | np.ndarray"
               ) -> tuple[np.ndarray, np.ndarray]:
    """Cartan-Weyl coefficients (gamma over the CSA, iota over raising ops).

    H = sum_k gamma_k h_k + sum_j iota_j E_j + conj(iota_j) E_j^dag.
    """
    mat = h.matrix() if isinstance(h, AlgebraElement) else np.asarray(h)
    hmats = spec.csa_matrices()
    emats = spec.raising_matrices()
    gamma = np.einsum("kab,ba->k", hmats, mat).real
    iota = np.einsum("jba,ba->j", emats.conj(), mat)
    return gamma, iota


def _su2_triple(spec: AlgebraSpec, t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Angular-momentum triple (Jx, Jy, Jz) of the su(2) attached to root t."""
    alpha = spec.cw.roots[t]
    a2 = float(alpha @ alpha)
    h = spec.csa_matrices()
    jz = np.einsum("k,kab->ab", alpha, h) / a2
    jp = np.sqrt(2.0 / a2) * spec.raising_matrices()[t]
    jm = jp.conj().T
    return 0.5 * (jp + jm), -0.5j * (jp - jm), jz, a2


def _rotation_to_z(v: np.ndarray, jx, jy, jz) -> np.ndarray:
    """Group element sending the su(2) component v.J onto +|v| Jz.

    Conjugation by exp(i theta n.J) rotates coefficient vectors by
    R(n, -theta), so the carrying rotation uses theta = -angle(v, z)
    about the axis v x z.
    """
    nv = np.linalg.norm(v)
    if nv == 0:
        return np.eye(jz.shape[0], dtype=complex)
    beta = np.arccos(np.clip(v[2] / nv, -1.0, 1.0))
    axis = np.array([v[1], -v[0], 0.0])  # v x z
    na = np.linalg.norm(axis)
    if na < 1e-14 * nv:
        if v[2] > 0:
            return np.eye(jz.shape[0], dtype=complex)
        axis, na, beta = np.array([1.0, 0.0, 0.0]), 1.0, np.pi
    axis = axis / na
    gen = axis[0] * jx + axis[1] * jy + axis[2] * jz
    return expm(-1j * beta * gen)


def jacobi_step(spec: AlgebraSpec, hbar: np.ndarray
                ) -> tuple[np.ndarray, np.ndarray, int]:
    """One sweep step; returns (rotated matrix, rotation U_t, chosen root).

    No-op (identity rotation) when every ladder coefficient vanishes.
    Ties on the largest |iota| go to the lowest root index.
    """
    gamma, iota = cw_project(spec, hbar)
    mags = np.abs(iota)
    t = int(np.argmax(mags))
    if mags[t] == 0.0:
        return hbar, np.eye(hbar.shape[0], dtype=complex), -1
    jx, jy, jz, a2 = _su2_triple(spec, t)
    scale = np.sqrt(2.0 * a2)
    v = np.array([scale * iota[t].real, -scale * iota[t].imag,
                  float(gamma @ spec.cw.roots[t])])
    u = _rotation_to_z(v, jx, jy, jz)
    return u @ hbar @ u.conj().T, u, t


@dataclass
class DiagonalizationResult:
    epsilon: np.ndarray          # CSA coefficients of H_D
    u: GroupElement              # H_D = U H U^dag
    residual: float              # final square distance to the CSA
    iterations: int
    contraction_ratios: np.ndarray


def _square_distance(iota: np.ndarray) -> float:
    return float(np.sum(np.abs(iota) ** 2))


def diagonalize(spec: AlgebraSpec, element: "AlgebraElement | np.ndarray",
                eps: float = 1e-10, order_weights: bool = True
                ) -> DiagonalizationResult:
    """Generalized Jacobi diagonalization of a Hermitian algebra element.

    Iterates until the square ladder distance d_C drops below `eps`; the
    iteration cap is ten times the worst-case contraction budget
    ``l * (ln M - ln(eps / d_C0))`` with d_C0 = d_C(H)/M.  Exceeding the
    cap raises ConvergenceError rather than truncating silently.

    With order_weights=True a final pass of pi-rotations (Weyl
    reflections) arranges the diagonal coefficients so that the highest
    weight state is the ground state of H_D, i.e. eps . alpha <= 0 for
    every stored root.
    """
    el = element if isinstance(element, AlgebraElement) else \
        element_from_matrix(spec, np.asarray(element))
    hbar = el.matrix()
    scale = max(np.linalg.norm(hbar), 1e-300)
    l, m = spec.cw.n_roots, spec.dim

    _, iota = cw_project(spec, hbar)
    d0 = _square_distance(iota)
    if d0 > eps and l >= 1:
        budget = l * max(np.log(m) - np.log(eps / (d0 / m)), 1.0)
        cap = int(10 * np.ceil(budget))
    else:
        cap = 1

    u_acc = np.eye(spec.rep_dim, dtype=complex)
    ratios = []
    d_prev = d0
    it = 0
    while d_prev > eps:
        if it >= cap:
            raise ConvergenceError(
                f"no convergence after {it} sweeps (d_C={d_prev:.3e}, eps={eps})")
        hbar, u_t, t = jacobi_step(spec, hbar)
        if t < 0:
            break
        u_acc = u_t @ u_acc
        _, iota = cw_project(spec, hbar)
        d_new = _square_distance(iota)
        ratio = d_new / d_prev if d_prev > 0 else 0.0
        ratios.append(ratio)
        if l > 1 and ratio > (l - 1) / l + 1e-9:
            raise ConvergenceError(
                f"contraction bound violated at sweep {it}: "
                f"ratio {ratio:.6f} > {(l - 1) / l:.6f}")
        d_prev = d_new
        it += 1

    gamma, iota = cw_project(spec, hbar)
    if order_weights:
        gamma, hbar, u_acc = _weyl_order(spec, gamma, hbar, u_acc,
                                         tol=1e-9 * max(scale, 1.0))
    return DiagonalizationResult(
        epsilon=gamma,
        u=GroupElement(spec, u_acc),
        residual=_square_distance(iota),
        iterations=it,
        contraction_ratios=np.array(ratios),
    )


def _weyl_order(spec: AlgebraSpec, gamma: np.ndarray, hbar: np.ndarray,
                u_acc: np.ndarray, tol: float):
    """Reflect within root su(2)s until eps . alpha <= 0 for all roots.

    Each reflection is the pi-rotation about the equatorial axis of a
    root su(2); it flips the root component of the CSA coefficients and
    fixes the orthogonal complement, so H stays diagonal.
    """
    l = spec.cw.n_roots
    for _ in range(4 * l * l + 8):
        overlaps = spec.cw.roots @ gamma
        t = int(np.argmax(overlaps))
        if overlaps[t] <= tol:
            return gamma, hbar, u_acc
        jx, _, _, _ = _su2_triple(spec, t)
        u_w = expm(-1j * np.pi * jx)
        hbar = u_w @ hbar @ u_w.conj().T
        u_acc = u_w @ u_acc
        gamma, _ = cw_project(spec, hbar)
    raise ConvergenceError("Weyl ordering pass did not terminate")


def bogolubov_quadratic(lam: np.ndarray) -> np.ndarray:
    """Single-particle energies of a number-conserving quadratic form.

    The coefficient matrix of ``sum lam_ij c_i^dag c_j`` is its own
    defining-representation image, so the energies are simply its
    eigenvalues; `diagonalize` on the matching u(N) element reproduces
    them, which the tests cross-check.
    """
    lam = np.asarray(lam)
    if np.abs(lam - lam.conj().T).max() > 1e-10 * max(1.0, np.abs(lam).max()):
        raise ValueError("coefficient matrix must be Hermitian")
    return np.linalg.eigvalsh(lam)
