"""Efficient expectations over group-coherent states.

A coherent state is U|HW> with U = exp(i sum_j zeta_j O_j) and |HW> the
highest-weight state of an irreducible representation.  Expectations of
algebra elements never touch the (possibly huge) representation carrying
the state: operators are rotated through the adjoint action computed in
a small faithful representation, and only their diagonal (Cartan) parts
survive against the highest-weight state.

Higher-order products are reduced by commuting every raising operator to
the right until it annihilates |HW>, a normal-ordering recursion over
monomials of lowering operators.  The cost grows exponentially with the
product order p, so p is capped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .liecore import AlgebraSpec, GroupElement
from .meanfield import AlgebraElement, cw_project, diagonalize

__all__ = [
    "GcsState",
    "MAX_PRODUCT_ORDER",
    "expectation",
    "expectation_quadratic",
    "expectation_product",
    "all_expectations",
    "prepare_from_expectations",
    "h_purity",
    "purity_normalization",
    "coherent_purity_level",
]

MAX_PRODUCT_ORDER = 6


@dataclass
class GcsState:
    """U|HW> identified by the group element and the irrep's weights.

    `weights` are the highest-weight eigenvalues of the CSA in the irrep
    carrying the state, which may differ from the stored representation
    of the spec (e.g. a fixed particle-number sector vs the defining
    representation).
    """

    spec: AlgebraSpec
    group: GroupElement
    weights: np.ndarray | None = None
    _memo: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        from .liecore import is_irreducible

        if self.weights is None:
            self.weights = self.spec.highest_weight
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (self.spec.cw.rank,):
            raise ValueError("weight vector rank mismatch")
        # extremality/maximal-purity statements need an irreducible action;
        # reducible representations are refused rather than mishandled
        if not is_irreducible(self.spec):
            raise ValueError(
                f"representation of {self.spec.name!r} acts reducibly; "
                "coherent-state machinery requires an irreducible action")

    @staticmethod
    def from_zeta(spec: AlgebraSpec, zeta: np.ndarray,
                  weights: np.ndarray | None = None) -> "GcsState":
        return GcsState(spec, GroupElement.from_zeta(spec, zeta), weights)

    def transformed_cw(self, w: AlgebraElement) -> tuple[np.ndarray, np.ndarray]:
        """Cartan-Weyl coefficients of U^dag W U."""
        u = self.group.matrix
        return cw_project(self.spec, u.conj().T @ w.matrix() @ u)


def expectation(state: GcsState, w: AlgebraElement) -> float:
    """<phi| W |phi> for a Hermitian element W of the algebra.

    Only the CSA part of the rotated operator survives: ladder operators
    annihilate the highest-weight state from one side or the other.
    """
    gamma, _ = state.transformed_cw(w)
    return float(gamma @ state.weights)


def expectation_quadratic(state: GcsState, w1: AlgebraElement,
                          w2: AlgebraElement) -> complex:
    """<phi| W1 W2 |phi> in closed form.

    The only surviving contractions are <h_k h_k'> = e_k e_k' and
    <E_a E_a^dag> = alpha_a . e; cross terms between different roots
    vanish against |HW> (the higher-order recursion reproduces this).
    """
    g1, i1 = state.transformed_cw(w1)
    g2, i2 = state.transformed_cw(w2)
    e = state.weights
    diag = (g1 @ e) * (g2 @ e)
    ladder = np.sum(i1 * np.conj(i2) * (state.spec.cw.roots @ e))
    return complex(diag + ladder)


def expectation_product(state: GcsState, ws: list[AlgebraElement]) -> complex:
    """<phi| W^p ... W^1 |phi> with ws = [W^1, ..., W^p] (W^1 acts first)."""
    p = len(ws)
    if p < 1:
        raise ValueError("need at least one operator")
    if p > MAX_PRODUCT_ORDER:
        raise ValueError(f"product order {p} exceeds cap {MAX_PRODUCT_ORDER} "
                         "(cost grows exponentially with the order)")
    spec = state.spec
    e = state.weights
    roots = spec.cw.roots
    ntable = spec.root_addition_constants()
    memo = state._memo

    def raise_on(beta: int, mono: tuple[int, ...]) -> dict[tuple[int, ...], complex]:
        """Expansion of E_beta applied to a lowering monomial on |HW>."""
        if not mono:
            return {}
        key = (beta, mono)
        hit = memo.get(key)
        if hit is not None:
            return hit
        i, rest = mono[0], mono[1:]
        out: dict[tuple[int, ...], complex] = {}
        for sub_mono, c in raise_on(beta, rest).items():
            _bump(out, (i,) + sub_mono, c)
        if beta == i:
            # [E_b, E_-b] = alpha_b . h acting on the remaining weight state
            shifted = e - np.sum(roots[list(rest)], axis=0) if rest else e
            _bump(out, rest, complex(roots[beta] @ shifted))
        else:
            kind, idx, n = ntable[(beta, i)]
            if kind == "+":
                for sub_mono, c in raise_on(idx, rest).items():
                    _bump(out, sub_mono, n * c)
            elif kind == "-":
                _bump(out, (idx,) + rest, n)
        memo[key] = out
        return out

    z: dict[tuple[int, ...], complex] = {(): 1.0 + 0.0j}
    for w in ws:
        gamma, iota = state.transformed_cw(w)
        new: dict[tuple[int, ...], complex] = {}
        for mono, c in z.items():
            shifted = e - (np.sum(roots[list(mono)], axis=0) if mono else 0.0)
            _bump(new, mono, c * complex(gamma @ shifted))
            for j in range(spec.cw.n_roots):
                lj = iota[j]
                if lj != 0.0:
                    _bump(new, (j,) + mono, c * np.conj(lj))
                    for sub_mono, x in raise_on(j, mono).items():
                        _bump(new, sub_mono, c * lj * x)
        z = {m: c for m, c in new.items() if abs(c) > 1e-300}
    return complex(z.get((), 0.0))


def _bump(d: dict, key, val) -> None:
    d[key] = d.get(key, 0.0 + 0.0j) + val


def all_expectations(state: GcsState) -> np.ndarray:
    """<O_j> for every basis element, via one adjoint action."""
    from .liecore import adjoint_action

    nu = adjoint_action(state.spec, state.group.matrix)
    return nu[:, list(state.spec.cw.csa_indices)] @ state.weights


def coherent_purity_level(spec: AlgebraSpec,
                          weights: np.ndarray | None = None) -> float:
    """sum_j <O_j>^2 attained by every coherent state of the irrep."""
    w = spec.highest_weight if weights is None else np.asarray(weights)
    return float(w @ w)


def prepare_from_expectations(spec: AlgebraSpec, expectations: np.ndarray,
                              weights: np.ndarray | None = None,
                              purity_tol: float = 1e-6,
                              roundtrip_tol: float = 1e-8) -> GcsState:
    """Synthesize the coherent state carrying the given reduced state.

    The expectations define a fictitious Hamiltonian -sum_j <O_j> O_j
    whose unique coherent ground state reproduces them; diagonalizing it
    with the generalized Jacobi sweep yields the preparing rotation.
    Inputs whose squared length falls short of the coherent level are
    rejected: they do not describe a coherent (maximal-purity) state.
    """
    x = np.asarray(expectations, dtype=float)
    if x.shape != (spec.dim,):
        raise ValueError("need one expectation per basis element")
    level = coherent_purity_level(spec, weights)
    if abs(float(x @ x) - level) > purity_tol * max(level, 1.0):
        raise ValueError(
            f"expectation vector has squared length {float(x @ x):.12g}, "
            f"coherent states of this irrep sit at {level:.12g}; "
            "input is not a coherent state")
    # squared ladder distance 1e-16 leaves coefficient residues ~1e-8,
    # comfortably inside the round-trip contract
    res = diagonalize(spec, AlgebraElement(spec, -x), eps=1e-16)
    state = GcsState(spec, res.u.dagger(), weights)
    back = all_expectations(state)
    err = np.abs(back - x).max()
    if err > roundtrip_tol * max(1.0, np.abs(x).max()):
        raise ValueError(f"synthesis round-trip error {err:.2e} exceeds "
                         f"{roundtrip_tol:.0e}")
    return state


# ---------------------------------------------------------------------------
# Relative purity
# ---------------------------------------------------------------------------

def h_purity(expectations: np.ndarray, normalization: float) -> float:
    """K * sum_j <O_j>^2 over an orthogonal observable set.

    The normalization K depends on the observable set and its scaling;
    use `purity_normalization` for the documented presets.
    """
    x = np.asarray(expectations, dtype=float)
    return float(normalization * np.sum(x ** 2))


def purity_normalization(preset: str, n: int | None = None) -> float:
    """Normalization constants K for common observable sets.

    two_qubit_local  raw Pauli operators on two qubits        K = 1/2
    nqubit_local     raw Pauli operators on n qubits          K = 1/n
    spin1_local      Gell-Mann basis per spin-1 site          K = 3/4
    uN               fermion bilinear basis on n modes        K = 2/n
    collective_spin  single spin-n/2 angular momentum         K = 4/n^2
    """
    if preset == "two_qubit_local":
        return 0.5
    if preset == "spin1_local":
        return 0.75
    if preset in ("nqubit_local", "uN", "collective_spin"):
        if n is None:
            raise ValueError(f"preset {preset!r} needs the system size n")
        return {"nqubit_local": 1.0 / n,
                "uN": 2.0 / n,
                "collective_spin": 4.0 / n ** 2}[preset]
    raise ValueError(f"unknown preset {preset!r}")
