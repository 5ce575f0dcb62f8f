"""Finite compact Lie-algebra infrastructure.

An `AlgebraSpec` bundles an orthonormal Hermitian operator basis (as
matrices of a faithful representation), real structure constants, and a
Cartan-Weyl decomposition: commuting diagonal generators, raising and
lowering operators, roots, and the highest weight of the stored
representation.  Everything downstream (mean-field diagonalization,
coherent-state expectations, purities) consumes this one object.

Stored roots are positive in the lexicographic sense: the first non-zero
component of every root vector is positive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "AlgebraSpec",
    "CartanWeyl",
    "GroupElement",
    "expm",
    "expm_error_bound",
    "adjoint_rep",
    "killing_orthonormalize",
    "adjoint_action",
    "weight_of",
    "structure_constants",
    "is_irreducible",
    "validate_spec",
    "su2_spin",
    "su3_gellmann",
    "suN",
    "uN",
    "so2N_fock",
    "fock_annihilators",
    "spec_to_json",
    "spec_from_json",
]


# ---------------------------------------------------------------------------
# Matrix exponential: diagonal Pade approximant with scaling and squaring
# ---------------------------------------------------------------------------

def _pade_coefficients(q: int) -> np.ndarray:
    c = np.empty(q + 1)
    for j in range(q + 1):
        c[j] = (math.factorial(2 * q - j) * math.factorial(q)
                / (math.factorial(2 * q) * math.factorial(j) * math.factorial(q - j)))
    return c


def expm_error_bound(scaled_norm: float, q: int) -> float:
    """Backward-error bound |E|/|A| of the squared R_qq approximant.

    Valid for scaled_norm = |A|/2^s <= 1/2.
    """
    return (8.0 * scaled_norm ** (2 * q) * math.factorial(q) ** 2
            / (math.factorial(2 * q) * math.factorial(2 * q + 1)))


def expm(a: np.ndarray, q: int = 6, tol: float | None = None) -> np.ndarray:
    """exp(a) by scaling and squaring with the diagonal Pade approximant R_qq.

    The scaling power s is the smallest integer with ``|a|/2^s <= 1/2``
    (spectral norm).  With the default q = 6 the backward-error bound is
    below 4e-16, comfortably inside every tolerance used in this package;
    a larger q is selected automatically only if `tol` demands it.
    """
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    norm = float(np.linalg.norm(a, 2))
    if norm == 0.0:
        return np.eye(a.shape[0], dtype=complex)
    s = max(0, int(np.ceil(np.log2(norm) + 1)))
    x = norm / 2 ** s
    if tol is not None:
        while expm_error_bound(x, q) > tol and q < 13:
            q += 1
        if expm_error_bound(x, q) > tol:
            raise ValueError(f"cannot reach tol={tol} with q<=13")
    b = a / 2 ** s
    c = _pade_coefficients(q)
    npow = np.eye(a.shape[0], dtype=complex)
    num = c[0] * npow
    den = c[0] * npow
    sign = 1.0
    for j in range(1, q + 1):
        npow = npow @ b
        sign = -sign
        num = num + c[j] * npow
        den = den + c[j] * sign * npow
    r = np.linalg.solve(den, num)
    for _ in range(s):
        r = r @ r
    return r


# ---------------------------------------------------------------------------
# Algebra specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CartanWeyl:
    """Cartan-Weyl data relative to the orthonormal basis of an AlgebraSpec.

    csa_indices: 0-based positions of the commuting generators.
    raising_coeffs: (l, M) complex; row j expands E_j over the basis.
    roots: (l, r) real, all lexicographically positive.
    """

    csa_indices: tuple[int, ...]
    raising_coeffs: np.ndarray
    roots: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.csa_indices)

    @property
    def n_roots(self) -> int:
        return self.roots.shape[0]


@dataclass(frozen=True)
class AlgebraSpec:
    """A compact Lie algebra with an orthonormal matrix representation.

    rep[m] is the p x p Hermitian matrix of basis element m, normalized so
    Tr[rep[i] rep[j]] = delta_ij.  `f` holds the real structure constants
    of [O_i, O_j] = i sum_k f[i, j, k] O_k.  `highest_weight` and
    `hw_vector` describe the highest-weight state of the stored
    representation.
    """

    name: str
    labels: tuple[str, ...]
    f: np.ndarray
    rep: np.ndarray
    cw: CartanWeyl
    highest_weight: np.ndarray
    hw_vector: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def rep_dim(self) -> int:
        return self.rep.shape[1]

    def csa_matrices(self) -> np.ndarray:
        """(r, p, p) stack of the commuting generators."""
        return self.rep[list(self.cw.csa_indices)]

    def raising_matrices(self) -> np.ndarray:
        """(l, p, p) stack of raising operators E_j."""
        if "raise" not in self._cache:
            self._cache["raise"] = np.einsum(
                "jm,mab->jab", self.cw.raising_coeffs, self.rep)
        return self._cache["raise"]

    def element(self, coeffs: np.ndarray) -> np.ndarray:
        """Matrix of sum_m coeffs[m] O_m."""
        return np.einsum("m,mab->ab", np.asarray(coeffs), self.rep)

    def project(self, mat: np.ndarray) -> np.ndarray:
        """Coefficient vector of a matrix in the orthonormal basis."""
        return np.einsum("mab,ba->m", self.rep, mat)

    def root_index(self, vec: np.ndarray) -> tuple[int, int] | None:
        """Match a vector against +-roots; returns (index, sign) or None."""
        key = tuple(np.round(np.asarray(vec, dtype=float), 8))
        table = self._cache.setdefault("root_table", {})
        if not table:
            for j, alpha in enumerate(self.cw.roots):
                table[tuple(np.round(alpha, 8))] = (j, +1)
                table[tuple(np.round(-alpha, 8))] = (j, -1)
        return table.get(key)

    def root_addition_constants(self) -> dict:
        """N-coefficients of [E_b, E_{-a}] = N * E_{b-a} for b != a.

        Keys are (b, a); values are (kind, index, N) with kind '+' when
        b - a is a positive root, '-' when it is the negative of root
        `index`, and None when b - a is not a root (N = 0).
        """
        if "ntable" in self._cache:
            return self._cache["ntable"]
        e = self.raising_matrices()
        table: dict[tuple[int, int], tuple[str | None, int, complex]] = {}
        l = self.cw.n_roots
        for b in range(l):
            for a in range(l):
                if a == b:
                    continue
                diff = self.cw.roots[b] - self.cw.roots[a]
                hit = self.root_index(diff)
                if hit is None:
                    table[(b, a)] = (None, -1, 0.0)
                    continue
                idx, sign = hit
                comm = e[b] @ e[a].conj().T - e[a].conj().T @ e[b]
                target = e[idx] if sign > 0 else e[idx].conj().T
                n = complex(np.einsum("ab,ba->", comm, target.conj().T))
                table[(b, a)] = ("+" if sign > 0 else "-", idx, n)
        self._cache["ntable"] = table
        return table


def is_irreducible(spec: AlgebraSpec, tol: float = 1e-8) -> bool:
    """Whether the stored representation acts irreducibly.

    Checked through the commutant: the action is irreducible exactly when
    the only matrices commuting with every basis element are multiples of
    the identity.  The result is cached on the spec.
    """
    if "irreducible" in spec._cache:
        return spec._cache["irreducible"]
    p = spec.rep_dim
    eye = np.eye(p)
    rows = []
    for o in spec.rep:
        rows.append(np.kron(o, eye) - np.kron(eye, o.T))
    stacked = np.concatenate(rows, axis=0)
    svals = np.linalg.svd(stacked, compute_uv=False)
    commutant_dim = int(np.sum(svals < tol * max(svals.max(), 1.0)))
    spec._cache["irreducible"] = commutant_dim == 1
    return spec._cache["irreducible"]


def structure_constants(rep: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Real structure constants from a trace-orthonormal Hermitian rep."""
    comm = np.einsum("iab,jbc->ijac", rep, rep)
    comm = comm - np.transpose(comm, (1, 0, 2, 3))
    f = np.einsum("ijab,kba->ijk", -1j * comm, rep)
    if np.abs(f.imag).max() > tol:
        raise ValueError("structure constants are not real; basis not Hermitian "
                         "or representation not closed")
    return f.real


def adjoint_rep(spec: AlgebraSpec) -> np.ndarray:
    """(M, M, M) stack: adjoint matrix of O_j has entries -i f[j, j', k]."""
    _jacobi_check(spec.f)
    return -1j * spec.f


def _jacobi_check(f: np.ndarray, tol: float = 1e-10) -> None:
    # sum over cyclic [[i,j],k] using f twice
    t = np.einsum("ijm,mkn->ijkn", f, f)
    jac = t + np.einsum("jkm,min->ijkn", f, f) + np.einsum("kim,mjn->ijkn", f, f)
    if np.abs(jac).max() > tol * max(1.0, np.abs(f).max() ** 2):
        raise ValueError("structure constants violate the Jacobi identity")


def killing_orthonormalize(spec: AlgebraSpec, form: str = "auto") -> AlgebraSpec:
    """Rescale/rotate the basis so the chosen bilinear form is the identity.

    form='killing' uses the trace form of the adjoint representation
    (rejects non-semi-simple algebras, whose Killing form is degenerate);
    form='rep' uses the trace form of the stored representation; 'auto'
    prefers the stored representation when present.

    The abstract raising operators are unchanged; their coefficient
    expansion and the roots (defined by [h_k, E_j] = alpha_j^k E_j) are
    re-derived in the new basis.  Every engine in this package assumes
    the 'rep' normalization; 'killing' output is an analysis view.
    """
    if form == "auto":
        form = "rep" if spec.rep is not None else "killing"
    if form == "killing":
        adj = adjoint_rep(spec)
        gram = np.einsum("iab,jba->ij", adj, adj).real
    elif form == "rep":
        gram = np.einsum("iab,jba->ij", spec.rep, spec.rep).real
    else:
        raise ValueError(f"unknown form {form!r}")
    evals = np.linalg.eigvalsh(gram)
    if evals.min() < 1e-10 * max(1.0, evals.max()):
        raise ValueError("bilinear form is degenerate; algebra is not "
                         "semi-simple (or basis is linearly dependent)")
    if np.allclose(gram, np.eye(spec.dim), atol=1e-12):
        return spec
    w, v = np.linalg.eigh(gram)
    s = v @ np.diag(w ** -0.5) @ v.T  # symmetric inverse square root
    s_inv = v @ np.diag(w ** 0.5) @ v.T
    rep = np.einsum("ij,jab->iab", s, spec.rep)
    f = np.einsum("ai,bj,ijk,kc->abc", s, s, spec.f, s_inv)
    raising = spec.cw.raising_coeffs @ s_inv  # s_inv symmetric
    e_mats = np.einsum("jm,mab->jab", raising, rep)
    h_mats = rep[list(spec.cw.csa_indices)]
    l, r = e_mats.shape[0], len(spec.cw.csa_indices)
    roots = np.empty((l, r))
    for j in range(l):
        nrm = np.real(np.einsum("ab,ab->", e_mats[j], e_mats[j].conj()))
        for k in range(r):
            comm = h_mats[k] @ e_mats[j] - e_mats[j] @ h_mats[k]
            roots[j, k] = np.real(
                np.einsum("ab,ba->", comm, e_mats[j].conj().T)) / nrm
    cw = CartanWeyl(spec.cw.csa_indices, raising, roots)
    if spec.hw_vector is not None:
        hw = np.array([np.real(np.vdot(spec.hw_vector, h @ spec.hw_vector))
                       for h in h_mats])
    else:
        csa = list(spec.cw.csa_indices)
        hw = s[np.ix_(csa, csa)] @ spec.highest_weight
    return replace(spec, f=f, rep=rep, cw=cw, highest_weight=hw, _cache={})


def adjoint_action(spec: AlgebraSpec, u: "np.ndarray | GroupElement") -> np.ndarray:
    """Coefficient matrix nu with U^dag O_j U = sum_k nu[j, k] O_k.

    nu is real orthogonal for unitary U (group invariance of the trace
    form); the imaginary residue is checked and discarded.
    """
    umat = u.matrix if isinstance(u, GroupElement) else np.asarray(u)
    rotated = np.einsum("ab,mbc,cd->mad", umat.conj().T, spec.rep, umat)
    nu = np.einsum("mab,kba->mk", rotated, spec.rep)
    if np.abs(nu.imag).max() > 1e-9:
        raise ValueError("adjoint action left the real span; U is not a "
                         "group element of this algebra")
    return nu.real


def weight_of(spec: AlgebraSpec, descent: dict[int, int] | None = None) -> np.ndarray:
    """Weight of the state reached from the highest weight by lowering.

    descent maps root index -> how many times E_{-alpha_j} was applied.
    """
    e = spec.highest_weight.astype(float).copy()
    if descent:
        for j, n in descent.items():
            e -= n * spec.cw.roots[j]
    return e


@dataclass
class GroupElement:
    """U = exp(i sum_j zeta_j O_j) with its representation matrix cached."""

    spec: AlgebraSpec
    matrix: np.ndarray
    zeta: np.ndarray | None = None

    @staticmethod
    def from_zeta(spec: AlgebraSpec, zeta: np.ndarray) -> "GroupElement":
        zeta = np.asarray(zeta, dtype=float)
        if zeta.shape != (spec.dim,):
            raise ValueError("zeta must have one entry per basis element")
        mat = expm(1j * spec.element(zeta))
        return GroupElement(spec, mat, zeta)

    @staticmethod
    def identity(spec: AlgebraSpec) -> "GroupElement":
        return GroupElement(spec, np.eye(spec.rep_dim, dtype=complex),
                            np.zeros(spec.dim))

    def extract_zeta(self) -> np.ndarray:
        """Principal-branch coefficients; reproduces U up to a global phase."""
        w, v = np.linalg.eig(self.matrix)
        log = v @ np.diag(np.log(w)) @ np.linalg.inv(v)
        h = -1j * log
        h = 0.5 * (h + h.conj().T)
        return spec_project_real(self.spec, h)

    def dagger(self) -> "GroupElement":
        return GroupElement(self.spec, self.matrix.conj().T,
                            None if self.zeta is None else -self.zeta)


def spec_project_real(spec: AlgebraSpec, mat: np.ndarray) -> np.ndarray:
    c = spec.project(mat)
    return c.real


# ---------------------------------------------------------------------------
# Built-in algebras
# ---------------------------------------------------------------------------


def _cw_from_matrices(rep: np.ndarray, csa_indices: list[int],
                      raising_mats: np.ndarray) -> CartanWeyl:
    raising = np.einsum("jab,mba->jm", raising_mats, rep)
    csa = rep[csa_indices]
    l = raising_mats.shape[0]
    roots = np.empty((l, len(csa_indices)))
    for j in range(l):
        for k, h in enumerate(csa):
            comm = h @ raising_mats[j] - raising_mats[j] @ h
            roots[j, k] = np.real(
                np.einsum("ab,ba->", comm, raising_mats[j].conj().T))
    return CartanWeyl(tuple(csa_indices), raising, roots)


def su2_spin(s: float) -> AlgebraSpec:
    """su(2) in the spin-s irreducible representation (dimension 2s+1)."""
    twos = int(round(2 * s))
    if twos < 1 or abs(2 * s - twos) > 1e-12:
        raise ValueError("s must be a positive half-integer")
    if s > 50:
        raise ValueError("spin representations are capped at s = 50")
    d = twos + 1
    m = s - np.arange(d)  # weights s, s-1, ..., -s
    jz = np.diag(m).astype(complex)
    jp = np.zeros((d, d), dtype=complex)
    for i in range(1, d):
        jp[i - 1, i] = np.sqrt(s * (s + 1) - m[i] * (m[i] + 1))
    jm = jp.conj().T
    jx, jy = 0.5 * (jp + jm), -0.5j * (jp - jm)
    scale = np.sqrt(s * (s + 1) * d / 3.0)  # Tr Jz^2 = s(s+1)(2s+1)/3
    rep = np.stack([jx, jy, jz]) / scale
    raising = (jp / (np.sqrt(2) * scale))[None, :, :]
    cw = _cw_from_matrices(rep, [2], raising)
    hw_vec = np.zeros(d, dtype=complex)
    hw_vec[0] = 1.0
    return AlgebraSpec(
        name=f"su2_spin_{s:g}",
        labels=("Jx", "Jy", "Jz"),
        f=structure_constants(rep),
        rep=rep,
        cw=cw,
        highest_weight=np.array([s / scale]),
        hw_vector=hw_vec,
    )


def _unit_matrix(i: int, j: int, n: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


def _gl_basis(n: int, traceless: bool) -> tuple[np.ndarray, list[int], list[str]]:
    """Orthonormal Hermitian basis of u(n) or su(n) in the defining rep.

    Diagonal generators come first (they form the CSA), then the
    symmetric and antisymmetric off-diagonal pairs.
    """
    mats: list[np.ndarray] = []
    labels: list[str] = []
    if traceless:
        for k in range(1, n):
            d = np.zeros(n)
            d[:k] = 1.0
            d[k] = -k
            mats.append(np.diag(d).astype(complex) / np.sqrt(k * (k + 1)))
            labels.append(f"H{k}")
    else:
        for k in range(n):
            mats.append(_unit_matrix(k, k, n))
            labels.append(f"N{k + 1}")
    csa = list(range(len(mats)))
    for i in range(n):
        for j in range(i + 1, n):
            t_ij, t_ji = _unit_matrix(i, j, n), _unit_matrix(j, i, n)
            mats.append((t_ij + t_ji) / np.sqrt(2))
            labels.append(f"X{i + 1}{j + 1}")
            mats.append(1j * (t_ji - t_ij) / np.sqrt(2))
            labels.append(f"Y{i + 1}{j + 1}")
    return np.stack(mats), csa, labels


def _lex_positive(v: np.ndarray, tol: float = 1e-12) -> bool:
    for x in v:
        if x > tol:
            return True
        if x < -tol:
            return False
    return False


def _gl_spec(n: int, traceless: bool) -> AlgebraSpec:
    rep, csa, labels = _gl_basis(n, traceless)
    csa_mats = rep[csa]
    raising = []
    for i in range(n):
        for j in range(i + 1, n):
            e = _unit_matrix(i, j, n)
            alpha = np.array([np.real(h[i, i] - h[j, j]) for h in csa_mats])
            raising.append(e if _lex_positive(alpha) else e.conj().T)
    cw = _cw_from_matrices(rep, csa, np.stack(raising))
    hw_vec = np.zeros(n, dtype=complex)
    hw_vec[0] = 1.0
    hw = np.array([np.real(h[0, 0]) for h in csa_mats])
    return AlgebraSpec(
        name=("su" if traceless else "u") + str(n),
        labels=tuple(labels),
        f=structure_constants(rep),
        rep=rep,
        cw=cw,
        highest_weight=hw,
        hw_vector=hw_vec,
    )


def suN(n: int) -> AlgebraSpec:
    """su(n) in the defining representation, dimension n^2 - 1."""
    if n < 2:
        raise ValueError("n >= 2 required")
    return _gl_spec(n, traceless=True)


def uN(n: int) -> AlgebraSpec:
    """u(n) realized by number-conserving fermion bilinears (defining rep)."""
    if n < 1:
        raise ValueError("n >= 1 required")
    return _gl_spec(n, traceless=False)


def su3_gellmann() -> AlgebraSpec:
    """su(3) with the conventionally ordered Gell-Mann basis."""
    s2, s6 = 1 / np.sqrt(2), 1 / np.sqrt(6)
    lam = np.array([
        s2 * np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex),
        s2 * np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]], dtype=complex),
        s2 * np.array([[1, 0, 0], [0, -1, 0], [0, 0, 0]], dtype=complex),
        s2 * np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=complex),
        s2 * np.array([[0, 0, -1j], [0, 0, 0], [1j, 0, 0]], dtype=complex),
        s2 * np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex),
        s2 * np.array([[0, 0, 0], [0, 0, -1j], [0, 1j, 0]], dtype=complex),
        s6 * np.array([[1, 0, 0], [0, 1, 0], [0, 0, -2]], dtype=complex),
    ])
    raising = np.stack([
        _unit_matrix(0, 1, 3),  # root (sqrt2, 0)
        _unit_matrix(0, 2, 3),  # root (1/sqrt2, sqrt(3/2))
        _unit_matrix(2, 1, 3),  # root (1/sqrt2, -sqrt(3/2))
    ])
    cw = _cw_from_matrices(lam, [2, 7], raising)
    hw_vec = np.array([1.0, 0.0, 0.0], dtype=complex)
    return AlgebraSpec(
        name="su3",
        labels=tuple(f"lambda{i}" for i in range(1, 9)),
        f=structure_constants(lam),
        rep=lam,
        cw=cw,
        highest_weight=np.array([s2, s6]),
        hw_vector=hw_vec,
    )


# -- fermionic Fock-space machinery -----------------------------------------

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def fock_annihilators(n_modes: int) -> list[np.ndarray]:
    """Dense annihilation operators on the 2^n Fock space.

    Occupied mode <-> qubit state |0>, mode j on qubit j (qubit 1 = MSB),
    with the standard string convention of `liesim.opalgebra`.
    """
    sm = 0.5 * (_SX - 1j * _SY)
    ops = []
    for j in range(1, n_modes + 1):
        mats = [-_SZ] * (j - 1) + [sm] + [np.eye(2, dtype=complex)] * (n_modes - j)
        m = mats[0]
        for x in mats[1:]:
            m = np.kron(m, x)
        ops.append(m)
    return ops


def so2N_fock(n_modes: int) -> AlgebraSpec:
    """so(2n) of all fermion bilinears, on the even-parity Fock sector.

    The even sector carries an irreducible (half-spinor) action, which is
    what the coherent-state machinery requires; the full Fock space would
    be reducible.
    """
    if not 2 <= n_modes <= 6:
        raise ValueError("so2N_fock supports 2..6 modes")
    c = fock_annihilators(n_modes)
    parity = _parity_indices(n_modes, even=True)
    pick = np.ix_(parity, parity)

    mats, labels = [], []
    for j in range(n_modes):
        mats.append((np.sqrt(2) * (c[j].conj().T @ c[j]
                                   - 0.5 * np.eye(2 ** n_modes)))[pick])
        labels.append(f"D{j + 1}")
    csa = list(range(n_modes))
    raising_mats = []
    for i in range(n_modes):
        for j in range(i + 1, n_modes):
            hop = c[i].conj().T @ c[j]
            mats.append((hop + hop.conj().T)[pick])
            labels.append(f"X{i + 1}{j + 1}")
            mats.append((1j * (hop.conj().T - hop))[pick])
            labels.append(f"Y{i + 1}{j + 1}")
            raising_mats.append(hop[pick])
    for i in range(n_modes):
        for j in range(i + 1, n_modes):
            pair = c[i].conj().T @ c[j].conj().T
            mats.append((pair + pair.conj().T)[pick])
            labels.append(f"P{i + 1}{j + 1}")
            mats.append((1j * (pair.conj().T - pair))[pick])
            labels.append(f"Q{i + 1}{j + 1}")
            raising_mats.append(pair[pick])
    rep = np.stack(mats)
    # common trace normalization on the sector
    norms = np.einsum("iab,iba->i", rep, rep).real
    rep = rep / np.sqrt(norms)[:, None, None]
    raising_stack = np.stack(raising_mats)
    rnorms = np.einsum("jab,jab->j", raising_stack, raising_stack.conj()).real
    raising_stack = raising_stack / np.sqrt(rnorms)[:, None, None]
    cw = _cw_from_matrices(rep, csa, raising_stack)

    n_occ = n_modes if n_modes % 2 == 0 else n_modes - 1
    label = sum(1 << (n_modes - 1 - q) for q in range(n_occ, n_modes))
    hw_full = np.zeros(2 ** n_modes, dtype=complex)
    hw_full[label] = 1.0
    hw_vec = hw_full[parity]
    hmats = rep[csa]
    hw = np.array([np.real(np.vdot(hw_vec, h @ hw_vec)) for h in hmats])
    return AlgebraSpec(
        name=f"so{2 * n_modes}",
        labels=tuple(labels),
        f=structure_constants(rep),
        rep=rep,
        cw=cw,
        highest_weight=hw,
        hw_vector=hw_vec,
    )


def _parity_indices(n_modes: int, even: bool) -> np.ndarray:
    idx = np.arange(2 ** n_modes)
    occupied = n_modes - _popcount(idx)  # |0> is occupied
    return np.where(occupied % 2 == (0 if even else 1))[0]


def _popcount(idx: np.ndarray) -> np.ndarray:
    out = np.zeros_like(idx)
    x = idx.copy()
    while np.any(x):
        out += x & 1
        x >>= 1
    return out


# ---------------------------------------------------------------------------
# Validation & serialization
# ---------------------------------------------------------------------------

def validate_spec(spec: AlgebraSpec, tol: float = 1e-10) -> list[str]:
    """Consistency report; an empty list means the spec passed every check."""
    problems: list[str] = []
    m = spec.dim
    if spec.f.shape != (m, m, m):
        return [f"structure-constant tensor has shape {spec.f.shape}, expected {(m, m, m)}"]
    if np.abs(spec.f + np.transpose(spec.f, (1, 0, 2))).max() > tol:
        problems.append("structure constants are not antisymmetric")
    try:
        _jacobi_check(spec.f, tol)
    except ValueError as exc:
        problems.append(str(exc))
    gram = np.einsum("iab,jba->ij", spec.rep, spec.rep)
    if np.abs(gram - np.eye(m)).max() > 1e-8:
        problems.append("representation basis is not trace-orthonormal")
    comm = np.einsum("iab,jbc->ijac", spec.rep, spec.rep)
    comm = comm - np.transpose(comm, (1, 0, 2, 3))
    target = 1j * np.einsum("ijk,kab->ijab", spec.f, spec.rep)
    if np.abs(comm - target).max() > tol * max(1.0, np.abs(spec.rep).max() ** 2 * m):
        problems.append("representation does not reproduce the structure constants")
    r, l = spec.cw.rank, spec.cw.n_roots
    if r + 2 * l != m:
        problems.append(f"rank + 2 * n_roots = {r + 2 * l} != dim {m}")
    h = spec.csa_matrices()
    for a in range(r):
        for b in range(a + 1, r):
            if np.abs(h[a] @ h[b] - h[b] @ h[a]).max() > tol:
                problems.append(f"CSA elements {a} and {b} do not commute")
    e = spec.raising_matrices()
    for j in range(l):
        alpha = spec.cw.roots[j]
        if not _lex_positive(alpha):
            problems.append(f"root {j} is not lexicographically positive")
        for k in range(r):
            res = h[k] @ e[j] - e[j] @ h[k] - alpha[k] * e[j]
            if np.abs(res).max() > 1e-8:
                problems.append(
                    f"[h_{k}, E_{j}] != alpha^k E_{j}; stored root is inconsistent")
        low = e[j].conj().T
        res = e[j] @ low - low @ e[j] - np.einsum("k,kab->ab", alpha, h)
        if np.abs(res).max() > 1e-8:
            problems.append(
                f"[E_{j}, E_-{j}] does not match the root expansion over the CSA "
                "(normalization mismatch reported, not rescaled)")
    if spec.hw_vector is not None:
        v = spec.hw_vector
        for j in range(l):
            if np.linalg.norm(e[j] @ v) > 1e-8:
                problems.append(f"stored highest-weight vector is not annihilated by E_{j}")
        for k in range(r):
            if np.linalg.norm(h[k] @ v - spec.highest_weight[k] * v) > 1e-8:
                problems.append(f"highest-weight eigenvalue mismatch on h_{k}")
    return problems


_SPEC_KEYS = {"name", "labels", "structure_constants", "csa", "roots",
              "raising", "rep", "highest_weight", "highest_weight_vector"}


def spec_to_json(spec: AlgebraSpec) -> str:
    triples = []
    nz = np.argwhere(np.abs(spec.f) > 1e-14)
    for i, j, k in nz:
        if i < j:  # antisymmetry makes the rest redundant
            triples.append([int(i) + 1, int(j) + 1, int(k) + 1, float(spec.f[i, j, k])])
    payload = {
        "name": spec.name,
        "labels": list(spec.labels),
        "structure_constants": triples,
        "csa": [i + 1 for i in spec.cw.csa_indices],
        "roots": spec.cw.roots.tolist(),
        "raising": [[[float(z.real), float(z.imag)] for z in row]
                    for row in spec.cw.raising_coeffs],
        "rep": [[[ [float(z.real), float(z.imag)] for z in row] for row in mat]
                for mat in spec.rep],
        "highest_weight": spec.highest_weight.tolist(),
    }
    if spec.hw_vector is not None:
        payload["highest_weight_vector"] = [[float(z.real), float(z.imag)]
                                            for z in spec.hw_vector]
    return json.dumps(payload, indent=1)


def spec_from_json(text: str) -> AlgebraSpec:
    """Load and strictly validate an algebra file; raises on any violation."""
    payload = json.loads(text)
    unknown = set(payload) - _SPEC_KEYS
    if unknown:
        raise ValueError(f"unknown keys in algebra file: {sorted(unknown)}")
    missing = {"name", "labels", "structure_constants", "csa", "roots",
               "raising", "rep", "highest_weight"} - set(payload)
    if missing:
        raise ValueError(f"algebra file is missing keys: {sorted(missing)}")
    labels = tuple(payload["labels"])
    m = len(labels)
    f = np.zeros((m, m, m))
    for i, j, k, val in payload["structure_constants"]:
        f[i - 1, j - 1, k - 1] = val
        f[j - 1, i - 1, k - 1] = -val
    rep = np.array([[[complex(re, im) for re, im in row] for row in mat]
                    for mat in payload["rep"]])
    raising = np.array([[complex(re, im) for re, im in row]
                        for row in payload["raising"]])
    cw = CartanWeyl(
        csa_indices=tuple(i - 1 for i in payload["csa"]),
        raising_coeffs=raising,
        roots=np.array(payload["roots"], dtype=float),
    )
    hw_vector = None
    if "highest_weight_vector" in payload:
        hw_vector = np.array([complex(re, im)
                              for re, im in payload["highest_weight_vector"]])
    spec = AlgebraSpec(
        name=str(payload["name"]),
        labels=labels,
        f=f,
        rep=rep,
        cw=cw,
        highest_weight=np.array(payload["highest_weight"], dtype=float),
        hw_vector=hw_vector,
    )
    problems = validate_spec(spec)
    if problems:
        raise ValueError("algebra file failed validation:\n- " + "\n- ".join(problems))
    return spec
