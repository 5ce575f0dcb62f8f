"""Symbolic operator layer: Pauli sums, fermionic and bosonic expressions,
and the isomorphic encodings that map them onto qubit (Pauli) operators.

Conventions
-----------
Qubit and mode labels are 1-based throughout, and qubit 1 is the most
significant bit of the register (see `liesim.statevector`).  A fermionic
mode being *occupied* corresponds to the qubit state ``|0>``, the vacuum
maps to ``|11...1>``, and annihilation operators carry a ``(-Z)`` string
on every qubit before their target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

__all__ = [
    "PauliTerm",
    "PauliSum",
    "FermionExpr",
    "BosonEncoding",
    "jordan_wigner",
    "anyon_site_operator",
    "anyon_map",
    "boson_map",
    "boson_number_map",
    "truncated_boson_matrix",
    "mode_reindex_2d",
    "pauli_mul",
    "pauli_add",
    "pauli_commutator",
]

COEFF_PRUNE = 1e-14  # like terms below this magnitude are dropped

_AXES = ("X", "Y", "Z")

# single-qubit products: (a, b) -> (phase, result axis or None for identity)
_PAULI_TABLE = {
    ("X", "X"): (1.0, None),
    ("Y", "Y"): (1.0, None),
    ("Z", "Z"): (1.0, None),
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}


@dataclass(frozen=True)
class PauliTerm:
    """One weighted Pauli string: ``coefficient * prod_q sigma_axis^q``.

    `factors` maps 1-based qubit index to an axis in {X, Y, Z}; identity
    factors are never stored.
    """

    coefficient: complex
    factors: tuple[tuple[int, str], ...]  # sorted by qubit index

    @staticmethod
    def from_map(coefficient: complex, factors: Mapping[int, str]) -> "PauliTerm":
        items = []
        for q, ax in sorted(factors.items()):
            if q < 1:
                raise ValueError(f"qubit index must be >= 1, got {q}")
            if ax not in _AXES:
                raise ValueError(f"unknown Pauli axis {ax!r}")
            items.append((int(q), ax))
        return PauliTerm(complex(coefficient), tuple(items))

    @staticmethod
    def identity(coefficient: complex = 1.0) -> "PauliTerm":
        return PauliTerm(complex(coefficient), ())

    @property
    def label(self) -> str:
        if not self.factors:
            return "I"
        return " ".join(f"{ax}{q}" for q, ax in self.factors)

    def max_qubit(self) -> int:
        return self.factors[-1][0] if self.factors else 0

    def weight(self) -> int:
        """Number of non-identity factors."""
        return len(self.factors)

    def dagger(self) -> "PauliTerm":
        return PauliTerm(np.conj(self.coefficient), self.factors)

    def __mul__(self, other: "PauliTerm") -> "PauliTerm":
        if not isinstance(other, PauliTerm):
            return NotImplemented
        coeff = self.coefficient * other.coefficient
        out: dict[int, str] = dict(self.factors)
        for q, ax in other.factors:
            if q not in out:
                out[q] = ax
                continue
            phase, res = _PAULI_TABLE[(out[q], ax)]
            coeff *= phase
            if res is None:
                del out[q]
            else:
                out[q] = res
        return PauliTerm.from_map(coeff, out)

    def commutes_with(self, other: "PauliTerm") -> bool:
        """Pauli strings commute iff they anticommute on an even number of qubits."""
        mine = dict(self.factors)
        clashes = sum(
            1 for q, ax in other.factors if q in mine and mine[q] != ax
        )
        return clashes % 2 == 0


class PauliSum:
    """A sum of Pauli strings with like terms merged.

    Internally a dict from factor tuples to complex coefficients.  All
    algebraic operations return new sums; instances are mutated only via
    `add_term`.
    """

    def __init__(self, terms: Iterable[PauliTerm] = ()):  # noqa: D401
        self._terms: dict[tuple[tuple[int, str], ...], complex] = {}
        for t in terms:
            self.add_term(t)

    # -- construction -----------------------------------------------------

    @staticmethod
    def zero() -> "PauliSum":
        return PauliSum()

    @staticmethod
    def identity(coefficient: complex = 1.0) -> "PauliSum":
        return PauliSum([PauliTerm.identity(coefficient)])

    @staticmethod
    def from_term(coefficient: complex, factors: Mapping[int, str]) -> "PauliSum":
        return PauliSum([PauliTerm.from_map(coefficient, factors)])

    def add_term(self, term: PauliTerm) -> None:
        c = self._terms.get(term.factors, 0.0) + term.coefficient
        if abs(c) <= COEFF_PRUNE:
            self._terms.pop(term.factors, None)
        else:
            self._terms[term.factors] = c

    # -- views ------------------------------------------------------------

    def terms(self) -> Iterator[PauliTerm]:
        for factors, coeff in sorted(self._terms.items()):
            yield PauliTerm(coeff, factors)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[PauliTerm]:
        return self.terms()

    def coefficient(self, factors: Mapping[int, str] | tuple) -> complex:
        if isinstance(factors, Mapping):
            factors = tuple(sorted(factors.items()))
        return self._terms.get(tuple(factors), 0.0)

    def max_qubit(self) -> int:
        return max((f[-1][0] for f in self._terms if f), default=0)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    # -- algebra ----------------------------------------------------------

    def __add__(self, other: "PauliSum") -> "PauliSum":
        out = PauliSum(self.terms())
        for t in other.terms():
            out.add_term(t)
        return out

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (other * (-1.0))

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            out = PauliSum()
            for a in self.terms():
                for b in other.terms():
                    out.add_term(a * b)
            return out
        out = PauliSum()
        for t in self.terms():
            out.add_term(PauliTerm(t.coefficient * other, t.factors))
        return out

    __rmul__ = __mul__

    def dagger(self) -> "PauliSum":
        return PauliSum(t.dagger() for t in self.terms())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        keys = set(self._terms) | set(other._terms)
        return all(
            abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= 1e-12
            for k in keys
        )

    def __repr__(self) -> str:
        parts = [f"({t.coefficient:+.6g})*{t.label}" for t in self.terms()]
        return " + ".join(parts) if parts else "0"

    # -- text serialization -------------------------------------------------

    def to_text(self) -> str:
        """One term per line: ``coeff_re coeff_im label``; round-trip exact."""
        lines = []
        for t in self.terms():
            lines.append(f"{t.coefficient.real!r} {t.coefficient.imag!r} {t.label}")
        return "\n".join(lines) + ("\n" if lines else "")

    @staticmethod
    def from_text(text: str) -> "PauliSum":
        out = PauliSum()
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            re_s, im_s, *label = line.split()
            factors: dict[int, str] = {}
            if label != ["I"]:
                for tok in label:
                    ax, q = tok[0], int(tok[1:])
                    if ax not in _AXES:
                        raise ValueError(f"bad factor token {tok!r}")
                    if q in factors:
                        raise ValueError(f"duplicate qubit {q} in {line!r}")
                    factors[q] = ax
            out.add_term(PauliTerm.from_map(complex(float(re_s), float(im_s)), factors))
        return out


def pauli_mul(a: PauliSum, b: PauliSum) -> PauliSum:
    return a * b


def pauli_add(a: PauliSum, b: PauliSum) -> PauliSum:
    return a + b


def pauli_commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    return a * b - b * a


# ---------------------------------------------------------------------------
# Fermions
# ---------------------------------------------------------------------------

# a monomial is a tuple of (mode, is_creation) applied right-to-left as written
_Monomial = tuple[tuple[int, bool], ...]


class FermionExpr:
    """Polynomial in fermionic creation/annihilation operators.

    Stored normal ordered: creation operators first (modes ascending),
    then annihilation operators (modes descending).  Reordering applies
    the canonical anticommutation relations, so round-tripping any
    operator ordering reproduces the same expression.
    """

    def __init__(self, terms: Mapping[_Monomial, complex] | None = None):
        self._terms: dict[_Monomial, complex] = {}
        if terms:
            for mono, c in terms.items():
                self._add_raw(tuple(mono), complex(c))

    # construction helpers

    @staticmethod
    def zero() -> "FermionExpr":
        return FermionExpr()

    @staticmethod
    def one(coefficient: complex = 1.0) -> "FermionExpr":
        e = FermionExpr()
        e._terms[()] = complex(coefficient)
        return e

    @staticmethod
    def creation(mode: int) -> "FermionExpr":
        return FermionExpr({((int(mode), True),): 1.0})

    @staticmethod
    def annihilation(mode: int) -> "FermionExpr":
        return FermionExpr({((int(mode), False),): 1.0})

    @staticmethod
    def number(mode: int) -> "FermionExpr":
        return FermionExpr.creation(mode) * FermionExpr.annihilation(mode)

    @staticmethod
    def hopping(i: int, j: int, amplitude: complex = 1.0) -> "FermionExpr":
        """``amplitude * c_i^dag c_j + h.c.``"""
        t = FermionExpr.creation(i) * FermionExpr.annihilation(j)
        return amplitude * t + np.conj(amplitude) * t.dagger()

    def _add_raw(self, mono: _Monomial, coeff: complex) -> None:
        for m, c in _normal_order(mono, coeff):
            new = self._terms.get(m, 0.0) + c
            if abs(new) <= COEFF_PRUNE:
                self._terms.pop(m, None)
            else:
                self._terms[m] = new

    def terms(self) -> Iterator[tuple[_Monomial, complex]]:
        yield from sorted(self._terms.items())

    def modes(self) -> set[int]:
        return {m for mono in self._terms for m, _ in mono}

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: "FermionExpr") -> "FermionExpr":
        out = FermionExpr(dict(self._terms))
        for mono, c in other._terms.items():
            out._add_raw(mono, c)
        return out

    def __sub__(self, other: "FermionExpr") -> "FermionExpr":
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, FermionExpr):
            out = FermionExpr()
            for m1, c1 in self._terms.items():
                for m2, c2 in other._terms.items():
                    out._add_raw(m1 + m2, c1 * c2)
            return out
        out = FermionExpr()
        for mono, c in self._terms.items():
            out._terms[mono] = c * complex(other)
        return out

    __rmul__ = __mul__

    def dagger(self) -> "FermionExpr":
        out = FermionExpr()
        for mono, c in self._terms.items():
            rev = tuple((m, not dag) for m, dag in reversed(mono))
            out._add_raw(rev, np.conj(c))
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, FermionExpr):
            return NotImplemented
        keys = set(self._terms) | set(other._terms)
        return all(
            abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= 1e-12
            for k in keys
        )

    def __repr__(self) -> str:
        def fmt(mono):
            if not mono:
                return "1"
            return " ".join(f"c{'+' if dag else ''}_{m}" for m, dag in mono)

        return " + ".join(f"({c:+.6g})*{fmt(m)}" for m, c in self.terms()) or "0"


def _normal_order(mono: _Monomial, coeff: complex) -> list[tuple[_Monomial, complex]]:
    """Normal order one monomial; returns the expansion with contraction terms."""
    work = [(list(mono), coeff)]
    done: list[tuple[_Monomial, complex]] = []
    while work:
        ops, c = work.pop()
        swapped = False
        for i in range(len(ops) - 1):
            (m1, d1), (m2, d2) = ops[i], ops[i + 1]
            if d1 == d2:
                if m1 == m2:
                    swapped = True  # c^2 = 0
                    c = 0.0
                    break
                # creation block ascending, annihilation block descending
                wrong = (d1 and m1 > m2) or (not d1 and m1 < m2)
                if wrong:
                    ops[i], ops[i + 1] = ops[i + 1], ops[i]
                    work.append((ops, -c))
                    swapped = True
                    break
            elif not d1 and d2:  # c_i c_j^dag = delta_ij - c_j^dag c_i
                rest = ops[:i] + ops[i + 2:]
                if m1 == m2:
                    work.append((rest, c))
                ops[i], ops[i + 1] = ops[i + 1], ops[i]
                work.append((ops, -c))
                swapped = True
                break
        if not swapped and abs(c) > 0:
            done.append((tuple(ops), c))
        elif not swapped:
            pass
    return done


def jordan_wigner(expr: FermionExpr, n_modes: int) -> PauliSum:
    """Map a fermionic expression onto Pauli operators.

    ``c_j -> (prod_{l<j} -Z_l) sigma-_j`` and its conjugate for creation;
    linear in the number of monomials.
    """
    bad = [m for m in expr.modes() if m > n_modes or m < 1]
    if bad:
        raise ValueError(f"modes {bad} outside 1..{n_modes}")
    out = PauliSum()
    for mono, coeff in expr.terms():
        image = PauliSum.identity(coeff)
        for mode, dag in mono:
            image = image * _jw_single(mode, dag)
        for t in image.terms():
            out.add_term(t)
    return out


def _jw_single(mode: int, dag: bool) -> PauliSum:
    sign = (-1.0) ** (mode - 1)
    string = {l: "Z" for l in range(1, mode)}
    # sigma_pm = (X -+ ... ) / 2 with sigma+ = |0><1|
    sx = PauliSum.from_term(0.5 * sign, {**string, mode: "X"})
    sy = PauliSum.from_term((0.5j if dag else -0.5j) * sign, {**string, mode: "Y"})
    return sx + sy


# ---------------------------------------------------------------------------
# Anyons (dense matrices only; the string prefactors are not Pauli-linear)
# ---------------------------------------------------------------------------

_I2 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_SP = 0.5 * (_SX + 1j * _SY)  # |0><1|
_SM = 0.5 * (_SX - 1j * _SY)


def _kron_chain(mats: list[np.ndarray]) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def anyon_site_operator(kind: str, mode: int, theta: float, n_modes: int) -> np.ndarray:
    """Dense image of one hard-core anyon operator on ``n_modes`` qubits.

    kind is 'create', 'annihilate' or 'number'.  theta = pi gives back the
    fermionic (Jordan-Wigner) operators, theta = 0 hard-core bosons.
    """
    if not 1 <= mode <= n_modes:
        raise ValueError(f"mode {mode} outside 1..{n_modes}")
    if kind == "number":
        mats = [_I2] * n_modes
        mats[mode - 1] = 0.5 * (_I2 + _SZ)
        return _kron_chain(mats)
    if kind == "create":
        phase = np.exp(-1j * theta)
        local = _SP
    elif kind == "annihilate":
        phase = np.exp(1j * theta)
        local = _SM
    else:
        raise ValueError(f"unknown anyon operator kind {kind!r}")
    mats = []
    for l in range(1, n_modes + 1):
        if l < mode:
            mats.append(0.5 * (phase + 1) * _I2 + 0.5 * (phase - 1) * _SZ)
        elif l == mode:
            mats.append(local)
        else:
            mats.append(_I2)
    return _kron_chain(mats)


def anyon_map(monomials: Mapping[tuple[tuple[int, str], ...], complex],
              theta: float, n_modes: int) -> np.ndarray:
    """Dense image of a polynomial in anyon operators.

    Keys are tuples of (mode, kind) applied right to left, e.g.
    ``(((1, 'create'), (2, 'annihilate')),): 1.0`` for a+_1 a_2.
    """
    dim = 2 ** n_modes
    out = np.zeros((dim, dim), dtype=complex)
    for mono, coeff in monomials.items():
        m = np.eye(dim, dtype=complex)
        for mode, kind in mono:
            m = m @ anyon_site_operator(kind, mode, theta, n_modes)
        out += complex(coeff) * m
    return out


# ---------------------------------------------------------------------------
# Bosons: unary (one-cold) encoding with at most n_max bosons per mode
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BosonEncoding:
    """Unary qubit encoding of N bosonic modes truncated at n_max bosons.

    Each mode occupies a block of ``n_max + 1`` qubits; the state with n
    bosons has qubit ``(n, j)`` in |0> and the rest of the block in |1>.
    """

    n_modes: int
    n_max: int

    @property
    def n_qubits(self) -> int:
        return self.n_modes * (self.n_max + 1)

    def qubit(self, n: int, j: int) -> int:
        """1-based register index of block position n (0..n_max) of mode j."""
        if not 0 <= n <= self.n_max:
            raise ValueError(f"block position {n} outside 0..{self.n_max}")
        if not 1 <= j <= self.n_modes:
            raise ValueError(f"mode {j} outside 1..{self.n_modes}")
        return n + (self.n_max + 1) * (j - 1) + 1

    def basis_label(self, occupations: Iterable[int]) -> int:
        """Register basis index (qubit 1 = MSB) of a product occupation state."""
        occ = list(occupations)
        if len(occ) != self.n_modes:
            raise ValueError("need one occupation per mode")
        bits = [1] * self.n_qubits
        for j, n in enumerate(occ, start=1):
            if not 0 <= n <= self.n_max:
                raise ValueError(f"occupation {n} exceeds n_max={self.n_max}")
            bits[self.qubit(n, j) - 1] = 0
        label = 0
        for b in bits:
            label = (label << 1) | b
        return label


def boson_map(enc: BosonEncoding, j: int, dag: bool = True) -> PauliSum:
    """Pauli image of the truncated creation (or annihilation) operator."""
    out = PauliSum()
    for n in range(enc.n_max):
        lo, hi = enc.qubit(n, j), enc.qubit(n + 1, j)
        if dag:
            pair = _sigma_pm(lo, plus=False) * _sigma_pm(hi, plus=True)
        else:
            pair = _sigma_pm(lo, plus=True) * _sigma_pm(hi, plus=False)
        out = out + np.sqrt(n + 1) * pair
    return out


def boson_number_map(enc: BosonEncoding, j: int) -> PauliSum:
    out = PauliSum()
    for n in range(enc.n_max + 1):
        q = enc.qubit(n, j)
        out = out + PauliSum.from_term(0.5 * n, {q: "Z"}) + PauliSum.identity(0.5 * n)
    return out


def _sigma_pm(q: int, plus: bool) -> PauliSum:
    return (PauliSum.from_term(0.5, {q: "X"})
            + PauliSum.from_term(0.5j if plus else -0.5j, {q: "Y"}))


def truncated_boson_matrix(n_max: int, dag: bool = True) -> np.ndarray:
    """(n_max+1)-dimensional creation matrix with sqrt(n+1) on the subdiagonal."""
    m = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for n in range(n_max):
        m[n + 1, n] = np.sqrt(n + 1)
    return m if dag else m.conj().T


def mode_reindex_2d(l: int, m: int, n_x: int, n_y: int) -> int:
    """Linearize lattice site (row l, column m) to mode ``m + (l-1) n_x``."""
    if not 1 <= l <= n_y:
        raise ValueError(f"row {l} outside 1..{n_y}")
    if not 1 <= m <= n_x:
        raise ValueError(f"column {m} outside 1..{n_x}")
    return m + (l - 1) * n_x
