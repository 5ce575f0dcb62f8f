"""Ancilla-based measurement protocols, emulated exactly on a statevector.

The deterministic algorithms here share one template: prepare an ancilla
in |+>, entangle it with the system through controlled unitaries, and
read out <sigma_x + i sigma_y> of the ancilla, which equals the targeted
system correlation function.  The ancilla occupies the last qubit of the
register so system operators keep their 1-based qubit labels.

Controlled exponentials act as exact ancilla-conditioned evolutions on
the two ancilla branches (no gate compilation), which keeps large runs
fast; a compile-to-elementary mode exists for gate-count studies and for
golden-file circuits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .opalgebra import PauliSum, PauliTerm
from .statevector import (StateVector, apply_ising, apply_pauli,
                          apply_pauli_string_exp, apply_rotation, new_register)

__all__ = [
    "Gate",
    "Circuit",
    "HamiltonianSpec",
    "Evolution",
    "PauliGate",
    "CircuitUnitary",
    "paulisum_csr",
    "evolve_exact",
    "apply_circuit",
    "controlled_exponential",
    "compile_controlled_exponential",
    "one_ancilla_correlation",
    "time_correlation",
    "spectrum_series",
    "trotter_evolve",
    "prepare_slater",
    "thouless_rotate",
    "branch_superposition",
    "circuit_to_text",
    "circuit_from_text",
]

MAX_BRANCHES = 64


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    kinds: rx/ry/rz (targets=(q,), angle), zz (targets=(j,k), angle),
    pexp (exp(-i angle/2 P) for the stored Pauli string), gphase (global
    phase exp(-i angle)), evolve (exact exp(-i H t) on the register), and
    cexp (exp(-i H t) applied iff the control qubit is in |polarity>).
    """

    kind: str
    targets: tuple[int, ...] = ()
    angle: float = 0.0
    pauli: PauliTerm | None = None
    hamiltonian: PauliSum | None = None
    time: float = 0.0
    polarity: int = 1


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    ancilla: int | None = None

    def __post_init__(self):
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate) -> None:
        for q in g.targets:
            if not 1 <= q <= self.n_qubits:
                raise ValueError(f"gate target {q} outside register of "
                                 f"{self.n_qubits} qubits")
        if g.pauli is not None and g.pauli.max_qubit() > self.n_qubits:
            raise ValueError("pauli string exceeds the register")
        if self.ancilla is not None and g.kind != "cexp" \
                and self.ancilla in g.targets:
            raise ValueError("system gate touches the ancilla qubit")

    def add(self, gate: Gate) -> "Circuit":
        self._check(gate)
        self.gates.append(gate)
        return self

    def rx(self, q, a):
        return self.add(Gate("rx", (q,), a))

    def ry(self, q, a):
        return self.add(Gate("ry", (q,), a))

    def rz(self, q, a):
        return self.add(Gate("rz", (q,), a))

    def zz(self, j, k, a):
        return self.add(Gate("zz", (j, k), a))

    def pexp(self, pauli: PauliTerm, angle: float):
        return self.add(Gate("pexp", tuple(q for q, _ in pauli.factors),
                             angle, pauli=pauli))


def apply_circuit(state: StateVector, circuit: Circuit,
                  pexp_method: str = "direct") -> StateVector:
    if state.n_qubits != circuit.n_qubits:
        raise ValueError("register size mismatch")
    for g in circuit.gates:
        if g.kind in ("rx", "ry", "rz"):
            apply_rotation(state, g.kind[1], g.targets[0], g.angle)
        elif g.kind == "zz":
            apply_ising(state, g.targets[0], g.targets[1], g.angle)
        elif g.kind == "pexp":
            apply_pauli_string_exp(state, g.pauli, g.angle, method=pexp_method)
        elif g.kind == "gphase":
            state.amplitudes *= np.exp(-1j * g.angle)
        elif g.kind == "evolve":
            evolve_exact(state, g.hamiltonian, g.time)
        elif g.kind == "cexp":
            _apply_conditional_evolution(state, g.hamiltonian, g.time,
                                         g.targets[0], g.polarity)
        else:
            raise ValueError(f"unknown gate kind {g.kind!r}")
    return state


# ---------------------------------------------------------------------------
# Exact evolution by a Pauli-sum Hamiltonian
# ---------------------------------------------------------------------------

def paulisum_csr(h: PauliSum, n: int) -> sp.csr_matrix:
    """Sparse matrix of a Pauli sum; each string is a signed permutation."""
    dim = 2 ** n
    idx = np.arange(dim, dtype=np.int64)
    rows, cols, data = [], [], []
    for term in h.terms():
        perm = idx.copy()
        phase = np.full(dim, term.coefficient, dtype=complex)
        for q, ax in term.factors:
            bit = 1 << (n - q)
            vals = ((idx & bit) != 0)
            if ax == "X":
                perm ^= bit
            elif ax == "Y":
                perm ^= bit
                phase *= np.where(vals, -1j, 1j)
            else:
                phase *= np.where(vals, -1.0, 1.0)
        rows.append(perm)
        cols.append(idx)
        data.append(phase)
    m = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim))
    return m.tocsr()


# cache holds the Hamiltonian itself so its id cannot be recycled by a
# different object while the entry is alive
_CSR_CACHE: dict[tuple[int, int], tuple[PauliSum, sp.csr_matrix]] = {}


def _csr_for(h: PauliSum, n: int) -> sp.csr_matrix:
    key = (id(h), n)
    hit = _CSR_CACHE.get(key)
    if hit is not None and hit[0] is h:
        return hit[1]
    if len(_CSR_CACHE) > 8:
        _CSR_CACHE.clear()
    mat = paulisum_csr(h, n)
    _CSR_CACHE[key] = (h, mat)
    return mat


def evolve_exact(state: StateVector, h: PauliSum, t: float) -> StateVector:
    """psi <- exp(-i H t) psi, matrix free (Krylov-style sparse action)."""
    if not h.is_hermitian():
        raise ValueError("evolution requires a Hermitian Pauli sum")
    if t == 0.0 or len(h) == 0:
        return state
    a = _csr_for(h, state.n_qubits)
    state.amplitudes = expm_multiply(-1j * t * a, state.amplitudes)
    return state


def _apply_conditional_evolution(state: StateVector, h: PauliSum, t: float,
                                 control: int, polarity: int) -> StateVector:
    """Evolve by exp(-i H t) on the branch where `control` is |polarity>.

    This is the exact action of the controlled evolution built from
    half-angle conditioned phases, without compiling gates.
    """
    if h.max_qubit() >= control:
        raise ValueError("the control qubit must come after every system "
                         "qubit the Hamiltonian touches")
    n = state.n_qubits
    left = 2 ** (control - 1)
    right = 2 ** (n - control)
    view = state.amplitudes.reshape(left, 2, right)
    branch = np.ascontiguousarray(view[:, polarity, :]).reshape(-1)
    sub = StateVector(n - 1, branch)
    evolve_exact(sub, h, t)
    view[:, polarity, :] = sub.amplitudes.reshape(left, right)
    return state


def controlled_exponential(h: PauliSum, t: float, control: int,
                           polarity: int = 1) -> Gate:
    """Gate acting as exp(-i H t) on the system iff the control matches."""
    if not h.is_hermitian():
        raise ValueError("controlled exponential requires Hermitian H")
    if polarity not in (0, 1):
        raise ValueError("polarity must be 0 or 1")
    return Gate("cexp", (control,), hamiltonian=h, time=t, polarity=polarity)


def compile_controlled_exponential(spec: "HamiltonianSpec", t: float,
                                   dt: float, control: int, n_qubits: int,
                                   polarity: int = 1) -> Circuit:
    """Controlled evolution as elementary string exponentials.

    Each split-step factor exp(-i theta/2 P) becomes the half-angle pair
    exp(-i theta/4 P) exp(-+i theta/4 P Z_c): on the selected control
    branch the two halves add up, on the other they cancel.  Intended for
    gate-count studies; the default conditional evolution is exact.
    """
    base = trotter_evolve(spec, t, dt, n_qubits)
    sign = -1.0 if polarity == 1 else 1.0
    circ = Circuit(n_qubits)
    for g in base.gates:
        if g.kind == "gphase":
            # conditional phase: half plain, half flipped through Z_c
            circ.add(Gate("gphase", (), g.angle / 2))
            circ.add(Gate("pexp", (control,), sign * g.angle,
                          pauli=PauliTerm(1.0, ((control, "Z"),))))
            continue
        half = PauliTerm(1.0, g.pauli.factors)
        with_control = PauliTerm.from_map(
            1.0, {**dict(g.pauli.factors), control: "Z"})
        circ.add(Gate("pexp", tuple(q for q, _ in half.factors),
                      g.angle / 2, pauli=half))
        circ.add(Gate("pexp", tuple(q for q, _ in with_control.factors),
                      sign * g.angle / 2, pauli=with_control))
    return circ


# ---------------------------------------------------------------------------
# Unitary operands for the correlation protocols
# ---------------------------------------------------------------------------


class PauliGate:
    """A unitary Pauli string (coefficient of unit modulus)."""

    def __init__(self, term: PauliTerm):
        if abs(abs(term.coefficient) - 1.0) > 1e-12:
            raise ValueError("Pauli string is unitary only with |coefficient| = 1")
        self.term = term

    def apply(self, state: StateVector, dagger: bool = False) -> StateVector:
        return apply_pauli(state, self.term.dagger() if dagger else self.term)


class Evolution:
    """exp(-i H t), applied exactly or through first-order splitting."""

    def __init__(self, h: PauliSum, t: float,
                 spec: "HamiltonianSpec | None" = None,
                 trotter_dt: float | None = None):
        if not h.is_hermitian():
            raise ValueError("Hamiltonian must be Hermitian")
        self.h = h
        self.t = t
        self.spec = spec
        self.trotter_dt = trotter_dt

    def apply(self, state: StateVector, dagger: bool = False) -> StateVector:
        t = -self.t if dagger else self.t
        if self.trotter_dt is None:
            return evolve_exact(state, self.h, t)
        spec = self.spec or HamiltonianSpec.single_layer(self.h)
        circ = trotter_evolve(spec, t, np.sign(t) * self.trotter_dt,
                              state.n_qubits)
        return apply_circuit(state, circ)


class CircuitUnitary:
    def __init__(self, circuit: Circuit):
        self.circuit = circuit

    def apply(self, state: StateVector, dagger: bool = False) -> StateVector:
        if dagger:
            raise NotImplementedError("circuit inverses are not needed here")
        return apply_circuit(state, self.circuit)


def _apply_controlled(op, state: StateVector, control: int,
                      polarity: int) -> StateVector:
    n = state.n_qubits
    left = 2 ** (control - 1)
    right = 2 ** (n - control)
    view = state.amplitudes.reshape(left, 2, right)
    branch = np.ascontiguousarray(view[:, polarity, :]).reshape(-1)
    sub = StateVector(n - 1, branch)
    op.apply(sub)
    view[:, polarity, :] = sub.amplitudes.reshape(left, right)
    return state


# ---------------------------------------------------------------------------
# Protocols
# ---------------------------------------------------------------------------

def _plus_ancilla(state: StateVector, ancilla: int) -> None:
    # Hadamard from elementary rotations (global phase dropped)
    apply_rotation(state, "z", ancilla, np.pi)
    apply_rotation(state, "y", ancilla, np.pi / 2)


def _ancilla_readout(state: StateVector, ancilla: int) -> complex:
    """<sigma_x + i sigma_y> on the ancilla = 2 <sigma_+>."""
    n = state.n_qubits
    left = 2 ** (ancilla - 1)
    right = 2 ** (n - ancilla)
    view = state.amplitudes.reshape(left, 2, right)
    return 2.0 * complex(np.vdot(view[:, 0, :], view[:, 1, :]))


def one_ancilla_correlation(n_sys: int, prep: Circuit | None,
                            u_op, v_op) -> complex:
    """<phi| U^dag V |phi> from one ancilla polarization readout.

    The ancilla starts in |+>; V is applied controlled on |1>, U
    controlled on |0>; the readout <sigma_x + i sigma_y> returns the
    correlation exactly (expectations, not samples).
    """
    anc = n_sys + 1
    state = new_register(anc, 0)
    if prep is not None:
        sys_circ = Circuit(anc, list(prep.gates), ancilla=anc)
        apply_circuit(state, sys_circ)
    _plus_ancilla(state, anc)
    _apply_controlled(v_op, state, anc, polarity=1)
    _apply_controlled(u_op, state, anc, polarity=0)
    return _ancilla_readout(state, anc)


def time_correlation(a_op, b_op, h: PauliSum, t: float,
                     prep: Circuit | None, n_sys: int,
                     trotter_dt: float | None = None,
                     spec: "HamiltonianSpec | None" = None) -> complex:
    """<phi| T^dag A^dag T B |phi> with T = exp(-i H t).

    Only A and B are controlled; the evolution T runs uncontrolled on
    the system, which is what makes this protocol cheap.
    """
    if not h.is_hermitian():
        raise ValueError("Hamiltonian must be Hermitian")
    anc = n_sys + 1
    state = new_register(anc, 0)
    if prep is not None:
        apply_circuit(state, Circuit(anc, list(prep.gates), ancilla=anc))
    _plus_ancilla(state, anc)
    _apply_controlled(b_op, state, anc, polarity=1)
    Evolution(h, t, spec=spec, trotter_dt=trotter_dt).apply(state)
    _apply_controlled(a_op, state, anc, polarity=0)
    return _ancilla_readout(state, anc)


def spectrum_series(q: PauliSum, prep: Circuit | None, n_sys: int,
                    n_samples: int, dt: float,
                    mode: str = "ancilla"):
    """S(t_j) = <phi| exp(-i Q t_j) |phi> on the grid t_j = j dt.

    mode='ancilla' evolves both ancilla branches of exp(i Q sigma_z t/2)
    step by step and reads the polarization; mode='overlap' evolves a
    single copy and takes overlaps with |phi>, which is algebraically the
    same readout at half the cost (the equality is asserted by tests).
    Returns a `liesim.spectral.TimeSeries`.
    """
    from .spectral import TimeSeries

    if not q.is_hermitian():
        raise ValueError("spectrum generator must be Hermitian")
    if dt <= 0 or n_samples < 2:
        raise ValueError("need dt > 0 and at least two samples")

    phi = new_register(n_sys, 0)
    if prep is not None:
        apply_circuit(phi, prep)

    values = np.empty(n_samples, dtype=complex)
    if mode == "ancilla":
        anc = n_sys + 1
        state = new_register(anc, 0)
        view = state.amplitudes.reshape(-1, 2)
        view[:, 0] = phi.amplitudes
        view[:, 1] = 0.0
        _plus_ancilla(state, anc)
        for j in range(n_samples):
            # exp(i Q sigma_z^a dt / 2): branch |0> forward, |1> backward
            _apply_conditional_evolution(state, q, -dt / 2, anc, 0)
            _apply_conditional_evolution(state, q, +dt / 2, anc, 1)
            values[j] = _ancilla_readout(state, anc)
    elif mode == "overlap":
        psi = phi.copy()
        for j in range(n_samples):
            evolve_exact(psi, q, dt)
            values[j] = phi.overlap(psi)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return TimeSeries(dt, values)


def branch_superposition(branches: list[StateVector],
                         amplitudes: np.ndarray | None = None
                         ) -> tuple[StateVector, float]:
    """Post-selected superposition of L branch preparations.

    Emulates the L-ancilla construction: branch states are entangled
    with an ancilla register, which is then projected back onto its
    uniform superposition.  Returns the normalized system state and the
    exact success probability of the projection (1/L for orthonormal
    equal-amplitude branches).  Computed as a projector expectation; no
    sampling is involved.
    """
    l = len(branches)
    if not 1 <= l <= MAX_BRANCHES:
        raise ValueError(f"need 1..{MAX_BRANCHES} branches")
    n = branches[0].n_qubits
    if any(b.n_qubits != n for b in branches):
        raise ValueError("branch registers differ in size")
    if amplitudes is None:
        amplitudes = np.full(l, 1.0 / np.sqrt(l))
    amplitudes = np.asarray(amplitudes, dtype=complex)
    amplitudes = amplitudes / np.linalg.norm(amplitudes)
    # after projecting the ancillas on their uniform state the system is
    # left in (1/sqrt(L)) sum_l g_l |phi_l>, unnormalized
    raw = sum(g * b.amplitudes for g, b in zip(amplitudes, branches))
    raw = raw / np.sqrt(l)
    prob = float(np.linalg.norm(raw) ** 2)
    if prob == 0.0:
        raise ValueError("branches interfere destructively; nothing to select")
    return StateVector(n, raw / np.linalg.norm(raw)), prob


# ---------------------------------------------------------------------------
# Trotter splitting
# ---------------------------------------------------------------------------


@dataclass
class HamiltonianSpec:
    """A Pauli-sum Hamiltonian grouped into mutually commuting layers."""

    hamiltonian: PauliSum
    layers: list[PauliSum]

    def __post_init__(self):
        total = PauliSum()
        for layer in self.layers:
            terms = list(layer.terms())
            for i, a in enumerate(terms):
                for b in terms[i + 1:]:
                    if not a.commutes_with(b):
                        raise ValueError(
                            f"layer terms {a.label} and {b.label} do not commute")
            total = total + layer
        if not (total == self.hamiltonian):
            raise ValueError("layers do not add up to the Hamiltonian")

    @staticmethod
    def single_layer(h: PauliSum) -> "HamiltonianSpec":
        return HamiltonianSpec(h, greedy_commuting_layers(h))


def greedy_commuting_layers(h: PauliSum) -> list[PauliSum]:
    layers: list[list[PauliTerm]] = []
    for term in h.terms():
        for layer in layers:
            if all(term.commutes_with(t) for t in layer):
                layer.append(term)
                break
        else:
            layers.append([term])
    return [PauliSum(layer) for layer in layers]


def trotter_evolve(spec: HamiltonianSpec, t: float, dt: float,
                   n_qubits: int | None = None) -> Circuit:
    """First-order split circuit for exp(-i H t) with step dt.

    dt must divide t within rounding; each step applies the layer
    exponentials in order, every layer being exact on its own commuting
    terms.  The local error per step is O(dt^2).
    """
    n = n_qubits or (spec.hamiltonian.max_qubit())
    if t == 0:
        return Circuit(n)
    if dt == 0 or t * dt < 0:
        raise ValueError("dt must be nonzero and share the sign of t")
    n_steps = int(round(t / dt))
    if n_steps == 0 or abs(n_steps * dt - t) > 1e-9 * abs(dt):
        raise ValueError(f"dt={dt} does not divide t={t}")
    circ = Circuit(n)
    step_gates: list[Gate] = []
    for layer in spec.layers:
        for term in layer.terms():
            c = term.coefficient.real
            if term.factors:
                step_gates.append(
                    Gate("pexp", tuple(q for q, _ in term.factors),
                         2.0 * c * dt, pauli=PauliTerm(1.0, term.factors)))
            else:
                step_gates.append(Gate("gphase", (), c * dt))
    for _ in range(n_steps):
        for g in step_gates:
            circ.add(g)
    return circ


# ---------------------------------------------------------------------------
# Fermionic state preparation
# ---------------------------------------------------------------------------

def prepare_slater(modes: list[int], n_modes: int) -> Circuit:
    """Circuit preparing the product state of the given occupied modes.

    Starting from |00...0>, the register is first flipped to the mapped
    vacuum |11...1>, then one string exponential per occupied mode
    creates the particle (up to a global phase).
    """
    if len(set(modes)) != len(modes):
        raise ValueError("duplicate mode: at most one fermion per mode")
    if any(not 1 <= m <= n_modes for m in modes):
        raise ValueError("mode outside the register")
    circ = Circuit(n_modes)
    for q in range(1, n_modes + 1):
        circ.rx(q, np.pi)  # |0> -> |1> up to phase
    for m in sorted(modes, reverse=True):  # leftmost creator acts last
        factors = {j: "Z" for j in range(1, m)}
        factors[m] = "X"
        sign = (-1.0) ** (m - 1)
        circ.pexp(PauliTerm.from_map(1.0, factors), -np.pi * sign)
    return circ


def thouless_rotate(mbar: np.ndarray, n_modes: int,
                    trotter_dt: float | None = None) -> Circuit:
    """Circuit for the one-body rotation exp(-i c^dag Mbar c).

    Normalized so that a product state with one-body density matrix D
    evolves to density matrix exp(i Mbar) D exp(-i Mbar).  Exact by
    default (a single `evolve` gate over the mapped quadratic form);
    with trotter_dt set, the rotation is split into elementary string
    exponentials instead.
    """
    from .opalgebra import FermionExpr, jordan_wigner

    mbar = np.asarray(mbar)
    if mbar.shape != (n_modes, n_modes):
        raise ValueError("matrix must be n_modes x n_modes")
    if np.abs(mbar - mbar.conj().T).max() > 1e-10 * max(1.0, np.abs(mbar).max()):
        raise ValueError("one-body matrix must be Hermitian")
    expr = FermionExpr.zero()
    for i in range(n_modes):
        for j in range(n_modes):
            # mode-vector convention: the (i, j) weight multiplies c_j^dag c_i
            if abs(mbar[i, j]) > 1e-15:
                expr = expr + mbar[i, j] * (
                    FermionExpr.creation(j + 1) * FermionExpr.annihilation(i + 1))
    h = jordan_wigner(expr, n_modes)
    circ = Circuit(n_modes)
    if trotter_dt is None:
        circ.add(Gate("evolve", (), hamiltonian=h, time=1.0))
    else:
        sub = trotter_evolve(HamiltonianSpec.single_layer(h), 1.0, trotter_dt,
                             n_modes)
        circ.gates.extend(sub.gates)
    return circ


# ---------------------------------------------------------------------------
# Circuit text format (golden files)
# ---------------------------------------------------------------------------

def circuit_to_text(circ: Circuit) -> str:
    lines = [f"qubits {circ.n_qubits}"]
    if circ.ancilla is not None:
        lines.append(f"ancilla {circ.ancilla}")
    for g in circ.gates:
        if g.kind in ("rx", "ry", "rz"):
            lines.append(f"{g.kind} {g.targets[0]} {g.angle!r}")
        elif g.kind == "zz":
            lines.append(f"zz {g.targets[0]} {g.targets[1]} {g.angle!r}")
        elif g.kind == "gphase":
            lines.append(f"gphase {g.angle!r}")
        elif g.kind == "pexp":
            lines.append(f"pexp {g.angle!r} {g.pauli.label}")
        else:
            raise ValueError(f"gate kind {g.kind!r} has no text form; "
                             "compile it to elementary gates first")
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> Circuit:
    lines = [ln.strip() for ln in text.splitlines()
             if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("qubits "):
        raise ValueError("circuit text must start with a 'qubits N' line")
    circ = Circuit(int(lines[0].split()[1]))
    body = lines[1:]
    if body and body[0].startswith("ancilla "):
        circ.ancilla = int(body[0].split()[1])
        body = body[1:]
    for ln in body:
        tok = ln.split()
        kind = tok[0]
        if kind in ("rx", "ry", "rz"):
            circ.add(Gate(kind, (int(tok[1]),), float(tok[2])))
        elif kind == "zz":
            circ.add(Gate("zz", (int(tok[1]), int(tok[2])), float(tok[3])))
        elif kind == "gphase":
            circ.add(Gate("gphase", (), float(tok[1])))
        elif kind == "pexp":
            factors = {}
            for t in tok[2:]:
                factors[int(t[1:])] = t[0]
            term = PauliTerm.from_map(1.0, factors)
            circ.add(Gate("pexp", tuple(q for q, _ in term.factors),
                          float(tok[1]), pauli=term))
        else:
            raise ValueError(f"unknown gate line {ln!r}")
    return circ
