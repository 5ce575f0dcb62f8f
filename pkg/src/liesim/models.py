"""Model builders and exact/semi-analytic solutions.

Four parameterized systems: a ring of spinless fermions coupled to one
impurity level, the 2D spinful repulsive lattice model, the anisotropic
XY spin chain in a transverse field, and the collective pseudospin
(two-shell) model.  Each exposes its qubit Hamiltonian where the circuit
protocols need one, plus independent exact accessors used as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg

from .opalgebra import FermionExpr, PauliSum, jordan_wigner, mode_reindex_2d
from .qprotocol import Circuit, HamiltonianSpec, greedy_commuting_layers, prepare_slater

__all__ = ["FanoAnderson", "Hubbard2D", "XYChain", "LMG"]


# ---------------------------------------------------------------------------
# Impurity ring
# ---------------------------------------------------------------------------


@dataclass
class FanoAnderson:
    """n-site ring with one impurity level.

    Mode ordering for the qubit mapping: impurity first, then the ring
    momentum modes k_l = 2 pi l / n with energies -2 tau cos(k_l).  Only
    the k_0 mode couples to the impurity (strength `coupling`), so the
    one-particle physics reduces to a 2x2 block.
    """

    n_sites: int
    impurity_energy: float
    coupling: float
    tau: float = 1.0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("need at least one ring site")

    @property
    def n_modes(self) -> int:
        return self.n_sites + 1

    def mode_energies(self) -> np.ndarray:
        k = 2 * np.pi * np.arange(self.n_sites) / self.n_sites
        return -2 * self.tau * np.cos(k)

    def hamiltonian(self) -> PauliSum:
        eps_k = self.mode_energies()
        expr = self.impurity_energy * FermionExpr.number(1)
        for l in range(self.n_sites):
            expr = expr + eps_k[l] * FermionExpr.number(l + 2)
        expr = expr + FermionExpr.hopping(2, 1, self.coupling)
        return jordan_wigner(expr, self.n_modes)

    def layers(self) -> HamiltonianSpec:
        h = self.hamiltonian()
        return HamiltonianSpec(h, greedy_commuting_layers(h))

    def one_particle_matrix(self) -> np.ndarray:
        """(n+1)x(n+1) single-fermion block, basis [impurity, k_0, ...]."""
        eps_k = self.mode_energies()
        m = np.diag(np.concatenate([[self.impurity_energy], eps_k])).astype(complex)
        m[0, 1] = m[1, 0] = self.coupling
        return m

    def one_particle_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the coupled impurity/k_0 block.

        The remaining one-particle levels are the unshifted mode energies
        for l >= 1; only this pair is moved by the coupling.
        """
        delta = (self.impurity_energy - self.mode_energies()[0]) / 2
        mean = (self.impurity_energy + self.mode_energies()[0]) / 2
        omega = np.hypot(delta, self.coupling)
        return np.array([mean - omega, mean + omega])

    def initial_state_circuit(self) -> Circuit:
        """One fermion in the k_0 mode (the impurity empty)."""
        return prepare_slater([2], self.n_modes)

    def correlation_exact(self, t: np.ndarray) -> np.ndarray:
        """Closed-form impurity correlation G(t) for the k_0-filled state.

        G(t) = e^{-iEt} [cos(Omega t) - i (Delta/Omega) sin(Omega t)] with
        E, Delta the mean and half-splitting of the impurity/k_0 pair.
        """
        t = np.asarray(t, dtype=float)
        e_k0 = self.mode_energies()[0]
        mean = (self.impurity_energy + e_k0) / 2
        delta = (self.impurity_energy - e_k0) / 2
        omega = np.hypot(delta, self.coupling)
        if omega == 0:
            return np.exp(-1j * mean * t)
        return np.exp(-1j * mean * t) * (np.cos(omega * t)
                                         - 1j * (delta / omega) * np.sin(omega * t))

    def spectrum_exact(self, t: np.ndarray) -> np.ndarray:
        """S(t) = sum_i |gamma_i|^2 e^{-i lambda_i t} for the k_0-filled state."""
        t = np.asarray(t, dtype=float)
        m = self.one_particle_matrix()[:2, :2]
        lam, vec = np.linalg.eigh(m)
        weights = np.abs(vec[1, :]) ** 2  # overlap with the k_0-occupied state
        return (weights[None, :] * np.exp(-1j * np.outer(t, lam))).sum(axis=1)


# ---------------------------------------------------------------------------
# 2D lattice model
# ---------------------------------------------------------------------------


@dataclass
class Hubbard2D:
    """Spin-1/2 fermions on an n_x x n_y rectangle with periodic wrap.

    Modes 1..n_sites carry spin up (sites linearized row-major through
    `mode_reindex_2d`), modes n_sites+1..2 n_sites spin down.  The
    neighbor sum runs over every site's +x and +y bond, so an n_y = 2
    column picks up its vertical bond twice, exactly as the literal
    periodic sum prescribes.
    """

    n_x: int
    n_y: int
    t_x: float = 1.0
    t_y: float = 1.0
    u: float = 0.0

    def __post_init__(self):
        if self.n_x * self.n_y > 8:
            raise ValueError("capped at 8 spatial sites (16+1 qubits)")

    @property
    def n_sites(self) -> int:
        return self.n_x * self.n_y

    @property
    def n_modes(self) -> int:
        return 2 * self.n_sites

    def site(self, ix: int, iy: int) -> int:
        """1-based linear site index of column ix, row iy (both 1-based)."""
        return mode_reindex_2d(iy, ix, self.n_x, self.n_y)

    def mode(self, ix: int, iy: int, spin: str) -> int:
        base = self.site(ix, iy)
        return base if spin == "up" else base + self.n_sites

    def bonds(self) -> list[tuple[int, int, float]]:
        """Directed +x/+y neighbor pairs (site_a, site_b, hopping).

        The literal periodic sum keeps the doubled wrap bond of a
        two-site direction but drops the self-bond of a one-site one.
        """
        out = []
        for iy in range(1, self.n_y + 1):
            for ix in range(1, self.n_x + 1):
                a = self.site(ix, iy)
                bx = self.site(ix % self.n_x + 1, iy)
                by = self.site(ix, iy % self.n_y + 1)
                if bx != a:
                    out.append((a, bx, self.t_x))
                if by != a:
                    out.append((a, by, self.t_y))
        return out

    def hopping_matrix(self) -> np.ndarray:
        """Single-spin one-body matrix (the n_sites x n_sites kinetic form)."""
        h = np.zeros((self.n_sites, self.n_sites))
        for a, b, t in self.bonds():
            h[a - 1, b - 1] -= t
            h[b - 1, a - 1] -= t
        return h

    def kinetic_expr(self, spin: str) -> FermionExpr:
        off = 0 if spin == "up" else self.n_sites
        expr = FermionExpr.zero()
        for a, b, t in self.bonds():
            expr = expr + FermionExpr.hopping(a + off, b + off, -t)
        return expr

    def hamiltonian(self) -> PauliSum:
        h = jordan_wigner(self.kinetic_expr("up"), self.n_modes)
        h = h + jordan_wigner(self.kinetic_expr("down"), self.n_modes)
        pot = FermionExpr.zero()
        for s in range(1, self.n_sites + 1):
            pot = pot + self.u * (FermionExpr.number(s)
                                  * FermionExpr.number(s + self.n_sites))
        return h + jordan_wigner(pot, self.n_modes)

    def layers(self) -> HamiltonianSpec:
        """Kinetic-up / kinetic-down / interaction split, each greedily
        subdivided into commuting groups."""
        parts = []
        for spin in ("up", "down"):
            k = jordan_wigner(self.kinetic_expr(spin), self.n_modes)
            parts.extend(greedy_commuting_layers(k))
        pot = FermionExpr.zero()
        for s in range(1, self.n_sites + 1):
            pot = pot + self.u * (FermionExpr.number(s)
                                  * FermionExpr.number(s + self.n_sites))
        v = jordan_wigner(pot, self.n_modes)
        if len(v):
            parts.append(v)
        return HamiltonianSpec(self.hamiltonian(), parts)

    def mean_field_orbitals(self) -> tuple[np.ndarray, np.ndarray]:
        """Single-particle energies and orbitals of the hopping matrix."""
        return np.linalg.eigh(self.hopping_matrix())

    def mean_field_rotation(self) -> np.ndarray:
        """Hermitian one-body generator whose rotation maps site modes
        onto hopping orbitals, block-diagonal over spin."""
        _, w = self.mean_field_orbitals()
        log_w = scipy.linalg.logm(w.astype(complex))
        mbar = (-1j * log_w)
        mbar = 0.5 * (mbar + mbar.conj().T)
        full = np.zeros((self.n_modes, self.n_modes), dtype=complex)
        full[:self.n_sites, :self.n_sites] = mbar
        full[self.n_sites:, self.n_sites:] = mbar
        return full

    # -- independent sector diagonalization (no qubit mapping involved) ----

    def sector_basis(self, n_up: int, n_dn: int) -> list[tuple[int, int]]:
        ups = [sum(1 << i for i in c)
               for c in combinations(range(self.n_sites), n_up)]
        dns = [sum(1 << i for i in c)
               for c in combinations(range(self.n_sites), n_dn)]
        return [(u, d) for u in ups for d in dns]

    def sector_hamiltonian(self, n_up: int, n_dn: int) -> np.ndarray:
        basis = self.sector_basis(n_up, n_dn)
        index = {s: i for i, s in enumerate(basis)}
        dim = len(basis)
        h = np.zeros((dim, dim))
        bonds = self.bonds()
        for i, (um, dm) in enumerate(basis):
            h[i, i] += self.u * bin(um & dm).count("1")
            for a, b, t in bonds:
                for (mask, other, is_up) in ((um, dm, True), (dm, um, False)):
                    for (src, dst) in ((b, a), (a, b)):
                        new, sign = _hop(mask, src - 1, dst - 1)
                        if new is None:
                            continue
                        j = index[(new, other) if is_up else (other, new)]
                        h[j, i] += -t * sign
        return h

    def sector_spectrum(self, n_up: int, n_dn: int
                        ) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and eigenvectors of the fixed-filling block."""
        return np.linalg.eigh(self.sector_hamiltonian(n_up, n_dn))

    def slater_sector_amplitudes(self, orbital_cols: np.ndarray,
                                 n_up: int, n_dn: int) -> np.ndarray:
        """Amplitudes of the orbital product state in the sector basis.

        orbital_cols holds the occupied single-particle orbitals as
        columns (the same set is used for both spins).
        """
        basis = self.sector_basis(n_up, n_dn)
        w_up = orbital_cols[:, :n_up]
        w_dn = orbital_cols[:, :n_dn]
        amps = np.empty(len(basis), dtype=complex)
        for i, (um, dm) in enumerate(basis):
            rows_u = [k for k in range(self.n_sites) if um >> k & 1]
            rows_d = [k for k in range(self.n_sites) if dm >> k & 1]
            au = np.linalg.det(w_up[rows_u, :]) if n_up else 1.0
            ad = np.linalg.det(w_dn[rows_d, :]) if n_dn else 1.0
            amps[i] = au * ad
        return amps


def _hop(mask: int, src: int, dst: int) -> tuple[int | None, int]:
    """c_dst^dag c_src on an occupation bitmask, with the fermionic sign."""
    if not (mask >> src) & 1:
        return None, 0
    mask1 = mask & ~(1 << src)
    sign = (-1) ** bin(mask1 & ((1 << src) - 1)).count("1")
    if (mask1 >> dst) & 1:
        return None, 0
    sign *= (-1) ** bin(mask1 & ((1 << dst) - 1)).count("1")
    return mask1 | (1 << dst), sign


# ---------------------------------------------------------------------------
# Anisotropic XY chain
# ---------------------------------------------------------------------------


@dataclass
class XYChain:
    """Transverse-field XY chain of even length, even-parity sector.

    The fermionized chain in the even-parity (ground) sector carries
    antiperiodic wave vectors; `v_squared` are the pair-occupation
    weights of the Bogolubov vacuum there.  The isotropic limit is
    excluded: the purity is blind to its transition.
    """

    n_sites: int
    gamma: float

    def __post_init__(self):
        if self.n_sites % 2 or self.n_sites < 4:
            raise ValueError("chain length must be even and >= 4")
        if not 0 < self.gamma <= 1:
            raise ValueError("anisotropy must lie in (0, 1]")

    def wavevectors(self) -> np.ndarray:
        n = self.n_sites
        return np.array([(2 * m + 1) * np.pi / n
                         for m in range(-(n // 2), n // 2)])

    def _ab(self, g: float) -> tuple[np.ndarray, np.ndarray]:
        k = self.wavevectors()
        return -1 + 2 * g * np.cos(k), 2 * g * self.gamma * np.sin(k)

    def quasiparticle_energies(self, g: float) -> np.ndarray:
        a, b = self._ab(g)
        return 2 * np.hypot(a, b)

    def mixing_angles(self, g: float) -> np.ndarray:
        """Pairing-rotation angle per wave vector (v_k = sin(phi_k/2))."""
        a, b = self._ab(g)
        return np.arctan2(b, a)

    def gap(self, g: float) -> float:
        return float(self.quasiparticle_energies(g).min())

    def v_squared(self, g: float) -> np.ndarray:
        a, b = self._ab(g)
        return 0.5 * (1 - a / np.hypot(a, b))

    def ground_energy(self, g: float) -> float:
        return -0.5 * float(self.quasiparticle_energies(g).sum())

    def purity_finite(self, g: float) -> float:
        v2 = self.v_squared(g)
        return float(4.0 / self.n_sites * np.sum((v2 - 0.5) ** 2))

    def purity_thermodynamic(self, g: float) -> float:
        gam = self.gamma
        if g > 0.5:
            return 1.0 / (1.0 + gam)
        if gam == 1.0:
            return 1.0 - 2.0 * g * g
        root = np.sqrt(1.0 - 4.0 * g * g * (1.0 - gam ** 2))
        return (1.0 - gam ** 2 / root) / (1.0 - gam ** 2)

    def shifted_purity(self, g: float, finite: bool = True) -> float:
        p = self.purity_finite(g) if finite else self.purity_thermodynamic(g)
        return p - 1.0 / (1.0 + self.gamma)

    def number_fluctuation(self, g: float) -> float:
        """(2/N)(<NN> - <N><N>) of the paired vacuum; equals 1 - purity."""
        v2 = self.v_squared(g)
        return float(4.0 / self.n_sites * np.sum(v2 * (1 - v2)))

    def spin_hamiltonian(self) -> PauliSum:
        out = PauliSum()
        n = self.n_sites
        for i in range(1, n + 1):
            j = i % n + 1
            out = out + PauliSum.from_term(-(1 + self.gamma), {i: "X", j: "X"})
            out = out + PauliSum.from_term(-(1 - self.gamma), {i: "Y", j: "Y"})
        return out

    def field_hamiltonian(self) -> PauliSum:
        out = PauliSum()
        for i in range(1, self.n_sites + 1):
            out = out + PauliSum.from_term(1.0, {i: "Z"})
        return out

    def full_hamiltonian(self, g: float) -> PauliSum:
        return g * self.spin_hamiltonian() + self.field_hamiltonian()


# ---------------------------------------------------------------------------
# Collective pseudospin model
# ---------------------------------------------------------------------------


@dataclass
class LMG:
    """Two-shell collective model in its maximal angular-momentum sector.

    H = J_z + (V/2N)(J_+^2 + J_-^2) + (W/2N)(J_+ J_- + J_- J_+) on the
    (N+1)-dimensional J = N/2 multiplet; never the 2^N fermion space.
    """

    n_particles: int
    v: float
    w: float

    def __post_init__(self):
        if not 2 <= self.n_particles <= 4000:
            raise ValueError("particle number outside 2..4000")

    @property
    def delta(self) -> float:
        return abs(self.v) - self.w

    def _bands(self) -> np.ndarray:
        n = self.n_particles
        j = n / 2
        m = np.arange(-j, j + 1)
        c2 = j * (j + 1)
        diag = m + (self.w / n) * (c2 - m ** 2)
        band2 = np.zeros(n + 1)
        pair = (c2 - m[:-2] * (m[:-2] + 1)) * (c2 - (m[:-2] + 1) * (m[:-2] + 2))
        band2[:-2] = (self.v / (2 * n)) * np.sqrt(pair)
        bands = np.zeros((3, n + 1))
        bands[0] = diag
        bands[2] = band2
        return bands

    def lowest_states(self, count: int = 2) -> tuple[np.ndarray, np.ndarray]:
        """Lowest eigenpairs of the pseudospin matrix (banded solver)."""
        w, v = scipy.linalg.eig_banded(self._bands(), lower=True,
                                       select="i", select_range=(0, count - 1))
        return w, v

    def ground(self) -> tuple[float, np.ndarray]:
        w, v = self.lowest_states(1)
        return float(w[0]), v[:, 0]

    def jz_expectation(self, vec: np.ndarray) -> float:
        j = self.n_particles / 2
        m = np.arange(-j, j + 1)
        return float(np.sum(m * np.abs(vec) ** 2))

    def purity(self) -> float:
        """(4/N^2) <J_z>^2 in the ground state."""
        _, vec = self.ground()
        jz = self.jz_expectation(vec)
        return 4.0 * jz ** 2 / self.n_particles ** 2

    def upper_shell_occupation(self) -> float:
        _, vec = self.ground()
        return 0.5 + self.jz_expectation(vec) / self.n_particles

    # -- classical (infinite-N) limit --------------------------------------

    def classical_minimum(self) -> tuple[float, float]:
        """(theta, phi) minimizing the classical energy surface at j = 1/2."""
        d = self.delta
        theta = np.pi if d <= 1 else float(np.arccos(-1.0 / d))
        if self.v == 0:
            phi = 0.0  # gauge line: any phi is degenerate
        else:
            phi = 0.0 if self.v < 0 else np.pi / 2
        return theta, phi

    def classical_energy(self, theta: float, phi: float) -> float:
        """h_c(theta, phi) per particle at j = 1/2.

        The quadratic terms scale as j^2 sin^2(theta), with the pairing
        piece carrying cos(2 phi).
        """
        j = 0.5
        return (j * np.cos(theta)
                + self.v * j ** 2 * np.sin(theta) ** 2 * np.cos(2 * phi)
                + self.w * j ** 2 * np.sin(theta) ** 2)

    def classical_ground_energy(self) -> float:
        return self.classical_energy(*self.classical_minimum())

    def classical_purity(self) -> float:
        d = self.delta
        return 1.0 if d <= 1 else 1.0 / d ** 2
