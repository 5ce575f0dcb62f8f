"""Ancilla protocols, Trotter splitting, and fermionic state preparation."""

import numpy as np
import pytest
from conftest import dense_expm, embed, random_hermitian, random_state

from liesim import qprotocol as qp
from liesim import statevector as sv
from liesim.opalgebra import FermionExpr, PauliSum, PauliTerm, jordan_wigner


def random_pauli_sum(n, n_terms, rng, hermitian=True):
    out = PauliSum()
    for _ in range(n_terms):
        qubits = rng.choice(np.arange(1, n + 1), size=rng.integers(1, n + 1),
                            replace=False)
        factors = {int(q): "XYZ"[rng.integers(3)] for q in qubits}
        coeff = rng.normal() if hermitian else complex(rng.normal(), rng.normal())
        out.add_term(PauliTerm.from_map(coeff, factors))
    return out


def dense_of(h: PauliSum, n: int) -> np.ndarray:
    return sv.dense_matrix(h, n)


def prep_circuit_from_state(amps: np.ndarray, n: int) -> qp.Circuit:
    """Trick for tests: encode an arbitrary preparation as one 'evolve' gate.

    Rotates |0...0> onto the target (up to a global phase) within the
    two-dimensional span of the pair.
    """
    target = amps / np.linalg.norm(amps)
    e0 = np.zeros_like(target)
    e0[0] = 1.0
    c = np.vdot(e0, target)
    if abs(c) > 0:
        target = target * np.exp(-1j * np.angle(c))  # phase freedom
        c = abs(c)
    perp = target - c * e0
    s = np.linalg.norm(perp)
    circ = qp.Circuit(n)
    if s < 1e-12:
        return circ
    u = perp / s
    theta = np.arctan2(s, float(np.real(c)))
    h = 1j * theta * (np.outer(u, e0.conj()) - np.outer(e0, u.conj()))
    terms = PauliSum()
    for factors, mat in _pauli_basis(n):
        coeff = np.trace(mat.conj().T @ h) / 2 ** n
        if abs(coeff) > 1e-13:
            terms.add_term(PauliTerm.from_map(coeff, factors))
    circ.add(qp.Gate("evolve", (), hamiltonian=terms, time=1.0))
    return circ


def _pauli_basis(n):
    import itertools
    for axes in itertools.product("IXYZ", repeat=n):
        factors = {q + 1: a for q, a in enumerate(axes) if a != "I"}
        yield factors, embed(factors, n)


class TestOneAncilla:
    def test_identity_pair(self):
        one = qp.PauliGate(PauliTerm.identity(1.0))
        assert qp.one_ancilla_correlation(2, None, one, one) == pytest.approx(1.0)

    def test_flip_on_ground_state(self):
        one = qp.PauliGate(PauliTerm.identity(1.0))
        x1 = qp.PauliGate(PauliTerm.from_map(1.0, {1: "X"}))
        assert abs(qp.one_ancilla_correlation(1, None, one, x1)) < 1e-14

    def test_protocol_identity_random_unitaries(self, rng):
        # <phi|U^dag V|phi> from the readout, against a dense oracle
        for n in (1, 2, 3):
            hu = random_pauli_sum(n, 3, rng)
            hv = random_pauli_sum(n, 3, rng)
            tu, tv = rng.uniform(0.2, 1.5, size=2)
            amps = random_state(n, rng)
            prep = prep_circuit_from_state(amps, n)
            got = qp.one_ancilla_correlation(
                n, prep, qp.Evolution(hu, tu), qp.Evolution(hv, tv))
            u = dense_expm(-1j * tu * dense_of(hu, n))
            v = dense_expm(-1j * tv * dense_of(hv, n))
            want = np.vdot(u @ amps, v @ amps)
            assert abs(got - want) < 1e-10


class TestTimeCorrelation:
    def test_t_zero_same_operator(self, rng):
        n = 2
        h = random_pauli_sum(n, 3, rng)
        a = qp.PauliGate(PauliTerm.from_map(1.0, {1: "X"}))
        amps = random_state(n, rng)
        got = qp.time_correlation(a, a, h, 0.0, prep_circuit_from_state(amps, n), n)
        assert abs(got - 1.0) < 1e-10

    def test_random_h_against_dense(self, rng):
        n = 3
        h = random_pauli_sum(n, 4, rng)
        a = qp.PauliGate(PauliTerm.from_map(1.0, {1: "X"}))
        b = qp.PauliGate(PauliTerm.from_map(1.0, {2: "Y"}))
        amps = random_state(n, rng)
        for t in (0.3, 1.1, 2.9):
            got = qp.time_correlation(a, b, h, t,
                                      prep_circuit_from_state(amps, n), n)
            tmat = dense_expm(-1j * t * dense_of(h, n))
            # readout = <phi| T^dag A^dag T B |phi> = <A T phi | T B phi>
            want = np.vdot(embed({1: "X"}, n) @ (tmat @ amps),
                           tmat @ (embed({2: "Y"}, n) @ amps))
            assert abs(got - want) < 1e-10

    def test_non_hermitian_rejected(self, rng):
        h = random_pauli_sum(2, 2, rng, hermitian=False)
        a = qp.PauliGate(PauliTerm.from_map(1.0, {1: "X"}))
        with pytest.raises(ValueError):
            qp.time_correlation(a, a, h, 1.0, None, 2)


class TestSpectrumSeries:
    def test_eigenstate_gives_pure_phase(self):
        # |0> is an eigenstate of Z_1 with eigenvalue +1
        q = PauliSum.from_term(1.0, {1: "Z"})
        series = qp.spectrum_series(q, None, 1, 16, 0.3)
        np.testing.assert_allclose(series.values,
                                   np.exp(-1j * series.times()), atol=1e-12)

    def test_circuit_convention_matches_direct_exponential(self, rng):
        # the conditioned-phase circuit with ancilla readout equals
        # <phi| e^{-iQt} |phi> from the dense exponential
        n = 2
        q = random_pauli_sum(n, 3, rng)
        amps = random_state(n, rng)
        prep = prep_circuit_from_state(amps, n)
        series = qp.spectrum_series(q, prep, n, 8, 0.25, mode="ancilla")
        qmat = dense_of(q, n)
        for j, t in enumerate(series.times()):
            want = np.vdot(amps, dense_expm(-1j * qmat * t) @ amps)
            assert abs(series.values[j] - want) < 1e-10

    def test_modes_agree(self, rng):
        n = 3
        q = random_pauli_sum(n, 4, rng)
        amps = random_state(n, rng)
        prep = prep_circuit_from_state(amps, n)
        a = qp.spectrum_series(q, prep, n, 12, 0.2, mode="ancilla")
        b = qp.spectrum_series(q, prep, n, 12, 0.2, mode="overlap")
        np.testing.assert_allclose(a.values, b.values, atol=1e-12)

    def test_peaks_land_on_real_eigenvalues(self, rng):
        from liesim.spectral import dft, find_peaks

        n = 3
        q = random_pauli_sum(n, 4, rng)
        amps = random_state(n, rng)
        series = qp.spectrum_series(q, prep_circuit_from_state(amps, n),
                                    n, 256, 0.08)
        spec = dft(series)
        evals, vecs = np.linalg.eigh(dense_of(q, n))
        overlaps = np.abs(vecs.conj().T @ amps) ** 2
        bw = spec.bin_width
        for p in find_peaks(spec, rel_threshold=0.1):
            dist = np.abs(evals - p.frequency)
            nearest = np.argmin(dist)
            assert dist[nearest] < bw
            assert overlaps[nearest] > 0.01


class TestTrotter:
    def test_commuting_layers_exact(self, rng):
        h1 = PauliSum.from_term(0.7, {1: "Z"}) + PauliSum.from_term(-0.2, {2: "Z"})
        h2 = PauliSum.from_term(0.4, {1: "Z", 2: "Z"})
        spec = qp.HamiltonianSpec(h1 + h2, [h1, h2])
        amps = random_state(2, rng)
        s = sv.StateVector(2, amps.copy())
        qp.apply_circuit(s, qp.trotter_evolve(spec, 2.0, 0.5))
        want = dense_expm(-2j * dense_of(h1 + h2, 2)) @ amps
        np.testing.assert_allclose(s.amplitudes, want, atol=1e-12)

    def test_first_order_error_scaling(self, rng):
        # global state error halves when the step halves
        h1 = PauliSum.from_term(1.0, {1: "X"})
        h2 = PauliSum.from_term(1.0, {1: "Z"})
        spec = qp.HamiltonianSpec(h1 + h2, [h1, h2])
        exact = dense_expm(-1j * dense_of(h1 + h2, 1)) @ np.array([1, 0], complex)

        def err(dt):
            s = sv.new_register(1, 0)
            qp.apply_circuit(s, qp.trotter_evolve(spec, 1.0, dt))
            return np.linalg.norm(s.amplitudes - exact)

        ratio = err(0.1) / err(0.05)
        assert 1.9 <= ratio <= 2.1

    def test_order_one_over_decade(self, rng):
        # two internally commuting layers that do not commute with each other
        h1 = (PauliSum.from_term(rng.normal(), {1: "Z"})
              + PauliSum.from_term(rng.normal(), {1: "Z", 2: "Z"}))
        h2 = (PauliSum.from_term(rng.normal(), {1: "X"})
              + PauliSum.from_term(rng.normal(), {2: "X"}))
        spec = qp.HamiltonianSpec(h1 + h2, [h1, h2])
        amps = random_state(2, rng)
        exact = dense_expm(-1j * dense_of(h1 + h2, 2)) @ amps
        dts = np.array([0.2, 0.1, 0.05, 0.02])
        errs = []
        for dt in dts:
            s = sv.StateVector(2, amps.copy())
            qp.apply_circuit(s, qp.trotter_evolve(spec, 1.0, dt))
            errs.append(np.linalg.norm(s.amplitudes - exact))
        slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
        assert 0.85 <= slope <= 1.15

    def test_hopping_exponential_splits_into_commuting_strings(self):
        # the two halves of a mapped hopping exponential commute, so the
        # split is exact for any step
        n = 4
        hop = FermionExpr.hopping(1, 3)
        h = jordan_wigner(hop, n)
        terms = list(h.terms())
        assert len(terms) == 2
        assert terms[0].commutes_with(terms[1])
        full = dense_expm(1j * 0.37 * dense_of(h, n))
        split = (dense_expm(1j * 0.37 * sv.pauli_term_matrix(terms[0], n))
                 @ dense_expm(1j * 0.37 * sv.pauli_term_matrix(terms[1], n)))
        np.testing.assert_allclose(full, split, atol=1e-12)

    def test_noncommuting_layer_rejected(self):
        bad = PauliSum.from_term(1.0, {1: "X"}) + PauliSum.from_term(1.0, {1: "Z"})
        with pytest.raises(ValueError, match="do not commute"):
            qp.HamiltonianSpec(bad, [bad])

    def test_layers_must_sum_to_hamiltonian(self):
        h = PauliSum.from_term(1.0, {1: "X"})
        with pytest.raises(ValueError, match="add up"):
            qp.HamiltonianSpec(h, [h * 0.5])

    def test_step_must_divide(self):
        h = PauliSum.from_term(1.0, {1: "X"})
        spec = qp.HamiltonianSpec(h, [h])
        with pytest.raises(ValueError, match="divide"):
            qp.trotter_evolve(spec, 1.0, 0.3)


class TestControlledExponential:
    def test_zero_time_identity(self, rng):
        n = 2
        q = random_pauli_sum(n, 2, rng)
        state = sv.new_register(n + 1, 0)
        amps0 = state.amplitudes.copy()
        qp.apply_circuit(state, qp.Circuit(n + 1, [
            qp.controlled_exponential(q, 0.0, control=n + 1)]))
        np.testing.assert_allclose(state.amplitudes, amps0)

    def test_control_polarity(self, rng):
        n = 2
        q = random_pauli_sum(n, 3, rng)
        gate = qp.controlled_exponential(q, 0.9, control=n + 1, polarity=1)
        # ancilla |0>: nothing happens
        amps = random_state(n, rng)
        state = sv.new_register(n + 1, 0)
        state.amplitudes.reshape(-1, 2)[:, 0] = amps
        qp.apply_circuit(state, qp.Circuit(n + 1, [gate]))
        np.testing.assert_allclose(state.amplitudes.reshape(-1, 2)[:, 0], amps,
                                   atol=1e-13)
        # ancilla |1>: full evolution
        state = sv.new_register(n + 1, 0)
        state.amplitudes.reshape(-1, 2)[:, 1] = amps
        qp.apply_circuit(state, qp.Circuit(n + 1, [gate]))
        want = dense_expm(-0.9j * dense_of(q, n)) @ amps
        np.testing.assert_allclose(state.amplitudes.reshape(-1, 2)[:, 1], want,
                                   atol=1e-10)

    def test_control_inside_system_block_rejected(self):
        h = PauliSum.from_term(1.0, {1: "Z", 3: "Z"})
        state = sv.new_register(3, 0)
        with pytest.raises(ValueError, match="control qubit must come after"):
            qp.apply_circuit(state, qp.Circuit(3, [
                qp.controlled_exponential(h, 0.5, control=2)]))


class TestSlaterPreparation:
    def test_vacuum_is_all_ones(self):
        circ = qp.prepare_slater([], 3)
        s = sv.new_register(3, 0)
        qp.apply_circuit(s, circ)
        assert abs(abs(s.amplitudes[0b111]) - 1.0) < 1e-12

    def test_occupations_of_prepared_modes(self):
        n = 4
        circ = qp.prepare_slater([2, 4], n)
        s = sv.new_register(n, 0)
        qp.apply_circuit(s, circ)
        for m in range(1, n + 1):
            nm = jordan_wigner(FermionExpr.number(m), n)
            want = 1.0 if m in (2, 4) else 0.0
            assert abs(sv.expectation(s, nm).real - want) < 1e-12

    def test_impurity_model_initial_state(self):
        # one fermion in the second mode: logical |1 0 1 ...>
        circ = qp.prepare_slater([2], 3)
        s = sv.new_register(3, 0)
        qp.apply_circuit(s, circ)
        assert abs(abs(s.amplitudes[0b101]) - 1.0) < 1e-12

    def test_duplicate_mode_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            qp.prepare_slater([1, 1], 3)

    def test_matches_fock_oracle_up_to_phase(self):
        from conftest import fock_annihilator_matrices

        n = 4
        cs = fock_annihilator_matrices(n)
        vac = np.zeros(2 ** n, dtype=complex)
        vac[2 ** n - 1] = 1.0  # |1111> in the register convention
        want = cs[2].conj().T @ (cs[0].conj().T @ vac)  # c1^dag c3^dag applied
        want = cs[0].conj().T @ cs[2].conj().T @ vac
        s = sv.new_register(n, 0)
        qp.apply_circuit(s, qp.prepare_slater([1, 3], n))
        assert sv.allclose_up_to_phase(s.amplitudes, want, tol=1e-12)


class TestThouless:
    def test_zero_generator_is_identity(self, rng):
        n = 3
        amps = random_state(n, rng)
        s = sv.StateVector(n, amps.copy())
        qp.apply_circuit(s, qp.thouless_rotate(np.zeros((n, n)), n))
        np.testing.assert_allclose(s.amplitudes, amps)

    def test_diagonal_generator_is_number_phases(self):
        n = 3
        circ = qp.thouless_rotate(np.diag([0.3, -0.8, 1.1]), n)
        s = sv.new_register(n, 0)
        qp.apply_circuit(s, qp.prepare_slater([1, 3], n))
        before = s.amplitudes.copy()
        qp.apply_circuit(s, circ)
        # occupied modes 1,3 pick up e^{-i(0.3 + 1.1)}
        np.testing.assert_allclose(s.amplitudes,
                                   np.exp(-1j * 1.4) * before, atol=1e-12)

    def test_one_body_density_matrix_rotation(self, rng):
        n = 4
        a = random_hermitian(n, rng)
        s = sv.new_register(n, 0)
        qp.apply_circuit(s, qp.prepare_slater([1, 2], n))
        qp.apply_circuit(s, qp.thouless_rotate(a, n))
        d = np.diag([1, 1, 0, 0]).astype(complex)
        want = dense_expm(1j * a) @ d @ dense_expm(-1j * a)
        got = np.empty((n, n), dtype=complex)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                op = jordan_wigner(
                    FermionExpr.creation(i) * FermionExpr.annihilation(j), n)
                got[i - 1, j - 1] = sv.expectation(s, op)
        np.testing.assert_allclose(got, want, atol=1e-10)

    def test_trotterized_variant_converges(self, rng):
        n = 3
        a = random_hermitian(n, rng) * 0.5
        exact = sv.new_register(n, 0)
        qp.apply_circuit(exact, qp.prepare_slater([1], n))
        qp.apply_circuit(exact, qp.thouless_rotate(a, n))
        approx = sv.new_register(n, 0)
        qp.apply_circuit(approx, qp.prepare_slater([1], n))
        qp.apply_circuit(approx, qp.thouless_rotate(a, n, trotter_dt=0.001))
        assert np.linalg.norm(exact.amplitudes - approx.amplitudes) < 5e-3

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError, match="Hermitian"):
            qp.thouless_rotate(np.array([[0, 1], [0, 0]]), 2)


class TestBranchSuperposition:
    def test_two_orthogonal_branches_half_probability(self):
        n = 2
        b1 = sv.new_register(n, 0)
        b2 = sv.new_register(n, 3)
        state, prob = qp.branch_superposition([b1, b2])
        assert prob == pytest.approx(0.5)
        np.testing.assert_allclose(np.abs(state.amplitudes) ** 2,
                                   [0.5, 0, 0, 0.5], atol=1e-12)

    def test_l_branches_probability(self):
        n = 2
        branches = [sv.new_register(n, k) for k in range(4)]
        _, prob = qp.branch_superposition(branches)
        assert prob == pytest.approx(1 / 4)

    def test_branch_cap(self):
        b = sv.new_register(1, 0)
        with pytest.raises(ValueError):
            qp.branch_superposition([b] * (qp.MAX_BRANCHES + 1))


class TestCircuitText:
    def test_roundtrip(self):
        circ = qp.Circuit(3)
        circ.rx(1, 0.5).zz(1, 3, -0.25)
        circ.pexp(PauliTerm.from_map(1.0, {1: "X", 2: "Z"}), 0.75)
        circ.add(qp.Gate("gphase", (), 0.125))
        back = qp.circuit_from_text(qp.circuit_to_text(circ))
        assert back.n_qubits == 3
        s1 = sv.new_register(3, 0)
        s2 = sv.new_register(3, 0)
        qp.apply_circuit(s1, circ)
        qp.apply_circuit(s2, back)
        np.testing.assert_allclose(s1.amplitudes, s2.amplitudes, atol=1e-15)

    def test_exact_evolution_gate_has_no_text_form(self):
        circ = qp.Circuit(2, [qp.Gate("evolve", (),
                                      hamiltonian=PauliSum.identity(), time=1.0)])
        with pytest.raises(ValueError, match="no text form"):
            qp.circuit_to_text(circ)

    def test_golden_circuit(self, tmp_path):
        text = ("qubits 2\n"
                "ry 2 1.5707963267948966\n"
                "zz 1 2 0.5\n"
                "pexp -3.141592653589793 X1 Z2\n")
        circ = qp.circuit_from_text(text)
        assert qp.circuit_to_text(circ) == text


class TestCompiledControlledEvolution:
    def test_matches_exact_conditional_both_polarities(self, rng):
        h = (PauliSum.from_term(0.7, {1: "Z"})
             + PauliSum.from_term(0.3, {1: "X", 2: "X"})
             + PauliSum.identity(0.25))
        hs = qp.HamiltonianSpec.single_layer(h)
        for pol in (0, 1):
            psi0 = random_state(3, rng)
            compiled = sv.StateVector(3, psi0.copy())
            qp.apply_circuit(compiled, qp.compile_controlled_exponential(
                hs, 0.5, 0.0005, control=3, n_qubits=3, polarity=pol))
            exact = sv.StateVector(3, psi0.copy())
            qp.apply_circuit(exact, qp.Circuit(3, [
                qp.controlled_exponential(h, 0.5, 3, pol)]))
            err = np.linalg.norm(compiled.amplitudes - exact.amplitudes)
            assert err < 1e-4  # first-order split at dt = 5e-4

    def test_compiled_circuit_is_elementary(self):
        h = PauliSum.from_term(1.0, {1: "Z"})
        circ = qp.compile_controlled_exponential(
            qp.HamiltonianSpec.single_layer(h), 1.0, 0.5, control=2,
            n_qubits=2)
        assert all(g.kind in ("pexp", "gphase") for g in circ.gates)
        qp.circuit_to_text(circ)  # serializable golden form


class TestEvolutionCache:
    def test_recycled_object_identity_does_not_collide(self, rng):
        # exercise id reuse: many short-lived Hamiltonians, each evolved
        # once; a stale cache entry would evolve with the wrong generator
        import gc

        for _ in range(40):
            h = random_pauli_sum(2, 3, rng)
            amps = random_state(2, rng)
            s = sv.StateVector(2, amps.copy())
            qp.evolve_exact(s, h, 0.7)
            want = dense_expm(-0.7j * dense_of(h, 2)) @ amps
            np.testing.assert_allclose(s.amplitudes, want, atol=1e-10)
            del h
            gc.collect()
