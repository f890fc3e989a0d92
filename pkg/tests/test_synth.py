import math
from itertools import product

import numpy as np
import pytest

from qprep.dyadic import DyadicPhase, PhaseSpec, quantize
from qprep.sim import (
    Circuit,
    ControlledZPow,
    DiagonalOracle,
    PauliX,
    StateVector,
    apply_circuit,
)
from qprep.synth import (
    count_gates,
    global_phase_gates,
    peel_synthesize,
    reconstruct,
    sparse_synthesize,
)


def random_state(num_qubits, rng):
    v = rng.standard_normal(1 << num_qubits) + 1j * rng.standard_normal(1 << num_qubits)
    return StateVector(num_qubits, v / np.linalg.norm(v))


def random_spec(rng, max_qubits=5, max_level=5):
    n = int(rng.integers(1, max_qubits + 1))
    m = int(rng.integers(1, max_level + 1))
    return PhaseSpec(n, m, tuple(int(v) for v in rng.integers(0, 1 << m, 1 << n)))


def test_all_zero_phases_need_no_gates():
    result = peel_synthesize(PhaseSpec(2, 3, (0, 0, 0, 0)))
    assert result.gates == ()
    assert result.global_phase.numerator == 0


def test_single_sign_flip_is_one_cz():
    result = peel_synthesize(quantize([0, 0, 0, math.pi], 1))
    assert result.gates == (ControlledZPow(1, (0, 1)),)
    assert reconstruct(result, 2) == PhaseSpec(2, 1, (0, 0, 0, 1))


def test_level_two_example_product_is_forced():
    # diag(1, i, 1, 1): whatever the peel emits must multiply back to it.
    spec = quantize([0, math.pi / 2, 0, 0], 2)
    result = peel_synthesize(spec)
    assert reconstruct(result, 2) == spec
    state = StateVector(2, np.full(4, 0.5, dtype=complex))
    out = apply_circuit(state, Circuit(2, result.product_gates()))
    assert np.allclose(out.amplitudes / 0.5, [1, 1j, 1, 1], atol=1e-12)


def test_exhaustive_sign_patterns_two_qubits():
    for bits in product((0, 1), repeat=4):
        spec = PhaseSpec(2, 1, bits)
        result = peel_synthesize(spec)
        assert reconstruct(result, 2) == spec
        assert len(result.gates) <= 3


def test_peel_output_is_deterministic():
    spec = PhaseSpec(3, 2, (1, 3, 0, 2, 1, 1, 2, 0))
    assert peel_synthesize(spec).gates == peel_synthesize(spec).gates


def test_random_round_trips_and_gate_bound():
    rng = np.random.default_rng(42)
    for _ in range(120):
        spec = random_spec(rng)
        result = peel_synthesize(spec)
        assert reconstruct(result, spec.num_qubits) == spec
        assert len(result.gates) <= spec.level * ((1 << spec.num_qubits) - 1)


def test_entry_zero_phase_becomes_global_scalar():
    spec = PhaseSpec(2, 2, (3, 0, 1, 2))
    result = peel_synthesize(spec)
    assert result.global_phase == DyadicPhase(3, 2)
    assert reconstruct(result, 2) == spec
    # and the materialized gate list realizes entry zero too
    rng = np.random.default_rng(0)
    state = random_state(2, rng)
    out = apply_circuit(state, Circuit(2, result.product_gates()))
    expected = state.amplitudes * np.exp(1j * np.array(spec.angles()))
    assert np.allclose(out.amplitudes, expected, atol=1e-12)


def test_emitted_levels_never_exceed_spec_level():
    rng = np.random.default_rng(8)
    for _ in range(40):
        spec = random_spec(rng, max_qubits=4, max_level=4)
        for gate in peel_synthesize(spec).gates:
            assert abs(gate.level) <= spec.level


def test_matrix_agreement_with_diagonal_oracle():
    rng = np.random.default_rng(13)
    for _ in range(25):
        spec = random_spec(rng, max_qubits=4, max_level=4)
        n = spec.num_qubits
        result = peel_synthesize(spec)
        state = random_state(n, rng)
        via_gates = apply_circuit(state, Circuit(n, result.product_gates()))
        oracle = DiagonalOracle(tuple(range(n)), spec.angles())
        via_oracle = apply_circuit(state, Circuit(n, (oracle,)))
        assert np.allclose(via_gates.amplitudes, via_oracle.amplitudes, atol=1e-10)


def test_sparse_all_ones_index_needs_no_conjugation():
    spec = PhaseSpec(3, 1, (0, 0, 0, 0, 0, 0, 0, 1))
    result = sparse_synthesize(spec, [7])
    assert result.gates == (ControlledZPow(1, (0, 1, 2)),)


def test_sparse_conjugates_the_zero_bits():
    spec = PhaseSpec(3, 1, (0, 0, 0, 0, 0, 1, 0, 0))
    result = sparse_synthesize(spec, [5])
    assert result.gates == (PauliX(1), ControlledZPow(1, (0, 1, 2)), PauliX(1))
    assert reconstruct(result, 3) == spec


def test_sparse_splits_numerator_across_levels():
    spec = PhaseSpec(2, 2, (0, 0, 0, 3))  # phase 3*pi/2 at index 3
    result = sparse_synthesize(spec, [3])
    assert set(g.level for g in result.gates) == {1, 2}
    assert all(g.qubits == (0, 1) for g in result.gates)
    assert reconstruct(result, 2) == spec


def test_sparse_round_trip_and_count_bound():
    rng = np.random.default_rng(77)
    for _ in range(60):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 6))
        support_size = int(rng.integers(1, n + 1))
        support = [int(v) for v in rng.choice(1 << n, support_size, replace=False)]
        numerators = [0] * (1 << n)
        for index in support:
            numerators[index] = int(rng.integers(0, 1 << m))
        spec = PhaseSpec(n, m, tuple(numerators))
        result = sparse_synthesize(spec, support)
        assert reconstruct(result, n) == spec
        assert len(result.gates) <= support_size * (2 * n + m)


def test_sparse_rejects_inconsistent_support():
    spec = PhaseSpec(2, 1, (0, 1, 0, 0))
    with pytest.raises(ValueError, match="outside the support"):
        sparse_synthesize(spec, [3])


def test_reconstruct_examples():
    empty = peel_synthesize(PhaseSpec(2, 1, (0, 0, 0, 0)))
    assert reconstruct(empty, 2).numerators == (0, 0, 0, 0)
    cz = peel_synthesize(PhaseSpec(2, 1, (0, 0, 0, 1)))
    assert reconstruct(cz, 2).numerators == (0, 0, 0, 1)


def test_reconstruct_round_trip_many_random_specs():
    rng = np.random.default_rng(3)
    for _ in range(200):
        spec = random_spec(rng, max_qubits=4, max_level=4)
        assert reconstruct(peel_synthesize(spec), spec.num_qubits) == spec


def test_count_gates():
    assert count_gates(peel_synthesize(PhaseSpec(2, 1, (0,) * 4))) == {}
    single = peel_synthesize(PhaseSpec(2, 1, (0, 0, 0, 1)))
    assert count_gates(single) == {(2, 1): 1}
    rng = np.random.default_rng(4)
    for _ in range(20):
        spec = random_spec(rng, max_qubits=4, max_level=3)
        result = peel_synthesize(spec)
        assert sum(count_gates(result).values()) == len(result.gates)


def test_worst_case_single_level_three_qubits_stays_within_bound():
    for pattern in range(256):
        numerators = tuple((pattern >> i) & 1 for i in range(8))
        result = peel_synthesize(PhaseSpec(3, 1, numerators))
        assert len(result.gates) <= 7


def test_global_phase_gates_apply_uniform_phase():
    rng = np.random.default_rng(21)
    state = random_state(3, rng)
    phase = DyadicPhase(5, 3)
    out = apply_circuit(state, Circuit(3, global_phase_gates(phase)))
    assert np.allclose(out.amplitudes,
                       state.amplitudes * np.exp(1j * phase.radians), atol=1e-12)
