import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqpolar.channel import ResourceLimitError, density, make_channel, psc_state
from cqpolar.quantum_sim import (
    ConditionalParams,
    QuantumState,
    apply_conditional_bitnode,
    apply_controlled,
    apply_gate,
    apply_x,
    apply_z,
    exact_channel_output,
    from_density,
    from_vector,
    marginal_diagonal,
    measure_qubit,
    psc_channel_output,
    sample_channel_output,
)
from cqpolar.combine import bit_unitaries
from oracles import X, controlled_operator, full_operator


def _random_unitary(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_vector(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


@st.composite
def layouts(draw, max_qubits=5):
    n = draw(st.integers(2, max_qubits))
    k = draw(st.integers(1, min(3, n)))
    qubits = draw(st.permutations(range(n)))[: k + draw(st.integers(0, min(2, n - k)))]
    return n, qubits[:k], qubits[k:], draw(st.integers(0, 2**32 - 1))


@settings(max_examples=60, deadline=None)
@given(layouts())
def test_controlled_gate_on_vectors(layout):
    n, targets, controls, seed = layout
    rng = np.random.default_rng(seed)
    blocks = [_random_unitary(rng, 1 << len(targets)) for _ in range(1 << len(controls))]
    v = _random_vector(rng, n)
    got = apply_controlled(from_vector(v), controls, targets, blocks).vector()
    want = controlled_operator(n, controls, targets, blocks) @ v
    np.testing.assert_allclose(got, want, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(layouts(max_qubits=4))
def test_controlled_gate_on_density(layout):
    n, targets, controls, seed = layout
    rng = np.random.default_rng(seed)
    blocks = [_random_unitary(rng, 1 << len(targets)) for _ in range(1 << len(controls))]
    a = rng.normal(size=(1 << n, 1 << n)) + 1j * rng.normal(size=(1 << n, 1 << n))
    r = a @ a.conj().T
    r /= np.trace(r)
    got = apply_controlled(from_density(r), controls, targets, blocks).matrix()
    u = controlled_operator(n, controls, targets, blocks)
    np.testing.assert_allclose(got, u @ r @ u.conj().T, atol=1e-12)


@pytest.mark.parametrize("q", [0, 1, 2])
def test_pauli_helpers(q):
    rng = np.random.default_rng(q)
    v = _random_vector(rng, 3)
    np.testing.assert_allclose(apply_x(from_vector(v), q).vector(), full_operator(3, [q], X) @ v)
    z = np.diag([1.0, -1.0])
    np.testing.assert_allclose(apply_z(from_vector(v), q).vector(), full_operator(3, [q], z) @ v)
    r = np.outer(v, v.conj())
    xr = full_operator(3, [q], X)
    np.testing.assert_allclose(apply_x(from_density(r), q).matrix(), xr @ r @ xr, atol=1e-15)


def test_batch_restricted_flip():
    v = np.stack([[1, 0], [1, 0]]).astype(complex)
    state = apply_x(from_vector(v), 0, where=[False, True])
    np.testing.assert_allclose(state.vector(0), [1, 0])
    np.testing.assert_allclose(state.vector(1), [0, 1])


def test_exact_output_is_product_of_channel_states():
    ch = make_channel(0.1, 0.2)
    state = exact_channel_output(ch, [0, 1, 1])
    want = np.kron(np.kron(density(ch, 0), density(ch, 1)), density(ch, 1))
    np.testing.assert_allclose(state.matrix(), want, atol=1e-15)


def test_sampled_outputs_average_to_exact():
    ch = make_channel(0.1, 0.2)
    rng = np.random.default_rng(5)
    word = np.array([[1, 0]] * 40_000)
    sampled = sample_channel_output(ch, word, rng)
    flat = sampled.data.reshape(sampled.batch, -1)
    avg = np.einsum("bi,bj->ij", flat, flat.conj()) / sampled.batch
    np.testing.assert_allclose(avg, exact_channel_output(ch, [1, 0]).matrix(), atol=0.01)


def test_pure_outputs():
    state = psc_channel_output(0.7, [[0, 1]])
    np.testing.assert_allclose(state.vector(), np.kron(psc_state(0.7, 0), psc_state(0.7, 1)))


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_backends_agree(n, seed):
    rng = np.random.default_rng(seed)
    v = _random_vector(rng, n)
    pure, mixed = from_vector(v), from_density(np.outer(v, v.conj()))
    targets = list(rng.permutation(n)[: min(2, n)])
    u = _random_unitary(rng, 1 << len(targets))
    apply_gate(pure, targets, u)
    apply_gate(mixed, targets, u)
    np.testing.assert_allclose(pure.matrix(), mixed.matrix(), atol=1e-12)
    np.testing.assert_allclose(marginal_diagonal(pure, [n - 1]), marginal_diagonal(mixed, [n - 1]),
                               atol=1e-12)
    a, pa = measure_qubit(pure, 0, forced=1)
    b, pb = measure_qubit(mixed, 0, forced=1)
    assert pa == pytest.approx(pb, abs=1e-12)
    if pa[0] > 1e-9:
        np.testing.assert_allclose(pure.matrix(), mixed.matrix(), atol=1e-9)


def test_marginal_respects_qubit_order():
    v = np.zeros(8)
    v[0b011] = 1.0
    state = from_vector(v)
    np.testing.assert_allclose(marginal_diagonal(state, [0, 2]), [[0, 1, 0, 0]])
    np.testing.assert_allclose(marginal_diagonal(state, [2, 0]), [[0, 0, 1, 0]])


def test_measure_with_orientation_table():
    # qubit 1 is the control; when it reads 1 the meaning of qubit 0 is swapped
    v = np.zeros(4)
    v[0b01] = 1.0  # qubit0 = 0, qubit1 = 1
    _, p = measure_qubit(from_vector(v), 0, forced=1, controls=[1], orientation=[0, 1])
    assert p[0] == pytest.approx(1.0)
    _, p = measure_qubit(from_vector(v), 0, forced=1, controls=[1], orientation=[0, 0])
    assert p[0] == pytest.approx(0.0)
    out, _ = measure_qubit(from_vector(v), 0, rng=np.random.default_rng(0), controls=[1],
                           orientation=[0, 1])
    assert out[0] == 1


def test_measurement_collapse_and_statistics():
    v = np.array([np.sqrt(0.3), np.sqrt(0.7)])
    batch = from_vector(np.tile(v, (20_000, 1)))
    out, p = measure_qubit(batch, 0, rng=np.random.default_rng(1))
    assert out.mean() == pytest.approx(0.7, abs=0.02)
    np.testing.assert_allclose(np.abs(batch.vector(0)), np.eye(2)[out[0]], atol=1e-12)
    np.testing.assert_allclose(batch.norms(), 1.0)
    mixed = from_density(np.diag([0.3, 0.7]))
    _, p = measure_qubit(mixed, 0, forced=0, collapse=False)
    assert p[0] == pytest.approx(0.3)
    np.testing.assert_allclose(mixed.matrix(), np.diag([0.3, 0.7]))


def test_measure_needs_a_source():
    with pytest.raises(ValueError):
        measure_qubit(from_vector([1, 0]), 0)


def test_conditional_bitnode_selects_block():
    cp0 = ConditionalParams((2,), [0.1, 0.8], [0.2, -0.3])
    cp1 = ConditionalParams((), [0.3], [0.1])
    rng = np.random.default_rng(3)
    v = _random_vector(rng, 3)
    got = apply_conditional_bitnode(from_vector(v), 0, 1, cp0, cp1).vector()
    blocks = bit_unitaries(*cp0.pair_with(cp1))
    want = controlled_operator(3, [2], [0, 1], blocks) @ v
    np.testing.assert_allclose(got, want, atol=1e-12)
    back = apply_conditional_bitnode(from_vector(got), 0, 1, cp0, cp1, inverse=True).vector()
    np.testing.assert_allclose(back, v, atol=1e-12)


def test_conditional_params_validation():
    with pytest.raises(ValueError):
        ConditionalParams((0,), [0.1], [0.0])
    with pytest.raises(ValueError):
        ConditionalParams((), [0.1], [0.4])
    cp = ConditionalParams((), [0.8], [-0.2])
    assert cp.flips[0] and cp.deltas[0] == pytest.approx(0.2)


def test_resource_limits():
    with pytest.raises(ResourceLimitError):
        exact_channel_output(make_channel(0.1), np.zeros(9, dtype=int))
    with pytest.raises(ResourceLimitError):
        QuantumState("pure_vector", 21, np.zeros((1, 2)))
    with pytest.raises(ValueError):
        QuantumState("tensor_network", 2, np.zeros((1, 2, 2)))
