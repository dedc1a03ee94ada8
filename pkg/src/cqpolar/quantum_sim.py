"""Small multi-qubit simulator for running the decoding circuits.

Qubit 0 is the most significant bit of a basis index.  States carry a leading
batch axis so many independent trials can share the same circuit:

* ``pure_vector``: ``data.shape == (B,) + (2,) * N``
* ``exact_density``: ``data.shape == (B,) + (2,) * (2 * N)``, row axes first.

Gates are applied by moving the touched axes to the front and contracting,
never by building ``2**N``-sized operators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    ChannelParams,
    ResourceLimitError,
    canonical_arrays,
    output_state,
    psc_state,
)
from .combine import bit_unitaries

MAX_QUBITS = {"pure_vector": 20, "exact_density": 8}


@dataclass
class QuantumState:
    backend: str
    n_qubits: int
    data: np.ndarray

    def __post_init__(self):
        if self.backend not in MAX_QUBITS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.n_qubits > MAX_QUBITS[self.backend]:
            raise ResourceLimitError(
                f"{self.backend} is limited to {MAX_QUBITS[self.backend]} qubits, "
                f"got {self.n_qubits}"
            )

    @property
    def is_density(self) -> bool:
        return self.backend == "exact_density"

    @property
    def batch(self) -> int:
        return self.data.shape[0]

    def copy(self) -> "QuantumState":
        return QuantumState(self.backend, self.n_qubits, self.data.copy())

    def vector(self, k=0) -> np.ndarray:
        if self.is_density:
            raise TypeError("mixed state has no state vector")
        return self.data[k].reshape(-1)

    def matrix(self, k=0) -> np.ndarray:
        dim = 1 << self.n_qubits
        if self.is_density:
            return self.data[k].reshape(dim, dim)
        v = self.vector(k)
        return np.outer(v, v.conj())

    def to_density(self) -> "QuantumState":
        if self.is_density:
            return self.copy()
        mats = np.stack([self.matrix(k) for k in range(self.batch)])
        return from_density(mats)

    def norms(self) -> np.ndarray:
        if self.is_density:
            return np.einsum("bii->b", self._square()).real
        return np.sum(np.abs(self.data.reshape(self.batch, -1)) ** 2, axis=1)

    def _square(self):
        dim = 1 << self.n_qubits
        return self.data.reshape(self.batch, dim, dim)


def from_vector(vec) -> QuantumState:
    vec = np.asarray(vec, dtype=complex)
    if vec.ndim == 1:
        vec = vec[None]
    n = int(np.log2(vec.shape[1]))
    if 1 << n != vec.shape[1]:
        raise ValueError("state vector length must be a power of two")
    return QuantumState("pure_vector", n, vec.reshape((vec.shape[0],) + (2,) * n).copy())


def from_density(mat) -> QuantumState:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim == 2:
        mat = mat[None]
    n = int(np.log2(mat.shape[1]))
    if 1 << n != mat.shape[1] or mat.shape[1] != mat.shape[2]:
        raise ValueError("density matrix must be square with power-of-two size")
    return QuantumState("exact_density", n, mat.reshape((mat.shape[0],) + (2,) * (2 * n)).copy())


def _as_words(codeword):
    words = np.atleast_2d(np.asarray(codeword, dtype=np.int8))
    if np.any((words != 0) & (words != 1)):
        raise ValueError("codeword entries must be 0 or 1")
    return words


def _product(factors) -> np.ndarray:
    """Tensor product of per-qubit vectors ``factors[b, q, :]`` -> ``(B, 2**N)``."""
    out = factors[:, 0, :]
    for q in range(1, factors.shape[1]):
        out = np.einsum("bi,bj->bij", out, factors[:, q, :]).reshape(out.shape[0], -1)
    return out


def exact_channel_output(channel: ChannelParams, codeword) -> QuantumState:
    """Mixed output state ``W(x_1) (x) ... (x) W(x_N)`` for each codeword row."""
    words = _as_words(codeword)
    n = words.shape[1]
    if n > MAX_QUBITS["exact_density"]:
        raise ResourceLimitError(f"exact_density is limited to {MAX_QUBITS['exact_density']} qubits")
    rho = output_state(channel.delta, channel.gamma)
    flipped = rho[::-1, ::-1]
    mats = []
    for word in words:
        out = np.ones((1, 1), dtype=complex)
        for bit in word:
            out = np.kron(out, flipped if bit else rho)
        mats.append(out)
    return from_density(np.stack(mats))


def sample_channel_output(channel: ChannelParams, codeword, rng) -> QuantumState:
    """Pure output state with each qubit drawn from the eigen-ensemble of ``W(x_i)``."""
    words = _as_words(codeword)
    batch, n = words.shape
    if n > MAX_QUBITS["pure_vector"]:
        raise ResourceLimitError(f"pure_vector is limited to {MAX_QUBITS['pure_vector']} qubits")
    evals, evecs = np.linalg.eigh(output_state(channel.delta, channel.gamma).real)
    pick = (rng.random((batch, n)) >= evals[0]).astype(np.intp)
    factors = evecs.T[pick]
    # X swaps the two amplitudes of a qubit
    factors = np.where(words[..., None].astype(bool), factors[..., ::-1], factors)
    return from_vector(_product(factors.astype(complex)))


def psc_channel_output(theta, codeword) -> QuantumState:
    """Pure product of ``|(-1)^{x_i} theta>`` for each codeword row."""
    words = _as_words(codeword)
    plus, minus = psc_state(theta, 0), psc_state(theta, 1)
    factors = np.where(words[..., None].astype(bool), minus, plus)
    return from_vector(_product(factors))


def _row_axes(state, qubits):
    return [1 + q for q in qubits]


def _col_axes(state, qubits):
    return [1 + state.n_qubits + q for q in qubits]


def _contract(data, axes, n_ctrl, blocks):
    """Apply ``blocks[m]`` to the target axes wherever the control axes read ``m``."""
    k = len(axes)
    front = list(range(1, 1 + k))
    moved = np.moveaxis(data, axes, front)
    shape = moved.shape
    flat = moved.reshape(shape[0], 1 << n_ctrl, 1 << (k - n_ctrl), -1)
    out = np.einsum("mab,kmbr->kmar", blocks, flat)
    return np.moveaxis(out.reshape(shape), front, axes)


def apply_controlled(state: QuantumState, controls, targets, blocks) -> QuantumState:
    """Apply ``blocks[m]`` on ``targets`` conditioned on controls in basis state ``m``.

    ``controls`` are listed most significant first; ``blocks`` has shape
    ``(2**len(controls), 2**len(targets), 2**len(targets))``.
    """
    controls, targets = list(controls), list(targets)
    if len(set(controls + targets)) != len(controls) + len(targets):
        raise ValueError("control and target qubits must be distinct")
    blocks = np.asarray(blocks, dtype=complex)
    qubits = controls + targets
    state.data = _contract(state.data, _row_axes(state, qubits), len(controls), blocks)
    if state.is_density:
        state.data = _contract(state.data, _col_axes(state, qubits), len(controls),
                               blocks.conj())
    return state


def apply_gate(state: QuantumState, targets, gate) -> QuantumState:
    gate = np.asarray(gate)
    return apply_controlled(state, [], targets, gate[None])


def _flip_axes(data, axes, where):
    flipped = np.flip(data, axis=axes)
    if where is None:
        return flipped
    where = np.asarray(where, dtype=bool).reshape((-1,) + (1,) * (data.ndim - 1))
    return np.where(where, flipped, data)


def apply_x(state: QuantumState, qubit: int, where=None) -> QuantumState:
    """Pauli X on ``qubit``; ``where`` optionally restricts it to some batch rows."""
    axes = _row_axes(state, [qubit])
    if state.is_density:
        axes += _col_axes(state, [qubit])
    state.data = _flip_axes(state.data, axes, where)
    return state


def apply_z(state: QuantumState, qubit: int, where=None) -> QuantumState:
    phase = np.array([1.0, -1.0])
    shape = [1] * state.data.ndim
    shape[1 + qubit] = 2
    out = state.data * phase.reshape(shape)
    if state.is_density:
        shape = [1] * state.data.ndim
        shape[1 + state.n_qubits + qubit] = 2
        out = out * phase.reshape(shape)
    if where is not None:
        where = np.asarray(where, dtype=bool).reshape((-1,) + (1,) * (state.data.ndim - 1))
        out = np.where(where, out, state.data)
    state.data = out
    return state


def marginal_diagonal(state: QuantumState, qubits) -> np.ndarray:
    """Computational-basis probabilities of ``qubits`` (first most significant), ``(B, 2**k)``."""
    n = state.n_qubits
    if state.is_density:
        dim = 1 << n
        diag = np.einsum("bii->bi", state.data.reshape(state.batch, dim, dim)).real
        probs = diag.reshape((state.batch,) + (2,) * n)
    else:
        probs = np.abs(state.data) ** 2
    rest = [1 + q for q in range(n) if q not in qubits]
    probs = probs.sum(axis=tuple(rest)) if rest else probs
    order = np.argsort(np.argsort(qubits))
    probs = np.transpose(probs, [0] + [1 + int(i) for i in order])
    return probs.reshape(state.batch, -1)


def _mask(state: QuantumState, qubits, weights):
    """Multiply amplitudes (or both sides of rho) by per-configuration weights ``(B, 2**k)``."""
    k = len(qubits)
    w = np.asarray(weights, dtype=float).reshape((state.batch,) + (2,) * k)
    data = state.data
    axes = _row_axes(state, qubits)
    front = list(range(1, 1 + k))
    moved = np.moveaxis(data, axes, front)
    moved = moved * w.reshape(w.shape + (1,) * (moved.ndim - 1 - k))
    data = np.moveaxis(moved, front, axes)
    if state.is_density:
        axes = _col_axes(state, qubits)
        moved = np.moveaxis(data, axes, front)
        moved = moved * w.reshape(w.shape + (1,) * (moved.ndim - 1 - k))
        data = np.moveaxis(moved, front, axes)
    state.data = data


def measure_qubit(state: QuantumState, qubit: int, rng=None, forced=None, controls=(),
                  orientation=None, collapse=True):
    """Computational-basis measurement of ``qubit``, optionally relabelled by controls.

    With controls reading ``m`` the reported outcome is the measured bit XOR
    ``orientation[m]``.  Pass ``rng`` to sample or ``forced`` (per batch row) to
    evaluate a given outcome.  Returns ``(outcome, probability_of_outcome)``.
    With ``collapse`` the state is projected and renormalised.
    """
    controls = list(controls)
    qubits = controls + [qubit]
    if orientation is None:
        orientation = np.zeros(1 << len(controls), dtype=np.int8)
    orientation = np.asarray(orientation, dtype=np.int8)
    # zero_table[m, b] = 1 where bit b under controls m reads as outcome 0
    zero_table = (np.arange(2)[None, :] == orientation[:, None]).astype(float).reshape(-1)
    probs = marginal_diagonal(state, qubits)
    total = probs.sum(axis=1)
    p0 = probs @ zero_table / total
    if forced is not None:
        outcome = np.broadcast_to(np.asarray(forced, dtype=np.int8), (state.batch,)).copy()
    elif rng is not None:
        outcome = (rng.random(state.batch) >= p0).astype(np.int8)
    else:
        raise ValueError("measure_qubit needs an rng or a forced outcome")
    p_out = np.where(outcome == 0, p0, 1.0 - p0)
    if collapse:
        keep = np.where(outcome[:, None] == 0, zero_table[None], 1.0 - zero_table[None])
        scale = np.where(p_out > 0, p_out * total, 1.0)
        if state.is_density:
            _mask(state, qubits, keep)
            state.data /= scale.reshape((-1,) + (1,) * (state.data.ndim - 1))
        else:
            _mask(state, qubits, keep / np.sqrt(scale)[:, None])
    return outcome, p_out


@dataclass
class ConditionalParams:
    """Raw channel parameters of one qubit, conditioned on its reliability qubits.

    Entry ``m`` applies when the qubits in ``controls`` (first most
    significant) read ``m``.  Values are raw: ``delta`` above one half means the
    qubit currently favours ``|0>`` for input 0.
    """

    controls: tuple
    delta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        self.delta = np.asarray(self.delta, dtype=float).reshape(-1)
        self.gamma = np.asarray(self.gamma, dtype=float).reshape(-1)
        self.controls = tuple(self.controls)
        if len(self.delta) != 1 << len(self.controls) or len(self.gamma) != len(self.delta):
            raise ValueError("need one parameter pair per control configuration")
        if np.any(self.gamma**2 > self.delta * (1.0 - self.delta) + 1e-9):
            raise ValueError("conditional parameters do not describe valid states")

    @classmethod
    def unconditioned(cls, channel: ChannelParams) -> "ConditionalParams":
        return cls((), [channel.delta], [channel.gamma])

    @property
    def deltas(self):
        return canonical_arrays(self.delta, self.gamma)[0]

    @property
    def gammas(self):
        return np.abs(self.gamma)

    @property
    def flips(self):
        return canonical_arrays(self.delta, self.gamma)[2]

    def pair_with(self, other: "ConditionalParams"):
        """Parameters of both qubits on the joint configuration grid ``(m_self, m_other)``."""
        d1 = np.repeat(self.delta, len(other.delta))
        g1 = np.repeat(self.gamma, len(other.gamma))
        d2 = np.tile(other.delta, len(self.delta))
        g2 = np.tile(other.gamma, len(self.gamma))
        return d1, g1, d2, g2


def apply_conditional_bitnode(state, i, j, cp_i: ConditionalParams, cp_j: ConditionalParams,
                              inverse=False) -> QuantumState:
    """Bit-node basis change on ``(i, j)`` chosen per reliability configuration."""
    blocks = bit_unitaries(*cp_i.pair_with(cp_j))
    if inverse:
        blocks = np.swapaxes(blocks, -1, -2).conj()
    return apply_controlled(state, cp_i.controls + cp_j.controls, [i, j], blocks)
