"""Polar encoding and successive decoding of classical-quantum polar codes.

``decode`` runs the paired-measurement decoder on a simulated channel output.
Reliability outcomes are never measured: every later operation is conditioned
on the reliability qubits instead.  ``psc_decode`` is the same circuit written
for pure-state channels in the angle picture, and ``HelstromDecoder`` is the
bit-by-bit Helstrom baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    HADAMARD,
    ChannelParams,
    ResourceLimitError,
    helstrom,
    output_state,
    psc_angle,
)
from .combine import (
    CHECK_UNITARY,
    CNOT,
    bit_branches,
    check_branches,
    psc_bit,
    psc_bit_unitaries,
    psc_check,
)
from .quantum_sim import (
    ConditionalParams,
    QuantumState,
    apply_conditional_bitnode,
    apply_controlled,
    apply_gate,
    apply_x,
    apply_z,
    measure_qubit,
)

MODES = ("sampled", "genie", "genie_collapse")


def polar_encode(u) -> np.ndarray:
    """Codeword ``x = u G_N`` over GF(2); works on the last axis."""
    u = np.asarray(u, dtype=np.int8)
    N = u.shape[-1]
    if N & (N - 1):
        raise ValueError("block length must be a power of two")
    if N == 1:
        return u.copy()
    v = polar_encode(u[..., : N // 2])
    w = polar_encode(u[..., N // 2:])
    x = np.empty_like(u)
    x[..., 0::2] = v ^ w
    x[..., 1::2] = w
    return x


def generator_matrix(n: int) -> np.ndarray:
    return polar_encode(np.eye(1 << n, dtype=np.int8))


@dataclass(frozen=True)
class CodeSpec:
    """Channel assumed by the decoder plus the set of information positions."""

    channel: ChannelParams
    info: tuple

    def __post_init__(self):
        N = len(self.info)
        if N < 1 or N & (N - 1):
            raise ValueError("block length must be a power of two")

    @classmethod
    def from_info_set(cls, channel, N, info_set):
        info_set = set(int(i) for i in info_set)
        if any(i < 0 or i >= N for i in info_set):
            raise ValueError("information positions must lie in [0, N)")
        return cls(channel, tuple(i in info_set for i in range(N)))

    @property
    def N(self) -> int:
        return len(self.info)

    @property
    def n(self) -> int:
        return self.N.bit_length() - 1

    @property
    def info_set(self) -> list:
        return [i for i, flag in enumerate(self.info) if flag]

    @property
    def K(self) -> int:
        return sum(self.info)


@dataclass
class DecodeTrace:
    """Decisions per batch row; ``p_correct`` holds the probability of the true
    value at information positions in genie modes and NaN elsewhere."""

    u_hat: np.ndarray
    x_hat: np.ndarray
    p_correct: np.ndarray

    @property
    def bit_errors(self) -> np.ndarray:
        return 1.0 - self.p_correct


class _PairedOps:
    """Node operations for general two-parameter qubit channels."""

    def start(self, code: CodeSpec):
        return ConditionalParams.unconditioned(code.channel)

    def check(self, state, i, j, cp_i, cp_j, inverse=False):
        if inverse:
            apply_gate(state, [i, j], CHECK_UNITARY.T)
            return None
        apply_gate(state, [i, j], CHECK_UNITARY)
        _, d, g = check_branches(*cp_i.pair_with(cp_j))
        return ConditionalParams(cp_i.controls + cp_j.controls + (j,), d.T, g.T)

    def bit(self, state, i, j, cp_i, cp_j, inverse=False):
        apply_conditional_bitnode(state, i, j, cp_i, cp_j, inverse=inverse)
        if inverse:
            return None
        _, d, g = bit_branches(*cp_i.pair_with(cp_j))
        return ConditionalParams(cp_i.controls + cp_j.controls + (j,), d.T, g.T)

    def decide(self, state, q, cp, rng, forced, collapse):
        # raw delta below one half means input 0 favours |1>, so read the bit inverted
        orientation = (cp.delta < 0.5).astype(np.int8)
        return measure_qubit(state, q, rng=rng, forced=forced, controls=cp.controls,
                             orientation=orientation, collapse=collapse)

    def correct(self, state, q, bits):
        apply_x(state, q, where=bits == 1)


@dataclass
class _Angles:
    controls: tuple
    theta: np.ndarray

    def pair_with(self, other):
        return (np.repeat(self.theta, len(other.theta)), np.tile(other.theta, len(self.theta)))


class _PscOps:
    """Node operations for pure-state channels ``z -> |(-1)^z theta>``."""

    def start(self, code: CodeSpec):
        return _Angles((), np.array([psc_angle(code.channel)]))

    def check(self, state, i, j, cp_i, cp_j, inverse=False):
        apply_gate(state, [i, j], CNOT)
        if inverse:
            return None
        _, theta = psc_check(*cp_i.pair_with(cp_j))
        return _Angles(cp_i.controls + cp_j.controls + (j,), theta.T.reshape(-1))

    def bit(self, state, i, j, cp_i, cp_j, inverse=False):
        t1, t2 = cp_i.pair_with(cp_j)
        blocks = psc_bit_unitaries(t1, t2)
        if inverse:
            blocks = np.swapaxes(blocks, -1, -2)
        apply_controlled(state, cp_i.controls + cp_j.controls, [i, j], blocks)
        if inverse:
            return None
        # the second qubit always ends in |0>, so both branch slots share one angle
        theta = np.repeat(psc_bit(t1, t2), 2)
        return _Angles(cp_i.controls + cp_j.controls + (j,), theta)

    def decide(self, state, q, cp, rng, forced, collapse):
        apply_gate(state, [q], HADAMARD)
        outcome = measure_qubit(state, q, rng=rng, forced=forced, collapse=collapse)
        apply_gate(state, [q], HADAMARD)
        return outcome

    def correct(self, state, q, bits):
        apply_z(state, q, where=bits == 1)


class _Run:
    def __init__(self, ops, state, code, frozen, mode, truth, rng):
        self.ops, self.state, self.code = ops, state, code
        self.frozen, self.truth, self.rng = frozen, truth, rng
        self.collapse = mode != "genie"
        self.genie = mode != "sampled"
        self.p_correct = np.full((state.batch, code.N), np.nan)

    def leaf(self, q, cp, pos):
        if self.code.info[pos]:
            if self.genie:
                bits, p = self.ops.decide(self.state, q, cp, None, self.truth[:, pos],
                                          self.collapse)
                self.p_correct[:, pos] = p
            else:
                bits, _ = self.ops.decide(self.state, q, cp, self.rng, None, True)
        else:
            bits = self.frozen[:, pos].astype(np.int8)
        self.ops.correct(self.state, q, bits)
        return bits[:, None], bits[:, None]

    def run(self, qubits, cps, pos):
        if len(qubits) == 1:
            return self.leaf(qubits[0], cps[0], pos)
        half = len(qubits) // 2
        pairs = [(qubits[2 * k], qubits[2 * k + 1], cps[2 * k], cps[2 * k + 1]) for k in range(half)]
        top = [self.ops.check(self.state, i, j, ci, cj) for i, j, ci, cj in pairs]
        u_top, v = self.run(qubits[0::2], top, pos)
        for i, j, ci, cj in reversed(pairs):
            self.ops.check(self.state, i, j, ci, cj, inverse=True)
        bottom = [self.ops.bit(self.state, i, j, ci, cj) for i, j, ci, cj in pairs]
        u_bot, w = self.run(qubits[0::2], bottom, pos + half)
        for i, j, ci, cj in reversed(pairs):
            self.ops.bit(self.state, i, j, ci, cj, inverse=True)
        x = np.empty((v.shape[0], 2 * half), dtype=np.int8)
        x[:, 0::2] = v ^ w
        x[:, 1::2] = w
        return np.concatenate([u_top, u_bot], axis=1), x


def _prepare(state, code, frozen, mode, truth, rng):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if state.n_qubits != code.N:
        raise ValueError("state size does not match the code length")
    batch = state.batch
    if truth is not None:
        truth = np.broadcast_to(np.asarray(truth, dtype=np.int8), (batch, code.N))
    if frozen is None:
        frozen = truth if truth is not None else np.zeros((batch, code.N), dtype=np.int8)
    frozen = np.broadcast_to(np.asarray(frozen, dtype=np.int8), (batch, code.N))
    if mode != "sampled" and truth is None:
        raise ValueError("genie modes need the transmitted bits")
    if mode == "sampled" and rng is None:
        raise ValueError("sampled mode needs an rng")
    return frozen, truth


def _decode(ops, state, code, frozen, mode, rng, truth):
    frozen, truth = _prepare(state, code, frozen, mode, truth, rng)
    run = _Run(ops, state, code, frozen, mode, truth, rng)
    start = ops.start(code)
    u_hat, x_hat = run.run(list(range(code.N)), [start] * code.N, 0)
    return DecodeTrace(u_hat, x_hat, run.p_correct)


def decode(state: QuantumState, code: CodeSpec, frozen=None, mode="sampled", rng=None,
           truth=None) -> DecodeTrace:
    """Paired-measurement successive decoding of a channel output state.

    ``frozen`` gives the bit values at frozen positions (per batch row or
    shared).  In ``genie`` mode every information decision is forced to
    ``truth`` without disturbing the state, so each recorded probability is
    that of the designed effective channel; ``genie_collapse`` projects onto
    the forced outcome instead.  The state is modified in place.
    """
    return _decode(_PairedOps(), state, code, frozen, mode, rng, truth)


def psc_decode(state: QuantumState, code: CodeSpec, frozen=None, mode="sampled", rng=None,
               truth=None) -> DecodeTrace:
    """Decoder for pure-state channels in the angle picture; ``code.channel`` must be pure.

    The state must be prepared with ``psc_channel_output`` (phase-encoded bits).
    """
    return _decode(_PscOps(), state, code, frozen, mode, rng, truth)


class HelstromDecoder:
    """Successive bitwise Helstrom measurements on the full received state.

    For information bit ``i`` the two hypotheses average the codeword states
    over every later information bit, with earlier bits fixed to the decisions
    already made and frozen bits fixed to their values.
    """

    def __init__(self, code: CodeSpec):
        if code.N > 8:
            raise ResourceLimitError("bitwise Helstrom decoding is limited to N <= 8")
        self.code = code
        rho = output_state(code.channel.delta, code.channel.gamma)
        base = np.ones((1, 1), dtype=complex)
        for _ in range(code.N):
            base = np.kron(base, rho)
        self.base = base
        self.index = np.arange(1 << code.N)
        self.weights = 1 << np.arange(code.N - 1, -1, -1)
        self._cache = {}

    def _codeword_state(self, u):
        shift = int(polar_encode(np.asarray(u, dtype=np.int8)) @ self.weights)
        perm = self.index ^ shift
        return self.base[np.ix_(perm, perm)]

    def _hypotheses(self, i, known):
        free = [j for j in range(i + 1, self.code.N) if self.code.info[j]]
        out = []
        for b in (0, 1):
            acc = 0.0
            for fill in range(1 << len(free)):
                u = list(known)
                u[i] = b
                for k, j in enumerate(free):
                    u[j] = (fill >> k) & 1
                acc = acc + self._codeword_state(u)
            out.append(acc / (1 << len(free)))
        return out

    def projector(self, i, known):
        key = (i, tuple(known[:i]), tuple(known[i + 1:]))
        if key not in self._cache:
            rho0, rho1 = self._hypotheses(i, known)
            self._cache[key] = helstrom(rho0, rho1).projector
        return self._cache[key]

    def decode(self, state: QuantumState, frozen, rng) -> np.ndarray:
        """Decide every bit of each batch row; the state is projected in place.

        Works on either backend; a sampled pure state gives the same statistics
        as the mixed state at a fraction of the cost.
        """
        frozen = np.broadcast_to(np.asarray(frozen, dtype=np.int8), (state.batch, self.code.N))
        dim = 1 << self.code.N
        u_hat = np.zeros((state.batch, self.code.N), dtype=np.int8)
        for b in range(state.batch):
            if state.is_density:
                current = state.data[b].reshape(dim, dim)
            else:
                current = state.data[b].reshape(dim)
            known = [int(v) if not flag else 0 for v, flag in zip(frozen[b], self.code.info)]
            for i in range(self.code.N):
                if not self.code.info[i]:
                    continue
                proj = self.projector(i, known)
                current, bit = _project(current, proj, rng, state.is_density)
                known[i] = bit
            u_hat[b] = known
            state.data[b] = current.reshape(state.data.shape[1:])
        return u_hat


def _project(current, proj, rng, is_density):
    if is_density:
        kept = proj @ current @ proj
        p0 = float(np.trace(kept).real / np.trace(current).real)
    else:
        kept = proj @ current
        p0 = float(np.vdot(kept, kept).real / np.vdot(current, current).real)
    bit = int(rng.random() >= p0)
    if bit:
        rest = np.eye(len(proj)) - proj
        kept = rest @ current @ rest if is_density else rest @ current
    norm = np.trace(kept).real if is_density else np.sqrt(np.vdot(kept, kept).real)
    return kept / norm, bit
