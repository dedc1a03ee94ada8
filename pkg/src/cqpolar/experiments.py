"""Experiment drivers shared by the command line and the acceptance suite."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from .channel import ChannelParams, capacity, make_channel, psc_to_bscq
from .decoder import CodeSpec, HelstromDecoder, decode, polar_encode, psc_decode
from .density_evolution import exact_de, mf_design, polar_de, select_design
from .quantum_sim import exact_channel_output, psc_channel_output, sample_channel_output

TRIAL_CHUNK = 500
FROZEN_MODES = ("random", "zeros", "ones")
DECODERS = ("pmbpqm", "helstrom")


def wilson_interval(k: int, n: int, confidence=0.95):
    if n == 0:
        return 0.0, 1.0
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class BlockErrorResult:
    errors: int
    trials: int
    seed: int
    low: float
    high: float

    @property
    def rate(self) -> float:
        return self.errors / self.trials


def _chunk_errors(code, decoder, frozen_mode, size, seed, chunk, helper=None):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))
    N = code.N
    info = np.array(code.info)
    u = rng.integers(0, 2, size=(size, N), dtype=np.int8)
    if frozen_mode == "zeros":
        u[:, ~info] = 0
    elif frozen_mode == "ones":
        u[:, ~info] = 1
    state = sample_channel_output(code.channel, polar_encode(u), rng)
    if decoder == "pmbpqm":
        u_hat = decode(state, code, frozen=u, mode="sampled", rng=rng).u_hat
    else:
        u_hat = helper.decode(state, u, rng)
    return int(np.any(u_hat != u, axis=1).sum())


def block_error(code: CodeSpec, trials: int, seed: int = 0, decoder="pmbpqm",
                frozen="random", workers: int = 1) -> BlockErrorResult:
    """Monte Carlo block error rate with uniformly random information bits.

    Trials run in fixed chunks, each with its own seed stream, so the estimate
    does not depend on ``workers``.
    """
    if decoder not in DECODERS:
        raise ValueError(f"decoder must be one of {DECODERS}")
    if trials < 1:
        raise ValueError("trials must be positive")
    if frozen not in FROZEN_MODES:
        raise ValueError(f"frozen must be one of {FROZEN_MODES}")
    sizes = [TRIAL_CHUNK] * (trials // TRIAL_CHUNK)
    if trials % TRIAL_CHUNK:
        sizes.append(trials % TRIAL_CHUNK)
    # measurement projectors depend only on the code, so one helper serves all chunks
    helper = HelstromDecoder(code) if decoder == "helstrom" else None
    args = [(code, decoder, frozen, size, seed, c, helper) for c, size in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda a: _chunk_errors(*a), args))
    else:
        counts = [_chunk_errors(*a) for a in args]
    errors = sum(counts)
    low, high = wilson_interval(errors, trials)
    return BlockErrorResult(errors, trials, seed, low, high)


def rate_sweep(delta, gammas, n, M, seed, target, workers=1):
    """Rows ``(gamma, rate_ub, rate_ncub, rate_mf_ub)`` for a block-error target."""
    N = 1 << n
    mf = mf_design(delta, n, M, seed, target=target, bound="ub", workers=workers)
    rows = []
    for gamma in gammas:
        eps = polar_de(make_channel(delta, gamma), n, M, seed, workers)
        ub = len(select_design(eps, target=target, bound="ub"))
        ncub = len(select_design(eps, target=target, bound="ncub"))
        rows.append((float(gamma), ub / N, ncub / N, len(mf.info_set) / N))
    return rows


def polarization(channel: ChannelParams, ns, M, seed, workers=1):
    """Rows ``(n, index_fraction, epsilon)`` with errors sorted ascending."""
    rows = []
    for n in ns:
        eps = np.sort(polar_de(channel, n, M, seed, workers))
        rows.extend((n, (r + 1) / len(eps), float(e)) for r, e in enumerate(eps))
    return rows


def de_vs_sim(channel: ChannelParams, n: int, theta=None, mode="genie", trials=1000, seed=0):
    """Rows ``(bit, de_error, sim_error)``: exact enumeration against the decoder.

    ``genie`` runs the decoder once on the exact mixed state (or on the pure
    product state when ``theta`` is given).  ``sampled`` averages the genie
    error over ``trials`` sampled pure outputs with random codewords, which is
    the Monte Carlo version of the same quantity.  ``genie_collapse`` projects
    onto every forced decision.
    """
    N = 1 << n
    de, _ = exact_de(channel, n)
    code = CodeSpec(channel, (True,) * N)
    run = decode if theta is None else psc_decode
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        u = rng.integers(0, 2, size=(trials, N), dtype=np.int8)
        if theta is None:
            state = sample_channel_output(channel, polar_encode(u), rng)
        else:
            state = psc_channel_output(theta, polar_encode(u))
        sim = run(state, code, mode="genie", truth=u).bit_errors.mean(axis=0)
    elif mode in ("genie", "genie_collapse"):
        u = np.zeros(N, dtype=np.int8)
        if theta is None:
            state = exact_channel_output(channel, polar_encode(u))
        else:
            state = psc_channel_output(theta, polar_encode(u))
        sim = run(state, code, mode=mode, truth=u).bit_errors[0]
    else:
        raise ValueError("mode must be genie, genie_collapse or sampled")
    return [(i + 1, float(de[i]), float(sim[i])) for i in range(N)]


def capacity_rows(delta, gammas):
    return [(float(delta), float(g), capacity(make_channel(delta, g))) for g in gammas]


def channel_from_args(delta=None, gamma=None, theta=None) -> ChannelParams:
    if theta is not None:
        return psc_to_bscq(theta)
    if delta is None:
        raise ValueError("give --delta (with optional --gamma) or --theta")
    return make_channel(delta, 0.0 if gamma is None else gamma)
