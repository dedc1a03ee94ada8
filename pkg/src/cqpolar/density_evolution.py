"""Density evolution for paired-measurement decoding of polar codes.

Effective channels are indexed in decoding order: the most significant bit of
a 0-based index selects the first combining step (0 = check, 1 = bit).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import ChannelParams, ResourceLimitError, canonical_arrays, make_channel
from .combine import bit_branches, check_branches

BOUND_FACTORS = {"ub": 1.0, "ncub": 4.0}
DEFAULT_SAMPLES = 10_000


@dataclass
class Bag:
    """Monte Carlo population of canonical channel parameters."""

    delta: np.ndarray
    gamma: np.ndarray

    @classmethod
    def constant(cls, channel: ChannelParams, size: int) -> "Bag":
        return cls(np.full(size, channel.delta), np.full(size, channel.gamma))

    def __len__(self):
        return len(self.delta)

    @property
    def error(self) -> float:
        return float(np.mean(np.minimum(self.delta, 1.0 - self.delta)))


def _node_rng(seed: int, node: int) -> np.random.Generator:
    # each tree node owns its stream, so traversal order and threads do not matter
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(node,)))


def _bag_update(kernel, bag: Bag, rng: np.random.Generator) -> Bag:
    partner = rng.permutation(len(bag))
    pick = rng.random(len(bag))
    p, d, g = kernel(bag.delta, bag.gamma, bag.delta[partner], bag.gamma[partner])
    branch = (pick >= p[0]).astype(np.intp)
    cols = np.arange(len(bag))
    delta, gamma, _ = canonical_arrays(d[branch, cols], g[branch, cols])
    return Bag(delta, gamma)


def bag_check_update(bag: Bag, rng: np.random.Generator) -> Bag:
    return _bag_update(check_branches, bag, rng)


def bag_bit_update(bag: Bag, rng: np.random.Generator) -> Bag:
    return _bag_update(bit_branches, bag, rng)


def _evolve(bag, depth, node, seed, out, offset):
    if depth == 0:
        out[offset] = bag.error
        return
    half = 1 << (depth - 1)
    child = 2 * node
    _evolve(bag_check_update(bag, _node_rng(seed, child)), depth - 1, child, seed, out, offset)
    _evolve(bag_bit_update(bag, _node_rng(seed, child + 1)), depth - 1, child + 1, seed, out,
            offset + half)


def polar_de(channel: ChannelParams, n: int, M: int = DEFAULT_SAMPLES, seed: int = 0,
             workers: int = 1) -> np.ndarray:
    """Monte Carlo estimate of the ``2**n`` effective-channel error rates.

    The sample at tree node ``k`` (root 1, children ``2k`` and ``2k+1``) is
    driven only by ``(seed, k)``; ``workers`` threads split the tree below the
    root without changing the result.
    """
    if n < 0 or M < 1:
        raise ValueError("need n >= 0 and M >= 1")
    out = np.empty(1 << n)
    root = Bag.constant(channel, M)
    if workers <= 1 or n < 2:
        _evolve(root, n, 1, seed, out, 0)
        return out

    # expand the top levels serially, then hand subtrees to threads
    split = min(n, max(1, int(np.ceil(np.log2(workers)))))
    frontier = [(root, 1)]
    for _ in range(split):
        nxt = []
        for bag, node in frontier:
            nxt.append((bag_check_update(bag, _node_rng(seed, 2 * node)), 2 * node))
            nxt.append((bag_bit_update(bag, _node_rng(seed, 2 * node + 1)), 2 * node + 1))
        frontier = nxt
    depth = n - split
    with ThreadPoolExecutor(max_workers=workers) as pool:
        jobs = [pool.submit(_evolve, bag, depth, node, seed, out, k << depth)
                for k, (bag, node) in enumerate(frontier)]
        for job in jobs:
            job.result()
    return out


def _merge(weight, delta, gamma, digits=12):
    keep = weight > 0.0
    weight, delta, gamma = weight[keep], delta[keep], gamma[keep]
    keys = np.stack([np.round(delta, digits), np.round(gamma, digits)], axis=1)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    merged = np.bincount(inverse, weights=weight, minlength=len(uniq))
    first = np.zeros(len(uniq), dtype=np.intp)
    first[inverse[::-1]] = np.arange(len(inverse))[::-1]
    return merged, delta[first], gamma[first]


def _combine_atoms(kernel, atoms, max_atoms):
    w, d, g = atoms
    if 2 * len(w) ** 2 > max_atoms:
        raise ResourceLimitError(
            f"exact enumeration would need {2 * len(w) ** 2} atoms (limit {max_atoms})"
        )
    p, d2, g2 = kernel(d[:, None], g[:, None], d[None, :], g[None, :])
    weight = (p * (w[:, None] * w[None, :])).reshape(-1)
    weight = np.where(p.reshape(-1) > 1e-14, weight, 0.0)
    delta, gamma, _ = canonical_arrays(d2.reshape(-1), g2.reshape(-1))
    return _merge(weight, delta, gamma)


def exact_de(channel: ChannelParams, n: int, max_atoms: int = 2_000_000):
    """Exact effective-channel error rates by enumerating every branch.

    Returns ``(errors, atoms)`` where ``atoms[i]`` is ``(weights, delta, gamma)``
    describing effective channel ``i`` as a finite mixture.
    """
    level = [(np.ones(1), np.array([channel.delta]), np.array([channel.gamma]))]
    for _ in range(n):
        nxt = []
        for atoms in level:
            nxt.append(_combine_atoms(check_branches, atoms, max_atoms))
            nxt.append(_combine_atoms(bit_branches, atoms, max_atoms))
        level = nxt
    errors = np.array([float(np.dot(w, np.minimum(d, 1.0 - d))) for w, d, _ in level])
    return errors, level


def select_design(epsilons, K=None, target=None, bound="ub") -> list[int]:
    """Information positions (0-based, sorted) chosen from effective-channel errors.

    Exactly one of ``K`` (fixed dimension) or ``target`` (largest dimension
    whose bound stays at or below ``target``) must be given.  Equal errors are
    ranked by position.
    """
    eps = np.asarray(epsilons, dtype=float)
    if bound not in BOUND_FACTORS:
        raise ValueError(f"bound must be one of {sorted(BOUND_FACTORS)}")
    if (K is None) == (target is None):
        raise ValueError("give exactly one of K or target")
    order = np.lexsort((np.arange(len(eps)), eps))
    if K is None:
        if target < 0:
            raise ValueError("target must be non-negative")
        partial = BOUND_FACTORS[bound] * np.cumsum(eps[order])
        K = int(np.searchsorted(partial, target, side="right"))
    if not (0 <= K <= len(eps)):
        raise ValueError(f"K must lie in [0, {len(eps)}]")
    return sorted(int(i) for i in order[:K])


def block_error_bound(epsilons, info_set, bound="ub") -> float:
    eps = np.asarray(epsilons, dtype=float)
    return float(BOUND_FACTORS[bound] * eps[list(info_set)].sum())


@dataclass
class DesignResult:
    n: int
    delta: float
    gamma: float
    M: int
    seed: int
    epsilons: list
    info_set: list  # 0-based positions
    bound: str
    target: float | None = None
    value: float = field(init=False)

    def __post_init__(self):
        self.value = block_error_bound(self.epsilons, self.info_set, self.bound)

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def rate(self) -> float:
        return len(self.info_set) / self.N

    def to_json(self) -> str:
        data = asdict(self)
        data.pop("value")
        data["N"] = self.N
        # positions are written 1-based to match the usual u_1..u_N labelling
        data["info_set"] = [i + 1 for i in self.info_set]
        data["bound_value"] = self.value
        keys = ["n", "N", "delta", "gamma", "M", "seed", "epsilons", "info_set", "bound",
                "bound_value", "target"]
        return json.dumps({k: data[k] for k in keys}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DesignResult":
        data = json.loads(text)
        return cls(n=data["n"], delta=data["delta"], gamma=data["gamma"], M=data["M"],
                   seed=data["seed"], epsilons=list(data["epsilons"]),
                   info_set=[i - 1 for i in data["info_set"]], bound=data["bound"],
                   target=data["target"])


def design(channel: ChannelParams, n: int, M: int = DEFAULT_SAMPLES, seed: int = 0, K=None,
           target=None, bound="ub", workers: int = 1) -> DesignResult:
    eps = polar_de(channel, n, M, seed, workers)
    info = select_design(eps, K=K, target=target, bound=bound)
    return DesignResult(n, channel.delta, channel.gamma, M, seed, [float(e) for e in eps], info,
                        bound, target)


def mf_design(delta: float, n: int, M: int = DEFAULT_SAMPLES, seed: int = 0, K=None,
              target=None, bound="ub", workers: int = 1) -> DesignResult:
    """Design for measuring every qubit first, i.e. for the classical BSC(delta)."""
    return design(make_channel(delta, 0.0), n, M, seed, K, target, bound, workers)
