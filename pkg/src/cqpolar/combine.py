"""Paired-measurement combining rules for check and bit nodes.

Both rules take two channels and return two branches.  Branch ``a`` carries
its probability and the post-measurement qubit channel, which is again of the
two-parameter form.  The array kernels work on *raw* parameters (``delta`` may
exceed one half, ``gamma`` may be negative) so the decoder can track the exact
physical state; the scalar wrappers return canonical parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, make_channel

# probabilities below this are treated as impossible branches
_P_FLOOR = 1e-15

_S2 = np.sqrt(2.0)
CHECK_UNITARY = np.array(
    [
        [1.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 1.0],
        [0.0, 1.0, 1.0, 0.0],
        [0.0, 1.0, -1.0, 0.0],
    ]
) / _S2

# columns: |00>+|11>, |01>+|10>, |00>-|11>, |01>-|10> (each over sqrt 2)
_BELL = np.array(
    [
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
        [0.0, 1.0, 0.0, -1.0],
        [1.0, 0.0, -1.0, 0.0],
    ]
) / _S2


@dataclass(frozen=True)
class BranchUpdate:
    prob: float
    params: ChannelParams

    @property
    def flip(self) -> bool:
        return self.params.flip


def _finish(p, top, coh):
    """Normalise unnormalised branch entries, guarding empty branches."""
    ok = p > _P_FLOOR
    safe = np.where(ok, p, 1.0)
    delta = np.where(ok, top / safe, 0.5)
    gamma = np.where(ok, coh / safe, 0.0)
    return np.where(ok, p, 0.0), np.clip(delta, 0.0, 1.0), gamma


def check_branches(d1, g1, d2, g2):
    """Check-node branches for raw inputs.

    Returns ``(p, delta, gamma)`` arrays with a leading axis of length two
    indexing the branch.
    """
    d1, g1, d2, g2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (d1, g1, d2, g2)))
    agree = d1 * d2 + (1.0 - d1) * (1.0 - d2)
    gg = 2.0 * g1 * g2
    sign = np.array([1.0, -1.0]).reshape((2,) + (1,) * d1.ndim)
    p = 0.5 + sign * gg
    top = 0.5 * (agree + sign * gg)
    coh = 0.5 * (g1 + sign * g2)
    return _finish(p, top, coh)


def _bit_frame(d1, g1, d2, g2):
    """Singular-value frame of the bit-node decision operator.

    The decision operator anticommutes with X (x) X, so in the Bell basis it
    only couples the even block to the odd block through a 2x2 matrix ``b``.
    Returns ``(sigma, u, w, b)`` where ``u[..., k, :]`` and ``w[..., k, :]`` are
    the even/odd halves of the k-th positive eigenvector.
    """
    c1 = d1 - 0.5
    c2 = d2 - 0.5
    b = np.empty(d1.shape + (2, 2))
    b[..., 0, 0] = c1 + c2
    b[..., 0, 1] = 2.0 * (c1 * g2 - g1 * c2)
    b[..., 1, 0] = 2.0 * (g1 * c2 + c1 * g2)
    b[..., 1, 1] = c1 - c2

    bb = np.einsum("...ki,...kj->...ij", b, b)
    half_diff = 0.5 * (bb[..., 0, 0] - bb[..., 1, 1])
    off = bb[..., 0, 1]
    phi = 0.5 * np.arctan2(2.0 * off, 2.0 * half_diff)
    lam = 0.5 * (bb[..., 0, 0] + bb[..., 1, 1]) + np.hypot(half_diff, off)
    sigma1 = np.sqrt(np.maximum(lam, 0.0))

    w1 = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    u1 = np.einsum("...ij,...j->...i", b, w1)
    norm = np.linalg.norm(u1, axis=-1)
    live = norm > 1e-300
    u1 = np.where(live[..., None], u1 / np.where(live, norm, 1.0)[..., None], [1.0, 0.0])

    u2 = np.stack([-u1[..., 1], u1[..., 0]], axis=-1)
    w2 = np.stack([-w1[..., 1], w1[..., 0]], axis=-1)
    t = np.einsum("...i,...ij,...j->...", u2, b, w2)
    w2 = np.where((t < 0.0)[..., None], -w2, w2)
    sigma = np.stack([sigma1, np.abs(t)], axis=-1)
    u = np.stack([u1, u2], axis=-2)
    w = np.stack([w1, w2], axis=-2)
    return sigma, u, w, b


def bit_branches(d1, g1, d2, g2):
    """Bit-node branches for raw inputs; layout as in :func:`check_branches`.

    Branch 0 belongs to the larger positive eigenvalue.
    """
    d1, g1, d2, g2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (d1, g1, d2, g2)))
    sigma, u, w, _ = _bit_frame(d1, g1, d2, g2)
    c12 = (d1 - 0.5) * (d2 - 0.5)
    gg = g1 * g2
    s_even = np.empty(d1.shape + (2, 2))
    s_even[..., 0, 0] = 0.5 + 2.0 * (gg + c12)
    s_even[..., 1, 1] = 0.5 + 2.0 * (gg - c12)
    s_even[..., 0, 1] = s_even[..., 1, 0] = g1 + g2
    s_odd = np.empty(d1.shape + (2, 2))
    s_odd[..., 0, 0] = 0.5 + 2.0 * (c12 - gg)
    s_odd[..., 1, 1] = 0.5 - 2.0 * (gg + c12)
    s_odd[..., 0, 1] = s_odd[..., 1, 0] = g2 - g1

    qe = np.einsum("...ki,...ij,...kj->...k", u, s_even, u)
    qo = np.einsum("...ki,...ij,...kj->...k", w, s_odd, w)
    p = 0.5 * (qe + qo)
    top = 0.5 * (p + sigma)
    coh = 0.25 * (qe - qo)
    p, delta, gamma = _finish(p, top, coh)
    return np.moveaxis(p, -1, 0), np.moveaxis(delta, -1, 0), np.moveaxis(gamma, -1, 0)


def _fix_sign(vectors):
    """Make the first non-negligible entry of each row positive."""
    lead = np.argmax(np.abs(vectors) > 1e-12, axis=-1)
    first = np.take_along_axis(vectors, lead[..., None], axis=-1)
    return np.where(first < 0.0, -vectors, vectors)


def bit_unitaries(d1, g1, d2, g2) -> np.ndarray:
    """Bit-node basis change for raw inputs, shape ``(..., 4, 4)``.

    Rows are the two positive eigenvectors followed by their X (x) X images,
    so outcome ``|a j>`` of the first/second qubit means decision ``a`` in
    branch ``j``.
    """
    d1, g1, d2, g2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (d1, g1, d2, g2)))
    _, u, w, _ = _bit_frame(d1, g1, d2, g2)
    pos = np.concatenate([u, w], axis=-1) / _S2
    pos = _fix_sign(np.einsum("ij,...kj->...ki", _BELL, pos))
    neg = pos[..., [3, 2, 1, 0]]
    return np.concatenate([pos, neg], axis=-2)


def _branches(kernel, w1: ChannelParams, w2: ChannelParams):
    p, d, g = kernel(w1.delta, w1.gamma, w2.delta, w2.gamma)
    return [BranchUpdate(float(p[a]), make_channel(d[a], g[a])) for a in range(2)]


def check_combine(w1: ChannelParams, w2: ChannelParams) -> list[BranchUpdate]:
    return _branches(check_branches, w1, w2)


def bit_combine(w1: ChannelParams, w2: ChannelParams) -> list[BranchUpdate]:
    return _branches(bit_branches, w1, w2)


def check_unitary() -> np.ndarray:
    return CHECK_UNITARY.copy()


def bit_unitary(w1: ChannelParams, w2: ChannelParams) -> np.ndarray:
    return bit_unitaries(w1.delta, w1.gamma, w2.delta, w2.gamma)


# pure-state channels in angle form


def psc_check(theta1, theta2):
    """Check node on pure-state inputs: ``(p, theta)`` per branch, leading axis two."""
    c1, c2 = np.cos(theta1), np.cos(theta2)
    prod = c1 * c2
    p = np.stack([0.5 * (1.0 + prod), 0.5 * (1.0 - prod)])
    with np.errstate(divide="ignore", invalid="ignore"):
        cos0 = np.where(p[0] > _P_FLOOR, (c1 + c2) / (1.0 + prod), 1.0)
        cos1 = np.where(p[1] > _P_FLOOR, (c1 - c2) / (1.0 - prod), 1.0)
    theta = np.arccos(np.clip(np.stack([cos0, cos1]), -1.0, 1.0))
    return np.where(p > _P_FLOOR, p, 0.0), theta


def psc_bit(theta1, theta2):
    return np.arccos(np.clip(np.cos(theta1) * np.cos(theta2), -1.0, 1.0))


def psc_bit_unitaries(theta1, theta2) -> np.ndarray:
    """Unitary mapping ``|theta1>|theta2>`` to ``|theta1 * theta2>|0>``, shape ``(..., 4, 4)``."""
    theta1, theta2 = np.broadcast_arrays(np.asarray(theta1, float), np.asarray(theta2, float))
    prod = np.cos(theta1) * np.cos(theta2)
    diff, tot = (theta1 - theta2) / 2.0, (theta1 + theta2) / 2.0
    na = np.sqrt(2.0 * (1.0 + prod))
    nb = np.sqrt(2.0 * (1.0 - prod))
    with np.errstate(divide="ignore", invalid="ignore"):
        a_plus = np.where(na > 1e-12, (np.cos(diff) + np.cos(tot)) / na, 1.0 / _S2)
        a_minus = np.where(na > 1e-12, (np.cos(diff) - np.cos(tot)) / na, 1.0 / _S2)
        b_plus = np.where(nb > 1e-12, (np.sin(tot) - np.sin(diff)) / nb, 1.0 / _S2)
        b_minus = np.where(nb > 1e-12, (np.sin(tot) + np.sin(diff)) / nb, 1.0 / _S2)
    out = np.zeros(theta1.shape + (4, 4))
    out[..., 0, 0], out[..., 0, 3] = a_plus, a_minus
    out[..., 1, 0], out[..., 1, 3] = a_minus, -a_plus
    out[..., 2, 1], out[..., 2, 2] = b_plus, b_minus
    out[..., 3, 1], out[..., 3, 2] = b_minus, -b_plus
    return out


CNOT = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
)
