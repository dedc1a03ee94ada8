"""Binary-input classical-quantum channels with qubit outputs.

A channel is described by two real numbers.  Input ``z`` produces the qubit
state ``X^z rho X^z`` with ``rho = [[delta, gamma], [gamma, 1 - delta]]``.
The canonical gauge keeps ``delta`` in ``[0, 1/2]`` and ``gamma >= 0``; in
that gauge ``delta`` is the minimum error of distinguishing the two outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)

class ResourceLimitError(RuntimeError):
    """A requested computation exceeds a configured size guard."""


# slack allowed when checking positivity of the 2x2 output state
_TOL = 1e-12


@dataclass(frozen=True)
class ChannelParams:
    """Canonical channel parameters.

    ``flip`` records that the raw parameters had ``delta > 1/2``, i.e. the
    physical channel is this canonical one with its input relabelled.
    """

    delta: float
    gamma: float
    flip: bool = False

    def __post_init__(self):
        if not (0.0 <= self.delta <= 0.5):
            raise ValueError(f"canonical delta must lie in [0, 1/2], got {self.delta}")
        if self.gamma < 0.0:
            raise ValueError(f"canonical gamma must be non-negative, got {self.gamma}")
        if self.gamma**2 > self.delta * (1.0 - self.delta) + _TOL:
            raise ValueError(
                f"(delta={self.delta}, gamma={self.gamma}) is not a valid state: "
                "gamma**2 must not exceed delta*(1-delta)"
            )

    @property
    def helstrom_error(self) -> float:
        return self.delta

    @property
    def is_pure(self) -> bool:
        return abs(self.gamma**2 - self.delta * (1.0 - self.delta)) <= 1e-12

    def max_gamma(self) -> float:
        return float(np.sqrt(self.delta * (1.0 - self.delta)))


def make_channel(delta, gamma=0.0) -> ChannelParams:
    """Build canonical parameters from raw ``(delta, gamma)``.

    Complex ``gamma`` is reduced to its modulus (a diagonal phase gauge).  A
    raw ``delta`` above one half is reflected and reported through ``flip``.
    """
    delta = float(delta)
    if not np.isfinite(delta) or not (0.0 <= delta <= 1.0):
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    gamma = float(abs(gamma))
    if not np.isfinite(gamma):
        raise ValueError("gamma must be finite")
    flip = delta > 0.5
    if flip:
        delta = 1.0 - delta
    bound = delta * (1.0 - delta)
    if gamma**2 > bound + _TOL:
        raise ValueError(
            f"(delta={delta}, gamma={gamma}) is not a valid state: "
            f"|gamma| must not exceed {np.sqrt(bound):.12g}"
        )
    gamma = min(gamma, np.sqrt(bound))
    return ChannelParams(delta, gamma, flip)


def canonical_arrays(delta, gamma):
    """Vectorised canonical gauge: returns ``(delta, |gamma|, flip)``."""
    delta = np.asarray(delta, dtype=float)
    flip = delta > 0.5
    return np.where(flip, 1.0 - delta, delta), np.abs(gamma), flip


def output_state(delta, gamma) -> np.ndarray:
    return np.array([[delta, gamma], [gamma, 1.0 - delta]], dtype=complex)


def density(channel: ChannelParams, z: int) -> np.ndarray:
    """Output density matrix of the canonical channel for input bit ``z``."""
    rho = output_state(channel.delta, channel.gamma)
    if z:
        rho = PAULI_X @ rho @ PAULI_X
    return rho


@dataclass(frozen=True)
class HelstromResult:
    projector: np.ndarray
    success: float

    @property
    def error(self) -> float:
        return 1.0 - self.success


def helstrom(rho0, rho1, prior=0.5) -> HelstromResult:
    """Optimal two-outcome measurement between ``rho0`` (prior ``prior``) and ``rho1``.

    The returned projector selects hypothesis 0; null directions of the
    decision operator are assigned to hypothesis 0.
    """
    rho0 = np.asarray(rho0)
    rho1 = np.asarray(rho1)
    gap = prior * rho0 - (1.0 - prior) * rho1
    gap = (gap + gap.conj().T) / 2.0
    evals, evecs = np.linalg.eigh(gap)
    keep = evecs[:, evals >= -_TOL]
    proj = keep @ keep.conj().T
    success = prior * np.trace(proj @ rho0).real + (1.0 - prior) * (
        1.0 - np.trace(proj @ rho1).real
    )
    return HelstromResult(proj, float(success))


def h2(x):
    """Binary entropy in bits with ``0 log 0 = 0``."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(x > 0, -x * np.log2(np.where(x > 0, x, 1.0)), 0.0)
        y = 1.0 - x
        terms = terms + np.where(y > 0, -y * np.log2(np.where(y > 0, y, 1.0)), 0.0)
    return terms if terms.ndim else float(terms)


def capacity(channel: ChannelParams) -> float:
    """Symmetric Holevo capacity in bits per channel use."""
    d, g = channel.delta, channel.gamma
    disc = max(0.0, 1.0 - 4.0 * (d * (1.0 - d) - g * g))
    return float(h2((1.0 + 2.0 * g) / 2.0) - h2((1.0 + np.sqrt(disc)) / 2.0))


def psc_to_bscq(theta) -> ChannelParams:
    """Pure-state channel ``z -> |(-1)^z theta>`` expressed in canonical form."""
    theta = float(theta)
    if not (0.0 <= theta <= np.pi / 2 + 1e-12):
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    theta = min(theta, np.pi / 2)
    return make_channel((1.0 - np.sin(theta)) / 2.0, np.cos(theta) / 2.0)


def psc_angle(channel: ChannelParams) -> float:
    """Inverse of :func:`psc_to_bscq` for pure channels."""
    if not channel.is_pure:
        raise ValueError("channel output is mixed; no pure-state angle exists")
    return float(np.arccos(np.clip(2.0 * channel.gamma, -1.0, 1.0)))


def psc_state(theta, z=0) -> np.ndarray:
    """The qubit ``cos(theta/2)|0> + (-1)^z sin(theta/2)|1>``."""
    sign = -1.0 if z else 1.0
    return np.array([np.cos(theta / 2.0), sign * np.sin(theta / 2.0)], dtype=complex)
