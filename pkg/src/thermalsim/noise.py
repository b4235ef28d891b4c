"""Two-qubit gate noise: angle-dependent error rates and Pauli channels.

Gate error rates follow the measured linear-in-angle law
p(angle) = p0 + p1 * |angle| (average gate infidelity).  A two-qubit
depolarizing channel with parameter lam mixes toward the maximally mixed
pair state; the conversions are

    average gate infidelity  p  = 3 lam / 4
    process infidelity           = 15 lam / 16 = 5 p / 4

and in Kraus form the channel applies each of the 15 non-identity
two-site Paulis with probability lam / 16.  The ``variant_channels``
constructor instead takes the *total* Pauli-error probability p and
spreads it as p/15 over all Paulis (depolarizing), or p/3 over the Z-type
(phase flip) or X-type (bit flip) subsets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .circuits import PAULI_1Q

TWO_SITE_PAULIS = tuple(a + b for a, b in itertools.product("IXYZ", repeat=2) if a + b != "II")
PHASE_FLIP_PAULIS = ("ZI", "IZ", "ZZ")
BIT_FLIP_PAULIS = ("XI", "IX", "XX")

# numerical defaults used throughout the simulations (older benchmark fit)
DEFAULT_P0 = 3.5e-4
DEFAULT_P1 = 9.5e-4


def lambda_from_infidelity(p: float) -> float:
    return 4.0 * p / 3.0


def process_infidelity(lam: float) -> float:
    return 15.0 * lam / 16.0


def infidelity_conversions(p: float) -> tuple[float, float]:
    """(depolarizing lambda, process infidelity) for an average gate infidelity."""
    lam = lambda_from_infidelity(p)
    return lam, process_infidelity(lam)


@dataclass(frozen=True)
class BranchChannel:
    """A stochastic Pauli channel on a gate's two sites.

    Branch probabilities are state-independent because every Kraus
    operator is a scalar multiple of a Pauli.
    """

    paulis: tuple[str, ...]
    probs: np.ndarray  # conditional on a jump, sums to 1
    jump_probability: float

    def sample(self, rng: np.random.Generator) -> str | None:
        """One branch draw; None is the identity branch."""
        u = rng.uniform()
        if u >= self.jump_probability:
            return None
        return self.paulis[_pick(self.probs, u / self.jump_probability)]

    def sample_conditional(self, rng: np.random.Generator) -> str:
        return self.paulis[_pick(self.probs, rng.uniform())]


def _pick(probs: np.ndarray, u: float) -> int:
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            return i
    return len(probs) - 1


@dataclass(frozen=True)
class NoiseModel:
    """Angle-dependent two-qubit noise attached after every two-qubit gate.

    ``p0``/``p1`` parameterize the average gate infidelity p(angle); for
    the depolarizing kind the channel is the lam = 4p/3 depolarizer, for
    the flip kinds p(angle) is used directly as the total flip probability.
    Single-qubit gates are treated as noiseless.
    """

    p0: float
    p1: float
    kind: str = "depolarizing"

    def __post_init__(self):
        if self.kind not in ("depolarizing", "phase_flip", "bit_flip"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.p0 < 0 or self.p1 < 0:
            raise ValueError("infidelity parameters must be nonnegative")

    def gate_error(self, angle: float) -> float:
        p = self.p0 + self.p1 * abs(angle)
        if p >= 1.0:
            raise ValueError(f"gate error {p} out of range at angle {angle}")
        return p

    def channel(self, angle: float) -> BranchChannel:
        p = self.gate_error(angle)
        if self.kind == "depolarizing":
            lam = lambda_from_infidelity(p)
            jump = 15.0 * lam / 16.0
            return BranchChannel(TWO_SITE_PAULIS, np.full(15, 1.0 / 15.0), jump)
        paulis = PHASE_FLIP_PAULIS if self.kind == "phase_flip" else BIT_FLIP_PAULIS
        return BranchChannel(paulis, np.full(3, 1.0 / 3.0), p)


def fixed_depolarizing(lam: float) -> "FixedChannelNoise":
    """Angle-independent depolarizing noise with the given lambda."""
    if not 0.0 <= lam <= 16.0 / 15.0:
        raise ValueError("lambda out of [0, 16/15]")
    jump = 15.0 * lam / 16.0
    return FixedChannelNoise(BranchChannel(TWO_SITE_PAULIS, np.full(15, 1.0 / 15.0), jump))


@dataclass(frozen=True)
class FixedChannelNoise:
    _channel: BranchChannel

    def channel(self, angle: float) -> BranchChannel:
        return self._channel


def variant_channels(kind: str, p: float) -> list[np.ndarray]:
    """Kraus operators for a total Pauli-error probability p.

    depolarizing: p/15 for each non-identity two-site Pauli; phase_flip:
    p/3 for ZI, IZ, ZZ; bit_flip: p/3 for XI, IX, XX.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("probability out of [0, 1]")
    if kind == "depolarizing":
        branches = [(p / 15.0, w) for w in TWO_SITE_PAULIS]
    elif kind == "phase_flip":
        branches = [(p / 3.0, w) for w in PHASE_FLIP_PAULIS]
    elif kind == "bit_flip":
        branches = [(p / 3.0, w) for w in BIT_FLIP_PAULIS]
    else:
        raise ValueError(f"unknown channel kind {kind!r}")
    kraus = [math.sqrt(1.0 - p) * np.eye(4, dtype=complex)]
    kraus += [math.sqrt(q) * _two_site_matrix(w) for q, w in branches]
    return kraus


def variant_branch_probs(kind: str, p: float) -> list[tuple[str, float]]:
    """(pauli, probability) pairs of the non-identity branches."""
    kraus_words = {
        "depolarizing": [(w, p / 15.0) for w in TWO_SITE_PAULIS],
        "phase_flip": [(w, p / 3.0) for w in PHASE_FLIP_PAULIS],
        "bit_flip": [(w, p / 3.0) for w in BIT_FLIP_PAULIS],
    }
    if kind not in kraus_words:
        raise ValueError(f"unknown channel kind {kind!r}")
    return [(w, q) for w, q in kraus_words[kind]]


def depolarizing_kraus(lam: float) -> list[np.ndarray]:
    """16 weighted-Pauli Kraus operators of the two-qubit depolarizer."""
    if not 0.0 <= lam <= 16.0 / 15.0:
        raise ValueError("lambda out of [0, 16/15]")
    kraus = [math.sqrt(1.0 - 15.0 * lam / 16.0) * np.eye(4, dtype=complex)]
    kraus += [math.sqrt(lam / 16.0) * _two_site_matrix(w) for w in TWO_SITE_PAULIS]
    return kraus


def _two_site_matrix(word: str) -> np.ndarray:
    return np.kron(PAULI_1Q[word[1]], PAULI_1Q[word[0]])  # site order: low bit first


@dataclass(frozen=True)
class GeometryConstants:
    """Dimension- and geometry-dependent prefactors of the gate-count
    estimates; the counting arguments leave them symbolic."""

    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    alpha: float = 1.0


def effective_gate_counts(d: int, n: int, t: float, tau: float,
                          constants: GeometryConstants = GeometryConstants(),
                          velocity: str = "circuit", v_b: float = 1.0) -> float:
    """Effective causally-relevant two-qubit gate count.

    Early times count the gates inside the causal cone of one observable
    (growing as t^{d+1}); once the cone covers the system the count turns
    over to the extensive N t / tau form.  The ``butterfly`` variant
    shrinks the cone to the physical spreading velocity v_b, which reduces
    the early-time count by tau^d and delays the crossover.
    """
    if t < 0 or tau <= 0:
        raise ValueError("need t >= 0 and tau > 0")
    k = constants
    if velocity == "circuit":
        t_cross = k.b * n ** (1.0 / d) * tau
        if t <= t_cross:
            return k.a * (t / tau) ** (d + 1)
        return k.c * n ** (1.0 + 1.0 / d) + k.alpha * n * t / tau
    if velocity == "butterfly":
        if v_b <= 0:
            raise ValueError("butterfly velocity must be positive")
        t_cross = k.b * n ** (1.0 / d) / v_b
        if t <= t_cross:
            return k.a * v_b**d * t ** (d + 1) / tau
        return k.c / (v_b * tau) * n ** (1.0 + 1.0 / d) + k.alpha * n * t / tau
    raise ValueError(f"unknown velocity model {velocity!r}")
