"""Discrete distributions and exact privacy-parameter arithmetic.

Everything in this module is a pure function of explicit probability
vectors: total-variation and KL divergences, the max divergence that
defines pure differential privacy, the additive slack ``delta_at_epsilon``
that defines approximate differential privacy, and 2^n event-enumeration
oracles that cross-check the closed forms on small outcome spaces.

Conventions used throughout the package:

* outcomes are indexed ``0 .. n-1``;
* infinite divergences are reported as ``math.inf`` and NaN never escapes;
* in ratio conventions, ``x/0`` is infinite for ``x > 0`` and ``0/0``
  contributes nothing to a maximum.

All functions are safe for concurrent use: distributions are immutable
after construction and nothing here mutates shared state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: Tolerance for accepting a probability vector as normalized.
NORMALIZATION_TOL = 1e-9

#: Largest universe size accepted by the 2^n event-enumeration oracles.
BRUTE_FORCE_MAX_N = 20

#: Recognized privacy notions. The random notions weigh privacy failures
#: over a data distribution instead of over worst-case neighbors.
NOTIONS = ("pDP", "aDP", "RpDP", "RaDP")


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability vector over the finite outcome set {0, ..., n-1}.

    The vector must be non-negative and sum to 1 within
    ``NORMALIZATION_TOL``. The underlying array is made read-only, so
    instances can be shared freely between threads.
    """

    probs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.probs, dtype=np.float64, copy=True)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("probs must be a non-empty one-dimensional vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("probs must be finite")
        if np.any(arr < 0):
            raise ValueError("probs must be non-negative")
        total = float(arr.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(
                f"probs must sum to 1 within {NORMALIZATION_TOL}; got {total!r}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def n(self) -> int:
        """Number of outcomes."""
        return int(self.probs.size)

    def to_json(self) -> str:
        """Serialize as ``{"n": ..., "probs": [...]}``.

        Floats are written with shortest round-trip precision (up to 17
        significant digits), so ``from_json(to_json(d))`` reproduces the
        vector bit-exactly.
        """
        return json.dumps({"n": self.n, "probs": [float(p) for p in self.probs]})

    @classmethod
    def from_json(cls, doc: str | dict) -> "DiscreteDistribution":
        data = json.loads(doc) if isinstance(doc, str) else doc
        try:
            probs = data["probs"]
        except (KeyError, TypeError):
            raise ValueError("distribution document must contain a probs array")
        if "n" in data and int(data["n"]) != len(probs):
            raise ValueError("n field disagrees with probs length")
        return cls(np.asarray(probs, dtype=np.float64))


@dataclass(frozen=True)
class PrivacyParams:
    """A privacy claim: notion plus the parameters that notion uses.

    Fields not used by the notion must be left at their neutral values
    (``delta=0``, ``gamma=0``), which keeps claims canonical and
    comparable. ``penalty_weight`` is the weight that converts measure of
    failing neighbor pairs into the random notions' test distance.
    """

    epsilon: float = 0.0
    delta: float = 0.0
    gamma: float = 0.0
    penalty_weight: float = 1.0
    notion: str = "pDP"

    def __post_init__(self) -> None:
        if self.notion not in NOTIONS:
            raise ValueError(f"notion must be one of {NOTIONS}")
        if not (self.epsilon >= 0):
            raise ValueError("epsilon must be >= 0")
        if not (0.0 <= self.delta <= 1.0):
            raise ValueError("delta must lie in [0, 1]")
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must lie in [0, 1]")
        if not (self.penalty_weight > 0):
            raise ValueError("penalty_weight must be positive")
        if self.notion in ("pDP", "RpDP") and self.delta != 0.0:
            raise ValueError(f"{self.notion} does not use delta; it must be 0")
        if self.notion in ("pDP", "aDP") and self.gamma != 0.0:
            raise ValueError(f"{self.notion} does not use gamma; it must be 0")


def make_distribution(weights: Sequence[float] | np.ndarray) -> DiscreteDistribution:
    """Normalize non-negative weights into a DiscreteDistribution.

    Raises ValueError on an empty vector, a negative entry, or an all-zero
    vector.
    """
    arr = np.asarray(weights, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("weights must be a non-empty one-dimensional vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("weights must be finite")
    if np.any(arr < 0):
        raise ValueError("weights must be non-negative")
    total = float(arr.sum())
    if total <= 0:
        raise ValueError("weights must have positive total mass")
    return DiscreteDistribution(arr / total)


def _paired(p: DiscreteDistribution, q: DiscreteDistribution) -> tuple[np.ndarray, np.ndarray]:
    if p.n != q.n:
        raise ValueError("distributions must share an outcome universe")
    return p.probs, q.probs


def tv_distance(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Total variation distance, half the L1 distance of the vectors."""
    pa, qa = _paired(p, q)
    return float(0.5 * np.abs(pa - qa).sum())


def kl_divergence(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """KL divergence sum_i p_i ln(p_i / q_i); inf on support mismatch."""
    pa, qa = _paired(p, q)
    support = pa > 0
    if np.any(qa[support] == 0):
        return math.inf
    ps = pa[support]
    # ratios of subnormals can overflow to inf; the resulting inf is the
    # correct value, so only the warning is suppressed
    with np.errstate(over="ignore"):
        return float(np.sum(ps * np.log(ps / qa[support])))


def max_divergence(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Worst-case log likelihood ratio max_{i: p_i > 0} ln(p_i / q_i).

    The maximum over events equals the maximum over single outcomes, so
    this pointwise form is exact. Returns inf if q misses mass somewhere
    p has it.
    """
    pa, qa = _paired(p, q)
    support = pa > 0
    if np.any(qa[support] == 0):
        return math.inf
    with np.errstate(over="ignore"):
        return float(np.max(np.log(pa[support] / qa[support])))


def exact_pdp_epsilon(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Smallest eps such that the pair satisfies eps-pDP in both directions."""
    return max(max_divergence(p, q), max_divergence(q, p))


def delta_at_epsilon_directed(
    p: DiscreteDistribution, q: DiscreteDistribution, eps: float
) -> float:
    """Additive slack of the ordered direction p against e^eps * q.

    This is the mass of the worst event for the one-directional constraint
    P(E) <= e^eps Q(E) + delta: the pointwise sum of positive parts equals
    the single worst event {i : p_i > e^eps q_i}.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    pa, qa = _paired(p, q)
    return float(np.maximum(0.0, pa - math.exp(eps) * qa).sum())


def delta_at_epsilon(p: DiscreteDistribution, q: DiscreteDistribution, eps: float) -> float:
    """Smallest delta making the pair (eps, delta)-aDP, both directions.

    Non-increasing in eps; at eps = 0 it equals the total variation
    distance.
    """
    return max(
        delta_at_epsilon_directed(p, q, eps),
        delta_at_epsilon_directed(q, p, eps),
    )


def _event_masses(probs: np.ndarray) -> np.ndarray:
    """Mass of every one of the 2^n events, indexed by outcome bitmask."""
    sums = np.zeros(1, dtype=np.float64)
    for p in probs:
        sums = np.concatenate([sums, sums + p])
    return sums


def brute_force_delta(
    p: DiscreteDistribution, q: DiscreteDistribution, eps: float
) -> float:
    """Independent oracle for delta_at_epsilon by enumerating all events.

    Maximizes P(E) - e^eps Q(E) over all 2^n events and both ordered
    directions, floored at zero. Only valid for n <= BRUTE_FORCE_MAX_N.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    pa, qa = _paired(p, q)
    if p.n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute-force enumeration is capped at n <= {BRUTE_FORCE_MAX_N}")
    mp = _event_masses(pa)
    mq = _event_masses(qa)
    scale = math.exp(eps)
    fwd = float(np.max(mp - scale * mq))
    rev = float(np.max(mq - scale * mp))
    return max(0.0, fwd, rev)


def approx_max_divergence_bruteforce(
    p: DiscreteDistribution, q: DiscreteDistribution, delta: float
) -> float:
    """Delta-approximate max divergence by enumerating all events.

    Computes sup over events E with P(E) >= delta of
    ln((P(E) - delta) / Q(E)). An event with positive numerator and zero
    Q-mass drives the supremum to inf; events whose numerator is zero
    contribute ln 0 and are dominated unless every qualifying event has
    zero numerator, in which case the supremum is -inf. Raises if no
    event qualifies (delta > 1) or n exceeds BRUTE_FORCE_MAX_N.
    """
    if not (0.0 <= delta <= 1.0):
        raise ValueError("delta must lie in [0, 1]")
    pa, qa = _paired(p, q)
    if p.n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute-force enumeration is capped at n <= {BRUTE_FORCE_MAX_N}")
    mp = _event_masses(pa)
    mq = _event_masses(qa)
    qualifying = mp >= delta
    if not np.any(qualifying):
        raise ValueError("no event has mass at least delta")
    best = -math.inf
    numer = mp[qualifying] - delta
    denom = mq[qualifying]
    positive = numer > 0
    if np.any(positive & (denom == 0)):
        return math.inf
    usable = positive & (denom > 0)
    if np.any(usable):
        best = float(np.max(np.log(numer[usable] / denom[usable])))
    return best


def min_mass(dists: Iterable[DiscreteDistribution]) -> float:
    """Minimum entry across all given distributions (zero entries count)."""
    values = [float(d.probs.min()) for d in dists]
    if not values:
        raise ValueError("min_mass needs at least one distribution")
    return min(values)
