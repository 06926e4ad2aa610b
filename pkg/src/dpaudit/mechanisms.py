"""Two-database mechanisms as seeded sampling oracles.

A mechanism pair wraps the two output distributions a randomized
algorithm induces on a pair of neighboring databases. Testers interact
with a pair exclusively through :meth:`MechanismPair.draw`; the ``truth``
attribute exists so harnesses and certification code can reach the
underlying distributions, and is off limits to testers by convention.

The zoo constructors below cover the standard simulation subjects:
randomized response, a truncated geometric ladder, a mechanism leaking
through a rare outcome, and explicit distribution pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import DiscreteDistribution, make_distribution


class MechanismPair:
    """Sampling access to the two databases of a mechanism.

    Same seed reproduces identical sample streams; the two databases use
    independent PRNG substreams, so their draws are independent. Query
    accounting is exact: ``query_counter[b]`` is the total number of
    samples drawn from database ``b``.

    Instances own mutable stream and counter state, so a pair must not be
    shared by concurrent callers; parallel trials should each
    :meth:`spawn` their own pair.
    """

    def __init__(
        self,
        p0: DiscreteDistribution,
        p1: DiscreteDistribution,
        seed: int = 0,
    ) -> None:
        if p0.n != p1.n:
            raise ValueError("databases must share an outcome universe")
        self.n = p0.n
        self.truth: tuple[DiscreteDistribution, DiscreteDistribution] = (p0, p1)
        self.seed = seed
        s0, s1 = np.random.SeedSequence(seed).spawn(2)
        self._rngs = (np.random.default_rng(s0), np.random.default_rng(s1))
        # multinomial requires exactly normalized pvals
        self._pvals = (p0.probs / p0.probs.sum(), p1.probs / p1.probs.sum())
        self.query_counter = [0, 0]

    def draw(self, db: int, count: int) -> np.ndarray:
        """Histogram of ``count`` fresh i.i.d. samples from database ``db``."""
        if db not in (0, 1):
            raise ValueError("db must be 0 or 1")
        count = int(count)
        if count < 0:
            raise ValueError("count must be >= 0")
        self.query_counter[db] += count
        if count == 0:
            return np.zeros(self.n, dtype=np.int64)
        return self._rngs[db].multinomial(count, self._pvals[db])

    def spawn(self, seed: int) -> "MechanismPair":
        """Fresh pair over the same truth with its own streams and counters."""
        return MechanismPair(self.truth[0], self.truth[1], seed=seed)

    def __repr__(self) -> str:
        return f"MechanismPair(n={self.n}, seed={self.seed})"


def from_distributions(
    p0: DiscreteDistribution, p1: DiscreteDistribution, seed: int = 0
) -> MechanismPair:
    """Mechanism pair with the given ground-truth output distributions."""
    return MechanismPair(p0, p1, seed=seed)


def draw(mech: MechanismPair, db: int, count: int) -> np.ndarray:
    """Function form of :meth:`MechanismPair.draw`."""
    return mech.draw(db, count)


def randomized_response(flip_prob: float, seed: int = 0) -> MechanismPair:
    """Binary randomized response: report the bit, flipped w.p. flip_prob.

    flip_prob must lie strictly inside (0, 0.5); the pair is exactly
    eps-pDP with eps = ln((1-flip_prob)/flip_prob).
    """
    if not (0.0 < flip_prob < 0.5):
        raise ValueError("flip_prob must lie strictly inside (0, 0.5)")
    p0 = DiscreteDistribution(np.array([1.0 - flip_prob, flip_prob]))
    p1 = DiscreteDistribution(np.array([flip_prob, 1.0 - flip_prob]))
    return MechanismPair(p0, p1, seed=seed)


def truncated_geometric(eps: float, n: int, seed: int = 0) -> MechanismPair:
    """Two-sided geometric ladder truncated to n outcomes, adjacent centers.

    Database b puts mass proportional to exp(-eps * |i - c_b|) on outcome
    i, with centers c0 = n/2 - 1 and c1 = n/2 (zero-based). n must be even
    and >= 2: even n makes the two normalizers equal by symmetry, which is
    what keeps every outcome ratio within e^{+-eps}; odd n would break the
    eps-pDP contract through unequal normalization.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be an even integer >= 2")
    c0 = n // 2 - 1
    c1 = c0 + 1
    idx = np.arange(n, dtype=np.float64)
    w0 = np.exp(-eps * np.abs(idx - c0))
    w1 = np.exp(-eps * np.abs(idx - c1))
    return MechanismPair(make_distribution(w0), make_distribution(w1), seed=seed)


def leaky_mechanism(delta: float, n: int = 3, seed: int = 0) -> MechanismPair:
    """Identical mechanisms except a mass-delta leak onto distinct outcomes.

    Database 0 puts delta on outcome 1 and database 1 puts it on outcome 2;
    both put 1-delta on outcome 0. The pair has additive slack exactly
    delta at every eps, making it a clean soundness target.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie strictly inside (0, 1)")
    if n < 3:
        raise ValueError("n must be >= 3")
    v0 = np.zeros(n)
    v1 = np.zeros(n)
    v0[0] = v1[0] = 1.0 - delta
    v0[1] = delta
    v1[2] = delta
    return MechanismPair(DiscreteDistribution(v0), DiscreteDistribution(v1), seed=seed)


@dataclass(frozen=True)
class SideInfo:
    """Claimed output distributions handed to full-information testers."""

    q0: DiscreteDistribution
    q1: DiscreteDistribution

    def __post_init__(self) -> None:
        if self.q0.n != self.q1.n:
            raise ValueError("claimed distributions must share an outcome universe")

    @property
    def n(self) -> int:
        return self.q0.n

    def to_json(self) -> str:
        import json

        return json.dumps(
            {
                "q0": {"n": self.q0.n, "probs": [float(p) for p in self.q0.probs]},
                "q1": {"n": self.q1.n, "probs": [float(p) for p in self.q1.probs]},
            }
        )

    @classmethod
    def from_json(cls, doc: str | dict) -> "SideInfo":
        import json

        data = json.loads(doc) if isinstance(doc, str) else doc
        if not isinstance(data, dict) or "q0" not in data or "q1" not in data:
            raise ValueError("side info document must contain q0 and q1")
        return cls(
            DiscreteDistribution.from_json(data["q0"]),
            DiscreteDistribution.from_json(data["q1"]),
        )


def mechanism_from_config(config: dict, seed: int = 0) -> MechanismPair:
    """Build a zoo mechanism from a JSON-style config document.

    Recognized forms:

    * ``{"mechanism": "randomized_response", "flip_prob": 0.25}``
    * ``{"mechanism": "truncated_geometric", "eps": 0.1, "n": 4}``
    * ``{"mechanism": "leaky_mechanism", "delta": 0.2, "n": 3}``
    * ``{"mechanism": "explicit", "p0": {...}, "p1": {...}}``
    """
    if not isinstance(config, dict) or "mechanism" not in config:
        raise ValueError("mechanism config must be an object with a mechanism field")
    kind = config["mechanism"]
    if kind == "randomized_response":
        return randomized_response(float(config["flip_prob"]), seed=seed)
    if kind == "truncated_geometric":
        return truncated_geometric(float(config["eps"]), int(config["n"]), seed=seed)
    if kind == "leaky_mechanism":
        return leaky_mechanism(float(config["delta"]), int(config.get("n", 3)), seed=seed)
    if kind == "explicit":
        return from_distributions(
            DiscreteDistribution.from_json(config["p0"]),
            DiscreteDistribution.from_json(config["p1"]),
            seed=seed,
        )
    raise ValueError(f"unknown mechanism kind {kind!r}")
