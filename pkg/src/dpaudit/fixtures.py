"""Hardness fixtures: paired instances that stress or defeat the testers.

Each builder returns a FixturePair holding a private instance (meets the
privacy claim) and a far instance (violates it by at least the stated
margin), together with a certification report computed by the exact
divergence oracles at construction time. Construction fails with
CertificationError if any certified quantity misses its target, so a
fixture that exists is a fixture that has been verified.

Outcome label convention: the distinguished outcomes are indices 0, 1, 2
of the probability vectors; block fixtures lay their three index ranges
out contiguously.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import (
    BRUTE_FORCE_MAX_N,
    DiscreteDistribution,
    PrivacyParams,
    brute_force_delta,
    delta_at_epsilon,
    delta_at_epsilon_directed,
    exact_pdp_epsilon,
    kl_divergence,
    min_mass,
    tv_distance,
)
from .mechanisms import MechanismPair, SideInfo, mechanism_from_config

#: Absolute tolerance for "exactly" in certification checks.
CERT_TOL = 1e-12


class CertificationError(Exception):
    """A fixture's construction-time verification failed."""


def _certify(ok: bool, message: str) -> None:
    if not ok:
        raise CertificationError(message)


def _dist(values) -> DiscreteDistribution:
    return DiscreteDistribution(np.asarray(values, dtype=np.float64))


@dataclass(frozen=True)
class FixturePair:
    """A certified (private instance, far instance) pair for one claim."""

    private_instance: MechanismPair
    far_instance: MechanismPair
    params: dict
    claim: PrivacyParams
    certification: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "claim": {
                "epsilon": self.claim.epsilon,
                "delta": self.claim.delta,
                "gamma": self.claim.gamma,
                "penalty_weight": self.claim.penalty_weight,
                "notion": self.claim.notion,
            },
            "params": dict(self.params),
            "private": {
                "p0": self.private_instance.truth[0].to_json(),
                "p1": self.private_instance.truth[1].to_json(),
            },
            "far": {
                "p0": self.far_instance.truth[0].to_json(),
                "p1": self.far_instance.truth[1].to_json(),
            },
            "certification": dict(self.certification),
        }


def pdp_unverifiable_fixture(
    eps: float, alpha: float, A: float, seed: int = 0
) -> FixturePair:
    """Two pDP instances no sample-bounded tester can tell apart.

    Both instances share database 0; their database-1 distributions put
    e^{-A} versus e^{-2A} mass on outcome 0, so they differ only on an
    outcome that essentially never appears, yet one pair is eps-pDP and
    the other has privacy parameter A - eps. Separating them needs on
    the order of e^A / A samples.

    Requires A > 2 eps + alpha (so the far instance really is far) and
    A >= ln(1 + e^{-eps}) (so the private instance's outcome-1 ratio
    stays within eps; very small A breaks that side).
    """
    if eps < 0 or alpha <= 0:
        raise ValueError("eps must be >= 0 and alpha positive")
    if A <= 2.0 * eps + alpha:
        raise ValueError("A must exceed 2 * eps + alpha")
    if A < math.log(1.0 + math.exp(-eps)):
        raise ValueError("A must be at least ln(1 + e^-eps)")

    p0 = _dist([math.exp(-A - eps), 1.0 - math.exp(-A - eps)])
    p1 = _dist([math.exp(-A), 1.0 - math.exp(-A)])
    q1 = _dist([math.exp(-2.0 * A), 1.0 - math.exp(-2.0 * A)])

    private = MechanismPair(p0, p1, seed=seed)
    far = MechanismPair(p0, q1, seed=seed + 1)

    eps_private = exact_pdp_epsilon(p0, p1)
    eps_far = exact_pdp_epsilon(p0, q1)
    _certify(eps_private <= eps + CERT_TOL, "private instance exceeds eps")
    _certify(abs(eps_far - (A - eps)) <= CERT_TOL, "far instance is not A - eps")
    _certify(eps_far >= eps + alpha - CERT_TOL, "far instance is not alpha-far")

    return FixturePair(
        private_instance=private,
        far_instance=far,
        params={
            "eps": eps,
            "alpha": alpha,
            "A": A,
            "kl_p1_q1": kl_divergence(p1, q1),
        },
        claim=PrivacyParams(epsilon=eps, notion="pDP"),
        certification={
            "eps_private": eps_private,
            "eps_far": eps_far,
            "rare_outcome_mass": float(p1.probs[0]),
        },
    )


def adp_twopoint_fixture(
    eps: float, delta: float, alpha: float, seed: int = 0
) -> FixturePair:
    """Two-outcome aDP pair whose slack is tight in one direction.

    Database 0 is uniform; database 1 bumps outcome 0 to e^eps/2 + delta
    (private) or e^eps/2 + delta + alpha (far), making the directed slack
    from database 1 to database 0 exactly delta, respectively
    delta + alpha. The direction-symmetric slack is strictly larger (the
    reverse direction of the private pair already exceeds delta); the
    certification reports both, and the fixture's tightness claims are
    about the directed value.
    """
    if eps < 0 or delta < 0 or alpha <= 0:
        raise ValueError("eps, delta must be >= 0 and alpha positive")
    if math.exp(eps) / 2.0 + delta + alpha >= 1.0:
        raise ValueError("need e^eps / 2 + delta + alpha < 1")

    uniform = _dist([0.5, 0.5])
    bump = math.exp(eps) / 2.0
    p1 = _dist([bump + delta, 1.0 - bump - delta])
    q1 = _dist([bump + delta + alpha, 1.0 - bump - delta - alpha])

    private = MechanismPair(uniform, p1, seed=seed)
    far = MechanismPair(uniform, q1, seed=seed + 1)

    d_private = delta_at_epsilon_directed(p1, uniform, eps)
    d_far = delta_at_epsilon_directed(q1, uniform, eps)
    _certify(abs(d_private - delta) <= CERT_TOL, "private directed slack != delta")
    _certify(
        abs(d_far - (delta + alpha)) <= CERT_TOL, "far directed slack != delta + alpha"
    )

    return FixturePair(
        private_instance=private,
        far_instance=far,
        params={"eps": eps, "delta": delta, "alpha": alpha, "kl_p1_q1": kl_divergence(p1, q1)},
        claim=PrivacyParams(epsilon=eps, delta=delta, notion="aDP"),
        certification={
            "delta_directed_private": d_private,
            "delta_directed_far": d_far,
            "delta_two_sided_private": delta_at_epsilon(uniform, p1, eps),
            "delta_two_sided_far": delta_at_epsilon(uniform, q1, eps),
        },
    )


def adp_lowfreq_fixture(
    n: int, delta: float, alpha: float, seed: int = 0
) -> FixturePair:
    """Low-frequency aDP pair: the violation hides on mass-3a/n outcomes.

    The universe splits into three equal blocks. The shared distribution
    spreads mass a over block 1 and 1 - a over block 2; the far pair's
    second distribution relocates block 1's mass to block 3. The two
    pairs agree on every outcome of probability above 3a/n, which forces
    any tester to see on the order of n samples before the difference
    surfaces.

    With a = (2 delta + alpha) / 3 and eta = (delta - alpha) / 3, each
    direction of the far pair has slack exactly a and the two directions
    sum to 2a >= delta + alpha; the private pair's slack is 0. The
    certification records both the per-direction value and the sum.
    """
    if n < 3 or n % 3 != 0:
        raise ValueError("n must be a positive multiple of 3")
    if not (0.0 < alpha < delta <= 1.0):
        raise ValueError("need 0 < alpha < delta <= 1")

    a = (2.0 * delta + alpha) / 3.0
    eta = (delta - alpha) / 3.0
    block = n // 3
    lo_mass = 3.0 * a / n
    hi_mass = 3.0 * (1.0 - a) / n

    shared = np.zeros(n)
    shared[:block] = lo_mass
    shared[block : 2 * block] = hi_mass
    moved = np.zeros(n)
    moved[block : 2 * block] = hi_mass
    moved[2 * block :] = lo_mass
    x = _dist(shared)
    y = _dist(moved)

    private = MechanismPair(x, x, seed=seed)
    far = MechanismPair(x, y, seed=seed + 1)

    d_private = delta_at_epsilon(x, x, 0.0)
    d_fwd = delta_at_epsilon_directed(x, y, 0.0)
    d_rev = delta_at_epsilon_directed(y, x, 0.0)
    _certify(d_private <= CERT_TOL, "private pair has nonzero slack")
    _certify(abs(d_fwd - a) <= CERT_TOL, "far forward slack != a")
    _certify(abs(d_rev - a) <= CERT_TOL, "far reverse slack != a")
    _certify(
        d_fwd + d_rev >= delta + alpha - CERT_TOL,
        "far pair's direction sum is below delta + alpha",
    )
    brute_checked = n <= BRUTE_FORCE_MAX_N
    if brute_checked:
        _certify(
            abs(brute_force_delta(x, y, 0.0) - a) <= CERT_TOL,
            "brute-force slack disagrees with the pointwise oracle",
        )

    return FixturePair(
        private_instance=private,
        far_instance=far,
        params={
            "n": n,
            "delta": delta,
            "alpha": alpha,
            "a": a,
            "b": 2.0 * a,
            "eta": eta,
            "low_mass": lo_mass,
            "high_mass": hi_mass,
        },
        claim=PrivacyParams(epsilon=0.0, delta=delta, notion="aDP"),
        certification={
            "delta_private": d_private,
            "delta_far_forward": d_fwd,
            "delta_far_reverse": d_rev,
            "delta_far_direction_sum": d_fwd + d_rev,
            "brute_force_checked": brute_checked,
        },
    )


def fi_pdp_fixture(
    eps: float, alpha: float, beta: float, seed: int = 0
) -> tuple[SideInfo, FixturePair]:
    """Full-information pDP fixture: claimed distributions plus two truths.

    The claimed pair puts beta on each of two distinguished outcomes in
    database 0 and tilts them by e^{+-eps} in database 1, so its exact
    privacy parameter is eps on the nose. The far truth multiplies the
    first outcome's database-0 mass by e^{-alpha}, moving the worst
    ratio to exactly eps + alpha while staying within KL beta * alpha^2
    of the claim, the gap that forces Omega(1/(beta alpha^2)) samples.
    """
    if not (0.0 < eps < math.log(2.0)):
        raise ValueError("eps must lie strictly inside (0, ln 2)")
    if not (0.0 < beta < 0.5):
        raise ValueError("beta must lie strictly inside (0, 1/2)")
    if beta > 1.0 / (1.0 + math.exp(eps)):
        raise ValueError("beta must be at most 1 / (1 + e^eps)")
    if alpha <= 0:
        raise ValueError("alpha must be positive")

    e_pos, e_neg, e_neg_a = math.exp(eps), math.exp(-eps), math.exp(-alpha)
    q0 = _dist([beta, beta, 1.0 - 2.0 * beta])
    q1 = _dist([e_pos * beta, e_neg * beta, 1.0 - (e_pos + e_neg) * beta])
    p0_far = _dist([e_neg_a * beta, (2.0 - e_neg_a) * beta, 1.0 - 2.0 * beta])

    side = SideInfo(q0, q1)
    private = MechanismPair(q0, q1, seed=seed)
    far = MechanismPair(p0_far, q1, seed=seed + 1)

    eps_side = exact_pdp_epsilon(q0, q1)
    eps_far = exact_pdp_epsilon(p0_far, q1)
    kl_gap = kl_divergence(p0_far, q0)
    _certify(abs(eps_side - eps) <= CERT_TOL, "claimed pair is not exactly eps-pDP")
    _certify(
        abs(eps_far - (eps + alpha)) <= CERT_TOL,
        "far truth is not exactly (eps + alpha)-pDP",
    )
    _certify(kl_gap <= beta * alpha * alpha + CERT_TOL, "KL gap exceeds beta alpha^2")

    pair = FixturePair(
        private_instance=private,
        far_instance=far,
        params={"eps": eps, "alpha": alpha, "beta": beta, "kl_p0far_q0": kl_gap},
        claim=PrivacyParams(epsilon=eps, notion="pDP"),
        certification={
            "eps_side": eps_side,
            "eps_far": eps_far,
            "min_mass_side": min_mass([q0, q1]),
        },
    )
    return side, pair


def mean_sideinfo_fixture(
    eps: float, alpha: float, A: float, base: MechanismPair, seed: int = 0
) -> FixturePair:
    """Mixture fixture with matching low-order behavior but infinite eps.

    The far instance leaks e^{-A} of database 0's mass onto the last
    outcome, which database 1 never emits, so its true privacy parameter
    is infinite while every sampled statistic (means included) matches
    the private instance to within e^{-A}. The base pair must be eps-pDP
    and put zero mass on the last outcome in both databases.
    """
    if eps < 0 or alpha <= 0 or A <= 0:
        raise ValueError("eps must be >= 0, alpha and A positive")
    p0, p1 = base.truth
    if p0.probs[-1] != 0.0 or p1.probs[-1] != 0.0:
        raise ValueError("base must put zero mass on the last outcome")
    eps_base = exact_pdp_epsilon(p0, p1)
    if eps_base > eps + CERT_TOL:
        raise ValueError("base mechanism is not eps-pDP")

    leak = math.exp(-A)
    q0 = np.array(p0.probs) * (1.0 - leak)
    q0[-1] = leak
    q0d = _dist(q0)

    private = MechanismPair(p0, p1, seed=seed)
    far = MechanismPair(q0d, p1, seed=seed + 1)

    eps_far = exact_pdp_epsilon(q0d, p1)
    tv_gap = tv_distance(p0, q0d)
    _certify(math.isinf(eps_far), "far instance should have infinite parameter")
    _certify(abs(tv_gap - leak) <= CERT_TOL, "TV gap is not exactly e^-A")

    return FixturePair(
        private_instance=private,
        far_instance=far,
        params={"eps": eps, "alpha": alpha, "A": A, "leak_mass": leak},
        claim=PrivacyParams(epsilon=eps, notion="pDP"),
        certification={
            "eps_private": eps_base,
            "eps_far": eps_far,
            "tv_p0_q0": tv_gap,
        },
    )


def tight_perturbation(
    p0: DiscreteDistribution,
    p1: DiscreteDistribution,
    eps: float,
    alpha: float,
) -> tuple[DiscreteDistribution, DiscreteDistribution, dict]:
    """Perturb a pair within TV alpha so its slack grows by exactly alpha.

    Works whenever the pair's slack is positive and
    alpha <= (1 - slack) / (1 + e^eps). The perturbed pair (returned with
    a report dict) satisfies TV(p0, q0) <= alpha and TV(p1, q1) <= alpha
    and has direction-symmetric slack exactly slack + alpha, certified to
    1e-12 by the oracle before returning.

    Preferred move: scale alpha e^{-eps} of the second distribution's
    mass out of the witness event, which raises the forward slack by
    exactly alpha and provably cannot push the reverse direction past it.
    When the witness event carries too little of that mass, fall back to
    shifting the first distribution's mass into the event, sized by
    bisection because the removal side can wake up the reverse direction.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    fwd0 = delta_at_epsilon_directed(p0, p1, eps)
    rev0 = delta_at_epsilon_directed(p1, p0, eps)
    base = max(fwd0, rev0)
    if base <= 0.0:
        raise ValueError("pair must have positive slack")
    if alpha > (1.0 - base) / (1.0 + math.exp(eps)):
        raise ValueError("alpha exceeds (1 - slack) / (1 + e^eps)")

    swapped = rev0 > fwd0
    hi, lo = (p1.probs, p0.probs) if swapped else (p0.probs, p1.probs)
    scale = math.exp(eps)
    event = hi > scale * lo
    target = base + alpha

    t = alpha * math.exp(-eps)
    if float(lo[event].sum()) >= t:
        # Drain t of the low distribution's event mass; the forward
        # witness gains e^eps * t = alpha and the reverse direction can
        # rise by at most t, which stays below the new forward value.
        lo_new = lo.copy()
        lo_new[event] *= 1.0 - t / float(lo[event].sum())
        outside_mass = float(lo[~event].sum())
        if outside_mass > 0.0:
            lo_new[~event] *= 1.0 + t / outside_mass
        else:
            receiver = int(np.argmax(np.where(event, -np.inf, hi)))
            lo_new[receiver] += t
        hi_new = hi
        info = {"branch": "drain_low", "moved": t}
    else:
        # Move mass of the high distribution into the event. The removal
        # outside the event can enlarge the reverse direction, so find
        # the exact perturbation size by bisection on the TV budget.
        event_mass = float(hi[event].sum())
        outside_mass = float(hi[~event].sum())
        if outside_mass < alpha:
            raise ValueError("no room outside the witness event")

        def at(theta: float) -> np.ndarray:
            out = hi.copy()
            out[event] *= 1.0 + theta * alpha / event_mass
            out[~event] *= 1.0 - theta * alpha / outside_mass
            return out

        def slack(theta: float) -> float:
            q = at(theta)
            f = float(np.maximum(0.0, q - scale * lo).sum())
            r = float(np.maximum(0.0, lo - scale * q).sum())
            return max(f, r)

        low_theta, high_theta = 0.0, 1.0
        # the full move always reaches the target in real arithmetic
        # (the witness side gains exactly alpha at theta = 1); leave one
        # order of magnitude under CERT_TOL for rounding in the sums
        if slack(1.0) < target - 1e-13:
            raise ValueError("perturbation cannot reach the target slack")
        for _ in range(200):
            mid = 0.5 * (low_theta + high_theta)
            if slack(mid) < target:
                low_theta = mid
            else:
                high_theta = mid
        hi_new = at(high_theta)
        lo_new = lo
        info = {"branch": "grow_high", "theta": high_theta}

    q_hi = _dist(hi_new)
    q_lo = _dist(lo_new)
    q0, q1 = (q_lo, q_hi) if swapped else (q_hi, q_lo)

    achieved = delta_at_epsilon(q0, q1, eps)
    tv0, tv1 = tv_distance(p0, q0), tv_distance(p1, q1)
    _certify(abs(achieved - target) <= CERT_TOL, "perturbed slack is not base + alpha")
    _certify(tv0 <= alpha + CERT_TOL and tv1 <= alpha + CERT_TOL, "TV budget exceeded")
    info.update({"base_slack": base, "achieved": achieved, "tv0": tv0, "tv1": tv1})
    return q0, q1, info


def distinguish(
    tester,
    mech: MechanismPair,
    unknown_db_samples: np.ndarray,
    r: int,
    rng: np.random.Generator,
) -> int:
    """Decide which database a batch of samples came from.

    Verification implies distinguishing: draw a fresh reference batch
    from database 0 and hand (unknown, reference) to a two-histogram
    tester as if they were a mechanism's two databases. Samples from
    database 0 form an identical pair (accept, return 0); samples from
    database 1 of a far pair recreate the violation (reject, return 1).

    ``tester`` is a counts-level decision function
    ``tester(x, y, r, rng) -> TestOutcome`` with per-database budget r.
    """
    counts = np.asarray(unknown_db_samples)
    if int(counts.sum()) != r:
        raise ValueError("unknown sample count does not match the budget r")
    reference = mech.draw(0, r)
    outcome = tester(counts, reference, r, rng)
    return 0 if outcome.accepted else 1


#: CLI-facing fixture registry: name -> (builder, needs_base_mechanism).
FIXTURE_NAMES = (
    "pdp-unverifiable",
    "adp-twopoint",
    "adp-lowfreq",
    "fi-pdp",
    "mean-sideinfo",
)


def build_fixture(
    name: str, params: dict, seed: int = 0
) -> tuple[FixturePair, SideInfo | None]:
    """Build a fixture by registry name from a flat parameter mapping.

    mean-sideinfo expects a ``base`` entry holding a mechanism config
    document; fi-pdp returns its side information alongside the pair.
    """
    params = dict(params)
    if name == "pdp-unverifiable":
        return (
            pdp_unverifiable_fixture(
                float(params["eps"]),
                float(params["alpha"]),
                float(params["A"]),
                seed=seed,
            ),
            None,
        )
    if name == "adp-twopoint":
        return (
            adp_twopoint_fixture(
                float(params["eps"]),
                float(params["delta"]),
                float(params["alpha"]),
                seed=seed,
            ),
            None,
        )
    if name == "adp-lowfreq":
        return (
            adp_lowfreq_fixture(
                int(params["n"]),
                float(params["delta"]),
                float(params["alpha"]),
                seed=seed,
            ),
            None,
        )
    if name == "fi-pdp":
        side, pair = fi_pdp_fixture(
            float(params["eps"]),
            float(params["alpha"]),
            float(params["beta"]),
            seed=seed,
        )
        return pair, side
    if name == "mean-sideinfo":
        base = mechanism_from_config(params["base"], seed=seed + 17)
        pair = mean_sideinfo_fixture(
            float(params["eps"]),
            float(params["alpha"]),
            float(params["A"]),
            base,
            seed=seed,
        )
        # Keep the base config in params so an emitted fixture document
        # can be rebuilt and re-certified from the file alone.
        pair.params["base"] = params["base"]
        return pair, None
    raise ValueError(f"unknown fixture name: {name!r}")
