"""Full-information testers: the claimed output distributions are known.

Two testers live here. The aDP tester checks the claim analytically (the
claimed distributions are data, so their slack is computable exactly)
and then verifies, via amplified Poissonized identity tests, that the
black box actually produces the claimed distributions. The pDP tester
estimates every outcome probability to within a small multiplicative
band and reads the privacy ratio off the empirical frequencies.

Identity-test thresholds are calibrated by Monte Carlo against the
claimed distribution and cached, keyed by a digest of the distribution
and the test parameters, so repeated experiments do not re-simulate.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributions import DiscreteDistribution, delta_at_epsilon, min_mass
from .mechanisms import MechanismPair, SideInfo
from .noinfo import poisson_nonzero, poissonized_histogram
from .outcomes import TestOutcome, Verdict

#: Bump when the identity statistic changes; invalidates cached thresholds.
STATISTIC_VERSION = 1

#: Sample-budget constant for the identity tester, fixed by Monte Carlo:
#: at max(1, ceil(6 sqrt(n) / alpha^2)) samples the calibrated test keeps
#: its two-sided guarantees with margin across the grid exercised in the
#: test suite. The asymptotic requirement is only O(sqrt(n) / alpha^2).
BUDGET_CONSTANT = 6.0

#: Per-call success probability the identity tester is calibrated for.
IDENTITY_CONFIDENCE = 2.0 / 3.0

#: Exact slack on the claimed distributions is compared against
#: delta + this tolerance so that float noise in e^eps cannot flip an
#: exactly-tight claim to REJECT.
EXACT_CHECK_TOL = 1e-12


def identity_budget(n: int, alpha: float) -> int:
    """Poisson rate for one identity test on an n-outcome universe."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return max(1, math.ceil(BUDGET_CONSTANT * math.sqrt(n) / (alpha * alpha)))


def hoeffding_majority_reps(failure: float) -> int:
    """Repetitions so that majority vote fails with probability <= failure.

    Each repetition must itself be correct with probability >= 2/3; the
    bound used is exp(-k/18) <= failure.
    """
    if not (0.0 < failure < 1.0):
        raise ValueError("failure probability must lie strictly inside (0, 1)")
    return max(1, math.ceil(18.0 * math.log(1.0 / failure)))


#: Majority repetitions for each of the two per-database identity checks,
#: chosen so both succeed jointly with probability >= 2/3: each check is
#: amplified to confidence sqrt(2/3).
SUBTEST_REPS = hoeffding_majority_reps(1.0 - math.sqrt(2.0 / 3.0))


@dataclass
class IdentityTesterConfig:
    """Parameters of one Poissonized identity test.

    ``threshold`` is NaN until calibrated; :func:`identity_test` refuses
    to run without a finite threshold.
    """

    alpha: float
    confidence: float = IDENTITY_CONFIDENCE
    sample_budget: int = 0
    threshold: float = float("nan")

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not (0.0 < self.confidence < 1.0):
            raise ValueError("confidence must lie strictly inside (0, 1)")
        if self.sample_budget < 1:
            raise ValueError("sample_budget must be >= 1")

    @classmethod
    def for_universe(
        cls, n: int, alpha: float, confidence: float = IDENTITY_CONFIDENCE
    ) -> "IdentityTesterConfig":
        return cls(
            alpha=alpha, confidence=confidence, sample_budget=identity_budget(n, alpha)
        )


def identity_statistic(
    q: DiscreteDistribution, counts: np.ndarray, rate: float
) -> float:
    """Debiased chi-squared statistic for Poissonized counts against q.

    sum over the support of ((X_i - rate q_i)^2 - X_i) / (rate q_i); each
    term has mean zero under the null, so the statistic concentrates near
    zero when the box matches q. Any observed mass outside q's support
    returns +inf (such an outcome is impossible under the claim).
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    c = np.asarray(counts, dtype=np.float64)
    if c.shape != q.probs.shape:
        raise ValueError("counts length must match the distribution")
    support = q.probs > 0.0
    if c[~support].sum() > 0:
        return math.inf
    means = rate * q.probs[support]
    cs = c[support]
    return float((((cs - means) ** 2 - cs) / means).sum())


def calibrate_identity_threshold(
    q: DiscreteDistribution,
    cfg: IdentityTesterConfig,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """Monte-Carlo null quantile of the identity statistic under q.

    Simulates the statistic under the null (counts are independent
    Poissons with mean rate * q_i) and returns the empirical quantile at
    confidence plus 2.5 standard errors (capped at 0.995), nudged up one
    ulp so a simulated tie still accepts. The cushion keeps the realized
    null acceptance rate above the configured confidence despite quantile
    estimation noise.
    """
    if trials < 100:
        raise ValueError("calibration needs at least 100 trials")
    support = q.probs > 0.0
    means = cfg.sample_budget * q.probs[support]
    counts = rng.poisson(means, size=(trials, means.size))
    stats = (((counts - means) ** 2 - counts) / means).sum(axis=1)
    se = math.sqrt(cfg.confidence * (1.0 - cfg.confidence) / trials)
    level = min(0.995, cfg.confidence + 2.5 * se)
    threshold = float(np.quantile(stats, level, method="higher"))
    return float(np.nextafter(threshold, math.inf))


def identity_test(
    q: DiscreteDistribution, counts: np.ndarray, cfg: IdentityTesterConfig
) -> TestOutcome:
    """Decide whether Poissonized counts look like draws from q."""
    if not math.isfinite(cfg.threshold):
        raise ValueError("threshold not calibrated; see calibrate_identity_threshold")
    statistic = identity_statistic(q, counts, cfg.sample_budget)
    verdict = Verdict.ACCEPT if statistic < cfg.threshold else Verdict.REJECT
    return TestOutcome(
        verdict,
        statistic,
        cfg.threshold,
        queries_used=(0, 0),
        diagnostics={"rule": "accept iff statistic < calibrated null quantile"},
    )


class CalibrationCache:
    """Threshold cache keyed by (distribution, budget, alpha, confidence).

    Optionally persists to a JSON file so repeated CLI runs skip the
    Monte Carlo. Calibration RNG is seeded from the cache key itself, so
    a given configuration always produces the same threshold no matter
    which process computes it first.
    """

    DEFAULT_TRIALS = 2000

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._table: dict[str, float] = {}
        if self.path is not None and self.path.exists():
            self._table = {
                str(k): float(v)
                for k, v in json.loads(self.path.read_text()).items()
            }

    @staticmethod
    def _key(q: DiscreteDistribution, cfg: IdentityTesterConfig, trials: int) -> str:
        h = hashlib.sha256()
        h.update(q.probs.tobytes())
        h.update(
            struct.pack(
                "<qddqq",
                q.n,
                cfg.alpha,
                cfg.confidence,
                cfg.sample_budget,
                trials,
            )
        )
        h.update(struct.pack("<q", STATISTIC_VERSION))
        return h.hexdigest()

    def threshold_for(
        self,
        q: DiscreteDistribution,
        cfg: IdentityTesterConfig,
        trials: int | None = None,
    ) -> float:
        trials = self.DEFAULT_TRIALS if trials is None else trials
        key = self._key(q, cfg, trials)
        if key not in self._table:
            rng = np.random.default_rng(int(key[:16], 16))
            self._table[key] = calibrate_identity_threshold(q, cfg, trials, rng)
            if self.path is not None:
                self.path.write_text(json.dumps(self._table, indent=0, sort_keys=True))
        return self._table[key]


def adp_test_fi(
    mech: MechanismPair,
    side: SideInfo,
    eps: float,
    delta: float,
    alpha: float,
    rng: np.random.Generator,
    cache: CalibrationCache | None = None,
    calibration_trials: int | None = None,
    reps: int | None = None,
) -> TestOutcome:
    """Full-information aDP test at claim (eps, delta).

    Step 1 costs no samples: the additive slack of the claimed pair is
    computed exactly (both orderings) and compared against delta; a claim
    that already violates the bound is rejected outright. Step 2 verifies
    each database against its claimed distribution with SUBTEST_REPS
    majority-amplified identity tests, so a box that accepts is, with
    probability >= 2/3, close enough to the claim that its true slack is
    at most delta + (1 + e^eps) * alpha.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if not (0.0 <= delta <= 1.0):
        raise ValueError("delta must lie in [0, 1]")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if mech.n != side.n:
        raise ValueError("mechanism universe does not match the side information")

    claimed_slack = delta_at_epsilon(side.q0, side.q1, eps)
    if claimed_slack > delta + EXACT_CHECK_TOL:
        return TestOutcome(
            Verdict.REJECT,
            statistic=claimed_slack,
            threshold=delta,
            queries_used=(0, 0),
            diagnostics={
                "rule": "claimed distributions already violate the slack bound",
                "claimed_slack": claimed_slack,
            },
        )

    cache = cache if cache is not None else CalibrationCache()
    k = SUBTEST_REPS if reps is None else reps
    if k < 1:
        raise ValueError("reps must be >= 1")
    base_cfg = IdentityTesterConfig.for_universe(mech.n, alpha)
    before = tuple(mech.query_counter)
    fractions = []
    thresholds = []
    for db, q in ((0, side.q0), (1, side.q1)):
        cfg = IdentityTesterConfig(
            alpha=alpha,
            confidence=IDENTITY_CONFIDENCE,
            sample_budget=base_cfg.sample_budget,
        )
        cfg.threshold = cache.threshold_for(q, cfg, calibration_trials)
        rejections = 0
        for _ in range(k):
            counts, _r = poissonized_histogram(mech, db, cfg.sample_budget, rng)
            if identity_test(q, counts, cfg).rejected:
                rejections += 1
        fractions.append(rejections / k)
        thresholds.append(cfg.threshold)
    after = tuple(mech.query_counter)

    statistic = max(fractions)
    verdict = Verdict.ACCEPT if statistic < 0.5 else Verdict.REJECT
    return TestOutcome(
        verdict,
        statistic=statistic,
        threshold=0.5,
        queries_used=(after[0] - before[0], after[1] - before[1]),
        diagnostics={
            "rule": "accept iff both identity majorities reject under half the time",
            "claimed_slack": claimed_slack,
            "rejection_fractions": tuple(fractions),
            "identity_thresholds": tuple(thresholds),
            "sample_budget": base_cfg.sample_budget,
            "reps": k,
        },
    )


@dataclass
class FiPdpConfig:
    """Parameters for the full-information pDP tester.

    ``beta`` is the smallest claimed outcome probability; the sample rate
    ln(n) / (alpha^2 beta^2) makes every empirical frequency land within
    a multiplicative e^alpha of its claim with good probability.
    """

    eps: float
    alpha: float
    beta: float
    lambda_rate: float | None = None

    def __post_init__(self) -> None:
        if self.eps < 0:
            raise ValueError("eps must be >= 0")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not (0.0 < self.beta <= 1.0):
            raise ValueError("beta must lie in (0, 1]")
        if self.lambda_rate is not None and self.lambda_rate <= 0:
            raise ValueError("lambda_rate must be positive")

    def rate(self, n: int) -> float:
        if n < 2:
            raise ValueError("pDP testing needs a universe of size >= 2")
        if self.lambda_rate is not None:
            return self.lambda_rate
        return math.log(n) / (self.alpha * self.alpha * self.beta * self.beta)

    @classmethod
    def for_side(cls, side: SideInfo, eps: float, alpha: float) -> "FiPdpConfig":
        beta = min_mass([side.q0, side.q1])
        if beta <= 0.0:
            raise ValueError(
                "claimed distributions must give every outcome positive mass"
            )
        return cls(eps=eps, alpha=alpha, beta=beta)


def pdp_test_fi(
    mech: MechanismPair,
    side: SideInfo,
    cfg: FiPdpConfig,
    rng: np.random.Generator,
) -> TestOutcome:
    """Full-information pDP test at claim eps.

    Estimates both output distributions from Poissonized samples,
    rejects if the worst empirical log-ratio exceeds eps + 2 alpha or if
    any frequency drifts outside the claimed value's e^{+-alpha} band.
    Acceptance certifies, with probability >= 2/3, that the box satisfies
    (eps + 10 alpha)-pDP; a box whose databases match the claims exactly
    and satisfy eps-pDP is accepted with probability >= 2/3.
    """
    if mech.n != side.n:
        raise ValueError("mechanism universe does not match the side information")
    if mech.n < 2:
        raise ValueError("pDP testing needs a universe of size >= 2")
    claimed_min = min_mass([side.q0, side.q1])
    if claimed_min <= 0.0:
        raise ValueError("claimed distributions must give every outcome positive mass")
    if cfg.beta > claimed_min + 1e-12:
        raise ValueError("cfg.beta exceeds the smallest claimed outcome probability")

    rate = cfg.rate(mech.n)
    r0, retries0 = poisson_nonzero(rate, rng)
    r1, retries1 = poisson_nonzero(rate, rng)
    x = mech.draw(0, r0)
    y = mech.draw(1, r1)
    xf = x / r0
    yf = y / r1

    with np.errstate(divide="ignore"):
        if np.any(x == 0) or np.any(y == 0):
            eps_hat = math.inf
        else:
            eps_hat = float(np.abs(np.log(xf) - np.log(yf)).max())
        band_lo, band_hi = math.exp(-cfg.alpha), math.exp(cfg.alpha)
        ratios0 = xf / side.q0.probs
        ratios1 = yf / side.q1.probs
        bands_ok = bool(
            np.all((ratios0 >= band_lo) & (ratios0 <= band_hi))
            and np.all((ratios1 >= band_lo) & (ratios1 <= band_hi))
        )

    threshold = cfg.eps + 2.0 * cfg.alpha
    if eps_hat > threshold:
        verdict = Verdict.REJECT
    elif not bands_ok:
        verdict = Verdict.REJECT
    else:
        verdict = Verdict.ACCEPT
    return TestOutcome(
        verdict,
        statistic=eps_hat,
        threshold=threshold,
        queries_used=(r0, r1),
        diagnostics={
            "rule": (
                "accept iff max |log frequency ratio| <= eps + 2 alpha and all "
                "frequencies sit within e^{+-alpha} of their claimed values"
            ),
            "r": (r0, r1),
            "retries": retries0 + retries1,
            "bands_ok": bands_ok,
            "rate": rate,
        },
    )
