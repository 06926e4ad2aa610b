"""Random-privacy testing by reduction to a two-database tester.

Privacy over random databases: sample neighbor pairs from the data
distribution, run an off-the-shelf two-database tester on each sampled
pair, and accept iff few pairs get marked as violations. The failure
probability gamma and the proximity alpha set both the pair count and
the per-pair amplification automatically.
"""

import math

import numpy as np

from dpaudit import (
    adp_test_budgeted,
    constant_family,
    data_distribution,
    leaky_mechanism,
    random_privacy_test,
    value_flag_family,
)


def inner(mech, rng):
    # fixed-budget histogram tester for the claim (0, 0.05)-aDP
    return adp_test_budgeted(mech, 0.0, 0.05, 0.1, 4800)


def main() -> None:
    leaky = leaky_mechanism(0.5)

    print("family 1: ignores its database entirely")
    out = random_privacy_test(
        constant_family(leaky.truth[0]),
        data_distribution([0], db_size=1),
        inner,
        gamma=0.1,
        alpha=0.2,
        penalty_weight=2.0,
        rng=np.random.default_rng(81),
    )
    print(f"  verdict {out.verdict.name}: marked fraction {out.statistic:.3f} "
          f"vs threshold {out.threshold:.3f}")
    print(f"  {out.diagnostics['trials']} sampled pairs x "
          f"{out.diagnostics['reps']} tester runs each; "
          f"queries {out.queries_used}")
    print()

    # flag probability tuned so a sampled neighbor pair straddles the
    # flag boundary with measure exactly 0.3, above the 0.2 threshold
    s = (1.0 - math.sqrt(0.4)) / 2.0
    print(f"family 2: leaks whether entry 0 is flagged "
          f"(flag probability {s:.4f}, boundary measure {2 * s * (1 - s):.3f})")
    out = random_privacy_test(
        value_flag_family({1}, leaky.truth[1], leaky.truth[0]),
        data_distribution([0, 1], [1.0 - s, s], db_size=1),
        inner,
        gamma=0.1,
        alpha=0.2,
        penalty_weight=2.0,
        rng=np.random.default_rng(82),
    )
    print(f"  verdict {out.verdict.name}: marked fraction {out.statistic:.3f} "
          f"vs threshold {out.threshold:.3f}")
    print(f"  marked pairs: {out.diagnostics['marked']} of "
          f"{out.diagnostics['trials']}")


if __name__ == "__main__":
    main()
