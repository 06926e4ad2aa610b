"""Exact divergence and slack arithmetic against frozen values and the
event-enumeration oracles."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dpaudit import (
    BRUTE_FORCE_MAX_N,
    DiscreteDistribution,
    PrivacyParams,
    approx_max_divergence_bruteforce,
    brute_force_delta,
    delta_at_epsilon,
    delta_at_epsilon_directed,
    exact_pdp_epsilon,
    kl_divergence,
    make_distribution,
    max_divergence,
    min_mass,
    tv_distance,
)

P = make_distribution([0.9, 0.1])
Q = make_distribution([0.5, 0.5])


@st.composite
def dist_pairs(draw, max_n=8):
    n = draw(st.integers(min_value=2, max_value=max_n))
    weights = st.lists(
        st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
        min_size=n,
        max_size=n,
    )
    wp = draw(weights)
    wq = draw(weights)
    assume(sum(wp) > 1e-3 and sum(wq) > 1e-3)
    return make_distribution(wp), make_distribution(wq)


def test_tv_distance_frozen():
    assert tv_distance(P, Q) == pytest.approx(0.4, abs=1e-15)
    assert tv_distance(P, P) == 0.0


def test_kl_divergence_frozen():
    # 0.9 ln(0.9/0.5) + 0.1 ln(0.1/0.5)
    assert kl_divergence(P, Q) == pytest.approx(0.3680642071684971, abs=1e-15)
    assert kl_divergence(P, P) == 0.0


def test_kl_divergence_infinite_on_support_mismatch():
    r = DiscreteDistribution(np.array([1.0, 0.0]))
    assert kl_divergence(Q, r) == math.inf
    # support of r is inside support of Q, so this direction is finite
    assert math.isfinite(kl_divergence(r, Q))


def test_max_divergence_frozen():
    assert max_divergence(P, Q) == pytest.approx(math.log(1.8), abs=1e-15)
    assert max_divergence(Q, P) == pytest.approx(math.log(5.0), abs=1e-15)
    assert exact_pdp_epsilon(P, Q) == pytest.approx(math.log(5.0), abs=1e-15)


def test_exact_pdp_infinite_when_support_differs():
    r = DiscreteDistribution(np.array([1.0, 0.0]))
    assert exact_pdp_epsilon(r, Q) == math.inf


def test_delta_at_epsilon_frozen():
    assert delta_at_epsilon(P, Q, 0.0) == pytest.approx(0.4, abs=1e-15)
    # binding direction is Q against P on event {1}: 0.5 - e^0.1 * 0.1
    expect = 0.5 - math.exp(0.1) * 0.1
    assert delta_at_epsilon(P, Q, 0.1) == pytest.approx(expect, abs=1e-15)
    # e^(ln 5) rounds below 5, leaving one-ulp residue at the boundary
    assert delta_at_epsilon(P, Q, math.log(5.0)) == pytest.approx(0.0, abs=1e-15)
    assert delta_at_epsilon(P, Q, 2.0) == 0.0


def test_delta_directed_is_one_sided():
    # at eps = ln 1.8 the P-against-Q direction is exactly tight
    assert delta_at_epsilon_directed(P, Q, math.log(1.8)) == pytest.approx(0.0, abs=1e-15)
    assert delta_at_epsilon_directed(Q, P, math.log(1.8)) > 0.0


@given(dist_pairs())
def test_delta_at_zero_equals_tv(pair):
    p, q = pair
    assert delta_at_epsilon(p, q, 0.0) == pytest.approx(tv_distance(p, q), abs=1e-12)


@given(dist_pairs(), st.floats(min_value=0.0, max_value=3.0), st.floats(min_value=0.0, max_value=3.0))
def test_delta_at_epsilon_monotone(pair, e1, e2):
    p, q = pair
    lo, hi = sorted((e1, e2))
    assert delta_at_epsilon(p, q, hi) <= delta_at_epsilon(p, q, lo) + 1e-12


@settings(max_examples=60)
@given(dist_pairs(), st.sampled_from([0.0, 0.1, 0.5, 1.0]))
def test_closed_form_matches_event_enumeration(pair, eps):
    p, q = pair
    assert delta_at_epsilon(p, q, eps) == pytest.approx(
        brute_force_delta(p, q, eps), abs=1e-12
    )


@settings(max_examples=40)
@given(dist_pairs(max_n=6))
def test_approx_divergence_at_zero_delta_is_max_divergence(pair):
    p, q = pair
    exact = max_divergence(p, q)
    assume(math.isfinite(exact))
    assert approx_max_divergence_bruteforce(p, q, 0.0) == pytest.approx(exact, abs=1e-12)


def test_approx_divergence_saturates_at_delta_one():
    assert approx_max_divergence_bruteforce(P, Q, 1.0) == -math.inf


def test_approx_divergence_infinite_branch():
    p = make_distribution([0.5, 0.5])
    q = make_distribution([1.0, 0.0])
    assert approx_max_divergence_bruteforce(p, q, 0.2) == math.inf


def test_brute_force_rejects_large_universe():
    big = make_distribution(np.ones(BRUTE_FORCE_MAX_N + 1))
    with pytest.raises(ValueError):
        brute_force_delta(big, big, 0.0)


def test_negative_eps_rejected():
    with pytest.raises(ValueError):
        delta_at_epsilon(P, Q, -0.1)
    with pytest.raises(ValueError):
        delta_at_epsilon_directed(P, Q, -1e-9)


def test_mismatched_universes_rejected():
    r = make_distribution([1.0, 1.0, 1.0])
    for fn in (tv_distance, kl_divergence, max_divergence):
        with pytest.raises(ValueError):
            fn(P, r)
    with pytest.raises(ValueError):
        delta_at_epsilon(P, r, 0.0)


def test_distribution_validation():
    with pytest.raises(ValueError):
        DiscreteDistribution(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        DiscreteDistribution(np.array([-0.1, 1.1]))
    with pytest.raises(ValueError):
        DiscreteDistribution(np.array([]))
    with pytest.raises(ValueError):
        make_distribution([0.0, 0.0])
    with pytest.raises(ValueError):
        make_distribution([1.0, math.nan])


def test_distribution_is_read_only():
    d = make_distribution([2.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        d.probs[0] = 0.7


def test_json_round_trip_is_bit_exact():
    d = make_distribution([1.0, math.pi, math.e])
    back = DiscreteDistribution.from_json(d.to_json())
    assert np.array_equal(back.probs, d.probs)


def test_from_json_rejects_bad_documents():
    with pytest.raises(ValueError):
        DiscreteDistribution.from_json({"n": 3, "probs": [0.5, 0.5]})
    with pytest.raises(ValueError):
        DiscreteDistribution.from_json({"n": 2})


def test_privacy_params_validation():
    PrivacyParams(epsilon=0.5, notion="pDP")
    PrivacyParams(epsilon=0.5, delta=0.1, notion="aDP")
    with pytest.raises(ValueError):
        PrivacyParams(epsilon=0.5, delta=0.1, notion="pDP")
    with pytest.raises(ValueError):
        PrivacyParams(epsilon=0.5, gamma=0.1, notion="aDP")
    with pytest.raises(ValueError):
        PrivacyParams(notion="DP")
    with pytest.raises(ValueError):
        PrivacyParams(epsilon=-1.0)
    with pytest.raises(ValueError):
        PrivacyParams(penalty_weight=0.0)


def test_min_mass_counts_zero_entries():
    zero = DiscreteDistribution(np.array([1.0, 0.0]))
    assert min_mass([Q, zero]) == 0.0
    assert min_mass([P]) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        min_mass([])
