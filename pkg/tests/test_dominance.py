import numpy as np
import pytest

from consensuslab.core import ProbabilityVector, StopCondition, canonicalize
from consensuslab.dominance import (
    EnumerationBudgetExceeded,
    NotMajorized,
    check_dominance,
    dkw_epsilon,
    empirical_stochastic_majorization,
    empirical_time_dominance,
    enumerate_configurations,
    exact_prefix_expectations,
)
from consensuslab.rules import h_majority_rule, voter_rule
from consensuslab.sampler import RngStream


def test_enumerate_configurations_counts_partitions():
    # partition numbers p(1..10) = 1,2,3,5,7,11,15,22,30,42
    expected = [1, 2, 3, 5, 7, 11, 15, 22, 30, 42]
    for n, p_n in enumerate(expected, start=1):
        assert len(enumerate_configurations(n)) == p_n


def test_enumerate_configurations_are_sorted_partitions():
    for cfg in enumerate_configurations(6):
        assert sum(cfg.counts) == 6
        assert cfg.counts == tuple(sorted(cfg.counts, reverse=True))


def test_enumeration_budget_guard():
    with pytest.raises(EnumerationBudgetExceeded):
        enumerate_configurations(60)


def test_rule_dominates_itself():
    report = check_dominance(voter_rule(), voter_rule(), 8)
    assert report.holds
    assert report.pairs_checked > 0


def test_three_majority_dominates_voter_small_n():
    report = check_dominance(h_majority_rule(3), voter_rule(), 6)
    assert report.holds


def test_violation_records_prefix_and_margin():
    report = check_dominance(h_majority_rule(4), h_majority_rule(3), 12)
    assert not report.holds
    v = next(
        v for v in report.violations if v.c == (6, 6) and v.c_tilde == (6, 2, 2, 2)
    )
    assert v.prefix == 1
    assert v.margin > 0
    d = report.to_dict()
    assert d["pairs_checked"] == report.pairs_checked
    assert len(d["violations"]) == len(report.violations)


def test_exact_prefix_expectations_simple_case():
    # two symmetric categories, m=2: sorted counts are (2,0) w.p. 1/2, (1,1) w.p. 1/2
    theta = ProbabilityVector((0.5, 0.5))
    e = exact_prefix_expectations(theta, 2)
    assert np.isclose(e[0], 1.5)
    assert np.isclose(e[1], 2.0)


def test_exact_prefix_expectations_degenerate():
    theta = ProbabilityVector((1.0, 0.0))
    e = exact_prefix_expectations(theta, 4)
    assert np.allclose(e, [4.0, 4.0])


def test_empirical_stochastic_majorization_agrees_with_exact():
    theta1 = ProbabilityVector((0.4, 0.35, 0.25))
    theta2 = ProbabilityVector((0.6, 0.3, 0.1))
    m = 6
    report = empirical_stochastic_majorization(
        theta1, theta2, m, draws=4000, rng=RngStream(13)
    )
    assert report.passed
    e1 = exact_prefix_expectations(theta1, m)
    e2 = exact_prefix_expectations(theta2, m)
    assert np.all(e1 <= e2 + 1e-12)
    for j in range(len(report.mean_low)):
        assert abs(report.mean_low[j] - e1[j]) <= 4 * report.sigma[j] + 1e-9
        assert abs(report.mean_high[j] - e2[j]) <= 4 * report.sigma[j] + 1e-9


def test_empirical_stochastic_majorization_requires_majorization():
    with pytest.raises(NotMajorized):
        empirical_stochastic_majorization(
            ProbabilityVector((0.6, 0.4)),
            ProbabilityVector((0.5, 0.5)),
            4,
            draws=1000,
            rng=RngStream(0),
        )


def test_dkw_epsilon_shrinks_with_trials():
    assert dkw_epsilon(100) > dkw_epsilon(400)
    assert np.isclose(dkw_epsilon(400), dkw_epsilon(100) / 2)


def test_empirical_time_dominance_same_rule_passes():
    c0 = canonicalize([1] * 64)
    stop = StopCondition(kappa=1, max_rounds=10**5)
    report = empirical_time_dominance(
        voter_rule(), voter_rule(), c0, stop, trials=100, rng=RngStream(7)
    )
    assert report.passed
    assert report.max_cdf_deficit <= report.epsilon
    assert len(report.times_fast) == 100


def test_empirical_time_dominance_detects_clear_gap():
    # voter from consensus-adjacent start vs voter from the n-color start:
    # the slow side should not appear faster
    c_fast = canonicalize([63, 1])
    c_slow = canonicalize([1] * 64)
    stop = StopCondition(kappa=1, max_rounds=10**5)
    report = empirical_time_dominance(
        voter_rule(),
        voter_rule(),
        c_fast,
        stop,
        trials=100,
        rng=RngStream(8),
        c0_slow=c_slow,
    )
    assert report.passed


def test_empirical_time_dominance_flags_reversed_order():
    # deliberately claim the n-color start is faster than the near-consensus
    # start; the CDF deficit should blow past any reasonable epsilon
    c_fast = canonicalize([1] * 64)
    c_slow = canonicalize([63, 1])
    stop = StopCondition(kappa=1, max_rounds=10**5)
    report = empirical_time_dominance(
        voter_rule(),
        voter_rule(),
        c_fast,
        stop,
        trials=100,
        rng=RngStream(9),
        epsilon=0.2,
        c0_slow=c_slow,
    )
    assert not report.passed
    assert report.max_cdf_deficit > 0.2
