"""Verification of the majorization-dominance framework.

Exhaustive small-n checks of the one-step dominance condition between AC
rules, empirical stochastic-majorization tests for multinomial laws, and
empirical stopping-time dominance with paired seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    PREFIX_SLACK,
    Configuration,
    ProbabilityVector,
    StopCondition,
    majorizes,
)
from .rules import UpdateRule, process_function, step_rule
from .sampler import RngStream, sample_multinomial

MAX_ENUM_N = 40


class EnumerationBudgetExceeded(ValueError):
    pass


class NotMajorized(ValueError):
    pass


@dataclass
class Violation:
    c: tuple[int, ...]
    c_tilde: tuple[int, ...]
    prefix: int
    margin: float


@dataclass
class DominanceReport:
    n: int
    rule_p: UpdateRule
    rule_q: UpdateRule
    pairs_checked: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "rule_p": self.rule_p.label(),
            "rule_q": self.rule_q.label(),
            "pairs_checked": self.pairs_checked,
            "violations": [
                {"c": list(v.c), "c_tilde": list(v.c_tilde), "prefix": v.prefix, "margin": v.margin}
                for v in self.violations
            ],
        }


def enumerate_configurations(n: int) -> list[Configuration]:
    """All canonical configurations of n nodes (integer partitions of n)."""
    if n < 1 or n > MAX_ENUM_N:
        raise EnumerationBudgetExceeded(f"n = {n} outside [1, {MAX_ENUM_N}]")
    out: list[Configuration] = []

    def rec(remaining: int, cap: int, prefix: list[int]):
        if remaining == 0:
            out.append(Configuration(tuple(prefix)))
            return
        for part in range(min(cap, remaining), 0, -1):
            prefix.append(part)
            rec(remaining - part, part, prefix)
            prefix.pop()

    rec(n, n, [])
    return out


def _prefix_sums(p: ProbabilityVector, d: int) -> np.ndarray:
    """Prefix sums of the sorted vector, zero-padded up to length d."""
    cum = np.cumsum(np.sort(p.as_array())[::-1])
    out = np.full(d, cum[-1])
    out[: len(cum)] = cum[:d]
    return out


def check_dominance(rule_p: UpdateRule, rule_q: UpdateRule, n: int) -> DominanceReport:
    """Exhaustively test: c >= c~ implies alpha_p(c) >= alpha_q(c~).

    Runs over all ordered pairs of partitions of n; a violation records the
    worst prefix and its margin (how far the majorized side overshoots).
    """
    configs = enumerate_configurations(n)
    alphas_p = {c.counts: process_function(rule_p, c) for c in configs}
    alphas_q = {c.counts: process_function(rule_q, c) for c in configs}
    report = DominanceReport(n=n, rule_p=rule_p, rule_q=rule_q)
    for c in configs:
        for ct in configs:
            if not majorizes(c, ct):
                continue
            report.pairs_checked += 1
            ap, aq = alphas_p[c.counts], alphas_q[ct.counts]
            d = max(len(ap), len(aq))
            pp = _prefix_sums(ap, d)
            pq = _prefix_sums(aq, d)
            deficit = pq - pp
            worst = int(np.argmax(deficit))
            if deficit[worst] > PREFIX_SLACK:
                report.violations.append(
                    Violation(c.counts, ct.counts, worst + 1, float(deficit[worst]))
                )
    return report


@dataclass
class StochasticMajorizationReport:
    m: int
    draws: int
    mean_low: list[float]
    mean_high: list[float]
    sigma: list[float]
    passed: bool


def empirical_stochastic_majorization(
    theta1: ProbabilityVector,
    theta2: ProbabilityVector,
    m: int,
    draws: int,
    rng: RngStream,
) -> StochasticMajorizationReport:
    """Monte-Carlo check that Mult(m, theta1) <=st Mult(m, theta2).

    Estimates E[phi_j] for every prefix functional phi_j; passes iff the
    theta1 mean is below the theta2 mean plus 3 standard errors for all j.
    """
    if not majorizes(theta2, theta1):
        raise NotMajorized("theta2 must majorize theta1")
    if draws < 1000:
        raise ValueError("need at least 1000 draws")
    d = max(len(theta1), len(theta2))
    gen1 = rng.child("low")
    gen2 = rng.child("high")
    phi1 = np.zeros((draws, d))
    phi2 = np.zeros((draws, d))
    for t in range(draws):
        x = np.sort(sample_multinomial(m, theta1, gen1))[::-1]
        y = np.sort(sample_multinomial(m, theta2, gen2))[::-1]
        phi1[t, : len(x)] = np.cumsum(x)
        phi1[t, len(x):] = m
        phi2[t, : len(y)] = np.cumsum(y)
        phi2[t, len(y):] = m
    mean1 = phi1.mean(axis=0)
    mean2 = phi2.mean(axis=0)
    sigma = np.sqrt(phi1.var(axis=0) / draws + phi2.var(axis=0) / draws)
    passed = bool(np.all(mean1 <= mean2 + 3 * sigma))
    return StochasticMajorizationReport(
        m=m,
        draws=draws,
        mean_low=mean1.tolist(),
        mean_high=mean2.tolist(),
        sigma=sigma.tolist(),
        passed=passed,
    )


def exact_prefix_expectations(theta: ProbabilityVector, m: int) -> np.ndarray:
    """E[phi_j(Mult(m, theta))] for all j, by enumerating the full support.

    Oracle for the Monte-Carlo path; feasible for small m and few categories.
    """
    arr = theta.as_array()
    k = len(arr)
    out = np.zeros(k)
    for counts in _compositions(m, k):
        p = math.factorial(m)
        ok = True
        for c, t in zip(counts, arr):
            if c:
                if t == 0.0:
                    ok = False
                    break
                p = p * t**c / math.factorial(c)
        if not ok:
            continue
        s = np.sort(np.array(counts))[::-1]
        out += p * np.cumsum(s)
    return out


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass
class TimeDominanceReport:
    rule_fast: UpdateRule
    rule_slow: UpdateRule
    trials: int
    times_fast: list[float]
    times_slow: list[float]
    max_cdf_deficit: float
    epsilon: float
    passed: bool
    censored_fast: int = 0
    censored_slow: int = 0


def dkw_epsilon(trials: int, delta: float = 0.05) -> float:
    """Two-sample DKW-style noise bound on a CDF deficit estimate."""
    return math.sqrt(math.log(2.0 / delta) / (2.0 * trials))


def empirical_time_dominance(
    rule_fast: UpdateRule,
    rule_slow: UpdateRule,
    c0: Configuration,
    stop: StopCondition,
    trials: int,
    rng: RngStream,
    epsilon: Optional[float] = None,
    c0_slow: Optional[Configuration] = None,
) -> TimeDominanceReport:
    """Paired-seed empirical CDF comparison of stopping times.

    Runs both rules `trials` times from c0 until at most kappa colors remain
    (c0_slow starts the slow rule elsewhere, for pairwise-start experiments).
    Dominance verdict: the fast rule's CDF must lie above the slow one's up
    to deficit epsilon at every t. Censored trials are biased against the
    hypothesis: +inf for the slow rule, max_rounds for the fast one.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    eps = dkw_epsilon(trials) if epsilon is None else epsilon
    times_fast: list[float] = []
    times_slow: list[float] = []
    censored_fast = censored_slow = 0
    for trial in range(trials):
        t_fast = _run_to_stop(rule_fast, c0, stop, rng.child(trial, "fast"))
        t_slow = _run_to_stop(
            rule_slow, c0 if c0_slow is None else c0_slow, stop, rng.child(trial, "slow")
        )
        if t_fast is None:
            censored_fast += 1
            times_fast.append(float(stop.max_rounds))
        else:
            times_fast.append(float(t_fast))
        if t_slow is None:
            censored_slow += 1
            times_slow.append(math.inf)
        else:
            times_slow.append(float(t_slow))
    fast = np.sort(np.array(times_fast))
    slow = np.array(times_slow)
    grid = np.unique(np.concatenate([fast, slow[np.isfinite(slow)]]))
    deficit = 0.0
    for t in grid:
        f_fast = np.count_nonzero(fast <= t) / trials
        f_slow = np.count_nonzero(slow <= t) / trials
        deficit = max(deficit, f_slow - f_fast)
    return TimeDominanceReport(
        rule_fast=rule_fast,
        rule_slow=rule_slow,
        trials=trials,
        times_fast=times_fast,
        times_slow=times_slow,
        max_cdf_deficit=deficit,
        epsilon=eps,
        passed=deficit <= eps,
        censored_fast=censored_fast,
        censored_slow=censored_slow,
    )


def _run_to_stop(rule: UpdateRule, c0: Configuration, stop: StopCondition, rng: RngStream):
    c = c0
    if c.number_of_colors() <= stop.kappa:
        return 0
    for t in range(1, stop.max_rounds + 1):
        c = step_rule(rule, c, rng)
        if c.number_of_colors() <= stop.kappa:
            return t
    return None
