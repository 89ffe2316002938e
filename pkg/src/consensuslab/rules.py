"""Update rules: process functions for AC dynamics and one-step steppers.

Sampling is with replacement, uniform over all n nodes (self included);
that convention makes the Voter form alpha_i = c_i/n and the 3-majority
closed form exact. Neighbor-only sampling exists only in the coalescing
module, where the duality coupling requires it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .core import Configuration, ProbabilityVector, canonicalize
from .sampler import RngStream, sample_multinomial, sample_uniform_node

ENUM_BUDGET = 10**7  # guard on k**h for the exact plurality enumeration


class NotAnACProcess(TypeError):
    """2-Choices has no process function: adoption depends on own color."""


class TooManyColorsForExactH(ValueError):
    pass


class NoClosedForm(ValueError):
    pass


VOTER = "Voter"
TWO_CHOICES = "TwoChoices"
H_MAJORITY = "HMajority"


@dataclass(frozen=True)
class UpdateRule:
    kind: Literal["Voter", "TwoChoices", "HMajority"]
    h: int = 0
    sampling_mode: Literal["self-inclusive", "neighbor-only"] = "self-inclusive"

    def __post_init__(self):
        if self.kind not in (VOTER, TWO_CHOICES, H_MAJORITY):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.kind == H_MAJORITY and self.h < 1:
            raise ValueError("HMajority needs h >= 1")

    @property
    def is_ac(self) -> bool:
        return self.kind in (VOTER, H_MAJORITY)

    def label(self) -> str:
        if self.kind == H_MAJORITY:
            return f"hmaj:{self.h}"
        return {VOTER: "voter", TWO_CHOICES: "2choices"}[self.kind]


def voter_rule() -> UpdateRule:
    return UpdateRule(VOTER)


def two_choices_rule() -> UpdateRule:
    return UpdateRule(TWO_CHOICES)


def h_majority_rule(h: int) -> UpdateRule:
    return UpdateRule(H_MAJORITY, h=h)


def _three_majority_alpha(x: np.ndarray) -> np.ndarray:
    # alpha_i = x_i * (1 + x_i - ||x||_2^2)
    sq = float(np.dot(x, x))
    return x * (1.0 + x - sq)


def plurality_enumeration_alpha(x: np.ndarray, h: int) -> np.ndarray:
    """Exact h-sample plurality adoption probabilities by enumeration.

    Iterates over all count vectors of the h samples (multinomial support);
    a color attaining the maximum multiplicity wins, ties split uniformly
    among the tied sampled colors.
    """
    k = len(x)
    if k**h > ENUM_BUDGET:
        raise TooManyColorsForExactH(f"k^h = {k}^{h} exceeds enumeration budget")
    alpha = np.zeros(k)
    for counts in _compositions(h, k):
        p = math.factorial(h)
        for c, xi in zip(counts, x):
            if c:
                if xi == 0.0:
                    p = 0.0
                    break
                p = p * xi**c / math.factorial(c)
            # c == 0 contributes factor 1
        if p == 0.0:
            continue
        mx = max(counts)
        winners = [i for i, c in enumerate(counts) if c == mx]
        share = p / len(winners)
        for i in winners:
            alpha[i] += share
    return alpha


def _compositions(total: int, parts: int):
    """All non-negative integer vectors of given length summing to total."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def process_function(rule: UpdateRule, c: Configuration) -> ProbabilityVector:
    """Adoption-probability vector alpha(c) for an AC rule."""
    if not rule.is_ac:
        raise NotAnACProcess("2-Choices is not an AC process")
    x = c.fractions()
    if rule.kind == VOTER or (rule.kind == H_MAJORITY and rule.h <= 2):
        # sampling 1 node, or 2 with a uniform tie-break, is plain Voter
        alpha = x
    elif rule.kind == H_MAJORITY and rule.h == 3:
        alpha = _three_majority_alpha(x)
    else:
        alpha = plurality_enumeration_alpha(x, rule.h)
    return ProbabilityVector(tuple(alpha))


def process_function_exact(rule: UpdateRule, c: Configuration) -> list[Fraction]:
    """Process function over exact rationals (Voter and HMajority(h<=3))."""
    if not rule.is_ac:
        raise NotAnACProcess("2-Choices is not an AC process")
    x = c.exact_fractions()
    if rule.kind == VOTER or (rule.kind == H_MAJORITY and rule.h <= 2):
        return x
    if rule.kind == H_MAJORITY and rule.h == 3:
        sq = sum(xi * xi for xi in x)
        return [xi * (1 + xi - sq) for xi in x]
    raise NoClosedForm(f"no rational closed form for h = {rule.h}")


def step_ac(rule: UpdateRule, c: Configuration, rng: RngStream) -> Configuration:
    """One synchronous round of an AC process: Mult(n, alpha(c))."""
    alpha = process_function(rule, c)
    counts = sample_multinomial(c.n, alpha, rng)
    return canonicalize(counts)


def step_ac_reference(rule: UpdateRule, c: Configuration, rng: RngStream) -> Configuration:
    """Literal per-node stepper: every node samples h nodes and applies the rule.

    Used to cross-validate the multinomial fast path; O(n*h) per round.
    """
    if not rule.is_ac:
        raise NotAnACProcess("2-Choices is not an AC process")
    n = c.n
    h = 1 if rule.kind == VOTER else rule.h
    node_colors = np.repeat(np.arange(len(c.counts)), c.counts)
    gen = rng.gen
    new_colors = np.empty(n, dtype=np.int64)
    for u in range(n):
        samples = node_colors[gen.integers(0, n, size=h)]
        vals, cnts = np.unique(samples, return_counts=True)
        mx = cnts.max()
        winners = vals[cnts == mx]
        new_colors[u] = winners[gen.integers(0, len(winners))]
    return canonicalize(np.bincount(new_colors, minlength=len(c.counts)))


def step_two_choices(c: Configuration, rng: RngStream, mode: str = "auto") -> Configuration:
    """One round of 2-Choices: adopt color i iff both samples show i.

    Blockwise path: for each source color j, the movers to the other colors
    follow Mult(c_j, ((c_i/n)^2)_i, stay) via one multinomial draw, which is
    the sequentially conditioned binomial scheme. Per-node path: vectorized
    literal simulation, cheaper when the color count is large. Both paths
    realize the same one-step law.
    """
    k = len(c.counts)
    n = c.n
    if mode == "auto":
        mode = "blockwise" if k * k <= 8 * n else "per-node"
    if mode == "per-node":
        return step_two_choices_reference(c, rng)
    counts = np.asarray(c.counts, dtype=np.int64)
    q = (counts / n) ** 2  # prob both samples show color i
    new_counts = np.zeros(k, dtype=np.int64)
    gen = rng.gen
    for j in range(k):
        theta = q.copy()
        theta[j] = 0.0  # moving to own color is just keeping it
        stay = 1.0 - theta.sum()
        movers = gen.multinomial(counts[j], np.append(theta, stay))
        new_counts += movers[:k]
        new_counts[j] += movers[k]
    return canonicalize(new_counts)


def step_two_choices_reference(c: Configuration, rng: RngStream) -> Configuration:
    """Vectorized per-node 2-Choices round."""
    n = c.n
    node_colors = np.repeat(np.arange(len(c.counts)), c.counts)
    gen = rng.gen
    s1 = node_colors[gen.integers(0, n, size=n)]
    s2 = node_colors[gen.integers(0, n, size=n)]
    new_colors = np.where(s1 == s2, s1, node_colors)
    return canonicalize(np.bincount(new_colors, minlength=len(c.counts)))


def step_rule(rule: UpdateRule, c: Configuration, rng: RngStream) -> Configuration:
    """Dispatch one round for any implemented rule."""
    if rule.kind == TWO_CHOICES:
        return step_two_choices(c, rng)
    return step_ac(rule, c, rng)


def expected_fraction_after_step(rule: UpdateRule, c: Configuration) -> ProbabilityVector:
    """Closed-form expected color fractions after one round.

    Voter: x. 2-Choices and 3-majority share x_i^2 + (1 - sum x_j^2) * x_i,
    the identical-expectation fact that makes their runtime gap surprising.
    """
    x = c.fractions()
    if rule.kind == VOTER:
        return ProbabilityVector(tuple(x))
    if rule.kind == TWO_CHOICES or (rule.kind == H_MAJORITY and rule.h == 3):
        sq = float(np.dot(x, x))
        return ProbabilityVector(tuple(x * x + (1.0 - sq) * x))
    raise NoClosedForm(f"no closed-form expectation for {rule}")
