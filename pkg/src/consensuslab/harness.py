"""Experiment orchestration: stopping-time runs, the 2-Choices lower-bound
experiment with its coupled dominating Binomial process, the two-phase
timing check, and JSON-lines/CSV output.

All Monte-Carlo entry points derive one RngStream per (seed, trial,
purpose), so results are independent of worker count and scheduling. Logs
use natural log throughout (recorded in output metadata).
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Configuration, StopCondition, canonicalize
from .rules import UpdateRule, step_rule
from .sampler import RngStream

VERSION = "0.1.0"
METADATA = {"log_base": "e", "version": VERSION}


class CouplingViolation(AssertionError):
    pass


@dataclass(frozen=True)
class InitialCondition:
    """Initial-configuration family: ncolor, balanced(k), biased(k, b), explicit."""

    kind: str  # "ncolor" | "balanced" | "biased" | "explicit"
    k: int = 0
    bias: int = 0
    counts: tuple[int, ...] = ()

    def build(self, n: int) -> Configuration:
        if self.kind == "ncolor":
            return Configuration(tuple([1] * n))
        if self.kind == "balanced":
            if not 1 <= self.k <= n:
                raise ValueError("balanced: need 1 <= k <= n")
            base, rem = divmod(n, self.k)
            return canonicalize([base + (1 if i < rem else 0) for i in range(self.k)])
        if self.kind == "biased":
            return biased_configuration(n, self.k, self.bias)
        if self.kind == "explicit":
            cfg = canonicalize(self.counts)
            if cfg.n != n:
                raise ValueError(f"explicit counts sum to {cfg.n}, expected n = {n}")
            return cfg
        raise ValueError(f"unknown initial kind {self.kind!r}")

    def label(self) -> str:
        if self.kind == "ncolor":
            return "ncolor"
        if self.kind == "balanced":
            return f"balanced:{self.k}"
        if self.kind == "biased":
            return f"biased:{self.k}:{self.bias}"
        return "explicit:" + ",".join(str(c) for c in self.counts)


def biased_configuration(n: int, k: int, bias: int) -> Configuration:
    """Deterministic family with c1 - c2 = bias.

    Colors 2..k share floor((n - c1)/(k - 1)) each, remainder on the last
    color; c1 is chosen so that c1 - c2 = bias.
    """
    if k < 2:
        raise ValueError("biased: need k >= 2")
    c2 = (n - bias) // k
    c1 = c2 + bias
    if c2 < 1 or c1 > n:
        raise ValueError(f"bias {bias} infeasible for n={n}, k={k}")
    rest = n - c1 - (k - 2) * c2
    counts = [c1] + [c2] * (k - 2) + [rest]
    if rest < 1:
        raise ValueError(f"bias {bias} infeasible for n={n}, k={k}")
    return canonicalize(counts)


@dataclass(frozen=True)
class ExperimentSpec:
    rules: tuple[UpdateRule, ...]
    n: int
    initial: InitialCondition
    stop: StopCondition
    trials: int
    seed: int
    record_every: int = 0  # 0 => summary only

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")


@dataclass
class TrajectoryRecord:
    rounds: list[int] = field(default_factory=list)
    number_of_colors: list[int] = field(default_factory=list)
    max_support: list[int] = field(default_factory=list)
    counts: list[tuple[int, ...]] = field(default_factory=list)

    def append(self, t: int, c: Configuration, keep_counts: bool = False):
        self.rounds.append(t)
        self.number_of_colors.append(c.number_of_colors())
        self.max_support.append(c.counts[0])
        if keep_counts:
            self.counts.append(c.counts)


def simulate_to_stop(
    rule: UpdateRule, spec: ExperimentSpec, trial: int
) -> tuple[Optional[int], TrajectoryRecord]:
    """One seeded trial; returns (stopping time or None if censored, trajectory)."""
    rng = RngStream(spec.seed, ("sim", rule.label(), trial))
    c = spec.initial.build(spec.n)
    traj = TrajectoryRecord()
    traj.append(0, c)
    if c.number_of_colors() <= spec.stop.kappa:
        return 0, traj
    for t in range(1, spec.stop.max_rounds + 1):
        c = step_rule(rule, c, rng)
        if spec.record_every and t % spec.record_every == 0:
            traj.append(t, c)
        if c.number_of_colors() <= spec.stop.kappa:
            if not spec.record_every or t % spec.record_every != 0:
                traj.append(t, c)
            return t, traj
    if not spec.record_every or spec.stop.max_rounds % spec.record_every != 0:
        traj.append(spec.stop.max_rounds, c)
    return None, traj


def _trial_record(args) -> dict:
    spec, rule, trial, subcommand = args
    stop_time, traj = simulate_to_stop(rule, spec, trial)
    return {
        "subcommand": subcommand,
        "rule": rule.label(),
        "n": spec.n,
        "kappa": spec.stop.kappa,
        "seed": spec.seed,
        "trial": trial,
        "stop_time": stop_time,
        "censored": stop_time is None,
        "max_support_peak": max(traj.max_support),
        "metadata": METADATA,
    }


def run_experiment(
    spec: ExperimentSpec, workers: int = 1, subcommand: str = "simulate"
) -> list[dict]:
    """Run all (rule, trial) pairs; output order is scheduling-independent."""
    jobs = [(spec, rule, trial, subcommand) for rule in spec.rules for trial in range(spec.trials)]
    if workers <= 1:
        return [_trial_record(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_record, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


# ---------------------------------------------------------------------------
# 2-Choices slow-start window experiment and its dominating coupling


@dataclass(frozen=True)
class LowerBoundParams:
    """Derived quantities for the slow-start lower-bound experiment."""

    gamma: float
    ell: int
    n: int

    @property
    def ell_prime(self) -> int:
        return max(2 * self.ell, math.ceil(self.gamma * math.log(self.n)))

    @property
    def t0(self) -> int:
        return int(self.n // (self.gamma * self.ell_prime))

    @property
    def p(self) -> float:
        return (self.ell_prime / self.n) ** 2


def _two_choices_round_slots(
    slot_colors: np.ndarray, n: int, gen: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One per-node 2-Choices round on a slot array; returns (new, u1, u2)."""
    u1 = gen.random(n)
    u2 = gen.random(n)
    s1 = slot_colors[(u1 * n).astype(np.int64)]
    s2 = slot_colors[(u2 * n).astype(np.int64)]
    new = np.where(s1 == s2, s1, slot_colors)
    return new, u1, u2


def run_lower_bound_experiment(
    params: LowerBoundParams,
    initial: Configuration,
    trials: int,
    rng: RngStream,
) -> dict:
    """Run 2-Choices for t0 rounds per trial; track max-support exceedances.

    Reports the fraction of trials where any color's support ever exceeded
    ell_prime within the window, plus first-exceedance times.
    """
    n = params.n
    if initial.n != n:
        raise ValueError("initial configuration size mismatch")
    if initial.counts[0] != params.ell:
        raise ValueError("initial max support must equal params.ell")
    lp = params.ell_prime
    t0 = params.t0
    first_exceedance: list[Optional[int]] = []
    for trial in range(trials):
        gen = rng.child(trial).gen
        slot_colors = np.repeat(np.arange(len(initial.counts)), initial.counts)
        hit: Optional[int] = None
        for t in range(1, t0 + 1):
            slot_colors, _, _ = _two_choices_round_slots(slot_colors, n, gen)
            if np.bincount(slot_colors).max() > lp:
                hit = t
                break
        first_exceedance.append(hit)
    exceeded = sum(1 for h in first_exceedance if h is not None)
    return {
        "n": n,
        "gamma": params.gamma,
        "ell": params.ell,
        "ell_prime": lp,
        "t0": t0,
        "trials": trials,
        "exceedance_fraction": exceeded / trials if trials else 0.0,
        "first_exceedance_times": first_exceedance,
        "metadata": METADATA,
    }


def run_coupled_dominating_process(
    params: LowerBoundParams,
    initial: Configuration,
    color: int,
    rounds: int,
    rng: RngStream,
) -> list[tuple[int, int]]:
    """2-Choices and the dominating Binomial process on shared randomness.

    Node j's indicator for "both samples show the tracked color" is dominated
    by Bernoulli(p): with slots ordered so the tracked color occupies a
    prefix, the sample hits it iff u*n < c_color, and c_color <= ell_prime
    implies u < ell_prime/n. Asserts c_color(t) <= P(t) for every round
    before c_color first exceeds ell_prime.
    """
    n = params.n
    if initial.n != n:
        raise ValueError("initial configuration size mismatch")
    k0 = len(initial.counts)
    if not 0 <= color < k0 + 1:
        raise ValueError("tracked color index out of range")
    lp = params.ell_prime
    thresh = lp / n
    gen = rng.gen

    # relabel so the tracked color is id 0 and occupies the first slots;
    # color == k0 means "absent color" (support 0)
    counts = np.zeros(k0 + 1, dtype=np.int64)
    if color < k0:
        counts[0] = initial.counts[color]
        counts[1 : k0 + 1] = [c for i, c in enumerate(initial.counts) if i != color] + [0]
    else:
        counts[1:] = initial.counts
    slot_colors = np.repeat(np.arange(k0 + 1), counts)

    c_col = int(counts[0])
    p_val = params.ell
    pairs = [(c_col, p_val)]
    exceeded = c_col > lp
    for _ in range(rounds):
        slot_colors, u1, u2 = _two_choices_round_slots(slot_colors, n, gen)
        p_val += int(np.count_nonzero((u1 < thresh) & (u2 < thresh)))
        cnts = np.bincount(slot_colors, minlength=k0 + 1)
        c_col = int(cnts[0])
        pairs.append((c_col, p_val))
        if not exceeded:
            if c_col > lp:
                exceeded = True
            elif c_col > p_val:
                raise CouplingViolation(
                    f"c_color = {c_col} > P = {p_val} before first exceedance"
                )
        # keep tracked color in the leading slots
        slot_colors = np.repeat(np.arange(k0 + 1), cnts)
    return pairs


def run_two_phase_check(
    n: int,
    trials: int,
    rng: RngStream,
    k_split: Optional[int] = None,
    max_rounds: int = 10**6,
    seed: int = 0,
) -> dict:
    """Phase-split timing for 3-majority vs Voter from the n-color start.

    Phase 1 ends at <= k_split colors (default ceil(n**0.25)); phase 2 runs
    3-majority on to consensus. Paired seeds per trial.
    """
    if n < 256:
        raise ValueError("two-phase check needs n >= 256")
    from .rules import h_majority_rule, voter_rule

    k = k_split if k_split is not None else math.ceil(n**0.25)
    hm3, voter = h_majority_rule(3), voter_rule()
    rows = []
    for trial in range(trials):
        row = {"trial": trial}
        for rule in (hm3, voter):
            stream = RngStream(seed, ("two-phase", rule.label(), trial))
            c = Configuration(tuple([1] * n))
            t = 0
            phase1 = None
            while t < max_rounds:
                if c.number_of_colors() <= k and phase1 is None:
                    phase1 = t
                    if rule.kind == "Voter":
                        break
                if c.number_of_colors() <= 1:
                    break
                c = step_rule(rule, c, stream)
                t += 1
            row[f"phase1_{rule.label()}"] = phase1
            if rule.kind != "Voter":
                row["total_hmaj:3"] = t if c.number_of_colors() <= 1 else None
        row["phase2_hmaj:3"] = (
            row["total_hmaj:3"] - row["phase1_hmaj:3"]
            if row["total_hmaj:3"] is not None and row["phase1_hmaj:3"] is not None
            else None
        )
        rows.append(row)
    paired = [
        r
        for r in rows
        if r["phase1_hmaj:3"] is not None and r["phase1_voter"] is not None
    ]
    wins = sum(1 for r in paired if r["phase1_hmaj:3"] <= r["phase1_voter"])
    voter_means = [r["phase1_voter"] for r in paired]
    return {
        "n": n,
        "k_split": k,
        "trials": trials,
        "rows": rows,
        "hmaj_not_slower_fraction": wins / len(paired) if paired else None,
        "voter_phase1_mean": float(np.mean(voter_means)) if voter_means else None,
        "voter_phase1_budget_20n_over_k": 20.0 * n / k,
        "metadata": METADATA,
    }


# ---------------------------------------------------------------------------
# output


def write_jsonl(records: list[dict], path: str) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def write_csv_summary(records: list[dict], path: str) -> None:
    """Aggregate stopping times per rule: mean/median/quantiles/censored."""
    by_rule: dict[str, list] = {}
    for rec in records:
        by_rule.setdefault(rec["rule"], []).append(rec)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["rule", "trials", "censored", "mean", "median", "q10", "q90", "max"]
        )
        for rule in sorted(by_rule):
            recs = by_rule[rule]
            times = [r["stop_time"] for r in recs if r["stop_time"] is not None]
            censored = sum(1 for r in recs if r["censored"])
            if times:
                arr = np.array(times, dtype=float)
                writer.writerow(
                    [
                        rule,
                        len(recs),
                        censored,
                        f"{arr.mean():.6g}",
                        f"{np.median(arr):.6g}",
                        f"{np.quantile(arr, 0.1):.6g}",
                        f"{np.quantile(arr, 0.9):.6g}",
                        f"{arr.max():.6g}",
                    ]
                )
            else:
                writer.writerow([rule, len(recs), censored, "", "", "", "", ""])
