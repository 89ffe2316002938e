"""Coalescing random walks and the time-reversal coupling with Voter.

One walk starts on each node; each round every walk moves to a uniformly
random neighbor, and walks meeting on a node merge. Running Voter backwards
through the same neighbor-choice maps yields, round for round, exactly as
many opinions as there are surviving walks: the duality identity checked
here. Walks never stay put (neighbor-only moves), unlike the self-inclusive
AC Voter of the rules module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .sampler import RngStream


class CouplingViolation(AssertionError):
    """The exact duality identity failed: an implementation bug."""


class Truncated(RuntimeError):
    pass


@dataclass
class Graph:
    """Complete graph (adjacency None) or explicit symmetric adjacency."""

    n: int
    adjacency: Optional[list[np.ndarray]] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("graph needs at least 2 nodes")
        if self.adjacency is not None:
            if len(self.adjacency) != self.n:
                raise ValueError("adjacency length must equal n")
            for u, nbrs in enumerate(self.adjacency):
                if len(nbrs) == 0:
                    raise ValueError(f"node {u} has degree 0")

    @property
    def is_complete(self) -> bool:
        return self.adjacency is None

    def neighbor_map_row(self, rng: RngStream) -> np.ndarray:
        """One round of uniform neighbor choices Y(u) for all nodes."""
        gen = rng.gen
        if self.is_complete:
            r = gen.integers(0, self.n - 1, size=self.n)
            u = np.arange(self.n)
            return np.where(r >= u, r + 1, r)
        degrees = np.array([len(a) for a in self.adjacency])
        picks = gen.integers(0, degrees)
        return np.array([self.adjacency[u][picks[u]] for u in range(self.n)])


def complete_graph(n: int) -> Graph:
    return Graph(n)


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least 3 nodes")
    adj = [np.array([(u - 1) % n, (u + 1) % n]) for u in range(n)]
    return Graph(n, adj)


def graph_from_edge_list(text: str) -> Graph:
    """Parse "n m" header plus m lines "u v" (0-indexed, undirected)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    n, m = (int(tok) for tok in lines[0].split())
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for ln in lines[1 : m + 1]:
        u, v = (int(tok) for tok in ln.split())
        nbrs[u].add(v)
        nbrs[v].add(u)
    return Graph(n, [np.array(sorted(s)) for s in nbrs])


@dataclass
class RandomMapTable:
    """maps[t][u] = the uniformly chosen neighbor of u in round t."""

    maps: np.ndarray  # shape (t_max, n)

    @property
    def rounds(self) -> int:
        return self.maps.shape[0]


def draw_map_table(g: Graph, t_max: int, rng: RngStream) -> RandomMapTable:
    rows = np.empty((t_max, g.n), dtype=np.int64)
    for t in range(t_max):
        rows[t] = g.neighbor_map_row(rng)
    return RandomMapTable(rows)


@dataclass
class CoalescenceTrajectory:
    walk_counts: list[int]
    positions: Optional[list[np.ndarray]] = None


def run_coalescence(
    g: Graph, maps: RandomMapTable, keep_positions: bool = False
) -> CoalescenceTrajectory:
    """Deterministically run walks through the map table: X_t = Y_{t-1}(X_{t-1})."""
    pos = np.arange(g.n)
    counts = [g.n]
    positions = [pos.copy()] if keep_positions else None
    for t in range(maps.rounds):
        pos = maps.maps[t][pos]
        counts.append(int(np.unique(pos).size))
        if keep_positions:
            positions.append(pos.copy())
    return CoalescenceTrajectory(counts, positions)


def run_voter_with_maps(g: Graph, maps: RandomMapTable, tau: int) -> int:
    """Opinion count after tau Voter rounds run through the reversed maps.

    Every node starts with its own color; round r pulls through map row
    Y_{tau-r}. Returns the number of distinct surviving opinions.
    """
    if tau > maps.rounds:
        raise ValueError("tau exceeds available map rounds")
    opinions = np.arange(g.n)
    for r in range(1, tau + 1):
        opinions = opinions[maps.maps[tau - r]]
    return int(np.unique(opinions).size)


def duality_check(g: Graph, t_max: int, rng: RngStream) -> bool:
    """Assert the exact duality: voter opinions == walk count at every tau."""
    maps = draw_map_table(g, t_max, rng)
    traj = run_coalescence(g, maps)
    for tau in range(t_max + 1):
        voter = run_voter_with_maps(g, maps, tau)
        if voter != traj.walk_counts[tau]:
            raise CouplingViolation(
                f"tau={tau}: voter has {voter} opinions, walks number {traj.walk_counts[tau]}"
            )
    return True


@dataclass
class StoppingTimeSample:
    target: int
    times: list[float]
    censored: int = 0

    @property
    def mean(self) -> float:
        finite = [t for t in self.times if np.isfinite(t)]
        return float(np.mean(finite)) if finite else float("inf")


def _step_complete_walks(pos: np.ndarray, n: int, gen: np.random.Generator) -> np.ndarray:
    """Move each occupied node's walk to a uniform non-self node; merge."""
    r = gen.integers(0, n - 1, size=pos.size)
    moved = np.where(r >= pos, r + 1, r)
    return np.unique(moved)


def coalescence_time_stats(
    g: Graph, k: int, trials: int, rng: RngStream, max_rounds: int = 10**6
) -> StoppingTimeSample:
    """Empirical samples of the time for the walk count to drop to <= k."""
    if not 1 <= k <= g.n:
        raise ValueError("need 1 <= k <= n")
    times: list[float] = []
    censored = 0
    for trial in range(trials):
        gen = rng.child(trial).gen
        pos = np.arange(g.n)
        t = 0
        while pos.size > k and t < max_rounds:
            if g.is_complete:
                pos = _step_complete_walks(pos, g.n, gen)
            else:
                row = g.neighbor_map_row(rng.child(trial, "maps", t))
                pos = np.unique(row[pos])
            t += 1
        if pos.size > k:
            censored += 1
            times.append(float("inf"))
        else:
            times.append(float(t))
    return StoppingTimeSample(target=k, times=times, censored=censored)


@dataclass
class DriftEstimate:
    x: int
    mean: float
    sigma: float  # standard error of the mean


def empirical_one_step_drift(
    g: Graph, x: int, samples: int, rng: RngStream
) -> DriftEstimate:
    """Monte-Carlo estimate of E[X_{t+1} | X_t = x] on the complete graph.

    Walks are placed on x distinct uniform nodes, matching the conditional
    state up to exchangeability.
    """
    if not g.is_complete:
        raise ValueError("drift estimation is implemented for the complete graph")
    if not 2 <= x <= g.n:
        raise ValueError("need 2 <= x <= n")
    gen = rng.gen
    outcomes = np.empty(samples)
    for s in range(samples):
        pos = gen.permutation(g.n)[:x]
        outcomes[s] = _step_complete_walks(pos, g.n, gen).size
    mean = float(outcomes.mean())
    sigma = float(outcomes.std(ddof=1) / np.sqrt(samples))
    return DriftEstimate(x=x, mean=mean, sigma=sigma)


def walk_count_chain(n: int):
    """Walk-count step sampler for drift validation on the complete graph.

    State x -> place x walks on distinct uniform nodes, move once, count
    distinct positions.
    """

    def step(x: float, rng: RngStream) -> float:
        gen = rng.gen
        pos = gen.permutation(n)[: int(round(x))]
        return float(_step_complete_walks(pos, n, gen).size)

    return step


def expected_distinct_after_step(n: int, x: int) -> float:
    """Exact E[X_{t+1} | X_t = x] for complete-graph neighbor-only moves.

    Occupancy computation: each node v is missed by a walk at u != v with
    probability 1 - 1/(n-1), so P(v unoccupied) = (1-1/(n-1))^(x - [v occupied]).
    """
    q = 1.0 - 1.0 / (n - 1)
    # occupied nodes cannot be hit by their own walk
    occupied = x * (1.0 - q ** (x - 1))
    free = (n - x) * (1.0 - q**x)
    return occupied + free
