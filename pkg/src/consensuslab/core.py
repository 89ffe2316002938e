"""Configurations, probability vectors, and majorization utilities.

Shared vocabulary of the whole package: a system state is an integer vector
of per-color supports summing to n, kept in canonical form (sorted
non-increasing, trailing zeros trimmed). All comparisons here are
permutation-invariant, so the canonical form loses nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

# Mass tolerance for probability vectors and per-prefix slack for
# floating-point majorization checks.
MASS_TOL = 1e-9
PREFIX_SLACK = 1e-12


class InvalidConfiguration(ValueError):
    """Raised for empty/all-zero/negative count inputs."""


class MassMismatch(ValueError):
    """Raised when comparing vectors of unequal total mass."""


@dataclass(frozen=True)
class Configuration:
    """Canonical color-support vector: sorted non-increasing, no zeros."""

    counts: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.counts)

    def number_of_colors(self) -> int:
        return len(self.counts)

    def fractions(self) -> np.ndarray:
        """Per-color fractions c_i / n as a float array."""
        n = self.n
        return np.asarray(self.counts, dtype=float) / n

    def exact_fractions(self) -> list[Fraction]:
        n = self.n
        return [Fraction(c, n) for c in self.counts]

    def __len__(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class ProbabilityVector:
    """Per-color adoption probabilities aligned with a configuration."""

    probs: tuple[float, ...]

    def __post_init__(self):
        arr = np.asarray(self.probs, dtype=float)
        if arr.size == 0:
            raise ValueError("empty probability vector")
        if np.any(arr < -PREFIX_SLACK) or np.any(arr > 1 + PREFIX_SLACK):
            raise ValueError("probability entries must lie in [0, 1]")
        if abs(arr.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"probabilities sum to {arr.sum()}, expected 1")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class StopCondition:
    """Stop once at most `kappa` colors remain, or after `max_rounds`."""

    kappa: int = 1
    max_rounds: int = 1_000_000

    def __post_init__(self):
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")


VectorLike = Union[Configuration, ProbabilityVector, Sequence[float], np.ndarray]


def canonicalize(raw_counts: Sequence[int]) -> Configuration:
    """Sort counts non-increasingly, drop zeros, and wrap as Configuration."""
    if any(c != int(c) for c in raw_counts):
        raise InvalidConfiguration(f"non-integer count in {raw_counts}")
    counts = [int(c) for c in raw_counts]
    if len(counts) == 0:
        raise InvalidConfiguration("empty count vector")
    if any(c < 0 for c in counts):
        raise InvalidConfiguration(f"negative count in {raw_counts}")
    counts = sorted((c for c in counts if c > 0), reverse=True)
    if not counts:
        raise InvalidConfiguration("all counts are zero")
    return Configuration(tuple(counts))


def _sorted_values(x: VectorLike) -> np.ndarray:
    if isinstance(x, Configuration):
        return np.asarray(x.counts, dtype=float)  # already sorted
    if isinstance(x, ProbabilityVector):
        vals = np.asarray(x.probs, dtype=float)
    else:
        vals = np.asarray(x, dtype=float)
    return np.sort(vals)[::-1]


def _is_integral(x: VectorLike) -> bool:
    if isinstance(x, Configuration):
        return True
    if isinstance(x, ProbabilityVector):
        return False
    arr = np.asarray(x)
    return np.issubdtype(arr.dtype, np.integer)


def majorizes(a: VectorLike, b: VectorLike) -> bool:
    """True iff every prefix sum of sorted(a) covers that of sorted(b).

    Requires equal total mass: exact for integer vectors, within MASS_TOL
    otherwise. Vectors of different lengths are compared as if zero-padded.
    """
    sa, sb = _sorted_values(a), _sorted_values(b)
    exact = _is_integral(a) and _is_integral(b)
    ta, tb = sa.sum(), sb.sum()
    if exact:
        if int(round(ta)) != int(round(tb)):
            raise MassMismatch(f"total mass {ta} != {tb}")
        slack = 0.0
    else:
        if abs(ta - tb) > MASS_TOL:
            raise MassMismatch(f"total mass {ta} != {tb}")
        slack = PREFIX_SLACK
    d = max(len(sa), len(sb))
    pa = np.zeros(d)
    pb = np.zeros(d)
    pa[: len(sa)] = np.cumsum(sa)
    pa[len(sa):] = ta
    pb[: len(sb)] = np.cumsum(sb)
    pb[len(sb):] = tb
    return bool(np.all(pa >= pb - slack))


def prefix_functional(x: VectorLike, j: int) -> float:
    """Sum of the j largest components (a Schur-convex test function)."""
    if j < 1:
        raise ValueError("prefix length must be >= 1")
    s = _sorted_values(x)
    return float(s[: min(j, len(s))].sum())
