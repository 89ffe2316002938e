"""Deterministic seeded randomness and the multinomial one-step sampler.

Every Monte-Carlo routine in the package draws from an RngStream, a
(seed, stream_id) pair that derives an independent substream per
(experiment, trial, purpose). Identical pairs give identical sequences
regardless of scheduling, which is what makes parallel trials and the CLI
byte-reproducible.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .core import ProbabilityVector


class InvalidProbabilityVector(ValueError):
    pass


class NoNeighbor(ValueError):
    """Raised when asked for a non-self sample in a 1-node population."""


def _id_to_int(part) -> int:
    """Stable 64-bit integer for one stream-id component."""
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.sha256(str(part).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass
class RngStream:
    """Seeded substream: (seed, stream_id) maps injectively to a PCG64 state."""

    seed: int
    stream_id: tuple = ()
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    @property
    def gen(self) -> np.random.Generator:
        if self._gen is None:
            # the depth word keeps ("a",) and ("a", 0) distinct: SeedSequence
            # treats trailing zero entropy words as absent
            entropy = [int(self.seed) & 0xFFFFFFFFFFFFFFFF, len(self.stream_id)]
            entropy.extend(_id_to_int(p) for p in self.stream_id)
            self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
        return self._gen

    def child(self, *ids) -> "RngStream":
        """Fresh independent substream; does not advance this stream."""
        return RngStream(self.seed, self.stream_id + tuple(ids))


def _theta_array(theta: Union[ProbabilityVector, Sequence[float], np.ndarray]) -> np.ndarray:
    if isinstance(theta, ProbabilityVector):
        arr = theta.as_array()
    else:
        arr = np.asarray(theta, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidProbabilityVector("theta must be a non-empty 1-d vector")
    if np.any(arr < -1e-12) or abs(arr.sum() - 1.0) > 1e-9:
        raise InvalidProbabilityVector(f"invalid probability vector (sum={arr.sum()})")
    return np.clip(arr, 0.0, None)


def sample_multinomial(m: int, theta, rng: RngStream) -> np.ndarray:
    """Draw counts ~ Mult(m, theta); counts always sum to m.

    numpy's generator realizes exactly the sequential conditional-binomial
    construction (category i ~ Binomial(remaining, theta_i / remaining mass)),
    so we use it as the production path; see sample_multinomial_conditional
    for the explicit reference used in cross-validation.
    """
    if m < 0:
        raise ValueError("trial count must be >= 0")
    arr = _theta_array(theta)
    # guard against float drift: numpy requires sum(pvals) <= 1
    arr = arr / arr.sum()
    return rng.gen.multinomial(m, arr)


def sample_multinomial_conditional(m: int, theta, rng: RngStream) -> np.ndarray:
    """Explicit conditional-binomial multinomial, kept for cross-validation."""
    if m < 0:
        raise ValueError("trial count must be >= 0")
    arr = _theta_array(theta)
    arr = arr / arr.sum()
    counts = np.zeros(len(arr), dtype=np.int64)
    remaining = m
    mass_left = 1.0
    for i in range(len(arr) - 1):
        if remaining == 0 or mass_left <= 0:
            break
        p = min(1.0, max(0.0, arr[i] / mass_left))
        c = int(rng.gen.binomial(remaining, p))
        counts[i] = c
        remaining -= c
        mass_left -= arr[i]
    counts[len(arr) - 1] += remaining
    return counts


def sample_multinomial_reference(m: int, theta, rng: RngStream) -> np.ndarray:
    """Per-trial categorical reference sampler (O(m), unbiased by construction)."""
    arr = _theta_array(theta)
    arr = arr / arr.sum()
    draws = rng.gen.choice(len(arr), size=m, p=arr)
    return np.bincount(draws, minlength=len(arr)).astype(np.int64)


def sample_uniform_node(n: int, exclude_self: bool, self_index: int, rng: RngStream) -> int:
    """Uniform node index over [n], or over [n] minus self_index."""
    if n < 1:
        raise ValueError("population size must be >= 1")
    if not exclude_self:
        return int(rng.gen.integers(0, n))
    if n < 2:
        raise NoNeighbor("cannot sample a non-self node when n = 1")
    r = int(rng.gen.integers(0, n - 1))
    return r + 1 if r >= self_index else r
