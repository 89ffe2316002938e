"""Drift-theorem bound calculators and an empirical validator.

Three forms: the additive lemma E[T] <= (m - k')/c, the LW14 variable form
x_min/h(x_min) + integral of 1/h, and the generalized variable form
integral from k' to m of 1/h. Power-law drift functions integrate in closed
form; tabulated ones go through composite trapezoid quadrature whose error
estimate is added to the reported bound (the theorems only need an upper
bound).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .sampler import RngStream


class NoDrift(ValueError):
    pass


class DriftDomainError(ValueError):
    pass


class HypothesisFailed(RuntimeError):
    """The supplied chain does not satisfy the drift hypothesis."""


@dataclass(frozen=True)
class DriftFunction:
    """Positive non-decreasing drift h on [x_min, x_max].

    Either a power law h(x) = a * x**b or a tabulated monotone grid.
    """

    x_min: float
    x_max: float
    a: Optional[float] = None
    b: Optional[float] = None
    grid_x: Optional[tuple[float, ...]] = None
    grid_h: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise DriftDomainError("need x_min < x_max")
        if self.is_power_law:
            if self.a <= 0:
                raise ValueError("power-law coefficient must be positive")
            if self.b < 0:
                raise ValueError("power-law exponent must be non-negative (h non-decreasing)")
        else:
            if self.grid_x is None or self.grid_h is None:
                raise ValueError("need either (a, b) or a tabulated grid")
            gx, gh = np.asarray(self.grid_x), np.asarray(self.grid_h)
            if len(gx) < 2 or len(gx) != len(gh):
                raise ValueError("grid needs >= 2 aligned points")
            if np.any(np.diff(gx) <= 0):
                raise ValueError("grid abscissae must be strictly increasing")
            if np.any(gh <= 0):
                raise ValueError("h must be positive")
            if np.any(np.diff(gh) < 0):
                raise ValueError("h must be non-decreasing")

    @property
    def is_power_law(self) -> bool:
        return self.a is not None

    def __call__(self, x: float) -> float:
        if not (self.x_min - 1e-12 <= x <= self.x_max + 1e-12):
            raise DriftDomainError(f"x = {x} outside [{self.x_min}, {self.x_max}]")
        if self.is_power_law:
            return self.a * x**self.b
        return float(np.interp(x, self.grid_x, self.grid_h))


def power_law(a: float, b: float, x_min: float, x_max: float) -> DriftFunction:
    return DriftFunction(x_min=x_min, x_max=x_max, a=a, b=b)


def tabulated(grid_x, grid_h, x_min=None, x_max=None) -> DriftFunction:
    gx = tuple(float(v) for v in grid_x)
    return DriftFunction(
        x_min=gx[0] if x_min is None else x_min,
        x_max=gx[-1] if x_max is None else x_max,
        grid_x=gx,
        grid_h=tuple(float(v) for v in grid_h),
    )


def tabulated_from_csv(text: str) -> DriftFunction:
    """Load a tabulated drift function from "x,h" CSV rows."""
    xs, hs = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.lower().startswith("x"):
            continue
        x_str, h_str = line.split(",")
        xs.append(float(x_str))
        hs.append(float(h_str))
    return tabulated(xs, hs)


@dataclass
class DriftBoundResult:
    bound: float
    form_used: str
    integral_error_estimate: float = 0.0


def _integral_inverse(h: DriftFunction, lo: float, hi: float) -> tuple[float, float]:
    """(integral of 1/h over [lo, hi], quadrature error estimate)."""
    if hi < lo:
        raise DriftDomainError("integration bounds reversed")
    if hi == lo:
        return 0.0, 0.0
    if h.is_power_law:
        a, b = h.a, h.b
        if b == 1.0:
            return math.log(hi / lo) / a, 0.0
        val = (hi ** (1.0 - b) - lo ** (1.0 - b)) / (a * (1.0 - b))
        return val, 0.0
    # composite trapezoid on the grid restricted to [lo, hi], with the
    # standard (b-a) h_step^2 / 12 * max|f''| estimate via divided differences
    xs = np.array(h.grid_x)
    inside = xs[(xs > lo) & (xs < hi)]
    nodes = np.concatenate([[lo], inside, [hi]])
    f = 1.0 / np.interp(nodes, h.grid_x, h.grid_h)
    val = float(np.trapezoid(f, nodes))
    if len(nodes) >= 3:
        d2 = np.abs(np.diff(f, 2) / (np.diff(nodes)[:-1] * np.diff(nodes)[1:]))
        max_f2 = float(d2.max()) * 2.0
    else:
        max_f2 = 0.0
    step = float(np.diff(nodes).max())
    err = (hi - lo) * step**2 / 12.0 * max_f2
    return val, err


def additive_drift_bound(m: float, k_prime: float, c: float) -> DriftBoundResult:
    """E[T] <= (m - k') / c for per-step drift at least c."""
    if c <= 0:
        raise NoDrift("per-step drift must be positive")
    if m < k_prime or k_prime < 0:
        raise DriftDomainError("need m >= k' >= 0")
    return DriftBoundResult(bound=(m - k_prime) / c, form_used="AdditiveLemma")


def variable_drift_bound_lw14(h: DriftFunction, x0: float) -> DriftBoundResult:
    """E[T] <= x_min/h(x_min) + integral_{x_min}^{x0} dy/h(y)."""
    if not (h.x_min <= x0 <= h.x_max):
        raise DriftDomainError(f"x0 = {x0} outside drift domain")
    head = h.x_min / h(h.x_min)
    integral, err = _integral_inverse(h, h.x_min, x0)
    return DriftBoundResult(
        bound=head + integral + err, form_used="VariableLW14", integral_error_estimate=err
    )


def variable_drift_bound_generalized(
    h: DriftFunction, m: float, k_prime: float
) -> DriftBoundResult:
    """E[T] <= integral_{k'}^{m} du/h(u); k' = 0 routes through the 1/h(1) offset."""
    if k_prime > m:
        raise DriftDomainError("need k' <= m")
    if k_prime == 0:
        # state space {0} union [1, inf): g carries a 1/h(1) head term
        lo = max(1.0, h.x_min)
        head = 1.0 / h(lo)
    else:
        lo = k_prime
        head = 0.0
    integral, err = _integral_inverse(h, lo, m)
    return DriftBoundResult(
        bound=head + integral + err,
        form_used="VariableGeneralized",
        integral_error_estimate=err,
    )


@dataclass
class BoundValidationReport:
    drift_ok: bool
    drift_points: list[tuple[float, float, float]]  # (x, empirical drop, required h(x))
    bound: float
    empirical_mean_time: float
    mean_time_sigma: float
    bound_ok: bool


def validate_bound(
    chain: Callable[[float, RngStream], float],
    x0: float,
    k: float,
    h: DriftFunction,
    trials: int,
    rng: RngStream,
    drift_samples: int = 2000,
    max_rounds: int = 10**6,
) -> BoundValidationReport:
    """Check the drift hypothesis and the concluded bound on a supplied chain.

    (a) estimates E[X_t - X_{t+1} | X_t = x] at a few states and requires it
    to reach h(x) within 3 standard errors; (b) measures E[T] over full
    trajectories and requires it to stay below the computed bound + 3 sigma.
    """
    # (a) drift hypothesis at sampled states
    xs = np.unique(
        np.clip(np.linspace(max(k + 1, h.x_min), min(x0, h.x_max), 5).round(), k + 1, x0)
    )
    drift_points = []
    drift_ok = True
    for i, x in enumerate(xs):
        stream = rng.child("drift", i)
        drops = np.empty(drift_samples)
        for s in range(drift_samples):
            drops[s] = x - chain(float(x), stream.child(s))
        mean_drop = float(drops.mean())
        sigma = float(drops.std(ddof=1) / math.sqrt(drift_samples))
        required = h(float(x))
        drift_points.append((float(x), mean_drop, required))
        if mean_drop < required - 3 * sigma:
            drift_ok = False
    if not drift_ok:
        raise HypothesisFailed(f"empirical drift below h at {drift_points}")

    # (b) hitting-time bound
    bound = variable_drift_bound_lw14(
        DriftFunction(
            x_min=max(k, h.x_min),
            x_max=h.x_max,
            a=h.a,
            b=h.b,
            grid_x=h.grid_x,
            grid_h=h.grid_h,
        ),
        x0,
    ).bound
    times = np.empty(trials)
    for trial in range(trials):
        stream = rng.child("time", trial)
        x = float(x0)
        t = 0
        while x > k and t < max_rounds:
            x = chain(x, stream.child(t))
            t += 1
        times[trial] = t
    mean_time = float(times.mean())
    sigma_t = float(times.std(ddof=1) / math.sqrt(trials))
    return BoundValidationReport(
        drift_ok=drift_ok,
        drift_points=drift_points,
        bound=bound,
        empirical_mean_time=mean_time,
        mean_time_sigma=sigma_t,
        bound_ok=mean_time <= bound + 3 * sigma_t,
    )
