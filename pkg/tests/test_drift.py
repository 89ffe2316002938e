import io

import numpy as np
import pytest

from consensuslab.coalescing import walk_count_chain
from consensuslab.drift import (
    DriftDomainError,
    HypothesisFailed,
    NoDrift,
    additive_drift_bound,
    power_law,
    tabulated,
    tabulated_from_csv,
    validate_bound,
    variable_drift_bound_generalized,
    variable_drift_bound_lw14,
)
from consensuslab.sampler import RngStream


def test_additive_bound():
    assert additive_drift_bound(100, 0, 2).bound == 50.0
    assert additive_drift_bound(10, 4, 3).bound == 2.0
    with pytest.raises(NoDrift):
        additive_drift_bound(100, 0, 0)
    with pytest.raises(DriftDomainError):
        additive_drift_bound(3, 5, 1)


def test_lw14_constant_drift_reduces_to_additive_shape():
    # h(x) = c: bound = x_min/c + (x0 - x_min)/c = x0/c
    h = power_law(a=2.0, b=0.0, x_min=1.0, x_max=100.0)
    r = variable_drift_bound_lw14(h, 100.0)
    assert np.isclose(r.bound, 50.0)


def test_lw14_quadratic_drift_closed_form():
    # h(x) = x^2 / (10 n) with n = 1000, x_min = 10, x0 = 1000:
    # 10/h(10) + 10n (1/10 - 1/1000) = 1000 + 990 = 1990
    h = power_law(a=1.0 / 10000.0, b=2.0, x_min=10.0, x_max=1000.0)
    r = variable_drift_bound_lw14(h, 1000.0)
    assert abs(r.bound - 1990.0) < 1e-9


def test_lw14_rejects_x0_outside_domain():
    h = power_law(a=1.0, b=1.0, x_min=1.0, x_max=10.0)
    with pytest.raises(DriftDomainError):
        variable_drift_bound_lw14(h, 20.0)


def test_generalized_bound_with_positive_floor():
    # integral of 1/x from 4 to 16 = ln 4
    h = power_law(a=1.0, b=1.0, x_min=1.0, x_max=100.0)
    r = variable_drift_bound_generalized(h, m=16.0, k_prime=4.0)
    assert np.isclose(r.bound, np.log(4.0))


def test_generalized_bound_zero_floor_adds_head_term():
    # k' = 0 routes through 1/h(1) + integral_1^m
    h = power_law(a=2.0, b=0.0, x_min=1.0, x_max=100.0)
    r = variable_drift_bound_generalized(h, m=10.0, k_prime=0.0)
    assert np.isclose(r.bound, 0.5 + 9.0 / 2.0)


def test_quadrature_matches_closed_form_random_power_laws():
    gen = RngStream(77).gen
    for trial in range(20):
        a = float(gen.uniform(0.1, 5.0))
        b = float(gen.uniform(0.0, 2.5))
        x_min = float(gen.uniform(1.0, 5.0))
        x0 = x_min + float(gen.uniform(5.0, 50.0))
        exact = variable_drift_bound_lw14(
            power_law(a, b, x_min, x0), x0
        ).bound
        grid = np.linspace(x_min, x0, 50001)
        tab = tabulated(grid, a * grid**b)
        approx = variable_drift_bound_lw14(tab, x0)
        # the bound pads in its own quadrature error estimate to stay a valid
        # upper bound; the raw quadrature value is bound minus that estimate
        quadrature = approx.bound - approx.integral_error_estimate
        assert abs(quadrature - exact) <= 1e-6 * exact + 1e-9
        assert approx.bound >= exact - 1e-6 * exact


def test_tabulated_validation():
    with pytest.raises(ValueError):
        tabulated([1.0, 2.0], [1.0, 0.5])  # decreasing
    with pytest.raises(ValueError):
        tabulated([1.0, 2.0], [0.0, 1.0])  # non-positive
    with pytest.raises(ValueError):
        tabulated([2.0, 1.0], [1.0, 2.0])  # grid not increasing


def test_tabulated_from_csv_roundtrip():
    text = "x,h\n1.0,1.0\n2.0,4.0\n3.0,9.0\n"
    h = tabulated_from_csv(text)
    assert h(2.0) == 4.0
    assert h.x_min == 1.0 and h.x_max == 3.0
    # linear interpolation between grid points
    assert np.isclose(h(2.5), 6.5)


def test_validate_bound_on_walk_count_chain():
    n = 200
    chain = walk_count_chain(n)
    h = power_law(a=1.0 / (10 * n), b=2.0, x_min=5.0, x_max=float(n))
    report = validate_bound(
        chain, x0=float(n), k=5.0, h=h, trials=60, rng=RngStream(123),
        drift_samples=800,
    )
    assert report.drift_ok
    assert report.bound_ok
    assert report.empirical_mean_time <= report.bound + 3 * report.mean_time_sigma


def test_validate_bound_rejects_false_hypothesis():
    # claim a drift far larger than the chain actually has
    n = 200
    chain = walk_count_chain(n)
    h = power_law(a=0.9, b=1.0, x_min=5.0, x_max=float(n))
    with pytest.raises(HypothesisFailed):
        validate_bound(
            chain, x0=float(n), k=5.0, h=h, trials=10, rng=RngStream(124),
            drift_samples=400,
        )
