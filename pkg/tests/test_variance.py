import math

import numpy as np
import pytest

from lifted_mcmc.ising import IsingParams, enumerate_states, enumerate_target, generate_external_field
from lifted_mcmc.variance import ChainTrace, acceptance_rate, batch_means_variance, standardize


def trace_of(values, accepted=0, burn_in=0):
    values = np.asarray(values, dtype=float)
    return ChainTrace(values=values, accepted_count=accepted, total_steps=len(values), burn_in=burn_in)


def test_iid_normal_trace():
    rng = np.random.default_rng(0)
    trace = trace_of(rng.standard_normal(1_000_000))
    est = batch_means_variance(trace)
    assert abs(est.value - 1.0) <= 3 * est.standard_error
    assert abs(est.value - 1.0) <= 0.05  # converges to the marginal variance


def test_constant_trace_is_zero():
    est = batch_means_variance(trace_of(np.full(10_000, 3.25)))
    assert est.value == 0.0
    assert est.standard_error == 0.0


def test_ar1_closed_form():
    # AR(1) with rho = 0.5 and unit marginal variance has asymptotic variance
    # (1 + rho) / (1 - rho) = 3
    rho = 0.5
    rng = np.random.default_rng(1)
    n = 1_000_000
    innovations = rng.standard_normal(n) * math.sqrt(1 - rho * rho)
    values = np.empty(n)
    x = rng.standard_normal()
    for k in range(n):
        x = rho * x + innovations[k]
        values[k] = x
    est = batch_means_variance(trace_of(values))
    assert abs(est.value - 3.0) <= 3 * est.standard_error, (est.value, est.standard_error)


def test_shift_invariance_exact():
    # dyadic setup (integer data, power-of-two batch sizes) keeps every batch
    # mean exactly representable, so the shifted estimate is bitwise identical
    rng = np.random.default_rng(2)
    base = rng.integers(0, 7, 8192).astype(float)
    est0 = batch_means_variance(trace_of(base), batch_count=64)
    est1 = batch_means_variance(trace_of(base + 1000.0), batch_count=64)
    assert est0.value == est1.value
    assert est0.standard_error == est1.standard_error


def test_quadratic_scaling_exact():
    rng = np.random.default_rng(3)
    base = rng.standard_normal(10_000)
    est0 = batch_means_variance(trace_of(base))
    est2 = batch_means_variance(trace_of(2.0 * base))  # powers of two are exact
    assert est2.value == 4.0 * est0.value
    assert est2.standard_error == 4.0 * est0.standard_error


def test_trace_too_short_and_batch_count_validation():
    with pytest.raises(ValueError, match="too short"):
        batch_means_variance(trace_of(np.zeros(99)))
    with pytest.raises(ValueError, match="batches"):
        batch_means_variance(trace_of(np.zeros(500)), batch_count=2)
    est = batch_means_variance(trace_of(np.random.default_rng(0).standard_normal(500)), batch_count=10)
    assert est.value > 0


def test_acceptance_rate():
    assert acceptance_rate(trace_of(np.zeros(100), accepted=100)) == 1.0
    assert acceptance_rate(trace_of(np.zeros(100), accepted=0)) == 0.0
    assert acceptance_rate(trace_of(np.zeros(200), accepted=123)) == pytest.approx(0.615)
    with pytest.raises(ValueError):
        ChainTrace(values=np.zeros(10), accepted_count=11, total_steps=10, burn_in=0)


def test_standardize():
    vals = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(standardize(vals, 0.0, 1.0), vals)
    np.testing.assert_array_equal(standardize(np.full(5, 2.5), 2.5, 3.0), np.zeros(5))
    with pytest.raises(ValueError):
        standardize(vals, 0.0, 0.0)


def test_standardized_magnetisation_has_unit_variance_exact():
    rng = np.random.default_rng(4)
    params = IsingParams(2, 0.5, generate_external_field(2, 1.0, rng))
    pi = enumerate_target(params)
    mags = enumerate_states(4).sum(axis=1).astype(float)
    mean = float(pi @ mags)
    sd = math.sqrt(float(pi @ (mags - mean) ** 2))
    z = standardize(mags, mean, sd)
    assert float(pi @ z) == pytest.approx(0.0, abs=1e-12)
    assert float(pi @ z**2) == pytest.approx(1.0, rel=1e-12)
