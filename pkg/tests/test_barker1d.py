import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import kstest

from lifted_mcmc.barker1d import (
    BarkerDirectionalProposal,
    CounterexampleProbe,
    GuidedWalkProposal,
    _MASS_TABLE,
    barker_density,
    barker_sample,
    counterexample_probe,
    counterexample_scan,
    directional_mass,
    guided_walk_proposal,
    half_gaussian_sigmoid_mass,
    sample_conditional_halfline,
    standard_normal_target,
)

TARGET = standard_normal_target()


def normal_pdf(z, sigma):
    return math.exp(-0.5 * (z / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))


class CountingRng:
    """Counts half-normal envelope draws so rejection acceptance is observable."""

    def __init__(self, seed):
        self._rng = np.random.default_rng(seed)
        self.normal_draws = 0

    def standard_normal(self):
        self.normal_draws += 1
        return self._rng.standard_normal()

    def random(self):
        return self._rng.random()


# density ----------------------------------------------------------------------


def test_density_zero_gradient_is_symmetric_normal():
    for y in (-3.0, -0.5, 0.0, 1.7):
        assert barker_density(0.0, y, 2.0, TARGET) == pytest.approx(normal_pdf(y, 2.0), rel=1e-12)


def test_density_at_current_point():
    for x in (-2.0, 0.3, 5.0):
        assert barker_density(x, x, 1.5, TARGET) == pytest.approx(normal_pdf(0.0, 1.5), rel=1e-12)


@pytest.mark.parametrize("x", [-2.0, 0.0, 2.0])
@pytest.mark.parametrize("sigma", [2.0, 2.5])
def test_density_integrates_to_one(x, sigma):
    val, err = quad(lambda y: barker_density(x, y, sigma, TARGET), -math.inf, math.inf,
                    epsabs=1e-10, limit=300)
    assert err < 1e-8
    assert val == pytest.approx(1.0, abs=1e-8)


def test_density_requires_positive_sigma():
    with pytest.raises(ValueError):
        barker_density(0.0, 1.0, 0.0, TARGET)


# sampling ----------------------------------------------------------------------


def test_sample_zero_gradient_kolmogorov_smirnov():
    sigma = 2.0
    rng = np.random.default_rng(12)
    draws = np.array([barker_sample(0.0, sigma, TARGET, rng) for _ in range(100_000)])
    result = kstest(draws, "norm", args=(0.0, sigma))
    assert result.pvalue > 0.001


def test_sample_drifts_toward_mode():
    # at x = -2 the gradient is +2: displacements skew positive, and the mean
    # matches the quadrature mean of the density
    sigma, x = 1.5, -2.0
    expected, err = quad(lambda y: (y - x) * barker_density(x, y, sigma, TARGET),
                         -math.inf, math.inf, epsabs=1e-10, limit=300)
    assert expected > 0.1
    rng = np.random.default_rng(13)
    n = 200_000
    disp = np.array([barker_sample(x, sigma, TARGET, rng) - x for _ in range(n)])
    se = disp.std() / math.sqrt(n)
    assert abs(disp.mean() - expected) <= 4 * se


def test_sample_histogram_matches_density():
    sigma, x = 2.0, 0.5
    rng = np.random.default_rng(14)
    n = 1_000_000
    draws = np.array([barker_sample(x, sigma, TARGET, rng) for _ in range(n)])
    edges = np.linspace(x - 4 * sigma, x + 4 * sigma, 33)
    counts, _ = np.histogram(draws, bins=edges)
    for j in range(len(edges) - 1):
        p, _ = quad(lambda y: barker_density(x, y, sigma, TARGET), edges[j], edges[j + 1], epsabs=1e-12)
        se = math.sqrt(max(p * (1 - p), 1e-12) / n)
        assert abs(counts[j] / n - p) <= 4 * se, (j, counts[j] / n, p)


# directional masses -------------------------------------------------------------


def test_mass_zero_gradient_is_half():
    assert directional_mass(0.0, 1, 2.5, TARGET) == pytest.approx(0.5, abs=1e-10)
    assert directional_mass(0.0, -1, 2.5, TARGET) == pytest.approx(0.5, abs=1e-10)


def test_mass_saturates_toward_one():
    # saturation is slow (~1 - 0.553/t), so the 0.999 threshold needs t = 5000
    values = [half_gaussian_sigmoid_mass(t) for t in (0.0, 5.0, 50.0, 500.0, 5000.0)]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert values[-1] > 0.999
    assert half_gaussian_sigmoid_mass(50.0) == pytest.approx(0.9889447, rel=1e-6)


def test_mass_complement_sums_to_one():
    for x in (-3.0, -0.7, 0.0, 1.2, 4.0):
        up = directional_mass(x, 1, 2.2, TARGET)
        down = directional_mass(x, -1, 2.2, TARGET)
        assert up + down == pytest.approx(1.0, abs=1e-10)


def test_mass_monte_carlo_cross_check():
    # sign frequency of unconditional displacements estimates c_{+1}
    sigma, x = 1.0, -1.0  # gradient is +1
    expected = directional_mass(x, 1, sigma, TARGET)
    assert expected == pytest.approx(0.6748568252669762, rel=1e-9)
    rng = np.random.default_rng(15)
    n = 1_000_000
    pos = sum(barker_sample(x, sigma, TARGET, rng) > x for _ in range(n))
    se = math.sqrt(expected * (1 - expected) / n)
    assert abs(pos / n - expected) <= 4 * se


def test_spline_table_matches_quadrature():
    ts = np.linspace(-63.9, 63.9, 257) + 0.013  # off the node grid
    worst = max(abs(_MASS_TABLE.up_mass(float(t)) - half_gaussian_sigmoid_mass(float(t))) for t in ts)
    assert worst <= 1e-8
    # beyond the table the spline path falls back to quadrature
    assert _MASS_TABLE.up_mass(90.0) == half_gaussian_sigmoid_mass(90.0)


def test_proposal_mass_modes_agree():
    spline = BarkerDirectionalProposal(2.5, TARGET, mass_mode="spline")
    exact = BarkerDirectionalProposal(2.5, TARGET, mass_mode="quad")
    for x in (-2.0, 0.0, 0.9, 3.0):
        assert spline.mass(x, 1) == pytest.approx(exact.mass(x, 1), abs=1e-8)


# conditional sampling ------------------------------------------------------------


def test_conditional_halfline_zero_gradient_mean():
    sigma = 2.0
    rng = np.random.default_rng(16)
    n = 100_000
    disp = np.array([sample_conditional_halfline(0.0, 1, sigma, TARGET, rng) for _ in range(n)])
    assert np.all(disp > 0)
    expected = sigma * math.sqrt(2 / math.pi)
    se = disp.std() / math.sqrt(n)
    assert abs(disp.mean() - expected) <= 4 * se


def test_conditional_halfline_signs_and_acceptance_rate():
    sigma, x = 1.0, -1.5  # gradient +1.5
    for nu in (1, -1):
        rng = CountingRng(17)
        n = 100_000
        samples = np.array([sample_conditional_halfline(x, nu, sigma, TARGET, rng) for _ in range(n)])
        assert np.all(nu * (samples - x) > 0)
        expected = directional_mass(x, nu, sigma, TARGET)
        freq = n / rng.normal_draws
        se = math.sqrt(expected * (1 - expected) / rng.normal_draws)
        assert abs(freq - expected) <= 4 * se, (nu, freq, expected)


def test_conditional_trial_cap():
    with pytest.raises(RuntimeError, match="trials"):
        sample_conditional_halfline(0.0, 1, 1.0, TARGET, np.random.default_rng(0), max_trials=0)


# target and guided walk -----------------------------------------------------------


def test_builtin_target_gradient_matches_finite_differences():
    h = 1e-6
    for x in np.linspace(-4, 4, 33):
        fd = (TARGET.log_density(x + h) - TARGET.log_density(x - h)) / (2 * h)
        assert TARGET.gradient(x) == pytest.approx(fd, rel=1e-5, abs=1e-7)


def test_guided_walk_masses_and_ratio():
    gw = guided_walk_proposal(2.5)
    rng = np.random.default_rng(18)
    for _ in range(100):
        x = float(rng.standard_normal())
        assert gw.mass(x, 1) == 0.5 and gw.mass(x, -1) == 0.5
        y = gw.sample_conditional(x, 1, rng)
        assert y > x
        assert gw.log_ratio(x, y) == pytest.approx(-0.5 * (y * y - x * x), rel=1e-12)


def test_guided_walk_is_default_standard_normal():
    assert isinstance(guided_walk_proposal(1.0), GuidedWalkProposal)


# counterexample probe ---------------------------------------------------------------


def test_counterexample_parameter_validation():
    with pytest.raises(ValueError):
        counterexample_probe(1.2, 1.0)
    with pytest.raises(ValueError):
        counterexample_probe(0.9, 1.0)  # 1/s^2 - s^2 - 1 < 0
    with pytest.raises(ValueError):
        counterexample_probe(0.5, -1.0)


def test_counterexample_k_zero_full_mass():
    probe = counterexample_probe(0.5, 0.0)
    # frozen quadrature values for the full off-self acceptance masses
    assert probe.p_mh == pytest.approx(0.6708204, rel=1e-6)
    assert probe.p_rev == pytest.approx(0.3753543, rel=1e-6)
    assert 0.0 < probe.ratio < 1.0


def test_counterexample_ratio_decreases_and_collapses():
    probes = counterexample_scan(0.5, range(0, 7))
    ratios = [p.ratio for p in probes]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert any(p.ratio < 0.01 for p in probes if p.k <= 10)


def test_counterexample_quadrature_self_consistency():
    coarse = counterexample_probe(0.5, 3.0, epsabs=1e-12)
    fine = counterexample_probe(0.5, 3.0, epsabs=5e-13)
    assert abs(coarse.p_rev - fine.p_rev) <= 1e-6 * fine.p_rev
    assert abs(coarse.p_mh - fine.p_mh) <= 1e-6 * fine.p_mh
