import math

import numpy as np
import pytest
from scipy import integrate, special

from smallcells.analytic import (
    QuadratureConfig,
    RatePair,
    UNIT_RATES,
    area_cdf_methods,
    cond_sigma_given_area,
    cond_tau_given_area,
    exp_integral_e1,
    numerator_sigma_area,
    prob_area_less,
    prob_edge_exceeds_area_less,
    sigma_area_limit_constant,
    tau_area_limit_constant,
)
from smallcells.sampler import SampleStreamSpec, sample_array


@pytest.mark.parametrize("a", [1e-10, 1e-6, 1e-3, 0.1, 1.0, 4.0, 30.0])
def test_three_methods_agree(a):
    values = area_cdf_methods(a)
    assert max(values.values()) - min(values.values()) < 1e-8


@pytest.mark.parametrize("a", [1e-8, 1e-4, 0.5, 2.0])
def test_area_cdf_matches_bessel_identity(a):
    x = 2 * math.sqrt(a)
    assert prob_area_less(a) == pytest.approx(1 - x * float(special.k1(x)), abs=1e-10)


def test_area_cdf_small_a_behaves_like_a_log():
    # 1 - 2 sqrt(a) K_1(2 sqrt(a)) = a ln(1/a) + O(a)
    a = 1e-12
    ratio = prob_area_less(a) / (a * math.log(1 / a))
    assert ratio == pytest.approx(1.0, abs=0.1)


def test_area_cdf_general_rates():
    rates = RatePair(gamma1=2.0, gamma2=0.5)
    assert prob_area_less(0.3, rates=rates) == pytest.approx(prob_area_less(0.3), rel=1e-12)
    rates = RatePair(gamma1=2.0, gamma2=3.0)
    assert prob_area_less(0.1, rates=rates) == pytest.approx(prob_area_less(0.6), rel=1e-12)


def test_area_cdf_single_methods():
    for method in ("quadrature", "laplace", "bessel"):
        assert prob_area_less(0.25, method=method) == pytest.approx(
            prob_area_less(0.25), abs=1e-8
        )
    with pytest.raises(ValueError, match="Unknown method"):
        prob_area_less(0.25, method="monte-carlo")


def test_area_cdf_needs_positive_threshold():
    with pytest.raises(ValueError, match="a must be positive"):
        prob_area_less(0.0)


def _numerator_by_region(eps, a):
    half = eps / 2
    c = half / (1 - half)
    value, _ = integrate.dblquad(
        lambda y, x: math.exp(-x - y),
        0.0,
        math.sqrt(a / c),
        lambda x: c * x,
        lambda x: max(c * x, min(x / c, a / x)),
        epsabs=1e-14,
        epsrel=1e-11,
    )
    return value


@pytest.mark.parametrize("eps,a", [(0.5, 0.1), (0.2, 1.0), (0.8, 1e-3)])
def test_numerator_matches_region(eps, a):
    assert numerator_sigma_area(eps, a) == pytest.approx(_numerator_by_region(eps, a), rel=1e-7)


def test_numerator_limit_constant():
    assert sigma_area_limit_constant(0.5) == pytest.approx(math.log(3))
    a = 1e-6
    assert numerator_sigma_area(0.5, a) / a == pytest.approx(math.log(3), rel=1e-2)


def test_cond_sigma_given_area_decreases():
    values = np.array([cond_sigma_given_area(0.5, a) for a in (1e-2, 1e-3, 1e-4)])
    assert np.all(np.diff(values) < 0)
    assert np.all((values > 0) & (values < 1))


def test_cond_sigma_given_area_large_a_approaches_unconditional():
    # for equal unit rates sigma is uniform, so P(sigma > eps) = 1 - eps
    assert cond_sigma_given_area(0.5, 1e4) == pytest.approx(0.5, abs=1e-6)


def test_edge_exceeds_limit():
    assert tau_area_limit_constant(1.0) == pytest.approx(0.21938393, abs=1e-8)
    a = 1e-8
    assert prob_edge_exceeds_area_less(1.0, a) / a == pytest.approx(
        exp_integral_e1(1.0), rel=1e-4
    )


def test_edge_exceeds_general_rates():
    rates = RatePair(gamma1=2.0, gamma2=0.5)
    a = 1e-8
    assert prob_edge_exceeds_area_less(0.7, a, rates=rates) / a == pytest.approx(
        tau_area_limit_constant(0.7, rates), rel=1e-4
    )


def test_cond_tau_given_area_tends_to_zero():
    values = [cond_tau_given_area(1.0, a) for a in (1e-2, 1e-4, 1e-6)]
    assert values[0] > values[1] > values[2]
    # ratio to the limit law 2 E_1(1) / ln(1/a)
    a = 1e-6
    assert values[2] == pytest.approx(
        2 * exp_integral_e1(1.0) * a / prob_area_less(a), rel=0.05
    )


def test_cond_tau_given_area_with_overlap():
    # a > eps^2 makes both edges able to exceed eps at once
    value = cond_tau_given_area(0.5, 1.0, rates=UNIT_RATES)
    assert 0 < value < 1


def test_eps_validation():
    with pytest.raises(ValueError, match="eps must lie in"):
        numerator_sigma_area(1.5, 0.1)
    with pytest.raises(ValueError, match="eps must be positive"):
        cond_tau_given_area(0.0, 0.1)


def test_custom_quadrature_config():
    cfg = QuadratureConfig(rel_tol=1e-8, abs_tol=1e-12)
    assert cond_sigma_given_area(0.5, 1e-3, cfg) == pytest.approx(
        cond_sigma_given_area(0.5, 1e-3), rel=1e-6
    )


def test_small_area_shape_probabilities_decrease_over_the_decades():
    grid = [10.0**-k for k in range(2, 9)]
    sigmas = np.array([cond_sigma_given_area(0.5, a) for a in grid])
    taus = np.array([cond_tau_given_area(0.5, a) for a in grid])
    assert np.all(np.diff(sigmas) < 0)
    assert np.all(np.diff(taus) < 0)
    # the decay is only logarithmic, like constant / ln(1/a)
    log_inv = math.log(1e8)
    assert sigmas[-1] == pytest.approx(math.log(3) / log_inv, rel=0.05)
    assert taus[-1] == pytest.approx(2 * exp_integral_e1(0.5) / log_inv, rel=0.05)


@pytest.mark.parametrize("a", [1e-3, 1e-2, 1e-1])
def test_area_cdf_matches_sampled_cells(standard_2d, a):
    n = 10**6
    cells = sample_array(standard_2d, SampleStreamSpec(seed=12, count=n))
    exact = prob_area_less(a)
    empirical = np.mean(cells[:, 0] * cells[:, 1] < a)
    assert abs(empirical - exact) < 4 * math.sqrt(exact * (1 - exact) / n)
