import math

import numpy as np
import pytest

from smallcells.analytic import RatePair, cond_sigma_given_perimeter
from smallcells.config import BLOCK_SIZE
from smallcells.errors import StarvationError
from smallcells.experiments import (
    CondEstimate,
    Histogram,
    ShapeEvent,
    SizeEvent,
    conditional_counts,
    conditional_estimate,
    conditional_sigma_samples,
    dkw_bound,
    histogram,
    ks_statistic,
    slab_uniformity_sample,
    uniform_cdf,
)
from smallcells.functionals import SizeFunctional
from smallcells.sampler import SampleStreamSpec


def test_histogram_bins():
    h = histogram([0.0, 0.05, 0.5, 0.99, 1.0, -0.1, 1.2], 0.0, 1.0, 10)
    assert h.counts[0] == 2
    assert h.counts[5] == 1
    # the right edge belongs to the last bin
    assert h.counts[9] == 2
    assert (h.underflow, h.overflow) == (1, 1)
    assert h.total == 7


def test_histogram_frame():
    frame = histogram([0.1, 0.2], 0.0, 1.0, 4).to_frame()
    assert list(frame.columns) == ["bin_lo", "bin_hi", "count"]
    assert frame["bin_lo"].tolist() == pytest.approx([0.0, 0.25, 0.5, 0.75])
    assert frame["count"].tolist() == [2, 0, 0, 0]


def test_histogram_merge():
    a = histogram([0.1, 0.6], 0.0, 1.0, 2)
    b = histogram([0.7, 2.0], 0.0, 1.0, 2)
    merged = a.merge(b)
    assert merged.counts == (1, 2)
    assert merged.overflow == 1
    with pytest.raises(ValueError, match="identical bins"):
        a.merge(histogram([0.1], 0.0, 2.0, 2))


def test_histogram_validation():
    with pytest.raises(ValueError, match="empty"):
        histogram([0.1], 1.0, 1.0, 4)
    with pytest.raises(ValueError, match="at least one bin"):
        Histogram(lo=0.0, hi=1.0, counts=())


def test_ks_statistic_small_samples():
    assert ks_statistic([0.5], uniform_cdf) == pytest.approx(0.5)
    assert ks_statistic([0.75, 0.25], uniform_cdf) == pytest.approx(0.25)


def test_ks_statistic_scalar_cdf():
    def cdf(x):
        return min(1.0, max(0.0, float(x)))

    assert ks_statistic([0.75, 0.25], cdf) == pytest.approx(0.25)


def test_ks_statistic_needs_samples():
    with pytest.raises(ValueError, match="at least one sample"):
        ks_statistic([], uniform_cdf)


def test_dkw_bound():
    assert dkw_bound(150) == pytest.approx(0.1329, abs=1e-4)
    assert dkw_bound(150, alpha=0.05) < dkw_bound(150)
    with pytest.raises(ValueError, match="alpha"):
        dkw_bound(10, alpha=1.0)


def test_event_validation():
    with pytest.raises(ValueError, match="non-negative"):
        ShapeEvent(kind="sigma", eps=-0.1)
    with pytest.raises(ValueError):
        ShapeEvent(kind="volume", eps=0.1)
    with pytest.raises(ValueError, match="positive"):
        SizeEvent(functional=SizeFunctional.HALF_PERIMETER, threshold=0.0)


def test_starvation():
    with pytest.raises(StarvationError) as err:
        CondEstimate.from_counts(0, 0, 1000)
    assert err.value.total == 1000


def test_estimate_from_counts():
    est = CondEstimate.from_counts(25, 100, 10_000)
    assert est.estimate == 0.25
    assert est.std_error == pytest.approx(math.sqrt(0.25 * 0.75 / 100))


def test_conditional_starves_on_tiny_threshold(standard_2d):
    spec = SampleStreamSpec(seed=1, count=100)
    with pytest.raises(StarvationError, match="never occurred"):
        conditional_estimate(
            standard_2d,
            spec,
            ShapeEvent(kind="sigma", eps=0.5),
            SizeEvent(functional=SizeFunctional.EDGE_PRODUCT_AREA, threshold=1e-30),
        )


def test_equal_rates_sigma_given_perimeter(standard_2d):
    spec = SampleStreamSpec(seed=21, count=200_000)
    est = conditional_estimate(
        standard_2d,
        spec,
        ShapeEvent(kind="sigma", eps=0.5),
        SizeEvent(functional=SizeFunctional.HALF_PERIMETER, threshold=1.0),
    )
    assert abs(est.estimate - 0.5) < 4 * est.std_error


def test_unequal_rates_sigma_given_perimeter(sixty_degree_model):
    spec = SampleStreamSpec(seed=22, count=200_000)
    est = conditional_estimate(
        sixty_degree_model,
        spec,
        ShapeEvent(kind="sigma", eps=0.5),
        SizeEvent(functional=SizeFunctional.HALF_PERIMETER, threshold=1.0),
    )
    exact = cond_sigma_given_perimeter(RatePair.from_model(sixty_degree_model), 0.5, 1.0)
    assert abs(est.estimate - exact) < 4 * est.std_error


def test_counts_do_not_depend_on_workers(sixty_degree_model):
    shapes = [ShapeEvent(kind="sigma", eps=0.3), ShapeEvent(kind="tau", eps=1.0)]
    sizes = [
        SizeEvent(functional=SizeFunctional.EDGE_PRODUCT_AREA, threshold=0.1),
        SizeEvent(functional=SizeFunctional.HALF_PERIMETER, threshold=0.5),
    ]
    n = 2 * BLOCK_SIZE + 99
    one = conditional_counts(sixty_degree_model, SampleStreamSpec(seed=3, count=n), shapes, sizes)
    three = conditional_counts(
        sixty_degree_model, SampleStreamSpec(seed=3, count=n, worker_hint=3), shapes, sizes
    )
    assert np.array_equal(one[0], three[0])
    assert np.array_equal(one[1], three[1])
    assert one[0].shape == (2, 2)
    assert np.all(one[0] <= one[1])


def test_sigma_uniform_given_half_perimeter(standard_2d):
    samples = conditional_sigma_samples(
        standard_2d,
        SampleStreamSpec(seed=5, count=50_000),
        SizeEvent(functional=SizeFunctional.HALF_PERIMETER, threshold=0.5),
    )
    assert len(samples) > 1000
    assert ks_statistic(samples, uniform_cdf) < dkw_bound(len(samples), 1e-4)


def test_uniformity_on_slab(standard_2d):
    ratios = slab_uniformity_sample(
        standard_2d, SampleStreamSpec(seed=6, count=300_000), s=1.0, rel_width=1e-2
    )
    assert len(ratios) > 500
    assert np.all((ratios >= 0) & (ratios <= 1))
    assert ks_statistic(ratios, uniform_cdf) < dkw_bound(len(ratios), 1e-4)


def test_uniformity_slab_validation(standard_2d):
    with pytest.raises(ValueError, match="positive"):
        slab_uniformity_sample(standard_2d, SampleStreamSpec(seed=6, count=10), s=0.0)


def test_histogram_edge_convention():
    assert histogram([0.0, 0.5, 1.0], 0.0, 1.0, 2).counts == (1, 2)
    assert histogram([], 0.0, 1.0, 3).counts == (0, 0, 0)
