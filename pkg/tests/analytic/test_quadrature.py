import math

import pytest

from smallcells.analytic import QuadratureConfig
from smallcells.analytic.quadrature import (
    integrate_interval,
    integrate_pieces,
    integrate_region,
    tail_limit,
)
from smallcells.errors import NumericFailure, QuadratureError


def test_interval():
    assert integrate_interval(math.exp, 0.0, 1.0) == pytest.approx(math.e - 1, rel=1e-12)


def test_empty_interval():
    assert integrate_interval(math.exp, 1.0, 1.0) == 0.0
    assert integrate_interval(math.exp, 2.0, 1.0) == 0.0


def test_pieces_deduplicate_breaks():
    value = integrate_pieces(lambda x: abs(x - 0.3), [0.0, 0.3, 0.3, 1.0])
    assert value == pytest.approx(0.045 + 0.245, rel=1e-12)


def test_tail_limit():
    cfg = QuadratureConfig(tail_cutoff_exponent=40.0)
    assert tail_limit(1.0, 2.0, cfg) == 21.0


def test_region_triangle():
    value = integrate_region(lambda x, y: 1.0, 0.0, 1.0, lambda x: 0.0, lambda x: x)
    assert value == pytest.approx(0.5, rel=1e-12)


def test_failure_is_reported():
    cfg = QuadratureConfig(max_subdivisions=1)
    with pytest.raises(QuadratureError, match="failed"):
        integrate_interval(lambda x: math.sin(1 / x), 1e-4, 1.0, cfg)


def test_quadrature_error_is_numeric_failure():
    assert issubclass(QuadratureError, NumericFailure)


def test_config_validation():
    with pytest.raises(ValueError, match="tolerances"):
        QuadratureConfig(rel_tol=0.1)
    with pytest.raises(ValueError, match="max_subdivisions"):
        QuadratureConfig(max_subdivisions=0)


def test_region_with_peaked_outer_integrand():
    value = integrate_region(
        lambda x, y: 1000 * math.exp(-1000 * x - y),
        0.0,
        tail_limit(0.0, 1000.0),
        lambda x: 0.0,
        lambda x: 1.0,
        x_points=(1e-3,),
        y_points=lambda x: (0.5,),
    )
    assert value == pytest.approx(-math.expm1(-1.0), rel=1e-9)


def test_region_failure_is_reported():
    cfg = QuadratureConfig(max_subdivisions=1)
    with pytest.raises(QuadratureError, match="failed"):
        integrate_region(
            lambda x, y: math.sin(1 / y), 0.0, 1.0, lambda x: 1e-4, lambda x: 1.0, cfg
        )
