from .quadrature import QuadratureConfig  # noqa
from .rates import RatePair, UNIT_RATES  # noqa
from .special import exp_integral_e1, bessel_k1  # noqa
from .perimeter import (  # noqa
    cdf_half_perimeter,
    cond_sigma_given_perimeter,
    joint_sigma_perimeter,
    region_quadrature_sigma_perimeter,
    displayed_sigma_perimeter_formula,
    cond_tau_given_perimeter,
)
from .area import (  # noqa
    prob_area_less,
    area_cdf_methods,
    numerator_sigma_area,
    sigma_area_limit_constant,
    cond_sigma_given_area,
    prob_edge_exceeds_area_less,
    cond_tau_given_area,
    tau_area_limit_constant,
)
from .extremes import tau_cdf, tau_quantile, tau_median  # noqa
from .decay import DecayFit, fit_decay_exponent  # noqa
