"""
Distribution of the edge-product area A = XY of the planar typical cell and the conditional laws
of sigma and tau given {A < a}.

The unit-rate functions carry the small-area analysis. For general rates the area event scales:
gamma1 X and gamma2 Y are unit exponentials, so P(A < a) equals the unit-rate value at
gamma1 gamma2 a. Sigma is not invariant under per-axis scaling, so the joint probabilities take
the rates directly.
"""

import logging
import math
from typing import Optional

from ..errors import QuadratureError
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    integrate_interval,
    integrate_pieces,
    tail_limit,
)
from .rates import UNIT_RATES, RatePair
from .special import bessel_k1, exp_integral_e1

logger = logging.getLogger(__name__)

AREA_METHODS = ("quadrature", "laplace", "bessel")

# largest accepted spread between the three evaluations of P(A < a)
METHOD_AGREEMENT_TOL = 1e-8


def _check_eps_a(eps: float, a: float) -> None:
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}.")
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}.")


def _clip_unit(value: float) -> float:
    return min(1.0, max(0.0, value))


def _area_quadrature(a: float, cfg: QuadratureConfig) -> float:
    # P(XY < a) = E[1 - exp(-a / X)]; the integrand changes character at x ~ a and x ~ sqrt(a)
    def integrand(x: float) -> float:
        return math.exp(-x) * -math.expm1(-a / x)

    upper = tail_limit(0.0, 1.0, cfg)
    breaks = [0.0, upper] + [b for b in (a, math.sqrt(a), 1.0) if b < upper]
    return integrate_pieces(integrand, breaks, cfg)


def _area_laplace(a: float, cfg: QuadratureConfig) -> float:
    # 1 - a * int_2^inf exp(-sqrt(a) s) sqrt(s^2 - 4) ds, written in t = sqrt(a) s
    lower = 2 * math.sqrt(a)
    upper = tail_limit(lower, 1.0, cfg)

    def integrand(t: float) -> float:
        return math.exp(-(t - lower)) * math.sqrt((t - lower) * (t + lower))

    breaks = [lower, upper] + [lower + b for b in (lower, 1.0, 10.0) if lower + b < upper]
    return _clip_unit(1 - math.exp(-lower) * integrate_pieces(integrand, breaks, cfg))


def _area_bessel(a: float) -> float:
    x = 2 * math.sqrt(a)
    return _clip_unit(1 - x * bessel_k1(x))


def area_cdf_methods(
    a: float, cfg: Optional[QuadratureConfig] = None
) -> dict[str, float]:
    """
    P(XY < a) for unit-rate edges by each of the three independent evaluations: direct
    quadrature, the Laplace-type integral and the Bessel closed form 1 - 2 sqrt(a) K_1(2 sqrt(a)).

    Returns:
        dict[str, float]: Value per method name.
    """
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}.")
    cfg = cfg or DEFAULT_CONFIG
    return {
        "quadrature": _clip_unit(_area_quadrature(a, cfg)),
        "laplace": _area_laplace(a, cfg),
        "bessel": _area_bessel(a),
    }


def prob_area_less(
    a: float,
    cfg: Optional[QuadratureConfig] = None,
    rates: RatePair = UNIT_RATES,
    method: str = "consensus",
) -> float:
    """
    P(XY < a) for independent exponential edges.

    Args:
        a (float): Area threshold, positive.
        cfg (QuadratureConfig, optional): Tolerances. Defaults to None.
        rates (RatePair, optional): Edge rates. Defaults to unit rates.
        method (str, optional): One of ``"quadrature"``, ``"laplace"``, ``"bessel"``, or
            ``"consensus"``, which evaluates all three, requires them to agree within 1e-8 and
            returns the quadrature value. Defaults to ``"consensus"``.

    Raises:
        ValueError: If a <= 0 or the method is unknown.
        QuadratureError: If the three evaluations disagree.

    Returns:
        float: Value in [0, 1].
    """
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}.")
    cfg = cfg or DEFAULT_CONFIG
    scaled = a * rates.product
    if method == "quadrature":
        return _clip_unit(_area_quadrature(scaled, cfg))
    if method == "laplace":
        return _area_laplace(scaled, cfg)
    if method == "bessel":
        return _area_bessel(scaled)
    if method != "consensus":
        raise ValueError(f"Unknown method {method!r}.")

    values = area_cdf_methods(scaled, cfg)
    spread = max(values.values()) - min(values.values())
    if spread > METHOD_AGREEMENT_TOL:
        raise QuadratureError(f"evaluations of P(A < {a}) disagree: {values}")
    return values["quadrature"]


def numerator_sigma_area(
    eps: float,
    a: float,
    cfg: Optional[QuadratureConfig] = None,
    rates: RatePair = UNIT_RATES,
) -> float:
    """
    P(sigma > eps, XY < a).

    With e = eps / 2 and c = e / (1 - e) the event is {c x < y < x / c, xy < a}. For fixed x the
    y-integral is explicit, leaving a one-dimensional quadrature over 0 < x < sqrt(a / c) whose
    upper y-bound switches from x / c to a / x at x = sqrt(a c).

    Args:
        eps (float): Shape threshold in (0, 1).
        a (float): Area threshold, positive.
        cfg (QuadratureConfig, optional): Tolerances. Defaults to None.
        rates (RatePair, optional): Edge rates. Defaults to unit rates.

    Returns:
        float: The joint probability.
    """
    _check_eps_a(eps, a)
    cfg = cfg or DEFAULT_CONFIG
    half = eps / 2
    c = half / (1 - half)
    g1, g2 = rates.gamma1, rates.gamma2

    def integrand(x: float) -> float:
        y_lo = c * x
        y_hi = min(x / c, a / x)
        if y_hi <= y_lo:
            return 0.0
        return g1 * math.exp(-g1 * x - g2 * y_lo) * -math.expm1(-g2 * (y_hi - y_lo))

    # beyond the tail limit the density is below exp(-tail_cutoff_exponent)
    cap = tail_limit(0.0, g1, cfg)
    x_end = min(math.sqrt(a / c), cap)
    x_switch = min(math.sqrt(a * c), x_end)
    return integrate_pieces(integrand, [0.0, x_switch, x_end], cfg)


def sigma_area_limit_constant(eps: float) -> float:
    """
    lim_{a -> 0} P(sigma > eps, A < a) / a for unit rates, ln((1 - e) / e) with e = eps / 2.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}.")
    half = eps / 2
    return math.log((1 - half) / half)


def cond_sigma_given_area(
    eps: float,
    a: float,
    cfg: Optional[QuadratureConfig] = None,
    rates: RatePair = UNIT_RATES,
) -> float:
    """
    P(sigma > eps | XY < a). Tends to 0 as a -> 0.

    Args:
        eps (float): Shape threshold in (0, 1).
        a (float): Area threshold, positive.
        cfg (QuadratureConfig, optional): Tolerances. Defaults to None.
        rates (RatePair, optional): Edge rates. Defaults to unit rates.

    Returns:
        float: Value in [0, 1].
    """
    _check_eps_a(eps, a)
    numerator = numerator_sigma_area(eps, a, cfg, rates)
    return _clip_unit(numerator / prob_area_less(a, cfg, rates))


def prob_edge_exceeds_area_less(
    eps: float,
    a: float,
    cfg: Optional[QuadratureConfig] = None,
    rates: RatePair = UNIT_RATES,
) -> float:
    """
    P(X > eps, XY < a). Divided by a it tends to gamma1 gamma2 E_1(gamma1 eps) as a -> 0.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}.")
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}.")
    cfg = cfg or DEFAULT_CONFIG
    g1, g2 = rates.gamma1, rates.gamma2
    upper = tail_limit(eps, g1, cfg)
    return integrate_interval(
        lambda x: g1 * math.exp(-g1 * x) * -math.expm1(-g2 * a / x),
        eps,
        upper,
        cfg,
        points=(eps + 1 / g1,),
    )


def cond_tau_given_area(
    eps: float,
    a: float,
    cfg: Optional[QuadratureConfig] = None,
    rates: RatePair = UNIT_RATES,
) -> float:
    """
    P(max(X, Y) > eps | XY < a), with the joint probability taken by inclusion-exclusion:
    P(X > eps, A < a) + P(Y > eps, A < a) - P(X > eps, Y > eps, A < a). The last term vanishes
    unless a > eps**2.

    Args:
        eps (float): Threshold, positive.
        a (float): Area threshold, positive.
        cfg (QuadratureConfig, optional): Tolerances. Defaults to None.
        rates (RatePair, optional): Edge rates. Defaults to unit rates.

    Returns:
        float: Value in [0, 1].
    """
    joint = prob_edge_exceeds_area_less(eps, a, cfg, rates) + prob_edge_exceeds_area_less(
        eps, a, cfg, rates.swapped()
    )
    if a > eps * eps:
        g1, g2 = rates.gamma1, rates.gamma2
        joint -= integrate_interval(
            lambda x: g1
            * math.exp(-g1 * x - g2 * eps)
            * -math.expm1(-g2 * (a / x - eps)),
            eps,
            min(a / eps, tail_limit(eps, g1, cfg)),
            cfg,
            points=(eps + 1 / g1,),
        )
    return _clip_unit(joint / prob_area_less(a, cfg, rates))


def tau_area_limit_constant(eps: float, rates: RatePair = UNIT_RATES) -> float:
    """
    lim_{a -> 0} P(X > eps, A < a) / a, which is gamma1 gamma2 E_1(gamma1 eps).
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}.")
    return rates.product * exp_integral_e1(rates.gamma1 * eps)
