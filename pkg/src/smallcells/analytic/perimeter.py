"""
Distribution of the half perimeter P = X + Y of the planar typical cell and the conditional laws
of sigma and tau given {P < p}.
"""

import logging
import math
import warnings
from typing import Optional

from ..errors import QuadratureError
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    integrate_interval,
    integrate_region,
    tail_limit,
)
from .rates import RatePair

logger = logging.getLogger(__name__)

# largest accepted gap between the closed form and the region quadrature
CLOSED_FORM_TOL = 1e-8


def _check_eps_p(eps: float, p: float) -> None:
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}.")
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}.")


def _clip_unit(value: float) -> float:
    return min(1.0, max(0.0, value))


def _exp_remainder(x: float) -> float:
    # exp(-x) - 1 + x, summed as a series where the direct form cancels
    if x >= 0.5:
        return math.expm1(-x) + x
    term = -x
    total = 0.0
    for k in range(2, 40):
        term *= -x / k
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total


def cdf_half_perimeter(rates: RatePair, p: float) -> float:
    """
    P(X + Y < p). Erlang(2) when the rates are equal, hypoexponential otherwise. Both are written
    through exp(-x) - 1 + x, which keeps relative accuracy as p -> 0 where the value is O(p^2).

    Args:
        rates (RatePair): Edge rates.
        p (float): Threshold, non-negative.

    Raises:
        ValueError: If p < 0.

    Returns:
        float: Value in [0, 1].
    """
    if p < 0:
        raise ValueError(f"p must be non-negative, got {p}.")
    if p == 0:
        return 0.0
    g1, g2 = rates.gamma1, rates.gamma2
    if rates.is_equal():
        x = (g1 + g2) / 2 * p
        return _clip_unit(-x * math.expm1(-x) - _exp_remainder(x))
    value = (g2 * _exp_remainder(g1 * p) - g1 * _exp_remainder(g2 * p)) / (g1 - g2)
    return _clip_unit(value)


def joint_sigma_perimeter(
    rates: RatePair,
    eps: float,
    p: float,
    cfg: Optional[QuadratureConfig] = None,
    method: str = "closed_form",
) -> float:
    """
    P(sigma > eps, X + Y < p).

    In the coordinates s = X + Y, w = X / s the joint density is
    gamma1 gamma2 s exp(-s beta(w)) with beta(w) = gamma2 + (gamma1 - gamma2) w, and
    {sigma > eps} is {eps/2 < w < 1 - eps/2}. Integrating s over (0, p) and then beta gives
    gamma1 gamma2 / (gamma1 - gamma2) * [F(beta_hi) - F(beta_lo)] with F(beta) =
    expm1(-beta p) / beta. Equal rates reduce to (1 - eps) P(X + Y < p).

    Args:
        rates (RatePair): Edge rates.
        eps (float): Shape threshold in (0, 1).
        p (float): Half-perimeter threshold, positive.
        cfg (QuadratureConfig, optional): Tolerances for ``method="quadrature"``.
        method (str, optional): ``"closed_form"`` or ``"quadrature"`` (see
            ``region_quadrature_sigma_perimeter``). Defaults to ``"closed_form"``.

    Raises:
        ValueError: If eps or p is out of range, or the method is unknown.

    Returns:
        float: Value in [0, 1].
    """
    _check_eps_p(eps, p)
    if method == "quadrature":
        return region_quadrature_sigma_perimeter(rates, eps, p, cfg)
    if method != "closed_form":
        raise ValueError(f"Unknown method {method!r}.")

    if rates.is_equal():
        return (1 - eps) * cdf_half_perimeter(rates, p)
    g1, g2 = rates.gamma1, rates.gamma2
    beta_hi = g1 - eps * (g1 - g2) / 2
    beta_lo = g2 + eps * (g1 - g2) / 2

    def antiderivative(beta: float) -> float:
        # F(beta) + p; the constant cancels in the difference
        return _exp_remainder(beta * p) / beta

    value = g1 * g2 / (g1 - g2) * (antiderivative(beta_hi) - antiderivative(beta_lo))
    return _clip_unit(value)


def region_quadrature_sigma_perimeter(
    rates: RatePair,
    eps: float,
    p: float,
    cfg: Optional[QuadratureConfig] = None,
    scale: float = 1.0,
) -> float:
    """
    P(sigma > eps, X + Y < p) by two-dimensional adaptive quadrature of the exponential density
    over {c x < y < min(x / c, p - x)}, c = eps / (2 - eps). Both orderings of X and Y are
    integrated, so no symmetry between the rates is assumed.

    Args:
        rates (RatePair): Edge rates.
        eps (float): Shape threshold in (0, 1).
        p (float): Half-perimeter threshold, positive.
        cfg (QuadratureConfig, optional): Tolerances. Defaults to None.
        scale (float, optional): Factor applied to the integrand, so that the absolute tolerance
            acts on the scale of a conditional probability. The result is divided by it again.
            Defaults to 1.

    Returns:
        float: The joint probability.
    """
    _check_eps_p(eps, p)
    cfg = cfg or DEFAULT_CONFIG
    g1, g2 = rates.gamma1, rates.gamma2
    c = eps / (2 - eps)

    def density(x: float, y: float) -> float:
        return scale * g1 * g2 * math.exp(-g1 * x - g2 * y)

    # along y >= c x the density decays in x at rate g1 + c g2 and in y at rate g2
    x_cap = tail_limit(0.0, g1 + c * g2, cfg)
    x_points = (1 / g1, 1 / g2, 1 / (g1 + c * g2))

    def y_points(x: float) -> tuple[float, ...]:
        return (c * x + 1 / g2, 1 / g1, 1 / g2)

    # the upper boundary switches from y = x / c to y = p - x at x = p c / (1 + c)
    x_switch = min(p * c / (1 + c), x_cap)
    x_end = min(p / (1 + c), x_cap)
    value = integrate_region(
        density,
        0.0,
        x_switch,
        lambda x: c * x,
        lambda x: min(x / c, tail_limit(c * x, g2, cfg)),
        cfg,
        x_points,
        y_points,
    ) + integrate_region(
        density,
        x_switch,
        x_end,
        lambda x: c * x,
        lambda x: min(p - x, tail_limit(c * x, g2, cfg)),
        cfg,
        x_points,
        y_points,
    )
    return value / scale


def displayed_sigma_perimeter_formula(rates: RatePair, eps: float, p: float) -> float:
    """
    The conditional probability P(sigma > eps | P < p) as commonly displayed for unequal rates.

    The expression was obtained by integrating over {X > Y} only and doubling, which is valid
    only for equal rates. It is kept as a diagnostic and never used as a result; for
    gamma = (2, 1), eps = 0.5, p = 1 it evaluates to about -3.355.
    """
    _check_eps_p(eps, p)
    g1, g2 = rates.gamma1, rates.gamma2
    d = g1 - g2
    num = 4 * g1 * g2 * (
        d * eps
        + d
        - (eps * d - 2 * g1) * math.exp(-(g1 + g2) / 2 * p)
        - (g1 + g2) * math.exp(-(2 * g1 - eps * d) / 2 * p)
    )
    den = (
        (g1 + g2)
        * (g1 * (1 - math.exp(-g2 * p)) - g2 * (1 - math.exp(-g1 * p)))
        * (eps * d - 2 * g1)
    )
    return num / den


def cond_sigma_given_perimeter(
    rates: RatePair,
    eps: float,
    p: float,
    cfg: Optional[QuadratureConfig] = None,
    validate: bool = True,
) -> float:
    """
    P(sigma > eps | X + Y < p). For equal rates sigma is uniform on [0, 1] given the half
    perimeter, so this is exactly 1 - eps.

    Args:
        rates (RatePair): Edge rates.
        eps (float): Shape threshold in (0, 1).
        p (float): Half-perimeter threshold, positive.
        cfg (QuadratureConfig, optional): Tolerances for the validation quadrature.
        validate (bool, optional): Check the closed form against region quadrature. On a gap
            above 1e-8 the quadrature is repeated with the rates swapped; if both agree a
            warning is issued and the quadrature value returned. Defaults to True.

    Raises:
        ValueError: If eps or p is out of range.
        QuadratureError: If the two quadratures disagree with each other.

    Returns:
        float: Value in [0, 1].
    """
    _check_eps_p(eps, p)
    if rates.is_equal():
        return 1 - eps

    cdf = cdf_half_perimeter(rates, p)
    closed = _clip_unit(joint_sigma_perimeter(rates, eps, p) / cdf)
    if not validate:
        return closed

    quad = _clip_unit(region_quadrature_sigma_perimeter(rates, eps, p, cfg, scale=1 / cdf) / cdf)
    if abs(closed - quad) <= CLOSED_FORM_TOL:
        return closed

    # the region is symmetric in x and y, so the swapped rates integrate the same probability
    # with the other ordering of the nested integrals
    check = _clip_unit(
        region_quadrature_sigma_perimeter(rates.swapped(), eps, p, cfg, scale=1 / cdf) / cdf
    )
    if abs(quad - check) > CLOSED_FORM_TOL:
        raise QuadratureError(
            f"region quadrature is not reproducible for {rates}, eps={eps}, p={p}: "
            f"{quad!r} against {check!r} with the rates swapped"
        )
    msg = (
        f"closed form {closed!r} and region quadrature {quad!r} disagree for "
        f"{rates}, eps={eps}, p={p}; using quadrature"
    )
    logger.warning(msg)
    warnings.warn(msg)
    return quad


def cond_tau_given_perimeter(
    rates: RatePair, eps: float, p: float, cfg: Optional[QuadratureConfig] = None
) -> float:
    """
    P(max(X, Y) > eps | X + Y < p), by inclusion-exclusion over the edge exceeding eps.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}.")
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}.")
    if eps >= p:
        return 0.0

    def one_edge(r: RatePair) -> float:
        # P(X > eps, X + Y < p)
        return integrate_interval(
            lambda x: r.gamma1 * math.exp(-r.gamma1 * x) * -math.expm1(-r.gamma2 * (p - x)),
            eps,
            min(p, tail_limit(eps, r.gamma1, cfg)),
            cfg,
            points=(eps + 1 / r.gamma1, p - 1 / r.gamma2),
        )

    both = 0.0
    if p > 2 * eps:
        g1, g2 = rates.gamma1, rates.gamma2
        both = integrate_interval(
            lambda x: g1
            * math.exp(-g1 * x - g2 * eps)
            * -math.expm1(-g2 * (p - x - eps)),
            eps,
            min(p - eps, tail_limit(eps, g1, cfg)),
            cfg,
            points=(eps + 1 / g1, p - eps - 1 / g2),
        )
    joint = one_edge(rates) + one_edge(rates.swapped()) - both
    return _clip_unit(joint / cdf_half_perimeter(rates, p))
