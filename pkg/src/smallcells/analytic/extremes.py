from typing import Sequence, Union

import numpy as np
from scipy.optimize import brentq

from ..model import EdgeRates

RatesLike = Union[EdgeRates, Sequence[float], np.ndarray]


def _rates(rates: RatesLike) -> np.ndarray:
    if isinstance(rates, EdgeRates):
        return rates.as_array()
    if isinstance(rates, np.ndarray):
        return rates
    return EdgeRates(rates=tuple(float(r) for r in rates)).as_array()


def tau_cdf(t: float, rates: RatesLike) -> float:
    """
    Unconditional P(max edge <= t) for independent exponential edges, the product of the
    per-edge CDFs 1 - exp(-rate * t).
    """
    if t <= 0:
        return 0.0
    return float(np.prod(-np.expm1(-_rates(rates) * t)))


def tau_quantile(prob: float, rates: RatesLike) -> float:
    """
    The ``prob`` quantile of the largest edge length.

    Args:
        prob (float): Probability in (0, 1).
        rates (EdgeRates | Sequence[float]): Edge rates.

    Raises:
        ValueError: If prob is not in (0, 1).

    Returns:
        float: t with tau_cdf(t) = prob.
    """
    if not 0 < prob < 1:
        raise ValueError(f"prob must lie in (0, 1), got {prob}.")
    lam = _rates(rates)
    hi = 1.0 / lam.min()
    while tau_cdf(hi, lam) < prob:
        hi *= 2
    return float(brentq(lambda t: tau_cdf(t, lam) - prob, 0.0, hi, xtol=1e-15, rtol=1e-12))


def tau_median(rates: RatesLike) -> float:
    return tau_quantile(0.5, rates)

