"""
Empirical decay rate of a conditional probability as the size threshold tends to zero.
"""

import logging
import math
from typing import Sequence

import numpy as np
from pydantic.dataclasses import dataclass

logger = logging.getLogger(__name__)

POWER_LAW = "power"
LOG_RECIPROCAL = "log-reciprocal"


@dataclass(frozen=True)
class DecayFit:
    """
    Two candidate models for pairs (a, prob): a power law prob = C a**exponent, fit by least
    squares in log-log coordinates, and prob = C / ln(1/a), fit in log coordinates.

    Args:
        exponent (float): Fitted power-law exponent.
        r_squared (float): Coefficient of determination of the log-log fit.
        power_residual (float): Sum of squared log residuals of the power law.
        log_coefficient (float): Fitted C of the log-reciprocal model, NaN if it does not apply.
        log_residual (float): Sum of squared log residuals of the log-reciprocal model, infinite
            if some a >= 1.
        preferred (str): ``"power"`` or ``"log-reciprocal"``, whichever residual is smaller.
    """

    exponent: float
    r_squared: float
    power_residual: float
    log_coefficient: float
    log_residual: float
    preferred: str

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "r_squared": self.r_squared,
            "power_residual": self.power_residual,
            "log_coefficient": self.log_coefficient,
            "log_residual": self.log_residual,
            "preferred": self.preferred,
        }


def fit_decay_exponent(pairs: Sequence[tuple[float, float]]) -> DecayFit:
    """
    Fits the decay of a conditional probability as the threshold a tends to 0.

    Args:
        pairs (Sequence[tuple[float, float]]): At least three pairs (a, prob), all positive.

    Raises:
        ValueError: If fewer than three pairs are given, a value is not positive, or all a are
            equal.

    Returns:
        DecayFit: Both fits and the preferred model.
    """
    if len(pairs) < 3:
        raise ValueError("Need at least three (a, prob) pairs.")
    a = np.array([pair[0] for pair in pairs], dtype=float)
    prob = np.array([pair[1] for pair in pairs], dtype=float)
    if np.any(a <= 0) or np.any(prob <= 0):
        raise ValueError("Thresholds and probabilities must be positive.")
    if np.all(a == a[0]):
        raise ValueError("Thresholds must not all be equal.")

    log_a, log_p = np.log(a), np.log(prob)
    slope, intercept = np.polyfit(log_a, log_p, 1)
    power_residual = float(np.sum((log_p - (slope * log_a + intercept)) ** 2))
    spread = float(np.sum((log_p - log_p.mean()) ** 2))
    r_squared = 1.0 - power_residual / spread if spread > 0 else 1.0

    if np.all(a < 1):
        # log prob = log C - log ln(1/a)
        shifted = log_p + np.log(-log_a)
        log_coefficient = float(math.exp(shifted.mean()))
        log_residual = float(np.sum((shifted - shifted.mean()) ** 2))
    else:
        log_coefficient, log_residual = math.nan, math.inf

    preferred = LOG_RECIPROCAL if log_residual < power_residual else POWER_LAW
    logger.debug(
        "decay fit: exponent %.6g (R^2 %.6g), residuals power %.3g, log %.3g",
        slope,
        r_squared,
        power_residual,
        log_residual,
    )
    return DecayFit(
        exponent=float(slope),
        r_squared=float(r_squared),
        power_residual=power_residual,
        log_coefficient=log_coefficient,
        log_residual=log_residual,
        preferred=preferred,
    )
