from __future__ import annotations

import math

from pydantic import field_validator
from pydantic.dataclasses import dataclass

from ..config import EQUAL_RATE_RTOL
from ..model import EdgeRates, TessellationModel, edge_rates
from ..errors import UnsupportedDimensionError


@dataclass(frozen=True)
class RatePair:
    """
    Edge rates of a planar typical cell: X ~ Exp(gamma1) along L_1 and Y ~ Exp(gamma2) along L_2.
    For the two-atom model these are gamma (1 - q) |cos alpha| and gamma q |cos alpha|.

    Args:
        gamma1 (float): Rate of X, positive.
        gamma2 (float): Rate of Y, positive.
    """

    gamma1: float
    gamma2: float

    @field_validator("gamma1", "gamma2")
    @classmethod
    def check_positive(cls, rate: float) -> float:
        if not (math.isfinite(rate) and rate > 0):
            raise ValueError(f"Rates must be positive and finite, got {rate}.")
        return rate

    @classmethod
    def from_edge_rates(cls, rates: EdgeRates) -> RatePair:
        if rates.dimension != 2:
            raise UnsupportedDimensionError("A rate pair needs planar edge rates.")
        return cls(gamma1=rates.rates[0], gamma2=rates.rates[1])

    @classmethod
    def from_model(cls, model: TessellationModel) -> RatePair:
        return cls.from_edge_rates(edge_rates(model))

    def is_equal(self, rtol: float = EQUAL_RATE_RTOL) -> bool:
        """
        Whether the rates are equal up to ``rtol`` relative to their sum.
        """
        return abs(self.gamma1 - self.gamma2) <= rtol * (self.gamma1 + self.gamma2)

    @property
    def product(self) -> float:
        return self.gamma1 * self.gamma2

    def swapped(self) -> RatePair:
        return RatePair(gamma1=self.gamma2, gamma2=self.gamma1)


UNIT_RATES = RatePair(gamma1=1.0, gamma2=1.0)
