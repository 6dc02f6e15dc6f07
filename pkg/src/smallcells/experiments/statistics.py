from __future__ import annotations

import logging
import math
from typing import Callable, Literal, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import field_validator, model_validator
from pydantic.dataclasses import dataclass
from typing_extensions import Self

from ..config import DKW_ALPHA
from ..errors import StarvationError
from ..functionals import SizeFunctional, sigma_array, size_array, tau_array
from ..model import TessellationModel, edge_rates
from ..sampler import SampleStreamSpec, iter_block_range, map_partitions

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Histogram:
    """
    Fixed-bin histogram. Bins are closed on the left and open on the right, except the last bin,
    which also holds ``hi``.

    Args:
        lo (float): Left edge.
        hi (float): Right edge, greater than ``lo``.
        counts (tuple[int, ...]): Count per bin.
        underflow (int, optional): Observations below ``lo``. Defaults to 0.
        overflow (int, optional): Observations above ``hi``. Defaults to 0.
    """

    lo: float
    hi: float
    counts: tuple[int, ...]
    underflow: int = 0
    overflow: int = 0

    @model_validator(mode="after")
    def check_range(self) -> Self:
        if not self.lo < self.hi:
            raise ValueError(f"Histogram range [{self.lo}, {self.hi}] is empty.")
        if len(self.counts) < 1:
            raise ValueError("Histogram needs at least one bin.")
        return self

    @property
    def bin_count(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts) + self.underflow + self.overflow

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.bin_count + 1)

    def merge(self, other: Histogram) -> Histogram:
        """
        Combines two histograms over the same bins.
        """
        if (self.lo, self.hi, self.bin_count) != (other.lo, other.hi, other.bin_count):
            raise ValueError("Can only merge histograms with identical bins.")
        return Histogram(
            lo=self.lo,
            hi=self.hi,
            counts=tuple(a + b for a, b in zip(self.counts, other.counts)),
            underflow=self.underflow + other.underflow,
            overflow=self.overflow + other.overflow,
        )

    def to_frame(self) -> pd.DataFrame:
        edges = self.edges
        return pd.DataFrame(
            {"bin_lo": edges[:-1], "bin_hi": edges[1:], "count": list(self.counts)}
        )

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "counts": list(self.counts),
            "underflow": self.underflow,
            "overflow": self.overflow,
        }


def histogram(
    values: Union[Sequence[float], np.ndarray], lo: float, hi: float, bins: int
) -> Histogram:
    """
    Counts ``values`` into ``bins`` equal bins on [lo, hi].

    Args:
        values (Sequence[float]): Observations; NaNs are not allowed.
        lo (float): Left edge.
        hi (float): Right edge.
        bins (int): Number of bins, at least 1.

    Raises:
        ValueError: If lo >= hi or bins < 1.

    Returns:
        Histogram: Counts with under- and overflow.
    """
    if not lo < hi:
        raise ValueError(f"Histogram range [{lo}, {hi}] is empty.")
    if bins < 1:
        raise ValueError("Histogram needs at least one bin.")
    x = np.asarray(values, dtype=float)
    counts, _ = np.histogram(x, bins=bins, range=(lo, hi))
    return Histogram(
        lo=lo,
        hi=hi,
        counts=tuple(int(c) for c in counts),
        underflow=int(np.count_nonzero(x < lo)),
        overflow=int(np.count_nonzero(x > hi)),
    )


def ks_statistic(
    samples: Union[Sequence[float], np.ndarray], cdf: Callable[[float], float]
) -> float:
    """
    Kolmogorov-Smirnov distance between the empirical CDF of ``samples`` and ``cdf``:
    the maximum over the sorted sample of max(i/n - F(x_i), F(x_i) - (i-1)/n).

    Args:
        samples (Sequence[float]): Observations.
        cdf (Callable[[float], float]): Continuous CDF; vectorized callables are used as such.

    Raises:
        ValueError: If there are no samples.

    Returns:
        float: D_n.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("Need at least one sample.")
    try:
        f = np.asarray(cdf(x), dtype=float)
        if f.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        f = np.fromiter((cdf(float(v)) for v in x), dtype=float, count=n)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def dkw_bound(n: int, alpha: float = DKW_ALPHA) -> float:
    """
    Dvoretzky-Kiefer-Wolfowitz bound: with probability at least 1 - alpha the KS distance of n
    samples is below sqrt(ln(2 / alpha) / (2 n)).
    """
    if n < 1:
        raise ValueError("Need at least one sample.")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1).")
    return math.sqrt(math.log(2 / alpha) / (2 * n))


def uniform_cdf(x: np.ndarray) -> np.ndarray:
    return np.clip(x, 0.0, 1.0)


@dataclass(frozen=True)
class ShapeEvent:
    """
    Event {sigma > eps} or {tau > eps}.
    """

    kind: Literal["sigma", "tau"]
    eps: float

    @field_validator("eps")
    @classmethod
    def check_eps(cls, eps: float) -> float:
        if not eps >= 0:
            raise ValueError(f"eps must be non-negative, got {eps}.")
        return eps

    def indicator(self, cells: np.ndarray) -> np.ndarray:
        values = sigma_array(cells) if self.kind == "sigma" else tau_array(cells)
        return values > self.eps


@dataclass(frozen=True)
class SizeEvent:
    """
    Event {size < threshold} for a size functional.
    """

    functional: SizeFunctional
    threshold: float

    @field_validator("threshold")
    @classmethod
    def check_threshold(cls, threshold: float) -> float:
        if not threshold > 0:
            raise ValueError(f"threshold must be positive, got {threshold}.")
        return threshold

    def indicator(
        self, cells: np.ndarray, model: Optional[TessellationModel] = None
    ) -> np.ndarray:
        return size_array(cells, self.functional, model) < self.threshold


@dataclass(frozen=True)
class CondEstimate:
    """
    Monte Carlo estimate of a conditional probability by rejection.

    Args:
        estimate (float): hits / accepted.
        hits (int): Samples in both events.
        accepted (int): Samples in the conditioning event.
        total (int): Samples drawn.
        std_error (float): Binomial standard error sqrt(estimate (1 - estimate) / accepted).
    """

    estimate: float
    hits: int
    accepted: int
    total: int
    std_error: float

    @classmethod
    def from_counts(cls, hits: int, accepted: int, total: int) -> CondEstimate:
        if accepted == 0:
            raise StarvationError(
                f"conditioning event never occurred in {total} samples", total=total
            )
        est = hits / accepted
        return cls(
            estimate=est,
            hits=hits,
            accepted=accepted,
            total=total,
            std_error=math.sqrt(est * (1 - est) / accepted),
        )


def conditional_counts(
    model: TessellationModel,
    spec: SampleStreamSpec,
    shape_events: Sequence[ShapeEvent],
    size_events: Sequence[SizeEvent],
) -> tuple[np.ndarray, np.ndarray]:
    """
    One pass over the stream counting, for every size event, the accepted samples and, for every
    (shape event, size event) pair, the samples in both.

    Returns:
        tuple[np.ndarray, np.ndarray]: ``hits`` of shape (shapes, sizes) and ``accepted`` of shape
        (sizes,).
    """
    rates = edge_rates(model)

    def work(lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        hits = np.zeros((len(shape_events), len(size_events)), dtype=np.int64)
        accepted = np.zeros(len(size_events), dtype=np.int64)
        for _, cells in iter_block_range(rates, spec, lo, hi):
            shapes = np.array([e.indicator(cells) for e in shape_events]).reshape(
                len(shape_events), len(cells)
            )
            for j, size_event in enumerate(size_events):
                mask = size_event.indicator(cells, model)
                accepted[j] += np.count_nonzero(mask)
                hits[:, j] += np.count_nonzero(shapes & mask, axis=1)
        logger.info("counted blocks %i to %i", lo, hi)
        return hits, accepted

    parts = map_partitions(work, spec)
    hits = sum((p[0] for p in parts), np.zeros((len(shape_events), len(size_events)), np.int64))
    accepted = sum((p[1] for p in parts), np.zeros(len(size_events), np.int64))
    return hits, accepted


def conditional_estimate(
    model: TessellationModel,
    spec: SampleStreamSpec,
    shape_event: ShapeEvent,
    size_event: SizeEvent,
) -> CondEstimate:
    """
    Estimates P(shape event | size event) by rejection over the stream.

    Args:
        model (TessellationModel): The model.
        spec (SampleStreamSpec): Stream to draw from.
        shape_event (ShapeEvent): Event {sigma > eps} or {tau > eps}.
        size_event (SizeEvent): Conditioning event {size < threshold}.

    Raises:
        StarvationError: If no sample satisfies the size event.

    Returns:
        CondEstimate: Estimate with accepted count and standard error.
    """
    hits, accepted = conditional_counts(model, spec, [shape_event], [size_event])
    return CondEstimate.from_counts(int(hits[0, 0]), int(accepted[0]), spec.count)


def conditional_sigma_samples(
    model: TessellationModel, spec: SampleStreamSpec, size_event: SizeEvent
) -> np.ndarray:
    """
    Sigma of every sample in the size event, in index order.
    """
    rates = edge_rates(model)

    def work(lo: int, hi: int) -> np.ndarray:
        kept = [
            sigma_array(cells[size_event.indicator(cells, model)])
            for _, cells in iter_block_range(rates, spec, lo, hi)
        ]
        return np.concatenate(kept) if kept else np.empty(0)

    parts = map_partitions(work, spec)
    return np.concatenate(parts) if parts else np.empty(0)


def slab_uniformity_sample(
    model: TessellationModel, spec: SampleStreamSpec, s: float, rel_width: float = 1e-3
) -> np.ndarray:
    """
    For a planar model, X / (X + Y) over the samples with X + Y in the slab [s, s (1 + rel_width)].
    For equal rates X given X + Y = s is uniform on [0, s], so these values are close to uniform on
    [0, 1].
    """
    if not s > 0 or not rel_width > 0:
        raise ValueError("Slab position and width must be positive.")
    rates = edge_rates(model)
    upper = s * (1 + rel_width)

    def work(lo: int, hi: int) -> np.ndarray:
        kept = []
        for _, cells in iter_block_range(rates, spec, lo, hi):
            total = cells[:, 0] + cells[:, 1]
            mask = (total >= s) & (total <= upper)
            kept.append(cells[mask, 0] / total[mask])
        return np.concatenate(kept) if kept else np.empty(0)

    parts = map_partitions(work, spec)
    return np.concatenate(parts) if parts else np.empty(0)
