from __future__ import annotations

import heapq
import logging
import warnings
from typing import Iterable, Optional

import numpy as np
import pandas as pd
from pydantic.dataclasses import dataclass

from ..functionals import SizeFunctional, size_array
from ..model import TessellationModel, edge_rates
from ..sampler import SampleStreamSpec, iter_block_range, map_partitions

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SelectedCell:
    sample_index: int
    edge_lengths: tuple[float, ...]
    size: float


@dataclass(frozen=True)
class TopKSelection:
    """
    The k smallest cells of a stream under a size functional, sorted by (size, sample_index).

    Args:
        k (int): Requested number of cells.
        functional (SizeFunctional): Size functional.
        entries (tuple[SelectedCell, ...]): Retained cells, ascending.
        n (int): Number of cells the selection was taken from.
        truncated (bool, optional): True if the stream held fewer than k cells.
            Defaults to False.
    """

    k: int
    functional: SizeFunctional
    entries: tuple[SelectedCell, ...]
    n: int
    truncated: bool = False

    @property
    def sizes(self) -> np.ndarray:
        return np.array([e.size for e in self.entries])

    @property
    def indices(self) -> np.ndarray:
        return np.array([e.sample_index for e in self.entries], dtype=np.int64)

    @property
    def cells(self) -> np.ndarray:
        """
        (len(entries), d) array of edge lengths.
        """
        return np.array([e.edge_lengths for e in self.entries], dtype=float)

    @property
    def min_size(self) -> float:
        return self.entries[0].size

    @property
    def max_size(self) -> float:
        return self.entries[-1].size

    def to_frame(self) -> pd.DataFrame:
        """
        One row per cell with columns sample_index, x1..xd, size.
        """
        cells = self.cells
        d = cells.shape[1] if len(self.entries) else 0
        frame = pd.DataFrame({"sample_index": self.indices})
        for i in range(d):
            frame[f"x{i + 1}"] = cells[:, i]
        frame["size"] = self.sizes
        return frame


class TopKAccumulator:
    """
    Bounded-memory record of the k smallest cells seen so far under one size functional.
    Ordering is by (size, sample_index), so among equal sizes the smaller index wins. The heap
    root is the largest retained key.

    Args:
        k (int): Number of cells to keep, at least 1.
        functional (SizeFunctional): Size functional.
        model (TessellationModel, optional): Needed for ``GEOMETRIC_AREA``. Defaults to None.
    """

    def __init__(
        self,
        k: int,
        functional: SizeFunctional,
        model: Optional[TessellationModel] = None,
    ):
        if k < 1:
            raise ValueError("k must be at least 1.")
        self.k = k
        self.functional = functional
        self.model = model
        # entries are (-size, -index, edges)
        self._heap: list[tuple[float, int, tuple[float, ...]]] = []
        self.seen = 0

    def __len__(self) -> int:
        return len(self._heap)

    def _worst(self) -> tuple[float, int]:
        neg_size, neg_index, _ = self._heap[0]
        return -neg_size, -neg_index

    def push(self, size: float, index: int, edges: tuple[float, ...]) -> None:
        item = (-size, -index, edges)
        if len(self._heap) < self.k:
            heapq.heappush(self._heap, item)
        elif (size, index) < self._worst():
            heapq.heapreplace(self._heap, item)

    def push_block(
        self, start: int, cells: np.ndarray, sizes: Optional[np.ndarray] = None
    ) -> None:
        """
        Offers a block of consecutive cells starting at stream index ``start``.

        Args:
            start (int): Stream index of the first row.
            cells (np.ndarray): (m, d) edge lengths.
            sizes (np.ndarray, optional): Precomputed sizes. Defaults to None.
        """
        if sizes is None:
            sizes = size_array(cells, self.functional, self.model)
        self.seen += len(sizes)
        if len(sizes) == 0:
            return

        # only the k smallest of the block, ties at the k-th value included, can enter
        candidates = np.arange(len(sizes))
        if len(sizes) > self.k:
            kth = np.partition(sizes, self.k - 1)[self.k - 1]
            candidates = np.flatnonzero(sizes <= kth)
        if len(self._heap) == self.k:
            worst_size, _ = self._worst()
            candidates = candidates[sizes[candidates] <= worst_size]

        order = candidates[np.lexsort((candidates, sizes[candidates]))]
        for row in order:
            size = float(sizes[row])
            index = start + int(row)
            if len(self._heap) == self.k and (size, index) >= self._worst():
                break
            self.push(size, index, tuple(cells[row].tolist()))

    def merge(self, other: TopKAccumulator) -> TopKAccumulator:
        """
        Folds ``other`` into this accumulator and returns it. The result does not depend on the
        order in which accumulators are merged.
        """
        if other.functional is not self.functional or other.k != self.k:
            raise ValueError("Can only merge accumulators with the same k and functional.")
        for neg_size, neg_index, edges in other._heap:
            self.push(-neg_size, -neg_index, edges)
        self.seen += other.seen
        return self

    def to_selection(self, n: Optional[int] = None) -> TopKSelection:
        n = self.seen if n is None else n
        entries = sorted(
            (
                SelectedCell(sample_index=-neg_index, edge_lengths=edges, size=-neg_size)
                for neg_size, neg_index, edges in self._heap
            ),
            key=lambda e: (e.size, e.sample_index),
        )
        return TopKSelection(
            k=self.k,
            functional=self.functional,
            entries=tuple(entries),
            n=n,
            truncated=n < self.k,
        )


def merge_accumulators(accumulators: Iterable[TopKAccumulator]) -> TopKAccumulator:
    accumulators = list(accumulators)
    merged = TopKAccumulator(
        accumulators[0].k, accumulators[0].functional, accumulators[0].model
    )
    for acc in accumulators:
        merged.merge(acc)
    return merged


def select_k_smallest(
    model: TessellationModel,
    spec: SampleStreamSpec,
    functional: SizeFunctional,
    k: int,
) -> TopKSelection:
    """
    The k smallest cells of the stream under ``functional``, with ties broken by the smaller
    sample index. Each worker keeps its own bounded heap; the heaps are merged at the end, so the
    result is independent of the worker count.

    Args:
        model (TessellationModel): The model.
        spec (SampleStreamSpec): Stream to select from.
        functional (SizeFunctional): Size functional.
        k (int): Number of cells.

    Returns:
        TopKSelection: The selection, flagged as truncated if n < k.
    """
    if k < 1:
        raise ValueError("k must be at least 1.")
    rates = edge_rates(model)

    def work(lo: int, hi: int) -> TopKAccumulator:
        acc = TopKAccumulator(k, functional, model)
        for start, cells in iter_block_range(rates, spec, lo, hi):
            acc.push_block(start, cells)
        logger.info("selected over blocks %i to %i", lo, hi)
        return acc

    parts = map_partitions(work, spec)
    merged = merge_accumulators(parts) if parts else TopKAccumulator(k, functional, model)
    selection = merged.to_selection(spec.count)
    if selection.truncated:
        warnings.warn(f"stream holds {spec.count} cells, fewer than k = {k}")
    return selection
