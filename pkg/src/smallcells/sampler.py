from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import IO, Callable, Iterator, Optional, Sequence, TypeVar, Union

import numpy as np
import pandas as pd
from pydantic import field_validator
from pydantic.dataclasses import dataclass

from .config import BLOCK_SIZE
from .model import EdgeRates, TessellationModel, edge_rates

logger = logging.getLogger(__name__)

T = TypeVar("T")

RatesLike = Union[EdgeRates, TessellationModel, Sequence[float]]

SEED_BOUND = 2**64


@dataclass(frozen=True)
class TypicalCell:
    """
    Edge lengths of a typical cell, one per direction of the model, in the model's direction order.

    Args:
        edge_lengths (tuple[float, ...]): Positive edge lengths.
    """

    edge_lengths: tuple[float, ...]

    @field_validator("edge_lengths")
    @classmethod
    def check_positive(cls, edge_lengths: tuple[float, ...]) -> tuple[float, ...]:
        if len(edge_lengths) == 0:
            raise ValueError("A cell needs at least one edge.")
        if any(not x > 0 for x in edge_lengths):
            raise ValueError(f"Edge lengths must be positive, got {edge_lengths}.")
        return edge_lengths

    @property
    def dimension(self) -> int:
        return len(self.edge_lengths)

    def as_array(self) -> np.ndarray:
        return np.array(self.edge_lengths, dtype=float)

    def scaled(self, c: float) -> TypicalCell:
        return TypicalCell(edge_lengths=tuple(c * x for x in self.edge_lengths))


@dataclass(frozen=True)
class SampleStreamSpec:
    """
    Addresses a deterministic stream of typical cells.

    Args:
        seed (int): Seed in [0, 2**64).
        count (int): Number of cells n >= 0, indexed 0..n-1.
        worker_hint (int, optional): Number of worker threads. Has no effect on the values.
            Defaults to 1.
    """

    seed: int
    count: int
    worker_hint: int = 1

    @field_validator("seed")
    @classmethod
    def check_seed(cls, seed: int) -> int:
        if not 0 <= seed < SEED_BOUND:
            raise ValueError("Seed must be a 64-bit unsigned integer.")
        return seed

    @field_validator("count")
    @classmethod
    def check_count(cls, count: int) -> int:
        if count < 0:
            raise ValueError("Sample count must be non-negative.")
        return count

    @field_validator("worker_hint")
    @classmethod
    def check_workers(cls, worker_hint: int) -> int:
        if worker_hint < 1:
            raise ValueError("Worker hint must be at least 1.")
        return worker_hint

    @property
    def block_count(self) -> int:
        return math.ceil(self.count / BLOCK_SIZE)

    def block_rows(self, block: int) -> int:
        """
        Number of stream indices that fall in ``block``.
        """
        return min(BLOCK_SIZE, self.count - block * BLOCK_SIZE)


def _rates_array(rates: RatesLike) -> np.ndarray:
    if isinstance(rates, TessellationModel):
        rates = edge_rates(rates)
    if isinstance(rates, EdgeRates):
        return rates.as_array()
    return EdgeRates(rates=tuple(float(r) for r in rates)).as_array()


def _block_generator(seed: int, block: int) -> np.random.Generator:
    # Philox is counter based: the key fixes the stream of a block and draws are consumed in
    # row-major order, so the first r rows of a block never depend on how many rows are drawn.
    return np.random.Generator(np.random.Philox(key=(block << 64) | seed))


def _resample_uniform(seed: int, index: int, coord: int) -> float:
    attempt = 0
    while True:
        gen = np.random.Generator(
            np.random.Philox(np.random.SeedSequence([seed, index, coord, attempt]))
        )
        u = gen.random()
        if u > 0:
            return u
        attempt += 1


def sample_block(
    rates: RatesLike, seed: int, block: int, rows: Optional[int] = None
) -> np.ndarray:
    """
    Edge lengths for the stream indices ``block * BLOCK_SIZE`` onwards, by inversion of uniform
    draws, X = -log(1 - U) / rate.

    Args:
        rates (EdgeRates | TessellationModel | Sequence[float]): Edge rates, or a model to
            compute them from.
        seed (int): Stream seed.
        block (int): Block number.
        rows (int, optional): Number of leading rows to produce. Defaults to ``BLOCK_SIZE``.

    Returns:
        np.ndarray: (rows, d) array; row r holds the cell with index ``block * BLOCK_SIZE + r``.
    """
    lam = _rates_array(rates)
    rows = BLOCK_SIZE if rows is None else rows
    if not 0 <= rows <= BLOCK_SIZE:
        raise ValueError(f"rows must lie in [0, {BLOCK_SIZE}].")
    u = _block_generator(seed, block).random((rows, lam.size))
    # a zero draw would give a zero edge; it is replaced from a reserved sub-stream
    for r, c in np.argwhere(u == 0.0):
        u[r, c] = _resample_uniform(seed, block * BLOCK_SIZE + int(r), int(c))
    return -np.log1p(-u) / lam


def sample_typical_cell(rates: RatesLike, seed: int, index: int) -> TypicalCell:
    """
    The cell with logical index ``index`` of the stream keyed by ``seed``. Agrees with the row
    produced for the same index by ``sample_block`` and ``sample_stream``.

    Args:
        rates (EdgeRates | TessellationModel | Sequence[float]): Edge rates.
        seed (int): Stream seed.
        index (int): Logical sample index.

    Returns:
        TypicalCell: Independent exponential edge lengths.
    """
    if index < 0:
        raise ValueError("Sample index must be non-negative.")
    block, offset = divmod(index, BLOCK_SIZE)
    row = sample_block(rates, seed, block, rows=offset + 1)[offset]
    return TypicalCell(edge_lengths=tuple(row.tolist()))


def iter_block_range(
    rates: RatesLike, spec: SampleStreamSpec, lo: int, hi: int
) -> Iterator[tuple[int, np.ndarray]]:
    """
    Yields ``(start_index, cells)`` for blocks ``lo..hi-1`` of the stream, in order.
    """
    lam = _rates_array(rates)
    for block in range(lo, hi):
        yield block * BLOCK_SIZE, sample_block(lam, spec.seed, block, spec.block_rows(block))


def iter_blocks(
    rates: RatesLike, spec: SampleStreamSpec
) -> Iterator[tuple[int, np.ndarray]]:
    """
    Yields ``(start_index, cells)`` chunks covering the whole stream in index order. With more
    than one worker, batches of ``worker_hint`` blocks are generated concurrently.
    """
    lam = _rates_array(rates)
    if spec.worker_hint == 1 or spec.block_count <= 1:
        yield from iter_block_range(lam, spec, 0, spec.block_count)
        return

    def make(block: int) -> np.ndarray:
        return sample_block(lam, spec.seed, block, spec.block_rows(block))

    with ThreadPoolExecutor(max_workers=spec.worker_hint) as pool:
        for batch_lo in range(0, spec.block_count, spec.worker_hint):
            batch = range(batch_lo, min(batch_lo + spec.worker_hint, spec.block_count))
            for block, cells in zip(batch, pool.map(make, batch)):
                yield block * BLOCK_SIZE, cells


def sample_stream(model: TessellationModel, spec: SampleStreamSpec) -> Iterator[TypicalCell]:
    """
    Yields the typical cells with indices 0..n-1 of the stream addressed by ``spec``.

    Args:
        model (TessellationModel): The model.
        spec (SampleStreamSpec): Seed, count and worker hint.

    Returns:
        Iterator[TypicalCell]: Cells in index order.
    """
    for _, cells in iter_blocks(model, spec):
        for row in cells.tolist():
            yield TypicalCell(edge_lengths=tuple(row))


def block_ranges(spec: SampleStreamSpec) -> list[tuple[int, int]]:
    """
    Splits the stream's blocks into at most ``worker_hint`` contiguous, non-empty ranges.
    """
    parts = min(spec.worker_hint, spec.block_count)
    if parts == 0:
        return []
    bounds = np.linspace(0, spec.block_count, parts + 1).round().astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def map_partitions(
    fn: Callable[[int, int], T], spec: SampleStreamSpec
) -> list[T]:
    """
    Runs ``fn(lo, hi)`` on every block range of ``block_ranges(spec)``, on a thread pool when
    more than one worker is requested, and returns the results in range order.
    """
    ranges = block_ranges(spec)
    if len(ranges) <= 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))


def sample_array(model: TessellationModel, spec: SampleStreamSpec) -> np.ndarray:
    """
    The whole stream as an (n, d) array.
    """
    lam = _rates_array(model)
    out = np.empty((spec.count, lam.size))

    def fill(lo: int, hi: int) -> None:
        for start, cells in iter_block_range(lam, spec, lo, hi):
            out[start : start + len(cells)] = cells
        logger.info("sampled blocks %i to %i of %i", lo, hi, spec.block_count)

    map_partitions(fill, spec)
    return out


def write_cells_csv(
    model: TessellationModel, spec: SampleStreamSpec, buf: Union[str, IO[str]]
) -> None:
    """
    Writes the stream as CSV, one row per cell, edge lengths in direction order with 17
    significant digits. Nothing is written for an empty stream.

    Args:
        model (TessellationModel): The model.
        spec (SampleStreamSpec): Stream to dump.
        buf (str | IO[str]): Path or open text handle.
    """
    if isinstance(buf, str):
        with open(buf, "w", encoding="utf8", newline="") as f:
            write_cells_csv(model, spec, f)
        return

    for _, cells in iter_blocks(model, spec):
        pd.DataFrame(cells).to_csv(
            buf, header=False, index=False, float_format="%.17g", lineterminator="\n"
        )
