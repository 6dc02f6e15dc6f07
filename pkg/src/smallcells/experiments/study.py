"""
Desk-scale replication of the small-cell simulation study: a single pass over the stream keeps
the k smallest cells under every applicable size functional, then summarises the shape of those
cells with sigma and tau histograms and min/max tables.
"""

import json
import logging
import pathlib
from typing import Any, Optional, Sequence, Union

import numpy as np
from pydantic import ConfigDict
from pydantic.dataclasses import dataclass

from ..analytic import tau_quantile
from ..config import SIGMA_BINS, TAU_BINS
from ..functionals import (
    SizeFunctional,
    applicable_functionals,
    sigma_array,
    tau_array,
)
from ..model import TessellationModel, edge_rates
from ..sampler import SampleStreamSpec, iter_block_range, map_partitions
from .selection import TopKAccumulator, TopKSelection, merge_accumulators
from .statistics import Histogram, dkw_bound, histogram, ks_statistic, uniform_cdf

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"

# Extremes of 10^12-sample runs, as (minimum, maximum) over the 150 smallest cells. Random
# extremes at that scale; a desk-scale run is not expected to reproduce them.
REFERENCE_EXTREMES: dict[int, dict[str, tuple[float, float]]] = {
    2: {
        "area": (1.79e-14, 8.46e-12),
        "perimeter": (1.06e-6, 3.52e-5),
    },
    3: {
        "volume": (3.20e-15, 4.97e-13),
        "surface-area": (1.74e-8, 3.58e-7),
        "edge-length": (6.80e-4, 3.88e-3),
    },
}

# quantile of the unconditional tau that the top-k medians are compared with
TAU_REFERENCE_PROB = 1e-3


@dataclass(frozen=True, config=ConfigDict(arbitrary_types_allowed=True))
class FunctionalSummary:
    """
    Shape summary of the k smallest cells under one size functional.

    Args:
        selection (TopKSelection): The selected cells.
        sigma_histogram (Histogram): Sigma over the selection, bins on [0, 1].
        tau_histogram (Histogram): Tau over the selection, bins on [0, max tau].
        sigma_ks (float): KS distance of the selection's sigma values to the uniform law.
        tau_median (float): Median tau of the selection.
    """

    selection: TopKSelection
    sigma_histogram: Histogram
    tau_histogram: Histogram
    sigma_ks: float
    tau_median: float

    @property
    def min_size(self) -> float:
        return self.selection.min_size

    @property
    def max_size(self) -> float:
        return self.selection.max_size

    def to_dict(self) -> dict:
        return {
            "k": self.selection.k,
            "retained": len(self.selection.entries),
            "truncated": self.selection.truncated,
            "min_size": self.min_size,
            "max_size": self.max_size,
            "sigma_ks_uniform": self.sigma_ks,
            "tau_median": self.tau_median,
            "sigma_histogram": self.sigma_histogram.to_dict(),
            "tau_histogram": self.tau_histogram.to_dict(),
        }


@dataclass(frozen=True, config=ConfigDict(arbitrary_types_allowed=True))
class StudyReport:
    """
    Result of ``run_small_cell_study``.

    Args:
        model (TessellationModel): The model.
        n (int): Cells drawn.
        k (int): Cells kept per functional.
        seed (int): Stream seed.
        summaries (dict[str, FunctionalSummary]): Per functional token.
        tau_reference (float): The 0.1% quantile of the unconditional tau.
        config (dict[str, Any], optional): Effective run configuration, echoed into the report.
    """

    model: TessellationModel
    n: int
    k: int
    seed: int
    summaries: dict[str, FunctionalSummary]
    tau_reference: float
    config: Optional[dict[str, Any]] = None

    def min_max(self) -> dict[str, tuple[float, float]]:
        return {t: (s.min_size, s.max_size) for t, s in self.summaries.items()}

    def to_dict(self) -> dict:
        reference = REFERENCE_EXTREMES.get(self.model.dimension, {})
        return {
            "config": self.config or {},
            "model": self.model.to_dict(),
            "edge_rates": list(edge_rates(self.model).rates),
            "n": self.n,
            "k": self.k,
            "seed": self.seed,
            "sigma_ks_bound": dkw_bound(self.k),
            "tau_reference_quantile": {
                "prob": TAU_REFERENCE_PROB,
                "value": self.tau_reference,
            },
            "functionals": {t: s.to_dict() for t, s in self.summaries.items()},
            "reference_extremes": {
                "comparable": False,
                "note": "minimum and maximum over the 150 smallest of 10^12 cells",
                "values": {t: list(v) for t, v in reference.items()},
            },
        }

    def write(self, out_dir: Union[str, pathlib.Path]) -> list[pathlib.Path]:
        """
        Writes ``topk_<token>.csv``, ``hist_<token>_sigma.csv``, ``hist_<token>_tau.csv`` for
        every functional and ``report.json`` into ``out_dir``.

        Returns:
            list[pathlib.Path]: Paths written.
        """
        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for token, summary in self.summaries.items():
            frames = {
                f"topk_{token}.csv": summary.selection.to_frame(),
                f"hist_{token}_sigma.csv": summary.sigma_histogram.to_frame(),
                f"hist_{token}_tau.csv": summary.tau_histogram.to_frame(),
            }
            for name, frame in frames.items():
                path = out / name
                frame.to_csv(
                    path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
                )
                written.append(path)
        path = out / "report.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        written.append(path)
        return written


def summarize_selection(selection: TopKSelection) -> FunctionalSummary:
    """
    Sigma and tau statistics of a selection.
    """
    cells = selection.cells
    sigmas = sigma_array(cells)
    taus = tau_array(cells)
    return FunctionalSummary(
        selection=selection,
        sigma_histogram=histogram(sigmas, 0.0, 1.0, SIGMA_BINS),
        tau_histogram=histogram(taus, 0.0, float(taus.max()), TAU_BINS),
        sigma_ks=ks_statistic(sigmas, uniform_cdf),
        tau_median=float(np.median(taus)),
    )


def run_small_cell_study(
    model: TessellationModel,
    n: int,
    k: int,
    seed: int,
    workers: int = 1,
    functionals: Optional[Sequence[SizeFunctional]] = None,
    config: Optional[dict[str, Any]] = None,
) -> StudyReport:
    """
    Draws n typical cells once and keeps, for every size functional at the same time, the k
    smallest cells; then summarises their shapes.

    Args:
        model (TessellationModel): The model.
        n (int): Number of cells, at least k.
        k (int): Cells kept per functional.
        seed (int): Stream seed.
        workers (int, optional): Worker threads; the report does not depend on it.
            Defaults to 1.
        functionals (Sequence[SizeFunctional], optional): Functionals to select by. Defaults to
            every functional defined in the model's dimension.
        config (dict[str, Any], optional): Run configuration to echo into the report.

    Raises:
        ValueError: If n < k or a functional does not apply to the model's dimension.

    Returns:
        StudyReport: Selections and summaries.
    """
    if k < 1:
        raise ValueError("k must be at least 1.")
    if n < k:
        raise ValueError(f"n = {n} must be at least k = {k}.")
    functionals = list(functionals or applicable_functionals(model.dimension))
    for f in functionals:
        if not f.supports(model.dimension):
            raise ValueError(f"{f.value} is not defined for d = {model.dimension}.")

    spec = SampleStreamSpec(seed=seed, count=n, worker_hint=workers)
    rates = edge_rates(model)

    def work(lo: int, hi: int) -> list[TopKAccumulator]:
        accs = [TopKAccumulator(k, f, model) for f in functionals]
        for start, cells in iter_block_range(rates, spec, lo, hi):
            for acc in accs:
                acc.push_block(start, cells)
        logger.info("study processed blocks %i to %i of %i", lo, hi, spec.block_count)
        return accs

    parts = map_partitions(work, spec)
    summaries = {}
    for i, f in enumerate(functionals):
        merged = merge_accumulators(part[i] for part in parts)
        summaries[f.value] = summarize_selection(merged.to_selection(n))

    return StudyReport(
        model=model,
        n=n,
        k=k,
        seed=seed,
        summaries=summaries,
        tau_reference=tau_quantile(TAU_REFERENCE_PROB, rates),
        config=config,
    )
