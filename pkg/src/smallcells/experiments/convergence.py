"""
Monte Carlo against quadrature for P(shape event | size < threshold) on a grid of shape and size
thresholds, with a fit of the decay rate as the threshold shrinks.
"""

import json
import logging
import math
import pathlib
import warnings
from typing import Any, Optional, Sequence, Union

import pandas as pd
from pydantic import ConfigDict
from pydantic.dataclasses import dataclass

from ..analytic import (
    DecayFit,
    QuadratureConfig,
    RatePair,
    cond_sigma_given_area,
    cond_sigma_given_perimeter,
    cond_tau_given_area,
    cond_tau_given_perimeter,
    fit_decay_exponent,
)
from ..errors import UnsupportedDimensionError
from ..functionals import SizeFunctional
from ..model import TessellationModel
from ..sampler import SampleStreamSpec
from .statistics import CondEstimate, ShapeEvent, SizeEvent, conditional_counts

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"

# |z| above this marks a row as inconsistent with its quadrature value
Z_FLAG = 4.0

SUPPORTED_FUNCTIONALS = (SizeFunctional.EDGE_PRODUCT_AREA, SizeFunctional.HALF_PERIMETER)


@dataclass(frozen=True)
class ConvergenceRow:
    """
    One (event, eps, threshold) cell of the convergence table. Monte Carlo fields are NaN when the
    conditioning event never occurred; such rows are flagged and keep their quadrature value.
    """

    event: str
    eps: float
    threshold: float
    mc: float
    se: float
    accepted: int
    quad: float
    z: float
    flagged: bool
    model_fit: str = ""


@dataclass(frozen=True, config=ConfigDict(arbitrary_types_allowed=True))
class ConvergenceReport:
    """
    Result of ``run_convergence_study``.

    Args:
        functional (SizeFunctional): Size functional of the conditioning event.
        rows (tuple[ConvergenceRow, ...]): Table rows ordered by event, eps and threshold.
        fits (dict[str, DecayFit]): Decay fits of the quadrature values per ``"<event>:<eps>"``,
            present when at least three thresholds were given.
        config (dict[str, Any], optional): Effective run configuration.
    """

    functional: SizeFunctional
    rows: tuple[ConvergenceRow, ...]
    fits: dict[str, DecayFit]
    config: Optional[dict[str, Any]] = None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "event": r.event,
                    "eps": r.eps,
                    "threshold": r.threshold,
                    "mc": r.mc,
                    "se": r.se,
                    "quad": r.quad,
                    "z": r.z,
                    "accepted": r.accepted,
                    "flag": r.flagged,
                    "model_fit": r.model_fit,
                }
                for r in self.rows
            ],
            columns=[
                "event",
                "eps",
                "threshold",
                "mc",
                "se",
                "quad",
                "z",
                "accepted",
                "flag",
                "model_fit",
            ],
        )

    def write(self, out_dir: Union[str, pathlib.Path]) -> list[pathlib.Path]:
        """
        Writes ``convergence.csv`` and ``report.json`` into ``out_dir``.
        """
        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "convergence.csv"
        self.to_frame().to_csv(
            csv_path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
        )
        report = {
            "config": self.config or {},
            "functional": self.functional.value,
            "fits": {key: fit.to_dict() for key, fit in self.fits.items()},
            "flagged_rows": sum(r.flagged for r in self.rows),
            "rows": len(self.rows),
        }
        json_path = out / "report.json"
        json_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        return [csv_path, json_path]


def quadrature_value(
    event: str,
    functional: SizeFunctional,
    rates: RatePair,
    eps: float,
    threshold: float,
    cfg: Optional[QuadratureConfig] = None,
) -> float:
    """
    Exact P(event > eps | functional < threshold) for a planar model.
    """
    if functional is SizeFunctional.EDGE_PRODUCT_AREA:
        if event == "sigma":
            return cond_sigma_given_area(eps, threshold, cfg, rates)
        return cond_tau_given_area(eps, threshold, cfg, rates)
    if functional is SizeFunctional.HALF_PERIMETER:
        if event == "sigma":
            return cond_sigma_given_perimeter(rates, eps, threshold, cfg)
        return cond_tau_given_perimeter(rates, eps, threshold, cfg)
    raise ValueError(f"No quadrature for {functional.value}.")


def run_convergence_study(
    model: TessellationModel,
    eps_grid: Sequence[float],
    threshold_grid: Sequence[float],
    n: int,
    seed: int,
    workers: int = 1,
    functional: SizeFunctional = SizeFunctional.EDGE_PRODUCT_AREA,
    events: Sequence[str] = ("sigma", "tau"),
    cfg: Optional[QuadratureConfig] = None,
    config: Optional[dict[str, Any]] = None,
) -> ConvergenceReport:
    """
    Compares rejection Monte Carlo estimates with quadrature values of
    P(event > eps | functional < threshold) over the grids, from a single pass over the stream.

    Args:
        model (TessellationModel): A planar model.
        eps_grid (Sequence[float]): Shape thresholds.
        threshold_grid (Sequence[float]): Size thresholds, positive.
        n (int): Number of cells.
        seed (int): Stream seed.
        workers (int, optional): Worker threads. Defaults to 1.
        functional (SizeFunctional, optional): ``EDGE_PRODUCT_AREA`` or ``HALF_PERIMETER``.
            Defaults to ``EDGE_PRODUCT_AREA``.
        events (Sequence[str], optional): Subset of ``("sigma", "tau")``.
        cfg (QuadratureConfig, optional): Quadrature tolerances.
        config (dict[str, Any], optional): Run configuration to echo into the report.

    Raises:
        UnsupportedDimensionError: If the model is not planar.
        ValueError: If a grid is empty or a threshold is not positive.

    Returns:
        ConvergenceReport: Table rows and decay fits.
    """
    if model.dimension != 2:
        raise UnsupportedDimensionError("Quadrature oracles exist for planar models only.")
    if functional not in SUPPORTED_FUNCTIONALS:
        raise ValueError(f"No quadrature for {functional.value}.")
    if not eps_grid or not threshold_grid:
        raise ValueError("eps and threshold grids must not be empty.")
    if any(e not in ("sigma", "tau") for e in events):
        raise ValueError(f"Unknown events {events}.")

    rates = RatePair.from_model(model)
    shape_events = [ShapeEvent(kind=e, eps=eps) for e in events for eps in eps_grid]
    size_events = [SizeEvent(functional=functional, threshold=t) for t in threshold_grid]
    spec = SampleStreamSpec(seed=seed, count=n, worker_hint=workers)
    hits, accepted = conditional_counts(model, spec, shape_events, size_events)

    rows = []
    fits: dict[str, DecayFit] = {}
    for i, shape in enumerate(shape_events):
        quads = [
            quadrature_value(shape.kind, functional, rates, shape.eps, t, cfg)
            for t in threshold_grid
        ]
        model_fit = ""
        positive = [(t, q) for t, q in zip(threshold_grid, quads) if q > 0]
        if len(positive) >= 3 and len({t for t, _ in positive}) > 1:
            fit = fit_decay_exponent(positive)
            fits[f"{shape.kind}:{shape.eps!r}"] = fit
            model_fit = fit.preferred

        for j, threshold in enumerate(threshold_grid):
            quad = quads[j]
            if accepted[j] == 0:
                warnings.warn(
                    f"no sample with {functional.value} < {threshold} among {n}; "
                    "row keeps its quadrature value only"
                )
                mc = se = z = math.nan
                flagged = True
            else:
                est = CondEstimate.from_counts(int(hits[i, j]), int(accepted[j]), n)
                mc, se = est.estimate, est.std_error
                if se > 0:
                    z = (mc - quad) / se
                    flagged = abs(z) > Z_FLAG
                else:
                    # all or none of the accepted cells hit; flag a gap above one hit
                    z = math.nan
                    flagged = abs(mc - quad) > 1 / int(accepted[j])
            rows.append(
                ConvergenceRow(
                    event=shape.kind,
                    eps=shape.eps,
                    threshold=threshold,
                    mc=mc,
                    se=se,
                    accepted=int(accepted[j]),
                    quad=quad,
                    z=z,
                    flagged=flagged,
                    model_fit=model_fit,
                )
            )
    logger.info("convergence study: %i rows, %i flagged", len(rows), sum(r.flagged for r in rows))
    return ConvergenceReport(functional=functional, rows=tuple(rows), fits=fits, config=config)
