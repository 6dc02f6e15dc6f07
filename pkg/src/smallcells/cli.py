import argparse
import dataclasses
import logging
import math
import pathlib
import sys
from typing import Callable, Optional, Sequence, TextIO

import pandas as pd
from pydantic.dataclasses import dataclass

from . import analytic
from .analytic import RatePair
from .config import DEFAULT_K, DEFAULT_N, DEFAULT_SEED, resolve_threads
from .errors import NumericFailure
from .experiments import (
    run_convergence_study,
    run_small_cell_study,
    select_k_smallest,
)
from .functionals import SizeFunctional, applicable_functionals, parse_functional
from .model import TessellationModel, edge_rates, standard_model
from .model_loaders import load_model
from .sampler import SampleStreamSpec, write_cells_csv
from .window import Window, sample_window_tessellation, segments_frame

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERIC = 2

ANALYTIC_QUANTITIES = (
    "cdf-half-perimeter",
    "cond-sigma-perimeter",
    "joint-sigma-perimeter",
    "displayed-sigma-perimeter",
    "cond-tau-perimeter",
    "prob-area-less",
    "numerator-sigma-area",
    "cond-sigma-area",
    "cond-tau-area",
    "e1",
)


class UsageError(ValueError):
    """
    Raised instead of exiting when the command line cannot be parsed.
    """


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass(frozen=True)
class RunConfig:
    """
    Fully resolved settings of one command-line run, with every default filled in.
    """

    command: str
    model: str
    seed: int
    n: int
    k: int
    threads: int
    out: Optional[str]
    eps: tuple[float, ...]
    threshold: tuple[float, ...]
    functional: Optional[str]
    window: tuple[float, ...]
    quantity: Optional[str]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    source = common.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", help="path to a key=value model description")
    source.add_argument(
        "--standard-2d", action="store_true", help="gamma=2, q=1/2, coordinate axes"
    )
    source.add_argument(
        "--standard-3d", action="store_true", help="unit-rate model on the coordinate axes"
    )
    common.add_argument("--seed", type=_u64, default=DEFAULT_SEED)
    common.add_argument("--n", type=int, default=DEFAULT_N)
    common.add_argument("--k", type=int, default=DEFAULT_K)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--eps", type=_float_list, default=())
    common.add_argument("--threshold", type=_float_list, default=())
    common.add_argument("--functional", default=None)
    common.add_argument("--window", type=_float_list, default=())
    common.add_argument("--log-level", default="WARNING")

    parser = _Parser(
        prog="smallcells",
        description="Small cells of Poisson hyperplane tessellations.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("rates", parents=[common], help="print the edge rates")
    sub.add_parser("sample", parents=[common], help="dump n typical cells as CSV")
    sub.add_parser("tessellate", parents=[common], help="window realization as CSV")
    analytic_parser = sub.add_parser(
        "analytic", parents=[common], help="evaluate an analytic quantity on a grid"
    )
    analytic_parser.add_argument("quantity", choices=ANALYTIC_QUANTITIES)
    sub.add_parser("study", parents=[common], help="small-cell study")
    sub.add_parser("convergence", parents=[common], help="Monte Carlo vs quadrature")
    sub.add_parser("topk", parents=[common], help="k smallest cells only")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    if args.model is not None:
        model = args.model
    else:
        model = "standard-2d" if args.standard_2d else "standard-3d"
    return RunConfig(
        command=args.command,
        model=model,
        seed=args.seed,
        n=args.n,
        k=args.k,
        threads=resolve_threads(args.threads),
        out=args.out,
        eps=tuple(args.eps),
        threshold=tuple(args.threshold),
        functional=args.functional,
        window=tuple(args.window),
        quantity=getattr(args, "quantity", None),
    )


def load_config_model(cfg: RunConfig) -> TessellationModel:
    if cfg.model == "standard-2d":
        return standard_model(2)
    if cfg.model == "standard-3d":
        return standard_model(3)
    return load_model(cfg.model)


def _write_frame(frame: pd.DataFrame, cfg: RunConfig, name: str, stdout: TextIO) -> None:
    if cfg.out is None:
        frame.to_csv(stdout, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return
    out = pathlib.Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    frame.to_csv(
        out / name, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
    )


def _stream_spec(cfg: RunConfig) -> SampleStreamSpec:
    return SampleStreamSpec(seed=cfg.seed, count=cfg.n, worker_hint=cfg.threads)


def cmd_rates(cfg: RunConfig, model: TessellationModel, stdout: TextIO) -> None:
    stdout.write(" ".join(CSV_FLOAT_FORMAT % r for r in edge_rates(model).rates) + "\n")


def cmd_sample(cfg: RunConfig, model: TessellationModel, stdout: TextIO) -> None:
    spec = _stream_spec(cfg)
    if cfg.out is None:
        write_cells_csv(model, spec, stdout)
        return
    out = pathlib.Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_cells_csv(model, spec, str(out / "cells.csv"))


def cmd_tessellate(cfg: RunConfig, model: TessellationModel, stdout: TextIO) -> None:
    if not cfg.window:
        raise ValueError("tessellate needs --window")
    tess = sample_window_tessellation(model, Window.from_bounds(cfg.window), cfg.seed)
    _write_frame(segments_frame(tess), cfg, "segments.csv", stdout)


def _analytic_row(
    quantity: str, rates: RatePair, eps: float, threshold: float
) -> tuple[float, str, float]:
    # (value, method, error estimate); NaN marks an unavailable estimate
    if quantity == "cdf-half-perimeter":
        return analytic.cdf_half_perimeter(rates, threshold), "closed_form", math.nan
    if quantity in ("cond-sigma-perimeter", "joint-sigma-perimeter"):
        closed = analytic.joint_sigma_perimeter(rates, eps, threshold)
        quad = analytic.region_quadrature_sigma_perimeter(rates, eps, threshold)
        if quantity == "joint-sigma-perimeter":
            return closed, "closed_form", abs(closed - quad)
        value = analytic.cond_sigma_given_perimeter(rates, eps, threshold)
        cdf = analytic.cdf_half_perimeter(rates, threshold)
        return value, "closed_form", abs(closed - quad) / cdf
    if quantity == "displayed-sigma-perimeter":
        value = analytic.displayed_sigma_perimeter_formula(rates, eps, threshold)
        exact = analytic.cond_sigma_given_perimeter(rates, eps, threshold)
        return value, "displayed", abs(value - exact)
    if quantity == "cond-tau-perimeter":
        return analytic.cond_tau_given_perimeter(rates, eps, threshold), "quadrature", math.nan
    if quantity == "prob-area-less":
        values = analytic.area_cdf_methods(threshold * rates.product)
        spread = max(values.values()) - min(values.values())
        return analytic.prob_area_less(threshold, rates=rates), "consensus", spread
    if quantity == "numerator-sigma-area":
        value = analytic.numerator_sigma_area(eps, threshold, rates=rates)
        return value, "quadrature", math.nan
    if quantity == "cond-sigma-area":
        value = analytic.cond_sigma_given_area(eps, threshold, rates=rates)
        return value, "quadrature", math.nan
    if quantity == "cond-tau-area":
        return analytic.cond_tau_given_area(eps, threshold, rates=rates), "quadrature", math.nan
    # e1
    value = analytic.exp_integral_e1(threshold)
    check = analytic.exp_integral_e1(threshold, method="quadrature")
    return value, "series_or_continued_fraction", abs(value - check)


def cmd_analytic(cfg: RunConfig, model: TessellationModel, stdout: TextIO) -> None:
    quantity = cfg.quantity or ""
    if not cfg.threshold:
        raise ValueError("analytic needs --threshold")
    needs_eps = quantity not in ("cdf-half-perimeter", "prob-area-less", "e1")
    if needs_eps and not cfg.eps:
        raise ValueError(f"{quantity} needs --eps")
    rates = RatePair.from_model(model) if quantity != "e1" else analytic.UNIT_RATES

    rows = []
    for eps in cfg.eps if needs_eps else (math.nan,):
        for threshold in cfg.threshold:
            value, method, err = _analytic_row(quantity, rates, eps, threshold)
            rows.append(
                {
                    "quantity": quantity,
                    "eps": eps,
                    "threshold": threshold,
                    "value": value,
                    "method": method,
                    "est_error": err,
                }
            )
    frame = pd.DataFrame(
        rows, columns=["quantity", "eps", "threshold", "value", "method", "est_error"]
    )
    _write_frame(frame, cfg, f"analytic_{quantity}.csv", stdout)


def _functionals(cfg: RunConfig, model: TessellationModel) -> list[SizeFunctional]:
    if cfg.functional is None:
        return applicable_functionals(model.dimension)
    return [parse_functional(cfg.functional)]


def cmd_study(cfg: RunConfig, model: TessellationModel, stdout: TextIO) -> None:
    report = run_small_cell_study(
        model,
        cfg.n,
        cfg.k,
        cfg.seed,
        workers=cfg.threads,
        functionals=_functionals(cfg, model),
        config=cfg.to_dict(),
    )
    out = cfg.out or "smallcells-study"
    report.write(out)
    stdout.write(f"{out}\n")


def cmd_convergence(cfg: RunConfig, model: TessellationModel, stdout: TextIO) -> None:
    if not cfg.eps or not cfg.threshold:
        raise ValueError("convergence needs --eps and --threshold")
    functional = (
        parse_functional(cfg.functional)
        if cfg.functional
        else SizeFunctional.EDGE_PRODUCT_AREA
    )
    report = run_convergence_study(
        model,
        cfg.eps,
        cfg.threshold,
        cfg.n,
        cfg.seed,
        workers=cfg.threads,
        functional=functional,
        config=cfg.to_dict(),
    )
    if cfg.out is None:
        report.to_frame().to_csv(
            stdout, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
        )
        return
    report.write(cfg.out)


def cmd_topk(cfg: RunConfig, model: TessellationModel, stdout: TextIO) -> None:
    functionals = _functionals(cfg, model)
    if cfg.out is None and len(functionals) > 1:
        raise ValueError("topk without --out needs --functional")
    spec = _stream_spec(cfg)
    for f in functionals:
        selection = select_k_smallest(model, spec, f, cfg.k)
        _write_frame(selection.to_frame(), cfg, f"topk_{f.value}.csv", stdout)


COMMANDS: dict[str, Callable[[RunConfig, TessellationModel, TextIO], None]] = {
    "rates": cmd_rates,
    "sample": cmd_sample,
    "tessellate": cmd_tessellate,
    "analytic": cmd_analytic,
    "study": cmd_study,
    "convergence": cmd_convergence,
    "topk": cmd_topk,
}


def main(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    """
    Entry point of the ``smallcells`` command.

    Args:
        argv (Sequence[str], optional): Arguments without the program name. Defaults to
            ``sys.argv[1:]``.
        stdout (TextIO, optional): Stream for results. Defaults to ``sys.stdout``.

    Returns:
        int: 0 on success, 1 on invalid input, 2 on numerical failure.
    """
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_INVALID

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve_config(args)
        model = load_config_model(cfg)
        COMMANDS[cfg.command](cfg, model, stdout)
    except NumericFailure as e:
        logger.error("numerical failure: %s", e)
        return EXIT_NUMERIC
    except (ValueError, FileNotFoundError) as e:
        logger.error("%s", e)
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
