import logging
import math
from typing import Callable, Iterable, Optional

from pydantic import field_validator
from pydantic.dataclasses import dataclass
from scipy import integrate

from ..errors import QuadratureError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureConfig:
    """
    Tolerances for the adaptive quadrature used throughout ``smallcells.analytic``.

    Args:
        rel_tol (float, optional): Requested relative error, in (0, 1e-3]. Defaults to 1e-10.
        abs_tol (float, optional): Requested absolute error, in (0, 1e-3]. Defaults to 1e-14.
        max_subdivisions (int, optional): Subinterval limit per call. Defaults to 200.
        tail_cutoff_exponent (float, optional): Infinite ranges against a decay rate r are cut at
            ``lower + tail_cutoff_exponent / r``, dropping a tail of at most
            exp(-tail_cutoff_exponent). Defaults to 46.
        accept_rel_err (float, optional): When the integrator reports trouble but its error
            estimate is below this fraction of the result, the result is kept. Defaults to 1e-9.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 200
    tail_cutoff_exponent: float = 46.0
    accept_rel_err: float = 1e-9

    @field_validator("rel_tol", "abs_tol")
    @classmethod
    def check_tol(cls, tol: float) -> float:
        if not 0 < tol <= 1e-3:
            raise ValueError("Quadrature tolerances must lie in (0, 1e-3].")
        return tol

    @field_validator("max_subdivisions")
    @classmethod
    def check_limit(cls, limit: int) -> int:
        if limit < 1:
            raise ValueError("max_subdivisions must be positive.")
        return limit

    @field_validator("tail_cutoff_exponent", "accept_rel_err")
    @classmethod
    def check_positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("Value must be positive.")
        return value


DEFAULT_CONFIG = QuadratureConfig()


def integrate_interval(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    cfg: Optional[QuadratureConfig] = None,
    points: Optional[Iterable[float]] = None,
) -> float:
    """
    Adaptive Gauss-Kronrod quadrature of ``f`` over [lo, hi].

    Args:
        f (Callable[[float], float]): Integrand.
        lo (float): Lower limit.
        hi (float): Upper limit, finite.
        cfg (QuadratureConfig, optional): Tolerances. Defaults to ``QuadratureConfig()``.
        points (Iterable[float], optional): Interior breakpoints. Defaults to None.

    Raises:
        QuadratureError: If the integrator fails and its error estimate is not small enough.

    Returns:
        float: The integral.
    """
    cfg = cfg or DEFAULT_CONFIG
    if hi <= lo:
        return 0.0
    breaks = sorted({p for p in (points or ()) if lo < p < hi})
    result = integrate.quad(
        f,
        lo,
        hi,
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        limit=cfg.max_subdivisions,
        points=breaks or None,
        full_output=1,
    )
    value, abserr = result[0], result[1]
    # a fourth element is the integrator's message and signals a problem
    message = result[3] if len(result) > 3 else "error estimate above tolerance"
    tolerance = max(cfg.abs_tol, cfg.rel_tol * abs(value), cfg.accept_rel_err * abs(value))
    if not math.isfinite(value) or abserr > tolerance:
        raise QuadratureError(
            f"quadrature over [{lo}, {hi}] failed: {message} "
            f"(value {value!r}, error estimate {abserr!r})"
        )
    if len(result) > 3:
        logger.debug("accepted quadrature with warning %r", result[3])
    return float(value)


def integrate_pieces(
    f: Callable[[float], float],
    breaks: Iterable[float],
    cfg: Optional[QuadratureConfig] = None,
) -> float:
    """
    Sum of ``integrate_interval`` over consecutive intervals of the sorted, de-duplicated
    ``breaks``. Used for integrands whose scale changes by orders of magnitude.
    """
    edges = sorted(set(breaks))
    return math.fsum(
        integrate_interval(f, lo, hi, cfg) for lo, hi in zip(edges[:-1], edges[1:])
    )


def tail_limit(lo: float, rate: float, cfg: Optional[QuadratureConfig] = None) -> float:
    """
    Finite upper limit replacing infinity for an integrand decaying like exp(-rate * x).
    """
    cfg = cfg or DEFAULT_CONFIG
    return lo + cfg.tail_cutoff_exponent / rate


def integrate_region(
    f: Callable[[float, float], float],
    x_lo: float,
    x_hi: float,
    y_lo: Callable[[float], float],
    y_hi: Callable[[float], float],
    cfg: Optional[QuadratureConfig] = None,
    x_points: Optional[Iterable[float]] = None,
    y_points: Optional[Callable[[float], Iterable[float]]] = None,
) -> float:
    """
    Double integral of ``f(x, y)`` over {x_lo < x < x_hi, y_lo(x) < y < y_hi(x)}, as an outer
    ``integrate_interval`` over x of inner ``integrate_interval`` calls over y. Every level
    checks its error estimate against ``cfg``, so a missed peak raises instead of returning a
    wrong value.

    Args:
        f (Callable[[float, float], float]): Integrand ``f(x, y)``.
        x_lo (float): Lower x limit.
        x_hi (float): Upper x limit, finite.
        y_lo (Callable[[float], float]): Lower y limit as a function of x.
        y_hi (Callable[[float], float]): Upper y limit as a function of x, finite.
        cfg (QuadratureConfig, optional): Tolerances. Defaults to None.
        x_points (Iterable[float], optional): Breakpoints of the outer integral, typically the
            scales 1 / rate where the integrand concentrates. Defaults to None.
        y_points (Callable[[float], Iterable[float]], optional): Breakpoints of the inner
            integral as a function of x. Defaults to None.

    Raises:
        QuadratureError: If either level does not reach tolerance.

    Returns:
        float: The integral.
    """
    cfg = cfg or DEFAULT_CONFIG
    if x_hi <= x_lo:
        return 0.0

    def inner(x: float) -> float:
        points = y_points(x) if y_points is not None else None
        return integrate_interval(lambda y: f(x, y), y_lo(x), y_hi(x), cfg, points)

    value = integrate_interval(inner, x_lo, x_hi, cfg, x_points)
    logger.debug("double quadrature over x in [%r, %r]: %r", x_lo, x_hi, value)
    return value
