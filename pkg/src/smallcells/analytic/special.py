import math
from typing import Optional

import numpy as np

from ..errors import NumericFailure
from .quadrature import QuadratureConfig, integrate_interval

EULER_GAMMA = float(np.euler_gamma)

# below this argument K_1 uses its power series, above it the asymptotic expansion. Both branches
# carry a relative error near 1e-7 at the seam, below 1e-10 on the scale of x K_1(x).
K1_SERIES_LIMIT = 10.0

_MAX_TERMS = 500
_TINY = 1e-300
_EPS = 1e-17


def exp_integral_e1(
    x: float, method: str = "auto", cfg: Optional[QuadratureConfig] = None
) -> float:
    """
    Exponential integral E_1(x), the integral of exp(-t)/t over [x, infinity). This is the upper
    incomplete gamma function at order zero.

    Args:
        x (float): Positive argument.
        method (str, optional): ``"series"`` (power series around 0), ``"continued_fraction"``,
            ``"quadrature"`` or ``"auto"``, which takes the series for x <= 1 and the continued
            fraction otherwise. Defaults to ``"auto"``.
        cfg (QuadratureConfig, optional): Tolerances for ``"quadrature"``. Defaults to None.

    Raises:
        ValueError: If x <= 0 or the method is unknown.

    Returns:
        float: E_1(x).
    """
    if not x > 0:
        raise ValueError(f"E_1 needs a positive argument, got {x}.")
    if method == "auto":
        method = "series" if x <= 1 else "continued_fraction"

    if method == "series":
        return _e1_series(x)
    if method == "continued_fraction":
        return _e1_continued_fraction(x)
    if method == "quadrature":
        return _e1_quadrature(x, cfg)
    raise ValueError(f"Unknown method {method!r}.")


def _e1_series(x: float) -> float:
    # E_1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k * k!)
    total = 0.0
    term = 1.0
    for k in range(1, _MAX_TERMS):
        term *= -x / k
        contribution = term / k
        total += contribution
        if abs(contribution) < _EPS * abs(total):
            break
    return -EULER_GAMMA - math.log(x) - total


def _e1_continued_fraction(x: float) -> float:
    # modified Lentz evaluation of exp(-x) / (x + 1 - 1 / (x + 3 - 4 / (x + 5 - ...)))
    b = x + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= 2.5e-16:
            return h * math.exp(-x)
    raise NumericFailure(f"continued fraction for E_1({x}) did not converge")


def _e1_quadrature(x: float, cfg: Optional[QuadratureConfig]) -> float:
    # substitute t = x + u and pull exp(-x) out, leaving a bounded integrand
    cfg = cfg or QuadratureConfig(rel_tol=1e-13)
    upper = cfg.tail_cutoff_exponent
    inner = integrate_interval(
        lambda u: math.exp(-u) / (x + u), 0.0, upper, cfg, points=(min(x, 1.0), 1.0, 10.0)
    )
    return math.exp(-x) * inner


def bessel_k1(x: float) -> float:
    """
    Modified Bessel function of the second kind of order one.

    Args:
        x (float): Positive argument.

    Raises:
        ValueError: If x <= 0.

    Returns:
        float: K_1(x).
    """
    if not x > 0:
        raise ValueError(f"K_1 needs a positive argument, got {x}.")
    if x <= K1_SERIES_LIMIT:
        return _k1_series(x)
    return _k1_asymptotic(x)


def _k1_series(x: float) -> float:
    # K_1(x) = 1/x + ln(x/2) I_1(x)
    #          - (x/4) sum_k [psi(k+1) + psi(k+2)] (x^2/4)^k / (k! (k+1)!)
    half = x / 2
    q = half * half
    coef = 1.0
    psi_k1 = -EULER_GAMMA
    psi_k2 = 1.0 - EULER_GAMMA
    i1_sum = 0.0
    psi_sum = 0.0
    for k in range(_MAX_TERMS):
        i1_sum += coef
        psi_sum += (psi_k1 + psi_k2) * coef
        coef *= q / ((k + 1) * (k + 2))
        psi_k1 += 1.0 / (k + 1)
        psi_k2 += 1.0 / (k + 2)
        if coef * (abs(psi_k1) + abs(psi_k2) + 1) < _EPS * abs(psi_sum) and k > 1:
            break
    return 1.0 / x + math.log(half) * half * i1_sum - (x / 4) * psi_sum


def _k1_asymptotic(x: float) -> float:
    # sqrt(pi / 2x) exp(-x) sum_k prod_{j<=k} (4 - (2j - 1)^2) / (k! (8x)^k), cut at its
    # smallest term
    total = 1.0
    term = 1.0
    for k in range(1, _MAX_TERMS):
        nxt = term * (4.0 - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(nxt) >= abs(term):
            break
        term = nxt
        total += term
        if abs(term) < _EPS * abs(total):
            break
    return math.sqrt(math.pi / (2 * x)) * math.exp(-x) * total
