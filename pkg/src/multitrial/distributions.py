"""Distribution primitives shared by the combination methods.

Only the families needed here are covered: the standard normal, the
chi-squared, the Irwin-Hall (sum of uniforms), the Beta(2, 2) law of the
median of three uniforms, and the gamma / inverse-gamma densities that appear
in the sequential convolutions.

Scalar functions return Python floats. ``normal_cdf``, ``normal_quantile`` and
``irwin_hall_cdf`` also accept numpy arrays so the Monte Carlo code can stay
vectorised.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import special

__all__ = [
    "NumericalError",
    "bracketed_newton",
    "normal_cdf",
    "normal_quantile",
    "chi2_cdf",
    "chi2_quantile",
    "irwin_hall_cdf",
    "irwin_hall_pdf",
    "irwin_hall_quantile",
    "beta22_cdf",
    "gamma_pdf",
    "inverse_gamma_pdf",
]

MAX_ITER = 200


class NumericalError(ArithmeticError):
    """A quadrature or root search failed to converge."""


def _check_order(n, name="n"):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def _scalar_or_array(x, out):
    if np.ndim(x) == 0:
        return float(out)
    return out


def bracketed_newton(
    f: Callable[[float], float],
    fprime: Callable[[float], float] | None,
    target: float,
    lo: float,
    hi: float,
    xtol: float = 1e-15,
    maxiter: int = MAX_ITER,
) -> float:
    """Solve ``f(x) = target`` for nondecreasing ``f`` on ``[lo, hi]``.

    Newton steps are taken when the derivative is available and the step
    stays inside the current bracket; otherwise the bracket is bisected.
    """
    flo, fhi = f(lo) - target, f(hi) - target
    if flo > 0 or fhi < 0:
        raise NumericalError(f"root not bracketed on [{lo}, {hi}]")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = f(x) - target
        if fx == 0:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        if hi - lo <= xtol * max(1.0, abs(x)):
            return 0.5 * (lo + hi)
        step_ok = False
        if fprime is not None:
            d = fprime(x)
            if d > 0:
                x_new = x - fx / d
                step_ok = lo < x_new < hi
        x = x_new if step_ok else 0.5 * (lo + hi)
        if step_ok and abs(fx / d) <= xtol * max(1.0, abs(x)):
            return x
    raise NumericalError(f"no convergence after {maxiter} iterations")


# --- normal -----------------------------------------------------------------


def normal_cdf(x):
    """Standard normal cdf."""
    return _scalar_or_array(x, special.ndtr(x))


def normal_quantile(p):
    """Standard normal quantile; ``p`` must lie strictly inside (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(~(arr > 0) | ~(arr < 1)):
        raise ValueError("normal_quantile requires 0 < p < 1")
    return _scalar_or_array(p, special.ndtri(arr))


# --- chi-squared ------------------------------------------------------------


def chi2_cdf(x: float, df: int) -> float:
    df = _check_order(df, "df")
    if x <= 0:
        return 0.0
    return float(special.gammainc(0.5 * df, 0.5 * x))


def chi2_quantile(p: float, df: int) -> float:
    df = _check_order(df, "df")
    if not 0 < p < 1:
        raise ValueError("chi2_quantile requires 0 < p < 1")
    return float(2.0 * special.gammaincinv(0.5 * df, p))


# --- Irwin-Hall -------------------------------------------------------------


def _ih_lower_tail(x: float, n: int) -> float:
    # x in [0, n/2]; compensated sum of the alternating series
    if x <= 1:
        return x**n / math.factorial(n)
    terms = [
        (-1) ** k * math.comb(n, k) * (x - k) ** n for k in range(int(math.floor(x)) + 1)
    ]
    return math.fsum(terms) / math.factorial(n)


def _ih_lower_tail_array(x: np.ndarray, n: int) -> np.ndarray:
    total = np.zeros_like(x)
    for k in range(int(math.floor(n / 2)) + 1):
        active = x >= k
        term = (-1) ** k * math.comb(n, k) * np.where(active, x - k, 0.0) ** n
        total += np.where(active, term, 0.0)
    return total / math.factorial(n)


def irwin_hall_cdf(x, n: int):
    """Cdf of the sum of ``n`` independent standard uniforms.

    Evaluated exactly from the piecewise polynomial, reflecting arguments
    above ``n/2`` through the symmetry ``F(x) = 1 - F(n - x)`` so the
    alternating sum is only ever taken on the short side.
    """
    n = _check_order(n)
    if np.ndim(x) == 0:
        x = float(x)
        if x <= 0:
            return 0.0
        if x >= n:
            return 1.0
        if x > 0.5 * n:
            return 1.0 - _ih_lower_tail(n - x, n)
        return _ih_lower_tail(x, n)
    xa = np.clip(np.asarray(x, dtype=float), 0.0, float(n))
    upper = xa > 0.5 * n
    low = _ih_lower_tail_array(np.where(upper, n - xa, xa), n)
    return np.clip(np.where(upper, 1.0 - low, low), 0.0, 1.0)


def irwin_hall_pdf(x: float, n: int) -> float:
    n = _check_order(n)
    if x < 0 or x > n:
        return 0.0
    if n == 1:
        return 1.0
    if x > 0.5 * n:
        x = n - x
    terms = [
        (-1) ** k * math.comb(n, k) * (x - k) ** (n - 1)
        for k in range(int(math.floor(x)) + 1)
    ]
    return max(math.fsum(terms) / math.factorial(n - 1), 0.0)


def irwin_hall_quantile(p: float, n: int) -> float:
    """Inverse of :func:`irwin_hall_cdf`.

    Below ``1/n!`` the cdf is ``x**n / n!`` and the root is explicit.
    """
    n = _check_order(n)
    if not 0 < p < 1:
        raise ValueError("irwin_hall_quantile requires 0 < p < 1")
    if p <= 1.0 / math.factorial(n):
        return (math.factorial(n) * p) ** (1.0 / n)
    if p > 0.5:
        return n - irwin_hall_quantile(1.0 - p, n)
    return bracketed_newton(
        lambda x: irwin_hall_cdf(x, n),
        lambda x: irwin_hall_pdf(x, n),
        p,
        0.0,
        0.5 * n,
    )


# --- Beta(2, 2) ---------------------------------------------------------------


def beta22_cdf(x: float) -> float:
    """Cdf of Be(2, 2), the median of three independent uniforms."""
    x = min(max(x, 0.0), 1.0)
    return x * x * (3.0 - 2.0 * x)


# --- gamma and inverse gamma densities -----------------------------------------


def _check_shape_rate(shape, rate):
    if not (shape > 0 and rate > 0):
        raise ValueError("shape and rate must be positive")


def gamma_pdf(x: float, shape: float, rate: float) -> float:
    _check_shape_rate(shape, rate)
    if x < 0:
        return 0.0
    if x == 0:
        if shape < 1:
            return math.inf
        return rate if shape == 1 else 0.0
    return math.exp(
        shape * math.log(rate) + (shape - 1) * math.log(x) - rate * x - math.lgamma(shape)
    )


def inverse_gamma_pdf(x: float, shape: float, rate: float) -> float:
    _check_shape_rate(shape, rate)
    if x <= 0:
        return 0.0
    return math.exp(
        shape * math.log(rate) - math.lgamma(shape) - (shape + 1) * math.log(x) - rate / x
    )
