"""Student t-tests with p-values from the regularized incomplete beta function."""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

_EPS = 1e-15
_TINY = 1e-300
_MAX_ITER = 500


def _beta_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c, d = 1.0, 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        step = d * c
        h *= step
        if abs(step - 1.0) < _EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must be in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_fraction(a, b, x) / a
    return 1.0 - front * _beta_fraction(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return min(1.0, betainc(df / 2.0, 0.5, df / (df + t * t)))


class SignificanceResult(NamedTuple):
    statistic: float
    pvalue: float
    df: float
    warning: str | None = None


def _mean_var(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    mean = math.fsum(xs) / n
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, var


def _degenerate(diff: float, df: float) -> SignificanceResult:
    if diff == 0:
        return SignificanceResult(0.0, 1.0, df, None)
    return SignificanceResult(math.copysign(math.inf, diff), 0.0, df, "zero variance")


def paired_ttest(a: Sequence[float], b: Sequence[float]) -> SignificanceResult:
    if len(a) != len(b):
        raise ValueError("paired test needs equal-length samples")
    if len(a) < 2:
        raise ValueError("paired test needs at least two pairs")
    d = [x - y for x, y in zip(a, b)]
    mean, var = _mean_var(d)
    df = len(d) - 1
    if var == 0:
        return _degenerate(mean, df)
    t = mean / math.sqrt(var / len(d))
    return SignificanceResult(t, t_two_sided_p(t, df), df)


def welch_ttest(a: Sequence[float], b: Sequence[float]) -> SignificanceResult:
    if len(a) < 2 or len(b) < 2:
        raise ValueError("independent test needs at least two values per sample")
    ma, va = _mean_var(a)
    mb, vb = _mean_var(b)
    sa, sb = va / len(a), vb / len(b)
    if sa + sb == 0:
        return _degenerate(ma - mb, len(a) + len(b) - 2)
    t = (ma - mb) / math.sqrt(sa + sb)
    # Welch-Satterthwaite on shares of the total so tiny variances cannot underflow to 0/0
    ra, rb = sa / (sa + sb), sb / (sa + sb)
    df = 1.0 / (ra * ra / (len(a) - 1) + rb * rb / (len(b) - 1))
    return SignificanceResult(t, t_two_sided_p(t, df), df)


def significance(a: Sequence[float], b: Sequence[float], mode: str = "paired") -> SignificanceResult:
    """Two-sided t-test; ``mode`` is "paired" or "independent" (Welch)."""
    if mode == "paired":
        return paired_ttest(a, b)
    if mode == "independent":
        return welch_ttest(a, b)
    raise ValueError(f"unknown mode {mode!r}")
