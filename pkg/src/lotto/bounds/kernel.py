"""Binomial tail kernels.

``binomial_log_tail_gt`` works in natural-log space so tails far below the
float range (1e-300 and smaller) keep their exponent. ``binomial_tail_exact``
is the big-rational oracle used by the tests and for tiny instances.
"""

from __future__ import annotations

import math
from functools import lru_cache
from fractions import Fraction
from numbers import Rational

NEG_INF = float("-inf")

# stop summing once a term falls this far (in nats) below the largest term;
# past the mode the pmf decays at least geometrically
_CUTOFF = -60.0
# exact log-binomial coefficients up to this population size, lgamma beyond
_EXACT_COMB_MAX = 20000


class LogProb(float):
    """A probability that also carries its natural log.

    The float value may underflow to 0.0 while ``.log`` keeps the exponent.
    """

    log: float

    def __new__(cls, log: float) -> "LogProb":
        if log > 0.0:
            log = 0.0
        obj = super().__new__(cls, math.exp(log) if log != NEG_INF else 0.0)
        obj.log = log
        return obj

    @classmethod
    def from_value(cls, value: float) -> "LogProb":
        if value <= 0.0:
            return cls(NEG_INF)
        return cls(math.log(value))

    @property
    def log10(self) -> float:
        return self.log / math.log(10.0) if self.log != NEG_INF else NEG_INF

    def complement_log(self) -> float:
        """log(1 - self), accurate when self is tiny."""
        if self.log == NEG_INF:
            return 0.0
        if self.log > -0.693:
            return math.log(-math.expm1(self.log)) if self.log < 0.0 else NEG_INF
        return math.log1p(-math.exp(self.log))

    def __repr__(self) -> str:
        return f"LogProb({float(self)!r}, log10={self.log10:.6g})"


def logsumexp(values: list[float]) -> float:
    if not values:
        return NEG_INF
    top = max(values)
    if top == NEG_INF:
        return NEG_INF
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


def _log_rational(x: Fraction) -> float:
    v = float(x)
    if v > 1e-300:
        return math.log(v)
    return math.log(x.numerator) - math.log(x.denominator)


@lru_cache(maxsize=4096)
def _as_float_logs(p) -> tuple[float, float]:
    """(log p, log(1 - p)) without losing precision for p near 0 or 1."""
    if isinstance(p, Rational) and not isinstance(p, int):
        p = Fraction(p)
        if p < Fraction(1, 2):
            return _log_rational(p), math.log1p(-float(p))
        return _log_rational(p), _log_rational(1 - p)
    p = float(p)
    return math.log(p), math.log1p(-p)


@lru_cache(maxsize=1 << 18)
def _log_comb(c: int, i: int) -> float:
    if c <= _EXACT_COMB_MAX:
        return math.log(math.comb(c, i))
    return math.lgamma(c + 1) - math.lgamma(i + 1) - math.lgamma(c - i + 1)


def _log_pmf(c: int, i: int, lp: float, lq: float) -> float:
    return _log_comb(c, i) + (i * lp if i else 0.0) + ((c - i) * lq if c - i else 0.0)


def _log_sum_range(c: int, start: int, stop: int, step: int, lp: float, lq: float) -> float:
    """log of the sum of pmf(i) for i from start toward stop, stopping early
    once terms become negligible past the mode."""
    terms: list[float] = []
    best = NEG_INF
    for i in range(start, stop, step):
        t = _log_pmf(c, i, lp, lq)
        terms.append(t)
        if t > best:
            best = t
        elif t - best < _CUTOFF:
            break
    return logsumexp(terms)


def binomial_log_tail_gt(c: int, p, k) -> float:
    """Natural log of Pr[X > k] for X ~ Binomial(c, p)."""
    if c < 0:
        raise ValueError("c must be non-negative")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    k = math.floor(k)
    if k < -1:
        raise ValueError("k must be >= -1")
    if k < 0:
        return 0.0
    if k >= c:
        return NEG_INF
    if p == 0:
        return NEG_INF
    if p == 1:
        return 0.0
    lp, lq = _as_float_logs(p)
    if k + 1 > c * float(p):
        # upper tail is the small side: sum it directly, heaviest term first
        return _log_sum_range(c, k + 1, c + 1, 1, lp, lq)
    log_cdf = _log_sum_range(c, k, -1, -1, lp, lq)
    if log_cdf >= 0.0:
        return NEG_INF
    return math.log(-math.expm1(log_cdf))


def binomial_log_cdf(c: int, p, k) -> float:
    """Natural log of Pr[X <= k]."""
    return LogProb(binomial_log_tail_gt(c, p, k)).complement_log()


def binomial_tail_gt(c: int, p, k) -> LogProb:
    return LogProb(binomial_log_tail_gt(c, p, k))


def binomial_tail_exact(c: int, p, k) -> Fraction:
    """Pr[X > k] as an exact rational; ``p`` must be rational."""
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    k = math.floor(k)
    if k < 0:
        return Fraction(1)
    if k >= c:
        return Fraction(0)
    q = 1 - p
    # same value either way; sum whichever side has fewer terms
    if k + 1 <= c - k:
        return 1 - sum((math.comb(c, i) * p**i * q ** (c - i) for i in range(k + 1)), Fraction(0))
    return sum((math.comb(c, i) * p**i * q ** (c - i) for i in range(k + 1, c + 1)), Fraction(0))


def log_power_complement(log_tail: float, power: int) -> float:
    """log(1 - (1 - tail)**power), accurate when tail is tiny."""
    if power == 0 or log_tail == NEG_INF:
        return NEG_INF
    log_cdf = LogProb(log_tail).complement_log()
    if log_cdf == NEG_INF:
        return 0.0
    inner = power * log_cdf
    if inner == 0.0:
        # (1 - tail)**power rounds to 1: first-order term
        return math.log(power) + log_tail
    return LogProb(inner).complement_log()
