"""Closed-form security bounds for random participant selection.

Every bound uses the selection probability ``p = floor(alpha*s*m/n_min)/m``,
computed exactly over the integers and only then handed to the log-space
binomial kernels.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

from .._util import as_fraction
from .accountants import PrivacyAccountant
from .kernel import (
    NEG_INF,
    LogProb,
    binomial_log_cdf,
    binomial_log_tail_gt,
    binomial_tail_exact,
    log_power_complement,
)

M_DEFAULT = 2**256


@dataclass(frozen=True)
class BoundParams:
    n_min: int
    c: int
    s: int
    alpha: Fraction
    m: int = M_DEFAULT
    t: Fraction | None = None
    R: int | None = None
    delta: float | None = None
    n_max: int | None = None
    sigma: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        if self.t is not None:
            object.__setattr__(self, "t", as_fraction(self.t))
        if self.c < 0:
            raise ValueError("c must be non-negative")
        if self.s < 0:
            raise ValueError("s must be non-negative")
        if self.n_min < 1:
            raise ValueError("n_min must be positive")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.m < 1:
            raise ValueError("m must be positive")
        if self.threshold_numerator() > self.m:
            raise ValueError("alpha*s exceeds n_min: selection probability above 1")

    def threshold_numerator(self) -> int:
        return math.floor(self.alpha * self.s * self.m / self.n_min)

    def with_(self, **changes) -> "BoundParams":
        return replace(self, **changes)


@lru_cache(maxsize=1024)
def selection_probability(params: BoundParams) -> Fraction:
    """Exact ``floor(alpha*s*m/n_min)/m``."""
    return Fraction(params.threshold_numerator(), params.m)


def theorem1_bound(params: BoundParams, eta) -> LogProb:
    """Pr[x > eta*s]: more than an eta fraction of the s participants are
    dishonest, whatever the server does, in a round that does not abort."""
    eta = as_fraction(eta)
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    p = selection_probability(params)
    return LogProb(binomial_log_tail_gt(params.c, p, math.floor(eta * params.s)))


def secagg_threshold(params: BoundParams, t) -> int:
    t = as_fraction(t)
    if not Fraction(params.s, 2) < t <= params.s:
        raise ValueError(f"SecAgg threshold t={t} outside ({params.s}/2, {params.s}]")
    return math.floor(2 * t - params.s)


def secagg_failure_bound(params: BoundParams, t) -> LogProb:
    """Pr[more than 2t - s dishonest participants], i.e. enough colluders to
    unmask an individual honest update."""
    k = secagg_threshold(params, t)
    return LogProb(binomial_log_tail_gt(params.c, selection_probability(params), k))


def _overselect_p(n: int, s: int, alpha) -> Fraction:
    if n < 1:
        raise ValueError("n must be positive")
    p = as_fraction(alpha) * s / n
    if p > 1:
        warnings.warn("alpha*s > n: every client is a candidate", RuntimeWarning, stacklevel=3)
        p = Fraction(1)
    return p


def overselection_success(n: int, s: int, alpha) -> LogProb:
    """Probability that at least s of n clients become candidates when each
    does so independently with probability alpha*s/n."""
    return LogProb(binomial_log_tail_gt(n, _overselect_p(n, s, alpha), s - 1))


def overselection_success_exact(n: int, s: int, alpha) -> Fraction:
    return binomial_tail_exact(n, _overselect_p(n, s, alpha), s - 1)


# ---- multi-round privacy ---------------------------------------------------


def p_k(params: BoundParams, k: int, R: int) -> LogProb:
    """Probability that some round among R has more than k dishonest
    participants."""
    log_tail = binomial_log_tail_gt(params.c, selection_probability(params), k)
    if R == 1:
        return LogProb(log_tail)
    return LogProb(log_power_complement(log_tail, R))


def log_gamma(j: int, r: int, params: BoundParams) -> float:
    """log of gamma(j, r) = Pr[Bin(j-1, p) <= r-1]**s."""
    if j < 1:
        raise ValueError("j must be >= 1")
    log_cdf = binomial_log_cdf(j - 1, selection_probability(params), r - 1)
    if log_cdf == NEG_INF:
        return NEG_INF if params.s else 0.0
    return params.s * log_cdf


def gamma(j: int, r: int, params: BoundParams) -> float:
    return math.exp(log_gamma(j, r, params))


def phi(R: int, r: int, params: BoundParams) -> LogProb:
    """q_r = phi(R, r) for client-centric selection.

    Unrolling phi(j) = 1 - gamma(j) + gamma(j)*phi(j-1) from phi(r) = 0 gives
    phi(R) = 1 - prod_{j=r+1..R} gamma(j), evaluated here in log space.
    """
    if not 0 <= r <= R:
        raise ValueError("need 0 <= r <= R")
    total = 0.0
    for j in range(r + 1, R + 1):
        g = log_gamma(j, r, params)
        if g == NEG_INF:
            return LogProb(0.0)
        total += g
    if total == 0.0:
        return LogProb(NEG_INF)
    return LogProb(LogProb(total).complement_log())


def phi_recurrence(R: int, r: int, params: BoundParams) -> list[float]:
    """phi(j, r) for j = r..R by the literal recurrence (cross-check)."""
    if not 0 <= r <= R:
        raise ValueError("need 0 <= r <= R")
    values = [0.0]
    for j in range(r + 1, R + 1):
        g = gamma(j, r, params)
        values.append(1.0 - g + g * values[-1])
    return values


def q_r_client(params: BoundParams, r: int, R: int) -> LogProb:
    return phi(R, r, params)


def q_r_server(params: BoundParams, r: int, R: int, n_max: int) -> LogProb:
    """Some client of at most n_max becomes a candidate in more than r of R
    rounds; server-recomputable randomness lets the server pick those."""
    if n_max < params.n_min:
        raise ValueError("n_max must be >= n_min")
    log_tail = binomial_log_tail_gt(R, selection_probability(params), r)
    return LogProb(log_power_complement(log_tail, n_max))


@dataclass(frozen=True)
class EpsilonResult:
    epsilon: float
    k: int | None
    r: int | None
    delta_prime: float | None
    feasible: int


def _k_max(params: BoundParams) -> int:
    if params.t is None:
        return params.c
    return max(-1, min(params.c, secagg_threshold(params, params.t)))


def _minimize(
    params: BoundParams,
    R: int,
    delta: float,
    accountant: PrivacyAccountant,
    q_values: list[float],
) -> EpsilonResult:
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    sigma = params.sigma if params.sigma is not None else 1.0
    pk_values = [float(p_k(params, k, R)) for k in range(_k_max(params) + 1)]
    best = EpsilonResult(math.inf, None, None, None, 0)
    feasible = 0
    for k, pk in enumerate(pk_values):
        for r, qr in enumerate(q_values):
            slack = pk + qr
            if not slack < delta:
                continue
            feasible += 1
            # equals 1 - (1 - delta)/(1 - pk - qr) without the cancellation
            dprime = (delta - slack) / (1.0 - slack)
            eps = accountant(params.s, k, r, sigma, dprime)
            if eps < best.epsilon:
                best = EpsilonResult(eps, k, r, dprime, 0)
    return replace(best, feasible=feasible)


def epsilon_client_centric(
    params: BoundParams, R: int, delta: float, accountant: PrivacyAccountant, detail: bool = False
):
    q = [float(q_r_client(params, r, R)) for r in range(R + 1)]
    res = _minimize(params, R, delta, accountant, q)
    return res if detail else res.epsilon


def epsilon_server_centric(
    params: BoundParams,
    R: int,
    delta: float,
    n_max: int,
    accountant: PrivacyAccountant,
    detail: bool = False,
):
    q = [float(q_r_server(params, r, R, n_max)) for r in range(R + 1)]
    res = _minimize(params, R, delta, accountant, q)
    return res if detail else res.epsilon
