"""Population refinement: drop the lowest-utility clients before random selection.

Approximates informed selection (e.g. Oort) while keeping the selection
itself random, so every protocol guarantee still applies to the refined
population.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .._util import as_fraction

TABLE_HEADER = "# lotto-utility-table v1"
TABLE_FIELDS = ("client_id", "latency", "dataset_size", "loss_rms")


@dataclass(frozen=True)
class ClientUtility:
    client_id: int
    latency_t: float
    dataset_size: int
    loss_rms: float

    def __post_init__(self) -> None:
        if self.dataset_size < 1:
            raise ValueError("dataset_size must be >= 1")
        if not self.latency_t > 0:
            raise ValueError("latency must be positive")
        if self.loss_rms < 0:
            raise ValueError("loss_rms must be non-negative")

    @property
    def data_quality(self) -> float:
        """|B_i| * loss_rms, the statistical half of the Oort score."""
        return self.dataset_size * self.loss_rms


class Strategy(enum.Enum):
    OR = "or"
    AND = "and"
    JOINT = "joint"


@dataclass(frozen=True)
class RefinementConfig:
    d: float
    strategy: Strategy = Strategy.JOINT
    deadline_T: float = 1.0
    penalty_alpha: float = 2.0
    # Or only: cap on total removals as a fraction of the population;
    # None caps at d, and or_union=True disables the cap entirely
    d_total: float | None = None
    or_union: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "strategy", Strategy(self.strategy) if not isinstance(self.strategy, Strategy) else self.strategy)
        if not 0 <= self.d < 1:
            raise ValueError("d must lie in [0, 1)")
        if not self.penalty_alpha > 0:
            raise ValueError("penalty_alpha must be positive")
        if self.d_total is not None and not 0 <= self.d_total < 1:
            raise ValueError("d_total must lie in [0, 1)")


def oort_utility(u: ClientUtility, deadline_T: float, penalty_alpha: float) -> float:
    """|B_i| * loss_rms * (T / t_i) ** (alpha * [T < t_i])."""
    base = u.data_quality
    if deadline_T < u.latency_t:
        return base * (deadline_T / u.latency_t) ** penalty_alpha
    return base


def _worst_first(pop: Sequence[ClientUtility], key) -> list[int]:
    return [u.client_id for u in sorted(pop, key=lambda u: (key(u), u.client_id))]


def exclusion_set(pop: Sequence[ClientUtility], cfg: RefinementConfig) -> list[int]:
    """Ids removed by Stage 0, ascending."""
    if not pop:
        raise ValueError("population is empty")
    ids = [u.client_id for u in pop]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate client ids")
    n = len(pop)
    k = math.floor(as_fraction(cfg.d) * n)
    if k >= n:
        raise ValueError("refinement would exclude the whole population")
    if k == 0:
        return []
    # slowest first, lowest data quality first, lowest combined score first
    by_speed = _worst_first(pop, lambda u: -u.latency_t)
    by_quality = _worst_first(pop, lambda u: u.data_quality)
    if cfg.strategy is Strategy.JOINT:
        return sorted(_worst_first(pop, lambda u: oort_utility(u, cfg.deadline_T, cfg.penalty_alpha))[:k])
    bottom_speed, bottom_quality = set(by_speed[:k]), set(by_quality[:k])
    if cfg.strategy is Strategy.AND:
        return sorted(bottom_speed & bottom_quality)
    union = bottom_speed | bottom_quality
    if cfg.or_union:
        return sorted(union)
    cap = k if cfg.d_total is None else math.floor(as_fraction(cfg.d_total) * n)
    if len(union) <= cap:
        return sorted(union)
    rank_s = {cid: i for i, cid in enumerate(by_speed)}
    rank_q = {cid: i for i, cid in enumerate(by_quality)}
    worst = sorted(
        union, key=lambda cid: (rank_s[cid] + rank_q[cid], min(rank_s[cid], rank_q[cid]), cid)
    )
    return sorted(worst[:cap])


def refine_population(pop: Sequence[ClientUtility], cfg: RefinementConfig) -> list[int]:
    """Ids that survive Stage 0, ascending."""
    removed = set(exclusion_set(pop, cfg))
    return sorted(u.client_id for u in pop if u.client_id not in removed)


def worst_case_base_rate(c, n_init: int, d) -> Fraction:
    """Dishonest fraction after refinement when only honest clients are removed."""
    c, d = as_fraction(c), as_fraction(d)
    if not 0 <= c <= n_init:
        raise ValueError("need 0 <= c <= n_init")
    if not 0 <= d < 1:
        raise ValueError("d must lie in [0, 1)")
    return min(Fraction(1), c / (n_init * (1 - d)))


def zipf_quality_gain(d, p) -> float:
    """Improvement of the worst remaining client's quality, (1 - d) ** -p."""
    d, p = float(d), float(p)
    if not 0 <= d < 1:
        raise ValueError("d must lie in [0, 1)")
    if not p > 0:
        raise ValueError("p must be positive")
    return (1.0 - d) ** -p


def zipf_worst_quality_ratio(n: int, d, p: float) -> float:
    """Brute-force counterpart of :func:`zipf_quality_gain`: qualities
    ``rank**-p`` for ranks 1..n, refine away the worst floor(d*n), compare
    the worst survivor with the worst overall."""
    quality = [(rank ** -p, rank) for rank in range(1, n + 1)]
    pop = [ClientUtility(r, 1.0, 1, q) for q, r in quality]
    kept = refine_population(pop, RefinementConfig(d=d, strategy=Strategy.JOINT, deadline_T=1.0))
    worst_kept = min(u.loss_rms for u in pop if u.client_id in set(kept))
    return worst_kept / min(q for q, _ in quality)


def synthetic_population(n: int, seed: int = 0, zipf_a: float = 1.2) -> list[ClientUtility]:
    """Zipf-distributed latencies and dataset sizes, uniform loss levels."""
    if n < 1:
        raise ValueError("population is empty")
    rng = np.random.default_rng(seed)
    latency = rng.zipf(zipf_a, n).astype(float)
    size = np.minimum(rng.zipf(zipf_a, n), 10**6)
    loss = rng.uniform(0.0, 4.0, n)
    return [
        ClientUtility(i, float(latency[i]), int(size[i]), float(round(loss[i], 12)))
        for i in range(n)
    ]


def write_utility_table(pop: Iterable[ClientUtility], path: str | Path | None = None) -> str:
    buf = io.StringIO()
    buf.write(TABLE_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_FIELDS)
    for u in pop:
        w.writerow([u.client_id, repr(u.latency_t), u.dataset_size, repr(u.loss_rms)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_utility_table(source: str | Path) -> list[ClientUtility]:
    text = Path(source).read_text() if isinstance(source, Path) or "\n" not in str(source) else str(source)
    lines = text.splitlines()
    if not lines or lines[0].strip() != TABLE_HEADER:
        raise ValueError(f"utility table must start with {TABLE_HEADER!r}")
    rows = list(csv.DictReader(lines[1:]))
    if rows and tuple(rows[0].keys()) != TABLE_FIELDS:
        raise ValueError(f"utility table columns must be {', '.join(TABLE_FIELDS)}")
    return [
        ClientUtility(int(r["client_id"]), float(r["latency"]), int(r["dataset_size"]), float(r["loss_rms"]))
        for r in rows
    ]


__all__ = [
    "ClientUtility",
    "RefinementConfig",
    "Strategy",
    "exclusion_set",
    "oort_utility",
    "read_utility_table",
    "refine_population",
    "synthetic_population",
    "worst_case_base_rate",
    "write_utility_table",
    "zipf_quality_gain",
    "zipf_worst_quality_ratio",
]
