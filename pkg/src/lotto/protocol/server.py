"""Server-side operations and the honest server behaviour.

A :class:`ServerBehavior` is the full set of decisions a (possibly malicious)
server makes in a round. Adversarial strategies override individual hooks.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

from .. import primitives as prim
from .config import ProtocolConfig, encode_round
from .messages import (
    Abort,
    AbortReason,
    ParticipantRecord,
    ParticipantSet,
    ParticipationClaim,
    SignatureBundle,
    SignatureMessage,
)
from .registry import Registry

if TYPE_CHECKING:
    from .round import RoundContext


@dataclass(frozen=True)
class TimedClaim:
    claim: ParticipationClaim
    arrival: int = 0


@dataclass
class CandidateSet:
    records: list[ParticipantRecord] = field(default_factory=list)
    dropped: list[tuple[int, str]] = field(default_factory=list)

    @property
    def ids(self) -> list[int]:
        return [rec.client_id for rec in self.records]

    def __len__(self) -> int:
        return len(self.records)


def server_collect_candidates(
    claims: Iterable[TimedClaim], config: ProtocolConfig, registry: Registry
) -> CandidateSet:
    """Keep claims that arrive by the timeout; the first claim per id wins."""
    out = CandidateSet()
    seen: set[int] = set()
    for tc in claims:
        cid = tc.claim.client_id
        if tc.arrival > config.timeout_l:
            out.dropped.append((cid, "late"))
            continue
        if cid in seen:
            out.dropped.append((cid, "duplicate"))
            continue
        entry = registry.get(cid)
        if entry is None:
            out.dropped.append((cid, "unregistered"))
            continue
        seen.add(cid)
        out.records.append(ParticipantRecord(cid, entry.pk_reg, tc.claim.beta, tc.claim.proof))
    return out


def server_centric_sample(
    registry: Registry, config: ProtocolConfig, n: int, ids: Sequence[int] | None = None
) -> CandidateSet:
    """Recompute every client's PRF value from public keys; T uses ``n``."""
    T = config.threshold(n)
    data = encode_round(config.round_r)
    out = CandidateSet()
    for cid in registry.ids() if ids is None else ids:
        entry = registry.lookup(cid)
        beta = prim.prf_eval(entry.pk_lotto, data)
        if beta < T:
            out.records.append(ParticipantRecord(cid, entry.pk_reg, beta, None))
    return out


def uniform_subset(items: Sequence, k: int, rng: random.Random) -> list:
    """Partial Fisher-Yates: the first k slots of a seeded shuffle."""
    pool = list(items)
    for i in range(k):
        j = rng.randrange(i, len(pool))
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]


def server_finalize(
    candidates: CandidateSet, config: ProtocolConfig, rng: random.Random, announced_n: int
) -> ParticipantSet | Abort:
    if len(candidates) < config.s:
        return Abort(AbortReason.NOT_ENOUGH_CANDIDATES, f"|C|={len(candidates)}")
    pool = sorted(candidates.records, key=lambda rec: rec.client_id)
    chosen = uniform_subset(pool, config.s, rng)
    return ParticipantSet(config.round_r, tuple(chosen), announced_n)


Views = dict[int, ParticipantSet]


class ServerBehavior:
    """The honest server. Every hook is a point where a malicious server may
    deviate."""

    name = "honest"

    def refine(self, ids: list[int], ctx: "RoundContext") -> list[int]:
        return ids

    def announced_n(self, n: int, ctx: "RoundContext") -> int:
        return n

    def claim_arrival(self, claim: ParticipationClaim, ctx: "RoundContext") -> int:
        return 0

    def filter_candidates(self, candidates: CandidateSet, ctx: "RoundContext") -> CandidateSet:
        return candidates

    def choose(self, candidates: CandidateSet, ctx: "RoundContext") -> ParticipantSet | Abort:
        return server_finalize(candidates, ctx.config, ctx.rng, ctx.announced_n)

    def views(self, chosen: ParticipantSet, candidates: CandidateSet, ctx: "RoundContext") -> Views:
        """Which set each recipient receives; honest: one set to its members."""
        return {cid: chosen for cid in chosen.ids}

    def bundles(
        self, views: Views, signatures: list[SignatureMessage], ctx: "RoundContext"
    ) -> dict[int, SignatureBundle]:
        bundle = SignatureBundle(tuple(sorted(signatures, key=lambda sig: sig.client_id)))
        return {cid: bundle for cid in views}

    def describe(self) -> dict:
        return {"strategy": self.name}


HonestServer = ServerBehavior
