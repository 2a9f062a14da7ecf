"""Malicious-server strategies.

Each strategy changes server decisions only. Colluding clients submit their
genuine VRF claims and sign whatever they are handed; nobody can produce a
valid proof under another client's key.
"""

from __future__ import annotations

import enum
import math
import hashlib
from dataclasses import dataclass

from ..protocol import (
    Abort,
    AbortReason,
    CandidateSet,
    ParticipantRecord,
    ParticipantSet,
    ParticipationClaim,
    ServerBehavior,
    SignatureBundle,
    SignatureMessage,
    canonical_encode,
    server_finalize,
    uniform_subset,
)
from ..protocol.round import RoundContext


class StrategyKind(enum.Enum):
    HONEST = "honest"
    BIASED_FINALIZE = "biased-finalize"
    OMIT_HONEST_CLAIMS = "omit-honest-claims"
    INCONSISTENT_LISTS = "inconsistent-lists"
    FORGE_RANDOMNESS = "forge-randomness"
    ANNOUNCE_N = "announce-n"
    ADVERSARIAL_REFINER = "adversarial-refiner"
    DELAY_HONEST_CLAIMS = "delay-honest-claims"


def _biased_choice(candidates: CandidateSet, ctx: RoundContext) -> ParticipantSet | Abort:
    """Every dishonest candidate first, then a uniform honest fill."""
    s = ctx.config.s
    if len(candidates) < s:
        return Abort(AbortReason.NOT_ENOUGH_CANDIDATES, f"|C|={len(candidates)}")
    pool = sorted(candidates.records, key=lambda rec: rec.client_id)
    bad = [rec for rec in pool if rec.client_id in ctx.dishonest]
    good = [rec for rec in pool if rec.client_id not in ctx.dishonest]
    if len(bad) >= s:
        chosen = uniform_subset(bad, s, ctx.rng)
    else:
        chosen = bad + uniform_subset(good, s - len(bad), ctx.rng)
    return ParticipantSet(ctx.config.round_r, tuple(chosen), ctx.announced_n)


class BiasedFinalize(ServerBehavior):
    name = StrategyKind.BIASED_FINALIZE.value

    def choose(self, candidates, ctx):
        return _biased_choice(candidates, ctx)


@dataclass
class OmitHonestClaims(ServerBehavior):
    """Drop a fraction of honest claims, then select as instructed."""

    fraction: float = 0.5
    biased: bool = False
    name = StrategyKind.OMIT_HONEST_CLAIMS.value

    def filter_candidates(self, candidates, ctx):
        honest = [rec for rec in candidates.records if rec.client_id not in ctx.dishonest]
        drop = set(
            rec.client_id
            for rec in uniform_subset(honest, math.floor(self.fraction * len(honest)), ctx.rng)
        )
        kept = [rec for rec in candidates.records if rec.client_id not in drop]
        return CandidateSet(kept, candidates.dropped + [(cid, "omitted") for cid in sorted(drop)])

    def choose(self, candidates, ctx):
        if self.biased:
            return _biased_choice(candidates, ctx)
        return super().choose(candidates, ctx)

    def describe(self):
        return {"strategy": self.name, "fraction": self.fraction, "biased": self.biased}


class InconsistentLists(ServerBehavior):
    """Show two different participant sets to different honest participants.

    P' is P with one member swapped for another candidate (a dishonest member
    is swapped out when there is one); with no spare candidate P' drops that
    member instead. Honest members of both sets alternate between the views,
    and colluders sign both views so each bundle is as complete as possible.
    """

    name = StrategyKind.INCONSISTENT_LISTS.value

    def views(self, chosen, candidates, ctx):
        members = list(chosen.records)
        bad_members = [rec for rec in members if rec.client_id in ctx.dishonest]
        out_rec = bad_members[0] if bad_members else members[0]
        spare = [rec for rec in sorted(candidates.records, key=lambda r: r.client_id) if rec.client_id not in chosen.ids]
        alt_records = [rec for rec in members if rec is not out_rec]
        in_rec = None
        if spare:
            in_rec = spare[ctx.rng.randrange(len(spare))]
            alt_records.append(in_rec)
        alt = ParticipantSet(chosen.round_r, tuple(alt_records), chosen.announced_n)
        views = {out_rec.client_id: chosen}
        if in_rec is not None:
            views[in_rec.client_id] = alt
        shared_honest = [cid for cid in alt.ids if cid in chosen.ids and cid not in ctx.dishonest]
        for i, cid in enumerate(shared_honest):
            views[cid] = chosen if i % 2 == 0 else alt
        for cid in alt.ids:
            if cid in ctx.dishonest and cid in chosen.ids:
                views[cid] = chosen
        return views

    def bundles(self, views, signatures, ctx):
        by_view: dict[bytes, list[SignatureMessage]] = {}
        distinct = {canonical_encode(P.round_r, P): P for P in views.values()}
        signed = {sig.client_id: sig for sig in signatures}
        for enc, P in distinct.items():
            sigs = []
            for cid in P.ids:
                if cid in ctx.dishonest:
                    # colluders sign any view on request
                    sigs.append(SignatureMessage(cid, ctx.population.keys[cid].sign(enc)))
                elif cid in signed and canonical_encode(views[cid].round_r, views[cid]) == enc:
                    sigs.append(signed[cid])
            by_view[enc] = sigs
        out = {}
        for cid, P in views.items():
            enc = canonical_encode(P.round_r, P)
            out[cid] = SignatureBundle(tuple(by_view[enc]))
        return out


class ForgeRandomness(ServerBehavior):
    """Insert a member whose randomness the server made up.

    The victim is a registered non-candidate (dishonest preferred); it gets a
    random beta under the threshold and, client-centric, random proof bytes.
    When every client is a candidate, an existing member's beta is replaced.
    """

    name = StrategyKind.FORGE_RANDOMNESS.value

    def choose(self, candidates, ctx):
        s = ctx.config.s
        if len(candidates) < s - 1:
            return Abort(AbortReason.NOT_ENOUGH_CANDIDATES, f"|C|={len(candidates)}")
        T = ctx.config.threshold(ctx.announced_n)
        cand_ids = set(candidates.ids)
        outsiders = [cid for cid in ctx.target if cid not in cand_ids]
        outsiders.sort(key=lambda cid: (cid not in ctx.dishonest, cid))
        cc = ctx.config.client_centric
        pool = sorted(candidates.records, key=lambda rec: rec.client_id)
        if outsiders:
            real = uniform_subset(pool, s - 1, ctx.rng)
            victim = outsiders[0]
            beta = ctx.rng.randrange(max(T, 1))
        else:
            real = uniform_subset(pool, s, ctx.rng)
            old = real.pop()
            victim = old.client_id
            beta = (old.beta + 1 + ctx.rng.randrange(max(T - 1, 1))) % max(T, 1)
        proof = ctx.rng.randbytes(80) if cc else None
        fake = ParticipantRecord(victim, ctx.registry.lookup(victim).pk_reg, beta, proof)
        return ParticipantSet(ctx.config.round_r, tuple(real + [fake]), ctx.announced_n)


@dataclass
class AnnounceN(ServerBehavior):
    """Claim a population of ``value`` clients (small n inflates the threshold)."""

    value: int = 0
    name = StrategyKind.ANNOUNCE_N.value

    def announced_n(self, n, ctx):
        return self.value

    def describe(self):
        return {"strategy": self.name, "value": self.value}


@dataclass
class AdversarialRefiner(ServerBehavior):
    """Stage 0 excludes floor(d*n_init) honest clients only, then finalizes biased."""

    d: float = 0.2
    name = StrategyKind.ADVERSARIAL_REFINER.value

    def refine(self, ids, ctx):
        honest = [cid for cid in ids if cid not in ctx.dishonest]
        k = math.floor(self.d * len(ids))
        if k >= len(ids):
            raise ValueError("refinement would exclude the whole population")
        drop = set(uniform_subset(honest, min(k, len(honest)), ctx.rng))
        return [cid for cid in ids if cid not in drop]

    def choose(self, candidates, ctx):
        return _biased_choice(candidates, ctx)

    def describe(self):
        return {"strategy": self.name, "d": self.d}


@dataclass
class DelayHonestClaims(ServerBehavior):
    """Hold back a fraction of honest claims past the timeout."""

    fraction: float = 1.0
    delay: int = 1
    name = StrategyKind.DELAY_HONEST_CLAIMS.value

    def claim_arrival(self, claim: ParticipationClaim, ctx):
        if claim.client_id in ctx.dishonest:
            return 0
        # deterministic per (round, client) coin with bias `fraction`
        digest = hashlib.sha256(b"delay" + claim.encode()[:8] + ctx.data).digest()
        if int.from_bytes(digest[:8], "big") < self.fraction * 2**64:
            return ctx.config.timeout_l + self.delay
        return 0

    def describe(self):
        return {"strategy": self.name, "fraction": self.fraction, "delay": self.delay}


def make_strategy(name: str, **params) -> ServerBehavior:
    kind = StrategyKind(name)
    if kind is StrategyKind.HONEST:
        return ServerBehavior()
    table = {
        StrategyKind.BIASED_FINALIZE: BiasedFinalize,
        StrategyKind.OMIT_HONEST_CLAIMS: OmitHonestClaims,
        StrategyKind.INCONSISTENT_LISTS: InconsistentLists,
        StrategyKind.FORGE_RANDOMNESS: ForgeRandomness,
        StrategyKind.ANNOUNCE_N: AnnounceN,
        StrategyKind.ADVERSARIAL_REFINER: AdversarialRefiner,
        StrategyKind.DELAY_HONEST_CLAIMS: DelayHonestClaims,
    }
    return table[kind](**params)


__all__ = [
    "AdversarialRefiner",
    "AnnounceN",
    "BiasedFinalize",
    "DelayHonestClaims",
    "ForgeRandomness",
    "InconsistentLists",
    "OmitHonestClaims",
    "StrategyKind",
    "make_strategy",
    "server_finalize",
]
