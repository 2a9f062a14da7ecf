"""One full selection round over an in-memory, in-order network."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Iterable

from .. import primitives as prim
from .client import ClientVerdict, ColludingClient, HonestClient, Status
from .config import ProtocolConfig, encode_round
from .messages import (
    Abort,
    AbortReason,
    ParticipantSet,
    RoundAnnouncement,
    SignatureBundle,
)
from .registry import ClientKeys, Registry, derive_client_keys
from .server import (
    CandidateSet,
    ServerBehavior,
    TimedClaim,
    server_centric_sample,
    server_collect_candidates,
)

SERVER = "server"


def derive_seed(base: int, *labels: object) -> int:
    """Independent 64-bit seed for a labelled sub-stream of ``base``."""
    h = hashlib.sha256(base.to_bytes(16, "big", signed=True))
    for label in labels:
        h.update(b"\x00" + str(label).encode())
    return int.from_bytes(h.digest()[:8], "big")


class VrfVerifyCache:
    """Memoized VRF verification, shared by every client of a population.

    Results depend only on the inputs, so sharing changes no verdict; it only
    avoids re-verifying the same record once per participant.
    """

    def __init__(self) -> None:
        self._cache: dict[tuple[bytes, bytes, int, bytes], bool] = {}

    def __call__(self, pk: bytes, data: bytes, beta: int, proof: bytes) -> bool:
        key = (pk, data, beta, proof)
        hit = self._cache.get(key)
        if hit is None:
            hit = prim.vrf_verify(pk, data, beta, proof)
            if len(self._cache) > 200_000:
                self._cache.clear()
            self._cache[key] = hit
        return hit


class SigVerifyCache:
    def __init__(self) -> None:
        self._cache: dict[tuple[bytes, bytes, bytes], bool] = {}

    def __call__(self, pk: bytes, message: bytes, signature: bytes) -> bool:
        key = (pk, hashlib.sha256(message).digest(), signature)
        hit = self._cache.get(key)
        if hit is None:
            hit = prim.sig_verify(pk, message, signature)
            self._cache[key] = hit
        return hit


@dataclass
class Population:
    """Registered clients with their keys; ``dishonest`` ids collude with the server."""

    keys: dict[int, ClientKeys]
    registry: Registry
    dishonest: frozenset[int]
    seed: int = 0
    vrf_cache: VrfVerifyCache = field(default_factory=VrfVerifyCache, repr=False)

    @classmethod
    def generate(
        cls, n: int, c: int = 0, seed: int = 0, dishonest: Iterable[int] | None = None
    ) -> "Population":
        if not 0 <= c <= n:
            raise ValueError("need 0 <= c <= n")
        registry = Registry()
        keys = {}
        for cid in range(n):
            keys[cid] = derive_client_keys(seed, cid)
            registry.register(keys[cid])
        if dishonest is None:
            dishonest = random.Random(derive_seed(seed, "dishonest")).sample(range(n), c)
        return cls(keys, registry, frozenset(dishonest), seed)

    @property
    def ids(self) -> list[int]:
        return sorted(self.keys)

    def __len__(self) -> int:
        return len(self.keys)


@dataclass
class Message:
    stage: int
    kind: str
    sender: str
    receiver: str
    nbytes: int
    payload: bytes | None = None

    def to_json(self) -> dict:
        out = {
            "stage": self.stage,
            "kind": self.kind,
            "from": self.sender,
            "to": self.receiver,
            "nbytes": self.nbytes,
        }
        if self.payload is not None:
            out["payload"] = self.payload.hex()
        return out


@dataclass
class RoundContext:
    config: ProtocolConfig
    population: Population
    rng: random.Random
    seed: int
    target: list[int] = field(default_factory=list)
    true_n: int = 0
    announced_n: int = 0

    @property
    def registry(self) -> Registry:
        return self.population.registry

    @property
    def dishonest(self) -> frozenset[int]:
        return self.population.dishonest

    @property
    def data(self) -> bytes:
        return encode_round(self.config.round_r)


@dataclass
class RoundTranscript:
    config: ProtocolConfig
    strategy: str
    seed: int
    announced_n: int
    true_n: int
    candidates: list[int]
    server_abort: AbortReason | None
    views: dict[int, ParticipantSet]
    verdicts: dict[int, ClientVerdict]
    honest: frozenset[int]
    messages: list[Message]
    finalized: ParticipantSet | None

    @property
    def dishonest_count(self) -> int | None:
        if self.finalized is None:
            return None
        return sum(1 for cid in self.finalized.ids if cid not in self.honest)

    def honest_finalized(self) -> list[int]:
        return sorted(
            cid for cid, v in self.verdicts.items() if cid in self.honest and v.status is Status.OK
        )

    def honest_verdicts(self) -> dict[int, ClientVerdict]:
        return {cid: v for cid, v in self.verdicts.items() if cid in self.honest}

    def to_jsonl(self) -> str:
        head = {
            "type": "round",
            "round": self.config.round_r,
            "variant": self.config.variant.value,
            "s": self.config.s,
            "alpha": str(self.config.alpha),
            "n_min": self.config.n_min,
            "strategy": self.strategy,
            "seed": self.seed,
            "announced_n": self.announced_n,
            "true_n": self.true_n,
        }
        lines = [json.dumps(head, sort_keys=True)]
        lines += [json.dumps({"type": "msg", **m.to_json()}, sort_keys=True) for m in self.messages]
        for cid in sorted(self.verdicts):
            v = self.verdicts[cid]
            lines.append(
                json.dumps(
                    {
                        "type": "verdict",
                        "client": cid,
                        "honest": cid in self.honest,
                        "status": v.status.value,
                        "reason": v.reason.value if v.reason else None,
                    },
                    sort_keys=True,
                )
            )
        tail = {
            "type": "outcome",
            "server_abort": self.server_abort.value if self.server_abort else None,
            "finalized": list(self.finalized.ids) if self.finalized else None,
            "x": self.dishonest_count,
        }
        lines.append(json.dumps(tail, sort_keys=True))
        return "\n".join(lines) + "\n"


def _client_name(cid: int) -> str:
    return f"client:{cid}"


def run_full_round(
    population: Population,
    config: ProtocolConfig,
    behavior: ServerBehavior | None = None,
    seed: int = 0,
    record_payloads: bool = True,
) -> RoundTranscript:
    """Drive every party through Stages 0-3 (or to an abort)."""
    behavior = behavior or ServerBehavior()
    ctx = RoundContext(config, population, random.Random(derive_seed(seed, "server")), seed)
    messages: list[Message] = []

    def send(stage: int, kind: str, sender: str, receiver: str, payload: bytes) -> None:
        messages.append(
            Message(stage, kind, sender, receiver, len(payload), payload if record_payloads else None)
        )

    sig_cache = SigVerifyCache()
    # Stage 0: refinement picks the population the round runs on
    ctx.target = sorted(behavior.refine(population.ids, ctx))
    ctx.true_n = len(ctx.target)
    ctx.announced_n = behavior.announced_n(ctx.true_n, ctx)
    clients: dict[int, HonestClient] = {}
    for cid in ctx.target:
        cls = ColludingClient if cid in population.dishonest else HonestClient
        clients[cid] = cls(population.keys[cid], config, population.registry, population.vrf_cache, sig_cache)

    # Stage 1
    if config.client_centric:
        ann = RoundAnnouncement(config.round_r, ctx.announced_n)
        timed: list[TimedClaim] = []
        for cid in ctx.target:
            send(1, "announce", SERVER, _client_name(cid), ann.encode())
            claim = clients[cid].on_announcement(ann)
            if claim is not None:
                timed.append(TimedClaim(claim, behavior.claim_arrival(claim, ctx)))
        timed.sort(key=lambda tc: tc.arrival)
        for tc in timed:
            send(1, "claim", _client_name(tc.claim.client_id), SERVER, tc.claim.encode())
        candidates = server_collect_candidates(timed, config, population.registry)
    else:
        candidates = server_centric_sample(population.registry, config, ctx.announced_n, ctx.target)
    candidates = behavior.filter_candidates(candidates, ctx)

    # Stage 2
    chosen = behavior.choose(candidates, ctx)
    views: dict[int, ParticipantSet] = {}
    server_abort = None
    if isinstance(chosen, Abort):
        server_abort = chosen.reason
    else:
        views = behavior.views(chosen, candidates, ctx)
        signatures = []
        for cid in sorted(views):
            P = views[cid]
            send(2, "participants", SERVER, _client_name(cid), P.encode())
            client = clients.get(cid)
            if client is None:
                continue
            sig = client.on_participant_set(P)
            if sig is not None:
                signatures.append(sig)
                send(3, "signature", _client_name(cid), SERVER, sig.encode())
        # Stage 3
        bundles = behavior.bundles(views, signatures, ctx)
        for cid in sorted(bundles):
            bundle: SignatureBundle = bundles[cid]
            send(3, "bundle", SERVER, _client_name(cid), bundle.encode())
            if cid in clients:
                clients[cid].on_bundle(bundle)
    for client in clients.values():
        client.on_round_end(server_abort)

    verdicts = {cid: c.verdict for cid, c in clients.items()}
    honest = frozenset(population.ids) - population.dishonest
    finalized = None
    if server_abort is None and views:
        honest_recipients = [cid for cid in views if cid in honest]
        if all(verdicts[cid].status is Status.OK for cid in honest_recipients if cid in verdicts):
            finalized = views[honest_recipients[0]] if honest_recipients else chosen
    return RoundTranscript(
        config=config,
        strategy=behavior.name,
        seed=seed,
        announced_n=ctx.announced_n,
        true_n=ctx.true_n,
        candidates=sorted(candidates.ids),
        server_abort=server_abort,
        views=views,
        verdicts=verdicts,
        honest=honest,
        messages=messages,
        finalized=finalized,
    )
