"""Client-side checks and the honest client state machine."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

from .. import primitives as prim
from .config import ProtocolConfig, encode_round
from .messages import (
    OK,
    Abort,
    AbortReason,
    Ok,
    ParticipantRecord,
    ParticipantSet,
    ParticipationClaim,
    RoundAnnouncement,
    SignatureBundle,
    SignatureMessage,
    canonical_encode,
)
from .registry import ClientKeys, Registry, RegistryError

VrfVerifier = Callable[[bytes, bytes, int, bytes], bool]
SigVerifier = Callable[[bytes, bytes, bytes], bool]


@dataclass(frozen=True)
class Decline:
    beta: int


def client_self_sample(
    keys: ClientKeys, announcement: RoundAnnouncement, config: ProtocolConfig
) -> ParticipationClaim | Decline | Abort:
    """Stage 1, client-centric: claim iff the VRF value is under threshold.

    The proof is only built for eligible clients; the threshold test needs
    the VRF value alone.
    """
    if announcement.n < config.n_min:
        return Abort(AbortReason.POPULATION_TOO_SMALL, f"announced n={announcement.n}")
    data = encode_round(announcement.r)
    beta = keys.vrf_beta(data)
    if beta >= config.threshold(announcement.n):
        return Decline(beta)
    ev = keys.vrf_eval(data)
    return ParticipationClaim(keys.client_id, ev.beta, ev.proof)


def own_record(keys: ClientKeys, config: ProtocolConfig, claim: ParticipationClaim | None = None) -> ParticipantRecord:
    """The record this client expects to find for itself in P."""
    if config.client_centric:
        if claim is None:
            raise ValueError("client-centric record needs the submitted claim")
        return ParticipantRecord(keys.client_id, keys.pk_reg, claim.beta, claim.proof)
    beta = prim.prf_eval(keys.pk_lotto, encode_round(config.round_r))
    return ParticipantRecord(keys.client_id, keys.pk_reg, beta, None)


def client_verify_outcome(
    self_id: int,
    received: ParticipantSet,
    config: ProtocolConfig,
    registry: Registry,
    expected_self: ParticipantRecord | None = None,
    vrf_verifier: VrfVerifier = prim.vrf_verify,
) -> Ok | Abort:
    """Stage 2 checks, in a fixed order; the first failure decides the reason.

    (a) own record present (byte-exact if ``expected_self`` is given),
    (b) exactly s members, (c) announced n >= n_min, (d) every member's
    randomness is under the threshold and verifies.
    """
    mine = received.record(self_id)
    if mine is None:
        return Abort(AbortReason.SELF_MISSING)
    if expected_self is not None and mine != expected_self:
        return Abort(AbortReason.SELF_MISSING, "own record altered")
    if len(received) != config.s:
        return Abort(AbortReason.WRONG_SET_SIZE, f"|P|={len(received)}")
    n = received.announced_n
    if n < config.n_min:
        return Abort(AbortReason.POPULATION_TOO_SMALL, f"announced n={n}")
    T = config.threshold(n)
    data = encode_round(received.round_r)
    if received.round_r != config.round_r:
        return Abort(AbortReason.BAD_RANDOMNESS, f"set is for round {received.round_r}")
    for rec in received.records:
        try:
            entry = registry.lookup(rec.client_id)
        except RegistryError:
            return Abort(AbortReason.BAD_RANDOMNESS, f"unregistered member {rec.client_id}")
        if entry.pk_reg != rec.pk_reg:
            return Abort(AbortReason.BAD_RANDOMNESS, f"pk_reg mismatch for {rec.client_id}")
        if config.client_centric:
            if rec.beta >= T:
                return Abort(AbortReason.BAD_RANDOMNESS, f"member {rec.client_id} over threshold")
            if rec.proof is None or not vrf_verifier(entry.pk_lotto, data, rec.beta, rec.proof):
                return Abort(AbortReason.BAD_VRF_PROOF, f"member {rec.client_id}")
        else:
            if prim.prf_eval(entry.pk_lotto, data) != rec.beta:
                return Abort(AbortReason.BAD_PRF_RECOMPUTE, f"member {rec.client_id}")
            if rec.beta >= T:
                return Abort(AbortReason.BAD_RANDOMNESS, f"member {rec.client_id} over threshold")
    return OK


def client_sign_outcome(keys: ClientKeys, round_r: int, P: ParticipantSet) -> bytes:
    return keys.sign(canonical_encode(round_r, P))


def client_consistency_check(
    P_i: ParticipantSet,
    bundle: SignatureBundle | None,
    registry: Registry,
    sig_verifier: SigVerifier = prim.sig_verify,
) -> Ok | Abort:
    """Stage 3: every member of P_i signed exactly P_i, and nobody else signed."""
    if bundle is None:
        return Abort(AbortReason.TIMEOUT, "no signature bundle")
    if bundle.ids != frozenset(P_i.ids) or len(bundle.signatures) != len(P_i):
        return Abort(AbortReason.INCONSISTENT_SETS)
    message = canonical_encode(P_i.round_r, P_i)
    for sig in bundle.signatures:
        entry = registry.get(sig.client_id)
        if entry is None or not sig_verifier(entry.pk_reg, message, sig.signature):
            return Abort(AbortReason.SIGNATURE_INVALID, f"member {sig.client_id}")
    return OK


class Status(enum.Enum):
    IDLE = "idle"
    DECLINED = "declined"
    CLAIMED = "claimed"
    NOT_SELECTED = "not-selected"
    SIGNED = "signed"
    OK = "ok"
    ABORTED = "aborted"


@dataclass(frozen=True)
class ClientVerdict:
    status: Status
    reason: AbortReason | None = None
    detail: str = ""

    @property
    def label(self) -> str:
        return self.reason.value if self.reason else self.status.value


class HonestClient:
    """Runs the protocol verbatim for one round."""

    honest = True

    def __init__(
        self,
        keys: ClientKeys,
        config: ProtocolConfig,
        registry: Registry,
        vrf_verifier: VrfVerifier = prim.vrf_verify,
        sig_verifier: SigVerifier = prim.sig_verify,
    ) -> None:
        self.keys = keys
        self.config = config
        self.registry = registry
        self._vrf_verifier = vrf_verifier
        self._sig_verifier = sig_verifier
        self.status = Status.IDLE
        self.reason: AbortReason | None = None
        self.detail = ""
        self.claim: ParticipationClaim | None = None
        self.received: ParticipantSet | None = None

    @property
    def client_id(self) -> int:
        return self.keys.client_id

    @property
    def verdict(self) -> ClientVerdict:
        return ClientVerdict(self.status, self.reason, self.detail)

    def _abort(self, result: Abort) -> None:
        self.status = Status.ABORTED
        self.reason = result.reason
        self.detail = result.detail

    def on_announcement(self, ann: RoundAnnouncement) -> ParticipationClaim | None:
        if self.status is not Status.IDLE:
            return None
        result = client_self_sample(self.keys, ann, self.config)
        if isinstance(result, Abort):
            self._abort(result)
            return None
        if isinstance(result, Decline):
            self.status = Status.DECLINED
            return None
        self.claim = result
        self.status = Status.CLAIMED
        return result

    def on_participant_set(self, P: ParticipantSet) -> SignatureMessage | None:
        if self.status is Status.ABORTED or self.received is not None:
            return None
        if self.config.client_centric and self.status is not Status.CLAIMED:
            # never claimed, yet listed: nothing of ours can be in there
            self._abort(Abort(AbortReason.SELF_MISSING, "listed without a claim"))
            return None
        self.received = P
        expected = own_record(self.keys, self.config, self.claim)
        result = client_verify_outcome(
            self.client_id, P, self.config, self.registry, expected, self._vrf_verifier
        )
        if isinstance(result, Abort):
            self._abort(result)
            return None
        self.status = Status.SIGNED
        return SignatureMessage(self.client_id, client_sign_outcome(self.keys, P.round_r, P))

    def on_bundle(self, bundle: SignatureBundle | None) -> None:
        if self.status is not Status.SIGNED:
            return
        result = client_consistency_check(self.received, bundle, self.registry, self._sig_verifier)
        if isinstance(result, Abort):
            self._abort(result)
        else:
            self.status = Status.OK

    def on_round_end(self, server_abort: AbortReason | None) -> None:
        if self.status is Status.CLAIMED:
            if server_abort is not None:
                self._abort(Abort(server_abort, "announced by server"))
            else:
                self.status = Status.NOT_SELECTED
        elif self.status is Status.SIGNED:
            self._abort(Abort(AbortReason.TIMEOUT, "no signature bundle"))


class ColludingClient(HonestClient):
    """Server-controlled: claims only genuine VRF outputs (it cannot forge
    other keys), ignores the n_min check and signs whatever it is sent."""

    honest = False

    def on_announcement(self, ann: RoundAnnouncement) -> ParticipationClaim | None:
        if self.status is not Status.IDLE:
            return None
        data = encode_round(ann.r)
        if self.keys.vrf_beta(data) >= self.config.threshold(max(ann.n, 1)):
            self.status = Status.DECLINED
            return None
        ev = self.keys.vrf_eval(data)
        self.claim = ParticipationClaim(self.client_id, ev.beta, ev.proof)
        self.status = Status.CLAIMED
        return self.claim

    def on_participant_set(self, P: ParticipantSet) -> SignatureMessage | None:
        self.received = P
        self.status = Status.SIGNED
        return SignatureMessage(self.client_id, client_sign_outcome(self.keys, P.round_r, P))

    def on_bundle(self, bundle: SignatureBundle | None) -> None:
        if self.status is Status.SIGNED:
            self.status = Status.OK
