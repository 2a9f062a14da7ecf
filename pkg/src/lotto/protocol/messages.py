"""Protocol messages and their byte encodings.

All integers are big-endian. Wire sizes:

=================  =========================================
announcement       r(8) n(8)                         16 bytes
claim              id(8) beta(32) proof(80)          120 bytes
participant set    canonical_encode(r, P) n(8)
signature          id(8) sigma(64)                   72 bytes
bundle             count(8) then id(8) sigma(64) each
=================  =========================================
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from ..primitives import BETA_LEN, PROOF_LEN, SIG_LEN


class AbortReason(enum.Enum):
    POPULATION_TOO_SMALL = "PopulationTooSmall"
    NOT_ENOUGH_CANDIDATES = "NotEnoughCandidates"
    SELF_MISSING = "SelfMissing"
    WRONG_SET_SIZE = "WrongSetSize"
    BAD_RANDOMNESS = "BadRandomness"
    BAD_VRF_PROOF = "BadVrfProof"
    BAD_PRF_RECOMPUTE = "BadPrfRecompute"
    SIGNATURE_INVALID = "SignatureInvalid"
    INCONSISTENT_SETS = "InconsistentSets"
    TIMEOUT = "Timeout"


@dataclass(frozen=True)
class Abort:
    reason: AbortReason
    detail: str = ""

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Ok:
    def __bool__(self) -> bool:
        return True


OK = Ok()


@dataclass(frozen=True)
class RoundAnnouncement:
    r: int
    n: int

    def encode(self) -> bytes:
        return self.r.to_bytes(8, "big") + self.n.to_bytes(8, "big")


@dataclass(frozen=True)
class ParticipationClaim:
    client_id: int
    beta: int
    proof: bytes | None = None

    def encode(self) -> bytes:
        return (
            self.client_id.to_bytes(8, "big")
            + self.beta.to_bytes(BETA_LEN, "big")
            + (self.proof or b"")
        )


@dataclass(frozen=True)
class ParticipantRecord:
    client_id: int
    pk_reg: bytes
    beta: int
    proof: bytes | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.client_id < 2**64:
            raise ValueError("client id must fit in 8 bytes")
        if len(self.pk_reg) != 32:
            raise ValueError("pk_reg must be 32 bytes")
        if not 0 <= self.beta < 2 ** (8 * BETA_LEN):
            raise ValueError("beta out of range")
        if self.proof is not None and len(self.proof) != PROOF_LEN:
            raise ValueError(f"proof must be {PROOF_LEN} bytes")

    def encode(self, with_proof: bool) -> bytes:
        out = self.client_id.to_bytes(8, "big") + self.pk_reg + self.beta.to_bytes(BETA_LEN, "big")
        if with_proof:
            if self.proof is None:
                raise ValueError(f"record {self.client_id} lacks a proof")
            out += self.proof
        return out


def _sorted_records(records: Iterable[ParticipantRecord]) -> tuple[ParticipantRecord, ...]:
    out = tuple(sorted(records, key=lambda rec: rec.client_id))
    for a, b in zip(out, out[1:]):
        if a.client_id == b.client_id:
            raise ValueError(f"duplicate client id {a.client_id}")
    return out


@dataclass(frozen=True)
class ParticipantSet:
    """Selection outcome P for one round, records sorted by client id."""

    round_r: int
    records: tuple[ParticipantRecord, ...]
    announced_n: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", _sorted_records(self.records))

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(rec.client_id for rec in self.records)

    def __len__(self) -> int:
        return len(self.records)

    def record(self, client_id: int) -> ParticipantRecord | None:
        for rec in self.records:
            if rec.client_id == client_id:
                return rec
        return None

    @property
    def with_proofs(self) -> bool:
        return _with_proofs(self.records)

    def canonical(self) -> bytes:
        return canonical_encode(self.round_r, self)

    def encode(self) -> bytes:
        return self.canonical() + self.announced_n.to_bytes(8, "big")


def _with_proofs(records: tuple[ParticipantRecord, ...]) -> bool:
    flags = {rec.proof is not None for rec in records}
    if len(flags) > 1:
        raise ValueError("records mix proof-carrying and proof-less entries")
    return flags == {True}


def canonical_encode(round_r: int, P: ParticipantSet | Iterable[ParticipantRecord]) -> bytes:
    """Injective encoding of (r, P): r, count, then each record in id order.

    Records carry their 80-byte proof exactly when they have one (client-
    centric); a set mixing both kinds is rejected.
    """
    records = P.records if isinstance(P, ParticipantSet) else _sorted_records(P)
    with_proof = _with_proofs(records)
    parts = [round_r.to_bytes(8, "big"), len(records).to_bytes(8, "big")]
    parts.extend(rec.encode(with_proof) for rec in records)
    return b"".join(parts)


@dataclass(frozen=True)
class SignatureMessage:
    client_id: int
    signature: bytes

    def encode(self) -> bytes:
        return self.client_id.to_bytes(8, "big") + self.signature


@dataclass(frozen=True)
class SignatureBundle:
    signatures: tuple[SignatureMessage, ...]

    @property
    def ids(self) -> frozenset[int]:
        return frozenset(sig.client_id for sig in self.signatures)

    def encode(self) -> bytes:
        return len(self.signatures).to_bytes(8, "big") + b"".join(
            sig.encode() for sig in self.signatures
        )


ANNOUNCEMENT_LEN = 16
CLAIM_LEN = 8 + BETA_LEN + PROOF_LEN
SIGNATURE_MSG_LEN = 8 + SIG_LEN
