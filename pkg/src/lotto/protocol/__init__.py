"""The selection protocol: setup, Stages 0-3, both randomness variants."""

from .client import (
    ClientVerdict,
    ColludingClient,
    Decline,
    HonestClient,
    Status,
    client_consistency_check,
    client_self_sample,
    client_sign_outcome,
    client_verify_outcome,
    own_record,
)
from .config import ProtocolConfig, Variant, eligibility_threshold, encode_round
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
from .registry import ClientKeys, Registry, RegistryEntry, RegistryError, derive_client_keys
from .round import Message, Population, RoundContext, RoundTranscript, derive_seed, run_full_round
from .server import (
    CandidateSet,
    HonestServer,
    ServerBehavior,
    TimedClaim,
    server_centric_sample,
    server_collect_candidates,
    server_finalize,
    uniform_subset,
)

__all__ = [name for name in dir() if not name.startswith("_")]
