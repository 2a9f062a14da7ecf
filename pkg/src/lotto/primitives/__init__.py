"""VRF, PRF and signature wrappers producing integers in ``[0, M)``.

Instantiations: ECVRF-EDWARDS25519-SHA512-ELL2 for the VRF, HMAC-SHA-256 for
the PRF and Ed25519 for signatures. Randomness values are the first 32 bytes
of the underlying hash output read big-endian, so with ``M = 2**256`` the
conversion is exact.
"""

from __future__ import annotations

import hashlib
import hmac
import os
from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from . import ecvrf
from ._group import GROUP

M = 2**256
KEY_LEN = 32
PROOF_LEN = ecvrf.PROOF_LEN
SIG_LEN = 64
BETA_LEN = 32

__all__ = [
    "BETA_LEN",
    "GROUP",
    "KEY_LEN",
    "M",
    "PROOF_LEN",
    "PrfKey",
    "SIG_LEN",
    "SigKeyPair",
    "VrfEvaluation",
    "VrfKeyPair",
    "beta_from_hash",
    "prf_eval",
    "sig_keygen",
    "sig_sign",
    "sig_verify",
    "vrf_eval",
    "vrf_keygen",
    "vrf_output",
    "vrf_verify",
]


def beta_from_hash(digest: bytes) -> int:
    return int.from_bytes(digest[:BETA_LEN], "big")


@dataclass(frozen=True)
class VrfKeyPair:
    public_key: bytes
    secret_key: bytes = field(repr=False)


@dataclass(frozen=True)
class VrfEvaluation:
    beta: int
    proof: bytes

    def __post_init__(self) -> None:
        if not 0 <= self.beta < M:
            raise ValueError("beta out of range")
        if len(self.proof) != PROOF_LEN:
            raise ValueError(f"proof must be {PROOF_LEN} bytes")


@dataclass(frozen=True)
class SigKeyPair:
    public_key: bytes
    secret_key: Ed25519PrivateKey = field(repr=False)


@dataclass(frozen=True)
class PrfKey:
    key_bytes: bytes

    def __post_init__(self) -> None:
        if not self.key_bytes:
            raise ValueError("PRF key must be non-empty")


def _seed(seed: bytes | None) -> bytes:
    if seed is None:
        return os.urandom(KEY_LEN)
    if len(seed) != KEY_LEN:
        raise ValueError(f"seed must be {KEY_LEN} bytes, got {len(seed)}")
    return bytes(seed)


def vrf_keygen(seed: bytes | None = None) -> VrfKeyPair:
    """Derive a VRF key pair; ``seed=None`` draws fresh OS entropy."""
    sk = _seed(seed)
    return VrfKeyPair(public_key=ecvrf.public_key(sk), secret_key=sk)


def vrf_eval(secret_key: bytes, data: bytes) -> VrfEvaluation:
    if len(secret_key) != KEY_LEN:
        raise ValueError("malformed VRF secret key")
    proof = ecvrf.prove(secret_key, data)
    return VrfEvaluation(beta=beta_from_hash(ecvrf.proof_to_hash(proof)), proof=proof)


def vrf_output(secret_key: bytes, data: bytes, public_key: bytes | None = None) -> int:
    """The VRF value alone; same ``beta`` as :func:`vrf_eval`, no proof.

    ``public_key`` must be the key derived from ``secret_key``; passing it
    skips one base-point multiplication.
    """
    if len(secret_key) != KEY_LEN:
        raise ValueError("malformed VRF secret key")
    return beta_from_hash(ecvrf.hash_output(secret_key, data, public_key))


def vrf_verify(public_key: bytes, data: bytes, beta: int, proof: bytes) -> bool:
    """Never raises: malformed input of any kind is a rejection."""
    try:
        if not isinstance(beta, int) or not 0 <= beta < M:
            return False
        out = ecvrf.verify(bytes(public_key), bytes(data), bytes(proof))
    except (TypeError, ValueError):
        return False
    return out is not None and beta_from_hash(out) == beta


def prf_eval(key: PrfKey | bytes, data: bytes) -> int:
    key_bytes = key.key_bytes if isinstance(key, PrfKey) else PrfKey(key).key_bytes
    return int.from_bytes(hmac.new(key_bytes, data, hashlib.sha256).digest(), "big")


def sig_keygen(seed: bytes | None = None) -> SigKeyPair:
    sk = Ed25519PrivateKey.from_private_bytes(_seed(seed))
    return SigKeyPair(public_key=sk.public_key().public_bytes_raw(), secret_key=sk)


def sig_sign(secret_key: Ed25519PrivateKey, message: bytes) -> bytes:
    return secret_key.sign(message)


def sig_verify(public_key: bytes, message: bytes, signature: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(bytes(public_key)).verify(
            bytes(signature), bytes(message)
        )
    except (InvalidSignature, ValueError, TypeError):
        return False
    return True
