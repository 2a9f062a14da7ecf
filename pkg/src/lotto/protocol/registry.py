"""Trusted key registry and client key material.

The registry stands in for the PKI: it is not mediated by the server, every
id is registered once, and entries are never modified.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterator

from .. import primitives as prim


@dataclass(frozen=True)
class RegistryEntry:
    client_id: int
    pk_reg: bytes
    pk_lotto: bytes


@dataclass
class ClientKeys:
    """A client's signing and VRF keys.

    ``beta_cache`` memoizes the client's own VRF value per input so the same
    client replayed under several server strategies evaluates once.
    """

    client_id: int
    sig: prim.SigKeyPair
    vrf: prim.VrfKeyPair
    beta_cache: dict[bytes, int] = field(default_factory=dict, repr=False)
    eval_cache: dict[bytes, prim.VrfEvaluation] = field(default_factory=dict, repr=False)

    @property
    def pk_reg(self) -> bytes:
        return self.sig.public_key

    @property
    def pk_lotto(self) -> bytes:
        return self.vrf.public_key

    def vrf_beta(self, data: bytes) -> int:
        beta = self.beta_cache.get(data)
        if beta is None:
            beta = prim.vrf_output(self.vrf.secret_key, data, self.vrf.public_key)
            self.beta_cache[data] = beta
        return beta

    def vrf_eval(self, data: bytes) -> prim.VrfEvaluation:
        ev = self.eval_cache.get(data)
        if ev is None:
            ev = prim.vrf_eval(self.vrf.secret_key, data)
            self.eval_cache[data] = ev
            self.beta_cache[data] = ev.beta
        return ev

    def sign(self, message: bytes) -> bytes:
        return prim.sig_sign(self.sig.secret_key, message)


def _seed(domain: bytes, population_seed: int, client_id: int) -> bytes:
    return hashlib.sha256(
        domain + population_seed.to_bytes(8, "big") + client_id.to_bytes(8, "big")
    ).digest()


def derive_client_keys(population_seed: int, client_id: int) -> ClientKeys:
    return ClientKeys(
        client_id=client_id,
        sig=prim.sig_keygen(_seed(b"lotto/sig/", population_seed, client_id)),
        vrf=prim.vrf_keygen(_seed(b"lotto/vrf/", population_seed, client_id)),
    )


class RegistryError(KeyError):
    pass


class Registry:
    def __init__(self) -> None:
        self._entries: dict[int, RegistryEntry] = {}
        self.log: list[RegistryEntry] = []

    def register(self, keys: ClientKeys) -> RegistryEntry:
        """Register through the client's own key material only."""
        if keys.client_id in self._entries:
            raise RegistryError(f"client {keys.client_id} already registered")
        if not 0 <= keys.client_id < 2**64:
            raise RegistryError("client id must fit in 8 bytes")
        entry = RegistryEntry(keys.client_id, keys.pk_reg, keys.pk_lotto)
        self._entries[keys.client_id] = entry
        self.log.append(entry)
        return entry

    def lookup(self, client_id: int) -> RegistryEntry:
        try:
            return self._entries[client_id]
        except KeyError:
            raise RegistryError(f"client {client_id} not registered") from None

    def get(self, client_id: int) -> RegistryEntry | None:
        return self._entries.get(client_id)

    def __contains__(self, client_id: int) -> bool:
        return client_id in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[RegistryEntry]:
        return iter(self.log)

    def ids(self) -> list[int]:
        return sorted(self._entries)
