from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .._util import as_fraction
from ..primitives import M


class Variant(enum.Enum):
    CLIENT_CENTRIC = "client-centric"
    SERVER_CENTRIC = "server-centric"

    @classmethod
    def parse(cls, value: "Variant | str") -> "Variant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower().replace("_", "-"))
        except ValueError:
            raise ValueError(f"unknown variant {value!r}") from None


@dataclass(frozen=True)
class ProtocolConfig:
    """Public parameters of one selection round."""

    s: int
    alpha: Fraction
    n_min: int
    timeout_l: int = 0
    variant: Variant = Variant.CLIENT_CENTRIC
    round_r: int = 0
    m: int = field(default=M)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if self.s < 1:
            raise ValueError("s must be at least 1")
        if self.alpha < 1:
            raise ValueError("alpha must be at least 1")
        if self.n_min < self.s:
            raise ValueError("n_min must be at least s")
        if self.alpha * self.s > self.n_min:
            raise ValueError("alpha*s must not exceed n_min (threshold would saturate)")
        if self.timeout_l < 0 or self.round_r < 0:
            raise ValueError("timeout_l and round_r must be non-negative")
        if self.round_r >= 2**64:
            raise ValueError("round index must fit in 8 bytes")

    @property
    def client_centric(self) -> bool:
        return self.variant is Variant.CLIENT_CENTRIC

    def threshold(self, n: int) -> int:
        return eligibility_threshold(self.s, n, self.alpha, self.m)

    def for_round(self, r: int) -> "ProtocolConfig":
        return replace(self, round_r=r)


def eligibility_threshold(s: int, n: int, alpha, m: int = M) -> int:
    """T = floor(alpha*s*m/n); a client is eligible iff its beta < T."""
    if n <= 0:
        raise ValueError("population size must be positive")
    return math.floor(as_fraction(alpha) * s * m / n)


def encode_round(r: int) -> bytes:
    return r.to_bytes(8, "big")
