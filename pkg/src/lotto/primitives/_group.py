"""Group operations on encoded edwards25519 points, selected at import.

libsodium (through PyNaCl) handles scalar multiplication when it is installed
and ``LOTTO_PURE_PYTHON`` is unset. libsodium refuses points outside the
prime-order subgroup and identity results; those calls fall through to the
pure-Python arithmetic so both backends agree on every input.
"""

from __future__ import annotations

import os

from . import edwards as ed


class PureGroup:
    name = "pure"

    def base_mult(self, k: int) -> bytes:
        return ed.encode(ed.mult(k % ed.L, ed.BASE))

    def mult(self, k: int, point: bytes) -> bytes:
        return ed.encode(ed.mult(k, ed.decode(point)))

    def add(self, a: bytes, b: bytes) -> bytes:
        return ed.encode(ed.add(ed.decode(a), ed.decode(b)))

    def sub(self, a: bytes, b: bytes) -> bytes:
        return ed.encode(ed.add(ed.decode(a), ed.neg(ed.decode(b))))

    def clear_cofactor(self, point: bytes) -> bytes:
        return ed.encode(ed.mult(ed.COFACTOR, ed.decode(point)))

    def decodes(self, point: bytes) -> bool:
        try:
            ed.decode(point)
        except ed.DecodeError:
            return False
        return True

    def is_valid_key(self, point: bytes) -> bool:
        """Canonical curve point that is not of small order."""
        try:
            pt = ed.decode(point)
        except ed.DecodeError:
            return False
        return not ed.is_identity(ed.mult(ed.COFACTOR, pt))


class SodiumGroup(PureGroup):
    name = "libsodium"

    def __init__(self, bindings) -> None:
        self._b = bindings

    @staticmethod
    def _scalar(k: int) -> bytes:
        return (k % ed.L).to_bytes(32, "little")

    def base_mult(self, k: int) -> bytes:
        try:
            return self._b.crypto_scalarmult_ed25519_base_noclamp(self._scalar(k))
        except Exception:
            return super().base_mult(k)

    def mult(self, k: int, point: bytes) -> bytes:
        # reduction mod L is only valid on the prime-order subgroup, which is
        # exactly what libsodium accepts; anything else raises and falls back
        try:
            return self._b.crypto_scalarmult_ed25519_noclamp(self._scalar(k), point)
        except Exception:
            return super().mult(k, point)

    def add(self, a: bytes, b: bytes) -> bytes:
        try:
            return self._b.crypto_core_ed25519_add(a, b)
        except Exception:
            return super().add(a, b)

    def sub(self, a: bytes, b: bytes) -> bytes:
        try:
            return self._b.crypto_core_ed25519_sub(a, b)
        except Exception:
            return super().sub(a, b)

    def clear_cofactor(self, point: bytes) -> bytes:
        try:
            twice = self._b.crypto_core_ed25519_add(point, point)
            four = self._b.crypto_core_ed25519_add(twice, twice)
            return self._b.crypto_core_ed25519_add(four, four)
        except Exception:
            return super().clear_cofactor(point)

    # is_valid_point covers canonical, on-curve, prime-order subgroup; a
    # negative answer is re-checked with the looser pure-Python rule
    def decodes(self, point: bytes) -> bool:
        if len(point) == 32 and self._b.crypto_core_ed25519_is_valid_point(point):
            return True
        return super().decodes(point)

    def is_valid_key(self, point: bytes) -> bool:
        if len(point) == 32 and self._b.crypto_core_ed25519_is_valid_point(point):
            return True
        return super().is_valid_key(point)


def _select() -> PureGroup:
    if os.environ.get("LOTTO_PURE_PYTHON"):
        return PureGroup()
    try:
        import nacl.bindings as bindings
    except ImportError:
        return PureGroup()
    if not getattr(bindings, "has_crypto_scalarmult_ed25519", False):
        return PureGroup()
    return SodiumGroup(bindings)


GROUP = _select()
