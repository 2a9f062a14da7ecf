"""ECVRF-EDWARDS25519-SHA512-ELL2 (RFC 9381, suite 0x04).

Byte-level operations only: keys, proofs and outputs are ``bytes``. The
semantic wrappers live in :mod:`lotto.primitives`.
"""

from __future__ import annotations

import hashlib

from . import edwards as ed
from ._group import GROUP

SUITE = b"\x04"
H2C_DST = b"ECVRF_edwards25519_XMD:SHA-512_ELL2_NU_" + SUITE
PROOF_LEN = 80
C_LEN = 16
Q_LEN = 32

_J = 486662
_Z = 2
# sqrt(-486664) with sgn0 = 0, for the curve25519 -> edwards25519 map
_C1 = ed.sqrt(-486664 % ed.P)
if ed.sgn0(_C1):
    _C1 = ed.P - _C1


def _sha512(*parts: bytes) -> bytes:
    h = hashlib.sha512()
    for part in parts:
        h.update(part)
    return h.digest()


def secret_scalar(sk: bytes) -> int:
    h = _sha512(sk)
    x = bytearray(h[:32])
    x[0] &= 248
    x[31] &= 127
    x[31] |= 64
    return int.from_bytes(x, "little")


def public_key(sk: bytes) -> bytes:
    if len(sk) != 32:
        raise ValueError("ECVRF secret key must be 32 bytes")
    return GROUP.base_mult(secret_scalar(sk))


def expand_message_xmd(msg: bytes, dst: bytes, length: int) -> bytes:
    b_len, r_len = 64, 128
    ell = -(-length // b_len)
    if ell > 255 or len(dst) > 255:
        raise ValueError("expand_message_xmd length out of range")
    dst_prime = dst + bytes([len(dst)])
    b0 = _sha512(bytes(r_len), msg, length.to_bytes(2, "big"), b"\x00", dst_prime)
    out = [_sha512(b0, b"\x01", dst_prime)]
    for i in range(2, ell + 1):
        prev = bytes(a ^ b for a, b in zip(b0, out[-1]))
        out.append(_sha512(prev, bytes([i]), dst_prime))
    return b"".join(out)[:length]


def _sqrt_ratio(u: int, v: int) -> int | None:
    """sqrt(u/v) with a single exponentiation; ``None`` if not a square."""
    p = ed.P
    v3 = v * v % p * v % p
    r = u * v3 % p * ed.powmod(u * v3 % p * v3 % p * v % p, (p - 5) // 8) % p
    check = v * r % p * r % p
    if check == u % p:
        return r
    if check == -u % p:
        return r * ed.SQRT_M1 % p
    return None


def _elligator2_edwards(u: int) -> ed.Point:
    """Elligator 2 onto curve25519, then the rational map to edwards25519.

    Returns projective ``(X, Y, Z, 0)``; the caller multiplies by the cofactor
    before the single inversion needed for encoding. ``T`` is left at zero
    because doubling does not read it.
    """
    p = ed.P
    den = (1 + _Z * u * u) % p
    num = -_J % p
    if den == 0:
        den = 1
    # g(x) for x = num/den, scaled by den**4 so only the ratio matters
    g_num = num * (num * num + _J * num * den + den * den) % p
    g_den = den * den % p * den % p
    y = _sqrt_ratio(g_num, g_den)
    if y is not None:
        if ed.sgn0(y) != 1:
            y = p - y
    else:
        num = (-num - _J * den) % p
        g_num = num * (num * num + _J * num * den + den * den) % p
        y = _sqrt_ratio(g_num, g_den)
        if ed.sgn0(y) != 0:
            y = p - y
    if y == 0 or (num + den) % p == 0:
        return ed.IDENTITY
    # v = c1 * s / t,  w = (s - 1) / (s + 1)  with s = num/den, t = y,
    # over the common denominator den * y * (num + den)
    X = _C1 * num % p * (num + den) % p
    Y = (num - den) * den % p * y % p
    Z = den * y % p * (num + den) % p
    return (X, Y, Z, 0)


def encode_to_curve(pk: bytes, alpha: bytes) -> bytes:
    uniform = expand_message_xmd(pk + alpha, H2C_DST, 48)
    u = int.from_bytes(uniform, "big") % ed.P
    pt = _elligator2_edwards(u)
    return ed.encode(ed.double(ed.double(ed.double(pt))))


def _nonce(sk: bytes, h: bytes) -> int:
    return int.from_bytes(_sha512(_sha512(sk)[32:], h), "little") % ed.L


def _challenge(*points: bytes) -> int:
    digest = _sha512(SUITE, b"\x02", *points, b"\x00")
    return int.from_bytes(digest[:C_LEN], "little")


def prove(sk: bytes, alpha: bytes) -> bytes:
    x = secret_scalar(sk)
    y = GROUP.base_mult(x)
    h = encode_to_curve(y, alpha)
    gamma = GROUP.mult(x, h)
    k = _nonce(sk, h)
    u = GROUP.base_mult(k)
    v = GROUP.mult(k, h)
    c = _challenge(y, h, gamma, u, v)
    s = (k + c * x) % ed.L
    return gamma + c.to_bytes(C_LEN, "little") + s.to_bytes(Q_LEN, "little")


def _gamma_to_hash(gamma: bytes) -> bytes:
    return _sha512(SUITE, b"\x03", GROUP.clear_cofactor(gamma), b"\x00")


def hash_output(sk: bytes, alpha: bytes, pk: bytes | None = None) -> bytes:
    """The 64-byte VRF output, skipping proof construction.

    H is in the prime-order subgroup, so 8*Gamma = (8x mod L)*H and the
    cofactor clearing folds into the one scalar multiplication.
    """
    x = secret_scalar(sk)
    y = GROUP.base_mult(x) if pk is None else pk
    h = encode_to_curve(y, alpha)
    return _sha512(SUITE, b"\x03", GROUP.mult(ed.COFACTOR * x % ed.L, h), b"\x00")


def proof_to_hash(pi: bytes) -> bytes:
    if len(pi) != PROOF_LEN:
        raise ValueError("proof must be 80 bytes")
    if not GROUP.decodes(pi[:32]):
        raise ValueError("proof does not encode a curve point")
    return _gamma_to_hash(pi[:32])


def verify(pk: bytes, alpha: bytes, pi: bytes) -> bytes | None:
    """Return the 64-byte output for a valid proof, else ``None``."""
    if len(pk) != 32 or len(pi) != PROOF_LEN:
        return None
    if not GROUP.is_valid_key(pk) or not GROUP.decodes(pi[:32]):
        return None
    gamma = pi[:32]
    c = int.from_bytes(pi[32:48], "little")
    s = int.from_bytes(pi[48:80], "little")
    if s >= ed.L:
        return None
    h = encode_to_curve(pk, alpha)
    u = GROUP.sub(GROUP.base_mult(s), GROUP.mult(c, pk))
    v = GROUP.sub(GROUP.mult(s, h), GROUP.mult(c, gamma))
    if _challenge(pk, h, gamma, u, v) != c:
        return None
    return _gamma_to_hash(gamma)
