"""Pure-Python edwards25519 group arithmetic.

Points are kept in extended twisted Edwards coordinates ``(X, Y, Z, T)`` with
``x = X/Z``, ``y = Y/Z`` and ``x*y = T/Z``. This module is the reference
fallback; the libsodium-backed group in :mod:`lotto.primitives._group` is
preferred when available.
"""

from __future__ import annotations

import os

P = 2**255 - 19
L = 2**252 + 27742317777372353535851937790883648493
D = (-121665 * pow(121666, P - 2, P)) % P
D2 = (2 * D) % P
SQRT_M1 = pow(2, (P - 1) // 4, P)
COFACTOR = 8

Point = tuple  # (X, Y, Z, T)


class DecodeError(ValueError):
    pass


def _builtin_powmod(a: int, e: int) -> int:
    return pow(a, e, P)


powmod = _builtin_powmod
if not os.environ.get("LOTTO_PURE_PYTHON"):
    try:
        import gmpy2

        _MP = gmpy2.mpz(P)

        def powmod(a: int, e: int) -> int:
            return int(gmpy2.powmod(a, e, _MP))

    except ImportError:
        pass


def inv(a: int) -> int:
    return powmod(a, P - 2)


def is_square(a: int) -> bool:
    a %= P
    return a == 0 or powmod(a, (P - 1) // 2) == 1


def sqrt(a: int) -> int | None:
    """Square root mod p (p = 5 mod 8); ``None`` for non-residues."""
    a %= P
    r = powmod(a, (P + 3) // 8)
    if (r * r - a) % P == 0:
        return r
    r = r * SQRT_M1 % P
    if (r * r - a) % P == 0:
        return r
    return None


def sgn0(a: int) -> int:
    return a % P % 2


IDENTITY: Point = (0, 1, 1, 0)


def from_affine(x: int, y: int) -> Point:
    return (x % P, y % P, 1, x * y % P)


def to_affine(pt: Point) -> tuple[int, int]:
    X, Y, Z, _ = pt
    zi = inv(Z)
    return X * zi % P, Y * zi % P


def add(p1: Point, p2: Point) -> Point:
    X1, Y1, Z1, T1 = p1
    X2, Y2, Z2, T2 = p2
    a = (Y1 - X1) * (Y2 - X2) % P
    b = (Y1 + X1) * (Y2 + X2) % P
    c = T1 * D2 * T2 % P
    d = Z1 * 2 * Z2 % P
    e, f, g, h = b - a, d - c, d + c, b + a
    return (e * f % P, g * h % P, f * g % P, e * h % P)


def double(pt: Point) -> Point:
    X1, Y1, Z1, _ = pt
    a = X1 * X1 % P
    b = Y1 * Y1 % P
    c = 2 * Z1 * Z1 % P
    h = a + b
    e = h - (X1 + Y1) ** 2
    g = a - b
    f = c + g
    return (e * f % P, g * h % P, f * g % P, e * h % P)


def neg(pt: Point) -> Point:
    X, Y, Z, T = pt
    return (-X % P, Y, Z, -T % P)


def mult(k: int, pt: Point) -> Point:
    if k < 0:
        return mult(-k, neg(pt))
    # 4-bit fixed window
    table = [IDENTITY, pt]
    for _ in range(14):
        table.append(add(table[-1], pt))
    acc = IDENTITY
    for shift in range((k.bit_length() + 3) // 4 * 4 - 4, -1, -4):
        acc = double(double(double(double(acc))))
        acc = add(acc, table[(k >> shift) & 0xF])
    return acc


def equal(p1: Point, p2: Point) -> bool:
    X1, Y1, Z1, _ = p1
    X2, Y2, Z2, _ = p2
    return (X1 * Z2 - X2 * Z1) % P == 0 and (Y1 * Z2 - Y2 * Z1) % P == 0


def is_identity(pt: Point) -> bool:
    return equal(pt, IDENTITY)


def encode(pt: Point) -> bytes:
    x, y = to_affine(pt)
    return (y | ((x & 1) << 255)).to_bytes(32, "little")


def decode(s: bytes) -> Point:
    """RFC 8032 point decoding; rejects non-canonical y and off-curve input."""
    if len(s) != 32:
        raise DecodeError("point encoding must be 32 bytes")
    n = int.from_bytes(s, "little")
    sign = n >> 255
    y = n & ((1 << 255) - 1)
    if y >= P:
        raise DecodeError("non-canonical y coordinate")
    u = (y * y - 1) % P
    v = (D * y * y + 1) % P
    x2 = u * inv(v) % P
    x = sqrt(x2)
    if x is None:
        raise DecodeError("not on curve")
    if x == 0 and sign:
        raise DecodeError("invalid sign for x = 0")
    if x & 1 != sign:
        x = P - x
    return from_affine(x, y)


_BY = 4 * inv(5) % P
_BX = sqrt((_BY * _BY - 1) * inv(D * _BY * _BY + 1))
if _BX & 1:
    _BX = P - _BX
BASE: Point = from_affine(_BX, _BY)
BASE_BYTES = encode(BASE)
IDENTITY_BYTES = encode(IDENTITY)
