import hashlib
import hmac

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lotto import primitives as prim
from lotto.primitives import ecvrf

# ECVRF-EDWARDS25519-SHA512-ELL2 vectors. The first proof is the 80-byte
# standard form; the other two are published in the batch-compatible layout
# Gamma || U || V || s, from which the 16-byte challenge is recomputed.
STANDARD = dict(
    sk="9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60",
    pk="d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a",
    alpha="",
    pi="7d9c633ffeee27349264cf5c667579fc583b4bda63ab71d001f89c10003ab46f"
    "14adf9a3cd8b8412d9038531e865c341"
    "cafa73589b023d14311c331a9ad15ff2fb37831e00f0acaa6d73bc9997b06501",
    beta="9d574bf9b8302ec0fc1e21c3ec5368269527b87b462ce36dab2d14ccf80c53cc"
    "cf6758f058c5b1c856b116388152bbe509ee3b9ecfe63d93c3b4346c1fbc6c54",
)

BATCH = [
    dict(
        sk="4ccd089b28ff96da9db6c346ec114e0f5b8a319f35aba624da8cf6ed4fb8a6fb",
        pk="3d4017c3e843895a92b70aa74d1b7ebc9c982ccf2ec4968cc0cd55f12af4660c",
        alpha="72",
        pi="47b327393ff2dd81336f8a2ef10339112401253b3c714eeda879f12c509072ef"
        "8ec26e77b8cb3114dd2265fe1564a4efb40d109aa3312536d93dfe3d8d80a061"
        "fe799eb5770b4e3a5a27d22518bb631db183c8316bb552155f442c62a47d1c8b"
        "d60e93908f93df1623ad78a86a028d6bc064dbfc75a6a57379ef855dc6733801",
        beta="38561d6b77b71d30eb97a062168ae12b667ce5c28caccdf76bc88e093e463598"
        "7cd96814ce55b4689b3dd2947f80e59aac7b7675f8083865b46c89b2ce9cc735",
    ),
    dict(
        sk="c5aa8df43f9f837bedb7442f31dcb7b166d38535076f094b85ce3a2e0b4458f7",
        pk="fc51cd8e6218a1a38da47ed00230f0580816ed13ba3303ac5deb911548908025",
        alpha="af82",
        pi="926e895d308f5e328e7aa159c06eddbe56d06846abf5d98c2512235eaa57fdce"
        "a012f35433df219a88ab0f9481f4e0065d00422c3285f3d34a8b0202f20bac60"
        "fb613986d171b3e98319c7ca4dc44c5dd8314a6e5616c1a4f16ce72bd7a0c25a"
        "374e7ef73027e14760d42e77341fe05467bb286cc2c9d7fde29120a0b2320d04",
        beta="121b7f9b9aaaa29099fc04a94ba52784d44eac976dd1a3cca458733be5cd090a"
        "7b5fbd148444f17f8daf1fb55cb04b1ae85a626e30a54b4b0f8abf4a43314a58",
    ),
]


def _check(vec, expected_pi):
    sk, pk, alpha = (bytes.fromhex(vec[k]) for k in ("sk", "pk", "alpha"))
    assert ecvrf.public_key(sk) == pk
    pi = ecvrf.prove(sk, alpha)
    assert pi == expected_pi
    assert ecvrf.proof_to_hash(pi).hex() == vec["beta"]
    assert ecvrf.verify(pk, alpha, pi).hex() == vec["beta"]
    assert ecvrf.hash_output(sk, alpha).hex() == vec["beta"]
    assert ecvrf.hash_output(sk, alpha, pk).hex() == vec["beta"]


def test_vrf_standard_vector(vrf_backend):
    _check(STANDARD, bytes.fromhex(STANDARD["pi"]))


@pytest.mark.parametrize("vec", BATCH, ids=["alpha-72", "alpha-af82"])
def test_vrf_batch_vectors(vrf_backend, vec):
    raw = bytes.fromhex(vec["pi"])
    gamma, u, v, s = raw[:32], raw[32:64], raw[64:96], raw[96:]
    pk = bytes.fromhex(vec["pk"])
    h = ecvrf.encode_to_curve(pk, bytes.fromhex(vec["alpha"]))
    c = ecvrf._challenge(pk, h, gamma, u, v)
    _check(vec, gamma + c.to_bytes(16, "little") + s)


def test_beta_is_first_32_bytes_big_endian():
    ev = prim.vrf_eval(bytes.fromhex(STANDARD["sk"]), b"")
    assert ev.beta == int(STANDARD["beta"][:64], 16)
    assert 0 <= ev.beta < prim.M


def test_vrf_output_matches_eval():
    kp = prim.vrf_keygen(bytes(range(32)))
    for r in range(4):
        data = r.to_bytes(8, "big")
        ev = prim.vrf_eval(kp.secret_key, data)
        assert prim.vrf_output(kp.secret_key, data) == ev.beta
        assert prim.vrf_output(kp.secret_key, data, kp.public_key) == ev.beta
        assert prim.vrf_verify(kp.public_key, data, ev.beta, ev.proof)


def test_vrf_verify_rejects_tampering():
    kp = prim.vrf_keygen(bytes(32))
    other = prim.vrf_keygen(bytes([1]) * 32)
    ev = prim.vrf_eval(kp.secret_key, b"r1")
    assert not prim.vrf_verify(kp.public_key, b"r2", ev.beta, ev.proof)
    assert not prim.vrf_verify(other.public_key, b"r1", ev.beta, ev.proof)
    assert not prim.vrf_verify(kp.public_key, b"r1", (ev.beta + 1) % prim.M, ev.proof)
    for i in (0, 40, 79):
        bad = bytearray(ev.proof)
        bad[i] ^= 1
        assert not prim.vrf_verify(kp.public_key, b"r1", ev.beta, bytes(bad))


@pytest.mark.parametrize(
    "pk, beta, proof",
    [
        (b"", 0, bytes(80)),
        (bytes(32), 0, bytes(80)),
        (b"\xff" * 32, 0, bytes(80)),
        (bytes.fromhex(STANDARD["pk"]), -1, bytes(80)),
        (bytes.fromhex(STANDARD["pk"]), prim.M, bytes(80)),
        (bytes.fromhex(STANDARD["pk"]), 0, bytes(79)),
        (bytes.fromhex(STANDARD["pk"]), "x", bytes(80)),
        (bytes.fromhex(STANDARD["pk"]), 0, b"\xff" * 80),
    ],
)
def test_vrf_verify_never_raises(pk, beta, proof):
    assert prim.vrf_verify(pk, b"", beta, proof) is False


@settings(max_examples=25, deadline=None)
@given(st.binary(min_size=80, max_size=80), st.integers(0, prim.M - 1))
def test_random_proofs_rejected(proof, beta):
    assert not prim.vrf_verify(bytes.fromhex(STANDARD["pk"]), b"round", beta, proof)


def test_keygen_seed_validation():
    with pytest.raises(ValueError):
        prim.vrf_keygen(b"short")
    with pytest.raises(ValueError):
        prim.vrf_eval(b"short", b"")
    a, b = prim.vrf_keygen(), prim.vrf_keygen()
    assert a.public_key != b.public_key
    assert "secret_key" not in repr(a) or repr(a.secret_key) not in repr(a)


def test_evaluation_validation():
    with pytest.raises(ValueError):
        prim.VrfEvaluation(prim.M, bytes(80))
    with pytest.raises(ValueError):
        prim.VrfEvaluation(0, bytes(10))


# HMAC-SHA-256 vectors (RFC 4231 cases 1 and 2)
@pytest.mark.parametrize(
    "key, data, mac",
    [
        (b"\x0b" * 20, b"Hi There", "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7"),
        (b"Jefe", b"what do ya want for nothing?", "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843"),
    ],
)
def test_prf_hmac_vectors(key, data, mac):
    assert prim.prf_eval(key, data) == int(mac, 16)
    assert prim.prf_eval(prim.PrfKey(key), data) == int(mac, 16)


def test_prf_key_must_be_nonempty():
    with pytest.raises(ValueError):
        prim.PrfKey(b"")
    with pytest.raises(ValueError):
        prim.prf_eval(b"", b"x")


@given(st.binary(min_size=1, max_size=64), st.binary(max_size=64))
def test_prf_range_and_determinism(key, data):
    v = prim.prf_eval(key, data)
    assert 0 <= v < prim.M
    assert v == int.from_bytes(hmac.new(key, data, hashlib.sha256).digest(), "big")


# Ed25519 vectors (RFC 8032 tests 1 and 2)
@pytest.mark.parametrize(
    "sk, pk, msg, sig",
    [
        (
            "9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60",
            "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a",
            "",
            "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b",
        ),
        (
            "4ccd089b28ff96da9db6c346ec114e0f5b8a319f35aba624da8cf6ed4fb8a6fb",
            "3d4017c3e843895a92b70aa74d1b7ebc9c982ccf2ec4968cc0cd55f12af4660c",
            "72",
            "92a009a9f0d4cab8720e820b5f642540a2b27b5416503f8fb3762223ebdb69da085ac1e43e15996e458f3613d0f11d8c387b2eaeb4302aeeb00d291612bb0c00",
        ),
    ],
)
def test_signature_vectors(sk, pk, msg, sig):
    kp = prim.sig_keygen(bytes.fromhex(sk))
    assert kp.public_key.hex() == pk
    assert prim.sig_sign(kp.secret_key, bytes.fromhex(msg)).hex() == sig
    assert prim.sig_verify(kp.public_key, bytes.fromhex(msg), bytes.fromhex(sig))


def test_sig_verify_never_raises():
    kp = prim.sig_keygen(bytes(32))
    sig = prim.sig_sign(kp.secret_key, b"m")
    assert prim.sig_verify(kp.public_key, b"m", sig)
    assert not prim.sig_verify(kp.public_key, b"n", sig)
    assert not prim.sig_verify(b"short", b"m", sig)
    assert not prim.sig_verify(kp.public_key, b"m", sig[:10])
    assert not prim.sig_verify(kp.public_key, b"m", None)


def test_backends_agree_on_random_keys(monkeypatch):
    from lotto.primitives import _group

    kp = prim.vrf_keygen(bytes([7]) * 32)
    ev = prim.vrf_eval(kp.secret_key, b"abc")
    monkeypatch.setattr(ecvrf, "GROUP", _group.PureGroup())
    assert prim.vrf_eval(kp.secret_key, b"abc") == ev
    assert prim.vrf_verify(kp.public_key, b"abc", ev.beta, ev.proof)
