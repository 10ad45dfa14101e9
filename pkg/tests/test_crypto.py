import hashlib
import math
import string
import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphererc.crypto import (
    CipherFormatError,
    CipherText,
    CryptoParams,
    EncryptionError,
    KeyStream,
    decrypt,
    derive_key_material,
    encrypt,
    mask,
)
from sphererc.encoding import Alphabet


def _oracle_bytes(password: bytes, n: int) -> bytes:
    base = hashlib.sha256(password).digest()
    out = b""
    i = 0
    while len(out) < n:
        out += hashlib.sha256(base + struct.pack("<Q", i)).digest()
        i += 1
    return out[:n]


def _oracle_key_symbols(password: bytes, N: int, M: int, T: int) -> list[int]:
    skip = 8 * N * M + 16 * math.ceil(N * N / 2)  # U uniforms, then Box-Muller pairs
    data = _oracle_bytes(password, skip + 4 * (T + 64))[skip:]
    limit = 2**32 - 2**32 % M
    out, pos = [], 0
    while len(out) < T:
        w = int.from_bytes(data[pos:pos + 4], "little")
        pos += 4
        if w < limit:
            out.append(w % M)
    return out


def test_keystream_matches_hashlib():
    ks = KeyStream(b"secret")
    got = ks.read(5) + ks.read(70) + ks.read(1)
    assert got == _oracle_bytes(b"secret", 76)


def test_keystream_uniform_53_bit():
    raw = _oracle_bytes(b"pw", 16)
    words = struct.unpack("<QQ", raw)
    expect = [(w >> 11) * 2.0**-53 for w in words]
    assert KeyStream(b"pw").uniform(2).tolist() == expect


def test_key_symbols_match_oracle():
    km = derive_key_material(b"password", 40, 6, 5)
    assert km.key_sequence.tolist() == _oracle_key_symbols(b"password", 6, 5, 40)


FROZEN_KEY = [26, 3, 6, 34, 33, 22, 37, 19]


def test_key_symbols_frozen_vector():
    # cross-implementation test vector (password "password", N=38, M=38, T=8)
    km = derive_key_material(b"password", 8, 38, 38)
    assert km.key_sequence.tolist() == _oracle_key_symbols(b"password", 38, 38, 8)
    assert km.key_sequence.tolist() == FROZEN_KEY


def test_key_material_deterministic():
    a = derive_key_material(b"pw", 50, 60, 38)
    b = derive_key_material(b"pw", 50, 60, 38)
    np.testing.assert_array_equal(a.key_sequence, b.key_sequence)
    np.testing.assert_array_equal(a.U, b.U)
    np.testing.assert_array_equal(a.reservoir.matrix, b.reservoir.matrix)
    Q = a.reservoir.matrix
    assert np.max(np.abs(Q.T @ Q - np.eye(60))) < 1e-10


def test_one_byte_password_change_decorrelates_keys():
    a = derive_key_material(b"password1", 300, 38, 38).key_sequence
    b = derive_key_material(b"password2", 300, 38, 38).key_sequence
    assert np.mean(a != b) > 0.9


def test_degenerate_key_alphabet():
    with pytest.raises(ValueError, match="degenerate key alphabet"):
        derive_key_material(b"pw", 10, 10, 1)


def test_empty_password():
    with pytest.raises(ValueError):
        derive_key_material(b"", 10, 10, 5)
    with pytest.raises(ValueError):
        encrypt("hello", "")


def test_mask_properties():
    key = np.array([0, 0, 0])
    np.testing.assert_array_equal(mask([1, 2, 0], key, 3), [1, 2, 0])
    m, k = np.array([0, 1, 1, 0]), np.array([1, 1, 0, 0])
    np.testing.assert_array_equal(mask(m, k, 2), m ^ k)
    with pytest.raises(ValueError):
        mask([1, 2], [1], 3)
    with pytest.raises(ValueError):
        mask([1], [1], 3, "sideways")


@given(st.integers(1, 50).flatmap(lambda K: st.tuples(
    st.just(K), st.lists(st.integers(0, K - 1), min_size=1, max_size=40), st.integers(0, 2**31))))
def test_mask_roundtrip(args):
    K, msg, seed = args
    key = np.random.default_rng(seed).integers(0, 97, len(msg))
    np.testing.assert_array_equal(mask(mask(msg, key, K, "encode"), key, K, "decode"), msg)


def test_roundtrip_short_message():
    c = encrypt("Hello, hypersphere!", "pw")
    assert c.N == 38  # max(2T, M)
    assert decrypt(CipherText.from_bytes(c.to_bytes()), "pw") == "Hello, hypersphere!"


def test_roundtrip_two_symbols():
    c = encrypt("ab", "pw")
    assert decrypt(c, "pw") == "ab"


def test_roundtrip_unicode():
    msg = "naïve café · ünïcode ✓ " * 3
    assert decrypt(CipherText.from_bytes(encrypt(msg, "κλειδί").to_bytes()), "κλειδί") == msg


def test_message_validation():
    with pytest.raises(ValueError):
        encrypt("", "pw")
    with pytest.raises(ValueError):
        encrypt("x", "pw")
    with pytest.raises(ValueError, match="block limit"):
        encrypt("ab" * 20, "pw", CryptoParams(max_length=10))


def test_insufficient_parameters_detected():
    rng = np.random.default_rng(0)
    msg = "".join(rng.choice(list(string.ascii_lowercase), 300))
    with pytest.raises(EncryptionError, match="insufficient"):
        encrypt(msg, "pw", CryptoParams(N=40))


def test_wrong_password_gives_garbage():
    rng = np.random.default_rng(1)
    msg = "".join(rng.choice(list(string.ascii_letters[:38]), 250))
    c = encrypt(msg, "right")
    out = decrypt(c, "wrong")
    assert len(out) == len(msg)
    assert np.mean([a == b for a, b in zip(out, msg)]) < 0.15


def test_header_layout():
    c = encrypt("abcab", "pw")
    raw = c.to_bytes()
    assert raw[:4] == b"HRC1" and raw[4] == 1 and raw[5:9] == b"\0\0\0\0"
    N, M, K, T = struct.unpack_from("<QQQQ", raw, 9)
    (alpha,) = struct.unpack_from("<d", raw, 41)
    (alen,) = struct.unpack_from("<I", raw, 49)
    assert (N, M, K, T, alpha) == (38, 38, 3, 5, 0.5)
    assert raw[53:53 + alen] == b"abc"
    W = np.frombuffer(raw[53 + alen:], dtype="<f8").reshape(K, N)
    np.testing.assert_array_equal(W, c.W)


def _good():
    return encrypt("abcab", "pw").to_bytes()


@pytest.mark.parametrize("corrupt", [
    lambda b: b"XXXX" + b[4:],
    lambda b: b[:4] + b"\x02" + b[5:],
    lambda b: b[:5] + b"\x01" + b[6:],
    lambda b: b[:-8],
    lambda b: b + b"\0" * 8,
    lambda b: b[:20],
    lambda b: b[:9] + struct.pack("<Q", 39) + b[17:],  # N no longer matches payload
    lambda b: b[:25] + struct.pack("<Q", 4) + b[33:],  # K disagrees with alphabet
])
def test_malformed_ciphertext(corrupt):
    with pytest.raises(CipherFormatError):
        CipherText.from_bytes(corrupt(_good()))


@settings(max_examples=15, deadline=None)
@given(st.text(alphabet=string.printable, min_size=2, max_size=120), st.binary(min_size=1, max_size=16))
def test_roundtrip_property(msg, password):
    assert decrypt(CipherText.from_bytes(encrypt(msg, password).to_bytes()), password) == msg
