"""Password-keyed symmetric cipher built on an associative reservoir.

The secret key is the triple (U, Q, key sequence), all derived from the
password through a SHA-256 counter-mode keystream::

    block_i = SHA-256( SHA-256(password) || uint64_le(i) ),  i = 0, 1, ...

The keystream is consumed in a fixed order: U entries (53-bit uniforms,
row-major), then Q (Box-Muller normals into V row-major, V = QR with
diag(R) > 0), then one key symbol per message position (uint32 little
endian, rejection-sampled into [0, M)).

Encryption masks the message with the key sequence (addition mod K), trains
the readout that maps the key sequence to the masked message, and ships
only W. Decryption replays the key sequence through the same reservoir,
takes the argmax readout, and unmasks. A wrong password is not detected.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .encoding import Alphabet, build_alphabet, decode, encode
from .readout import DEFAULT_ETA
from .regimes import recall_associative, train_offline_associative, TrainedModel
from .reservoir import DenseOrthogonal, ModelConfig, init_dense_orthogonal, init_input_matrix
from .rng import normals_from_uniform

MAGIC = b"HRC1"
VERSION = 1
# magic, version, 4 reserved bytes, N, M, K, T, alpha
_HEADER = struct.Struct("<4sB4sQQQQd")
_LEN = struct.Struct("<I")

DEFAULT_KEY_ALPHABET = 38
DEFAULT_N_FACTOR = 2.0
DEFAULT_ALPHA = 0.5
DEFAULT_MAX_LENGTH = 2048


class CipherFormatError(ValueError):
    """Malformed or truncated ciphertext."""


class EncryptionError(RuntimeError):
    """The trained readout does not reproduce the message exactly."""


class KeyStream:
    """SHA-256 counter-mode byte stream with the random-stream protocol."""

    def __init__(self, password: bytes):
        if not password:
            raise ValueError("password must be non-empty")
        self._prefix = hashlib.sha256(hashlib.sha256(password).digest())
        self._counter = 0
        self._buf = b""

    def read(self, n: int) -> bytes:
        if n <= len(self._buf):
            out, self._buf = self._buf[:n], self._buf[n:]
            return out
        need = n - len(self._buf)
        nblocks = -(-need // 32)
        chunks = [self._buf]
        prefix, c0 = self._prefix, self._counter
        for i in range(c0, c0 + nblocks):
            h = prefix.copy()
            h.update(i.to_bytes(8, "little"))
            chunks.append(h.digest())
        self._counter = c0 + nblocks
        data = b"".join(chunks)
        self._buf = data[n:]
        return data[:n]

    def uniform(self, size) -> np.ndarray:
        n = int(np.prod(size))
        words = np.frombuffer(self.read(8 * n), dtype="<u8")
        return ((words >> np.uint64(11)).astype(np.float64) * 2.0**-53).reshape(size)

    def normal(self, size) -> np.ndarray:
        return normals_from_uniform(self.uniform, size)

    def integers(self, high: int, size: int) -> np.ndarray:
        """Unbiased integers in ``[0, high)`` from 4-byte words, rejection sampled."""
        if not 1 <= high <= 2**32:
            raise ValueError(f"high must lie in [1, 2**32], got {high}")
        limit = 2**32 - (2**32 % high)
        out = np.empty(size, dtype=np.int64)
        filled = 0
        while filled < size:
            word = int.from_bytes(self.read(4), "little")
            if word < limit:
                out[filled] = word % high
                filled += 1
        return out


@dataclass(frozen=True, eq=False)
class KeyMaterial:
    U: np.ndarray
    reservoir: DenseOrthogonal
    key_sequence: np.ndarray


@dataclass(frozen=True)
class CryptoParams:
    """Cipher parameters.

    ``N`` defaults to ``max(ceil(n_factor * T), M)``. ``output_alphabet``
    defaults to the distinct characters of the message.
    """

    N: Optional[int] = None
    n_factor: float = DEFAULT_N_FACTOR
    alpha: float = DEFAULT_ALPHA
    M: int = DEFAULT_KEY_ALPHABET
    output_alphabet: Optional[Alphabet] = None
    eta: float = DEFAULT_ETA
    max_length: int = DEFAULT_MAX_LENGTH

    def reservoir_size(self, T: int) -> int:
        if self.N is not None:
            return self.N
        return max(math.ceil(self.n_factor * T), self.M)


@dataclass(frozen=True, eq=False)
class CipherText:
    N: int
    M: int
    K: int
    T: int
    alpha: float
    alphabet: Alphabet
    W: np.ndarray

    def to_bytes(self) -> bytes:
        alpha_bytes = self.alphabet.to_string().encode("utf-8")
        head = _HEADER.pack(MAGIC, VERSION, b"\0\0\0\0", self.N, self.M, self.K, self.T, self.alpha)
        payload = np.ascontiguousarray(self.W, dtype="<f8").tobytes()
        return head + _LEN.pack(len(alpha_bytes)) + alpha_bytes + payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "CipherText":
        if len(data) < _HEADER.size + _LEN.size:
            raise CipherFormatError("ciphertext shorter than its header")
        magic, version, reserved, N, M, K, T, alpha = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise CipherFormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise CipherFormatError(f"unsupported version {version}")
        if reserved != b"\0\0\0\0":
            raise CipherFormatError("reserved header bytes must be zero")
        pos = _HEADER.size
        (alen,) = _LEN.unpack_from(data, pos)
        pos += _LEN.size
        if len(data) < pos + alen:
            raise CipherFormatError("truncated alphabet")
        try:
            alphabet = Alphabet.from_string(data[pos:pos + alen].decode("utf-8"))
        except (UnicodeDecodeError, ValueError) as exc:
            raise CipherFormatError(f"bad alphabet: {exc}") from None
        pos += alen
        if len(alphabet) != K:
            raise CipherFormatError(f"alphabet has {len(alphabet)} symbols, header says K={K}")
        if not (1 <= M <= N and T >= 1 and K >= 1):
            raise CipherFormatError(f"inconsistent dimensions N={N} M={M} K={K} T={T}")
        if not 0.0 < alpha <= 1.0:
            raise CipherFormatError(f"alpha {alpha} outside (0, 1]")
        expected = 8 * K * N
        if len(data) - pos != expected:
            raise CipherFormatError(
                f"payload is {len(data) - pos} bytes, expected {expected} for K={K}, N={N}")
        W = np.frombuffer(data, dtype="<f8", count=K * N, offset=pos).reshape(K, N).astype(float)
        return cls(N, M, K, T, alpha, alphabet, W)


def derive_key_material(password: bytes, T: int, N: int, M: int) -> KeyMaterial:
    if isinstance(password, str):
        password = password.encode("utf-8")
    if not password:
        raise ValueError("password must be non-empty")
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if M < 2:
        raise ValueError("degenerate key alphabet (M must be >= 2)")
    stream = KeyStream(password)
    U = init_input_matrix(M, N, stream)
    Q = init_dense_orthogonal(N, stream)
    return KeyMaterial(U, Q, stream.integers(M, T))


def mask(message, key, K: int, direction: Literal["encode", "decode"] = "encode") -> np.ndarray:
    """Modular (generalised XOR) masking of symbol indices over Z_K."""
    message = np.asarray(message, dtype=np.int64)
    key = np.asarray(key, dtype=np.int64)
    if message.shape != key.shape:
        raise ValueError(f"message length {message.shape[0]} != key length {key.shape[0]}")
    if direction == "encode":
        return (message + key) % K
    if direction == "decode":
        return (message - key) % K
    raise ValueError(f"direction must be 'encode' or 'decode', got {direction!r}")


def _model(key: KeyMaterial, W: np.ndarray, alpha: float) -> TrainedModel:
    return TrainedModel(key.U, key.reservoir, W, alpha)


def encrypt(message: str, password, params: Optional[CryptoParams] = None) -> CipherText:
    params = params or CryptoParams()
    if isinstance(password, str):
        password = password.encode("utf-8")
    if not password:
        raise ValueError("password must be non-empty")
    T = len(message)
    if T < 2:
        raise ValueError("message must have at least 2 symbols")
    if T > params.max_length:
        raise ValueError(f"message length {T} exceeds block limit {params.max_length}")
    alphabet = params.output_alphabet or build_alphabet(message)
    K = len(alphabet)
    y = encode(message, alphabet)
    N = params.reservoir_size(T)
    key = derive_key_material(password, T, N, params.M)
    masked = mask(y, key.key_sequence, K, "encode")
    config = ModelConfig(N=N, alpha=params.alpha, eta=params.eta, reservoir_kind="dense")
    model = train_offline_associative(key.key_sequence, masked, config, params.M, K,
                                      U=key.U, reservoir=key.reservoir)
    if not np.array_equal(recall_associative(model, key.key_sequence), masked):
        raise EncryptionError("parameters insufficient for lossless encryption")
    return CipherText(N, params.M, K, T, params.alpha, alphabet, model.W)


def decrypt(cipher: CipherText, password) -> str:
    key = derive_key_material(password, cipher.T, cipher.N, cipher.M)
    out = recall_associative(_model(key, cipher.W, cipher.alpha), key.key_sequence)
    return decode(mask(out, key.key_sequence, cipher.K, "decode"), cipher.alphabet)
