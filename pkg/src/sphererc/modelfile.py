"""Binary model artifact (``HRCM``).

Layout, all integers and floats little endian::

    "HRCM"  u8 version  4 reserved zero bytes
    u64 N  u64 M  u64 K  f64 alpha  u8 reservoir kind (0 cyclic, 1 dense)
    u32 len + UTF-8 input alphabet
    u32 len + UTF-8 output alphabet
    U  (N*M f64, row-major)
    Q  (N*N f64, row-major; dense reservoirs only)
    W  (K*N f64, row-major)
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .encoding import Alphabet
from .regimes import TrainedModel
from .reservoir import CyclicShift, DenseOrthogonal

MAGIC = b"HRCM"
VERSION = 1
_HEADER = struct.Struct("<4sB4sQQQdB")
_LEN = struct.Struct("<I")
_KINDS = {"cyclic": 0, "dense": 1}


class ModelFormatError(ValueError):
    pass


def _pack_alphabet(a: Alphabet | None) -> bytes:
    raw = a.to_string().encode("utf-8") if a is not None else b""
    return _LEN.pack(len(raw)) + raw


def model_to_bytes(model: TrainedModel) -> bytes:
    kind = model.reservoir.kind
    parts = [
        _HEADER.pack(MAGIC, VERSION, b"\0\0\0\0", model.N, model.M, model.K,
                     float(model.alpha), _KINDS[kind]),
        _pack_alphabet(model.input_alphabet),
        _pack_alphabet(model.output_alphabet),
        np.ascontiguousarray(model.U, dtype="<f8").tobytes(),
    ]
    if kind == "dense":
        parts.append(np.ascontiguousarray(model.reservoir.matrix, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(model.W, dtype="<f8").tobytes())
    return b"".join(parts)


def model_from_bytes(data: bytes) -> TrainedModel:
    if len(data) < _HEADER.size:
        raise ModelFormatError("model file shorter than its header")
    magic, version, reserved, N, M, K, alpha, kind = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ModelFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ModelFormatError(f"unsupported version {version}")
    if kind not in (0, 1):
        raise ModelFormatError(f"unknown reservoir kind {kind}")
    if not (1 <= M <= N and K >= 1):
        raise ModelFormatError(f"inconsistent dimensions N={N} M={M} K={K}")
    pos = _HEADER.size
    alphabets = []
    for _ in range(2):
        if len(data) < pos + _LEN.size:
            raise ModelFormatError("truncated alphabet")
        (n,) = _LEN.unpack_from(data, pos)
        pos += _LEN.size
        if len(data) < pos + n:
            raise ModelFormatError("truncated alphabet")
        try:
            s = data[pos:pos + n].decode("utf-8")
            alphabets.append(Alphabet.from_string(s) if s else None)
        except (UnicodeDecodeError, ValueError) as exc:
            raise ModelFormatError(f"bad alphabet: {exc}") from None
        pos += n
    sizes = [N * M] + ([N * N] if kind == 1 else []) + [K * N]
    if len(data) - pos != 8 * sum(sizes):
        raise ModelFormatError(f"payload is {len(data) - pos} bytes, expected {8 * sum(sizes)}")
    arrays = []
    for count in sizes:
        arrays.append(np.frombuffer(data, dtype="<f8", count=count, offset=pos).astype(float))
        pos += 8 * count
    U = arrays[0].reshape(N, M)
    W = arrays[-1].reshape(K, N)
    reservoir = DenseOrthogonal(arrays[1].reshape(N, N)) if kind == 1 else CyclicShift(N)
    try:
        return TrainedModel(U, reservoir, W, alpha, alphabets[0], alphabets[1])
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from None


def save_model(model: TrainedModel, path) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path) -> TrainedModel:
    return model_from_bytes(Path(path).read_bytes())
