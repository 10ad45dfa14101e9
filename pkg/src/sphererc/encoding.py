"""Symbol <-> index <-> one-hot mapping."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct symbols; position in ``symbols`` is the index.

    Alphabets built from text are sorted by code point so the mapping is
    reproducible across runs and platforms.
    """

    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise EncodingError("alphabet symbols must be distinct")
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.symbols)})

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol) -> bool:
        return symbol in self._index

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise EncodingError(f"symbol {symbol!r} not in alphabet") from None

    def symbol(self, i: int) -> str:
        return self.symbols[i]

    def to_string(self) -> str:
        return "".join(self.symbols)

    @classmethod
    def from_string(cls, s: str) -> "Alphabet":
        """Alphabet whose symbols are the characters of ``s`` in given order."""
        return cls(tuple(s))


def build_alphabet(text: Iterable[str]) -> Alphabet:
    symbols = set(text)
    if not symbols:
        raise EncodingError("empty corpus")
    return Alphabet(tuple(sorted(symbols)))


def encode(text: Sequence[str], alphabet: Alphabet) -> np.ndarray:
    """Map each symbol of ``text`` to its alphabet index (int64 array)."""
    out = np.empty(len(text), dtype=np.int64)
    for pos, ch in enumerate(text):
        if ch not in alphabet:
            raise EncodingError(f"unknown symbol {ch!r} at position {pos}")
        out[pos] = alphabet.index(ch)
    return out


def decode(indices: Iterable[int], alphabet: Alphabet) -> str:
    return "".join(alphabet.symbols[int(i)] for i in indices)


def one_hot(index: int, size: int) -> np.ndarray:
    if not 0 <= index < size:
        raise EncodingError(f"index {index} out of range for size {size}")
    v = np.zeros(size)
    v[index] = 1.0
    return v


def one_hot_matrix(indices: np.ndarray, size: int) -> np.ndarray:
    """Columns are one-hot vectors: shape ``(size, len(indices))``."""
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= size):
        raise EncodingError(f"index out of range for size {size}")
    S = np.zeros((size, indices.shape[0]))
    S[indices, np.arange(indices.shape[0])] = 1.0
    return S
