"""Seeded random streams.

Every random draw in the library goes through an explicitly passed stream
object. Two implementations share the same small protocol
(``uniform``, ``normal``, ``integers``):

* :class:`RandomStream` -- Philox counter-based generator seeded by a 64-bit
  integer, used for experiments and model construction.
* :class:`sphererc.crypto.KeyStream` -- SHA-256 counter-mode byte stream,
  used for password-derived key material.

Normals are produced from uniforms with the Box-Muller transform so that the
uniform->normal mapping is fully specified and independent of numpy's
internal ziggurat sampler.
"""

from __future__ import annotations

import numpy as np

# Pairs of uniforms converted per Box-Muller chunk; bounds peak memory for
# very large matrices (N=8192 needs 67M normals).
_BM_CHUNK = 1 << 20


def box_muller(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Map pairs of uniforms in [0, 1) to interleaved standard normals.

    Returns an array of length ``2 * len(u1)`` laid out as
    ``[z0(0), z1(0), z0(1), z1(1), ...]``.
    """
    r = np.sqrt(-2.0 * np.log1p(-u1))  # log(1 - u1), 1 - u1 in (0, 1]
    theta = 2.0 * np.pi * u2
    out = np.empty(2 * u1.shape[0])
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out


def normals_from_uniform(uniform, size) -> np.ndarray:
    """Fill an array of ``size`` standard normals using ``uniform(n)``.

    Uniforms are consumed pairwise ``(u1, u2)`` in stream order; an odd
    trailing normal is discarded.
    """
    shape = (size,) if np.isscalar(size) else tuple(size)
    n = int(np.prod(shape))
    out = np.empty(n)
    pairs_total = (n + 1) // 2
    pos = 0
    done = 0
    while done < pairs_total:
        k = min(_BM_CHUNK, pairs_total - done)
        u = uniform(2 * k)
        z = box_muller(u[0::2], u[1::2])
        take = min(2 * k, n - pos)
        out[pos:pos + take] = z[:take]
        pos += take
        done += k
    return out.reshape(shape)


class RandomStream:
    """Deterministic Philox stream seeded by a 64-bit integer."""

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.Philox(seed))

    def uniform(self, size) -> np.ndarray:
        """Uniform doubles in [0, 1) with 53 random bits."""
        return self._gen.random(size)

    def normal(self, size) -> np.ndarray:
        return normals_from_uniform(self.uniform, size)

    def integers(self, high: int, size) -> np.ndarray:
        """Uniform integers in ``[0, high)`` as int64."""
        return self._gen.integers(0, high, size=size, dtype=np.int64)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed})"
