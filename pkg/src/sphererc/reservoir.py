"""Input matrix, isometric reservoirs, and the hypersphere state update.

The state evolves as::

    v = (1 - alpha) * x + alpha * (R x + U[:, s])
    x' = v / ||v||

where ``R`` is either a dense random orthogonal matrix or the cyclic shift
``x'[n] = x[(n + 1) mod N]``. With ``alpha = 1`` this is the plain
(non-leaky) update.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from ._kernels import TINY_NORM

ReservoirKind = Literal["dense", "cyclic"]


class DegenerateStateError(ArithmeticError):
    """The pre-normalization state vanished (||v|| < 1e-300)."""


@dataclass(frozen=True, eq=False)
class DenseOrthogonal:
    matrix: np.ndarray

    kind = "dense"

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x


@dataclass(frozen=True)
class CyclicShift:
    size: int

    kind = "cyclic"

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"cyclic reservoir size must be >= 1, got {self.size}")

    @property
    def matrix(self) -> None:
        return None

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.roll(x, -1)


Reservoir = Union[DenseOrthogonal, CyclicShift]


@dataclass(frozen=True)
class ModelConfig:
    """Hyperparameters of a reservoir model.

    ``eta`` is the ridge term added to the diagonal of X X^T in offline
    learning. ``seed`` drives construction of U (and Q for dense reservoirs).
    """

    N: int
    alpha: float = 1.0
    eta: float = 1e-7
    reservoir_kind: ReservoirKind = "cyclic"
    seed: int = 0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.reservoir_kind not in ("dense", "cyclic"):
            raise ValueError(f"reservoir_kind must be 'dense' or 'cyclic', got {self.reservoir_kind!r}")


def init_input_matrix(M: int, N: int, rng) -> np.ndarray:
    """Random N x M input matrix with zero-mean, unit-norm columns.

    Entries are drawn uniform in [0, 1) in row-major order, then each column
    is centred and scaled to length one.
    """
    if M < 1 or N < 1:
        raise ValueError(f"M and N must be positive, got M={M}, N={N}")
    if M > N:
        raise ValueError(f"input alphabet exceeds reservoir size (M={M} > N={N})")
    U = np.asarray(rng.uniform(N * M), dtype=float).reshape(N, M)
    U -= U.mean(axis=0)
    norms = np.linalg.norm(U, axis=0)
    if np.any(norms == 0):
        # only reachable for N == 1, where every centred column is zero
        raise ValueError("cannot normalize input matrix columns (N too small)")
    U /= norms
    return U


def init_dense_orthogonal(N: int, rng) -> DenseOrthogonal:
    """Orthogonal factor Q of V = QR for a standard-normal V, with diag(R) > 0."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    V = rng.normal((N, N))
    Q, R = np.linalg.qr(V)
    del V
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    Q *= signs
    return DenseOrthogonal(np.ascontiguousarray(Q))


def make_reservoir(kind: ReservoirKind, N: int, rng=None) -> Reservoir:
    if kind == "cyclic":
        return CyclicShift(N)
    if kind == "dense":
        if rng is None:
            raise ValueError("dense reservoir needs a random stream")
        return init_dense_orthogonal(N, rng)
    raise ValueError(f"unknown reservoir kind {kind!r}")


def apply_reservoir(r: Reservoir, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (r.size,):
        raise ValueError(f"state has shape {x.shape}, reservoir expects ({r.size},)")
    return r.apply(x)


def update_state(x: np.ndarray, input_index: int, U: np.ndarray, r: Reservoir,
                 alpha: float) -> np.ndarray:
    """One leaky hypersphere step; returns a unit vector."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    v = (1.0 - alpha) * x + alpha * (apply_reservoir(r, x) + U[:, input_index])
    nrm = np.linalg.norm(v)
    if nrm < TINY_NORM:
        raise DegenerateStateError("degenerate state: update produced a zero vector")
    return v / nrm
