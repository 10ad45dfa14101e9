"""Training and recall in the associative and generative regimes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .encoding import Alphabet, one_hot_matrix
from .readout import solve_offline
from .reservoir import (
    CyclicShift,
    DegenerateStateError,
    ModelConfig,
    Reservoir,
    init_input_matrix,
    make_reservoir,
)
from .rng import RandomStream


@dataclass(eq=False)
class TrainedModel:
    """Everything needed to run recall: U, reservoir, W and alpha."""

    U: np.ndarray
    reservoir: Reservoir
    W: np.ndarray
    alpha: float
    input_alphabet: Optional[Alphabet] = None
    output_alphabet: Optional[Alphabet] = None

    def __post_init__(self):
        N, M = self.U.shape
        if self.reservoir.size != N:
            raise ValueError(f"reservoir size {self.reservoir.size} != U rows {N}")
        if self.W.ndim != 2 or self.W.shape[1] != N:
            raise ValueError(f"W has shape {self.W.shape}, expected (K, {N})")
        if self.input_alphabet is not None and len(self.input_alphabet) != M:
            raise ValueError("input alphabet size does not match U")
        if self.output_alphabet is not None and len(self.output_alphabet) != self.W.shape[0]:
            raise ValueError("output alphabet size does not match W")

    @property
    def N(self) -> int:
        return self.U.shape[0]

    @property
    def M(self) -> int:
        return self.U.shape[1]

    @property
    def K(self) -> int:
        return self.W.shape[0]


@dataclass(frozen=True)
class TrainReport:
    epochs: int
    final_error: float
    converged: bool


def build_network(config: ModelConfig, M: int) -> tuple[np.ndarray, Reservoir]:
    """Draw U and the reservoir from ``RandomStream(config.seed)``, U first."""
    rng = RandomStream(config.seed)
    U = init_input_matrix(M, config.N, rng)
    return U, make_reservoir(config.reservoir_kind, config.N, rng)


def _check_seq(seq, n_symbols: int, name: str = "sequence") -> np.ndarray:
    seq = np.asarray(seq, dtype=np.int64)
    if seq.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if seq.size and (seq.min() < 0 or seq.max() >= n_symbols):
        raise ValueError(f"{name} has indices outside [0, {n_symbols})")
    return seq


def _drive_rows(seq, U, reservoir, alpha) -> np.ndarray:
    if len(seq) == 0:
        return np.empty((0, U.shape[0]))
    UT = np.ascontiguousarray(U.T)
    X, bad = _kernels.drive(seq, UT, reservoir.matrix, alpha)
    if bad >= 0:
        raise DegenerateStateError(f"degenerate state at step {bad}")
    return X


def drive_sequence(seq, U: np.ndarray, reservoir: Reservoir, alpha: float) -> np.ndarray:
    """States after consuming each prefix of ``seq``, starting from x = 0.

    Returns an N x len(seq) array; column t has consumed ``seq[0..t]``.
    """
    seq = _check_seq(seq, U.shape[1])
    return _drive_rows(seq, U, reservoir, alpha).T


def drive_states(seq, U: np.ndarray, reservoir: Reservoir, alpha: float) -> np.ndarray:
    """Teacher-forced states for generative training, N x (T - 1).

    Column t is paired with the target ``seq[t + 1]``.
    """
    seq = _check_seq(seq, U.shape[1])
    if seq.shape[0] < 2:
        raise ValueError("generative training needs a sequence of length >= 2")
    return drive_sequence(seq[:-1], U, reservoir, alpha)


def _resolve(config, n_symbols, U, reservoir):
    if U is None:
        U, built = build_network(config, n_symbols)
        reservoir = reservoir if reservoir is not None else built
    elif reservoir is None:
        if config.reservoir_kind == "dense":
            raise ValueError("pass the dense reservoir together with U")
        reservoir = CyclicShift(U.shape[0])
    if U.shape[1] != n_symbols:
        raise ValueError(f"U has {U.shape[1]} columns, alphabet has {n_symbols} symbols")
    return U, reservoir


def train_offline_generative(seq, config: ModelConfig, n_symbols: Optional[int] = None,
                             *, U: Optional[np.ndarray] = None,
                             reservoir: Optional[Reservoir] = None) -> TrainedModel:
    """Pseudo-inverse readout that predicts ``seq[t + 1]`` from the state at t."""
    seq = np.asarray(seq, dtype=np.int64)
    M = int(n_symbols if n_symbols is not None else seq.max() + 1)
    seq = _check_seq(seq, M)
    U, reservoir = _resolve(config, M, U, reservoir)
    X = drive_states(seq, U, reservoir, config.alpha)
    S = one_hot_matrix(seq[1:], M)
    W = solve_offline(X, S, config.eta)
    return TrainedModel(U, reservoir, W, config.alpha)


def train_online_generative(seq, config: ModelConfig, n_symbols: Optional[int] = None,
                            max_epochs: Optional[int] = None, *,
                            U: Optional[np.ndarray] = None,
                            reservoir: Optional[Reservoir] = None,
                            W0: Optional[np.ndarray] = None,
                            callback=None) -> tuple[TrainedModel, TrainReport]:
    """Epochs of unit-step softmax gradient descent, stopping at zero recall error.

    Each epoch restarts from the zero state, so the teacher-forced states are
    identical across epochs; they are computed once. After each epoch the
    whole sequence is recalled from ``seq[0]``. ``max_epochs`` defaults to
    the sequence length. A warm start ``W0`` that already recalls perfectly
    is returned unchanged with ``epochs == 0``.

    ``callback(epoch, error)`` is invoked after every epoch.
    """
    seq = np.asarray(seq, dtype=np.int64)
    M = int(n_symbols if n_symbols is not None else seq.max() + 1)
    seq = _check_seq(seq, M)
    T = seq.shape[0]
    if max_epochs is None:
        max_epochs = T
    U, reservoir = _resolve(config, M, U, reservoir)
    X = _drive_rows(seq[:-1], U, reservoir, config.alpha) if T >= 2 else None
    if X is None:
        raise ValueError("generative training needs a sequence of length >= 2")
    targets = seq[1:]

    if W0 is None:
        W = np.zeros((M, U.shape[0]))
        err = 1.0
    else:
        W = np.array(W0, dtype=float, order="C")
        err = recall_error(seq, _recall(U, reservoir, W, config.alpha, seq[0], T))

    epochs = 0
    while err > 0 and epochs < max_epochs:
        _kernels.online_epoch(X, targets, W)
        epochs += 1
        err = recall_error(seq, _recall(U, reservoir, W, config.alpha, seq[0], T))
        if callback is not None:
            callback(epochs, err)
    model = TrainedModel(U, reservoir, W, config.alpha)
    return model, TrainReport(epochs, err, err == 0)


def train_offline_associative(seq, targets, config: ModelConfig,
                              n_inputs: Optional[int] = None,
                              n_outputs: Optional[int] = None, *,
                              U: Optional[np.ndarray] = None,
                              reservoir: Optional[Reservoir] = None) -> TrainedModel:
    """Readout mapping the state after ``seq[0..t]`` to ``targets[t]``."""
    seq = np.asarray(seq, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.int64)
    if seq.shape != targets.shape:
        raise ValueError(f"input length {seq.shape[0]} != target length {targets.shape[0]}")
    if seq.shape[0] < 1:
        raise ValueError("associative training needs at least one pair")
    M = int(n_inputs if n_inputs is not None else seq.max() + 1)
    K = int(n_outputs if n_outputs is not None else targets.max() + 1)
    seq = _check_seq(seq, M)
    targets = _check_seq(targets, K, "targets")
    U, reservoir = _resolve(config, M, U, reservoir)
    X = drive_sequence(seq, U, reservoir, config.alpha)
    W = solve_offline(X, one_hot_matrix(targets, K), config.eta)
    return TrainedModel(U, reservoir, W, config.alpha)


def _recall(U, reservoir, W, alpha, s0, length):
    UT = np.ascontiguousarray(U.T)
    out, bad = _kernels.recall(s0, length, UT, reservoir.matrix, W, alpha)
    if bad >= 0:
        raise DegenerateStateError(f"degenerate state at recall step {bad}")
    return out


def recall_generative(model: TrainedModel, s0: int, T: int) -> np.ndarray:
    """Regenerate T symbols from ``s0`` by feeding back argmax predictions.

    Ties in the softmax resolve to the lowest index.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if not 0 <= s0 < model.M:
        raise ValueError(f"start symbol {s0} outside [0, {model.M})")
    return _recall(model.U, model.reservoir, model.W, model.alpha, s0, T)


def recall_associative(model: TrainedModel, seq) -> np.ndarray:
    seq = _check_seq(seq, model.M)
    X = _drive_rows(seq, model.U, model.reservoir, model.alpha)
    Z = X @ model.W.T
    P = np.exp(Z - Z.max(axis=1, keepdims=True))
    P /= P.sum(axis=1, keepdims=True)
    return np.argmax(P, axis=1).astype(np.int64)


def recall_error(a, b) -> float:
    """Fraction of positions where ``a`` and ``b`` differ."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < 1:
        raise ValueError("recall error of empty sequences is undefined")
    return float(np.count_nonzero(a != b)) / a.shape[0]
