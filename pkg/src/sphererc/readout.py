"""Softmax readout and the two ways of learning W.

Offline learning solves the ridge-regularised normal equations
``W (X X^T + eta I) = S X^T`` with a Cholesky factorisation. Online
learning takes unit-size cross-entropy gradient steps,
``W <- W + (e_target - p) x^T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

# -log of the smallest positive double, rounded up
CROSS_ENTROPY_CAP = 745.0
DEFAULT_ETA = 1e-7


class SingularSystemError(np.linalg.LinAlgError):
    pass


def softmax_probs(W: np.ndarray, x: np.ndarray) -> np.ndarray:
    z = W @ x
    e = np.exp(z - z.max())
    return e / e.sum()


def cross_entropy(p: np.ndarray, target_index: int) -> float:
    """``-log p[target]``, capped at 745 instead of returning infinity."""
    pt = float(p[target_index])
    if pt <= 0.0:
        return CROSS_ENTROPY_CAP
    return min(-np.log(pt), CROSS_ENTROPY_CAP)


def cross_entropy_grad(W: np.ndarray, x: np.ndarray, target_index: int) -> np.ndarray:
    """Gradient of the cross entropy w.r.t. W: row k is ``(p_k - y_k) x``."""
    d = softmax_probs(W, x)
    d[target_index] -= 1.0
    return np.outer(d, x)


def gradient_step(W: np.ndarray, x: np.ndarray, target_index: int) -> np.ndarray:
    """Return ``W - grad``, i.e. one online update with unit step size."""
    return W - cross_entropy_grad(W, x, target_index)


def _ridge_solve(YXt: np.ndarray, XXt: np.ndarray, eta: float) -> np.ndarray:
    A = XXt + eta * np.eye(XXt.shape[0])
    try:
        c = linalg.cho_factor(A, lower=True, check_finite=False)
    except linalg.LinAlgError:
        hint = " (use eta > 0)" if eta == 0 else ""
        raise SingularSystemError(f"X X^T + eta I is not positive definite{hint}") from None
    W = linalg.cho_solve(c, YXt.T, check_finite=False).T
    if not np.all(np.isfinite(W)):
        raise SingularSystemError("ridge solve produced non-finite weights; increase eta")
    return np.ascontiguousarray(W)


def solve_offline(X: np.ndarray, S: np.ndarray, eta: float = DEFAULT_ETA) -> np.ndarray:
    """Readout weights ``S X^T (X X^T + eta I)^{-1}``.

    ``X`` is N x T (one state per column), ``S`` is K x T.
    """
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    if X.shape[1] != S.shape[1]:
        raise ValueError(f"X has {X.shape[1]} columns but S has {S.shape[1]}")
    return _ridge_solve(S @ X.T, X @ X.T, eta)


@dataclass
class NormalEquationsAccumulator:
    """Running sums ``sum y x^T`` and ``sum x x^T``."""

    YXt: np.ndarray
    XXt: np.ndarray
    count: int = 0

    @classmethod
    def empty(cls, K: int, N: int) -> "NormalEquationsAccumulator":
        return cls(np.zeros((K, N)), np.zeros((N, N)), 0)


def accumulate(acc: NormalEquationsAccumulator, x: np.ndarray,
               target: np.ndarray) -> NormalEquationsAccumulator:
    """Add one (state, target) pair in place and return ``acc``."""
    if x.shape[0] != acc.XXt.shape[0] or target.shape[0] != acc.YXt.shape[0]:
        raise ValueError("dimension mismatch in accumulate")
    acc.YXt += np.outer(target, x)
    acc.XXt += np.outer(x, x)
    acc.count += 1
    return acc


def solve_from_accumulator(acc: NormalEquationsAccumulator,
                           eta: float = DEFAULT_ETA) -> np.ndarray:
    if acc.count < 1:
        raise ValueError("accumulator is empty")
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    return _ridge_solve(acc.YXt, acc.XXt, eta)
