"""Hot inner loops, in two interchangeable backends.

``numba``  -- explicit loops compiled with ``@njit`` (default when numba imports).
``numpy``  -- one vectorized numpy expression per time step.

The backend is picked from the ``SPHERERC_BACKEND`` environment variable at
import time and can be switched at runtime with :func:`set_backend` or the
:func:`use_backend` context manager.

All kernels work on row-major state buffers: row ``t`` of the returned array
is the state after consuming ``seq[0..t]``. Input matrices are passed
transposed (``UT`` is M x N, C-contiguous) so a symbol's column is a
contiguous row.

Kernels never raise on a degenerate normalization; they stop and return the
offending step index (``-1`` on success) and the caller raises.
"""

from __future__ import annotations

import contextlib
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

TINY_NORM = 1e-300

BACKENDS = ("numba", "numpy") if HAVE_NUMBA else ("numpy",)


def _initial_backend() -> str:
    name = os.environ.get("SPHERERC_BACKEND", "").strip().lower()
    if not name:
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in ("numba", "numpy"):
        raise ValueError(f"SPHERERC_BACKEND must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("SPHERERC_BACKEND=numba but numba is not installed")
    return name


_backend = _initial_backend()


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}; choose from {BACKENDS}")
    _backend = name


@contextlib.contextmanager
def use_backend(name: str):
    prev = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _np_step(x, rx, u, alpha):
    v = (1.0 - alpha) * x + alpha * (rx + u)
    nrm = np.sqrt(np.dot(v, v))
    return v, nrm


def _np_drive_cyclic(seq, UT, alpha):
    L, N = seq.shape[0], UT.shape[1]
    X = np.empty((L, N))
    x = np.zeros(N)
    for t in range(L):
        v, nrm = _np_step(x, np.roll(x, -1), UT[seq[t]], alpha)
        if nrm < TINY_NORM:
            return X, t
        x = v / nrm
        X[t] = x
    return X, -1


def _np_drive_dense(seq, UT, Q, alpha):
    L, N = seq.shape[0], UT.shape[1]
    X = np.empty((L, N))
    x = np.zeros(N)
    for t in range(L):
        v, nrm = _np_step(x, Q @ x, UT[seq[t]], alpha)
        if nrm < TINY_NORM:
            return X, t
        x = v / nrm
        X[t] = x
    return X, -1


def _np_probs(W, x):
    z = W @ x
    e = np.exp(z - z.max())
    return e / e.sum()


def _np_online_epoch(X, targets, W):
    for t in range(X.shape[0]):
        x = X[t]
        d = -_np_probs(W, x)
        d[targets[t]] += 1.0
        W += np.outer(d, x)


def _np_recall(s0, length, UT, Q, W, alpha, dense):
    N = UT.shape[1]
    out = np.empty(length, dtype=np.int64)
    out[0] = s0
    x = np.zeros(N)
    for t in range(1, length):
        rx = Q @ x if dense else np.roll(x, -1)
        v, nrm = _np_step(x, rx, UT[out[t - 1]], alpha)
        if nrm < TINY_NORM:
            return out, t
        x = v / nrm
        out[t] = np.argmax(_np_probs(W, x))
    return out, -1


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_cyclic_update(x, u, alpha, v):
        N = x.shape[0]
        ss = 0.0
        for n in range(N - 1):
            val = (1.0 - alpha) * x[n] + alpha * (x[n + 1] + u[n])
            v[n] = val
            ss += val * val
        val = (1.0 - alpha) * x[N - 1] + alpha * (x[0] + u[N - 1])
        v[N - 1] = val
        ss += val * val
        return np.sqrt(ss)

    @njit(cache=True)
    def _nb_dense_update(x, Q, u, alpha, v):
        qx = np.dot(Q, x)
        ss = 0.0
        for n in range(x.shape[0]):
            val = (1.0 - alpha) * x[n] + alpha * (qx[n] + u[n])
            v[n] = val
            ss += val * val
        return np.sqrt(ss)

    @njit(cache=True)
    def _nb_drive_cyclic(seq, UT, alpha):
        L, N = seq.shape[0], UT.shape[1]
        X = np.empty((L, N))
        x = np.zeros(N)
        v = np.empty(N)
        for t in range(L):
            nrm = _nb_cyclic_update(x, UT[seq[t]], alpha, v)
            if nrm < TINY_NORM:
                return X, t
            inv = 1.0 / nrm
            for n in range(N):
                x[n] = v[n] * inv
                X[t, n] = x[n]
        return X, -1

    @njit(cache=True)
    def _nb_drive_dense(seq, UT, Q, alpha):
        L, N = seq.shape[0], UT.shape[1]
        X = np.empty((L, N))
        x = np.zeros(N)
        v = np.empty(N)
        for t in range(L):
            nrm = _nb_dense_update(x, Q, UT[seq[t]], alpha, v)
            if nrm < TINY_NORM:
                return X, t
            inv = 1.0 / nrm
            for n in range(N):
                x[n] = v[n] * inv
                X[t, n] = x[n]
        return X, -1

    @njit(cache=True)
    def _nb_probs(W, x, p):
        K = W.shape[0]
        z = np.dot(W, x)
        zmax = z.max()
        for k in range(K):
            p[k] = z[k]
        total = 0.0
        for k in range(K):
            p[k] = np.exp(p[k] - zmax)
            total += p[k]
        for k in range(K):
            p[k] /= total

    @njit(cache=True)
    def _nb_argmax(p):
        best = 0
        for k in range(1, p.shape[0]):
            if p[k] > p[best]:
                best = k
        return best

    @njit(cache=True)
    def _nb_online_epoch(X, targets, W):
        K, N = W.shape
        p = np.empty(K)
        for t in range(X.shape[0]):
            _nb_probs(W, X[t], p)
            p[targets[t]] -= 1.0
            for k in range(K):
                g = -p[k]
                for n in range(N):
                    W[k, n] += g * X[t, n]

    @njit(cache=True)
    def _nb_recall(s0, length, UT, Q, W, alpha, dense):
        N = UT.shape[1]
        out = np.empty(length, dtype=np.int64)
        out[0] = s0
        x = np.zeros(N)
        v = np.empty(N)
        p = np.empty(W.shape[0])
        for t in range(1, length):
            if dense:
                nrm = _nb_dense_update(x, Q, UT[out[t - 1]], alpha, v)
            else:
                nrm = _nb_cyclic_update(x, UT[out[t - 1]], alpha, v)
            if nrm < TINY_NORM:
                return out, t
            inv = 1.0 / nrm
            for n in range(N):
                x[n] = v[n] * inv
            _nb_probs(W, x, p)
            out[t] = _nb_argmax(p)
        return out, -1


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_EMPTY_Q = np.zeros((1, 1))


def drive(seq, UT, Q, alpha):
    """Teacher-forced states, shape ``(len(seq), N)``. ``Q is None`` means cyclic."""
    seq = np.ascontiguousarray(seq, dtype=np.int64)
    alpha = float(alpha)
    if _backend == "numba":
        if Q is None:
            return _nb_drive_cyclic(seq, UT, alpha)
        return _nb_drive_dense(seq, UT, Q, alpha)
    if Q is None:
        return _np_drive_cyclic(seq, UT, alpha)
    return _np_drive_dense(seq, UT, Q, alpha)


def online_epoch(X, targets, W):
    """One pass of unit-step softmax gradient updates; mutates ``W``."""
    targets = np.ascontiguousarray(targets, dtype=np.int64)
    if _backend == "numba":
        _nb_online_epoch(X, targets, W)
    else:
        _np_online_epoch(X, targets, W)


def recall(s0, length, UT, Q, W, alpha):
    """Free-running generation of ``length`` symbols starting at ``s0``."""
    dense = Q is not None
    Qa = Q if dense else _EMPTY_Q
    if _backend == "numba":
        return _nb_recall(int(s0), int(length), UT, Qa, W, float(alpha), dense)
    return _np_recall(int(s0), int(length), UT, Qa, W, float(alpha), dense)
