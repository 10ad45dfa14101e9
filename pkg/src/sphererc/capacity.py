"""Memory-capacity experiments: recall-error surfaces over (nu, rho) or (nu, alpha).

``nu = N / T`` is the normalised reservoir size and ``rho = M / T`` the
normalised alphabet size. Each grid cell averages the recall error of
``trials`` independent random sequences, each learned with the offline
(pseudo-inverse) readout and regenerated from its first symbol.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .readout import DEFAULT_ETA
from .regimes import recall_error, recall_generative, train_offline_generative
from .reservoir import ModelConfig, ReservoirKind, init_input_matrix, make_reservoir
from .rng import RandomStream

CSV_HEADER = ("axis1", "axis2", "mean_error", "std_error", "trials")


def _half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def run_trial(T: int, N: int, M: int, alpha: float, reservoir_kind: ReservoirKind,
              seed: int, eta: float = DEFAULT_ETA) -> float:
    """Recall error for one random length-T sequence over M symbols.

    Draw order from ``RandomStream(seed)``: the sequence, then U, then Q
    (dense reservoirs only).
    """
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    if not 2 <= M <= N:
        raise ValueError(f"need 2 <= M <= N, got M={M}, N={N}")
    rng = RandomStream(seed)
    seq = rng.integers(M, T)
    U = init_input_matrix(M, N, rng)
    reservoir = make_reservoir(reservoir_kind, N, rng)
    config = ModelConfig(N=N, alpha=alpha, eta=eta, reservoir_kind=reservoir_kind, seed=seed)
    model = train_offline_generative(seq, config, M, U=U, reservoir=reservoir)
    return recall_error(seq, recall_generative(model, int(seq[0]), T))


def trial_seed(base_seed: int, i: int, j: int, trial: int) -> int:
    """64-bit seed for one trial, mixed from the base seed and grid coordinates."""
    ss = np.random.SeedSequence([int(base_seed), i, j, trial])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SweepConfig:
    """One capacity sweep. Exactly one of rho/alpha may be a grid.

    ``rho`` and ``alpha`` are either a float (held fixed) or a sequence of
    values (the second surface axis). ``theta`` is the recall threshold that
    defines capacity; it is recorded with the results but surfaces always
    hold the raw error.
    """

    T: int
    trials: int
    nu_grid: tuple[float, ...]
    rho: float | tuple[float, ...] = 0.1
    alpha: float | tuple[float, ...] = 1.0
    reservoir_kind: ReservoirKind = "dense"
    base_seed: int = 0
    theta: float = 0.05
    eta: float = DEFAULT_ETA

    def __post_init__(self):
        object.__setattr__(self, "nu_grid", tuple(float(v) for v in self.nu_grid))
        for name in ("rho", "alpha"):
            val = getattr(self, name)
            if not np.isscalar(val):
                object.__setattr__(self, name, tuple(float(v) for v in val))
        if self.T < 2:
            raise ValueError(f"T must be >= 2, got {self.T}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.nu_grid:
            raise ValueError("nu grid is empty")
        if isinstance(self.rho, tuple) and isinstance(self.alpha, tuple):
            raise ValueError("only one of rho and alpha may vary")
        for v in self.nu_grid + self._as_tuple(self.rho):
            if not 0.0 < v <= 1.0:
                raise ValueError(f"nu and rho values must lie in (0, 1], got {v}")
        for v in self._as_tuple(self.alpha):
            if not 0.0 < v <= 1.0:
                raise ValueError(f"alpha values must lie in (0, 1], got {v}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if self.reservoir_kind not in ("dense", "cyclic"):
            raise ValueError(f"unknown reservoir kind {self.reservoir_kind!r}")

    @staticmethod
    def _as_tuple(v) -> tuple[float, ...]:
        return v if isinstance(v, tuple) else (float(v),)

    @property
    def axis2_name(self) -> str:
        return "alpha" if isinstance(self.alpha, tuple) else "rho"

    @property
    def axis2(self) -> tuple[float, ...]:
        return self._as_tuple(self.alpha if self.axis2_name == "alpha" else self.rho)

    def cell(self, i: int, j: int) -> Optional[tuple[int, int, float]]:
        """(N, M, alpha) for grid cell (i, j), or None when M > N."""
        nu = self.nu_grid[i]
        if self.axis2_name == "alpha":
            rho, alpha = float(self.rho), self.axis2[j]
        else:
            rho, alpha = self.axis2[j], float(self.alpha)
        N = max(1, _half_up(nu * self.T))
        M = max(2, _half_up(rho * self.T))
        if M > N:
            return None
        return N, M, alpha


@dataclass
class ErrorSurface:
    axis1_name: str
    axis1: np.ndarray
    axis2_name: str
    axis2: np.ndarray
    mean_error: np.ndarray  # NaN where the cell is absent
    std_error: np.ndarray
    trials: np.ndarray  # per-cell trial count, 0 where absent

    @property
    def shape(self) -> tuple[int, int]:
        return self.mean_error.shape

    def present(self) -> np.ndarray:
        return self.trials > 0


def _run_job(args):
    return run_trial(*args)


def sweep(config: SweepConfig, jobs: int = 1,
          progress: Optional[Callable[[int, int], None]] = None) -> ErrorSurface:
    """Evaluate every valid grid cell, ``config.trials`` times each.

    Results do not depend on ``jobs``; seeds are derived per trial.
    """
    n1, n2 = len(config.nu_grid), len(config.axis2)
    tasks, where = [], []
    for i in range(n1):
        for j in range(n2):
            cell = config.cell(i, j)
            if cell is None:
                continue
            N, M, alpha = cell
            for k in range(config.trials):
                seed = trial_seed(config.base_seed, i, j, k)
                tasks.append((config.T, N, M, alpha, config.reservoir_kind, seed, config.eta))
                where.append((i, j))

    errors = np.empty(len(tasks))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for n, eps in enumerate(pool.map(_run_job, tasks, chunksize=max(1, config.trials // 4))):
                errors[n] = eps
                if progress:
                    progress(n + 1, len(tasks))
    else:
        for n, task in enumerate(tasks):
            errors[n] = run_trial(*task)
            if progress:
                progress(n + 1, len(tasks))

    mean = np.full((n1, n2), np.nan)
    std = np.full((n1, n2), np.nan)
    counts = np.zeros((n1, n2), dtype=np.int64)
    per_cell: dict[tuple[int, int], list[float]] = {}
    for (i, j), eps in zip(where, errors):
        per_cell.setdefault((i, j), []).append(eps)
    for (i, j), vals in per_cell.items():
        v = np.asarray(vals)
        mean[i, j] = v.mean()
        std[i, j] = v.std()
        counts[i, j] = v.size
    return ErrorSurface("nu", np.asarray(config.nu_grid), config.axis2_name,
                        np.asarray(config.axis2), mean, std, counts)


def derivative_and_transitions(surface: ErrorSurface) -> tuple[np.ndarray, np.ndarray]:
    """d(error)/d(nu) on the grid and, per axis-2 value, the nu of steepest change.

    Central differences inside the grid, one-sided at the edges. The
    transition is the first nu (lowest) where |d error / d nu| reaches its
    maximum; NaN when a column has no finite derivative.
    """
    nu = np.asarray(surface.axis1, dtype=float)
    if nu.size < 3:
        raise ValueError("need at least 3 nu points for derivatives")
    deriv = np.gradient(surface.mean_error, nu, axis=0)
    transitions = np.full(surface.mean_error.shape[1], np.nan)
    for j in range(deriv.shape[1]):
        mag = np.abs(deriv[:, j])
        if not np.any(np.isfinite(mag)):
            continue
        peak = np.nanmax(mag)
        # relative tie band absorbs rounding in uniform-grid differences
        ties = np.flatnonzero(mag >= peak * (1.0 - 1e-9))
        transitions[j] = nu[ties[0]]
    return deriv, transitions


def _fmt_axis(v: float) -> str:
    return f"{v:.6g}"


def write_surface_csv(surface: ErrorSurface, destination) -> None:
    """Row-major CSV, one line per cell; absent cells have empty error fields."""
    path = Path(destination)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            n1, n2 = surface.shape
            for i in range(n1):
                for j in range(n2):
                    n = int(surface.trials[i, j])
                    if n > 0:
                        m, s = repr(float(surface.mean_error[i, j])), repr(float(surface.std_error[i, j]))
                    else:
                        m = s = ""
                    w.writerow((_fmt_axis(surface.axis1[i]), _fmt_axis(surface.axis2[j]), m, s, n))
    except OSError as exc:
        raise OSError(f"cannot write surface CSV to {path}: {exc}") from exc


def read_surface_csv(source, axis1_name: str = "nu", axis2_name: str = "rho") -> ErrorSurface:
    rows = []
    with Path(source).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        rows = list(reader)
    a1 = sorted({float(r[0]) for r in rows})
    a2 = sorted({float(r[1]) for r in rows})
    mean = np.full((len(a1), len(a2)), np.nan)
    std = np.full_like(mean, np.nan)
    counts = np.zeros(mean.shape, dtype=np.int64)
    for r in rows:
        i, j = a1.index(float(r[0])), a2.index(float(r[1]))
        if r[2]:
            mean[i, j], std[i, j] = float(r[2]), float(r[3])
        counts[i, j] = int(r[4])
    return ErrorSurface(axis1_name, np.array(a1), axis2_name, np.array(a2), mean, std, counts)


def write_sweep_meta(config: SweepConfig, destination) -> None:
    """Sidecar JSON recording the sweep configuration and axis names."""
    meta = asdict(config)
    meta["axis1"] = "nu"
    meta["axis2"] = config.axis2_name
    Path(destination).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
