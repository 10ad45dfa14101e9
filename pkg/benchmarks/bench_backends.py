"""Compare the numba and pure-numpy kernels.

    python benchmarks/bench_backends.py [--repeats 5] [--sizes 256,1024,4096]

Prints CSV: kernel,reservoir,N,backend,seconds (best of repeats).
"""

import argparse
import csv
import sys
import time

import numpy as np

from sphererc import _kernels
from sphererc.reservoir import CyclicShift, init_dense_orthogonal, init_input_matrix
from sphererc.rng import RandomStream

T, M, K = 1000, 40, 40


def best_of(fn, repeats):
    fn()  # warm-up, includes numba compilation
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--sizes", default="256,1024,4096")
    args = p.parse_args(argv)

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(("kernel", "reservoir", "N", "backend", "seconds"))
    for N in (int(v) for v in args.sizes.split(",")):
        rng = RandomStream(N)
        seq = rng.integers(M, T)
        UT = np.ascontiguousarray(init_input_matrix(M, N, rng).T)
        W = rng.normal((K, N))
        for kind in ("cyclic", "dense"):
            Q = CyclicShift(N).matrix if kind == "cyclic" else init_dense_orthogonal(N, rng).matrix
            X, _ = _kernels.drive(seq, UT, Q, 0.5)
            for backend in _kernels.BACKENDS:
                with _kernels.use_backend(backend):
                    cases = {
                        "drive": lambda: _kernels.drive(seq, UT, Q, 0.5),
                        "recall": lambda: _kernels.recall(int(seq[0]), T, UT, Q, W, 0.5),
                    }
                    if kind == "cyclic":  # the epoch kernel does not touch the reservoir
                        cases["online_epoch"] = lambda: _kernels.online_epoch(X[:-1], seq[1:], W.copy())
                    for name, fn in cases.items():
                        out.writerow((name, kind, N, backend, f"{best_of(fn, args.repeats):.6f}"))
                        sys.stdout.flush()


if __name__ == "__main__":
    main()
