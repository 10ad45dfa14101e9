"""Command-line interface.

Exit codes: 0 success, 2 usage or input error, 3 operational failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import SweepConfig, sweep, write_surface_csv, write_sweep_meta
from .corpus import SHERLOCK
from .crypto import (
    CipherText,
    CryptoParams,
    EncryptionError,
    decrypt,
    encrypt,
)
from .encoding import build_alphabet, decode, encode
from .modelfile import load_model, save_model
from .regimes import (
    recall_error,
    recall_generative,
    train_offline_generative,
    train_online_generative,
)
from .reservoir import ModelConfig

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 2, 3


class UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"sphererc: error: {msg}", file=sys.stderr)


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:end:count`` (inclusive) or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return (float(parts[0]),)
        if len(parts) != 3:
            raise ValueError
        start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected start:end:count") from None
    if count < 1:
        raise UsageError(f"grid count must be >= 1 in {text!r}")
    return tuple(float(v) for v in np.linspace(start, end, count))


def _read_text(path: str) -> str:
    try:
        return Path(path).read_bytes().decode("utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise UsageError(f"{path} is not valid UTF-8") from None


def _write(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from None


# ---------------------------------------------------------------------------


def cmd_learn(args) -> int:
    text = SHERLOCK if args.corpus is None else _read_text(args.corpus)
    if len(text) < 2:
        raise UsageError("corpus must contain at least 2 symbols")
    alphabet = build_alphabet(text)
    seq = encode(text, alphabet)
    T, M = len(seq), len(alphabet)
    N = args.n if args.n is not None else int(0.5 * T)
    try:
        config = ModelConfig(N=N, alpha=args.alpha, eta=args.eta,
                             reservoir_kind=args.reservoir, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if M > N:
        raise UsageError(f"input alphabet exceeds reservoir size (M={M} > N={N})")
    print(f"T={T} M={M} N={N} alpha={args.alpha} mode={args.mode} reservoir={args.reservoir}")

    t0 = time.perf_counter()
    if args.mode == "offline":
        model = train_offline_generative(seq, config, M)
        err = recall_error(seq, recall_generative(model, int(seq[0]), T))
        epochs = 0
    else:
        def progress(epoch, e):
            print(f"epoch {epoch} err={e:.6g}", file=sys.stderr)

        model, report = train_online_generative(seq, config, M, args.max_epochs,
                                                callback=progress if args.verbose else None)
        err, epochs = report.final_error, report.epochs
    model.input_alphabet = model.output_alphabet = alphabet
    print(f"epochs={epochs} err={err:.6g} time={time.perf_counter() - t0:.2f}s")

    out = args.out or (str(args.corpus) + ".hrcm" if args.corpus else "sherlock.hrcm")
    try:
        save_model(model, out)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror or exc}") from None
    print(f"model written to {out}")
    return EXIT_OK


def cmd_recall(args) -> int:
    try:
        model = load_model(args.model)
    except OSError as exc:
        raise UsageError(f"cannot read {args.model}: {exc.strerror or exc}") from None
    alphabet = model.input_alphabet
    if alphabet is None:
        raise UsageError("model has no stored alphabet")
    if args.start not in alphabet:
        raise UsageError(f"start symbol {args.start!r} not in model alphabet")
    if args.length < 1:
        raise UsageError("length must be >= 1")
    out = recall_generative(model, alphabet.index(args.start), args.length)
    sys.stdout.write(decode(out, alphabet) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.t < 2:
        raise UsageError("--t must be >= 2")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.rho_grid is not None and args.alpha_grid is not None:
        raise UsageError("only one of --rho-grid and --alpha-grid may be given")
    rho = parse_grid(args.rho_grid) if args.rho_grid is not None else args.rho
    alpha = parse_grid(args.alpha_grid) if args.alpha_grid is not None else args.alpha
    try:
        config = SweepConfig(T=args.t, trials=args.trials, nu_grid=parse_grid(args.nu_grid),
                             rho=rho, alpha=alpha, reservoir_kind=args.reservoir,
                             base_seed=args.seed, theta=args.theta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    last = [0.0]

    def progress(done, total):
        now = time.perf_counter()
        if done == total or now - last[0] > 1.0:
            last[0] = now
            print(f"\r{done}/{total} trials", end="" if done < total else "\n",
                  file=sys.stderr, flush=True)

    surface = sweep(config, jobs=args.jobs, progress=progress)
    write_surface_csv(surface, args.out)
    write_sweep_meta(config, args.out + ".meta.json")
    print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_encrypt(args) -> int:
    if not args.password:
        raise UsageError("password must be non-empty")
    text = _read_text(args.infile)
    params = CryptoParams(n_factor=args.n_factor, alpha=args.alpha, max_length=args.max_length)
    try:
        cipher = encrypt(text, args.password, params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(args.outfile, cipher.to_bytes())
    return EXIT_OK


def cmd_decrypt(args) -> int:
    if not args.password:
        raise UsageError("password must be non-empty")
    try:
        data = Path(args.infile).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {args.infile}: {exc.strerror or exc}") from None
    cipher = CipherText.from_bytes(data)
    _write(args.outfile, decrypt(cipher, args.password).encode("utf-8"))
    return EXIT_OK


# ---------------------------------------------------------------------------


def _unit_interval(text: str) -> float:
    v = float(text)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sphererc", description="Reservoir computing on the unit hypersphere.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("learn", help="train a generative model on a text corpus")
    s.add_argument("corpus", nargs="?", help="UTF-8 text file (default: bundled Sherlock Holmes paragraph)")
    s.add_argument("-o", "--out", help="model output path (default: <corpus>.hrcm)")
    s.add_argument("--n", type=int, help="reservoir size (default: T/2)")
    s.add_argument("--alpha", type=_unit_interval, default=0.5)
    s.add_argument("--mode", choices=("offline", "online"), default="offline")
    s.add_argument("--reservoir", choices=("cyclic", "dense"), default="cyclic")
    s.add_argument("--seed", type=int, default=12345)
    s.add_argument("--eta", type=float, default=1e-7)
    s.add_argument("--max-epochs", type=int, default=None, help="online epoch cap (default: T)")
    s.add_argument("-v", "--verbose", action="store_true", help="per-epoch progress on stderr")
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("recall", help="regenerate a sequence from a trained model")
    s.add_argument("model")
    s.add_argument("--start", required=True, help="first symbol")
    s.add_argument("--length", type=int, required=True)
    s.set_defaults(func=cmd_recall)

    s = sub.add_parser("sweep", help="memory-capacity error surface to CSV")
    s.add_argument("--t", type=int, required=True, help="sequence length T")
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--nu-grid", required=True, help="start:end:count, inclusive")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--rho-grid")
    g.add_argument("--rho", type=_unit_interval, default=0.1)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--alpha-grid")
    g.add_argument("--alpha", type=_unit_interval, default=1.0)
    s.add_argument("--reservoir", choices=("cyclic", "dense"), default="dense")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--theta", type=float, default=0.05, help="recall threshold recorded in the sidecar")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    for name, func, helptext in (("encrypt", cmd_encrypt, "encrypt a text file"),
                                 ("decrypt", cmd_decrypt, "decrypt a ciphertext file")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--in", dest="infile", required=True)
        s.add_argument("--out", dest="outfile", required=True)
        s.add_argument("--password", required=True)
        if name == "encrypt":
            s.add_argument("--n-factor", type=float, default=2.0, help="N = n_factor * T")
            s.add_argument("--alpha", type=_unit_interval, default=0.5)
            s.add_argument("--max-length", type=int, default=2048)
        s.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        # EncodingError, ModelFormatError, CipherFormatError are ValueErrors
        _err(str(exc))
        return EXIT_USAGE
    except (EncryptionError, OSError, ArithmeticError) as exc:
        _err(str(exc))
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
