"""Command-line front end: ``concatqec {simulate,decode,oracle-check,codes}``.

Exit codes: 0 success, 1 invalid input, 2 some simulation points failed (or
an oracle check missed its thresholds).
"""
from __future__ import annotations

import argparse
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .codes import SHIPPED_CODES, get_code, syndrome_bits
from .concatenation import build_concatenated, extract_batch, extract_syndromes, tree_from_batch, true_logical_class
from .decoders import DecoderConfig, OracleLimitError, brute_force_dqmld, lmld_ca_decode, make_decoder
from .montecarlo import ConfigError, load_config, run_experiments, sample_errors
from .pauli import PauliOperator

WORKERS_ENV = "CONCATQEC_WORKERS"
ORACLE_AGREEMENT = 0.99
ORACLE_GAP = 0.05


class UsageError(Exception):
    """Invalid input; reported as a single line with exit code 1."""


def _shipped_config(name: str) -> Path | None:
    stem = name[:-4] if name.endswith(".ini") else name
    ref = resources.files("concatqec") / "configs" / f"{stem}.ini"
    return Path(str(ref)) if ref.is_file() else None


def resolve_config(name: str) -> Path:
    path = Path(name)
    if path.is_file():
        return path
    shipped = _shipped_config(name)
    if shipped is None:
        raise UsageError(f"config {name!r} is neither a file nor a shipped config")
    return shipped


def _workers(flag: int | None) -> int:
    if flag is not None:
        value, origin = flag, "--workers"
    elif os.environ.get(WORKERS_ENV):
        try:
            value, origin = int(os.environ[WORKERS_ENV]), WORKERS_ENV
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer, got {os.environ[WORKERS_ENV]!r}") from None
    else:
        return 1
    if value < 1:
        raise UsageError(f"{origin} must be >= 1, got {value}")
    return value


def _code(spec: str, levels: int):
    if levels < 1:
        raise UsageError(f"--levels must be >= 1, got {levels}")
    try:
        return build_concatenated(get_code(spec), levels)
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from exc


def _probability(p: float) -> float:
    if not 0 < p < 1:
        raise UsageError(f"--p must lie strictly between 0 and 1, got {p}")
    return p


# -- commands ----------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    path = resolve_config(args.config)
    try:
        configs = load_config(path, seed=args.seed, workers=_workers(args.workers), max_trials=args.max_trials)
    except ConfigError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    text, ok = run_experiments(configs, timing=not args.no_timing, log=lambda line: print(line, file=sys.stderr, flush=True))
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return 0 if ok else 2


def _read_error(text: str, n: int) -> PauliOperator:
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read error file {text[1:]}: {exc.strerror}") from exc
    text = "".join(text.split())
    try:
        op = PauliOperator.from_string(text)
    except ValueError as exc:
        raise UsageError(f"malformed Pauli string: {exc}") from exc
    if op.n != n:
        raise UsageError(f"error has {op.n} qubits, the code has {n}")
    return op


def cmd_decode(args) -> int:
    ccode = _code(args.code, args.levels)
    p = _probability(args.p)
    error = _read_error(args.error, ccode.n_total)
    try:
        dec = make_decoder(args.decoder, ccode, p)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if dec.name != "hdd" and error.z:
        raise UsageError(f"{dec.name} decodes bit-flip (X) errors only")
    tree = extract_syndromes(ccode, error)
    true = true_logical_class(ccode, error)
    estimate = dec.decode(tree)
    for t in range(1, ccode.levels + 1):
        words = ["".join(map(str, syndrome_bits(ccode.base, int(s)))) for s in tree.level(t)]
        print(f"level {t} syndromes: {' '.join(words)}")
    print(f"estimate: {estimate}")
    print(f"true:     {true}")
    print("success" if estimate == true else "failure")
    return 0


def oracle_config(ccode) -> DecoderConfig:
    """LMLD-CA settings that leave no restriction at the supported sizes."""
    base = ccode.base
    return DecoderConfig(flips=base.n, list_size=1 << min(base.k, 20), exhaustive_threshold=base.n)


def cmd_oracle_check(args) -> int:
    ccode = _code(args.code, args.levels)
    p = _probability(args.p)
    if args.samples < 0:
        raise UsageError(f"--samples must be >= 0, got {args.samples}")
    if not ccode.base.is_css:
        raise UsageError("oracle-check covers bit-flip noise on CSS codes only")
    if (1 << ccode.n_total) > args.limit:
        raise UsageError(f"{ccode.base.name} x{ccode.levels} has {ccode.n_total} qubits; the oracle enumerates at most {args.limit} patterns")
    cfg = oracle_config(ccode)
    ok = True
    if ccode.levels == 1:
        xc = ccode.base.xcode
        agree = total = 0
        for s in np.flatnonzero(xc.valid):
            tree = tree_from_batch([np.array([[s]], dtype=np.int64)], 0)
            _, mine = lmld_ca_decode(ccode, tree, cfg, p, full_output=True)
            _, exact = brute_force_dqmld(ccode, tree, p, limit=args.limit)
            same = mine.codes == exact.codes and np.allclose(mine.logp, exact.logp, rtol=1e-12, atol=1e-12)
            agree += same
            total += 1
        print(f"syndrome sweep: {agree}/{total} class distributions identical")
        ok &= agree == total
    errors = sample_errors(ccode.n_total, p, 0, args.samples, args.seed)
    levels, true_bits = extract_batch(ccode, errors)
    agree = wrong_mine = wrong_exact = 0
    for i in range(args.samples):
        tree = tree_from_batch(levels, i)
        true_x = sum(1 << j for j, b in enumerate(true_bits[i]) if b)
        mine, _ = lmld_ca_decode(ccode, tree, cfg, p)
        exact, _ = brute_force_dqmld(ccode, tree, p, limit=args.limit)
        agree += mine == exact
        wrong_mine += mine.x != true_x
        wrong_exact += exact.x != true_x
    if args.samples:
        frac = agree / args.samples
        wer_mine, wer_exact = wrong_mine / args.samples, wrong_exact / args.samples
        gap = (wer_mine - wer_exact) / wer_exact if wer_exact else (0.0 if wer_mine == 0 else float("inf"))
        print(f"samples: {args.samples}  agreement: {frac:.4%}")
        print(f"word-error rate: lmld-ca {wer_mine:.6f}  oracle {wer_exact:.6f}  relative gap {gap:+.3%}")
        ok &= frac >= ORACLE_AGREEMENT and abs(gap) <= ORACLE_GAP
    else:
        print("samples: 0 (nothing to compare)")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 2


def cmd_codes(args) -> int:
    for name in SHIPPED_CODES:
        code = get_code(name)
        d = code.distance_hint if code.distance_hint is not None else "?"
        print(f"{name:10s} [[{code.n},{code.k},{d}]]  css={'yes' if code.is_css else 'no'}  syndrome bits={code.r}")
        for r in range(1, args.levels + 1):
            if code.k == 0 or (r > 1 and code.k ** (r - 1) > 64):
                break
            cc = build_concatenated(code, r)
            blocks = " ".join(str(b) for b in cc.blocks_per_level)
            print(f"  x{r}: n={cc.n_total} k={cc.k_total} blocks per level: {blocks}")
    return 0


# -- parser -------------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="concatqec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run Monte Carlo experiments from a config file")
    sim.add_argument("--config", required=True, help="INI file, or the name of a shipped config (two_level_fig2a, three_level_fig2b)")
    sim.add_argument("--out", help="CSV output path (default: stdout)")
    sim.add_argument("--seed", type=int, help="master seed, overriding the config")
    sim.add_argument("--workers", type=int, help=f"worker processes (default: ${WORKERS_ENV} or 1); results do not depend on it")
    sim.add_argument("--no-timing", action="store_true", help="write 0 in the seconds column so output is byte-reproducible")
    sim.add_argument("--max-trials", type=int, help="cap on trials per point, overriding the config (min_errors is lowered to it if larger)")
    sim.set_defaults(func=cmd_simulate)

    dec = sub.add_parser("decode", help="decode a single error and report the outcome")
    dec.add_argument("--code", default="hamming15", help="shipped code name or code-definition file (default: hamming15)")
    dec.add_argument("--levels", type=int, default=2, help="concatenation levels (default: 2)")
    dec.add_argument("--error", required=True, help="Pauli string over all physical qubits (I/X/Y/Z, '_' or '.' for I), or @file")
    dec.add_argument("--decoder", default="lmld-ca", help="decoder string, e.g. hdd, symbol-map:M=8,D=2, lmld-ca:M=8,D=2,wmax=3 (default: lmld-ca)")
    dec.add_argument("--p", type=float, default=0.01, help="bit-flip probability assumed by soft decoders (default: 0.01)")
    dec.set_defaults(func=cmd_decode)

    orc = sub.add_parser("oracle-check", help="compare unrestricted LMLD-CA with exact enumeration")
    orc.add_argument("--code", default="code422", help="shipped code name or code-definition file (default: code422)")
    orc.add_argument("--levels", type=int, default=2, help="concatenation levels (default: 2)")
    orc.add_argument("--samples", type=int, default=1000, help="sampled errors to compare (default: 1000)")
    orc.add_argument("--seed", type=int, default=0, help="sampling seed (default: 0)")
    orc.add_argument("--p", type=float, default=0.05, help="bit-flip probability (default: 0.05)")
    orc.add_argument("--limit", type=int, default=1 << 20, help="largest number of patterns to enumerate (default: 2^20)")
    orc.set_defaults(func=cmd_oracle_check)

    cod = sub.add_parser("codes", help="list shipped codes and their concatenation geometry")
    cod.add_argument("--levels", type=int, default=3, help="show geometry up to this many levels (default: 3)")
    cod.set_defaults(func=cmd_codes)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, OracleLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
