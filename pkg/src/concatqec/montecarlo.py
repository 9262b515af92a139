"""Monte Carlo estimation of word-error rates under bit-flip noise.

Randomness is counter based: the stream of point ``i`` under master seed ``s``
is Philox keyed by ``(s, i)``, and trial ``t`` reads its own fixed slot of it.
Any subset of trials can therefore be regenerated independently, which makes
the results identical for every worker count.
"""
from __future__ import annotations

import configparser
import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .codes import get_code
from .concatenation import ConcatenatedCode, build_concatenated, extract_batch, tree_from_batch
from .decoders import DecoderSpec, format_decoder, hdd_decode_batch, make_decoder, parse_decoder
from .decoders.oracle import OracleLimitError
from .pauli import PauliOperator

DEFAULT_MAX_TRIALS = 10**8
DEFAULT_BATCH = 1000
WILSON_Z = 1.959963984540054  # two-sided 95%
CSV_COLUMNS = (
    "code",
    "levels",
    "decoder",
    "M",
    "D",
    "wmax",
    "p",
    "trials",
    "errors",
    "error_rate",
    "ci_low",
    "ci_high",
    "seconds",
    "seed",
)


class ConfigError(ValueError):
    """An experiment configuration is missing a key or has an invalid value."""


# -- sampling ----------------------------------------------------------------------


def _slot(n: int) -> int:
    # Philox emits blocks of four 64-bit words; padding each trial to a whole
    # number of blocks lets ``advance`` jump straight to it.
    return 4 * math.ceil(max(n, 1) / 4)


def _generator(seed: int, point_index: int, first_trial: int, n: int) -> np.random.Generator:
    bitgen = np.random.Philox(key=np.array([seed, point_index], dtype=np.uint64))
    bitgen.advance(first_trial * _slot(n) // 4)
    return np.random.Generator(bitgen)


def sample_errors(n: int, p: float, first_trial: int, count: int, seed: int, point_index: int = 0) -> np.ndarray:
    """``(count, n)`` uint8 bit-flip patterns for trials ``first_trial, first_trial+1, ...``."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if first_trial < 0 or count < 0:
        raise ValueError("trial indices must be non-negative")
    slot = _slot(n)
    u = _generator(seed, point_index, first_trial, n).random(count * slot).reshape(count, slot)
    return (u[:, :n] < p).astype(np.uint8)


def sample_error(n: int, p: float, trial_index: int, seed: int, point_index: int = 0) -> PauliOperator:
    """The X error of one trial; a pure function of its arguments."""
    bits = sample_errors(n, p, trial_index, 1, seed, point_index)[0]
    x = 0
    for q in np.flatnonzero(bits):
        x |= 1 << int(q)
    return PauliOperator(n, x, 0)


# -- statistics ----------------------------------------------------------------------


def wilson_interval(errors: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    phat = errors / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, min(centre - half, phat)), min(1.0, max(centre + half, phat))


@dataclass(frozen=True)
class AggregateStats:
    p: float
    trials: int
    errors: int
    seconds: float = 0.0
    error: str | None = None

    def __post_init__(self):
        if not 0 <= self.errors <= self.trials:
            raise ValueError(f"need 0 <= errors <= trials, got {self.errors}/{self.trials}")

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials if self.trials else 0.0

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.trials)

    @property
    def failed(self) -> bool:
        return self.error is not None


# -- configuration -------------------------------------------------------------------


@dataclass(frozen=True)
class SimConfig:
    code: str
    levels: int
    decoder: str
    ps: tuple[float, ...]
    min_errors: int
    max_trials: int = DEFAULT_MAX_TRIALS
    seed: int = 0
    workers: int = 1
    batch: int = DEFAULT_BATCH
    name: str = ""
    spec: DecoderSpec = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ps", tuple(float(p) for p in self.ps))
        if self.levels < 1:
            raise ConfigError(f"levels must be >= 1, got {self.levels}")
        for p in self.ps:
            if not 0 < p < 0.5:
                raise ConfigError(f"p must satisfy 0 < p < 1/2, got {p}")
        if self.min_errors < 1:
            raise ConfigError(f"min_errors must be >= 1, got {self.min_errors}")
        if self.max_trials < self.min_errors:
            raise ConfigError(f"max_trials ({self.max_trials}) must be >= min_errors ({self.min_errors})")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.batch < 1:
            raise ConfigError(f"batch must be >= 1, got {self.batch}")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError(f"seed must lie in [0, 2^64), got {self.seed}")
        try:
            spec = parse_decoder(self.decoder)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        object.__setattr__(self, "spec", spec)


_SECTION_KEYS = {"code", "levels", "decoder", "p", "min_errors", "max_trials", "seed", "batch"}


def _parse_ps(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def parse_config(text: str, *, seed: int | None = None, workers: int = 1, max_trials: int | None = None) -> list[SimConfig]:
    """Experiments from INI text, one per section.

    ``[DEFAULT]`` values apply to every section.  ``seed`` and ``max_trials``
    given here override the file; an overriding ``max_trials`` below a
    section's ``min_errors`` lowers ``min_errors`` to match.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}".splitlines()[0]) from exc
    if not parser.sections():
        raise ConfigError("config defines no experiment sections")
    out = []
    for name in parser.sections():
        sec = parser[name]
        unknown = set(sec) - _SECTION_KEYS
        if unknown:
            raise ConfigError(f"[{name}] unknown key {sorted(unknown)[0]!r}")
        for key in ("code", "levels", "decoder", "p", "min_errors"):
            if key not in sec:
                raise ConfigError(f"[{name}] missing key {key!r}")

        def integer(key: str, default=None):
            if key not in sec:
                return default
            try:
                return int(float(sec[key])) if "e" in sec[key].lower() else int(sec[key])
            except ValueError as exc:
                raise ConfigError(f"[{name}] key {key!r} needs an integer, got {sec[key]!r}") from exc

        try:
            ps = _parse_ps(sec["p"])
        except ValueError as exc:
            raise ConfigError(f"[{name}] key 'p' needs a list of numbers, got {sec['p']!r}") from exc
        if not ps:
            raise ConfigError(f"[{name}] key 'p' is empty")
        min_errors = integer("min_errors")
        if max_trials is not None and min_errors is not None:
            min_errors = min(min_errors, max_trials)
        try:
            cfg = SimConfig(
                code=sec["code"].strip(),
                levels=integer("levels"),
                decoder=sec["decoder"].strip(),
                ps=ps,
                min_errors=min_errors,
                max_trials=max_trials if max_trials is not None else integer("max_trials", DEFAULT_MAX_TRIALS),
                seed=seed if seed is not None else integer("seed", 0),
                workers=workers,
                batch=integer("batch", DEFAULT_BATCH),
                name=name,
            )
        except ConfigError as exc:
            raise ConfigError(f"[{name}] {exc}") from exc
        try:
            get_code(cfg.code)
        except (ValueError, OSError) as exc:
            raise ConfigError(f"[{name}] key 'code': {exc}") from exc
        out.append(cfg)
    return out


def load_config(path: str | Path, **overrides) -> list[SimConfig]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, **overrides)


# -- trial loop ----------------------------------------------------------------------


@lru_cache(maxsize=16)
def _ccode(code: str, levels: int) -> ConcatenatedCode:
    return build_concatenated(get_code(code), levels)


def count_errors(code: str, levels: int, decoder: str, p: float, seed: int, point_index: int, start: int, stop: int) -> int:
    """Word errors among trials ``[start, stop)`` of one point."""
    ccode = _ccode(code, levels)
    errors = sample_errors(ccode.n_total, p, start, stop - start, seed, point_index)
    syn, true_bits = extract_batch(ccode, errors)
    dec = make_decoder(decoder, ccode, p)
    if dec.name == "hdd":
        return int(np.any(hdd_decode_batch(ccode, syn) != true_bits, axis=1).sum())
    weights = [1 << i for i in range(ccode.k_total)]
    wrong = 0
    for i in range(stop - start):
        true_x = sum(w for w, b in zip(weights, true_bits[i]) if b)
        est = dec.decode(tree_from_batch(syn, i))
        wrong += est.x != true_x or est.z != 0
    return wrong


def _split(start: int, stop: int, parts: int) -> list[tuple[int, int]]:
    edges = np.linspace(start, stop, min(parts, stop - start) + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_point(
    cfg: SimConfig,
    p: float,
    point_index: int = 0,
    *,
    pool: ProcessPoolExecutor | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> AggregateStats:
    """Run batches until ``min_errors`` word errors or ``max_trials`` trials.

    The stopping rule is checked after each whole batch, so the result does not
    depend on how a batch is split across workers.
    """
    ccode = _ccode(cfg.code, cfg.levels)
    started = time.perf_counter()
    try:
        make_decoder(cfg.spec, ccode, p)
    except (OracleLimitError, ValueError) as exc:
        return AggregateStats(p, 0, 0, 0.0, error=str(exc))
    trials = errors = 0
    args = (cfg.code, cfg.levels, cfg.decoder, p, cfg.seed, point_index)
    while errors < cfg.min_errors and trials < cfg.max_trials:
        stop = min(trials + cfg.batch, cfg.max_trials)
        if pool is None:
            errors += count_errors(*args, trials, stop)
        else:
            futures = [pool.submit(count_errors, *args, a, b) for a, b in _split(trials, stop, cfg.workers)]
            errors += sum(f.result() for f in futures)
        trials = stop
        if progress is not None:
            progress(trials, errors)
    return AggregateStats(p, trials, errors, time.perf_counter() - started)


def run_sweep(cfg: SimConfig, *, point_offset: int = 0, progress=None) -> list[AggregateStats]:
    """One :class:`AggregateStats` per ``p``, in input order.

    A failing point is reported through ``AggregateStats.error`` and the
    remaining points still run.
    """
    if not cfg.ps:
        return []
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        out = []
        for i, p in enumerate(cfg.ps):
            try:
                out.append(run_point(cfg, p, point_offset + i, pool=pool, progress=progress))
            except Exception as exc:  # noqa: BLE001 - keep the sweep going
                out.append(AggregateStats(p, 0, 0, 0.0, error=f"{type(exc).__name__}: {exc}"))
        return out
    finally:
        if pool is not None:
            pool.shutdown()


# -- output --------------------------------------------------------------------------


def csv_row(cfg: SimConfig, stats: AggregateStats, *, timing: bool = True) -> dict[str, str]:
    dcfg = cfg.spec.config
    listy = cfg.spec.name in ("symbol-map", "lmld-ca")
    lo, hi = stats.ci
    return {
        "code": cfg.code,
        "levels": str(cfg.levels),
        "decoder": cfg.spec.name,
        "M": str(dcfg.flips) if listy else "",
        "D": str(dcfg.list_size) if listy else "",
        "wmax": str(dcfg.resolved_w_max(get_code(cfg.code))) if listy else "",
        "p": repr(stats.p),
        "trials": str(stats.trials),
        "errors": str(stats.errors),
        "error_rate": f"{stats.error_rate:.6e}",
        "ci_low": f"{lo:.6e}",
        "ci_high": f"{hi:.6e}",
        "seconds": f"{stats.seconds:.3f}" if timing else "0",
        "seed": str(cfg.seed),
    }


def write_csv(rows: Iterable[dict[str, str]], out: io.TextIOBase) -> None:
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def describe(cfg: SimConfig) -> str:
    return f"{cfg.name or cfg.code}: {cfg.code}^{cfg.levels} {format_decoder(cfg.spec)}"


def summary_line(cfg: SimConfig, stats: AggregateStats) -> str:
    if stats.failed:
        return f"{describe(cfg)} p={stats.p:g} FAILED: {stats.error}"
    lo, hi = stats.ci
    return (
        f"{describe(cfg)} p={stats.p:g} trials={stats.trials} errors={stats.errors} "
        f"rate={stats.error_rate:.4e} ci=[{lo:.4e}, {hi:.4e}] {stats.seconds:.1f}s"
    )


def run_experiments(configs: Sequence[SimConfig], *, timing: bool = True, log=None) -> tuple[str, bool]:
    """CSV text for all experiments and whether every point succeeded.

    Points are numbered consecutively across experiments so each draws an
    independent stream.
    """
    rows, ok, offset = [], True, 0
    for cfg in configs:
        for stats in run_sweep(cfg, point_offset=offset):
            if log is not None:
                log(summary_line(cfg, stats))
            if stats.failed:
                ok = False
            else:
                rows.append(csv_row(cfg, stats, timing=timing))
        offset += len(cfg.ps)
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue(), ok
