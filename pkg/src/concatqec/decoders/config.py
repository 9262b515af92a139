"""Decoder parameters and the ``name:key=value,...`` selection strings."""
from __future__ import annotations

from dataclasses import dataclass, replace

DECODER_NAMES = ("hdd", "symbol-map", "lmld-ca", "oracle")

_KEYS = {
    "m": "flips",
    "d": "list_size",
    "wmax": "w_max",
    "tpcap": "tp_cap",
    "exh": "exhaustive_threshold",
    "limit": "oracle_limit",
    "ties": "ties",
}


@dataclass(frozen=True)
class DecoderConfig:
    flips: int = 8
    list_size: int = 2
    tp_cap: int | None = None
    w_max: int | None = None  # None: the base code's distance hint, else 3
    exhaustive_threshold: int = 0
    oracle_limit: int = 1 << 20
    ties: bool = True  # lists keep every entry tied with their last one

    def __post_init__(self):
        if self.flips < 0:
            raise ValueError(f"M must be >= 0, got {self.flips}")
        if self.list_size < 1:
            raise ValueError(f"D must be >= 1, got {self.list_size}")
        if self.tp_cap is not None and self.tp_cap < 1:
            raise ValueError(f"tpcap must be >= 1, got {self.tp_cap}")
        if self.w_max is not None and self.w_max < 0:
            raise ValueError(f"wmax must be >= 0, got {self.w_max}")

    def resolved_w_max(self, base) -> int:
        if self.w_max is not None:
            return self.w_max
        return base.distance_hint if base.distance_hint is not None else 3

    def validate_for(self, base) -> None:
        if self.flips > base.n:
            raise ValueError(f"M={self.flips} exceeds the {base.n} inner blocks per level")


@dataclass(frozen=True)
class DecoderSpec:
    name: str
    config: DecoderConfig

    def __str__(self) -> str:
        return format_decoder(self)


def parse_decoder(text: str) -> DecoderSpec:
    """Parse e.g. ``"lmld-ca:M=8,D=2,wmax=3"`` (keys are case-insensitive)."""
    name, _, params = text.strip().partition(":")
    name = name.strip().lower()
    if name not in DECODER_NAMES:
        raise ValueError(f"unknown decoder {name!r}; choose from {', '.join(DECODER_NAMES)}")
    fields: dict[str, int | None] = {}
    for item in filter(None, (p.strip() for p in params.split(","))):
        key, eq, value = item.partition("=")
        attr = _KEYS.get(key.strip().lower())
        if not eq or attr is None:
            raise ValueError(f"bad decoder parameter {item!r}; known keys: M, D, wmax, tpcap, exh, limit, ties")
        value = value.strip()
        try:
            fields[attr] = None if value.lower() == "none" else int(value)
            if attr == "ties":
                if fields[attr] not in (0, 1):
                    raise ValueError
                fields[attr] = bool(fields[attr])
        except ValueError as exc:
            raise ValueError(f"decoder parameter {key.strip()} needs an integer (0/1 for ties), got {value!r}") from exc
    return DecoderSpec(name, DecoderConfig(**fields))


def format_decoder(spec: DecoderSpec) -> str:
    cfg, default = spec.config, DecoderConfig()
    parts = []
    for key, attr in _KEYS.items():
        value = getattr(cfg, attr)
        if value != getattr(default, attr):
            shown = int(value) if isinstance(value, bool) else value
            parts.append(f"{'M' if key == 'm' else 'D' if key == 'd' else key}={shown}")
    return spec.name + (":" + ",".join(parts) if parts else "")


def with_overrides(cfg: DecoderConfig, **kwargs) -> DecoderConfig:
    return replace(cfg, **kwargs)
