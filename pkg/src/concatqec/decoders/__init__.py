"""Decoders for concatenated codes under bit-flip noise."""
from __future__ import annotations

from dataclasses import dataclass

from ..codes import LogicalClass
from ..concatenation import ConcatenatedCode, SyndromeTree
from .candidates import base_candidates
from .chase import (
    CandidateError,
    assemble_candidate,
    generate_test_patterns,
    outer_correct,
    select_blocks,
)
from .config import DecoderConfig, DecoderSpec, format_decoder, parse_decoder
from .hdd import hdd_decode, hdd_decode_batch
from .lmld import lmld_ca_decode
from .oracle import OracleLimitError, brute_force_dqmld
from .softlist import SoftList, class_list, reliability
from .symbol_map import symbol_map_decode

__all__ = [
    "CandidateError",
    "Decoder",
    "DecoderConfig",
    "DecoderSpec",
    "OracleLimitError",
    "SoftList",
    "assemble_candidate",
    "base_candidates",
    "brute_force_dqmld",
    "class_list",
    "format_decoder",
    "generate_test_patterns",
    "hdd_decode",
    "hdd_decode_batch",
    "lmld_ca_decode",
    "make_decoder",
    "outer_correct",
    "parse_decoder",
    "reliability",
    "select_blocks",
    "symbol_map_decode",
]


@dataclass(frozen=True)
class Decoder:
    """A decoder bound to a code and a bit-flip probability."""

    spec: DecoderSpec
    ccode: ConcatenatedCode
    p: float

    @property
    def name(self) -> str:
        return self.spec.name

    def decode(self, tree: SyndromeTree) -> LogicalClass:
        cfg = self.spec.config
        if self.name == "hdd":
            return hdd_decode(self.ccode, tree)
        if self.name == "symbol-map":
            return symbol_map_decode(self.ccode, tree, cfg, self.p)[0]
        if self.name == "lmld-ca":
            return lmld_ca_decode(self.ccode, tree, cfg, self.p)[0]
        return brute_force_dqmld(self.ccode, tree, self.p, limit=cfg.oracle_limit)[0]


def make_decoder(spec: str | DecoderSpec, ccode: ConcatenatedCode, p: float) -> Decoder:
    if isinstance(spec, str):
        spec = parse_decoder(spec)
    if spec.name in ("symbol-map", "lmld-ca"):
        spec.config.validate_for(ccode.base)
    if spec.name == "oracle" and (1 << ccode.n_total) > spec.config.oracle_limit:
        raise OracleLimitError(f"2^{ccode.n_total} patterns exceed the oracle limit of {spec.config.oracle_limit}")
    return Decoder(spec, ccode, p)
