"""Decoding high-rate concatenated stabilizer codes under bit-flip noise."""
from .codes import LogicalClass, StabilizerCode, build_css, get_code, quantum_hamming_15_7_3
from .concatenation import ConcatenatedCode, SyndromeTree, build_concatenated, extract_syndromes, true_logical_class
from .pauli import PauliOperator

__all__ = [
    "ConcatenatedCode",
    "LogicalClass",
    "PauliOperator",
    "StabilizerCode",
    "SyndromeTree",
    "build_concatenated",
    "build_css",
    "extract_syndromes",
    "get_code",
    "quantum_hamming_15_7_3",
    "true_logical_class",
]
