"""Symmetry classification and exceptional-point sweeps for small non-Hermitian matrices."""

__version__ = "0.1.0"
