"""Built-in 2x2 families and the similarity transform S.

Four families over real (a, b, c):

``h_original``          [[a+ic, ib], [ib, -a+ic]]      spectrum ic +- sqrt(a^2-b^2)
``h_pt_printed``        [[-a+c, ib], [ib, a+c]]        spectrum  c +- sqrt(a^2-b^2)
``h1_pt``               [[a+c, ib], [ib, -a+c]]        spectrum  c +- sqrt(a^2-b^2)
``h_similarity_exact``  S^-1 h_original S, computed     spectrum ic +- sqrt(a^2-b^2)

``h_pt_printed`` is not similar to ``h_original`` when c != 0: the diagonal
carries c instead of ic. :func:`discrepancy_report` quantifies the gap.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from nhsym.eigen import Spectrum, eigvals, spectral_distance
from nhsym.numerics import DenseMatrix, add, frobenius_norm, inverse, matmul, scale

FAMILY_PARAMS = ("a", "b", "c")


class FamilyId(str, enum.Enum):
    H_ORIGINAL = "h_original"
    H_PT_PRINTED = "h_pt_printed"
    H1_PT = "h1_pt"
    H_SIMILARITY_EXACT = "h_similarity_exact"

    @property
    def params(self) -> tuple[str, ...]:
        return FAMILY_PARAMS


@dataclass(frozen=True)
class HamiltonianParams:
    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in FAMILY_PARAMS:
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"parameter {name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_mapping(cls, values) -> "HamiltonianParams":
        missing = [k for k in FAMILY_PARAMS if k not in values]
        if missing:
            raise KeyError(f"missing parameter(s): {', '.join(missing)}")
        return cls(values["a"], values["b"], values["c"])

    def as_dict(self) -> dict[str, float]:
        return {"a": self.a, "b": self.b, "c": self.c}


def canonical_S() -> DenseMatrix:
    return DenseMatrix.from_rows([[0, 1], [-1j, 0]])


def similarity(s: DenseMatrix, h: DenseMatrix) -> DenseMatrix:
    """S^-1 H S."""
    return matmul(matmul(inverse(s), h), s)


def build_family(family: FamilyId | str, p: HamiltonianParams) -> DenseMatrix:
    family = FamilyId(family)
    a, b, c = p.a, p.b, p.c
    if family is FamilyId.H_ORIGINAL:
        return DenseMatrix.from_rows([[complex(a, c), 1j * b], [1j * b, complex(-a, c)]])
    if family is FamilyId.H_PT_PRINTED:
        return DenseMatrix.from_rows([[-a + c, 1j * b], [1j * b, a + c]])
    if family is FamilyId.H1_PT:
        return DenseMatrix.from_rows([[a + c, 1j * b], [1j * b, -a + c]])
    return similarity(canonical_S(), build_family(FamilyId.H_ORIGINAL, p))


@dataclass(frozen=True)
class DiscrepancyReport:
    exact: DenseMatrix
    printed: DenseMatrix
    entry_diff_norm: float
    spectra_equal: bool
    exact_spectrum: Spectrum
    printed_spectrum: Spectrum


def discrepancy_report(p: HamiltonianParams, tol: float = 1e-9) -> DiscrepancyReport:
    """Compare S^-1 H S against the printed h^PT form at the same parameters."""
    exact = build_family(FamilyId.H_SIMILARITY_EXACT, p)
    printed = build_family(FamilyId.H_PT_PRINTED, p)
    diff = frobenius_norm(add(exact, scale(printed, -1)))
    se, sp = eigvals(exact), eigvals(printed)
    ref = max(1.0, frobenius_norm(exact), frobenius_norm(printed))
    return DiscrepancyReport(exact, printed, diff, spectral_distance(se, sp) <= tol * ref, se, sp)
