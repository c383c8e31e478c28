"""Parity, time reversal and C-type operators, and the checks built on them.

Time reversal is entrywise complex conjugation (T^2 = 1). An antilinear
operator is stored as a matrix plus a flag meaning "conjugate first".
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

from nhsym.numerics import (
    DenseMatrix,
    ShapeError,
    add,
    conj,
    frobenius_norm,
    inverse,
    is_singular,
    matmul,
    principal_sqrt,
    scale,
)

DEFAULT_TOL = 1e-10
EP_TOL = 1e-12
MAX_SEARCH_DIM = 4


class OperatorKindError(ValueError):
    """An antilinear operator was passed where a linear one is required."""


class ExceptionalPointError(ArithmeticError):
    pass


class VerdictKind(str, enum.Enum):
    LINEAR_COMMUTING = "LinearCommuting"
    PT_SYMMETRIC = "PTSymmetric"
    ANTI_PT_SYMMETRIC = "AntiPTSymmetric"


@dataclass(frozen=True)
class SymmetryOperator:
    matrix: DenseMatrix
    antilinear: bool = False
    name: str = ""

    def __post_init__(self):
        if not self.matrix.is_square:
            raise ShapeError("symmetry operator must be square")
        if is_singular(self.matrix):
            raise ValueError(f"symmetry operator {self.name or '<unnamed>'} is singular")

    def apply(self, vec) -> list[complex]:
        v = [complex(x) for x in vec]
        if self.antilinear:
            v = [x.conjugate() for x in v]
        n = self.matrix.rows
        e = self.matrix.entries
        return [sum(e[i * n + j] * v[j] for j in range(n)) for i in range(n)]

    def square(self) -> DenseMatrix:
        """Matrix of the operator applied twice (always linear)."""
        m = self.matrix
        return matmul(m, conj(m)) if self.antilinear else matmul(m, m)

    def involution_residual(self) -> float:
        return frobenius_norm(add(self.square(), scale(DenseMatrix.identity(self.matrix.rows), -1)))

    def is_involution(self, tol: float = DEFAULT_TOL) -> bool:
        return self.involution_residual() <= tol


@dataclass(frozen=True)
class SymmetryVerdict:
    kind: VerdictKind
    residual: float
    holds: bool
    operator: str = ""


def _verdict(kind, residual, h, tol, name) -> SymmetryVerdict:
    return SymmetryVerdict(kind, residual, residual <= tol * max(1.0, frobenius_norm(h)), name)


def _check_dims(h: DenseMatrix, m: DenseMatrix) -> None:
    if not h.is_square or h.shape != m.shape:
        raise ShapeError(f"operator {m.rows}x{m.cols} does not act on {h.rows}x{h.cols} matrix")


def commutator(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    _check_dims(a, b)
    return add(matmul(a, b), scale(matmul(b, a), -1))


def anticommutator(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    _check_dims(a, b)
    return add(matmul(a, b), matmul(b, a))


def parity(*signs: int) -> SymmetryOperator:
    """Diagonal parity operator, e.g. ``parity(1, -1)``."""
    body = ",".join(str(int(s)) for s in signs)
    return SymmetryOperator(DenseMatrix.diag(signs), name=f"diag({body})")


def time_reversal(n: int) -> SymmetryOperator:
    return SymmetryOperator(DenseMatrix.identity(n), antilinear=True, name="T")


def pt_operator(p: SymmetryOperator) -> SymmetryOperator:
    return SymmetryOperator(p.matrix, antilinear=True, name=f"{p.name}T" if p.name else "PT")


def pt_image(h: DenseMatrix, p: SymmetryOperator) -> DenseMatrix:
    """P conj(H) P^-1, i.e. (PT) H (PT)^-1."""
    if p.antilinear:
        raise OperatorKindError("parity must be linear; T is applied internally")
    _check_dims(h, p.matrix)
    return matmul(matmul(p.matrix, conj(h)), inverse(p.matrix))


def pt_decompose(h: DenseMatrix, p: SymmetryOperator) -> tuple[DenseMatrix, DenseMatrix]:
    """Split H into PT-even and PT-odd parts; they sum back to H."""
    img = pt_image(h, p)
    even = scale(add(h, img), 0.5)
    odd = scale(add(h, scale(img, -1)), 0.5)
    return even, odd


def check_linear_symmetry(h: DenseMatrix, op: SymmetryOperator, tol: float = DEFAULT_TOL) -> SymmetryVerdict:
    if op.antilinear:
        raise OperatorKindError("linear symmetry check got an antilinear operator")
    residual = frobenius_norm(commutator(h, op.matrix))
    return _verdict(VerdictKind.LINEAR_COMMUTING, residual, h, tol, op.name)


def check_pt_symmetry(h: DenseMatrix, p: SymmetryOperator, tol: float = DEFAULT_TOL) -> SymmetryVerdict:
    residual = frobenius_norm(add(pt_image(h, p), scale(h, -1)))
    return _verdict(VerdictKind.PT_SYMMETRIC, residual, h, tol, p.name)


def check_anti_pt_symmetry(h: DenseMatrix, p: SymmetryOperator, tol: float = DEFAULT_TOL) -> SymmetryVerdict:
    residual = frobenius_norm(add(pt_image(h, p), h))
    return _verdict(VerdictKind.ANTI_PT_SYMMETRIC, residual, h, tol, p.name)


def _c_norm(a: float, b: float, tol: float) -> complex:
    radicand = a * a - b * b
    if abs(radicand) <= tol * max(1.0, a * a + b * b):
        raise ExceptionalPointError(f"a^2 = b^2 at a={a}, b={b}: C is undefined at the exceptional point")
    return principal_sqrt(radicand)


def build_C(a: float, b: float, tol: float = EP_TOL) -> SymmetryOperator:
    """C = [[a, ib], [ib, -a]] / sqrt(a^2 - b^2).

    For a^2 < b^2 the principal root is imaginary; C stays an involution with
    eigenvalues +-1 (check with :meth:`SymmetryOperator.is_involution`).
    """
    s = _c_norm(a, b, tol)
    m = DenseMatrix.from_rows([[a / s, 1j * b / s], [1j * b / s, -a / s]])
    return SymmetryOperator(m, name="C")


def build_C_pt(a: float, b: float, tol: float = EP_TOL) -> SymmetryOperator:
    s = _c_norm(a, b, tol)
    m = DenseMatrix.from_rows([[-a / s, 1j * b / s], [1j * b / s, a / s]])
    return SymmetryOperator(m, name="C_pt")


def c_partners(h: DenseMatrix, a: float, b: float, tol: float = DEFAULT_TOL) -> dict[str, SymmetryVerdict]:
    """Commutation verdicts of ``h`` against both C and C_pt built from (a, b)."""
    return {
        "C": check_linear_symmetry(h, build_C(a, b), tol),
        "C_pt": check_linear_symmetry(h, build_C_pt(a, b), tol),
    }


def signed_permutations(n: int):
    """All n x n signed permutation matrices in canonical order."""
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1, -1), repeat=n):
            entries = [0] * (n * n)
            for i, (j, s) in enumerate(zip(perm, signs)):
                entries[i * n + j] = s
            m = DenseMatrix(n, n, tuple(entries))
            yield SymmetryOperator(m, name=describe_operator(m))


def describe_operator(m: DenseMatrix) -> str:
    n = m.rows
    if all(m[i, j] == 0 for i in range(n) for j in range(n) if i != j):
        vals = [m[i, i] for i in range(n)]
        if all(v.imag == 0 and v.real == int(v.real) for v in vals):
            return "diag(" + ",".join(str(int(v.real)) for v in vals) + ")"
    rows = []
    for row in m.to_rows():
        rows.append("[" + ",".join(_fmt_entry(x) for x in row) + "]")
    return "[" + ",".join(rows) + "]"


def _fmt_entry(x: complex) -> str:
    if x.imag == 0:
        return f"{x.real:g}"
    return f"{x.real:g}{x.imag:+g}i"


def search_parity(h: DenseMatrix, tol: float = DEFAULT_TOL) -> list[tuple[SymmetryOperator, SymmetryVerdict]]:
    """Every signed permutation P under which H is PT- or anti-PT-symmetric."""
    if not h.is_square:
        raise ShapeError("parity search needs a square matrix")
    if h.rows > MAX_SEARCH_DIM:
        raise ShapeError(f"parity search is limited to N <= {MAX_SEARCH_DIM}, got {h.rows}")
    found = []
    for p in signed_permutations(h.rows):
        for check in (check_pt_symmetry, check_anti_pt_symmetry):
            v = check(h, p, tol)
            if v.holds:
                found.append((p, v))
    return found
