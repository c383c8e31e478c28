"""Small dense complex matrices.

Entries are Python ``complex`` values stored row-major in a tuple. Matrices
are immutable; every operation returns a new matrix. Sizes are expected to
be tiny (N <= 8), so everything is plain Python loops.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

SINGULAR_TOL = 1e-12


class ShapeError(ValueError):
    """Operand dimensions are incompatible."""


class SingularMatrixError(ArithmeticError):
    pass


class NonFiniteError(ValueError):
    pass


def principal_sqrt(z: complex) -> complex:
    """Principal square root; a negative real on the cut maps to +i*sqrt(|z|).

    ``cmath.sqrt`` honours the sign of a zero imaginary part, so
    ``-36 - 0j`` would give ``-6j``. Adding ``+0.0`` erases the negative zero.
    """
    z = complex(z)
    return cmath.sqrt(complex(z.real, z.imag + 0.0))


@dataclass(frozen=True)
class DenseMatrix:
    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ShapeError(f"dimensions must be positive, got {self.rows}x{self.cols}")
        entries = tuple(complex(e) for e in self.entries)
        if len(entries) != self.rows * self.cols:
            raise ShapeError(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, got {len(entries)}"
            )
        for e in entries:
            if not (math.isfinite(e.real) and math.isfinite(e.imag)):
                raise NonFiniteError(f"non-finite matrix entry {e!r}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[complex]]) -> "DenseMatrix":
        rows = [list(r) for r in rows]
        if not rows:
            raise ShapeError("matrix needs at least one row")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ShapeError("ragged rows")
        return cls(len(rows), ncols, tuple(e for r in rows for e in r))

    @classmethod
    def identity(cls, n: int) -> "DenseMatrix":
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "DenseMatrix":
        cols = rows if cols is None else cols
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def diag(cls, values: Iterable[complex]) -> "DenseMatrix":
        values = list(values)
        n = len(values)
        return cls(n, n, tuple(values[i] if i == j else 0 for i in range(n) for j in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, idx: tuple[int, int]) -> complex:
        i, j = idx
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(idx)
        return self.entries[i * self.cols + j]

    def to_rows(self) -> list[list[complex]]:
        c = self.cols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.rows)]

    def __matmul__(self, other: "DenseMatrix") -> "DenseMatrix":
        return matmul(self, other)

    def __add__(self, other: "DenseMatrix") -> "DenseMatrix":
        return add(self, other)

    def __sub__(self, other: "DenseMatrix") -> "DenseMatrix":
        return add(self, scale(other, -1))

    def __neg__(self) -> "DenseMatrix":
        return scale(self, -1)

    def __mul__(self, k: complex) -> "DenseMatrix":
        return scale(self, k)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"DenseMatrix({self.to_rows()!r})"


def _require_square(a: DenseMatrix, what: str) -> None:
    if not a.is_square:
        raise ShapeError(f"{what} needs a square matrix, got {a.rows}x{a.cols}")


def matmul(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    n, m, p = a.rows, a.cols, b.cols
    ae, be = a.entries, b.entries
    out = []
    for i in range(n):
        row = ae[i * m:(i + 1) * m]
        for j in range(p):
            s = 0j
            for k in range(m):
                s += row[k] * be[k * p + j]
            out.append(s)
    return DenseMatrix(n, p, tuple(out))


def add(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    if a.shape != b.shape:
        raise ShapeError(f"cannot add {a.rows}x{a.cols} and {b.rows}x{b.cols}")
    return DenseMatrix(a.rows, a.cols, tuple(x + y for x, y in zip(a.entries, b.entries)))


def scale(a: DenseMatrix, k: complex) -> DenseMatrix:
    k = complex(k)
    return DenseMatrix(a.rows, a.cols, tuple(k * x for x in a.entries))


def conj(a: DenseMatrix) -> DenseMatrix:
    return DenseMatrix(a.rows, a.cols, tuple(x.conjugate() for x in a.entries))


def frobenius_norm(a: DenseMatrix) -> float:
    return math.sqrt(sum(x.real * x.real + x.imag * x.imag for x in a.entries))


def trace(a: DenseMatrix) -> complex:
    _require_square(a, "trace")
    return sum((a.entries[i * a.cols + i] for i in range(a.rows)), 0j)


def _lu(a: DenseMatrix):
    """Partial-pivot elimination. Returns (working rows, permutation sign)."""
    n = a.rows
    m = a.to_rows()
    sign = 1
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(m[r][k]))
        if p != k:
            m[k], m[p] = m[p], m[k]
            sign = -sign
        pivot = m[k][k]
        if pivot == 0:
            continue
        for r in range(k + 1, n):
            f = m[r][k] / pivot
            if f:
                for c in range(k, n):
                    m[r][c] -= f * m[k][c]
    return m, sign


def det(a: DenseMatrix) -> complex:
    _require_square(a, "det")
    if a.rows == 1:
        return a.entries[0]
    if a.rows == 2:
        p, q, r, s = a.entries
        return p * s - q * r
    m, sign = _lu(a)
    out = complex(sign)
    for k in range(a.rows):
        out *= m[k][k]
    return out


def is_singular(a: DenseMatrix, tol: float = SINGULAR_TOL) -> bool:
    _require_square(a, "singularity test")
    return abs(det(a)) <= tol * max(1.0, frobenius_norm(a) ** a.rows)


def inverse(a: DenseMatrix, tol: float = SINGULAR_TOL) -> DenseMatrix:
    _require_square(a, "inverse")
    if is_singular(a, tol):
        raise SingularMatrixError("matrix is singular to working tolerance")
    n = a.rows
    if n == 2:
        p, q, r, s = a.entries
        inv_d = 1 / (p * s - q * r)
        return DenseMatrix(2, 2, (s * inv_d, -q * inv_d, -r * inv_d, p * inv_d))

    # Gauss-Jordan with partial pivoting on [A | I]
    aug = [row + [1 + 0j if i == j else 0j for j in range(n)] for i, row in enumerate(a.to_rows())]
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(aug[r][k]))
        if aug[p][k] == 0:
            raise SingularMatrixError("zero pivot during elimination")
        aug[k], aug[p] = aug[p], aug[k]
        pivot = aug[k][k]
        aug[k] = [x / pivot for x in aug[k]]
        for r in range(n):
            if r != k and aug[r][k]:
                f = aug[r][k]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[k])]
    return DenseMatrix(n, n, tuple(x for row in aug for x in row[n:]))
