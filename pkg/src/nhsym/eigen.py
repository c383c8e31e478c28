"""Eigenvalues of small complex matrices.

Two independent routes: the 2x2 quadratic formula (:func:`eig2_closed`) and a
Hessenberg + shifted QR iteration (:func:`eig_iterative`) used as an oracle
and for N > 2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from nhsym.numerics import DenseMatrix, ShapeError, frobenius_norm, principal_sqrt

COALESCENCE_TOL = 1e-8
MAX_DIM = 8
_EPS = 2.220446049250313e-16


class ConvergenceError(ArithmeticError):
    pass


def order_key(z: complex) -> tuple[float, float]:
    # sorted() ascending on this key gives (Re desc, Im desc)
    return (-z.real, -z.imag)


def spectral_gap(eigenvalues) -> float:
    """Minimum pairwise distance between eigenvalues."""
    vals = list(getattr(eigenvalues, "eigenvalues", eigenvalues))
    if len(vals) < 2:
        raise ValueError("spectral gap needs at least two eigenvalues")
    return min(abs(x - y) for x, y in itertools.combinations(vals, 2))


@dataclass(frozen=True)
class Spectrum:
    """Ordered eigenvalues plus a coalescence flag.

    ``scale`` is ``max(1, ||M||_F)`` of the source matrix; it sets the absolute
    size of "coalesced" for the flag and for phase classification.
    """

    eigenvalues: tuple
    degeneracy_flag: bool = False
    scale: float = field(default=1.0, compare=False)

    @classmethod
    def from_values(cls, values, scale: float = 1.0, tol: float = COALESCENCE_TOL) -> "Spectrum":
        vals = tuple(sorted((complex(v) for v in values), key=order_key))
        flag = len(vals) >= 2 and spectral_gap(vals) <= tol * scale
        return cls(vals, flag, scale)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def __iter__(self):
        return iter(self.eigenvalues)

    def __getitem__(self, i: int) -> complex:
        return self.eigenvalues[i]


def _scale_of(m: DenseMatrix) -> float:
    return max(1.0, frobenius_norm(m))


def eig2_closed(m: DenseMatrix) -> Spectrum:
    if m.shape != (2, 2):
        raise ShapeError(f"closed-form solver needs a 2x2 matrix, got {m.rows}x{m.cols}")
    p, q, r, s = m.entries
    half_tr = (p + s) / 2
    # ((p-s)/2)^2 + qr equals (tr/2)^2 - det but avoids cancellation near coalescence
    root = principal_sqrt(((p - s) / 2) ** 2 + q * r)
    return Spectrum.from_values((half_tr + root, half_tr - root), _scale_of(m))


def _hessenberg(a: list[list[complex]]) -> None:
    """In-place Householder reduction to upper Hessenberg form."""
    n = len(a)
    for k in range(n - 2):
        x = [a[i][k] for i in range(k + 1, n)]
        xnorm = math.sqrt(sum(abs(v) ** 2 for v in x))
        if xnorm == 0.0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1 + 0j
        v = list(x)
        v[0] = x0 + phase * xnorm
        vnorm = math.sqrt(sum(abs(t) ** 2 for t in v))
        v = [t / vnorm for t in v]
        # A <- (I - 2vv*) A
        for j in range(n):
            dot = sum(v[i].conjugate() * a[k + 1 + i][j] for i in range(len(v)))
            if dot:
                for i in range(len(v)):
                    a[k + 1 + i][j] -= 2 * v[i] * dot
        # A <- A (I - 2vv*)
        for i in range(n):
            dot = sum(a[i][k + 1 + t] * v[t] for t in range(len(v)))
            if dot:
                for t in range(len(v)):
                    a[i][k + 1 + t] -= 2 * dot * v[t].conjugate()
        for i in range(k + 2, n):
            a[i][k] = 0j


def _qr_step(h: list[list[complex]], lo: int, hi: int, mu: complex) -> None:
    """One explicitly shifted QR step on the unreduced block h[lo:hi+1, lo:hi+1]."""
    for i in range(lo, hi + 1):
        h[i][i] -= mu
    rots = []
    for k in range(lo, hi):
        a, b = h[k][k], h[k + 1][k]
        r = math.hypot(abs(a), abs(b))
        if r == 0.0:
            c, s = 1 + 0j, 0j
        else:
            c, s = a / r, b / r
        rots.append((c, s))
        cc, sc = c.conjugate(), s.conjugate()
        for j in range(k, hi + 1):
            x, y = h[k][j], h[k + 1][j]
            h[k][j] = cc * x + sc * y
            h[k + 1][j] = -s * x + c * y
    for k, (c, s) in zip(range(lo, hi), rots):
        cc, sc = c.conjugate(), s.conjugate()
        for i in range(lo, min(k + 2, hi) + 1):
            x, y = h[i][k], h[i][k + 1]
            h[i][k] = x * c + y * s
            h[i][k + 1] = -x * sc + y * cc
    for i in range(lo, hi + 1):
        h[i][i] += mu


def eig_iterative(m: DenseMatrix, max_sweeps: int | None = None) -> Spectrum:
    """Eigenvalues by Householder-Hessenberg reduction and shifted QR.

    Uses the Rayleigh-quotient shift ``h[hi][hi]`` with an ad hoc exceptional
    shift every tenth stalled sweep. Raises :class:`ConvergenceError` after
    ``max_sweeps`` (default ``100 * N**2``) QR steps.
    """
    if not m.is_square:
        raise ShapeError(f"eigenvalues need a square matrix, got {m.rows}x{m.cols}")
    n = m.rows
    if n > MAX_DIM:
        raise ShapeError(f"iterative solver supports N <= {MAX_DIM}, got {n}")
    if max_sweeps is None:
        max_sweeps = 100 * n * n
    h = m.to_rows()
    _hessenberg(h)
    norm = frobenius_norm(m)

    found: list[complex] = []
    hi = n - 1
    sweeps = 0
    stall = 0
    while hi >= 0:
        if hi == 0:
            found.append(h[0][0])
            break
        # deflate negligible subdiagonals, find top of the active block
        lo = hi
        while lo > 0:
            sub = abs(h[lo][lo - 1])
            ref = abs(h[lo][lo]) + abs(h[lo - 1][lo - 1])
            if ref == 0.0:
                ref = norm
            if sub <= _EPS * ref:
                h[lo][lo - 1] = 0j
                break
            lo -= 1
        if lo == hi:
            found.append(h[hi][hi])
            hi -= 1
            stall = 0
            continue
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"QR iteration did not converge in {max_sweeps} sweeps")
        stall += 1
        if stall % 10 == 0:
            mu = h[hi][hi] + 0.75 * abs(h[hi][hi - 1]) * complex(math.cos(stall), math.sin(stall))
        else:
            mu = h[hi][hi]
        _qr_step(h, lo, hi, mu)
        sweeps += 1
    return Spectrum.from_values(found, max(1.0, norm))


def eigvals(m: DenseMatrix) -> Spectrum:
    """Closed form for 2x2, iterative otherwise."""
    return eig2_closed(m) if m.shape == (2, 2) else eig_iterative(m)


def match_spectra(a, b) -> list[tuple[complex, complex]]:
    """Pair two eigenvalue lists to minimise the largest pairwise distance."""
    a = list(getattr(a, "eigenvalues", a))
    b = list(getattr(b, "eigenvalues", b))
    if len(a) != len(b):
        raise ValueError("spectra differ in length")
    best = None
    for perm in itertools.permutations(range(len(b))):
        cost = max((abs(a[i] - b[j]) for i, j in enumerate(perm)), default=0.0)
        if best is None or cost < best[0]:
            best = (cost, perm)
    return [(a[i], b[j]) for i, j in enumerate(best[1])]


def spectral_distance(a, b) -> float:
    return max((abs(x - y) for x, y in match_spectra(a, b)), default=0.0)
