"""One-parameter sweeps: branch tracking, phases, exceptional points, asymmetry."""

from __future__ import annotations

import bisect
import enum
import functools
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence, Union

from nhsym.eigen import COALESCENCE_TOL, Spectrum, eigvals
from nhsym.numerics import DenseMatrix
from nhsym.template import HamiltonianTemplate, instantiate
from nhsym.transform import FamilyId, HamiltonianParams, build_family

DEFAULT_STEPS = 1001
DEFAULT_REFINE_TOL = 1e-10
PHASE_TOL = COALESCENCE_TOL
_TIE_RTOL = 1e-12


class SweepError(RuntimeError):
    def __init__(self, index: int, value: float, cause: Exception):
        self.index, self.value, self.cause = index, value, cause
        super().__init__(f"grid point {index} ({value!r}): {cause}")


class OutputQuantity(str, enum.Enum):
    EIGENVALUE = "Eigenvalue"
    EIGENVALUE_SQUARED = "EigenvalueSquared"
    MODULUS_SQUARED = "ModulusSquared"
    REAL_PART_SQUARED = "RealPartSquared"

    def apply(self, z: complex) -> complex:
        if self is OutputQuantity.EIGENVALUE:
            return z
        if self is OutputQuantity.EIGENVALUE_SQUARED:
            return z * z
        if self is OutputQuantity.MODULUS_SQUARED:
            return complex(z.real * z.real + z.imag * z.imag, 0.0)
        return complex(z.real * z.real, 0.0)


class PhaseLabel(str, enum.Enum):
    REAL_SPLIT = "RealSplit"
    IMAGINARY_SPLIT = "ImaginarySplit"
    DEGENERATE = "Degenerate"
    MIXED = "Mixed"


@dataclass(frozen=True)
class Alias:
    """Bind a parameter to the sweep parameter (``c = b``)."""

    target: str


Binding = Union[float, Alias]


@dataclass(frozen=True)
class SweepSpec:
    family: Union[FamilyId, HamiltonianTemplate]
    sweep_param: str
    lo: float
    hi: float
    steps: int = DEFAULT_STEPS
    bindings: Mapping[str, Binding] = field(default_factory=dict)
    output_quantity: OutputQuantity = OutputQuantity.EIGENVALUE

    def __post_init__(self):
        if not isinstance(self.family, HamiltonianTemplate):
            object.__setattr__(self, "family", FamilyId(self.family))
        object.__setattr__(self, "output_quantity", OutputQuantity(self.output_quantity))
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
            raise ValueError(f"sweep range needs lo < hi, got [{lo}, {hi}]")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError(f"steps must be an integer >= 2, got {self.steps}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "steps", int(self.steps))

        bindings = {}
        for name, b in dict(self.bindings).items():
            if isinstance(b, Alias):
                if b.target != self.sweep_param:
                    raise ValueError(f"{name} aliases {b.target!r}, but the sweep parameter is {self.sweep_param!r}")
                bindings[name] = b
            else:
                v = float(b)
                if not math.isfinite(v):
                    raise ValueError(f"binding {name}={v} is not finite")
                bindings[name] = v
        object.__setattr__(self, "bindings", bindings)

        params = set(self.params)
        if self.sweep_param not in params:
            raise ValueError(f"sweep parameter {self.sweep_param!r} is not a family parameter")
        if self.sweep_param in bindings:
            raise ValueError(f"sweep parameter {self.sweep_param!r} is also bound")
        extra = set(bindings) - params
        if extra:
            raise ValueError(f"unknown parameter(s) bound: {', '.join(sorted(extra))}")
        unbound = params - set(bindings) - {self.sweep_param}
        if unbound:
            raise ValueError(f"unbound parameter(s): {', '.join(sorted(unbound))}")

    @property
    def params(self) -> tuple[str, ...]:
        return self.family.params

    @property
    def family_name(self) -> str:
        return self.family.name if isinstance(self.family, HamiltonianTemplate) else self.family.value

    def grid(self) -> list[float]:
        n = self.steps - 1
        pts = [self.lo + (self.hi - self.lo) * k / n for k in range(self.steps)]
        pts[-1] = self.hi
        return pts

    def assignment(self, t: float) -> dict[str, float]:
        out = {self.sweep_param: t}
        for name, b in self.bindings.items():
            out[name] = t if isinstance(b, Alias) else b
        return out

    def matrix_at(self, t: float) -> DenseMatrix:
        env = self.assignment(t)
        if isinstance(self.family, HamiltonianTemplate):
            return instantiate(self.family, env)
        return build_family(self.family, HamiltonianParams.from_mapping(env))

    def spectrum_at(self, t: float) -> Spectrum:
        return eigvals(self.matrix_at(t))


@dataclass(frozen=True)
class SweepResult:
    grid: tuple
    branches: tuple  # per branch, output quantity at each grid point
    phases: tuple
    exceptional_points: tuple
    asymmetry: tuple  # float, or None outside the mirror-symmetric sub-interval
    asymmetry_interval: tuple | None = None
    notices: tuple = ()


@dataclass(frozen=True)
class Asymmetry:
    values: tuple
    interval: tuple | None
    notice: str | None = None


# --- phases -------------------------------------------------------------------


def _pair_label(d: complex, tol: float, scale: float) -> PhaseLabel:
    mag = abs(d)
    if mag <= tol * scale:
        return PhaseLabel.DEGENERATE
    if abs(d.imag) <= tol * mag:
        return PhaseLabel.REAL_SPLIT
    if abs(d.real) <= tol * mag:
        return PhaseLabel.IMAGINARY_SPLIT
    return PhaseLabel.MIXED


def classify_phase(s: Spectrum | Sequence[complex], tol: float = PHASE_TOL) -> PhaseLabel:
    """Label the eigenvalue split of a spectrum.

    For two eigenvalues this is the character of their difference. With more
    eigenvalues any coalesced pair makes the point Degenerate; otherwise the
    pairwise labels vote and a tie gives Mixed.
    """
    if not isinstance(s, Spectrum):
        s = Spectrum.from_values(s)
    vals = s.eigenvalues
    if len(vals) < 2:
        raise ValueError("phase classification needs at least two eigenvalues")
    if len(vals) == 2:
        return _pair_label(vals[0] - vals[1], tol, s.scale)
    labels = [_pair_label(x - y, tol, s.scale) for x, y in itertools.combinations(vals, 2)]
    if PhaseLabel.DEGENERATE in labels:
        return PhaseLabel.DEGENERATE
    counts = {lab: labels.count(lab) for lab in PhaseLabel}
    top = max(counts.values())
    winners = [lab for lab, c in counts.items() if c == top]
    return winners[0] if len(winners) == 1 else PhaseLabel.MIXED


# --- branch tracking ----------------------------------------------------------


def _assign(prev: Sequence[complex], cur: Sequence[complex]) -> list[int]:
    """Greedy nearest-neighbour pairing; ties resolved by least total displacement."""
    n = len(prev)

    @functools.lru_cache(maxsize=None)
    def solve(free_b: frozenset, free_c: frozenset):
        if not free_b:
            return (), 0.0
        pairs = sorted((abs(prev[i] - cur[j]), i, j) for i in free_b for j in free_c)
        dmin = pairs[0][0]
        best = None
        for d, i, j in pairs:
            if d > dmin + _TIE_RTOL * max(1.0, dmin):
                break
            rest, total = solve(free_b - {i}, free_c - {j})
            cand = (tuple(sorted(((i, j),) + rest)), total + d)
            if best is None:
                best = cand
                continue
            slack = _TIE_RTOL * max(1.0, best[1])
            # equal totals: keep the canonical (sorted-order) pairing
            if cand[1] < best[1] - slack or (cand[1] <= best[1] + slack and cand[0] < best[0]):
                best = cand
        return best

    pairing, _ = solve(frozenset(range(n)), frozenset(range(n)))
    perm = [0] * n
    for i, j in pairing:
        perm[i] = j
    return perm


def track_branches(spectra: Sequence[Sequence[complex]]) -> list[list[complex]]:
    """Continuity-track eigenvalues across consecutive grid points."""
    first = list(spectra[0])
    branches = [[z] for z in first]
    prev = first
    for vals in spectra[1:]:
        vals = list(vals)
        perm = _assign(prev, vals)
        prev = [vals[j] for j in perm]
        for b, z in zip(branches, prev):
            b.append(z)
    return branches


# --- exceptional points -------------------------------------------------------


def _closest_split(s: Spectrum) -> complex:
    return min((x - y for x, y in itertools.combinations(s.eigenvalues, 2)), key=abs)


def _split_sign(s: Spectrum) -> float:
    d = _closest_split(s)
    return abs(d.real) - abs(d.imag)


def _gap(s: Spectrum) -> float:
    return abs(_closest_split(s))


def _bisect_root(fn, lo, hi, flo, tol):
    for _ in range(400):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        fm = fn(mid)
        if fm == 0:
            return mid, mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


def _golden_min(fn, a, b, tol):
    invphi = (math.sqrt(5) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(400):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def _is_coalesced(s: Spectrum) -> bool:
    return _gap(s) <= COALESCENCE_TOL * s.scale


def _locate_eps(spec: SweepSpec, grid, spectra, refine_tol) -> list[float]:
    """Exceptional points from the sampled spectra, refined on ``spec``.

    Three detectors: grid points where the eigenvalues already coalesce;
    brackets where the closest split flips between real and imaginary
    (bisection); and interior local minima of the gap that close up under
    golden-section refinement (touching coalescences with no flip).
    """
    n = len(grid)
    gaps = [_gap(s) for s in spectra]
    signs = [_split_sign(s) for s in spectra]
    degenerate = [_is_coalesced(s) for s in spectra]
    found: list[float] = [grid[k] for k in range(n) if degenerate[k]]

    def sign_at(t):
        return _split_sign(spec.spectrum_at(t))

    for k in range(n - 1):
        if degenerate[k] or degenerate[k + 1]:
            continue
        f0, f1 = signs[k], signs[k + 1]
        if f0 == 0 or f1 == 0 or (f0 > 0) == (f1 > 0):
            continue
        lo, hi = _bisect_root(sign_at, grid[k], grid[k + 1], f0, refine_tol)
        if lo == hi:
            found.append(lo)
            continue
        # near a higher-order EP solver noise can make the refined bracket
        # look Mixed, so the coarse grid bracket may also witness the flip
        flip = {PhaseLabel.REAL_SPLIT, PhaseLabel.IMAGINARY_SPLIT}
        labels = {classify_phase(spec.spectrum_at(lo)), classify_phase(spec.spectrum_at(hi))}
        coarse = {classify_phase(spectra[k]), classify_phase(spectra[k + 1])}
        if flip <= labels or flip <= coarse or PhaseLabel.DEGENERATE in labels:
            found.append(0.5 * (lo + hi))

    def gap_at(t):
        return _gap(spec.spectrum_at(t))

    for k in range(1, n - 1):
        g = gaps[k]
        if not (g <= gaps[k - 1] and g <= gaps[k + 1] and (g < gaps[k - 1] or g < gaps[k + 1])):
            continue
        a, b = grid[k - 1], grid[k + 1]
        if any(degenerate[j] for j in (k - 1, k, k + 1)) or any(a <= x <= b for x in found):
            continue
        t = _golden_min(gap_at, a, b, refine_tol)
        s = spec.spectrum_at(t)
        h = max(grid[k] - a, b - grid[k])
        slope = max(abs(gaps[k - 1] - g), abs(gaps[k + 1] - g)) / h
        if _gap(s) <= max(COALESCENCE_TOL * s.scale, 10 * slope * refine_tol):
            found.append(t)

    found.sort()
    out: list[float] = []
    for x in found:
        if not out or x - out[-1] > refine_tol:
            out.append(x)
    return [min(max(x, spec.lo), spec.hi) for x in out]


def _sample(spec: SweepSpec):
    grid = spec.grid()
    spectra = []
    for k, t in enumerate(grid):
        try:
            spectra.append(spec.spectrum_at(t))
        except (ArithmeticError, ValueError, KeyError) as exc:
            raise SweepError(k, t, exc) from exc
    return grid, spectra


def find_exceptional_points(spec: SweepSpec, refine_tol: float = DEFAULT_REFINE_TOL) -> list[float]:
    if not refine_tol > 0:
        raise ValueError("refine_tol must be positive")
    grid, spectra = _sample(spec)
    return _locate_eps(spec, grid, spectra, refine_tol)


# --- asymmetry ----------------------------------------------------------------


def _interp(xs, ys, x):
    k = bisect.bisect_left(xs, x)
    if k <= 0:
        return ys[0]
    if k >= len(xs):
        return ys[-1]
    x0, x1 = xs[k - 1], xs[k]
    if x == x1:
        return ys[k]
    w = (x - x0) / (x1 - x0)
    return ys[k - 1] + (ys[k] - ys[k - 1]) * w


def asymmetry_metric(result: SweepResult) -> Asymmetry:
    """Mirror asymmetry A(t) = max_branch |dRe| + |dIm| between q(t) and q(-t).

    Defined on the largest sub-interval [-m, m] of the sweep range; other grid
    points get ``None``. A sweep that does not straddle zero has no mirror
    points and every value is ``None``.
    """
    grid = list(result.grid)
    lo, hi = grid[0], grid[-1]
    if not lo < 0 < hi:
        notice = f"range [{lo:g}, {hi:g}] does not straddle 0; asymmetry undefined"
        return Asymmetry(tuple(None for _ in grid), None, notice)
    m = min(-lo, hi)
    slack = 1e-12 * m
    values = []
    for k, t in enumerate(grid):
        if abs(t) > m + slack:
            values.append(None)
            continue
        worst = 0.0
        for br in result.branches:
            q, qm = br[k], _interp(grid, br, -t)
            worst = max(worst, abs(q.real - qm.real) + abs(q.imag - qm.imag))
        values.append(worst)
    return Asymmetry(tuple(values), (-m, m))


# --- driver -------------------------------------------------------------------


def run_sweep(spec: SweepSpec, refine_tol: float = DEFAULT_REFINE_TOL) -> SweepResult:
    grid, spectra = _sample(spec)
    tracked = track_branches([s.eigenvalues for s in spectra])
    quantity = spec.output_quantity
    branches = tuple(tuple(quantity.apply(z) for z in br) for br in tracked)
    phases = tuple(classify_phase(s) for s in spectra)
    eps = tuple(_locate_eps(spec, grid, spectra, refine_tol))
    result = SweepResult(tuple(grid), branches, phases, eps, ())
    asym = asymmetry_metric(result)
    notices = (asym.notice,) if asym.notice else ()
    return replace(result, asymmetry=asym.values, asymmetry_interval=asym.interval, notices=notices)


def preset_case(n: int, steps: int = DEFAULT_STEPS, family: FamilyId = FamilyId.H1_PT,
                squared: OutputQuantity = OutputQuantity.EIGENVALUE_SQUARED) -> SweepSpec:
    """The four reference sweeps. Case 4 plots a squared quantity (default lambda^2)."""
    if n == 1:
        return SweepSpec(family, "b", 0.0, 10.0, steps, {"a": 8.0, "c": -3.0})
    if n == 2:
        return SweepSpec(family, "b", -10.0, 0.0, steps, {"a": 20.0, "c": Alias("b")})
    if n == 3:
        return SweepSpec(family, "b", -10.0, 10.0, steps, {"a": 8.0, "c": Alias("b")})
    if n == 4:
        return SweepSpec(family, "b", -10.0, 10.0, steps, {"a": 20.0, "c": Alias("b")}, squared)
    raise ValueError(f"preset case must be 1..4, got {n}")
