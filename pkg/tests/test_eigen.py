import cmath
import math

import numpy as np
import pytest

from conftest import random_matrix, to_np
from nhsym.eigen import (
    ConvergenceError,
    Spectrum,
    eig2_closed,
    eig_iterative,
    match_spectra,
    spectral_distance,
    spectral_gap,
)
from nhsym.numerics import DenseMatrix, ShapeError, det, inverse, matmul, trace
from nhsym.symmetry import build_C
from nhsym.transform import FamilyId, HamiltonianParams, build_family


def H(a, b, c):
    return build_family(FamilyId.H_ORIGINAL, HamiltonianParams(a, b, c))


def H1(a, b, c):
    return build_family(FamilyId.H1_PT, HamiltonianParams(a, b, c))


def test_closed_form_examples():
    s = eig2_closed(H(8, 0, -3))
    assert s.eigenvalues == (8 - 3j, -8 - 3j)
    assert not s.degeneracy_flag

    s = eig2_closed(H(8, 8, -3))
    assert s.eigenvalues == (-3j, -3j)
    assert s.degeneracy_flag

    s = eig2_closed(H(8, 10, -3))
    assert s.eigenvalues == (3j, -9j)


def test_closed_form_cross_checked_by_iteration():
    for m in (H(8, 0, -3), H(8, 10, -3), H(3, 1, 2)):
        assert spectral_distance(eig2_closed(m), eig_iterative(m)) <= 1e-10


def test_closed_form_rejects_other_shapes():
    with pytest.raises(ShapeError):
        eig2_closed(DenseMatrix.identity(3))


def test_iterative_examples():
    assert eig_iterative(DenseMatrix.diag([1, -1])).eigenvalues == (1, -1)
    c = eig_iterative(build_C(8, 2).matrix)
    assert spectral_distance(c, [1, -1]) <= 1e-12
    s = eig_iterative(H1(20, -10, -10))
    oracle = [-10 + math.sqrt(300), -10 - math.sqrt(300)]
    assert spectral_distance(s, oracle) <= 1e-10
    assert s[0].real == pytest.approx(7.3205, abs=5e-5)
    assert s[1].real == pytest.approx(-27.3205, abs=5e-5)


def test_iterative_rejects_large_and_nonsquare():
    with pytest.raises(ShapeError):
        eig_iterative(DenseMatrix.identity(9))
    with pytest.raises(ShapeError):
        eig_iterative(DenseMatrix.zeros(2, 3))


def test_iteration_cap_raises():
    m = DenseMatrix.from_rows([[1, 2, 3], [4, 5, 6], [7, 8, 10j]])
    with pytest.raises(ConvergenceError):
        eig_iterative(m, max_sweeps=1)


def test_spectral_gap():
    assert spectral_gap(Spectrum.from_values([-3j, -3j])) == 0
    assert spectral_gap(Spectrum.from_values([8 - 3j, -8 - 3j])) == 16
    assert spectral_gap([1, -1]) == 2
    with pytest.raises(ValueError):
        spectral_gap([1])


def test_ordering_is_re_then_im_descending():
    s = Spectrum.from_values([1 - 1j, 1 + 1j, 2, -5j])
    assert s.eigenvalues == (2, 1 + 1j, 1 - 1j, -5j)


def test_solvers_agree_with_numpy(rng):
    for n in (2, 3, 4, 5, 6, 7, 8):
        for _ in range(20):
            m = random_matrix(rng, n)
            ref = np.linalg.eigvals(to_np(m))
            it = eig_iterative(m)
            # nearest-neighbour check avoids 8! pairings
            assert max(min(abs(x - y) for y in ref) for x in it) <= 1e-9
            if n == 2:
                assert spectral_distance(eig2_closed(m), ref) <= 1e-10


def test_trace_and_det_consistency(rng):
    for n in (2, 3, 4, 6, 8):
        for _ in range(20):
            m = random_matrix(rng, n)
            solvers = [eig_iterative] + ([eig2_closed] if n == 2 else [])
            for solve in solvers:
                vals = solve(m).eigenvalues
                tr, dt = trace(m), det(m)
                assert abs(sum(vals) - tr) <= 1e-10 * max(1.0, abs(tr), sum(abs(v) for v in vals))
                prod = 1
                for v in vals:
                    prod *= v
                assert abs(prod - dt) <= 1e-10 * max(1.0, abs(dt))


def test_similarity_invariance(rng):
    checked = 0
    while checked < 100:
        n = rng.randint(2, 6)
        h, s = random_matrix(rng, n), random_matrix(rng, n)
        if np.linalg.cond(to_np(s)) >= 1e4:
            continue
        sim = matmul(matmul(inverse(s), h), s)
        assert spectral_distance(eig_iterative(h), eig_iterative(sim)) <= 1e-9
        checked += 1


def test_eq2_family_closed_form(rng):
    for _ in range(200):
        a, b, c = (rng.uniform(-20, 20) for _ in range(3))
        root = cmath.sqrt(complex(a * a - b * b, 0.0))
        oracle = [1j * c + root, 1j * c - root]
        assert spectral_distance(eig2_closed(H(a, b, c)), oracle) <= 1e-10


def test_match_spectra_pairs_optimally():
    pairs = match_spectra([1, 2, 3], [3.1, 0.9, 2.05])
    assert pairs == [(1, 0.9), (2, 2.05), (3, 3.1)]
