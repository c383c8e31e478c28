"""Acceptance criteria, one test each, at the stated tolerances.

Oracles are independent of the code under test: numpy for generic
eigenvalues, ``cmath`` closed forms c +- sqrt(a^2 - b^2) for the families.
"""

import cmath
import json
import math
import random
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from conftest import random_matrix
from make_golden import golden_document
from nhsym import report
from nhsym.eigen import eig2_closed, eig_iterative, eigvals, spectral_distance
from nhsym.numerics import DenseMatrix, frobenius_norm, matmul
from nhsym.symmetry import (
    build_C,
    build_C_pt,
    c_partners,
    check_anti_pt_symmetry,
    check_pt_symmetry,
    commutator,
    parity,
)
from nhsym.sweep import PhaseLabel, find_exceptional_points, preset_case, run_sweep
from nhsym.template import (
    TemplateError,
    TemplateFormatError,
    TemplateSyntaxError,
    builtin_template,
    format_expression,
    instantiate,
    parse_expression,
    parse_template,
)
from nhsym.transform import FamilyId, HamiltonianParams, build_family, canonical_S, discrepancy_report, similarity

GOLDEN = Path(__file__).parent / "golden"
SEED = 1729


def fam(fid, a, b, c):
    return build_family(fid, HamiltonianParams(a, b, c))


def triples(n, lo=-20.0, hi=20.0, seed=SEED):
    rng = random.Random(seed)
    return [tuple(rng.uniform(lo, hi) for _ in range(3)) for _ in range(n)]


def branches_at(result, k):
    return [br[k] for br in result.branches]


@pytest.mark.criterion(1, "eig2_closed vs eig_iterative on 1000 random 2x2 matrices, 1e-10")
def test_criterion_1():
    rng = random.Random(SEED)
    worst = 0.0
    for _ in range(1000):
        m = random_matrix(rng, 2)
        worst = max(worst, spectral_distance(eig2_closed(m), eig_iterative(m)))
        # third opinion so neither solver grades itself
        assert spectral_distance(eig2_closed(m), np.linalg.eigvals(np.array(m.to_rows()))) <= 1e-10
    assert worst <= 1e-10


@pytest.mark.criterion(2, "H_original spectrum equals ic +- sqrt(a^2-b^2) for 200 triples, 1e-10")
def test_criterion_2():
    for a, b, c in triples(200):
        root = cmath.sqrt(complex(a * a - b * b, 0.0))
        oracle = [1j * c + root, 1j * c - root]
        h = fam(FamilyId.H_ORIGINAL, a, b, c)
        assert spectral_distance(eigvals(h), oracle) <= 1e-10
        assert spectral_distance(eig_iterative(h), oracle) <= 1e-10


@pytest.mark.criterion(3, "C and C^PT have eigenvalues {+1,-1} and square to I, 1e-12")
def test_criterion_3():
    rng = random.Random(SEED)
    checked = 0
    while checked < 100:
        a, b = rng.uniform(-20, 20), rng.uniform(-20, 20)
        if abs(a) - abs(b) < 0.5:
            continue
        for op in (build_C(a, b), build_C_pt(a, b)):
            assert spectral_distance(eig_iterative(op.matrix), [1, -1]) <= 1e-12
            sq = matmul(op.matrix, op.matrix)
            assert max(abs(x - y) for x, y in zip(sq.entries, DenseMatrix.identity(2).entries)) <= 1e-12
        checked += 1


@pytest.mark.criterion(4, "[H, C] = 0 relative 1e-12; h1 partner identified and commutes")
def test_criterion_4():
    checked = 0
    for a, b, c in triples(400):
        if abs(abs(a) - abs(b)) < 1e-3:
            continue
        h = fam(FamilyId.H_ORIGINAL, a, b, c)
        assert frobenius_norm(commutator(h, build_C(a, b).matrix)) <= 1e-12 * frobenius_norm(h)
        h1 = fam(FamilyId.H1_PT, a, b, c)
        verdicts = c_partners(h1, a, b)
        partner = [name for name, v in verdicts.items() if v.holds]
        assert partner == ["C"]
        op = build_C(a, b) if partner[0] == "C" else build_C_pt(a, b)
        assert frobenius_norm(commutator(h1, op.matrix)) <= 1e-12 * frobenius_norm(h1)
        checked += 1
        if checked == 100:
            break
    assert checked == 100


@pytest.mark.criterion(5, "anti-PT of H_original under diag(1,-1) fails except at a=b=0")
def test_criterion_5():
    p = parity(1, -1)
    checked = 0
    for a, b, c in triples(300):
        if abs(a) < 1:
            continue
        v = check_anti_pt_symmetry(fam(FamilyId.H_ORIGINAL, a, b, c), p)
        assert not v.holds
        assert v.residual >= 2 * math.sqrt(2) * min(abs(a), 1)
        checked += 1
    assert checked >= 100
    for c in (-20, -3, 0, 0.5, 17):
        v = check_anti_pt_symmetry(fam(FamilyId.H_ORIGINAL, 0, 0, c), p)
        assert v.holds and v.residual <= 1e-12


@pytest.mark.criterion(6, "h1_pt is PT-symmetric under diag(-1,1) on a 21^3 grid, 1e-12")
def test_criterion_6():
    p = parity(-1, 1)
    axis = np.linspace(-10, 10, 21)
    for a in axis:
        for b in axis:
            for c in axis:
                v = check_pt_symmetry(fam(FamilyId.H1_PT, a, b, c), p)
                assert v.holds and v.residual <= 1e-12


@pytest.mark.criterion(7, "similarity keeps the spectrum (1e-9); discrepancy flags every c != 0")
def test_criterion_7():
    s = canonical_S()
    for a, b, c in triples(100):
        h = fam(FamilyId.H_ORIGINAL, a, b, c)
        assert spectral_distance(eigvals(h), eigvals(similarity(s, h))) <= 1e-9
        assert not discrepancy_report(HamiltonianParams(a, b, c)).spectra_equal
        assert discrepancy_report(HamiltonianParams(a, b, 0.0)).spectra_equal


@pytest.mark.criterion(8, "presets: EPs at 8 and +-8, Case 2 endpoints, Case 4 squares and A(10)")
def test_criterion_8():
    eps1 = find_exceptional_points(preset_case(1))
    assert len(eps1) == 1 and abs(eps1[0] - 8) <= 1e-6

    eps3 = find_exceptional_points(preset_case(3))
    assert len(eps3) == 2 and abs(eps3[0] + 8) <= 1e-6 and abs(eps3[1] - 8) <= 1e-6

    r2 = run_sweep(preset_case(2))
    assert r2.exceptional_points == ()
    assert all(z.imag == 0 for br in r2.branches for z in br)
    for k in (0, len(r2.grid) - 1):
        b = r2.grid[k]
        oracle = [b + math.sqrt(400 - b * b), b - math.sqrt(400 - b * b)]
        assert spectral_distance(branches_at(r2, k), oracle) <= 1e-9
    assert spectral_distance(branches_at(r2, 0), [-10 + math.sqrt(300), -10 - math.sqrt(300)]) <= 1e-9

    r4 = run_sweep(preset_case(4))
    k0 = r4.grid.index(0.0)
    assert all(abs(z - 400) <= 1e-9 for z in branches_at(r4, k0))
    assert r4.grid[-1] == 10
    assert abs(r4.asymmetry[-1] - 692.8203) <= 1e-3
    assert abs(r4.asymmetry[-1] - 40 * math.sqrt(300)) <= 1e-9


@pytest.mark.criterion(9, "phase labels match a^2 > b^2 / a^2 < b^2 on all presets")
def test_criterion_9():
    for n in (1, 2, 3, 4):
        spec = preset_case(n)
        r = run_sweep(spec)
        for t, ph in zip(r.grid, r.phases):
            env = spec.assignment(t)
            a2, b2 = env["a"] ** 2, env["b"] ** 2
            if any(abs(t - e) <= 1e-6 for e in r.exceptional_points):
                continue
            assert ph is (PhaseLabel.REAL_SPLIT if a2 > b2 else PhaseLabel.IMAGINARY_SPLIT), (n, t)


def _random_expr(rng, depth=0):
    from nhsym.template import BinOp, Imag, Neg, Num, Param, Sqrt

    if depth >= 6 or rng.random() < 0.3:
        return rng.choice([lambda: Num(round(rng.uniform(0, 50), rng.randrange(6))), Imag,
                           lambda: Param(rng.choice("abcxyz"))])()
    k = rng.randrange(6)
    if k == 0:
        return Neg(_random_expr(rng, depth + 1))
    if k == 1:
        return Sqrt(_random_expr(rng, depth + 1))
    return BinOp("+-*/"[k - 2], _random_expr(rng, depth + 1), _random_expr(rng, depth + 1))


MALFORMED_EXPR = [
    "", "a +", "a +* b", "* a", "(a", "a)", "()", "sqrt a", "sqrt()", "a b",
    "a $ b", "1..2", "a ^ 2", "a,b", "/b", "i i", "1e999", "(" * 80 + "a" + ")" * 80,
]
MALFORMED_FILES = [
    "name: x\nparams: a\ndim: 2\na | 1 | 2\n1 | 2 | 3\n",
    "name: x\nparams: a, b, a\ndim: 2\na | b\nb | a\n",
    "name: x\nparams: a\ndim: two\na | 1\n1 | a\n",
    "name: x\nparams: a\ndim: 9\n",
    "name: x\nparams: i\ndim: 2\ni | 1\n1 | i\n",
    "name: x\nparams: a\ndim: 2\na | 1\n1 | a +\n",
    "",
]


@pytest.mark.criterion(10, "fixtures equal build_family; 1000-expression round trip; malformed corpus located")
def test_criterion_10():
    rng = random.Random(SEED)
    for fid in FamilyId:
        t = builtin_template(fid.value)
        for a, b, c in triples(25, seed=rng.random()):
            assert instantiate(t, {"a": a, "b": b, "c": c}) == fam(fid, a, b, c)

    for _ in range(1000):
        e = _random_expr(rng)
        assert parse_expression(format_expression(e)) == e

    assert len(MALFORMED_EXPR) + len(MALFORMED_FILES) >= 20
    for src in MALFORMED_EXPR:
        with pytest.raises(TemplateSyntaxError) as exc:
            parse_expression(src)
        assert 0 <= exc.value.offset <= len(src.encode())
    for text in MALFORMED_FILES:
        with pytest.raises(TemplateError) as exc:
            parse_template(text)
        assert isinstance(exc.value, TemplateFormatError) and exc.value.line >= 1


def _ep_markers(svg):
    root = ET.fromstring(svg)
    return [e for e in root.iter("{http://www.w3.org/2000/svg}line") if e.get("class") == "ep-marker"]


@pytest.mark.criterion(11, "CSV/JSON lossless round trip; goldens match; SVG EP markers 1 and 2")
def test_criterion_11():
    bundles = {}
    for n in (1, 2, 3, 4):
        spec = preset_case(n)
        bundles[n] = b = report.sweep_bundle(spec, run_sweep(spec))
        res = b.payload
        cols = report.read_csv(report.to_csv(b))
        assert cols["param"] == list(res.grid)
        for k, br in enumerate(res.branches, start=1):
            assert cols[f"re_l{k}"] == [z.real for z in br] and cols[f"im_l{k}"] == [z.imag for z in br]
        assert cols["asymmetry"] == list(res.asymmetry)
        assert report.from_json(report.to_json(b)).payload == res
        assert golden_document(n) == json.loads((GOLDEN / f"case{n}.json").read_text())
    assert len(_ep_markers(report.to_svg(bundles[1]))) == 1
    assert len(_ep_markers(report.to_svg(bundles[3]))) == 2
