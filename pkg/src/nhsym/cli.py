"""Command-line interface.

Subcommands: ``classify``, ``sweep``, ``case``, ``ep``, ``transform``.
Exit status is 0 on success, 1 on a usage error, 2 on a computation error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

from nhsym import report
from nhsym.eigen import Spectrum
from nhsym.numerics import DenseMatrix
from nhsym.symmetry import (
    ExceptionalPointError,
    SymmetryOperator,
    build_C,
    build_C_pt,
    check_anti_pt_symmetry,
    check_linear_symmetry,
    check_pt_symmetry,
    parity,
    search_parity,
)
from nhsym.sweep import (
    DEFAULT_REFINE_TOL,
    DEFAULT_STEPS,
    Alias,
    OutputQuantity,
    SweepSpec,
    find_exceptional_points,
    preset_case,
    run_sweep,
)
from nhsym.template import TemplateError, instantiate, load_template_file
from nhsym.transform import FamilyId, HamiltonianParams, build_family, discrepancy_report

QUANTITIES = {
    "eig": OutputQuantity.EIGENVALUE,
    "eig2": OutputQuantity.EIGENVALUE_SQUARED,
    "abs2": OutputQuantity.MODULUS_SQUARED,
    "re2": OutputQuantity.REAL_PART_SQUARED,
}
_VALUE_OPTS = {"--range", "--set", "--alias", "--tol", "--refine-tol", "--parity"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_set(text: str | None) -> dict[str, float]:
    out: dict[str, float] = {}
    if not text:
        return out
    for item in text.split(","):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise UsageError(f"bad --set item {item!r}; expected name=value")
        try:
            out[key] = float(val)
        except ValueError:
            raise UsageError(f"bad value in --set item {item!r}") from None
        if not math.isfinite(out[key]):
            raise UsageError(f"--set {key} must be finite")
    return out


def _parse_alias(items: list[str] | None) -> dict[str, str]:
    out = {}
    for chunk in items or []:
        for item in chunk.split(","):
            key, sep, target = item.partition("=")
            if not sep or not key.strip() or not target.strip():
                raise UsageError(f"bad --alias item {item!r}; expected name=param")
            out[key.strip()] = target.strip()
    return out


def _parse_range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    try:
        if not sep:
            raise ValueError
        return float(lo), float(hi)
    except ValueError:
        raise UsageError(f"bad --range {text!r}; expected lo:hi") from None


def _parse_parity(text: str, n: int):
    if text == "search":
        return "search"
    m = re.fullmatch(r"\s*diag\(([^)]*)\)\s*", text)
    if not m:
        raise UsageError(f"bad --parity {text!r}; expected diag(+-1,...) or search")
    try:
        signs = [int(s) for s in m.group(1).split(",")]
    except ValueError:
        raise UsageError(f"bad --parity {text!r}") from None
    if len(signs) != n or any(s not in (1, -1) for s in signs):
        raise UsageError(f"--parity needs {n} entries of +-1")
    return parity(*signs)


def _family(args):
    if args.template:
        try:
            return load_template_file(args.template)
        except OSError as exc:
            raise UsageError(f"cannot read template: {exc}") from None
        except TemplateError as exc:
            raise UsageError(f"invalid template {args.template}: {exc}") from None
    try:
        return FamilyId(args.family)
    except ValueError:
        names = ", ".join(f.value for f in FamilyId)
        raise UsageError(f"unknown family {args.family!r}; choose from {names}") from None


def _matrix_doc(m: DenseMatrix) -> list:
    return [[[z.real + 0.0, z.imag + 0.0] for z in row] for row in m.to_rows()]


def _spectrum_doc(s: Spectrum) -> list:
    return [[z.real + 0.0, z.imag + 0.0] for z in s.eigenvalues]


def _build_spec(args, family) -> SweepSpec:
    lo, hi = _parse_range(args.range)
    bindings: dict = dict(_parse_set(args.set))
    for name, target in _parse_alias(args.alias).items():
        bindings[name] = Alias(target)
    quantity = QUANTITIES[getattr(args, "quantity", "eig")]
    try:
        return SweepSpec(family, args.param, lo, hi, args.steps, bindings, quantity)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write_outputs(bundle, out: Path, stem: str) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for ext, render in (("csv", report.to_csv), ("json", report.to_json), ("svg", report.to_svg)):
        p = out / f"{stem}.{ext}"
        p.write_bytes(render(bundle))
        paths.append(p)
    return paths


# --- subcommands --------------------------------------------------------------


def classify_document(family, values: dict[str, float], parity_arg: str | None, tol: float) -> bytes:
    """JSON verdicts for one matrix; the ``classify`` subcommand prints this."""
    if isinstance(family, FamilyId):
        h = build_family(family, HamiltonianParams.from_mapping(values))
        name = family.value
    else:
        h = instantiate(family, values)
        name = family.name
    n = h.rows
    p = _parse_parity(parity_arg or "diag(" + ",".join("1" if k % 2 == 0 else "-1" for k in range(n)) + ")", n)

    verdicts = []
    if p == "search":
        verdicts += [v for _, v in search_parity(h, tol)]
    else:
        verdicts += [check_pt_symmetry(h, p, tol), check_anti_pt_symmetry(h, p, tol)]
    notes = []
    if n == 2 and "a" in values and "b" in values:
        try:
            for op in (build_C(values["a"], values["b"]), build_C_pt(values["a"], values["b"])):
                verdicts.append(check_linear_symmetry(h, op, tol))
        except ExceptionalPointError as exc:
            notes.append(str(exc))
    meta = {"family": name, "params": values, "parity": parity_arg or p.name, "tol": tol}
    if notes:
        meta["notes"] = notes
    return report.to_json(report.verdict_bundle(verdicts, **meta))


def transform_document(p: HamiltonianParams) -> bytes:
    d = discrepancy_report(p)
    doc = {
        "params": p.as_dict(),
        "exact": _matrix_doc(d.exact),
        "printed": _matrix_doc(d.printed),
        "entry_diff_norm": d.entry_diff_norm,
        "spectra_equal": d.spectra_equal,
        "exact_spectrum": _spectrum_doc(d.exact_spectrum),
        "printed_spectrum": _spectrum_doc(d.printed_spectrum),
    }
    return (json.dumps(doc) + "\n").encode("utf-8")


def format_eps(eps, tol: float) -> str:
    digits = max(6, math.ceil(-math.log10(tol))) if tol < 1 else 6
    return "".join(f"{x:.{digits}f}\n" for x in eps)


def _cmd_classify(args):
    family = _family(args)
    values = _parse_set(args.set)
    if args.parity:
        _parse_parity(args.parity, 2 if isinstance(family, FamilyId) else family.dim)
    return lambda: sys.stdout.buffer.write(classify_document(family, values, args.parity, args.tol))


def _cmd_sweep(args):
    spec = _build_spec(args, _family(args))

    def run():
        result = run_sweep(spec, args.refine_tol)
        _write_outputs(report.sweep_bundle(spec, result, args.refine_tol), Path(args.out), args.name)
    return run


def _cmd_case(args):
    square = QUANTITIES[args.square]
    try:
        spec = preset_case(args.n, args.steps, FamilyId(args.family), square)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    def run():
        result = run_sweep(spec)
        _write_outputs(report.sweep_bundle(spec, result), Path(args.out), f"case{args.n}")
    return run


def _cmd_ep(args):
    spec = _build_spec(args, _family(args))
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    return lambda: sys.stdout.write(format_eps(find_exceptional_points(spec, args.tol), args.tol))


def _cmd_transform(args):
    values = _parse_set(args.set)
    try:
        p = HamiltonianParams.from_mapping(values)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    return lambda: sys.stdout.buffer.write(transform_document(p))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nhsym", description="Symmetry and exceptional-point analysis of small non-Hermitian matrices.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    families = ", ".join(f.value for f in FamilyId)

    def source(p):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--family", help=f"built-in family ({families})")
        g.add_argument("--template", help="path to a .ham template file")

    def sweep_opts(p):
        source(p)
        p.add_argument("--set", help="constant bindings, e.g. a=8,c=-3")
        p.add_argument("--alias", action="append", help="bind a parameter to the sweep parameter, e.g. c=b")
        p.add_argument("--param", required=True, help="sweep parameter")
        p.add_argument("--range", required=True, help="lo:hi (inclusive)")
        p.add_argument("--steps", type=int, default=DEFAULT_STEPS)

    p = sub.add_parser("classify", help="PT, anti-PT and C-commutation verdicts as JSON")
    source(p)
    p.add_argument("--set", required=True, help="parameter values, e.g. a=8,b=2,c=-3")
    p.add_argument("--parity", help="diag(1,-1) style literal or 'search'")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("sweep", help="sweep one parameter; writes CSV, JSON and SVG")
    sweep_opts(p)
    p.add_argument("--quantity", choices=sorted(QUANTITIES), default="eig")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--name", default="sweep", help="output file stem")
    p.add_argument("--refine-tol", type=float, default=DEFAULT_REFINE_TOL)
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("case", help="run one of the four preset sweeps")
    p.add_argument("n", type=int, help="case number 1-4")
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    p.add_argument("--family", default=FamilyId.H1_PT.value, choices=[f.value for f in FamilyId])
    p.add_argument("--square", choices=["eig2", "abs2", "re2"], default="eig2",
                   help="squared quantity used by case 4")
    p.set_defaults(handler=_cmd_case)

    p = sub.add_parser("ep", help="print exceptional points of a sweep")
    sweep_opts(p)
    p.add_argument("--tol", type=float, default=1e-6, help="bisection width")
    p.set_defaults(handler=_cmd_ep)

    p = sub.add_parser("transform", help="exact similarity transform vs printed h^PT, as JSON")
    p.add_argument("--set", required=True, help="a=..,b=..,c=..")
    p.set_defaults(handler=_cmd_transform)
    return parser


def _join_values(argv: list[str]) -> list[str]:
    """Turn ``--range -10:10`` into ``--range=-10:10`` so argparse keeps the value."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1] != "--":
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_values(argv))
        action = args.handler(args)
    except UsageError as exc:
        print(f"nhsym: error: {exc}", file=sys.stderr)
        print(parser.format_usage().rstrip(), file=sys.stderr)
        return 1
    try:
        action()
    except (ArithmeticError, ValueError, TemplateError, RuntimeError, KeyError) as exc:
        print(f"nhsym: computation error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
