"""CSV, JSON and SVG output for sweeps and symmetry verdicts."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Any, Sequence, Union

from nhsym import __version__
from nhsym.symmetry import SymmetryVerdict, VerdictKind
from nhsym.sweep import (
    DEFAULT_REFINE_TOL,
    Alias,
    OutputQuantity,
    PhaseLabel,
    SweepResult,
    SweepSpec,
    run_sweep,
)
from nhsym.template import HamiltonianTemplate
from nhsym.transform import FamilyId

WIDTH, HEIGHT, MARGIN = 800, 600, 60
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


@dataclass(frozen=True)
class ReportBundle:
    metadata: dict
    payload: Union[SweepResult, tuple]


def _f(x: float) -> float:
    return x + 0.0  # drop negative zero


def _num(x: float) -> str:
    return format(_f(x), ".17g")


# --- bundles ------------------------------------------------------------------


def sweep_metadata(spec: SweepSpec, result: SweepResult | None = None,
                   refine_tol: float = DEFAULT_REFINE_TOL) -> dict:
    bindings = {}
    for name in sorted(spec.bindings):
        b = spec.bindings[name]
        bindings[name] = {"alias": b.target} if isinstance(b, Alias) else b
    meta: dict[str, Any] = {"family": spec.family_name}
    if isinstance(spec.family, HamiltonianTemplate):
        t = spec.family
        meta["template"] = {"name": t.name, "params": list(t.params), "rows": t.row_strings()}
    meta.update(
        sweep_param=spec.sweep_param,
        range=[spec.lo, spec.hi],
        bindings=bindings,
        steps=spec.steps,
        output_quantity=spec.output_quantity.value,
        refine_tol=refine_tol,
    )
    if result is not None:
        meta["asymmetry_interval"] = list(result.asymmetry_interval) if result.asymmetry_interval else None
        meta["notices"] = list(result.notices)
    meta["tool_version"] = __version__
    return meta


def sweep_bundle(spec: SweepSpec, result: SweepResult, refine_tol: float = DEFAULT_REFINE_TOL) -> ReportBundle:
    return ReportBundle(sweep_metadata(spec, result, refine_tol), result)


def verdict_bundle(verdicts: Sequence[SymmetryVerdict], **metadata) -> ReportBundle:
    meta = dict(metadata)
    meta["tool_version"] = __version__
    return ReportBundle(meta, tuple(verdicts))


def spec_from_metadata(meta: dict) -> SweepSpec:
    """Rebuild the sweep specification recorded in a bundle's metadata."""
    if "template" in meta:
        t = meta["template"]
        family = HamiltonianTemplate.from_strings(t["name"], t["params"], t["rows"])
    else:
        family = FamilyId(meta["family"])
    bindings = {k: Alias(v["alias"]) if isinstance(v, dict) else float(v) for k, v in meta["bindings"].items()}
    lo, hi = meta["range"]
    return SweepSpec(family, meta["sweep_param"], lo, hi, meta["steps"], bindings,
                     OutputQuantity(meta["output_quantity"]))


def rerun(meta: dict) -> SweepResult:
    return run_sweep(spec_from_metadata(meta), meta.get("refine_tol", DEFAULT_REFINE_TOL))


# --- CSV ----------------------------------------------------------------------


def _require_sweep(r: ReportBundle) -> SweepResult:
    if not isinstance(r.payload, SweepResult):
        raise TypeError("this format needs a sweep result payload")
    return r.payload


def csv_header(n_branches: int) -> list[str]:
    cols = ["param"]
    for k in range(1, n_branches + 1):
        cols += [f"re_l{k}", f"im_l{k}"]
    return cols + ["phase", "asymmetry"]


def to_csv(r: ReportBundle) -> bytes:
    res = _require_sweep(r)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_header(len(res.branches)))
    for k, t in enumerate(res.grid):
        row = [_num(t)]
        for br in res.branches:
            row += [_num(br[k].real), _num(br[k].imag)]
        a = res.asymmetry[k] if res.asymmetry else None
        row += [PhaseLabel(res.phases[k]).value, "" if a is None else _num(a)]
        w.writerow(row)
    return buf.getvalue().encode("utf-8")


def read_csv(data: bytes) -> dict:
    """Parse :func:`to_csv` output into columns (floats, labels, None for blanks)."""
    rows = list(csv.reader(io.StringIO(data.decode("utf-8"))))
    header, body = rows[0], rows[1:]
    cols: dict[str, list] = {h: [] for h in header}
    for row in body:
        for h, v in zip(header, row):
            if h == "phase":
                cols[h].append(PhaseLabel(v))
            else:
                cols[h].append(None if v == "" else float(v))
    return cols


# --- JSON ---------------------------------------------------------------------


def _verdict_doc(v: SymmetryVerdict) -> dict:
    return {"kind": VerdictKind(v.kind).value, "operator": v.operator, "residual": _f(v.residual), "holds": v.holds}


def bundle_document(r: ReportBundle) -> dict:
    if not isinstance(r.payload, SweepResult):
        return {"metadata": r.metadata, "verdicts": [_verdict_doc(v) for v in r.payload]}
    res = r.payload
    return {
        "metadata": r.metadata,
        "grid": [_f(t) for t in res.grid],
        "branches": [{"re": [_f(z.real) for z in br], "im": [_f(z.imag) for z in br]} for br in res.branches],
        "phases": [PhaseLabel(p).value for p in res.phases],
        "exceptional_points": [_f(x) for x in res.exceptional_points],
        "asymmetry": [None if a is None else _f(a) for a in res.asymmetry],
    }


def to_json(r: ReportBundle) -> bytes:
    return (json.dumps(bundle_document(r), allow_nan=False) + "\n").encode("utf-8")


def from_json(data: bytes) -> ReportBundle:
    doc = json.loads(data)
    meta = doc["metadata"]
    if "verdicts" in doc:
        verdicts = tuple(
            SymmetryVerdict(VerdictKind(v["kind"]), v["residual"], v["holds"], v.get("operator", ""))
            for v in doc["verdicts"]
        )
        return ReportBundle(meta, verdicts)
    interval = meta.get("asymmetry_interval")
    res = SweepResult(
        grid=tuple(doc["grid"]),
        branches=tuple(tuple(complex(x, y) for x, y in zip(b["re"], b["im"])) for b in doc["branches"]),
        phases=tuple(PhaseLabel(p) for p in doc["phases"]),
        exceptional_points=tuple(doc["exceptional_points"]),
        asymmetry=tuple(doc["asymmetry"]),
        asymmetry_interval=tuple(interval) if interval else None,
        notices=tuple(meta.get("notices", ())),
    )
    return ReportBundle(meta, res)


# --- SVG ----------------------------------------------------------------------


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9)
    ticks = []
    k = first
    while k * step <= hi + 1e-9 * step:
        ticks.append(round(k * step, 12) + 0.0)
        k += 1
    return ticks


def _y_range(series: list[list[float]]) -> tuple[float, float]:
    vals = [v for s in series for v in s]
    lo, hi = min(vals), max(vals)
    if hi - lo < 1e-12 * max(1.0, abs(hi)):
        return lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def to_svg(r: ReportBundle, which: str = "Both") -> bytes:
    res = _require_sweep(r)
    which = which.capitalize()
    if which not in ("Re", "Im", "Both"):
        raise ValueError(f"component must be Re, Im or Both, got {which!r}")
    comps = [c for c in ("Re", "Im") if which in (c, "Both")]

    series = []  # (label, values, color, dashed)
    for k, br in enumerate(res.branches):
        color = _COLORS[k % len(_COLORS)]
        for comp in comps:
            vals = [z.real if comp == "Re" else z.imag for z in br]
            series.append((f"{comp} λ{k + 1}", vals, color, comp == "Im"))

    x0, x1 = res.grid[0], res.grid[-1]
    y0, y1 = _y_range([s[1] for s in series])
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def px(x):
        return MARGIN + (x - x0) / (x1 - x0) * pw

    def py(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph

    meta = r.metadata
    title = f"{meta.get('family', '')}: {meta.get('output_quantity', '')} vs {meta.get('sweep_param', '')}"
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.2f}" y="{MARGIN / 2:.2f}" text-anchor="middle" font-size="16">{_esc(title)}</text>',
        f'<rect class="frame" x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in nice_ticks(x0, x1):
        x = px(t)
        out.append(f'<line class="tick" x1="{x:.2f}" y1="{HEIGHT - MARGIN}" x2="{x:.2f}" '
                   f'y2="{HEIGHT - MARGIN + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{HEIGHT - MARGIN + 20}" text-anchor="middle" '
                   f'font-size="12">{t:g}</text>')
    for t in nice_ticks(y0, y1):
        y = py(t)
        out.append(f'<line class="tick" x1="{MARGIN - 5}" y1="{y:.2f}" x2="{MARGIN}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="12">{t:g}</text>')
    out.append(f'<text x="{WIDTH / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle" '
               f'font-size="14">{_esc(str(meta.get("sweep_param", "")))}</text>')

    for ep in res.exceptional_points:
        x = px(ep)
        out.append(f'<line class="ep-marker" x1="{x:.2f}" y1="{MARGIN}" x2="{x:.2f}" y2="{HEIGHT - MARGIN}" '
                   f'stroke="gray" stroke-dasharray="6,4"/>')

    for label, vals, color, dashed in series:
        pts = " ".join(f"{px(t):.2f},{py(v):.2f}" for t, v in zip(res.grid, vals))
        dash = ' stroke-dasharray="8,4"' if dashed else ""
        out.append(f'<polyline class="branch" data-label="{_esc(label)}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"{dash} points="{pts}"/>')

    lx, ly = WIDTH - MARGIN - 130, MARGIN + 10
    out.append('<g class="legend">')
    for k, (label, _, color, dashed) in enumerate(series):
        y = ly + 18 * k
        dash = ' stroke-dasharray="8,4"' if dashed else ""
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 25}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 32}" y="{y + 4}" font-size="12">{_esc(label)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
