"""Matrix templates: a tiny expression language for parameterised families.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | primary
    primary := NUMBER | 'i' | IDENT | 'sqrt' '(' expr ')' | '(' expr ')'

``i`` is the imaginary unit and ``sqrt`` takes the principal branch; neither
may be used as a parameter name.

Template files (``.ham``) are line oriented::

    name: h_original
    params: a, b, c
    dim: 2
    a + i*c | i*b
    i*b | -a + i*c
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Union

from nhsym.numerics import DenseMatrix, principal_sqrt

MAX_DEPTH = 64
MIN_DIM, MAX_DIM = 2, 8
RESERVED = frozenset({"i", "sqrt"})


class TemplateError(Exception):
    pass


class TemplateSyntaxError(TemplateError):
    def __init__(self, message: str, offset: int, source: str = ""):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset}")


class TemplateFormatError(TemplateError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class TemplateValidationError(TemplateError):
    pass


class EvaluationError(TemplateError, ArithmeticError):
    pass


class DivisionByZeroError(EvaluationError, ZeroDivisionError):
    pass


class MissingParameterError(EvaluationError, KeyError):
    def __str__(self):
        return self.args[0] if self.args else ""


class InstantiationError(EvaluationError):
    def __init__(self, row: int, col: int, cause: Exception):
        self.row, self.col, self.cause = row, col, cause
        super().__init__(f"entry ({row}, {col}): {cause}")


# --- AST --------------------------------------------------------------------


def _depth_field():
    return field(init=False, compare=False, repr=False, default=1)


@dataclass(frozen=True)
class Num:
    value: float
    depth: int = _depth_field()


@dataclass(frozen=True)
class Imag:
    depth: int = _depth_field()


@dataclass(frozen=True)
class Param:
    name: str
    depth: int = _depth_field()


@dataclass(frozen=True)
class Neg:
    operand: "Expression"
    depth: int = _depth_field()

    def __post_init__(self):
        object.__setattr__(self, "depth", self.operand.depth + 1)


@dataclass(frozen=True)
class Sqrt:
    arg: "Expression"
    depth: int = _depth_field()

    def __post_init__(self):
        object.__setattr__(self, "depth", self.arg.depth + 1)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"
    depth: int = _depth_field()

    def __post_init__(self):
        if self.op not in "+-*/" or len(self.op) != 1:
            raise ValueError(f"unknown operator {self.op!r}")
        object.__setattr__(self, "depth", max(self.left.depth, self.right.depth) + 1)


Expression = Union[Num, Imag, Param, Neg, Sqrt, BinOp]


def Add(x, y):
    return BinOp("+", x, y)


def Sub(x, y):
    return BinOp("-", x, y)


def Mul(x, y):
    return BinOp("*", x, y)


def Div(x, y):
    return BinOp("/", x, y)


# --- lexer / parser -----------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/()])
    """,
    re.VERBOSE,
)


def _byte_offset(src: str, idx: int) -> int:
    return len(src[:idx].encode("utf-8"))


def tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise TemplateSyntaxError(f"unexpected character {src[pos]!r}", _byte_offset(src, pos), src)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), _byte_offset(src, pos)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(src, len(src))))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = tokenize(src)
        self.pos = 0
        self.paren_depth = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return TemplateSyntaxError(msg, tok[2], self.src)

    def guard(self, node, tok):
        if node.depth > MAX_DEPTH:
            raise self.error(f"expression nested deeper than {MAX_DEPTH}", tok)
        return node

    def parse(self) -> Expression:
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise self.error(f"unexpected {tok[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            tok = self.advance()
            node = self.guard(BinOp(tok[1], node, self.term()), tok)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            tok = self.advance()
            node = self.guard(BinOp(tok[1], node, self.unary()), tok)
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            # iterative so a long run of minus signs cannot blow the stack
            count = 0
            while self.peek()[0] == "op" and self.peek()[1] == "-":
                self.advance()
                count += 1
                if count > MAX_DEPTH:
                    raise self.error(f"expression nested deeper than {MAX_DEPTH}", tok)
            node = self.primary()
            for _ in range(count):
                node = self.guard(Neg(node), tok)
            return node
        return self.primary()

    def primary(self):
        tok = self.advance()
        kind, text, _ = tok
        if kind == "num":
            value = float(text)
            if not math.isfinite(value):
                raise self.error(f"numeric literal {text!r} out of range", tok)
            return Num(value)
        if kind == "ident":
            if text == "i":
                return Imag()
            if text == "sqrt":
                if self.peek()[1] != "(":
                    raise self.error("expected '(' after sqrt")
                self.advance()
                node = self.nested(tok)
                return self.guard(Sqrt(node), tok)
            return Param(text)
        if kind == "op" and text == "(":
            return self.nested(tok)
        if kind == "end":
            raise self.error("unexpected end of expression", tok)
        raise self.error(f"unexpected {text!r}", tok)

    def nested(self, opener):
        self.paren_depth += 1
        if self.paren_depth > MAX_DEPTH:
            raise self.error(f"expression nested deeper than {MAX_DEPTH}", opener)
        node = self.expr()
        self.paren_depth -= 1
        tok = self.advance()
        if tok[1] != ")" or tok[0] != "op":
            raise self.error("expected ')'", tok)
        return node


def parse_expression(src: str) -> Expression:
    return _Parser(src).parse()


# --- printing -----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def format_expression(e: Expression) -> str:
    """Render with the minimum parentheses needed to reparse to the same tree."""
    return _fmt(e, 0)


def _fmt(e, ctx: int) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Imag):
        return "i"
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Sqrt):
        return f"sqrt({_fmt(e.arg, 0)})"
    if isinstance(e, Neg):
        return "-" + _fmt(e.operand, 3)
    prec = _PREC[e.op]
    # left-associative: right operand of equal precedence needs parentheses
    s = f"{_fmt(e.left, prec)} {e.op} {_fmt(e.right, prec + 1)}"
    return f"({s})" if prec < ctx else s


def parameters(e: Expression) -> set[str]:
    if isinstance(e, Param):
        return {e.name}
    if isinstance(e, Neg):
        return parameters(e.operand)
    if isinstance(e, Sqrt):
        return parameters(e.arg)
    if isinstance(e, BinOp):
        return parameters(e.left) | parameters(e.right)
    return set()


# --- evaluation ---------------------------------------------------------------


def evaluate(e: Expression, assignment: Mapping[str, float]) -> complex:
    value = _eval(e, assignment)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise EvaluationError(f"expression evaluated to non-finite value {value!r}")
    return value


def _eval(e, env) -> complex:
    if isinstance(e, Num):
        return complex(e.value)
    if isinstance(e, Imag):
        return 1j
    if isinstance(e, Param):
        try:
            return complex(float(env[e.name]))
        except KeyError:
            raise MissingParameterError(f"no value for parameter {e.name!r}") from None
    if isinstance(e, Neg):
        return -_eval(e.operand, env)
    if isinstance(e, Sqrt):
        return principal_sqrt(_eval(e.arg, env))
    x, y = _eval(e.left, env), _eval(e.right, env)
    if e.op == "+":
        return x + y
    if e.op == "-":
        return x - y
    if e.op == "*":
        return x * y
    if y == 0:
        raise DivisionByZeroError("division by zero")
    return x / y


# --- templates ----------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class HamiltonianTemplate:
    name: str
    params: tuple[str, ...]
    entries: tuple[tuple[Expression, ...], ...]

    def __post_init__(self):
        params = tuple(self.params)
        entries = tuple(tuple(row) for row in self.entries)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "entries", entries)
        n = len(entries)
        if any(len(row) != n for row in entries):
            raise TemplateValidationError("non-square matrix")
        if not MIN_DIM <= n <= MAX_DIM:
            raise TemplateValidationError(f"dimension {n} outside {MIN_DIM}..{MAX_DIM}")
        seen = set()
        for p in params:
            if not _IDENT.match(p):
                raise TemplateValidationError(f"invalid parameter name {p!r}")
            if p in RESERVED:
                raise TemplateValidationError(f"{p!r} is reserved and cannot be a parameter")
            if p in seen:
                raise TemplateValidationError(f"duplicate parameter {p!r}")
            seen.add(p)
        for r, row in enumerate(entries):
            for c, e in enumerate(row):
                for name in sorted(parameters(e) - seen):
                    raise TemplateValidationError(f"undeclared identifier {name!r} in entry ({r}, {c})")

    @property
    def dim(self) -> int:
        return len(self.entries)

    @classmethod
    def from_strings(cls, name: str, params, rows) -> "HamiltonianTemplate":
        return cls(name, tuple(params), tuple(tuple(parse_expression(s) for s in row) for row in rows))

    def row_strings(self) -> list[list[str]]:
        return [[format_expression(e) for e in row] for row in self.entries]

    def to_text(self) -> str:
        lines = [f"name: {self.name}", f"params: {', '.join(self.params)}", f"dim: {self.dim}"]
        lines += [" | ".join(row) for row in self.row_strings()]
        return "\n".join(lines) + "\n"


def instantiate(t: HamiltonianTemplate, assignment: Mapping[str, float]) -> DenseMatrix:
    missing = [p for p in t.params if p not in assignment]
    if missing:
        raise MissingParameterError(f"no value for parameter(s) {', '.join(map(repr, missing))}")
    values = []
    for r, row in enumerate(t.entries):
        for c, e in enumerate(row):
            try:
                values.append(evaluate(e, assignment))
            except EvaluationError as exc:
                raise InstantiationError(r, c, exc) from exc
    return DenseMatrix(t.dim, t.dim, tuple(values))


def _header(line: str, key: str, lineno: int) -> str:
    prefix, sep, rest = line.partition(":")
    if not sep or prefix.strip() != key:
        raise TemplateFormatError(f"expected '{key}: ...'", lineno)
    return rest.strip()


def parse_template(text: str) -> HamiltonianTemplate:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            lines.append((lineno, content))
    if len(lines) < 3:
        last = lines[-1][0] if lines else 1
        raise TemplateFormatError("missing header (need name, params, dim)", last)

    name = _header(lines[0][1], "name", lines[0][0])
    if not name:
        raise TemplateFormatError("empty template name", lines[0][0])

    lineno = lines[1][0]
    raw_params = _header(lines[1][1], "params", lineno)
    params = [p.strip() for p in raw_params.split(",")] if raw_params else []
    seen = set()
    for p in params:
        if not _IDENT.match(p):
            raise TemplateFormatError(f"invalid parameter name {p!r}", lineno)
        if p in RESERVED:
            raise TemplateFormatError(f"{p!r} is reserved and cannot be a parameter", lineno)
        if p in seen:
            raise TemplateFormatError(f"duplicate parameter {p!r}", lineno)
        seen.add(p)

    lineno = lines[2][0]
    dim_text = _header(lines[2][1], "dim", lineno)
    try:
        dim = int(dim_text)
    except ValueError:
        raise TemplateFormatError(f"dim must be an integer, got {dim_text!r}", lineno) from None
    if not MIN_DIM <= dim <= MAX_DIM:
        raise TemplateFormatError(f"dim must be in {MIN_DIM}..{MAX_DIM}, got {dim}", lineno)

    body = lines[3:]
    if len(body) != dim:
        where = body[-1][0] if body else lineno
        raise TemplateFormatError(f"non-square matrix: dim is {dim} but found {len(body)} rows", where)
    rows = []
    for lineno, content in body:
        fields = [f.strip() for f in content.split("|")]
        if len(fields) != dim:
            raise TemplateFormatError(f"non-square matrix: expected {dim} fields, found {len(fields)}", lineno)
        row = []
        for f in fields:
            try:
                row.append(parse_expression(f))
            except TemplateSyntaxError as exc:
                raise TemplateFormatError(str(exc) + f" in {f!r}", lineno) from exc
        rows.append(tuple(row))
    try:
        return HamiltonianTemplate(name, tuple(params), tuple(rows))
    except TemplateValidationError as exc:
        raise TemplateValidationError(f"{exc} (template {name!r})") from exc


def load_template_file(path) -> HamiltonianTemplate:
    text = Path(path).read_text(encoding="utf-8")
    return parse_template(text)


def builtin_template(name: str) -> HamiltonianTemplate:
    """Load one of the shipped ``.ham`` fixtures by family name."""
    res = resources.files("nhsym") / "data" / f"{name}.ham"
    if not res.is_file():
        raise FileNotFoundError(f"no built-in template named {name!r}")
    return parse_template(res.read_text(encoding="utf-8"))
