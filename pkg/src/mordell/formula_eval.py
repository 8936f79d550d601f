"""S-expression formulas over the group's affine chart and their bounded
three-valued evaluation.

The shape is a boolean combination of quantifier-free conditions and
existential blocks "(exists-gamma n qf)": the block asks for n group
elements whose coordinate pairs, bound to y1..y(2n), satisfy the body
together with the free variables x1..xs.

Gamma is infinite, so a block search over a coefficient box can confirm an
existential but never refute one.  Evaluation is therefore Kleene's strong
three-valued logic: True carries re-checkable witnesses, False only arises
from quantifier-free parts and negation, and exhausted searches yield
Unknown tagged with the bound they died at.

Identity convention (shared with the solution search machinery): a
candidate tuple is skipped, not judged, when it puts the identity in a slot
whose y-variables the body mentions.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InputError
from .exact_num import MultiPoly, _as_fraction, parse_rational, poly_eval
from .fg_group import Coords, DEFAULT_COEFF_BOUND, GammaSpec
from .group_core import GroupPoint, is_identity

__all__ = [
    "ParseError",
    "Cmp",
    "QAnd",
    "QOr",
    "QNot",
    "Block",
    "FAnd",
    "FOr",
    "FNot",
    "Formula",
    "TriBool",
    "parse",
    "parse_qf",
    "format_formula",
    "format_qf",
    "eval_qf",
    "eval_block",
    "eval_formula",
]


class ParseError(InputError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


# -- AST -----------------------------------------------------------------------


@dataclass(frozen=True)
class Cmp:
    """Atomic comparison of two polynomials; op is '=', '<' or '<='."""

    op: str
    lhs: MultiPoly
    rhs: MultiPoly

    def evaluate(self, values: Sequence) -> bool:
        a = poly_eval(self.lhs, values)
        b = poly_eval(self.rhs, values)
        if self.op == "=":
            return a == b
        if self.op == "<":
            return a < b
        return a <= b

    def used_vars(self) -> frozenset[int]:
        return frozenset(self.lhs.used_variables() | self.rhs.used_variables())


@dataclass(frozen=True)
class QAnd:
    parts: tuple

    def evaluate(self, values: Sequence) -> bool:
        return all(p.evaluate(values) for p in self.parts)

    def used_vars(self) -> frozenset[int]:
        return frozenset().union(*(p.used_vars() for p in self.parts))


@dataclass(frozen=True)
class QOr:
    parts: tuple

    def evaluate(self, values: Sequence) -> bool:
        return any(p.evaluate(values) for p in self.parts)

    def used_vars(self) -> frozenset[int]:
        return frozenset().union(*(p.used_vars() for p in self.parts))


@dataclass(frozen=True)
class QNot:
    part: object

    def evaluate(self, values: Sequence) -> bool:
        return not self.part.evaluate(values)

    def used_vars(self) -> frozenset[int]:
        return self.part.used_vars()


QFFormula = Cmp | QAnd | QOr | QNot


@dataclass(frozen=True)
class Block:
    """Existential over n group elements; body arity is s + 2n."""

    n: int
    body: QFFormula


@dataclass(frozen=True)
class FAnd:
    parts: tuple


@dataclass(frozen=True)
class FOr:
    parts: tuple


@dataclass(frozen=True)
class FNot:
    part: object


FormulaNode = QFFormula | Block | FAnd | FOr | FNot


@dataclass(frozen=True)
class Formula:
    root: FormulaNode
    free_arity: int


@dataclass(frozen=True)
class TriBool:
    """Three-valued verdict.  True carries one witness tuple per confirmed
    block (re-checkable exactly); Unknown carries the search bound."""

    kind: str  # "true" | "false" | "unknown"
    witnesses: tuple[tuple[GroupPoint, ...], ...] = ()
    bound: int | None = None

    def __str__(self):
        if self.kind == "unknown":
            return f"unknown(bound={self.bound})"
        return self.kind

    def is_true(self) -> bool:
        return self.kind == "true"

    def is_false(self) -> bool:
        return self.kind == "false"


TB_FALSE = TriBool("false")


def _tb_true(witnesses=()) -> TriBool:
    return TriBool("true", tuple(witnesses))


def _tb_unknown(bound: int) -> TriBool:
    return TriBool("unknown", (), bound)


# -- tokenizer and reader --------------------------------------------------------


@dataclass(frozen=True)
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, col, i = 1, 1, 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch in "()":
            toks.append(_Tok(ch, line, col))
            col += 1
            i += 1
        else:
            j = i
            while j < len(text) and text[j] not in " \t\r\n()":
                j += 1
            toks.append(_Tok(text[i:j], line, col))
            col += j - i
            i = j
    return toks


@dataclass(frozen=True)
class _Node:
    """Raw s-expression: either an atom (items is None) or a list."""

    text: str | None
    items: tuple | None
    line: int
    col: int

    @property
    def is_atom(self) -> bool:
        return self.items is None


def _read(toks: list[_Tok], pos: int) -> tuple[_Node, int]:
    if pos >= len(toks):
        last = toks[-1] if toks else _Tok("", 1, 1)
        raise ParseError("unexpected end of input", last.line, last.col)
    t = toks[pos]
    if t.text == "(":
        items = []
        pos += 1
        while True:
            if pos >= len(toks):
                raise ParseError("missing ')'", t.line, t.col)
            if toks[pos].text == ")":
                return _Node(None, tuple(items), t.line, t.col), pos + 1
            node, pos = _read(toks, pos)
            items.append(node)
    if t.text == ")":
        raise ParseError("unexpected ')'", t.line, t.col)
    return _Node(t.text, None, t.line, t.col), pos + 1


def _read_all(text: str) -> _Node:
    toks = _tokenize(text)
    if not toks:
        raise ParseError("empty input", 1, 1)
    node, pos = _read(toks, 0)
    if pos != len(toks):
        t = toks[pos]
        raise ParseError(f"trailing input {t.text!r}", t.line, t.col)
    return node


# -- semantic analysis ------------------------------------------------------------

_VAR_RE = re.compile(r"([xy])(\d+)")
_INT_RE = re.compile(r"\d+")
_QF_HEADS = ("=", "<", "<=", "and", "or", "not")
_POLY_HEADS = ("+", "*", "-", "^")


def _head(node: _Node) -> str | None:
    if node.is_atom or not node.items or not node.items[0].is_atom:
        return None
    return node.items[0].text


def _contains_block(node: _Node) -> bool:
    if node.is_atom:
        return False
    if _head(node) == "exists-gamma":
        return True
    return any(_contains_block(it) for it in node.items)


def _scan_vars(node: _Node, in_block_n: int | None, seen: dict) -> None:
    """Record the largest x index; validate y usage and block shape."""
    if node.is_atom:
        m = _VAR_RE.fullmatch(node.text)
        if not m:
            return
        kind, idx = m.group(1), int(m.group(2))
        if idx < 1:
            raise ParseError(
                f"variable indices start at 1: {node.text}", node.line, node.col
            )
        if kind == "x":
            seen["max_x"] = max(seen["max_x"], idx)
        else:
            if in_block_n is None:
                raise ParseError(
                    f"unbound variable {node.text}: y-variables only live "
                    "inside exists-gamma",
                    node.line,
                    node.col,
                )
            if idx > 2 * in_block_n:
                raise ParseError(
                    f"unbound variable {node.text}: block binds y1..y{2 * in_block_n}",
                    node.line,
                    node.col,
                )
        return
    if _head(node) == "exists-gamma":
        if in_block_n is not None:
            raise ParseError("blocks cannot nest", node.line, node.col)
        if len(node.items) != 3:
            raise ParseError(
                "exists-gamma needs a count and a body", node.line, node.col
            )
        count = node.items[1]
        if not (count.is_atom and _INT_RE.fullmatch(count.text or "")):
            raise ParseError(
                "exists-gamma count must be an integer", count.line, count.col
            )
        n = int(count.text)
        if n < 1:
            raise ParseError(
                "exists-gamma needs at least one bound element",
                count.line,
                count.col,
            )
        _scan_vars(node.items[2], n, seen)
        return
    for it in node.items:
        _scan_vars(it, in_block_n, seen)


def _build_poly(node: _Node, arity: int, s: int) -> MultiPoly:
    if node.is_atom:
        text = node.text
        m = _VAR_RE.fullmatch(text)
        if m:
            kind, idx = m.group(1), int(m.group(2))
            pos = idx - 1 if kind == "x" else s + idx - 1
            return MultiPoly.variable(arity, pos)
        try:
            return MultiPoly.constant(arity, parse_rational(text))
        except InputError:
            raise ParseError(
                f"expected a rational or variable, got {text!r}",
                node.line,
                node.col,
            ) from None
    head = _head(node)
    args = node.items[1:]
    if head == "+":
        if not args:
            raise ParseError("(+ ...) needs at least one argument", node.line, node.col)
        acc = _build_poly(args[0], arity, s)
        for a in args[1:]:
            acc = acc + _build_poly(a, arity, s)
        return acc
    if head == "*":
        if not args:
            raise ParseError("(* ...) needs at least one argument", node.line, node.col)
        acc = _build_poly(args[0], arity, s)
        for a in args[1:]:
            acc = acc * _build_poly(a, arity, s)
        return acc
    if head == "-":
        if len(args) != 2:
            raise ParseError("(- ...) takes exactly two arguments", node.line, node.col)
        return _build_poly(args[0], arity, s) - _build_poly(args[1], arity, s)
    if head == "^":
        if len(args) != 2:
            raise ParseError("(^ ...) takes a base and an exponent", node.line, node.col)
        exp = args[1]
        if not (exp.is_atom and _INT_RE.fullmatch(exp.text or "")) or int(exp.text) < 1:
            raise ParseError(
                "exponent must be a positive integer", exp.line, exp.col
            )
        return _build_poly(args[0], arity, s) ** int(exp.text)
    raise ParseError(
        f"expected a polynomial, got {head or node.text!r}", node.line, node.col
    )


def _build_qf(node: _Node, arity: int, s: int) -> QFFormula:
    head = _head(node)
    if head in ("=", "<", "<="):
        if len(node.items) != 3:
            raise ParseError(
                f"({head} ...) takes exactly two polynomials", node.line, node.col
            )
        return Cmp(
            head,
            _build_poly(node.items[1], arity, s),
            _build_poly(node.items[2], arity, s),
        )
    if head == "and" or head == "or":
        if len(node.items) < 2:
            raise ParseError(
                f"({head} ...) needs at least one argument", node.line, node.col
            )
        parts = tuple(_build_qf(it, arity, s) for it in node.items[1:])
        return QAnd(parts) if head == "and" else QOr(parts)
    if head == "not":
        if len(node.items) != 2:
            raise ParseError("(not ...) takes exactly one argument", node.line, node.col)
        return QNot(_build_qf(node.items[1], arity, s))
    raise ParseError(
        f"expected a condition, got {head or node.text!r}", node.line, node.col
    )


def _build_formula(node: _Node, s: int) -> FormulaNode:
    head = _head(node)
    if head == "exists-gamma":
        n = int(node.items[1].text)
        return Block(n, _build_qf(node.items[2], s + 2 * n, s))
    if head in ("and", "or", "not") and not _contains_block(node):
        return _build_qf(node, s, s)
    if head == "and" or head == "or":
        if len(node.items) < 2:
            raise ParseError(
                f"({head} ...) needs at least one argument", node.line, node.col
            )
        parts = tuple(_build_formula(it, s) for it in node.items[1:])
        return FAnd(parts) if head == "and" else FOr(parts)
    if head == "not":
        if len(node.items) != 2:
            raise ParseError("(not ...) takes exactly one argument", node.line, node.col)
        return FNot(_build_formula(node.items[1], s))
    return _build_qf(node, s, s)


def parse(text: str, free_arity: int | None = None) -> Formula:
    """Parse a formula; the free arity s is the largest x index unless given
    explicitly (an explicit s below a used index is an arity clash)."""
    tree = _read_all(text)
    seen = {"max_x": 0}
    _scan_vars(tree, None, seen)
    if free_arity is None:
        s = seen["max_x"]
    else:
        if free_arity < seen["max_x"]:
            raise InputError(
                f"declared free arity {free_arity} but x{seen['max_x']} is used"
            )
        s = free_arity
    return Formula(_build_formula(tree, s), s)


def parse_qf(text: str, arity: int | None = None) -> QFFormula:
    """Parse a block-free condition over x-variables only."""
    f = parse(text, arity)
    if isinstance(f.root, (Block, FAnd, FOr, FNot)):
        raise InputError("expected a quantifier-free condition without blocks")
    return f.root


def parse_poly(text: str, arity: int | None = None) -> MultiPoly:
    """Parse a bare polynomial over x-variables (no comparisons, no blocks)."""
    tree = _read_all(text)
    seen = {"max_x": 0}
    _scan_vars_poly(tree, seen)
    if arity is None:
        s = seen["max_x"]
        if s == 0:
            s = 1  # constant polynomial still needs a slot count
    else:
        if arity < seen["max_x"]:
            raise InputError(f"declared arity {arity} but x{seen['max_x']} is used")
        s = arity
    return _build_poly(tree, s, s)


def _scan_vars_poly(node: _Node, seen: dict) -> None:
    if node.text is not None:
        m = _VAR_RE.fullmatch(node.text)
        if m:
            kind, idx = m.group(1), int(m.group(2))
            if idx < 1:
                raise ParseError(f"variable index must be >= 1: {node.text}", node.line, node.col)
            if kind == "y":
                raise ParseError("polynomials use x-variables only", node.line, node.col)
            seen["max_x"] = max(seen["max_x"], idx)
        return
    for item in node.items:
        _scan_vars_poly(item, seen)


# -- canonical printing -----------------------------------------------------------


def _var_name(pos: int, s: int) -> str:
    return f"x{pos + 1}" if pos < s else f"y{pos - s + 1}"


def _fmt_poly(p: MultiPoly, s: int) -> str:
    if p.is_zero():
        return "0"
    terms = []
    for exps, coeff in sorted(
        p.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True
    ):
        factors = []
        for pos, e in enumerate(exps):
            if e == 0:
                continue
            name = _var_name(pos, s)
            factors.append(name if e == 1 else f"(^ {name} {e})")
        if not factors:
            terms.append(str(coeff))
        elif coeff == 1 and len(factors) == 1:
            terms.append(factors[0])
        elif coeff == 1:
            terms.append("(* " + " ".join(factors) + ")")
        else:
            terms.append("(* " + str(coeff) + " " + " ".join(factors) + ")")
    if len(terms) == 1:
        return terms[0]
    return "(+ " + " ".join(terms) + ")"


def _fmt_node(node, s: int) -> str:
    if isinstance(node, Cmp):
        return f"({node.op} {_fmt_poly(node.lhs, s)} {_fmt_poly(node.rhs, s)})"
    if isinstance(node, (QAnd, FAnd)):
        return "(and " + " ".join(_fmt_node(p, s) for p in node.parts) + ")"
    if isinstance(node, (QOr, FOr)):
        return "(or " + " ".join(_fmt_node(p, s) for p in node.parts) + ")"
    if isinstance(node, (QNot, FNot)):
        return f"(not {_fmt_node(node.part, s)})"
    if isinstance(node, Block):
        return f"(exists-gamma {node.n} {_fmt_node(node.body, s)})"
    raise InputError(f"not a formula node: {node!r}")


def format_formula(f: Formula) -> str:
    return _fmt_node(f.root, f.free_arity)


def format_qf(qf: QFFormula, arity: int) -> str:
    """Render a standalone condition whose variables are all free."""
    return _fmt_node(qf, arity)


def format_poly(p: MultiPoly) -> str:
    """Render a bare polynomial; every position prints as an x-variable."""
    return _fmt_poly(p, p.arity)


# -- evaluation --------------------------------------------------------------------


def eval_qf(qf: QFFormula, assignment: Sequence) -> bool:
    """Exact two-valued evaluation at a full rational assignment."""
    vals = [_as_fraction(v) for v in assignment]
    return qf.evaluate(vals)


def _block_slots_used(block: Block, s: int) -> list[bool]:
    used = block.body.used_vars()
    return [
        (s + 2 * j in used) or (s + 2 * j + 1 in used) for j in range(block.n)
    ]


def eval_block(
    gamma: GammaSpec,
    block: Block,
    x_assign: Sequence,
    bound: int = DEFAULT_COEFF_BOUND,
    skipped: list | None = None,
) -> TriBool:
    """Search the coefficient box for a witness tuple.

    Candidates run in lexicographic coefficient order (slot 1 most
    significant), so the reported witness is the least one.  Exhaustion is
    Unknown, never False: the group is infinite and the search is not.
    """
    body_arity = _qf_arity(block.body)
    s = body_arity - 2 * block.n
    if s < 0:
        raise InputError("block body arity smaller than its bound variables")
    if len(x_assign) != s:
        raise InputError(f"expected {s} free values, got {len(x_assign)}")
    xs = [_as_fraction(v) for v in x_assign]
    slot_used = _block_slots_used(block, s)
    candidates = sorted(
        gamma.iter_coords(bound), key=lambda c: (c.free, c.torsion)
    )
    realized = [(c, gamma.realize(c)) for c in candidates]
    for combo in itertools.product(realized, repeat=block.n):
        points = tuple(p for _, p in combo)
        if any(u and is_identity(p) for u, p in zip(slot_used, points)):
            if skipped is not None:
                skipped.append(points)
            continue
        vals = list(xs)
        for p in points:
            if is_identity(p):
                vals.extend((Fraction(0), Fraction(0)))
            else:
                vals.extend((p.x, p.y))
        if block.body.evaluate(vals):
            return _tb_true((points,))
    return _tb_unknown(bound)


def _qf_arity(qf: QFFormula) -> int:
    if isinstance(qf, Cmp):
        return qf.lhs.arity
    if isinstance(qf, QNot):
        return _qf_arity(qf.part)
    return _qf_arity(qf.parts[0])


def eval_formula(
    gamma: GammaSpec,
    f: Formula,
    x_assign: Sequence,
    bound: int = DEFAULT_COEFF_BOUND,
) -> TriBool:
    """Kleene strong three-valued evaluation, short-circuiting as soon as a
    connective's value is determined."""
    if len(x_assign) != f.free_arity:
        raise InputError(
            f"expected {f.free_arity} free values, got {len(x_assign)}"
        )
    xs = [_as_fraction(v) for v in x_assign]
    return _eval_node(gamma, f.root, xs, bound)


def _eval_node(gamma, node, xs, bound: int) -> TriBool:
    if isinstance(node, (Cmp, QAnd, QOr, QNot)):
        return _tb_true() if node.evaluate(xs) else TB_FALSE
    if isinstance(node, Block):
        return eval_block(gamma, node, xs, bound)
    if isinstance(node, FNot):
        inner = _eval_node(gamma, node.part, xs, bound)
        if inner.is_true():
            return TB_FALSE
        if inner.is_false():
            return _tb_true()
        return _tb_unknown(bound)
    if isinstance(node, FAnd):
        witnesses = []
        saw_unknown = False
        for part in node.parts:
            v = _eval_node(gamma, part, xs, bound)
            if v.is_false():
                return TB_FALSE
            if v.is_true():
                witnesses.extend(v.witnesses)
            else:
                saw_unknown = True
        return _tb_unknown(bound) if saw_unknown else _tb_true(witnesses)
    if isinstance(node, FOr):
        saw_unknown = False
        for part in node.parts:
            v = _eval_node(gamma, part, xs, bound)
            if v.is_true():
                return v
            if not v.is_false():
                saw_unknown = True
        return _tb_unknown(bound) if saw_unknown else TB_FALSE
    raise InputError(f"not a formula node: {node!r}")
