"""Exact scalar and polynomial arithmetic over the rationals.

Scalars are `fractions.Fraction` values (always lowest terms, positive
denominator); this module adds the strict text round-trip the rest of the
package relies on.  Polynomials are sparse maps from exponent vectors to
nonzero rational coefficients, with a fixed variable count per polynomial.
No floating point anywhere.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import InputError

# The one rational type used across the package.
Rational = Fraction

# optional minus, digits, optional /digits -- no whitespace, no floats
_RATIONAL_RE = re.compile(r"-?\d+(?:/\d+)?")


def parse_rational(text: str) -> Fraction:
    """Parse a canonical rational literal ("5", "-383/1000").

    Rejects anything outside the strict grammar: floats, exponents, leading
    '+', internal whitespace, zero denominators.
    """
    if not isinstance(text, str) or not _RATIONAL_RE.fullmatch(text):
        raise InputError(f"not a canonical rational literal: {text!r}")
    num, slash, den = text.partition("/")
    if slash and int(den) == 0:
        raise InputError(f"zero denominator: {text!r}")
    return Fraction(int(num), int(den)) if slash else Fraction(int(num))


def format_rational(q: Fraction) -> str:
    """Canonical text: "num/den" in lowest terms, integers without "/1"."""
    return str(q)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise InputError(f"expected an exact rational, got {type(value).__name__}")


class MultiPoly:
    """Sparse multivariate polynomial with rational coefficients.

    `terms` maps exponent tuples of length `arity` to nonzero coefficients.
    Instances are immutable by convention; all operations return new objects.
    Variables are addressed by 0-based index; display names are supplied by
    callers at print time.
    """

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: Mapping[tuple, object] | None = None):
        if arity < 0:
            raise InputError("polynomial arity must be >= 0")
        clean: dict[tuple[int, ...], Fraction] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != arity:
                raise InputError(
                    f"exponent vector {exps} does not match arity {arity}"
                )
            if any(e < 0 or not isinstance(e, int) for e in exps):
                raise InputError(f"exponents must be nonnegative ints: {exps}")
            c = _as_fraction(coeff)
            if c != 0:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if clean[exps] == 0:
                    del clean[exps]
        object.__setattr__(self, "arity", arity)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, arity: int) -> MultiPoly:
        return cls(arity, {})

    @classmethod
    def constant(cls, arity: int, value) -> MultiPoly:
        return cls(arity, {(0,) * arity: _as_fraction(value)})

    @classmethod
    def variable(cls, arity: int, index: int) -> MultiPoly:
        """The monomial X_index (0-based)."""
        if not 0 <= index < arity:
            raise InputError(f"variable index {index} out of range for arity {arity}")
        exps = tuple(1 if i == index else 0 for i in range(arity))
        return cls(arity, {exps: Fraction(1)})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        """Degree of the zero polynomial is reported as -1."""
        return max((sum(e) for e in self.terms), default=-1)

    def used_variables(self) -> set[int]:
        used = set()
        for exps in self.terms:
            for i, e in enumerate(exps):
                if e:
                    used.add(i)
        return used

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiPoly)
            and self.arity == other.arity
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.arity, frozenset(self.terms.items())))

    def __repr__(self):
        return f"MultiPoly({self.arity}, {self.terms!r})"

    # -- ring operations ---------------------------------------------------

    def _check_same_arity(self, other: MultiPoly):
        if self.arity != other.arity:
            raise InputError(
                f"arity mismatch: {self.arity} vs {other.arity}"
            )

    def __add__(self, other: MultiPoly) -> MultiPoly:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._check_same_arity(other)
        acc = dict(self.terms)
        for exps, c in other.terms.items():
            acc[exps] = acc.get(exps, Fraction(0)) + c
        return MultiPoly(self.arity, acc)

    def __neg__(self) -> MultiPoly:
        return MultiPoly(self.arity, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: MultiPoly) -> MultiPoly:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other) -> MultiPoly:
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            return MultiPoly(self.arity, {e: c * v for e, v in self.terms.items()})
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._check_same_arity(other)
        acc: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                acc[exps] = acc.get(exps, Fraction(0)) + c1 * c2
        return MultiPoly(self.arity, acc)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> MultiPoly:
        if not isinstance(k, int) or k < 0:
            raise InputError(f"polynomial exponent must be a nonnegative int: {k}")
        result = MultiPoly.constant(self.arity, 1)
        base = self
        while k:  # square and multiply
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result


def poly_eval(p: MultiPoly, point: Sequence) -> Fraction:
    """Evaluate exactly at a rational point; length must equal arity."""
    if len(point) != p.arity:
        raise InputError(f"evaluation point has length {len(point)}, arity is {p.arity}")
    vals = [_as_fraction(v) for v in point]
    total = Fraction(0)
    for exps, coeff in p.terms.items():
        term = coeff
        for v, e in zip(vals, exps):
            if e:
                term *= v ** e
        total += term
    return total


def sum_of_squares_combine(polys: Iterable[MultiPoly]) -> MultiPoly:
    """p_0^2 + ... + p_{d-1}^2; vanishes exactly on the common zero set.

    All inputs must share one arity.  Empty input is rejected (the zero
    polynomial would vanish everywhere, which is never what a caller
    combining a system of equations wants).
    """
    polys = list(polys)
    if not polys:
        raise InputError("sum_of_squares_combine needs at least one polynomial")
    arity = polys[0].arity
    acc = MultiPoly.zero(arity)
    for p in polys:
        if p.arity != arity:
            raise InputError(f"arity mismatch: {p.arity} vs {arity}")
        acc = acc + p * p
    return acc


def partial_evaluate(q: MultiPoly, tail_values: Sequence) -> MultiPoly:
    """Substitute rationals for the trailing variables of q.

    With q in variables (X_1..X_s, Y_1..Y_t) and len(tail_values) == t the
    result is a polynomial in X alone.  Used to pin auxiliary coordinates to
    known group-element coordinates.
    """
    t = len(tail_values)
    if t > q.arity:
        raise InputError(f"cannot substitute {t} values into arity {q.arity}")
    vals = [_as_fraction(v) for v in tail_values]
    head = q.arity - t
    acc: dict[tuple[int, ...], Fraction] = {}
    for exps, coeff in q.terms.items():
        c = coeff
        for v, e in zip(vals, exps[head:]):
            if e:
                c *= v ** e
        if c == 0:
            continue
        key = exps[:head]
        acc[key] = acc.get(key, Fraction(0)) + c
    return MultiPoly(head, acc)


def grlex_key(exps: tuple[int, ...]) -> tuple:
    """Sort key for graded lexicographic order (use with reverse=True)."""
    return (sum(exps), exps)


def format_poly(p: MultiPoly, names: Sequence[str] | None = None) -> str:
    """Human-readable canonical form, graded-lex term order, explicit signs.

    e.g. "x1^3 - 2*x1*x2 + 5/2".  The zero polynomial prints as "0".
    """
    if names is None:
        names = [f"x{i + 1}" for i in range(p.arity)]
    elif len(names) != p.arity:
        raise InputError(f"{len(names)} names supplied for arity {p.arity}")
    if p.is_zero():
        return "0"
    pieces = []
    for exps in sorted(p.terms, key=grlex_key, reverse=True):
        coeff = p.terms[exps]
        factors = []
        for name, e in zip(names, exps):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        mag = abs(coeff)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(mag)] + factors)
        if not pieces:
            pieces.append(body if coeff > 0 else f"-{body}")
        else:
            pieces.append(f"+ {body}" if coeff > 0 else f"- {body}")
    return " ".join(pieces)
