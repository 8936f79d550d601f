"""Group law and point utilities for the two supported one-dimensional
groups over Q: elliptic curves y^2 = x^3 + a*x + b in short Weierstrass
form, and the unit circle x^2 + y^2 = 1 with rotation as addition.

All arithmetic is exact.  The point at infinity (resp. the rotation
identity (1, 0)) is the abstract IDENTITY tag; on the circle the affine
pair (1, 0) is normalized to that tag on construction and after every
operation, so it never appears as an Affine value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import InputError
from .exact_num import _as_fraction, parse_rational

# -- backends ---------------------------------------------------------------


@dataclass(frozen=True)
class Curve:
    """y^2 = x^3 + a*x + b; must be nonsingular (4a^3 + 27b^2 != 0)."""

    a: Fraction
    b: Fraction


@dataclass(frozen=True)
class Circle:
    """x^2 + y^2 = 1 under (x1,y1)*(x2,y2) = (x1x2 - y1y2, x1y2 + x2y1)."""


Backend = Curve | Circle


def make_curve(a, b) -> Curve:
    c = Curve(_as_fraction(a), _as_fraction(b))
    validate_backend(c)
    return c


def validate_backend(backend: Backend) -> None:
    if isinstance(backend, Curve):
        if 4 * backend.a**3 + 27 * backend.b**2 == 0:
            raise InputError(
                f"singular curve: 4a^3 + 27b^2 = 0 for a={backend.a}, b={backend.b}"
            )
    elif not isinstance(backend, Circle):
        raise InputError(f"unknown backend {backend!r}")


def discriminant_term(curve: Curve) -> Fraction:
    """The nonsingularity quantity 4a^3 + 27b^2 (zero exactly when singular)."""
    return 4 * curve.a**3 + 27 * curve.b**2


# -- points ------------------------------------------------------------------


class _Identity:
    """Singleton tag for the group identity (no affine coordinates)."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "IDENTITY"

    def __reduce__(self):
        return (_Identity, ())


IDENTITY = _Identity()


@dataclass(frozen=True)
class Affine:
    x: Fraction
    y: Fraction


GroupPoint = Affine | _Identity


def is_identity(p: GroupPoint) -> bool:
    return p is IDENTITY or isinstance(p, _Identity)


def point(backend: Backend, x, y) -> GroupPoint:
    """Build a point from coordinates, validating it lies on the variety.

    On the circle, (1, 0) comes back as IDENTITY.
    """
    p = Affine(_as_fraction(x), _as_fraction(y))
    if not on_variety(backend, p):
        raise InputError(f"({p.x}, {p.y}) is not on the variety")
    return _normalize(backend, p)


def _normalize(backend: Backend, p: GroupPoint) -> GroupPoint:
    if isinstance(backend, Circle) and isinstance(p, Affine) and p.x == 1 and p.y == 0:
        return IDENTITY
    return p


def on_variety(backend: Backend, p: GroupPoint) -> bool:
    """Exact membership test; IDENTITY always belongs."""
    if is_identity(p):
        return True
    if isinstance(backend, Curve):
        return p.y**2 == p.x**3 + backend.a * p.x + backend.b
    return p.x**2 + p.y**2 == 1


def _require_on_variety(backend: Backend, p: GroupPoint) -> None:
    if not on_variety(backend, p):
        where = "IDENTITY" if is_identity(p) else f"({p.x}, {p.y})"
        raise InputError(f"point {where} is not on the variety")


def negate(backend: Backend, p: GroupPoint) -> GroupPoint:
    _require_on_variety(backend, p)
    if is_identity(p):
        return IDENTITY
    return _normalize(backend, Affine(p.x, -p.y))


def add(backend: Backend, p: GroupPoint, q: GroupPoint) -> GroupPoint:
    """Exact group addition (chord-tangent law on curves, rotation on the
    circle).  Off-variety inputs are rejected."""
    _require_on_variety(backend, p)
    _require_on_variety(backend, q)
    return _add_raw(backend, p, q)


def _add_raw(backend: Backend, p: GroupPoint, q: GroupPoint) -> GroupPoint:
    if is_identity(p):
        return q
    if is_identity(q):
        return p
    if isinstance(backend, Circle):
        return _normalize(
            backend, Affine(p.x * q.x - p.y * q.y, p.x * q.y + q.x * p.y)
        )
    if p.x == q.x:
        if p.y == -q.y:
            # includes the tangent-vertical case y == 0
            return IDENTITY
        # doubling; y != 0 here
        lam = (3 * p.x**2 + backend.a) / (2 * p.y)
    else:
        lam = (q.y - p.y) / (q.x - p.x)
    x3 = lam**2 - p.x - q.x
    y3 = lam * (p.x - x3) - p.y
    return Affine(x3, y3)


def scalar_mul(backend: Backend, k: int, p: GroupPoint) -> GroupPoint:
    """k*p by binary double-and-add; negative k goes through the inverse."""
    if not isinstance(k, int):
        raise InputError(f"scalar must be an int, got {type(k).__name__}")
    _require_on_variety(backend, p)
    if k < 0:
        p = negate(backend, p)
        k = -k
    acc: GroupPoint = IDENTITY
    base = p
    while k:
        if k & 1:
            acc = _add_raw(backend, acc, base)
        k >>= 1
        if k:
            base = _add_raw(backend, base, base)
    return acc


def naive_height(p: GroupPoint) -> int:
    """max(|num|, den) of the x-coordinate; 0 for IDENTITY."""
    if is_identity(p):
        return 0
    return max(abs(p.x.numerator), p.x.denominator)


# -- exact square roots and enumeration --------------------------------------


def _exact_sqrt(q: Fraction) -> Fraction | None:
    """The nonnegative rational square root, or None if q is not a square."""
    if q < 0:
        return None
    rn = math.isqrt(q.numerator)
    if rn * rn != q.numerator:
        return None
    rd = math.isqrt(q.denominator)
    if rd * rd != q.denominator:
        return None
    return Fraction(rn, rd)


def enumerate_rational_points(backend: Backend, height_bound: int) -> list[GroupPoint]:
    """All rational points with naive height <= height_bound, IDENTITY
    included, in a deterministic order (height, then x, then y)."""
    validate_backend(backend)
    if height_bound < 0:
        raise InputError("height bound must be >= 0")
    affine: list[Affine] = []
    for v in range(1, height_bound + 1):
        for u in range(-height_bound, height_bound + 1):
            if math.gcd(u, v) != 1:
                continue
            x = Fraction(u, v)
            if isinstance(backend, Curve):
                rhs = x**3 + backend.a * x + backend.b
            else:
                rhs = 1 - x**2
            y = _exact_sqrt(rhs)
            if y is None:
                continue
            if y == 0:
                candidates = [Affine(x, Fraction(0))]
            else:
                candidates = [Affine(x, -y), Affine(x, y)]
            for c in candidates:
                if not is_identity(_normalize(backend, c)):
                    affine.append(c)
    affine.sort(key=lambda p: (naive_height(p), p.x, p.y))
    return [IDENTITY, *affine]


# -- real connected components ------------------------------------------------


def real_components(backend: Backend) -> int:
    """1 or 2; a curve has two real components iff its cubic has three real
    roots, decided by the sign of -(4a^3 + 27b^2)."""
    validate_backend(backend)
    if isinstance(backend, Circle):
        return 1
    return 2 if discriminant_term(backend) < 0 else 1


def _cubic(curve: Curve, x: Fraction) -> Fraction:
    return x**3 + curve.a * x + curve.b


def unbounded_branch_separator(curve: Curve) -> Fraction | None:
    """A rational c strictly between the two largest real roots of the
    cubic, or None when there is a single real root.

    With roots e1 < e2 < e3 the curve's real points split into the bounded
    oval (x in [e1, e2]) and the unbounded identity branch (x >= e3), so
    comparing x against c classifies every point exactly.  Found by
    bisecting toward the local minimum of the cubic at sqrt(-a/3), where
    the cubic is strictly negative; only rational arithmetic is used.
    """
    validate_backend(curve)
    if discriminant_term(curve) > 0:
        return None
    # three distinct real roots force a < 0, so the local minimum is at
    # t = sqrt(-a/3) > 0 and lies strictly between e2 and e3
    lo = Fraction(0)
    hi = 1 + max(Fraction(0), -curve.a / 3)
    while True:
        mid = (lo + hi) / 2
        if _cubic(curve, mid) < 0:
            # mid >= 0 and cubic negative puts mid strictly inside (e2, e3)
            return mid
        if 3 * mid**2 + curve.a <= 0:
            lo = mid
        else:
            hi = mid


def component_of(backend: Backend, p: GroupPoint) -> bool:
    """True iff p lies on the identity component."""
    _require_on_variety(backend, p)
    if is_identity(p):
        return True
    if isinstance(backend, Circle) or real_components(backend) == 1:
        return True
    return p.x > unbounded_branch_separator(backend)


# -- torsion -------------------------------------------------------------------

# Over Q the torsion order of a curve point never exceeds 12 (and 11 does
# not occur); scanning multiples up to 12 is therefore a complete order test.
_MAX_CURVE_TORSION_ORDER = 12


def point_order(backend: Backend, p: GroupPoint, cap: int = _MAX_CURVE_TORSION_ORDER) -> int | None:
    """The exact order of p if it is at most cap, else None."""
    _require_on_variety(backend, p)
    acc = p
    for k in range(1, cap + 1):
        if is_identity(acc):
            return k
        acc = _add_raw(backend, acc, p)
    return None


@dataclass(frozen=True)
class TorsionGroup:
    """A finite abelian group given by invariant factors d1 | d2 | ... and
    matching generators (generator j has exact order invariant_factors[j]).
    The trivial group has empty factors and generators."""

    invariant_factors: tuple[int, ...]
    generators: tuple[GroupPoint, ...]

    def order(self) -> int:
        return math.prod(self.invariant_factors)


def _int_prime_factors(n: int) -> dict[int, int]:
    n = abs(n)
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _integral_model(curve: Curve) -> tuple[int, int, int]:
    """Smallest u >= 1 with a*u^4 and b*u^6 integral; returns (u, a', b').

    (x, y) -> (u^2 x, u^3 y) carries y^2 = x^3 + ax + b to
    y'^2 = x'^3 + a'x' + b' with a' = a u^4, b' = b u^6.
    """
    exps: dict[int, int] = {}
    for p, e in _int_prime_factors(curve.a.denominator).items():
        exps[p] = max(exps.get(p, 0), -(-e // 4))
    for p, e in _int_prime_factors(curve.b.denominator).items():
        exps[p] = max(exps.get(p, 0), -(-e // 6))
    u = math.prod(p**e for p, e in exps.items()) if exps else 1
    a_i = curve.a * u**4
    b_i = curve.b * u**6
    assert a_i.denominator == 1 and b_i.denominator == 1
    return u, a_i.numerator, b_i.numerator


def _integer_cubic_roots(a: int, b: int) -> list[int]:
    """Integer roots of x^3 + a*x + b (monic, so roots divide b)."""
    if b == 0:
        roots = [0]
        if a <= 0:
            r = math.isqrt(-a)
            if r * r == -a and r != 0:
                roots.extend([r, -r])
        return roots
    roots = []
    d = 1
    nb = abs(b)
    while d * d <= nb:
        if nb % d == 0:
            for r in {d, -d, nb // d, -nb // d}:
                if r**3 + a * r + b == 0:
                    roots.append(r)
        d += 1
    return sorted(set(roots))


def _torsion_points(curve: Curve) -> list[GroupPoint]:
    """All rational torsion points, by exhausting the integral-coordinate
    candidates on an integral model: y = 0 or y^2 dividing the (scaled)
    discriminant 16(4a^3+27b^2), then keeping points of finite order."""
    u, ai, bi = _integral_model(curve)
    disc = abs(16 * (4 * ai**3 + 27 * bi**2))
    candidates: set[tuple[int, int]] = set()
    for x in _integer_cubic_roots(ai, bi):
        candidates.add((x, 0))
    y = 1
    while y * y <= disc:
        if disc % (y * y) == 0:
            for x in _integer_cubic_roots(ai, bi - y * y):
                candidates.add((x, y))
                candidates.add((x, -y))
        y += 1
    found: list[GroupPoint] = [IDENTITY]
    for xi, yi in candidates:
        p = Affine(Fraction(xi, u**2), Fraction(yi, u**3))
        if not on_variety(curve, p):
            continue
        if point_order(curve, p) is not None:
            found.append(p)
    return found


def _point_sort_key(p: GroupPoint):
    if is_identity(p):
        return (0, Fraction(0), Fraction(0))
    return (1, p.x, p.y)


def group_structure(backend: Backend, elements: Sequence[GroupPoint]) -> TorsionGroup:
    """Invariant factors and generators of a finite subgroup given as a full
    set of elements.  Relies on the group being cyclic or 2 x cyclic, which
    covers every rational torsion group the backends admit."""
    elems = sorted(set(elements), key=_point_sort_key)
    n = len(elems)
    if n == 1:
        return TorsionGroup((), ())
    best = None
    for p in elems:
        if is_identity(p):
            continue
        d = point_order(backend, p, cap=n)
        if d is None:
            raise InputError("element of infinite order in claimed finite group")
        if best is None or d > best[0]:
            best = (d, p)
    d, g = best
    if d == n:
        return TorsionGroup((n,), (g,))
    if 2 * d != n:
        raise InputError(f"unsupported torsion shape: order {n}, max element order {d}")
    cyclic = set()
    acc: GroupPoint = IDENTITY
    for _ in range(d):
        cyclic.add(acc)
        acc = _add_raw(backend, acc, g)
    for p in elems:
        if p not in cyclic and point_order(backend, p, cap=2) == 2:
            return TorsionGroup((2, d), (p, g))
    raise InputError("could not split torsion as 2 x cyclic")


def torsion_subgroup(backend: Backend) -> TorsionGroup:
    """The full rational torsion subgroup of the backend."""
    validate_backend(backend)
    if isinstance(backend, Circle):
        # the only rational points of finite order are the 4th roots of unity
        return TorsionGroup((4,), (Affine(Fraction(0), Fraction(1)),))
    return group_structure(backend, _torsion_points(backend))


# -- text round-trip -----------------------------------------------------------


def format_point(p: GroupPoint) -> str:
    if is_identity(p):
        return "O"
    return f"({p.x}, {p.y})"


def parse_point(backend: Backend, text: str) -> GroupPoint:
    """Inverse of format_point, with on-variety validation."""
    t = text.strip()
    if t == "O":
        return IDENTITY
    if not (t.startswith("(") and t.endswith(")")):
        raise InputError(f"not a point literal: {text!r}")
    parts = t[1:-1].split(",")
    if len(parts) != 2:
        raise InputError(f"not a point literal: {text!r}")
    x = parse_rational(parts[0].strip())
    y = parse_rational(parts[1].strip())
    return point(backend, x, y)


def iter_multiples(backend: Backend, p: GroupPoint) -> Iterator[GroupPoint]:
    """0, p, 2p, 3p, ... computed incrementally."""
    acc: GroupPoint = IDENTITY
    while True:
        yield acc
        acc = _add_raw(backend, acc, p)
