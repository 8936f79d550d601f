"""Bounded search for polynomial solutions on Gamma^n and verification of
claimed coset decompositions of the solution set.

Identity convention, used everywhere in this module: the identity element
has no affine coordinates, so a tuple containing it is evaluated against a
polynomial only when the polynomial does not mention that slot's variables
(slot j owns variables 2j-1 and 2j, 1-based).  Otherwise the tuple is
skipped outright -- in enumeration and in both verification directions --
and reported through the optional `skipped` side channel.  A skipped tuple
is neither a solution nor a non-solution.

Verdicts are honest about their reach: Verified carries the coefficient
bound it was checked at and promises nothing beyond it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import InputError
from .exact_num import MultiPoly, poly_eval
from .fg_group import Coords, DEFAULT_COEFF_BOUND, GammaSpec
from .group_core import GroupPoint, IDENTITY, _add_raw, is_identity, scalar_mul
from .intlinalg import ZLattice, kernel_basis

__all__ = [
    "MLDecomposition",
    "Verified",
    "Counterexample",
    "Inconclusive",
    "Verdict",
    "MISSING_FROM_UNION",
    "NOT_A_SOLUTION",
    "character_image",
    "solutions_bounded",
    "verify_decomposition",
    "suggest_decomposition",
]

MISSING_FROM_UNION = "missing-from-union"
NOT_A_SOLUTION = "not-a-solution"


@dataclass(frozen=True)
class MLDecomposition:
    """A claimed finite-union shape for the solution set: each pair is a
    base tuple (as per-slot Coords) and one integer character; the claim is
    that solutions are exactly the tuples agreeing with some base under its
    character."""

    pairs: tuple[tuple[tuple[Coords, ...], tuple[int, ...]], ...]

    def __post_init__(self):
        for base, k in self.pairs:
            if len(base) != len(k):
                raise InputError(
                    f"base arity {len(base)} does not match character {k}"
                )


@dataclass(frozen=True)
class Verified:
    bound: int

    def __str__(self):
        return f"verified(bound={self.bound})"


@dataclass(frozen=True)
class Counterexample:
    points: tuple[GroupPoint, ...]
    direction: str  # MISSING_FROM_UNION or NOT_A_SOLUTION

    def __str__(self):
        from .group_core import format_point

        inner = ", ".join(format_point(p) for p in self.points)
        return f"counterexample: {self.direction} ({inner})"


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    unexplained: tuple[tuple[GroupPoint, ...], ...] = ()

    def __str__(self):
        return f"inconclusive: {self.reason}"


Verdict = Verified | Counterexample | Inconclusive


def character_image(
    gamma: GammaSpec, k: Sequence[int], points: Sequence[GroupPoint]
) -> GroupPoint:
    """k1*t1 + ... + kn*tn, computed by the group laws alone."""
    if len(k) != len(points):
        raise InputError("character and tuple arities differ")
    acc: GroupPoint = IDENTITY
    for ki, p in zip(k, points):
        acc = _add_raw(gamma.backend, acc, scalar_mul(gamma.backend, ki, p))
    return acc


def _slot_usage(p: MultiPoly, n: int) -> list[bool]:
    """Whether p mentions slot j's variables (positions 2j, 2j+1 zero-based)."""
    used = p.used_variables()
    return [(2 * j in used) or (2 * j + 1 in used) for j in range(n)]


def _box(
    gamma: GammaSpec, n: int, bound: int
) -> Iterator[tuple[tuple[Coords, ...], tuple[GroupPoint, ...]]]:
    """All tuples in the coefficient box, canonical per-slot order, slot 1
    varying slowest."""
    slot = [(c, gamma.realize(c)) for c in gamma.iter_coords(bound)]
    for combo in itertools.product(slot, repeat=n):
        yield tuple(c for c, _ in combo), tuple(p for _, p in combo)


def _coord_vector(points: Sequence[GroupPoint]) -> list[Fraction]:
    vals: list[Fraction] = []
    for p in points:
        if is_identity(p):
            # only reached when the polynomial ignores this slot
            vals.extend((Fraction(0), Fraction(0)))
        else:
            vals.extend((p.x, p.y))
    return vals


def _classify(
    p: MultiPoly,
    slot_used: Sequence[bool],
    points: Sequence[GroupPoint],
) -> str:
    if any(u and is_identity(pt) for u, pt in zip(slot_used, points)):
        return "skipped"
    if poly_eval(p, _coord_vector(points)) == 0:
        return "solution"
    return "other"


def solutions_bounded(
    gamma: GammaSpec,
    p: MultiPoly,
    n: int,
    bound: int = DEFAULT_COEFF_BOUND,
    skipped: list | None = None,
) -> list[tuple[GroupPoint, ...]]:
    """Every tuple in the coefficient box realizing an exact zero of p, in
    the canonical enumeration order.  Tuples falling under the identity
    convention go to `skipped` (when given) instead of being judged."""
    if n < 1:
        raise InputError("arity must be >= 1")
    if p.arity != 2 * n:
        raise InputError(f"polynomial arity {p.arity}, expected {2 * n}")
    slot_used = _slot_usage(p, n)
    out = []
    for _, points in _box(gamma, n, bound):
        verdict = _classify(p, slot_used, points)
        if verdict == "solution":
            out.append(points)
        elif verdict == "skipped" and skipped is not None:
            skipped.append(points)
    return out


def verify_decomposition(
    gamma: GammaSpec,
    p: MultiPoly,
    n: int,
    d: MLDecomposition,
    bound: int = DEFAULT_COEFF_BOUND,
    skipped: list | None = None,
) -> Verdict:
    """Check both inclusions over the coefficient box.

    A tuple belongs to base + ker(character) exactly when
    character(tuple) = character(base); that equation is evaluated with
    the group laws, so no decomposition search is involved.  The first
    failing tuple in enumeration order becomes the Counterexample:
    a solution matching no pair (missing-from-union), or a non-solution
    matching some pair (not-a-solution).  Skipped tuples (identity
    convention) are exempt from both directions.
    """
    if p.arity != 2 * n:
        raise InputError(f"polynomial arity {p.arity}, expected {2 * n}")
    for base, k in d.pairs:
        if len(k) != n:
            raise InputError(f"character {k} has arity {len(k)}, expected {n}")
    slot_used = _slot_usage(p, n)
    targets = [
        (k, character_image(gamma, k, [gamma.realize(c) for c in base]))
        for base, k in d.pairs
    ]
    for _, points in _box(gamma, n, bound):
        verdict = _classify(p, slot_used, points)
        if verdict == "skipped":
            if skipped is not None:
                skipped.append(points)
            continue
        in_union = any(
            character_image(gamma, k, points) == target for k, target in targets
        )
        if verdict == "solution" and not in_union:
            return Counterexample(points, MISSING_FROM_UNION)
        if verdict == "other" and in_union:
            return Counterexample(points, NOT_A_SOLUTION)
    return Verified(bound)


# -- suggestion heuristic ------------------------------------------------------


def _free_concat(coords: tuple[Coords, ...]) -> tuple[int, ...]:
    return tuple(x for c in coords for x in c.free)


def _tors_concat(coords: tuple[Coords, ...]) -> tuple[tuple[int, ...], ...]:
    return tuple(c.torsion for c in coords)


def _annihilator_characters(
    lattice: ZLattice, n: int, rank: int
) -> list[tuple[int, ...]]:
    """Integer vectors k with k1*v_1 + ... + kn*v_n = 0 (blockwise, r entries
    per slot) for every lattice basis vector v."""
    rows = []
    for v in lattice.basis():
        for m in range(rank):
            rows.append([v[i * rank + m] for i in range(n)])
    return [tuple(v) for v in kernel_basis(rows, width=n)]


def suggest_decomposition(
    gamma: GammaSpec,
    p: MultiPoly,
    n: int,
    bound: int = DEFAULT_COEFF_BOUND,
) -> MLDecomposition | Inconclusive:
    """Guess a decomposition from the box solutions and keep it only if it
    verifies at the same bound.

    Solutions sharing torsion residues are clustered greedily: a difference
    vector joins the cluster's lattice only if the whole lattice coset
    (within the box) stays inside the solution set.  The cluster's lattice
    is then cut by one annihilator character; a character is accepted only
    if every box tuple it captures is a solution (or skipped), which makes
    the final verification succeed by construction.  Existence of a true
    finite decomposition gives no bound, so failure here is Inconclusive,
    never a refutation.
    """
    if p.arity != 2 * n:
        raise InputError(f"polynomial arity {p.arity}, expected {2 * n}")
    slot_used = _slot_usage(p, n)
    r = gamma.rank

    entries = []  # (coords, points, class)
    classes: dict[tuple, str] = {}
    for coords, points in _box(gamma, n, bound):
        v = _classify(p, slot_used, points)
        entries.append((coords, points, v))
        classes[(_free_concat(coords), _tors_concat(coords))] = v
    solutions = [(c, pts) for c, pts, v in entries if v == "solution"]
    if not solutions:
        return MLDecomposition(())

    def class_at(free: tuple[int, ...], tors) -> str:
        key = (free, tors)
        if key not in classes:
            coords_t = tuple(
                Coords(free[i * r : (i + 1) * r], tors[i]) for i in range(n)
            )
            pts = tuple(gamma.realize(cc) for cc in coords_t)
            classes[key] = _classify(p, slot_used, pts)
        return classes[key]

    def hull_sound(lattice: ZLattice, anchor_free, anchor_tors) -> bool:
        """The coset anchor + lattice must stay inside the solution set
        (skipped tuples allowed).  Checked on a doubled box: two genuine
        cosets can share every box point of a mixed lattice, and the wider
        window rejects most such accidents."""
        wide = 2 * bound
        for w in itertools.product(range(-wide, wide + 1), repeat=r * n):
            diff = tuple(a - b for a, b in zip(w, anchor_free))
            if diff in lattice and class_at(tuple(w), anchor_tors) == "other":
                return False
        return True

    def coset_ok(k: tuple[int, ...], anchor: tuple[Coords, ...]) -> bool:
        """Every box tuple with character(t) = character(anchor) must be a
        solution or skipped; checked in coordinates."""
        anchor_free = _free_concat(anchor)
        anchor_tors = [c.torsion for c in anchor]
        for coords, _, verdict in entries:
            free = _free_concat(coords)
            # chi_k difference in free coordinates
            if any(
                sum(ki * (f[m] - a[m]) for ki, f, a in zip(
                    k,
                    [free[i * r:(i + 1) * r] for i in range(n)],
                    [anchor_free[i * r:(i + 1) * r] for i in range(n)],
                ))
                for m in range(r)
            ):
                continue
            match = True
            for j, d in enumerate(gamma.torsion_factors):
                diff = sum(
                    ki * (c.torsion[j] - a[j])
                    for ki, c, a in zip(k, coords, anchor_tors)
                )
                if diff % d:
                    match = False
                    break
            if match and verdict == "other":
                return False
        return True

    def captured(k: tuple[int, ...], anchor: tuple[Coords, ...]) -> set:
        got = set()
        anchor_free = _free_concat(anchor)
        anchor_tors = [c.torsion for c in anchor]
        for coords, pts in solutions:
            free = _free_concat(coords)
            if any(
                sum(ki * (f[m] - a[m]) for ki, f, a in zip(
                    k,
                    [free[i * r:(i + 1) * r] for i in range(n)],
                    [anchor_free[i * r:(i + 1) * r] for i in range(n)],
                ))
                for m in range(r)
            ):
                continue
            if all(
                sum(
                    ki * (c.torsion[j] - a[j])
                    for ki, c, a in zip(k, coords, anchor_tors)
                ) % d == 0
                for j, d in enumerate(gamma.torsion_factors)
            ):
                got.add((_free_concat(coords), _tors_concat(coords)))
        return got

    pairs = []
    unexplained = list(solutions)
    while unexplained:
        anchor_coords, anchor_pts = unexplained[0]
        anchor_free = _free_concat(anchor_coords)
        anchor_tors = _tors_concat(anchor_coords)
        lattice = ZLattice(r * n)
        # greedy hull over same-torsion solutions; a difference enters only
        # if its enlarged coset stays inside the solution set on the box
        for coords, _ in unexplained[1:]:
            if _tors_concat(coords) != anchor_tors:
                continue
            diff = tuple(
                a - b for a, b in zip(_free_concat(coords), anchor_free)
            )
            if diff in lattice:
                continue
            trial = lattice.copy()
            trial.add_vector(diff)
            if hull_sound(trial, anchor_free, anchor_tors):
                lattice = trial
        candidates = _annihilator_characters(lattice, n, r)
        if not candidates:
            # full-rank difference lattice: only the zero character is left
            candidates = [(0,) * n]
        chosen = None
        for k in candidates:
            if coset_ok(k, anchor_coords):
                chosen = k
                break
        if chosen is None:
            return Inconclusive(
                "no single character cuts the cluster at this bound",
                tuple(pts for _, pts in unexplained),
            )
        pairs.append((anchor_coords, chosen))
        got = captured(chosen, anchor_coords)
        unexplained = [
            (c, pts)
            for c, pts in unexplained
            if (_free_concat(c), _tors_concat(c)) not in got
        ]
    d = MLDecomposition(tuple(pairs))
    verdict = verify_decomposition(gamma, p, n, d, bound)
    if isinstance(verdict, Verified):
        return d
    return Inconclusive(
        f"candidate decomposition failed re-verification: {verdict}",
        tuple(pts for _, pts in solutions),
    )
