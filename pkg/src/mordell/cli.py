"""Command-line front end.

Every command takes --spec pointing at a JSON group description:

    {"kind": "curve", "a": "0", "b": "-2",
     "generators": [["3", "5"]],
     "rank": 1, "label": "example"}

or {"kind": "circle", "generators": [["3/5", "4/5"]]}.  Rationals are
canonical strings ("129/100", "-3", "0"), the same form the outputs use.
Flags go after the final subcommand: mordell point add P Q --spec f.json.

Exit codes: 0 success, 2 invalid input (bad spec file, off-variety point,
malformed formula), 3 resource ceiling (a quotient or residue enumeration
would exceed the configured ceiling).

--machine switches to line-delimited JSON records with fixed field names;
field order is part of the format.  Human output is meant for eyeballs and
is not parsed by anything here.

Enumerated rational point lists are cached under --cache-dir (default
$MORDELL_CACHE_DIR, else ~/.cache/mordell), keyed by backend fingerprint
and height bound.  Cache files carry a format version and every loaded
point is re-validated against the variety equation; anything stale is
recomputed.  --no-cache disables reads and writes.  Output is identical
with the cache on or off.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import coset_engine, ml_checker
from .errors import InputError, PreconditionError, QuotientCeilingError
from .exact_num import parse_rational
from .fg_group import (
    Coords,
    DEFAULT_COEFF_BOUND,
    DEFAULT_QUOTIENT_CEILING,
    GammaSpec,
    Undecided,
)
from .formula_eval import (
    eval_formula,
    format_formula,
    format_poly,
    parse,
    parse_poly,
)
from .group_core import (
    Circle,
    Curve,
    IDENTITY,
    add,
    enumerate_rational_points,
    format_point,
    is_identity,
    make_curve,
    parse_point,
    point,
    real_components,
    scalar_mul,
    torsion_subgroup,
)
from .ml_checker import Counterexample, Inconclusive, MLDecomposition, Verified

DEFAULT_HEIGHT_BOUND = 100
ENV_CACHE_DIR = "MORDELL_CACHE_DIR"
CACHE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    coeff_bound: int = DEFAULT_COEFF_BOUND
    height_bound: int = DEFAULT_HEIGHT_BOUND
    ceiling: int = DEFAULT_QUOTIENT_CEILING
    machine: bool = False


# -- group spec files ---------------------------------------------------------------

_SPEC_KEYS = {"kind", "a", "b", "generators", "rank", "label"}


def load_group_spec(path: str) -> GammaSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read spec file {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise InputError(f"spec file {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise InputError("spec file must hold a JSON object")
    unknown = sorted(set(raw) - _SPEC_KEYS)
    if unknown:
        raise InputError(f"unknown spec file keys: {', '.join(unknown)}")

    kind = raw.get("kind")
    if kind == "curve":
        if "a" not in raw or "b" not in raw:
            raise InputError("curve spec needs coefficient strings 'a' and 'b'")
        backend = make_curve(_spec_rational(raw["a"], "a"), _spec_rational(raw["b"], "b"))
    elif kind == "circle":
        if "a" in raw or "b" in raw:
            raise InputError("circle spec takes no coefficients")
        backend = Circle()
    else:
        raise InputError("spec 'kind' must be \"curve\" or \"circle\"")

    gens_raw = raw.get("generators")
    if not isinstance(gens_raw, list):
        raise InputError("spec 'generators' must be a list of [x, y] pairs")
    gens = []
    for item in gens_raw:
        if not (isinstance(item, list) and len(item) == 2):
            raise InputError(f"generator {item!r} is not an [x, y] pair")
        gens.append(
            point(backend, _spec_rational(item[0], "x"), _spec_rational(item[1], "y"))
        )

    rank = raw.get("rank")
    if rank is not None and (not isinstance(rank, int) or isinstance(rank, bool)):
        raise InputError("spec 'rank' must be an integer")
    label = raw.get("label")
    if label is not None and not isinstance(label, str):
        raise InputError("spec 'label' must be a string")
    return GammaSpec(backend, gens, claimed_rank=rank, label=label)


def _spec_rational(value, what: str) -> Fraction:
    if not isinstance(value, str):
        raise InputError(f"spec field {what!r} must be a canonical rational string")
    return parse_rational(value)


# -- point cache --------------------------------------------------------------------


def backend_fingerprint(backend) -> str:
    if isinstance(backend, Curve):
        return f"curve a={backend.a} b={backend.b}"
    return "circle"


class PointCache:
    """Enumerated rational points keyed by (backend fingerprint, height bound).

    root=None disables both reads and writes.  Writes go through a temp
    file and os.replace so readers never see a torn file.
    """

    def __init__(self, root: Path | None):
        self.root = root

    def _path(self, backend, height_bound: int) -> Path:
        key = f"{backend_fingerprint(backend)}|h={height_bound}"
        digest = hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]
        return self.root / f"points-{digest}.json"

    def load(self, backend, height_bound: int):
        if self.root is None:
            return None
        path = self._path(backend, height_bound)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return None
        if not isinstance(raw, dict):
            return None
        if raw.get("format_version") != CACHE_FORMAT_VERSION:
            return None
        if raw.get("fingerprint") != backend_fingerprint(backend):
            return None
        if raw.get("height_bound") != height_bound:
            return None
        entries = raw.get("points")
        if not isinstance(entries, list):
            return None
        points = []
        for item in entries:
            if item == "O":
                points.append(IDENTITY)
                continue
            if not (isinstance(item, list) and len(item) == 2):
                return None
            try:
                # point() re-checks the variety equation; a stale or
                # corrupted entry invalidates the whole file
                points.append(point(backend, parse_rational(item[0]), parse_rational(item[1])))
            except (InputError, TypeError):
                return None
        return points

    def store(self, backend, height_bound: int, points) -> None:
        if self.root is None:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        payload = {
            "format_version": CACHE_FORMAT_VERSION,
            "fingerprint": backend_fingerprint(backend),
            "height_bound": height_bound,
            "points": [
                "O" if is_identity(p) else [str(p.x), str(p.y)] for p in points
            ],
        }
        path = self._path(backend, height_bound)
        tmp = path.with_name(path.name + f".{os.getpid()}.tmp")
        tmp.write_text(json.dumps(payload), encoding="utf-8")
        os.replace(tmp, path)


def cached_rational_points(cache: PointCache, backend, height_bound: int):
    points = cache.load(backend, height_bound)
    if points is not None:
        return points
    points = enumerate_rational_points(backend, height_bound)
    cache.store(backend, height_bound, points)
    return points


def _resolve_cache_dir(args) -> Path | None:
    if args.no_cache:
        return None
    if args.cache_dir is not None:
        return Path(args.cache_dir)
    env = os.environ.get(ENV_CACHE_DIR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "mordell"


# -- small renderers ----------------------------------------------------------------


def _torsion_text(factors) -> str:
    if not factors:
        return "trivial"
    return " x ".join(f"Z/{d}" for d in factors)


def _tuple_text(points) -> str:
    return "(" + ", ".join(format_point(p) for p in points) + ")"


def _coords_json(c: Coords) -> dict:
    return {"free": list(c.free), "tors": list(c.torsion)}


def _coords_from_json(obj) -> Coords:
    if not (isinstance(obj, dict) and set(obj) == {"free", "tors"}):
        raise InputError("coordinate objects need exactly the keys 'free' and 'tors'")
    free, tors = obj["free"], obj["tors"]
    if not (isinstance(free, list) and all(_is_int(v) for v in free)):
        raise InputError("'free' must be a list of integers")
    if not (isinstance(tors, list) and all(_is_int(v) for v in tors)):
        raise InputError("'tors' must be a list of integers")
    return Coords(tuple(free), tuple(tors))


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def decomposition_to_json(d: MLDecomposition) -> dict:
    return {
        "pairs": [
            {"base": [_coords_json(c) for c in base], "k": list(k)}
            for base, k in d.pairs
        ]
    }


def decomposition_from_json(obj) -> MLDecomposition:
    if not (isinstance(obj, dict) and set(obj) == {"pairs"}):
        raise InputError("decomposition JSON needs exactly the key 'pairs'")
    pairs = obj["pairs"]
    if not isinstance(pairs, list):
        raise InputError("'pairs' must be a list")
    out = []
    for entry in pairs:
        if not (isinstance(entry, dict) and set(entry) == {"base", "k"}):
            raise InputError("each pair needs exactly the keys 'base' and 'k'")
        base, k = entry["base"], entry["k"]
        if not isinstance(base, list):
            raise InputError("'base' must be a list of coordinate objects")
        if not (isinstance(k, list) and all(_is_int(v) for v in k)):
            raise InputError("'k' must be a list of integers")
        out.append((tuple(_coords_from_json(c) for c in base), tuple(k)))
    return MLDecomposition(tuple(out))


def _emit(record: dict) -> None:
    print(json.dumps(record))


def _parse_int_list(text: str, what: str) -> tuple[int, ...]:
    parts = [s.strip() for s in text.split(",")]
    try:
        return tuple(int(s) for s in parts)
    except ValueError:
        raise InputError(f"{what} must be a comma-separated integer list, got {text!r}")


def _residues_json(u) -> list:
    return [[list(slot) for slot in res] for res in u.residues]


# -- commands -----------------------------------------------------------------------


def cmd_curve_info(args, cfg: RunConfig, gamma: GammaSpec) -> None:
    backend = gamma.backend
    components = real_components(backend)
    full_torsion = torsion_subgroup(backend)
    if gamma.rank:
        audit = f"{gamma.rank} free generator(s) pass the independence check (bound {gamma.audit_bound})"
    else:
        audit = "no free generators"
    if cfg.machine:
        record = {"command": "curve-info"}
        if isinstance(backend, Curve):
            record["kind"] = "curve"
            record["a"] = str(backend.a)
            record["b"] = str(backend.b)
            record["discriminant_term"] = str(4 * backend.a**3 + 27 * backend.b**2)
        else:
            record["kind"] = "circle"
        record["components"] = components
        record["torsion_factors"] = list(full_torsion.invariant_factors)
        record["torsion_order"] = full_torsion.order()
        record["subgroup_torsion_factors"] = list(gamma.torsion.invariant_factors)
        record["rank"] = gamma.rank
        record["audit_bound"] = gamma.audit_bound
        record["label"] = gamma.label
        _emit(record)
        return
    if isinstance(backend, Curve):
        print(f"kind: curve (a={backend.a}, b={backend.b})")
        print(f"discriminant term: {4 * backend.a**3 + 27 * backend.b**2}")
    else:
        print("kind: circle")
    print(f"components: {components}")
    print(f"torsion: {_torsion_text(full_torsion.invariant_factors)}")
    print(f"subgroup torsion: {_torsion_text(gamma.torsion.invariant_factors)}")
    print(f"rank: {gamma.rank}")
    print(f"audit: {audit}")
    if gamma.label is not None:
        print(f"label: {gamma.label}")


def cmd_point(args, cfg: RunConfig, gamma: GammaSpec) -> None:
    backend = gamma.backend
    if args.point_op == "add":
        r = add(backend, parse_point(backend, args.p), parse_point(backend, args.q))
        if cfg.machine:
            _emit({"command": "point-add", "result": format_point(r)})
        else:
            print(format_point(r))
    elif args.point_op == "mul":
        r = scalar_mul(backend, args.k, parse_point(backend, args.p))
        if cfg.machine:
            _emit({"command": "point-mul", "k": args.k, "result": format_point(r)})
        else:
            print(format_point(r))
    else:
        c = gamma.decompose(parse_point(backend, args.p), cfg.coeff_bound)
        if cfg.machine:
            record = {"command": "point-decompose", "bound": cfg.coeff_bound}
            if isinstance(c, Undecided):
                record["result"] = "undecided"
            else:
                record["result"] = "coords"
                record.update(_coords_json(c))
            _emit(record)
        else:
            print(str(c))


def cmd_coset(args, cfg: RunConfig, gamma: GammaSpec) -> None:
    if args.coset_op == "dke":
        k = _parse_int_list(args.char, "--char")
        u = coset_engine.dke(gamma, k, args.exponent, cfg.ceiling)
        if cfg.machine:
            _emit(
                {
                    "command": "coset-dke",
                    "char": list(k),
                    "exponent": args.exponent,
                    "arity": u.n,
                    "modulus": u.modulus,
                    "residues": _residues_json(u),
                    "coarsened": u.coarsened,
                }
            )
        else:
            print(coset_engine.format_union(u))
    elif args.coset_op == "combine":
        operands = [_operand_union(gamma, text, cfg) for text in args.operand]
        if args.op == "complement":
            if len(operands) != 1:
                raise InputError("complement takes exactly one operand")
            u = coset_engine.complement(operands[0], cfg.ceiling)
        else:
            if len(operands) != 2:
                raise InputError(f"{args.op} takes exactly two operands")
            fn = {
                "union": coset_engine.union,
                "intersect": coset_engine.intersect,
                "diff": coset_engine.difference,
            }[args.op]
            u = fn(operands[0], operands[1], cfg.ceiling)
        if cfg.machine:
            _emit(
                {
                    "command": "coset-combine",
                    "op": args.op,
                    "arity": u.n,
                    "modulus": u.modulus,
                    "residues": _residues_json(u),
                    "coarsened": u.coarsened,
                }
            )
        else:
            print(coset_engine.format_union(u))
    else:
        k = _parse_int_list(args.char, "--char")
        u = coset_engine.dke(gamma, k, args.exponent, cfg.ceiling)
        points = [parse_point(gamma.backend, t) for t in args.points]
        res = coset_engine.member(u, points, cfg.coeff_bound)
        if cfg.machine:
            record = {"command": "coset-member", "bound": cfg.coeff_bound}
            if isinstance(res, Undecided):
                record["result"] = "undecided"
            else:
                record["result"] = res
            _emit(record)
        else:
            print(str(res).lower() if isinstance(res, bool) else str(res))


def _operand_union(gamma: GammaSpec, text: str, cfg: RunConfig):
    """Operand syntax K:E, the kernel union of character K at exponent E."""
    head, sep, tail = text.partition(":")
    if not sep:
        raise InputError(f"coset operand must look like K:E, got {text!r}")
    k = _parse_int_list(head, "coset operand character")
    try:
        e = int(tail)
    except ValueError:
        raise InputError(f"coset operand exponent must be an integer, got {tail!r}")
    return coset_engine.dke(gamma, k, e, cfg.ceiling)


def cmd_ml(args, cfg: RunConfig, gamma: GammaSpec) -> None:
    n = args.slots
    if n < 1:
        raise InputError("--slots must be >= 1")
    p = parse_poly(args.poly, 2 * n)
    if args.ml_op == "solve":
        skipped: list = []
        sols = ml_checker.solutions_bounded(gamma, p, n, cfg.coeff_bound, skipped)
        if cfg.machine:
            _emit(
                {
                    "command": "ml-solve",
                    "poly": format_poly(p),
                    "slots": n,
                    "bound": cfg.coeff_bound,
                    "solutions": [[format_point(q) for q in t] for t in sols],
                    "skipped": len(skipped),
                }
            )
        else:
            for t in sols:
                print(_tuple_text(t))
            print(f"solutions: {len(sols)}, skipped: {len(skipped)}")
    elif args.ml_op == "verify":
        d = _read_decomposition(args.decomposition)
        verdict = ml_checker.verify_decomposition(gamma, p, n, d, cfg.coeff_bound)
        if cfg.machine:
            record = {
                "command": "ml-verify",
                "poly": format_poly(p),
                "slots": n,
                "bound": cfg.coeff_bound,
            }
            if isinstance(verdict, Verified):
                record["verdict"] = "verified"
            elif isinstance(verdict, Counterexample):
                record["verdict"] = "counterexample"
                record["direction"] = verdict.direction
                record["tuple"] = [format_point(q) for q in verdict.points]
            else:
                record["verdict"] = "inconclusive"
                record["reason"] = verdict.reason
            _emit(record)
        else:
            print(str(verdict))
    else:
        out = ml_checker.suggest_decomposition(gamma, p, n, cfg.coeff_bound)
        if cfg.machine:
            record = {
                "command": "ml-suggest",
                "poly": format_poly(p),
                "slots": n,
                "bound": cfg.coeff_bound,
            }
            if isinstance(out, Inconclusive):
                record["verdict"] = "inconclusive"
                record["reason"] = out.reason
                record["unexplained"] = [
                    [format_point(q) for q in t] for t in out.unexplained
                ]
            else:
                record["verdict"] = "decomposition"
                record.update(decomposition_to_json(out))
            _emit(record)
        else:
            if isinstance(out, Inconclusive):
                print(str(out))
                for t in out.unexplained:
                    print(f"unexplained: {_tuple_text(t)}")
            else:
                for base, k in out.pairs:
                    base_txt = "; ".join(str(c) for c in base)
                    k_txt = " ".join(str(v) for v in k)
                    print(f"base ({base_txt}) k [{k_txt}]")
                print(f"pairs: {len(out.pairs)}")


def _read_decomposition(text: str) -> MLDecomposition:
    if text.startswith("@"):
        try:
            with open(text[1:], "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read decomposition file: {exc}")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"decomposition is not valid JSON: {exc}")
    return decomposition_from_json(obj)


def cmd_eval(args, cfg: RunConfig, gamma: GammaSpec) -> None:
    f = parse(args.formula)
    if args.x is None or args.x.strip() == "":
        xs: list[Fraction] = []
    else:
        xs = [parse_rational(s.strip()) for s in args.x.split(",")]
    res = eval_formula(gamma, f, xs, cfg.coeff_bound)
    if cfg.machine:
        record = {
            "command": "eval",
            "formula": format_formula(f),
            "x": [str(v) for v in xs],
            "result": res.kind,
        }
        if res.kind == "true":
            record["witnesses"] = [
                [format_point(q) for q in block] for block in res.witnesses
            ]
        elif res.kind == "unknown":
            record["bound"] = res.bound
        _emit(record)
        return
    if res.kind == "true" and res.witnesses:
        wit = "; ".join(_tuple_text(block) for block in res.witnesses)
        print(f"true (witness: {wit})")
    else:
        print(str(res))


def cmd_density(args, cfg: RunConfig, gamma: GammaSpec) -> None:
    lo = parse_rational(args.lo)
    hi = parse_rational(args.hi)
    if args.char is not None:
        if args.exponent is None:
            raise InputError("--char needs --exponent")
        k = _parse_int_list(args.char, "--char")
        u = coset_engine.dke(gamma, k, args.exponent, cfg.ceiling)
        hist = coset_engine.density_sample(gamma, u, lo, hi, cfg.height_bound, args.bins)
    elif args.exponent is not None:
        raise InputError("--exponent needs --char")
    else:
        hist = gamma.projection_density(lo, hi, cfg.height_bound, args.bins)
    edges = hist.edges()
    if cfg.machine:
        _emit(
            {
                "command": "density",
                "lo": str(lo),
                "hi": str(hi),
                "bins": hist.bins,
                "height_bound": cfg.height_bound,
                "edges": [str(e) for e in edges],
                "counts": list(hist.counts),
                "total": hist.total(),
            }
        )
        return
    for i, count in enumerate(hist.counts):
        closer = "]" if i == hist.bins - 1 else ")"
        print(f"[{edges[i]}, {edges[i + 1]}{closer}: {count}")
    print(f"total: {hist.total()}")


def cmd_axioms(args, cfg: RunConfig, gamma: GammaSpec, cache: PointCache) -> None:
    lo = parse_rational(args.lo)
    hi = parse_rational(args.hi)
    points = cached_rational_points(cache, gamma.backend, cfg.height_bound)
    report = gamma.check_axioms_bounded(
        args.n_max,
        cfg.height_bound,
        (lo, hi, args.bins),
        cfg.coeff_bound,
        rational_points=points,
    )
    d = report.density
    if cfg.machine:
        _emit(
            {
                "command": "axioms",
                "note": report.note,
                "density": {
                    "lo": str(d.lo),
                    "hi": str(d.hi),
                    "bins": d.bins,
                    "hit_bins": d.hit_bins,
                    "points_seen": d.points_seen,
                    "low_coverage": d.low_coverage,
                },
                "checks": [
                    {
                        "n": c.n,
                        "quotient_size": c.quotient_size,
                        "purity": [format_point(f.witness) for f in c.purity_findings],
                    }
                    for c in report.checks
                ],
            }
        )
        return
    print(report.note)
    flag = " [low coverage]" if d.low_coverage else ""
    print(
        f"density: {d.hit_bins}/{d.bins} bins hit on [{d.lo}, {d.hi}]"
        f" ({d.points_seen} points seen){flag}"
    )
    for c in report.checks:
        if c.purity_findings:
            witnesses = ", ".join(format_point(f.witness) for f in c.purity_findings)
            purity = f"purity findings: {witnesses}"
        else:
            purity = "purity findings: none"
        print(f"n={c.n}: quotient size {c.quotient_size}; {purity}")


# -- parser -------------------------------------------------------------------------


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", required=True, help="path to a JSON group spec file")
    common.add_argument(
        "--bound",
        type=int,
        default=DEFAULT_COEFF_BOUND,
        help="coefficient search bound for decomposition and bounded quantifiers",
    )
    common.add_argument(
        "--height",
        type=int,
        default=DEFAULT_HEIGHT_BOUND,
        help="naive height bound for rational point enumeration",
    )
    common.add_argument(
        "--ceiling",
        type=int,
        default=DEFAULT_QUOTIENT_CEILING,
        help="largest residue enumeration allowed before giving up (exit 3)",
    )
    common.add_argument(
        "--machine", action="store_true", help="line-delimited JSON output"
    )
    common.add_argument(
        "--cache-dir",
        default=None,
        help=f"point cache directory (default ${ENV_CACHE_DIR} or ~/.cache/mordell)",
    )
    common.add_argument(
        "--no-cache", action="store_true", help="disable the point cache"
    )
    return common


def _build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    top = argparse.ArgumentParser(
        prog="mordell",
        description=(
            "exact arithmetic in finitely generated subgroups of curve and "
            "circle groups"
        ),
    )
    sub = top.add_subparsers(dest="command", required=True)

    sub.add_parser("curve-info", parents=[common], help="backend and subgroup summary")

    p_point = sub.add_parser("point", help="group arithmetic on points")
    point_sub = p_point.add_subparsers(dest="point_op", required=True)
    pa = point_sub.add_parser("add", parents=[common], help="add two points")
    pa.add_argument("p")
    pa.add_argument("q")
    pm = point_sub.add_parser("mul", parents=[common], help="integer multiple of a point")
    pm.add_argument("k", type=int)
    pm.add_argument("p")
    pd = point_sub.add_parser(
        "decompose", parents=[common], help="coordinates of a point in the subgroup"
    )
    pd.add_argument("p")

    p_coset = sub.add_parser("coset", help="kernel coset unions")
    coset_sub = p_coset.add_subparsers(dest="coset_op", required=True)
    cd = coset_sub.add_parser(
        "dke", parents=[common], help="kernel union of a character at an exponent"
    )
    cd.add_argument("--char", required=True, help="comma-separated character, e.g. 2 or 1,-1")
    cd.add_argument("--exponent", type=int, required=True)
    cc = coset_sub.add_parser(
        "combine", parents=[common], help="boolean combinations of kernel unions"
    )
    cc.add_argument(
        "--op", required=True, choices=["union", "intersect", "diff", "complement"]
    )
    cc.add_argument("operand", nargs="+", help="kernel union descriptor K:E, e.g. 1,-1:2")
    cm = coset_sub.add_parser(
        "member", parents=[common], help="membership of a point tuple"
    )
    cm.add_argument("--char", required=True)
    cm.add_argument("--exponent", type=int, required=True)
    cm.add_argument("points", nargs="+", help="point literals, one per slot")

    p_ml = sub.add_parser("ml", help="polynomial solution sets over the subgroup")
    ml_sub = p_ml.add_subparsers(dest="ml_op", required=True)
    ms = ml_sub.add_parser(
        "solve", parents=[common], help="bounded solution tuples of a polynomial"
    )
    ms.add_argument("poly")
    ms.add_argument(
        "--slots",
        type=int,
        required=True,
        help="tuple length n; the polynomial sees 2n coordinates",
    )
    mv = ml_sub.add_parser(
        "verify", parents=[common], help="check a claimed coset decomposition"
    )
    mv.add_argument("poly")
    mv.add_argument("--slots", type=int, required=True)
    mv.add_argument(
        "--decomposition",
        required=True,
        help="decomposition JSON, or @file to read it from a file",
    )
    mg = ml_sub.add_parser(
        "suggest", parents=[common], help="search for a coset decomposition"
    )
    mg.add_argument("poly")
    mg.add_argument("--slots", type=int, required=True)

    pe = sub.add_parser(
        "eval", parents=[common], help="evaluate a formula with bounded quantifiers"
    )
    pe.add_argument("formula")
    pe.add_argument(
        "--x", default=None, help="comma-separated rational values for x1, x2, ..."
    )

    pd2 = sub.add_parser(
        "density", parents=[common], help="histogram of first coordinates"
    )
    pd2.add_argument("--lo", required=True)
    pd2.add_argument("--hi", required=True)
    pd2.add_argument("--bins", type=int, required=True)
    pd2.add_argument(
        "--char", default=None, help="restrict to a kernel union (with --exponent)"
    )
    pd2.add_argument("--exponent", type=int, default=None)

    px = sub.add_parser("axioms", parents=[common], help="bounded evidence report")
    px.add_argument("--n-max", type=int, default=3)
    px.add_argument("--lo", default="-4")
    px.add_argument("--hi", default="4")
    px.add_argument("--bins", type=int, default=8)

    return top


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(
        coeff_bound=args.bound,
        height_bound=args.height,
        ceiling=args.ceiling,
        machine=args.machine,
    )
    try:
        gamma = load_group_spec(args.spec)
        cache = PointCache(_resolve_cache_dir(args))
        if args.command == "curve-info":
            cmd_curve_info(args, cfg, gamma)
        elif args.command == "point":
            cmd_point(args, cfg, gamma)
        elif args.command == "coset":
            cmd_coset(args, cfg, gamma)
        elif args.command == "ml":
            cmd_ml(args, cfg, gamma)
        elif args.command == "eval":
            cmd_eval(args, cfg, gamma)
        elif args.command == "density":
            cmd_density(args, cfg, gamma)
        else:
            cmd_axioms(args, cfg, gamma, cache)
    except QuotientCeilingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InputError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
