import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from mordell import cli

GOLDEN = Path(__file__).parent / "golden"

SPECS = {
    "m2.json": {
        "kind": "curve",
        "a": "0",
        "b": "-2",
        "generators": [["3", "5"]],
        "rank": 1,
        "label": "m2",
    },
    "c01.json": {
        "kind": "curve",
        "a": "0",
        "b": "1",
        "generators": [["2", "3"]],
        "rank": 0,
        "label": "c01",
    },
    "circ.json": {
        "kind": "circle",
        "generators": [["3/5", "4/5"], ["0", "1"]],
        "rank": 1,
        "label": "circ",
    },
    "m2-2p.json": {
        "kind": "curve",
        "a": "0",
        "b": "-2",
        "generators": [["129/100", "-383/1000"]],
        "rank": 1,
        "label": "m2-2p",
    },
    "sing.json": {
        "kind": "curve",
        "a": "0",
        "b": "0",
        "generators": [],
        "rank": 0,
        "label": "sing",
    },
}

# every subcommand once, pinned against the files in tests/golden/
GOLDEN_CASES = [
    ("curve_info_m2", "m2.json", ["curve-info"]),
    ("curve_info_c01", "c01.json", ["curve-info"]),
    ("curve_info_circ", "circ.json", ["curve-info"]),
    ("point_add", "m2.json", ["point", "add", "(3, 5)", "(3, 5)"]),
    ("point_mul", "m2.json", ["point", "mul", "3", "(3, 5)"]),
    ("point_decompose", "m2.json", ["point", "decompose", "(129/100, -383/1000)"]),
    ("coset_dke", "m2.json", ["coset", "dke", "--char", "2", "--exponent", "4"]),
    (
        "coset_combine_intersect",
        "m2.json",
        ["coset", "combine", "--op", "intersect", "2:4", "3:6"],
    ),
    (
        "coset_combine_complement",
        "m2.json",
        ["coset", "combine", "--op", "complement", "1:2"],
    ),
    (
        "coset_member_true",
        "m2.json",
        ["coset", "member", "--char", "2", "--exponent", "4", "(129/100, -383/1000)"],
    ),
    (
        "coset_member_false",
        "m2.json",
        ["coset", "member", "--char", "2", "--exponent", "4", "(3, 5)"],
    ),
    ("ml_solve", "m2.json", ["ml", "solve", "(- x2 x4)", "--slots", "2", "--bound", "3"]),
    (
        "ml_suggest",
        "m2.json",
        ["ml", "suggest", "(- x2 x4)", "--slots", "2", "--bound", "3"],
    ),
    ("eval_true", "m2.json", ["eval", "(exists-gamma 1 (= x1 y1))", "--x", "3"]),
    (
        "eval_unknown",
        "m2.json",
        ["eval", "(exists-gamma 1 (= x1 y1))", "--x", "2", "--bound", "8"],
    ),
    (
        "density",
        "m2.json",
        ["density", "--lo", "0", "--hi", "10", "--bins", "4", "--height", "150"],
    ),
    ("axioms", "m2.json", ["axioms", "--n-max", "2", "--height", "30"]),
]


@pytest.fixture(scope="module")
def spec_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("specs")
    for name, payload in SPECS.items():
        (d / name).write_text(json.dumps(payload), encoding="utf-8")
    return d


def run_cli(capsys, argv):
    rc = cli.main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def _argv(spec_dir, spec, args, extra):
    return args + ["--spec", str(spec_dir / spec)] + extra


# -- golden outputs -----------------------------------------------------------------


@pytest.mark.parametrize("name,spec,args", GOLDEN_CASES, ids=[c[0] for c in GOLDEN_CASES])
def test_human_output_matches_golden(name, spec, args, spec_dir, capsys):
    rc, out, err = run_cli(capsys, _argv(spec_dir, spec, args, ["--no-cache"]))
    assert rc == 0
    assert err == ""
    assert out == (GOLDEN / f"{name}.human.txt").read_text()


@pytest.mark.parametrize("name,spec,args", GOLDEN_CASES, ids=[c[0] for c in GOLDEN_CASES])
def test_machine_output_matches_golden(name, spec, args, spec_dir, capsys):
    rc, out, err = run_cli(capsys, _argv(spec_dir, spec, args, ["--machine", "--no-cache"]))
    assert rc == 0
    assert err == ""
    assert out == (GOLDEN / f"{name}.machine.jsonl").read_text()
    lines = out.splitlines()
    assert len(lines) == 1  # one JSON record per command
    record = json.loads(lines[0])
    assert record["command"] == "-".join(args[:2] if args[0] in ("point", "coset", "ml") else args[:1])


# -- spec examples, asserted inline -------------------------------------------------


def test_point_add_example(spec_dir, capsys):
    rc, out, _ = run_cli(
        capsys,
        ["point", "add", "(3, 5)", "(3, 5)", "--spec", str(spec_dir / "m2.json"), "--no-cache"],
    )
    assert rc == 0
    assert out == "(129/100, -383/1000)\n"


def test_point_mul_to_identity_on_torsion(spec_dir, capsys):
    rc, out, _ = run_cli(
        capsys,
        ["point", "mul", "6", "(2, 3)", "--spec", str(spec_dir / "c01.json"), "--no-cache"],
    )
    assert rc == 0
    assert out == "O\n"


def test_eval_negation_of_true_is_false(spec_dir, capsys):
    rc, out, _ = run_cli(
        capsys,
        [
            "eval",
            "(not (exists-gamma 1 (= x1 y1)))",
            "--x",
            "3",
            "--spec",
            str(spec_dir / "m2.json"),
            "--no-cache",
        ],
    )
    assert rc == 0
    assert out == "false\n"


def test_curve_info_two_components(spec_file, capsys):
    # three real roots of x^3 - x give two real components
    path = spec_file(
        {"kind": "curve", "a": "-1", "b": "0", "generators": [], "rank": 0}
    )
    rc, out, _ = run_cli(capsys, ["curve-info", "--spec", path, "--no-cache"])
    assert rc == 0
    assert "components: 2" in out


def test_decompose_undecided(spec_dir, capsys):
    # (3, 5) lies outside the index-2 subgroup, so the bounded search cannot
    # settle membership either way
    rc, out, _ = run_cli(
        capsys,
        ["point", "decompose", "(3, 5)", "--spec", str(spec_dir / "m2-2p.json"), "--no-cache"],
    )
    assert rc == 0
    assert out == "undecided(bound=16)\n"


def test_ml_verify_decomposition_inline(spec_dir, capsys):
    dec = json.dumps(
        {
            "pairs": [
                {
                    "base": [{"free": [0], "tors": []}, {"free": [0], "tors": []}],
                    "k": [1, 1],
                },
                {
                    "base": [{"free": [0], "tors": []}, {"free": [0], "tors": []}],
                    "k": [1, -1],
                },
            ]
        }
    )
    rc, out, _ = run_cli(
        capsys,
        [
            "ml",
            "verify",
            "(- x1 x3)",
            "--slots",
            "2",
            "--bound",
            "3",
            "--decomposition",
            dec,
            "--spec",
            str(spec_dir / "m2.json"),
            "--no-cache",
        ],
    )
    assert rc == 0
    assert out == "verified(bound=3)\n"


def test_ml_verify_counterexample(spec_dir, capsys):
    # dropping the (1, -1) kernel leaves (P, -P) unexplained
    dec = json.dumps(
        {
            "pairs": [
                {
                    "base": [{"free": [0], "tors": []}, {"free": [0], "tors": []}],
                    "k": [1, 1],
                }
            ]
        }
    )
    rc, out, _ = run_cli(
        capsys,
        [
            "ml",
            "verify",
            "(- x1 x3)",
            "--slots",
            "2",
            "--bound",
            "3",
            "--decomposition",
            dec,
            "--spec",
            str(spec_dir / "m2.json"),
            "--no-cache",
        ],
    )
    assert rc == 0
    assert out.startswith("counterexample: missing-from-union ((3, ")


def test_suggest_verify_round_trip(spec_dir, capsys, tmp_path):
    base = ["--spec", str(spec_dir / "m2.json"), "--no-cache"]
    rc, out, _ = run_cli(
        capsys,
        ["ml", "suggest", "(- x2 x4)", "--slots", "2", "--bound", "3", "--machine"] + base,
    )
    assert rc == 0
    record = json.loads(out)
    assert record["verdict"] == "decomposition"

    dec = json.dumps({"pairs": record["pairs"]})
    verify = ["ml", "verify", "(- x2 x4)", "--slots", "2", "--bound", "3"]
    rc, out, _ = run_cli(capsys, verify + ["--decomposition", dec] + base)
    assert rc == 0
    assert out == "verified(bound=3)\n"

    # same decomposition via @file
    path = tmp_path / "dec.json"
    path.write_text(dec, encoding="utf-8")
    rc, out2, _ = run_cli(capsys, verify + ["--decomposition", f"@{path}"] + base)
    assert rc == 0
    assert out2 == out


# -- exit codes ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "spec,args,code,fragment",
    [
        ("sing.json", ["curve-info"], 2, "singular curve"),
        ("missing.json", ["curve-info"], 2, "cannot read spec file"),
        ("m2.json", ["point", "add", "(1, 1)", "(3, 5)"], 2, "not on the variety"),
        ("m2.json", ["eval", "(= x1"], 2, "missing ')'"),
        (
            "m2.json",
            ["coset", "dke", "--char", "1,1", "--exponent", "10000"],
            3,
            "exceeds ceiling 1000000",
        ),
        ("m2.json", ["eval", "(= x1 0)", "--x", "nope"], 2, ""),
    ],
)
def test_error_exit_codes(spec, args, code, fragment, spec_dir, capsys):
    rc, out, err = run_cli(capsys, _argv(spec_dir, spec, args, ["--no-cache"]))
    assert rc == code
    assert out == ""
    assert err.startswith("error: ")
    assert fragment in err


def test_argparse_rejection_exits_2(spec_dir, capsys):
    # non-integer multiplier is refused by the argument parser itself
    with pytest.raises(SystemExit) as exc:
        cli.main(
            ["point", "mul", "two", "(3, 5)", "--spec", str(spec_dir / "m2.json"), "--no-cache"]
        )
    assert exc.value.code == 2
    capsys.readouterr()


def test_unknown_spec_key_rejected(spec_file, capsys):
    path = spec_file(
        {"kind": "curve", "a": "0", "b": "-2", "coefficients": [1], "generators": [], "rank": 0}
    )
    rc, out, err = run_cli(capsys, ["curve-info", "--spec", path, "--no-cache"])
    assert rc == 2
    assert "unknown spec file keys: coefficients" in err


def test_circle_spec_rejects_curve_coefficients(spec_file, capsys):
    path = spec_file({"kind": "circle", "a": "0", "generators": [], "rank": 0})
    rc, _, err = run_cli(capsys, ["curve-info", "--spec", path, "--no-cache"])
    assert rc == 2
    assert "circle" in err


def test_ceiling_flag_is_honored(spec_dir, capsys):
    argv = [
        "coset",
        "dke",
        "--char",
        "2",
        "--exponent",
        "4",
        "--spec",
        str(spec_dir / "m2.json"),
        "--no-cache",
    ]
    rc, out, _ = run_cli(capsys, argv)
    assert rc == 0
    assert out == "mod 4: {[0], [2]}\n"
    # the same enumeration scans 4 residue cells, so a ceiling of 3 refuses it
    rc, out, err = run_cli(capsys, argv + ["--ceiling", "3"])
    assert rc == 3
    assert out == ""
    assert "exceeds ceiling 3" in err


# -- cache behaviour ----------------------------------------------------------------

AXIOMS = ["axioms", "--n-max", "2", "--height", "30"]


def _axioms_argv(spec_dir, extra):
    return AXIOMS + ["--spec", str(spec_dir / "m2.json")] + extra


def test_cache_cold_warm_and_off_agree(spec_dir, tmp_path, capsys):
    cache = tmp_path / "cache"
    rc, cold, _ = run_cli(capsys, _axioms_argv(spec_dir, ["--cache-dir", str(cache)]))
    assert rc == 0
    files = sorted(cache.glob("points-*.json"))
    assert len(files) == 1
    rc, warm, _ = run_cli(capsys, _axioms_argv(spec_dir, ["--cache-dir", str(cache)]))
    assert rc == 0
    rc, off, _ = run_cli(capsys, _axioms_argv(spec_dir, ["--no-cache"]))
    assert rc == 0
    assert cold == warm == off
    assert cold == (GOLDEN / "axioms.human.txt").read_text()


def test_cache_env_var_location(spec_dir, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("MORDELL_CACHE_DIR", str(tmp_path / "envcache"))
    rc, out, _ = run_cli(capsys, _axioms_argv(spec_dir, []))
    assert rc == 0
    assert list((tmp_path / "envcache").glob("points-*.json"))
    assert out == (GOLDEN / "axioms.human.txt").read_text()


def test_corrupt_cache_file_is_discarded(spec_dir, tmp_path, capsys):
    cache = tmp_path / "cache"
    run_cli(capsys, _axioms_argv(spec_dir, ["--cache-dir", str(cache)]))
    (path,) = cache.glob("points-*.json")
    path.write_text("{not json", encoding="utf-8")
    rc, out, _ = run_cli(capsys, _axioms_argv(spec_dir, ["--cache-dir", str(cache)]))
    assert rc == 0
    assert out == (GOLDEN / "axioms.human.txt").read_text()
    assert json.loads(path.read_text())["points"]  # rebuilt in place


def test_tampered_cache_points_are_revalidated(spec_dir, tmp_path, capsys):
    cache = tmp_path / "cache"
    run_cli(capsys, _axioms_argv(spec_dir, ["--cache-dir", str(cache)]))
    (path,) = cache.glob("points-*.json")
    payload = json.loads(path.read_text())
    payload["points"] = [["3", "7"] if p == ["3", "5"] else p for p in payload["points"]]
    path.write_text(json.dumps(payload), encoding="utf-8")
    rc, out, _ = run_cli(capsys, _axioms_argv(spec_dir, ["--cache-dir", str(cache)]))
    assert rc == 0
    assert out == (GOLDEN / "axioms.human.txt").read_text()
    rebuilt = json.loads(path.read_text())
    assert ["3", "5"] in rebuilt["points"]
    assert ["3", "7"] not in rebuilt["points"]


def test_stale_format_version_is_ignored(spec_dir, tmp_path, capsys):
    cache = tmp_path / "cache"
    run_cli(capsys, _axioms_argv(spec_dir, ["--cache-dir", str(cache)]))
    (path,) = cache.glob("points-*.json")
    payload = json.loads(path.read_text())
    payload["format_version"] = 0
    path.write_text(json.dumps(payload), encoding="utf-8")
    rc, out, _ = run_cli(capsys, _axioms_argv(spec_dir, ["--cache-dir", str(cache)]))
    assert rc == 0
    assert out == (GOLDEN / "axioms.human.txt").read_text()
    assert json.loads(path.read_text())["format_version"] == cli.CACHE_FORMAT_VERSION


def test_no_cache_leaves_no_files(spec_dir, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("MORDELL_CACHE_DIR", str(tmp_path / "envcache"))
    rc, _, _ = run_cli(capsys, _axioms_argv(spec_dir, ["--no-cache"]))
    assert rc == 0
    assert not (tmp_path / "envcache").exists()


# -- process-level entry point ------------------------------------------------------


def test_module_entry_point(spec_dir):
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "mordell.cli",
            "point",
            "add",
            "(3, 5)",
            "(3, 5)",
            "--spec",
            str(spec_dir / "m2.json"),
            "--no-cache",
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout == "(129/100, -383/1000)\n"
    assert proc.stderr == ""


@pytest.mark.skipif(shutil.which("mordell") is None, reason="console script not on PATH")
def test_console_script(spec_dir):
    proc = subprocess.run(
        ["mordell", "curve-info", "--spec", str(spec_dir / "m2.json"), "--no-cache"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout == (GOLDEN / "curve_info_m2.human.txt").read_text()
