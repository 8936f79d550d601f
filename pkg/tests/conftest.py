import json

import pytest

from mordell.fg_group import GammaSpec
from mordell.group_core import Circle, make_curve, point


@pytest.fixture(scope="session")
def curve_m2():
    return make_curve(0, -2)


@pytest.fixture(scope="session")
def curve_01():
    return make_curve(0, 1)


@pytest.fixture(scope="session")
def circle():
    return Circle()


@pytest.fixture(scope="session")
def gamma_p(curve_m2):
    # rank 1, trivial torsion; P = (3, 5) generates
    return GammaSpec(curve_m2, [point(curve_m2, 3, 5)], claimed_rank=1)


@pytest.fixture(scope="session")
def gamma_2p(curve_m2):
    # the index-2 subgroup of gamma_p
    from fractions import Fraction

    g = point(curve_m2, Fraction(129, 100), Fraction(-383, 1000))
    return GammaSpec(curve_m2, [g])


@pytest.fixture(scope="session")
def gamma_torsion(curve_01):
    # pure torsion: (2, 3) has order 6
    return GammaSpec(curve_01, [point(curve_01, 2, 3)])


@pytest.fixture(scope="session")
def gamma_circle(circle):
    # one free generator plus the full Z/4 torsion
    from fractions import Fraction

    return GammaSpec(
        circle,
        [point(circle, Fraction(3, 5), Fraction(4, 5)), point(circle, 0, 1)],
    )


@pytest.fixture
def spec_file(tmp_path):
    """Write a group spec JSON file and return its path as a string."""

    def write(payload, name="group.json"):
        p = tmp_path / name
        p.write_text(json.dumps(payload), encoding="utf-8")
        return str(p)

    return write


@pytest.fixture
def m2_spec(spec_file):
    return spec_file(
        {"kind": "curve", "a": "0", "b": "-2", "generators": [["3", "5"]], "rank": 1}
    )
