import json
from pathlib import Path

import pytest

from laxkit.services.classical import AlgebraSpec
from laxkit.services.exactmath import parse_point, parse_scalar
from laxkit.services.geometry import MarkedConfig, TyurinPoint
from laxkit.services.grading import homogeneous_basis, structure_constants

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def make_config(family, n, in_points=("0",), out_points=("inf",), tyurin=()):
    return MarkedConfig(
        tuple(parse_point(p) for p in in_points),
        tuple(parse_point(p) for p in out_points),
        tuple(TyurinPoint(parse_point(g), tuple(parse_scalar(a) for a in alpha)) for g, alpha in tyurin),
        AlgebraSpec(family, n),
    )


def bundled(name):
    return json.loads((CONFIG_DIR / f"{name}.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def classical_sl2():
    return make_config("sl", 2)


@pytest.fixture(scope="session")
def classical_basis(classical_sl2):
    return homogeneous_basis((-4, 4), classical_sl2)


@pytest.fixture(scope="session")
def classical_consts(classical_basis):
    return structure_constants(classical_basis)


@pytest.fixture(scope="session")
def sl2_two_in():
    return make_config("sl", 2, in_points=("0", "1"))


@pytest.fixture(scope="session")
def sl2_two_in_basis(sl2_two_in):
    return homogeneous_basis((-1, 1), sl2_two_in)


@pytest.fixture(scope="session")
def gl2_tyurin():
    return make_config("gl", 2, tyurin=(("2", ("1", "1")),))


@pytest.fixture(scope="session")
def gl2_tyurin_basis(gl2_tyurin):
    return homogeneous_basis((-1, 1), gl2_tyurin)


@pytest.fixture(scope="session")
def sl2_tyurin():
    return make_config("sl", 2, tyurin=(("2", ("1", "1")),))


@pytest.fixture(scope="session")
def sl2_tyurin_basis(sl2_tyurin):
    return homogeneous_basis((-2, 2), sl2_tyurin)
