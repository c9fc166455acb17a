import os
from fractions import Fraction

import pytest

from engine.geom_core import convex_hull
from engine.loader import detect_files, infer_and_load

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS_DIR = os.path.join(ROOT, "corpus")


def F(text):
    return Fraction(text)


def polygon(*points):
    return convex_hull([tuple(Fraction(c) for c in p) for p in points], 2)


def polyhedron(*points):
    return convex_hull([tuple(Fraction(c) for c in p) for p in points], 3)


@pytest.fixture(scope="session")
def corpus():
    return infer_and_load(detect_files(CORPUS_DIR))


@pytest.fixture(scope="session")
def body(corpus):
    def get(name):
        return corpus[name]["body"]
    return get


@pytest.fixture
def triangle():
    return polygon((0, 0), (1, 0), (0, 1))


@pytest.fixture
def square():
    return polygon((0, 0), (1, 0), (1, 1), (0, 1))


@pytest.fixture
def centred_square():
    return polygon((-1, -1), (1, -1), (1, 1), (-1, 1))


@pytest.fixture
def diamond():
    return polygon((1, 0), (0, 1), (-1, 0), (0, -1))


@pytest.fixture
def quad():
    return polygon((0, 0), (3, 0), (2, 2), (0, 1))


@pytest.fixture
def tetrahedron():
    return polyhedron((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))


@pytest.fixture
def cube():
    return polyhedron(*[(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)])
