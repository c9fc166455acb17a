import io
import json
from fractions import Fraction

import pytest

from engine.errors import DimensionMismatch, ParseError
from engine.loader import identify_kind, infer_and_load, load_polytope, polytope_from_json, read_any
from engine.utils import dumps, parse_point, scalar_to_json, to_fraction


def test_decimals_are_read_exactly():
    obj = read_any(io.StringIO('{"dim": 2, "vertices": [[0, 0], [0.1, 0], [0, "1/3"]]}'))
    P = polytope_from_json(obj)
    assert (Fraction(1, 10), Fraction(0)) in P.vertices
    assert (Fraction(0), Fraction(1, 3)) in P.vertices


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"dim": 2, "vertices": [[0, 0], [1, 0]')
    with pytest.raises(ParseError):
        load_polytope(str(path))


@pytest.mark.parametrize("obj", [
    [[0, 0], [1, 0], [0, 1]],
    {"dim": 2},
    {"dim": 2, "vertices": []},
    {"dim": "two", "vertices": [[0, 0], [1, 0], [0, 1]]},
    {"dim": 2, "vertices": [[0, 0], [1, 0], [0, "x"]]},
])
def test_bad_polytope_json(obj):
    with pytest.raises(ParseError):
        polytope_from_json(obj)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        polytope_from_json({"dim": 2, "vertices": [[0, 0], [1, 0, 0], [0, 1]]})


def test_identify_kind():
    assert identify_kind({"dim": 2, "vertices": [[0, 0]]}) == "polygon"
    assert identify_kind({"vertices": [[0, 0, 0]]}) == "polyhedron"
    assert identify_kind({"K": {}, "B": {}}) == "pair"
    assert identify_kind({"counterexample": {"depth": 6}}) == "counterexample"
    with pytest.raises(ParseError):
        identify_kind([1, 2])


def test_corpus_loads(corpus):
    kinds = {fx["kind"] for fx in corpus.values()}
    assert kinds == {"polygon", "polyhedron", "pair", "counterexample"}
    assert corpus["triangle"]["expected"]["na"] == "3"
    K, B = corpus["pair_quad_triangle"]["pair"]
    assert B.locate((0, 0)) == "interior"


def test_infer_and_load_skips_broken_files(tmp_path):
    (tmp_path / "ok.json").write_text(json.dumps({"dim": 2, "vertices": [[0, 0], [1, 0], [0, 1]]}))
    (tmp_path / "bad.json").write_text("{")
    fixtures = infer_and_load([str(tmp_path / "ok.json"), str(tmp_path / "bad.json")])
    assert list(fixtures) == ["ok"]


def test_scalar_serialisation():
    assert scalar_to_json(Fraction(3)) == "3"
    assert scalar_to_json(Fraction(-5, 2)) == "-5/2"
    assert scalar_to_json([Fraction(1, 2), 0.25, True]) == ["1/2", 0.25, True]
    assert dumps({"b": Fraction(1, 3), "a": 1}) == '{\n  "a": 1,\n  "b": "1/3"\n}'


def test_point_parsing():
    assert parse_point("1/2, 3") == (Fraction(1, 2), Fraction(3))
    assert parse_point("0.5,1", exact=False) == (0.5, 1.0)
    assert to_fraction(0.1) == Fraction(1, 10)
    with pytest.raises(ParseError):
        parse_point("")
