import os
import glob
import json
import logging
from fractions import Fraction

from engine.errors import DegenerateInput, DimensionMismatch, ParseError
from engine.geom_core import EXACT, Arithmetic, Polytope, convex_hull
from engine.utils import load_config, to_fraction, to_float

cfg = load_config()

KNOWN_KINDS = ("polygon", "polyhedron", "pair", "counterexample")


def detect_files(input_dir=None):
    input_dir = input_dir or cfg["corpus"].get("folder", "./corpus")
    files = glob.glob(os.path.join(input_dir, "*.json"))
    return sorted(f for f in files if os.path.isfile(f))


def read_any(path_or_filelike):
    """JSON with decimal literals read as exact Fractions."""
    try:
        if hasattr(path_or_filelike, "read"):
            return json.load(path_or_filelike, parse_float=Fraction)
        with open(path_or_filelike, "r", encoding="utf-8") as f:
            return json.load(f, parse_float=Fraction)
    except json.JSONDecodeError as e:
        raise ParseError(f"Malformed JSON in {getattr(path_or_filelike, 'name', path_or_filelike)}: {e}")


def polytope_from_json(obj, arith: Arithmetic = EXACT) -> Polytope:
    """
    Polytope JSON: {"dim": n, "vertices": [[q, ...], ...]} where each q is a
    JSON number or a "p/q" string.
    """
    if not isinstance(obj, dict):
        raise ParseError('Polytope JSON must be an object like {"dim": 2, "vertices": [[0, 0], ...]}')
    if "vertices" not in obj:
        raise ParseError('Polytope JSON has no "vertices" list')
    verts = obj["vertices"]
    if not isinstance(verts, list) or not verts or not all(isinstance(v, list) for v in verts):
        raise ParseError('"vertices" must be a non-empty list of coordinate lists')
    dim = obj.get("dim", len(verts[0]))
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise ParseError(f'"dim" must be an integer, got {dim!r}')
    if any(len(v) != dim for v in verts):
        raise DimensionMismatch(f"Every vertex must have {dim} coordinates")
    conv = to_fraction if arith.exact else to_float
    points = [tuple(conv(c) for c in v) for v in verts]
    return convex_hull(points, dim, arith)


def load_polytope(path_or_filelike, arith: Arithmetic = EXACT) -> Polytope:
    poly = polytope_from_json(read_any(path_or_filelike), arith)
    logging.info(f"Loaded {poly.dim}-polytope with {len(poly.vertices)} vertices from {path_or_filelike}")
    return poly


def identify_kind(obj):
    if not isinstance(obj, dict):
        raise ParseError("Fixture JSON must be an object")
    if "counterexample" in obj:
        return "counterexample"
    if "K" in obj and "B" in obj:
        return "pair"
    dim = obj.get("dim", len(obj.get("vertices", [[]])[0]))
    return "polygon" if dim == 2 else "polyhedron"


def infer_and_load(paths_list, arith: Arithmetic = EXACT):
    """
    Corpus fixtures keyed by name: {"name", "kind", "body" (Polytope or None),
    "pair" ((K, B) for gauge pairs, else None), "raw" (the JSON object), "expected" (dict, may be empty)}.
    """
    fixtures = {}
    for p in paths_list:
        try:
            obj = read_any(p)
            kind = identify_kind(obj)
            name = obj.get("name") or os.path.splitext(os.path.basename(p))[0]
            body, pair = None, None
            if kind == "pair":
                pair = (polytope_from_json(obj["K"], arith), polytope_from_json(obj["B"], arith))
            elif kind != "counterexample":
                body = polytope_from_json(obj, arith)
            fixtures[name] = {
                "name": name,
                "kind": kind,
                "body": body,
                "pair": pair,
                "raw": obj,
                "expected": obj.get("expected", {}),
            }
            logging.info(f"Assigned {p} → {kind}")
        except (ParseError, DimensionMismatch, DegenerateInput) as e:
            logging.error(f"Failed to read {p}: {e}")
    return fixtures
