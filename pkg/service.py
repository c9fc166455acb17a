# service.py
import os, json
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import pandas as pd

from engine.counterexample import build_bodies, ratio_table
from engine.diameters import (
    check_triangulation, diameters_through, facet_pairs, lower_bound_sharpness, na_exact,
    na_montecarlo, na_point, planar_triangulation,
)
from engine.errors import (
    BoundViolated, GeometryError, InputError, MissingSeed, NotSupported, ParseError,
)
from engine.excel_writer import write_corpus_workbook
from engine.gauge import (
    bundle_is_closed, gauge_distance, length_measures, lipschitz_bound, lipschitz_probe,
    make_arcs, mixed_volume_identity, normal_bundle, theorem2_bound_check,
)
from engine.geom_core import EXACT, float_arithmetic
from engine.loader import KNOWN_KINDS, detect_files, infer_and_load, load_polytope
from engine.minkowski import is_centrally_symmetric, rogers_shephard_check, volume_polynomial
from engine.position import general_relative_position, strongly_general_relative_position
from engine.svg_writer import write_svg
from engine.utils import create_run_folder, dumps, load_config, parse_point, scalar_to_json

cfg = load_config()

COMMANDS = (
    "check-position", "na-exact", "na-montecarlo", "triangulate", "volume-poly", "rs-check",
    "gauge", "bundle", "measures", "thm2-check", "counterexample", "corpus", "lipschitz",
)
FORMATS = ("json", "csv", "svg")
QUADRANTS = "1,0;0,1;-1,0;0,-1"


@dataclass
class RunConfig:
    command: str
    inputs: List[str] = field(default_factory=list)
    mode: str = "exact"
    eps: Optional[float] = None
    seed: Optional[int] = None
    samples: Optional[int] = None
    out: Optional[str] = None
    fmt: str = "json"
    point: Optional[str] = None
    body: Optional[str] = None
    gauge: Optional[str] = None
    depth: Optional[int] = None
    arcs: Optional[str] = None
    workers: Optional[int] = None

    @property
    def arith(self):
        return EXACT if self.mode == "exact" else float_arithmetic(self.eps)


@dataclass
class RunOutcome:
    exit_code: int
    payload: dict
    table: Optional[pd.DataFrame] = None
    artifacts: List[str] = field(default_factory=list)


# -------------------------------
# INPUT HELPERS
# -------------------------------
def _single_body(config: RunConfig):
    path = config.body or (config.inputs[0] if config.inputs else None)
    if path is None:
        raise ParseError(f"{config.command} needs a polytope JSON file")
    return load_polytope(path, config.arith)


def _pair(config: RunConfig):
    k_path = config.body or (config.inputs[0] if config.inputs else None)
    b_path = config.gauge or (config.inputs[1] if len(config.inputs) > 1 else None)
    if k_path is None or b_path is None:
        raise ParseError(f"{config.command} needs a body K (--body) and a gauge body B (--gauge)")
    return load_polytope(k_path, config.arith), load_polytope(b_path, config.arith)


def _point(config: RunConfig, required=True):
    if config.point is None:
        if required:
            raise ParseError(f"{config.command} needs --point x,y[,z]")
        return None
    return parse_point(config.point, exact=config.arith.exact)


def _arcs(config: RunConfig):
    text = config.arcs or QUADRANTS
    directions = [parse_point(p) for p in text.split(";") if p.strip()]
    return make_arcs(directions, config.arith)


# -------------------------------
# COMMANDS
# -------------------------------
def cmd_check_position(config: RunConfig) -> RunOutcome:
    if config.gauge:
        K, B = _pair(config)
        report = strongly_general_relative_position(K, B)
    else:
        report = general_relative_position(_single_body(config))
    payload = report.to_json()
    table = pd.DataFrame([dict(w.to_json(), u=str(w.to_json()["u"])) for w in report.witnesses],
                         columns=["u", "dims"])
    return RunOutcome(0 if report.holds else 1, payload, table)


def cmd_na_exact(config: RunConfig) -> RunOutcome:
    P = _single_body(config)
    count = na_exact(P)
    payload = count.to_json()
    z = _point(config, required=False)
    if z is not None:
        payload["point"] = scalar_to_json(list(z))
        payload["na_point"] = na_point(P, z, count.pairs)
        payload["diameters"] = [d.to_json() for d in diameters_through(P, z, count.pairs)]
    table = pd.DataFrame([dict(p.to_json(), slab_volume=scalar_to_json(v), u=str(scalar_to_json(list(p.u))),
                               F=str(list(p.F.vertices)), G=str(list(p.G.vertices)))
                          for p, v in zip(count.pairs, count.slab_volumes)])
    return RunOutcome(0, payload, table)


def cmd_na_montecarlo(config: RunConfig) -> RunOutcome:
    if config.seed is None:
        raise MissingSeed("na-montecarlo needs --seed for a reproducible run")
    P = _single_body(config)
    samples = config.samples or int(cfg["sampling"].get("samples", 100000))
    est = na_montecarlo(P, samples, config.seed, workers=config.workers)
    return RunOutcome(0, est.to_json())


def cmd_triangulate(config: RunConfig) -> RunOutcome:
    P = _single_body(config)
    triangles = planar_triangulation(P)
    check = check_triangulation(P, triangles)
    payload = check.to_json()
    payload["triangles"] = scalar_to_json([[list(p) for p in t] for t in triangles])
    table = pd.DataFrame([{"triangle": i, "a": str(scalar_to_json(list(t[0]))), "b": str(scalar_to_json(list(t[1]))),
                           "c": str(scalar_to_json(list(t[2])))} for i, t in enumerate(triangles)])
    return RunOutcome(0, payload, table)


def cmd_volume_poly(config: RunConfig) -> RunOutcome:
    poly = volume_polynomial(_single_body(config))
    payload = poly.to_json()
    payload["difference_volume"] = scalar_to_json(poly.difference_volume)
    table = pd.DataFrame({"k": list(range(poly.n + 1)), "coeff": scalar_to_json(list(poly.coeffs)),
                          "mixed_volume": scalar_to_json(list(poly.mixed_volumes))})
    return RunOutcome(0, payload, table)


def cmd_rs_check(config: RunConfig) -> RunOutcome:
    return RunOutcome(0, rogers_shephard_check(_single_body(config)).to_json())


def cmd_gauge(config: RunConfig) -> RunOutcome:
    K, B = _pair(config)
    return RunOutcome(0, gauge_distance(K, B, _point(config)).to_json())


def cmd_bundle(config: RunConfig) -> RunOutcome:
    K, B = _pair(config)
    pieces = normal_bundle(K, B)
    closed = bundle_is_closed(pieces, K.arith)
    payload = {"closed": closed, "pieces": [p.to_json() for p in pieces]}
    table = pd.DataFrame([{k: str(v) for k, v in p.to_json().items()} for p in pieces])
    return RunOutcome(0 if closed else 1, payload, table)


def cmd_measures(config: RunConfig) -> RunOutcome:
    K, B = _pair(config)
    mk, mb = length_measures(K, B, _arcs(config))
    payload = {"K": mk.to_json(), "B": mb.to_json()}
    table = pd.DataFrame([{"arc": str(arc.to_json()), "K": str(a), "B": str(b)}
                          for (arc, a), (_, b) in zip(mk.atoms, mb.atoms)])
    return RunOutcome(0, payload, table)


def cmd_thm2_check(config: RunConfig) -> RunOutcome:
    return RunOutcome(0, theorem2_bound_check(_single_body(config)).to_json())


def cmd_counterexample(config: RunConfig) -> RunOutcome:
    depth = config.depth or int(cfg["counterexample"].get("default_depth", 10))
    inst = build_bodies(depth)
    table = ratio_table(inst)
    payload = dict(inst.to_json(), probes=json.loads(table.to_json(orient="records")))
    return RunOutcome(0, payload, table)


def cmd_lipschitz(config: RunConfig) -> RunOutcome:
    if config.seed is None:
        raise MissingSeed("lipschitz needs --seed for a reproducible run")
    K, B = _pair(config)
    bound = lipschitz_bound(B)
    probe = lipschitz_probe(K, B, config.samples, config.seed)
    if probe.max_ratio > bound.value * (1 + 1e-9):
        raise BoundViolated(f"Observed ratio {probe.max_ratio} exceeds 1/sin(a0) = {bound.value}",
                            probe=probe.to_json())
    return RunOutcome(0, {"bound": bound.to_json(), "probe": probe.to_json()})


# -------------------------------
# CORPUS
# -------------------------------
def _fail(rows, fixture, kind, check, e: GeometryError):
    rows.append({"fixture": fixture, "kind": kind, "check": check, "expected": "", "actual": "",
                 "Status": "FAIL", "detail": f"{e.kind}: {e}"})
    logging.error(f"{fixture} / {check}: {e}")


def _row(rows, fixture, kind, check, fn: Callable):
    try:
        expected, actual, ok = fn()
        rows.append({"fixture": fixture, "kind": kind, "check": check, "expected": str(scalar_to_json(expected)),
                     "actual": str(scalar_to_json(actual)), "Status": "PASS" if ok else "FAIL", "detail": ""})
    except GeometryError as e:
        _fail(rows, fixture, kind, check, e)


def _expect(expected, key, actual, arith):
    if key not in expected:
        return True
    want = expected[key]
    if isinstance(want, list):
        return len(want) == len(actual) and all(arith.eq(arith.coerce(w), a) for w, a in zip(want, actual))
    if isinstance(want, bool):
        return want == actual
    return arith.eq(arith.coerce(want), actual)


def _body_checks(rows, name, kind, P, expected, seed):
    arith = P.arith
    n = P.dim
    simplex = len(P.vertices) == n + 1
    gp = general_relative_position(P)
    _row(rows, name, kind, "general_position",
         lambda: (expected.get("general_position"), gp.holds, _expect(expected, "general_position", gp.holds, arith)))

    poly = volume_polynomial(P)

    def volume_poly():
        ok = all(_expect(expected, key, value, arith) for key, value in (
            ("coeffs", list(poly.coeffs)), ("integral", poly.integral),
            ("difference_volume", poly.difference_volume), ("volume", poly.volume)))
        return expected.get("coeffs"), list(poly.coeffs), ok
    _row(rows, name, kind, "volume_polynomial", volume_poly)

    def rs():
        rep = rogers_shephard_check(P, poly)
        ok = _expect(expected, "rs_lower_gap", rep.lower_gap, arith) and _expect(expected, "rs_upper_gap", rep.upper_gap, arith)
        if simplex:
            ok = ok and arith.sign(rep.upper_gap) == 0
        return [expected.get("rs_lower_gap"), expected.get("rs_upper_gap")], [rep.lower_gap, rep.upper_gap], ok
    _row(rows, name, kind, "rogers_shephard", rs)

    if n == 2:
        def mixed():
            m = mixed_volume_identity(P)
            return m.v_dk, m.v_dk_k + m.v_dk_minus_k, True
        _row(rows, name, kind, "mixed_volume_identity", mixed)

        if gp.holds or is_centrally_symmetric(P):
            def theorem2():
                r = theorem2_bound_check(P)
                return expected.get("thm2_na"), r.na, _expect(expected, "thm2_na", r.na, arith)
            _row(rows, name, kind, "theorem2_bounds", theorem2)

    if not gp.holds:
        return

    count = na_exact(P)

    def bounds():
        na = count.value
        top = 2 ** n - 1
        ok = arith.sign(na - n) > 0 and arith.sign(top - na) >= 0 and arith.eq(na, top) == simplex
        return expected.get("na"), na, ok and _expect(expected, "na", na, arith)
    _row(rows, name, kind, "na_exact", bounds)

    if n == 2:
        def triangulation():
            check = check_triangulation(P, planar_triangulation(P))
            return count.value, check.area_sum / (2 * count.volume), arith.eq(count.via_planar, count.value)
        _row(rows, name, kind, "planar_triangulation", triangulation)

    for probe in expected.get("na_points", []):
        z = arith.point(probe["z"])

        def at_point():
            got = na_point(P, z, count.pairs)
            return probe["count"], got, got == probe["count"]
        _row(rows, name, kind, f"na_point {scalar_to_json(list(z))}", at_point)

    if expected.get("montecarlo"):
        samples = int(expected.get("montecarlo_samples", cfg["sampling"].get("samples", 100000)))

        def montecarlo():
            est = na_montecarlo(P, samples, seed)
            return count.value, est.mean, abs(est.mean - float(count.value)) <= 3 * est.stderr
        _row(rows, name, kind, "na_montecarlo", montecarlo)


def _pair_checks(rows, name, kind, K, B, expected, seed):
    arith = K.arith
    _row(rows, name, kind, "strong_general_position",
         lambda: (True, strongly_general_relative_position(K, B).holds, strongly_general_relative_position(K, B).holds))

    def bundle():
        pieces = normal_bundle(K, B)
        return True, bundle_is_closed(pieces, arith), bundle_is_closed(pieces, arith)
    _row(rows, name, kind, "normal_bundle", bundle)

    def measures():
        arcs = make_arcs([tuple(int(c) for c in d.split(",")) for d in QUADRANTS.split(";")], arith)
        mk, mb = length_measures(K, B, arcs)
        return str(mk.total), str(mb.total), True
    _row(rows, name, kind, "length_measures", measures)

    def lipschitz():
        bound = lipschitz_bound(B)
        probe = lipschitz_probe(K, B, int(cfg["gauge"].get("probe_samples", 10000)), seed)
        return bound.value, probe.max_ratio, probe.max_ratio <= bound.value * (1 + 1e-9)
    _row(rows, name, kind, "lipschitz_probe", lipschitz)


def _counterexample_checks(rows, name, kind, raw, expected):
    depth = int(raw["counterexample"].get("depth", cfg["counterexample"].get("default_depth", 10)))

    def probes():
        table = ratio_table(build_bodies(depth, verify=bool(raw["counterexample"].get("verify", True))))
        ratios = dict(zip(table["n"], table["ratio"]))
        ok = bool(table["pass"].all())
        for n, want in expected.get("ratios", {}).items():
            ok = ok and abs(ratios.get(int(n), float("nan")) - float(want)) <= 1e-6
        if "min_last_ratio" in expected:
            ok = ok and float(table["ratio"].iloc[-1]) > float(expected["min_last_ratio"])
        return expected.get("ratios"), {int(n): round(r, 6) for n, r in ratios.items()}, ok
    _row(rows, name, kind, "ratio_probes", probes)


def run_corpus(config: RunConfig) -> RunOutcome:
    folder = config.inputs[0] if config.inputs else cfg["corpus"].get("folder", "./corpus")
    paths = detect_files(folder)
    if not paths:
        raise InputError(f"No *.json fixtures found in {folder}")
    fixtures = infer_and_load(paths, EXACT)
    seed = config.seed if config.seed is not None else 42
    run = create_run_folder("corpus", base=config.out)
    ts = run["run_id"]

    rows: List[Dict] = []
    for name in sorted(fixtures):
        fx = fixtures[name]
        kind, expected = fx["kind"], fx["expected"]
        logging.info(f"Corpus fixture {name} ({kind})")
        try:
            if kind in ("polygon", "polyhedron"):
                _body_checks(rows, name, kind, fx["body"], expected, seed)
            elif kind == "pair":
                _pair_checks(rows, name, kind, *fx["pair"], expected, seed)
            else:
                _counterexample_checks(rows, name, kind, fx["raw"], expected)
        except GeometryError as e:
            _fail(rows, name, kind, "setup", e)

    def sharpness():
        values = lower_bound_sharpness()
        nas = [na for _, na in values]
        return "decreasing towards 2", nas, all(b < a for a, b in zip(nas, nas[1:]))
    _row(rows, "perturbed_hexagon_family", "polygon", "lower_bound_sharpness", sharpness)

    results = pd.DataFrame(rows, columns=["fixture", "kind", "check", "expected", "actual", "Status", "detail"])
    failed = int((results["Status"] == "FAIL").sum())
    summary = {
        "Fixtures": len(fixtures),
        "Checks": len(results),
        "Passed": int((results["Status"] == "PASS").sum()),
        "Failed": failed,
        **{f"Fixtures ({k})": sum(1 for f in fixtures.values() if f["kind"] == k) for k in KNOWN_KINDS},
    }

    out_name = cfg["report"]["output_filename_template"].format(ts=ts)
    out_path = os.path.join(run["output_dir"], out_name)
    write_corpus_workbook(results, summary, cfg["report"].get("company_header", "AFD"), out_path)

    metadata = {
        "run_id": ts,
        "timestamp_utc": ts,
        "corpus_folder": folder,
        "seed": seed,
        "files": {
            "fixtures": [os.path.basename(p) for p in paths],
            "excel": os.path.basename(out_path),
        },
        "summary": summary,
    }
    with open(run["metadata_path"], "w", encoding="utf-8") as f:
        json.dump(metadata, f, indent=2, sort_keys=True)

    payload = {"summary": summary, "results": json.loads(results.to_json(orient="records"))}
    return RunOutcome(1 if failed else 0, payload, results, [out_path, run["metadata_path"]])


HANDLERS = {
    "check-position": cmd_check_position,
    "na-exact": cmd_na_exact,
    "na-montecarlo": cmd_na_montecarlo,
    "triangulate": cmd_triangulate,
    "volume-poly": cmd_volume_poly,
    "rs-check": cmd_rs_check,
    "gauge": cmd_gauge,
    "bundle": cmd_bundle,
    "measures": cmd_measures,
    "thm2-check": cmd_thm2_check,
    "counterexample": cmd_counterexample,
    "corpus": run_corpus,
    "lipschitz": cmd_lipschitz,
}


# -------------------------------
# OUTPUT
# -------------------------------
def _write_svg(config: RunConfig, outcome: RunOutcome):
    P = _single_body(config)
    if P.dim != 2:
        raise NotSupported("--format svg draws polygons only")
    z = _point(config, required=False)
    pairs = facet_pairs(P) if general_relative_position(P).holds else []
    diameters = diameters_through(P, z, pairs) if (z is not None and pairs) else []
    out = config.out or os.path.join(cfg["app"].get("default_output_folder", "./output"), f"{config.command}.svg")
    write_svg(P, out, pairs, diameters, z)
    outcome.artifacts.append(out)
    return json.dumps({"svg": out}, sort_keys=True)


def render(config: RunConfig, outcome: RunOutcome) -> str:
    """Serialised result for stdout (or --out): sorted JSON, CSV, or the path of the SVG written."""
    if config.fmt == "svg":
        return _write_svg(config, outcome)
    if config.fmt == "csv":
        table = outcome.table if outcome.table is not None else pd.json_normalize(scalar_to_json(outcome.payload))
        text = table.to_csv(index=False)
    else:
        text = dumps(outcome.payload) + "\n"
    if config.out and config.command != "corpus":
        os.makedirs(os.path.dirname(config.out) or ".", exist_ok=True)
        with open(config.out, "w", encoding="utf-8") as f:
            f.write(text)
        outcome.artifacts.append(config.out)
    return text


def run(config: RunConfig) -> RunOutcome:
    """
    Dispatch one command. Input errors give exit code 2, failed invariants
    and failed checks exit code 1; either way the payload is the structured
    error object.
    """
    if config.command not in HANDLERS:
        return RunOutcome(2, {"error": "parse_error", "message": f"Unknown command {config.command!r}"})
    if config.fmt not in FORMATS:
        return RunOutcome(2, {"error": "parse_error", "message": f"Unknown format {config.fmt!r}"})
    try:
        outcome = HANDLERS[config.command](config)
        logging.info(f"{config.command} finished with exit code {outcome.exit_code}")
        return outcome
    except InputError as e:
        logging.error(f"{config.command}: {e.kind}: {e}")
        return RunOutcome(2, e.to_json())
    except GeometryError as e:
        logging.error(f"{config.command}: {e.kind}: {e}")
        return RunOutcome(1, e.to_json())
    except (OSError, KeyError) as e:
        logging.exception(f"{config.command} failed")
        return RunOutcome(2, {"error": "parse_error", "message": str(e)})
