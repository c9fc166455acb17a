import sys
import json
import logging
import argparse

from engine.utils import load_config, setup_logging
from service import COMMANDS, FORMATS, RunConfig, render, run

cfg = load_config()


def build_parser():
    parser = argparse.ArgumentParser(prog="afd", description=cfg["app"].get("name", "Affine diameter toolkit"))
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("inputs", nargs="*", help="Polytope JSON file(s); corpus takes a fixture folder")
    parser.add_argument("--mode", choices=("exact", "float"), default=cfg["arithmetic"].get("mode", "exact"))
    parser.add_argument("--eps", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--samples", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out", default=None)
    parser.add_argument("--format", dest="fmt", choices=FORMATS, default="json")
    parser.add_argument("--point", default=None, help='e.g. "1/2,1/4"')
    parser.add_argument("--body", default=None, help="body K for gauge, bundle, measures, lipschitz")
    parser.add_argument("--gauge", default=None, help="gauge body B (o in its interior)")
    parser.add_argument("--depth", type=int, default=None, help="counterexample truncation depth N")
    parser.add_argument("--arcs", default=None, help='arc boundary directions, e.g. "1,0;0,1;-1,0;0,-1"')
    parser.add_argument("--log-level", default="INFO")
    return parser


def config_from_args(args) -> RunConfig:
    return RunConfig(
        command=args.command, inputs=list(args.inputs), mode=args.mode, eps=args.eps, seed=args.seed,
        samples=args.samples, out=args.out, fmt=args.fmt, point=args.point, body=args.body,
        gauge=args.gauge, depth=args.depth, arcs=args.arcs, workers=args.workers,
    )


def run_cli(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(run_name=args.command, level=getattr(logging, args.log_level.upper(), logging.INFO))
    config = config_from_args(args)

    outcome = run(config)
    if "error" in outcome.payload:
        sys.stderr.write(json.dumps(outcome.payload, sort_keys=True) + "\n")
        return outcome.exit_code
    try:
        text = render(config, outcome)
    except Exception as e:
        kind = getattr(e, "kind", "output_error")
        logging.exception("Writing output failed")
        sys.stderr.write(json.dumps({"error": kind, "message": str(e)}, sort_keys=True) + "\n")
        return 2
    if not config.out or config.command == "corpus" or config.fmt == "svg":
        sys.stdout.write(text)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(run_cli())
