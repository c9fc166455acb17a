import os
import json
import logging
from datetime import datetime
from fractions import Fraction

import yaml

from engine.errors import ParseError

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# -------------------------------
# BASIC CLEANERS
# -------------------------------
def clean_string(value):
    if value is None:
        return None
    s = str(value)
    s = s.replace("\u200b", "").replace("\n", "").replace("\r", "").replace("\t", "")
    s = s.replace(" ", "").strip()
    return s if s else None


def to_fraction(value):
    """
    Exact rational from a JSON coordinate: an int, a decimal literal
    (already a Fraction when read by the loader), or a "p/q" string.
    """
    if isinstance(value, bool):
        raise ParseError(f"Boolean {value!r} is not a coordinate")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # repr keeps the shortest decimal that round-trips, so 0.1 -> 1/10
        return Fraction(repr(value))
    s = clean_string(value)
    if s is None:
        raise ParseError("Empty coordinate")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f'Coordinate {value!r} is neither a number nor a "p/q" rational')


def to_float(value):
    if isinstance(value, (int, float, Fraction)) and not isinstance(value, bool):
        return float(value)
    return float(to_fraction(value))


def parse_point(text, exact=True):
    """Parse "x,y[,z]" (each entry a number or p/q) into a tuple."""
    s = clean_string(text)
    if s is None:
        raise ParseError("Empty point")
    parts = [p for p in s.split(",") if p]
    conv = to_fraction if exact else to_float
    return tuple(conv(p) for p in parts)


# -------------------------------
# JSON OUTPUT
# -------------------------------
def scalar_to_json(value):
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, dict):
        return {str(k): scalar_to_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [scalar_to_json(v) for v in value]
    if hasattr(value, "to_json"):
        return value.to_json()
    return str(value)


def dumps(payload):
    return json.dumps(scalar_to_json(payload), sort_keys=True, indent=2)


# -------------------------------
# CONFIG / LOGGING
# -------------------------------
def load_config():
    cfg_path = os.environ.get("ENGINE_CONFIG") or os.path.join(PROJECT_ROOT, "config", "config.yaml")
    if not os.path.exists(cfg_path):
        raise FileNotFoundError(f"Config missing at {cfg_path}")
    with open(cfg_path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f)


def setup_logging(run_name="global", log_dir=None, level=logging.INFO):
    cfg = load_config()
    log_dir = log_dir or cfg["app"].get("log_folder", "logs")
    os.makedirs(log_dir, exist_ok=True)
    timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
    logfile = os.path.join(log_dir, f"{run_name}_{timestamp}.log")

    logging.basicConfig(
        filename=logfile,
        filemode="w",
        level=level,
        format="%(asctime)s — %(levelname)s — %(message)s"
    )

    root = logging.getLogger()
    if not any(getattr(h, "_console", False) for h in root.handlers):
        console = logging.StreamHandler()
        console.setLevel(logging.WARNING)
        formatter = logging.Formatter("%(asctime)s — %(levelname)s — %(message)s")
        console.setFormatter(formatter)
        console._console = True
        root.addHandler(console)

    logging.info("Logging initialized.")
    return logfile


# ===============================
# RUN FOLDERING
# ===============================
def create_run_folder(run_name, base=None):
    """Creates <base>/<run_name>/runs/<timestamp>/output and returns the run paths."""
    cfg = load_config()
    base = base or cfg["app"].get("default_output_folder", "./output")

    safe_name = run_name.strip().replace(" ", "_") or "run"
    timestamp = datetime.utcnow().strftime("%Y-%m-%d_%H-%M-%S")

    run_root = os.path.join(base, safe_name, "runs", timestamp)
    output_dir = os.path.join(run_root, "output")
    os.makedirs(output_dir, exist_ok=True)

    return {
        "name": safe_name,
        "run_id": timestamp,
        "run_root": run_root,
        "output_dir": output_dir,
        "metadata_path": os.path.join(run_root, "metadata.json"),
    }
