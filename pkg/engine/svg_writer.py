import os
import logging
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from engine.diameters import Diameter, FacetPair, unordered_pairs
from engine.errors import DimensionMismatch
from engine.geom_core import Polytope
from engine.minkowski import difference_body
from engine.utils import load_config

cfg = load_config()


def _xy(points):
    return [[float(c) for c in p] for p in points]


def _bounds(*polys: Polytope):
    xs = [float(v[0]) for P in polys for v in P.vertices]
    ys = [float(v[1]) for P in polys for v in P.vertices]
    return min(xs), max(xs), min(ys), max(ys)


def write_svg(P: Polytope, out_path: str, pairs: Optional[Sequence[FacetPair]] = None,
              diameters: Sequence[Diameter] = (), point=None):
    """
    P, its difference body, one filled slab per unordered facet pair and the
    diameters through ``point``. Output is byte-stable for identical input.
    """
    if P.dim != 2:
        raise DimensionMismatch(f"SVG output is for polygons, got dim {P.dim}")
    svg_cfg = cfg["svg"]
    px = int(svg_cfg.get("canvas_px", 800))
    matplotlib.rcParams["svg.hashsalt"] = svg_cfg.get("hash_salt", "afd")

    DP = difference_body(P)
    fig = plt.figure(figsize=(px / 100, px / 100), dpi=100)
    ax = fig.add_axes([0, 0, 1, 1])
    ax.set_axis_off()
    ax.set_aspect("equal")

    ax.add_patch(plt.Polygon(_xy(DP.polygon()), fill=False, edgecolor=svg_cfg["difference_color"],
                             linestyle="--", linewidth=1.0))

    colors = svg_cfg.get("slab_colors", ["#c6efce"])
    for i, pair in enumerate(unordered_pairs(pairs or [])):
        ax.add_patch(plt.Polygon(_xy(pair.slab.polygon()), fill=True, facecolor=colors[i % len(colors)],
                                 edgecolor="none", alpha=0.6))

    ax.add_patch(plt.Polygon(_xy(P.polygon()), fill=False, edgecolor=svg_cfg["body_color"], linewidth=2.0))

    for d in diameters:
        ax.plot([float(d.x[0]), float(d.y[0])], [float(d.x[1]), float(d.y[1])],
                color=svg_cfg["diameter_color"], linewidth=1.5)
    if point is not None:
        ax.plot([float(point[0])], [float(point[1])], marker="o", color=svg_cfg["diameter_color"])

    x0, x1, y0, y1 = _bounds(P, DP)
    pad = 0.05 * max(x1 - x0, y1 - y0)
    ax.set_xlim(x0 - pad, x1 + pad)
    ax.set_ylim(y0 - pad, y1 + pad)

    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logging.info(f"SVG written to {out_path}")
    return out_path
