"""Static SVG drawing of a realization in the native representation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .components import connected_components
from .errors import ResourceError

RENDER_CAP = 50_000


@dataclass
class RenderOptions:
    size: int = 800
    margin: int = 10
    point_radius: float = 1.5
    edge_width: float = 0.4
    color: str = "#7f7f7f"
    highlight: str = "#c0392b"
    highlight_largest: bool = True


def _f(x: float) -> str:
    return f"{x:.3f}"


def render_svg(graph, options: RenderOptions | None = None) -> str:
    """SVG text: a vertex at Euclidean polar (R - t, theta), edges as straight segments.

    The outer circle has radius R and the dashed circle radius R/2. Vertices
    and edges of the largest component use the highlight colour.
    """
    opt = options or RenderOptions()
    n = graph.n_vertices
    if n > RENDER_CAP:
        raise ResourceError(f"{n} vertices exceeds the render cap {RENDER_CAP}")
    R = graph.R
    half = opt.size / 2.0
    scale = (half - opt.margin) / R
    r = (R - graph.t) * scale
    x = half + r * np.cos(graph.theta)
    # SVG y grows downwards; flip so angles run anticlockwise
    y = half - r * np.sin(graph.theta)

    in_l1 = np.zeros(n, dtype=bool)
    if opt.highlight_largest and n:
        comps = connected_components(graph)
        if comps.size_L1 > 1:
            in_l1 = comps.labels == 0

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{opt.size}" height="{opt.size}" '
        f'viewBox="0 0 {opt.size} {opt.size}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<circle cx="{_f(half)}" cy="{_f(half)}" r="{_f(R * scale)}" fill="none" stroke="black" stroke-width="1"/>',
        f'<circle cx="{_f(half)}" cy="{_f(half)}" r="{_f(R * scale / 2)}" fill="none" stroke="black" '
        'stroke-width="0.8" stroke-dasharray="4,4"/>',
    ]
    if graph.n_edges:
        out.append(f'<g stroke-width="{opt.edge_width}">')
        for u, v in graph.edges.tolist():
            col = opt.highlight if in_l1[u] else opt.color
            out.append(f'<line x1="{_f(x[u])}" y1="{_f(y[u])}" x2="{_f(x[v])}" y2="{_f(y[v])}" stroke="{col}"/>')
        out.append("</g>")
    if n:
        out.append("<g>")
        for k in range(n):
            col = opt.highlight if in_l1[k] else "black"
            out.append(f'<circle cx="{_f(x[k])}" cy="{_f(y[k])}" r="{opt.point_radius}" fill="{col}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(graph, path, options: RenderOptions | None = None):
    with open(path, "w") as fh:
        fh.write(render_svg(graph, options))
