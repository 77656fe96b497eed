"""Static SVG drawings of instances, graphs, shortest paths and route traces."""
from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

from .instance import GeomGraph, Instance

STYLE = {
    "graph": 'stroke="black" stroke-width="1"',
    "constraint": 'stroke="red" stroke-width="4"',
    "pi_G": 'stroke="blue" stroke-width="2.5" stroke-dasharray="2,4" stroke-linecap="round"',
    "pi_H": 'stroke="orange" stroke-width="2.5" stroke-dasharray="10,4,2,4"',
    "trace": 'stroke="green" stroke-width="2" stroke-opacity="0.6"',
}


class RenderError(ValueError):
    pass


@dataclass
class Layers:
    points: bool = True
    labels: bool = True
    constraints: bool = True
    graph: bool = True
    paths: bool = True
    trace: bool = True


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_svg(inst: Instance, graph: GeomGraph | None = None, pi_G=None, pi_H=None,
               trace=None, layers: Layers | None = None, width: int = 800, height: int = 600,
               equal_aspect: bool = True, margin: int = 30) -> str:
    """Return an SVG document.

    ``pi_G``/``pi_H`` are vertex sequences, ``trace`` is a list of directed
    edges ``(from, to)``.  With ``equal_aspect=False`` both axes are
    stretched independently to fill the canvas, which keeps very flat
    constructions readable.
    """
    if inst is None or inst.n == 0:
        raise RenderError("nothing to render: empty instance")
    layers = layers or Layers()
    xy = [inst.float_xy(v) for v in range(inst.n)]
    xs = [p[0] for p in xy]
    ys = [p[1] for p in xy]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    sx = (width - 2 * margin) / (x1 - x0) if x1 > x0 else 1.0
    sy = (height - 2 * margin) / (y1 - y0) if y1 > y0 else 1.0
    if equal_aspect:
        sx = sy = min(sx, sy)

    def P(v):
        x, y = xy[v]
        return margin + (x - x0) * sx, height - margin - (y - y0) * sy

    def line(a, b, style):
        (ax, ay), (bx, by) = P(a), P(b)
        return (f'<line x1="{_fmt(ax)}" y1="{_fmt(ay)}" x2="{_fmt(bx)}" y2="{_fmt(by)}" '
                f'{style} fill="none"/>')

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           '<rect width="100%" height="100%" fill="white"/>']
    if graph is not None and layers.graph:
        out.append('<g id="graph">')
        out += [line(a, b, STYLE["graph"]) for a, b in graph.edges()]
        out.append("</g>")
    if layers.constraints:
        out.append('<g id="constraints">')
        out += [line(a, b, STYLE["constraint"]) for a, b in inst.constraints]
        out.append("</g>")
    if trace and layers.trace:
        out.append('<g id="trace">')
        seen = set()
        for a, b in trace:
            e = (min(a, b), max(a, b))
            if e not in seen:
                seen.add(e)
                out.append(line(a, b, STYLE["trace"]))
        out.append("</g>")
    if layers.paths:
        for name, path in (("pi_G", pi_G), ("pi_H", pi_H)):
            if path and len(path) > 1:
                out.append(f'<g id="{name}">')
                out += [line(a, b, STYLE[name]) for a, b in zip(path, path[1:])]
                out.append("</g>")
    if layers.points:
        out.append('<g id="points">')
        for v in range(inst.n):
            x, y = P(v)
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="black"/>')
            if layers.labels:
                out.append(f'<text x="{_fmt(x + 4)}" y="{_fmt(y - 4)}" font-size="10">'
                           f'{escape(str(v))}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
