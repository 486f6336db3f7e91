"""Self-contained SVG figures: quantile heatmaps and point scatters.

Output is a pure function of the inputs; numbers are written with fixed
precision so identical specs give byte-identical documents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union
from xml.sax.saxutils import escape

import numpy as np

from valleyscape.errors import ConfigError, InputError
from valleyscape.landscape import Grid

# viridis anchor colors, interpolated linearly in RGB
_STOPS = ["#440154", "#3b528b", "#21918c", "#5ec962", "#fde725"]

MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 60.0, 140.0, 40.0, 50.0


@dataclass(frozen=True)
class PointLayer:
    points: np.ndarray
    marker: str = "circle"      # circle | cross | dot
    label: str = ""
    color: str = "#333333"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        elif pts.ndim != 2 or pts.shape[1] != 2:
            raise ConfigError(f"point layer {self.label!r} is not 2-D (shape {pts.shape})")
        if self.marker not in ("circle", "cross", "dot"):
            raise ConfigError(f"unknown marker {self.marker!r}")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class LineLayer:
    segments: Sequence
    label: str = ""
    color: str = "#d62728"

    def __post_init__(self):
        seg = np.asarray(self.segments, dtype=float)
        if seg.size and seg.shape[1:] != (2, 2):
            raise ConfigError(f"line layer {self.label!r} needs segments of shape (k, 2, 2)")
        object.__setattr__(self, "segments", seg.reshape(-1, 2, 2))


@dataclass(frozen=True)
class HeatmapLayer:
    grid: Grid
    levels: int = 10


Layer = Union[PointLayer, LineLayer, HeatmapLayer]


@dataclass
class PlotSpec:
    title: str
    xlim: tuple[float, float]
    ylim: tuple[float, float]
    layers: list[Layer] = field(default_factory=list)
    width: int = 560
    height: int = 440
    output: str | Path | None = None

    def validate(self) -> None:
        for lo, hi in (self.xlim, self.ylim):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ConfigError("axis ranges must be finite with lo < hi")
        for layer in self.layers:
            if isinstance(layer, HeatmapLayer) and len(layer.grid.axes) != 2:
                raise ConfigError("heatmap layer must hold a 2-D grid")

    @property
    def box(self) -> tuple[float, float, float, float]:
        """Plot box ``(left, top, width, height)`` in SVG pixels."""
        return (MARGIN_LEFT, MARGIN_TOP, self.width - MARGIN_LEFT - MARGIN_RIGHT,
                self.height - MARGIN_TOP - MARGIN_BOTTOM)

    def to_pixels(self, xy: np.ndarray) -> np.ndarray:
        left, top, bw, bh = self.box
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        px = left + (xy[:, 0] - self.xlim[0]) / (self.xlim[1] - self.xlim[0]) * bw
        py = top + (1.0 - (xy[:, 1] - self.ylim[0]) / (self.ylim[1] - self.ylim[0])) * bh
        return np.column_stack([px, py])


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _color(t: float) -> str:
    rgb = np.array([[int(c[i:i + 2], 16) for i in (1, 3, 5)] for c in _STOPS], dtype=float)
    pos = t * (len(_STOPS) - 1)
    k = min(int(pos), len(_STOPS) - 2)
    mix = rgb[k] + (rgb[k + 1] - rgb[k]) * (pos - k)
    return "#" + "".join(f"{int(round(c)):02x}" for c in mix)


def quantile_bins(values: np.ndarray, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Assign each value to one of at most ``levels`` quantile bins.

    Returns ``(bin_index, edges)``. Duplicate quantile edges are merged, so a
    constant array lands in a single bin.
    """
    if levels < 2:
        raise ConfigError("need at least 2 color levels")
    values = np.asarray(values, dtype=float)
    edges = np.unique(np.quantile(values, np.linspace(0.0, 1.0, levels + 1)))
    if edges.size < 2:
        return np.zeros(values.shape, dtype=int), np.array([edges[0], edges[0]])
    nbins = edges.size - 1
    idx = np.searchsorted(edges[1:-1], values, side="right")
    return np.clip(idx, 0, nbins - 1), edges


def _cell_edges(axis: np.ndarray, lo: float, hi: float) -> np.ndarray:
    mids = 0.5 * (axis[1:] + axis[:-1])
    return np.clip(np.concatenate([[axis[0] - (mids[0] - axis[0])], mids,
                                   [axis[-1] + (axis[-1] - mids[-1])]]), lo, hi)


def _heatmap(spec: PlotSpec, layer: HeatmapLayer, out: list[str]) -> list[tuple[str, str]]:
    grid = layer.grid
    vals = grid.value_array()
    bins, edges = quantile_bins(vals.reshape(-1), layer.levels)
    bins = bins.reshape(vals.shape)
    nbins = edges.size - 1
    colors = [_color(k / (nbins - 1) if nbins > 1 else 0.0) for k in range(nbins)]
    xe = _cell_edges(grid.axes[0], *spec.xlim)
    ye = _cell_edges(grid.axes[1], *spec.ylim)
    out.append('<g class="heatmap" shape-rendering="crispEdges">')
    for i in range(len(grid.axes[0])):
        for j in range(len(grid.axes[1])):
            (x0, y1), (x1, y0) = spec.to_pixels(np.array([[xe[i], ye[j]], [xe[i + 1], ye[j + 1]]]))
            if x1 - x0 <= 0 or y1 - y0 <= 0:
                continue
            out.append(f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(x1 - x0)}" '
                       f'height="{_f(y1 - y0)}" fill="{colors[bins[i, j]]}" '
                       f'data-bin="{bins[i, j]}"/>')
    out.append("</g>")
    return [(colors[k], f"{edges[k]:.3g} - {edges[k + 1]:.3g}") for k in range(nbins)]


def _marker(kind: str, x: float, y: float, color: str) -> str:
    if kind == "circle":
        return f'<circle cx="{_f(x)}" cy="{_f(y)}" r="2.50" fill="none" stroke="{color}"/>'
    if kind == "dot":
        return f'<circle cx="{_f(x)}" cy="{_f(y)}" r="3.00" fill="{color}"/>'
    r = 4.0
    return (f'<path d="M{_f(x - r)},{_f(y - r)} L{_f(x + r)},{_f(y + r)} '
            f'M{_f(x - r)},{_f(y + r)} L{_f(x + r)},{_f(y - r)}" stroke="{color}" '
            f'stroke-width="1.50"/>')


def _ticks(lo: float, hi: float, count: int = 5) -> np.ndarray:
    return np.linspace(lo, hi, count)


def render_scatter_svg(spec: PlotSpec) -> str:
    """Render every layer of ``spec`` in order onto one set of axes."""
    spec.validate()
    left, top, bw, bh = spec.box
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{spec.width}" '
        f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}">',
        f'<rect x="0" y="0" width="{spec.width}" height="{spec.height}" fill="#ffffff"/>',
        f'<text x="{_f(left + bw / 2)}" y="{_f(top - 15)}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{escape(spec.title)}</text>',
        f'<clipPath id="plotbox"><rect x="{_f(left)}" y="{_f(top)}" width="{_f(bw)}" '
        f'height="{_f(bh)}"/></clipPath>',
    ]
    legend: list[tuple[str, str, str]] = []
    body = ['<g clip-path="url(#plotbox)">']
    for layer in spec.layers:
        if isinstance(layer, HeatmapLayer):
            legend.extend(("rect", c, t) for c, t in _heatmap(spec, layer, body))
        elif isinstance(layer, LineLayer):
            body.append(f'<g class="lines" stroke="{layer.color}" stroke-width="1.50">')
            for seg in layer.segments:
                (x0, y0), (x1, y1) = spec.to_pixels(seg)
                body.append(f'<line x1="{_f(x0)}" y1="{_f(y0)}" x2="{_f(x1)}" y2="{_f(y1)}"/>')
            body.append("</g>")
            if layer.label:
                legend.append(("line", layer.color, layer.label))
        else:
            body.append(f'<g class="points" data-marker="{layer.marker}">')
            if layer.points.size:
                for x, y in spec.to_pixels(layer.points):
                    body.append(_marker(layer.marker, x, y, layer.color))
            body.append("</g>")
            if layer.label:
                legend.append((layer.marker, layer.color, layer.label))
    body.append("</g>")
    out.extend(body)

    # axes frame and ticks
    out.append(f'<rect x="{_f(left)}" y="{_f(top)}" width="{_f(bw)}" height="{_f(bh)}" '
               f'fill="none" stroke="#000000"/>')
    out.append('<g font-family="sans-serif" font-size="10">')
    for v in _ticks(*spec.xlim):
        px = spec.to_pixels(np.array([[v, spec.ylim[0]]]))[0, 0]
        out.append(f'<line x1="{_f(px)}" y1="{_f(top + bh)}" x2="{_f(px)}" y2="{_f(top + bh + 4)}" '
                   f'stroke="#000000"/>')
        out.append(f'<text x="{_f(px)}" y="{_f(top + bh + 16)}" text-anchor="middle">{v:.3g}</text>')
    for v in _ticks(*spec.ylim):
        py = spec.to_pixels(np.array([[spec.xlim[0], v]]))[0, 1]
        out.append(f'<line x1="{_f(left - 4)}" y1="{_f(py)}" x2="{_f(left)}" y2="{_f(py)}" '
                   f'stroke="#000000"/>')
        out.append(f'<text x="{_f(left - 6)}" y="{_f(py + 3)}" text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{_f(left + bw / 2)}" y="{_f(top + bh + 34)}" '
               f'text-anchor="middle">x1</text>')
    out.append(f'<text x="{_f(left - 40)}" y="{_f(top + bh / 2)}" text-anchor="middle">x2</text>')
    out.append("</g>")

    if legend:
        lx, ly = left + bw + 12, top + 6
        out.append('<g class="legend" font-family="sans-serif" font-size="10">')
        for k, (kind, color, text) in enumerate(legend):
            y = ly + 14 * k
            if kind == "rect":
                out.append(f'<rect x="{_f(lx)}" y="{_f(y - 4)}" width="10.00" height="8.00" '
                           f'fill="{color}"/>')
            elif kind == "line":
                out.append(f'<line x1="{_f(lx)}" y1="{_f(y)}" x2="{_f(lx + 10)}" y2="{_f(y)}" '
                           f'stroke="{color}" stroke-width="1.50"/>')
            else:
                out.append(_marker(kind, lx + 5, y, color))
            out.append(f'<text x="{_f(lx + 16)}" y="{_f(y + 3)}">{escape(text)}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_contour_svg(grid: Grid, levels: int = 10, title: str = "",
                       overlays: Sequence[Layer] = ()) -> str:
    """Quantile-binned filled-cell heatmap of a 2-D grid, with a color legend."""
    if len(grid.axes) != 2:
        raise InputError("contour rendering needs a 2-D grid")
    nx, ny = (a.size for a in grid.axes)
    if nx < 2 or ny < 2 or grid.values.size != nx * ny:
        raise InputError("grid is not a rectangular lattice with resolution >= 2")
    if levels < 2:
        raise ConfigError("need at least 2 color levels")
    spec = PlotSpec(title, (float(grid.axes[0][0]), float(grid.axes[0][-1])),
                    (float(grid.axes[1][0]), float(grid.axes[1][-1])),
                    [HeatmapLayer(grid, levels), *overlays])
    return render_scatter_svg(spec)


def pca_layers(population, selected, projected, line: np.ndarray | None = None) -> list[Layer]:
    """Standard layer stack for a PCA-projection figure."""
    layers: list[Layer] = [
        PointLayer(population, "circle", "population", "#555555"),
        PointLayer(selected, "cross", "selected", "#000000"),
        PointLayer(projected, "dot", "projected", "#d62728"),
    ]
    if line is not None:
        layers.append(LineLayer([line], "valley estimate", "#d62728"))
    return layers


def write_svg(path: str | Path, document: str) -> None:
    Path(path).write_text(document, encoding="utf-8")
