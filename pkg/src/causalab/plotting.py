"""Minimal self-contained SVG charts with byte-stable output.

Only line, log-log and heatmap charts are needed for the batch front end, so
these are written directly as SVG text (no fonts or external assets).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import MissingColumn

W, H = 640, 420
PAD_L, PAD_R, PAD_T, PAD_B = 70, 20, 30, 50


@dataclass
class ResultTable:
    """Rectangular table: named columns, row-major records and a metadata block."""

    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError("ragged table")

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise MissingColumn(name)
        if not self.rows:
            raise MissingColumn(f"{name} (table is empty)")
        j = self.columns.index(name)
        return np.array([float(r[j]) for r in self.rows])


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo: float, hi: float, n: int = 5) -> list:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _frame(title: str, xlabel: str, ylabel: str) -> list:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{W / 2}" y="{H - 10}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="14" y="{H / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {H / 2})">{ylabel}</text>',
        f'<rect x="{PAD_L}" y="{PAD_T}" width="{W - PAD_L - PAD_R}" '
        f'height="{H - PAD_T - PAD_B}" fill="none" stroke="black"/>',
    ]


def _scale(v, lo, hi, a, b):
    if hi == lo:
        return 0.5 * (a + b)
    return a + (v - lo) / (hi - lo) * (b - a)


def line_svg(table: ResultTable, x: str, y: str, *, loglog: bool = False,
             title: str = "", ylim: Sequence[float] | None = None) -> str:
    """Polyline of column ``y`` against ``x``; with ``loglog`` a fitted slope is annotated."""
    xs, ys = table.column(x), table.column(y)
    if loglog:
        ok = (xs > 0) & (ys > 0)
        xs, ys = np.log10(xs[ok]), np.log10(ys[ok])
        if xs.size == 0:
            raise MissingColumn(f"{x}/{y} have no positive entries")
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = (float(ys.min()), float(ys.max())) if ylim is None else map(float, ylim)
    px = [_scale(v, x0, x1, PAD_L, W - PAD_R) for v in xs]
    py = [_scale(v, y0, y1, H - PAD_B, PAD_T) for v in ys]
    out = _frame(title or f"{y} vs {x}", ("log10 " if loglog else "") + x,
                 ("log10 " if loglog else "") + y)
    for t in _ticks(x0, x1):
        xp = _scale(t, x0, x1, PAD_L, W - PAD_R)
        out.append(f'<text x="{xp:.2f}" y="{H - PAD_B + 16}" text-anchor="middle" '
                   f'font-size="10">{_fmt(t)}</text>')
    for t in _ticks(y0, y1):
        yp = _scale(t, y0, y1, H - PAD_B, PAD_T)
        out.append(f'<text x="{PAD_L - 6}" y="{yp:.2f}" text-anchor="end" '
                   f'font-size="10">{_fmt(t)}</text>')
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    out.append(f'<polyline points="{pts}" fill="none" stroke="#1f5fa8" stroke-width="1.5"/>')
    for a, b in zip(px, py):
        out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2.5" fill="#1f5fa8"/>')
    if loglog and xs.size >= 2:
        slope = float(np.polyfit(xs, ys, 1)[0])
        out.append(f'<text x="{W - PAD_R - 8}" y="{PAD_T + 18}" text-anchor="end" '
                   f'font-size="12">fitted slope {slope:.4f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heatmap_svg(table: ResultTable, x: str, y: str, z: str, *, title: str = "") -> str:
    """Cells coloured by ``z`` on the grid of distinct (x, y) values."""
    xs, ys, zs = table.column(x), table.column(y), table.column(z)
    ux, uy = sorted(set(xs.tolist())), sorted(set(ys.tolist()))
    zlo, zhi = float(zs.min()), float(zs.max())
    cw = (W - PAD_L - PAD_R) / len(ux)
    ch = (H - PAD_T - PAD_B) / len(uy)
    out = _frame(title or f"{z} over ({x}, {y})", x, y)
    for a, b, v in zip(xs, ys, zs):
        i, j = ux.index(a), uy.index(b)
        s = 0.5 if zhi == zlo else (v - zlo) / (zhi - zlo)
        r, g, bl = int(255 * s), int(80 + 100 * (1 - abs(2 * s - 1))), int(255 * (1 - s))
        out.append(f'<rect x="{PAD_L + i * cw:.2f}" y="{H - PAD_B - (j + 1) * ch:.2f}" '
                   f'width="{cw:.2f}" height="{ch:.2f}" fill="rgb({r},{g},{bl})"/>')
    for i, a in enumerate(ux):
        out.append(f'<text x="{PAD_L + (i + 0.5) * cw:.2f}" y="{H - PAD_B + 16}" '
                   f'text-anchor="middle" font-size="9">{_fmt(a)}</text>')
    for j, b in enumerate(uy):
        out.append(f'<text x="{PAD_L - 6}" y="{H - PAD_B - (j + 0.5) * ch:.2f}" '
                   f'text-anchor="end" font-size="9">{_fmt(b)}</text>')
    out.append(f'<text x="{W - PAD_R}" y="{PAD_T - 6}" text-anchor="end" font-size="10">'
               f'{z}: {_fmt(zlo)} (blue) to {_fmt(zhi)} (red)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot(table: ResultTable, kind: str, x: str, y: str, z: str | None = None, **kw) -> str:
    if kind == "line":
        return line_svg(table, x, y, **kw)
    if kind == "loglog":
        return line_svg(table, x, y, loglog=True, **kw)
    if kind == "heatmap":
        if z is None:
            raise MissingColumn("heatmap needs a value column")
        return heatmap_svg(table, x, y, z, **kw)
    raise ValueError(f"unknown plot kind {kind!r}")
