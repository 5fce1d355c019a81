"""Self-contained SVG convergence charts (log10 of the mean best-so-far)."""
from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

# exact zeros are drawn at this value; the CSVs keep the raw numbers
LOG_FLOOR = 1e-320

WIDTH, HEIGHT = 720, 460
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 170, 40, 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


class PlotInputError(ValueError):
    pass


def read_convergence(path) -> Tuple[np.ndarray, np.ndarray]:
    """Iterations and mean column of a convergence CSV."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise PlotInputError(f"{path}: empty file")
    header = rows[0]
    if len(header) < 3 or header[0] != "iteration" or header[-1] != "mean":
        raise PlotInputError(f"{path}: row 1: expected header 'iteration,...,mean'")
    its, means = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise PlotInputError(f"{path}: row {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            it = int(row[0])
            vals = [float(v) for v in row[1:]]
        except ValueError:
            raise PlotInputError(f"{path}: row {lineno}: non-numeric field") from None
        if not all(math.isfinite(v) for v in vals):
            raise PlotInputError(f"{path}: row {lineno}: non-finite value")
        its.append(it)
        means.append(vals[-1])
    if not its:
        raise PlotInputError(f"{path}: no data rows")
    return np.array(its, dtype=np.float64), np.array(means, dtype=np.float64)


def series_label(path) -> str:
    stem = Path(path).stem
    if stem.startswith("convergence_"):
        stem = stem[len("convergence_"):]
    return stem


def _decade_ticks(lo, hi):
    lo_i, hi_i = math.floor(lo), math.ceil(hi)
    if hi_i == lo_i:
        hi_i += 1
    step = max(1, math.ceil((hi_i - lo_i) / 8))
    lo_i -= (lo_i % step)
    ticks = list(range(lo_i, hi_i + step, step))
    return ticks


def render_svg(series: Sequence[Tuple[str, np.ndarray, np.ndarray]], title: str = "Convergence") -> str:
    if not series:
        raise PlotInputError("nothing to plot")
    logs = [np.log10(np.maximum(y, LOG_FLOOR)) for _, _, y in series]
    x_max = max(float(x[-1]) for _, x, _ in series)
    x_min = min(float(x[0]) for _, x, _ in series)
    if x_max == x_min:
        x_max = x_min + 1
    ticks = _decade_ticks(min(float(v.min()) for v in logs), max(float(v.max()) for v in logs))
    y_lo, y_hi = ticks[0], ticks[-1]

    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v):
        return MARGIN_L + (v - x_min) / (x_max - x_min) * pw

    def sy(v):
        return MARGIN_T + (y_hi - v) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{MARGIN_L + pw / 2:.1f}" y="22" text-anchor="middle" font-size="15">{_esc(title)}</text>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in ticks:
        y = sy(t)
        out.append(f'<line x1="{MARGIN_L}" y1="{y:.2f}" x2="{MARGIN_L + pw}" y2="{y:.2f}" stroke="#dddddd"/>')
        out.append(f'<text x="{MARGIN_L - 6}" y="{y + 4:.2f}" text-anchor="end">1e{t}</text>')
    for k in range(6):
        xv = x_min + k * (x_max - x_min) / 5
        x = sx(xv)
        out.append(f'<line x1="{x:.2f}" y1="{MARGIN_T + ph}" x2="{x:.2f}" y2="{MARGIN_T + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{MARGIN_T + ph + 19}" text-anchor="middle">{xv:g}</text>')
    out.append(f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">iteration</text>')
    out.append(f'<text x="18" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {MARGIN_T + ph / 2:.1f})">mean best-so-far (log10 scale)</text>')

    for i, ((label, x, _), ly) in enumerate(zip(series, logs)):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in _thin(x, ly))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly_leg = MARGIN_T + 14 + 18 * i
        lx = MARGIN_L + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly_leg}" x2="{lx + 22}" y2="{ly_leg}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 28}" y="{ly_leg + 4}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _thin(x, y, limit=2000):
    # keeps first and last point; long traces would bloat the SVG
    n = len(x)
    if n <= limit:
        idx = range(n)
    else:
        idx = sorted(set(np.linspace(0, n - 1, limit).round().astype(int).tolist()))
    return [(float(x[i]), float(y[i])) for i in idx]


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def plot_files(paths: Sequence, out_svg, title: str = "Convergence") -> Path:
    series: List = []
    for p in paths:
        x, y = read_convergence(p)
        series.append((series_label(p), x, y))
    svg = render_svg(series, title)
    out_svg = Path(out_svg)
    out_svg.write_text(svg)
    return out_svg
