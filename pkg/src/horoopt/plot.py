"""Minimal standalone SVG line plots of cumulative regret.

Written by hand rather than through a plotting library so that identical
records always produce byte-identical files.
"""

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 80, 150, 40, 60
COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]
MAX_POINTS = 2000


def _ticks(lo, hi, count=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12))
        v += step
    return out


def _fmt(v):
    return f"{v:.6g}"


def render_svg(series, title="", xlabel="t", ylabel="cumulative regret", log_x=False):
    """``series`` is a list of ``(label, xs, ys)``; returns SVG text."""
    if not series:
        raise ValueError("nothing to plot")
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    if log_x and min(xs_all) <= 0:
        raise ValueError("log-scaled axis needs positive x values")
    fx = math.log10 if log_x else (lambda v: v)
    x_lo, x_hi = fx(min(xs_all)), fx(max(xs_all))
    y_lo, y_hi = min(min(ys_all), 0.0), max(max(ys_all), 0.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (fx(x) - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return TOP + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT + pw / 2:.1f}" y="{TOP - 14}" text-anchor="middle" '
        f'font-size="14">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if log_x:
        xt = [10.0 ** k for k in range(math.floor(x_lo), math.ceil(x_hi) + 1)
              if x_lo - 1e-12 <= k <= x_hi + 1e-12]
    else:
        xt = _ticks(x_lo, x_hi)
    for v in xt:
        X = px(v)
        out.append(f'<line x1="{X:.2f}" y1="{TOP + ph}" x2="{X:.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{TOP + ph + 18}" text-anchor="middle">{_fmt(v)}</text>')
    for v in _ticks(y_lo, y_hi):
        Y = py(v)
        out.append(f'<line x1="{LEFT - 5}" y1="{Y:.2f}" x2="{LEFT}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{Y + 4:.2f}" text-anchor="end">{_fmt(v)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">'
               f'{escape(xlabel)}{" (log scale)" if log_x else ""}</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {TOP + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (label, xs, ys) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        stride = max(1, math.ceil(len(xs) / MAX_POINTS))
        idx = list(range(0, len(xs), stride))
        if idx[-1] != len(xs) - 1:
            idx.append(len(xs) - 1)
        pts = " ".join(f"{px(xs[k]):.2f},{py(ys[k]):.2f}" for k in idx)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}">'
                   f'<title>{escape(label)}</title></polyline>')
        ly = TOP + 16 + 20 * i
        lx = LEFT + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
