"""Tiny dependency-free SVG line/scatter plots for the CLI --plot output."""

from __future__ import annotations

import math

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 55


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        lo_e = math.floor(math.log10(lo))
        hi_e = math.ceil(math.log10(hi))
        return [10.0 ** e for e in range(int(lo_e), int(hi_e) + 1)]
    if hi == lo:
        return [lo]
    step = 10.0 ** math.floor(math.log10((hi - lo) / 4.0))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if (hi - lo) / (step * mult) <= 6:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    ticks, t = [], first
    while t <= hi + 1e-12 * abs(hi - lo):
        ticks.append(t)
        t += step
    return ticks


def line_plot(x, y, xlabel: str, ylabel: str, title: str,
              logx: bool = False, logy: bool = False) -> str:
    """Single-series line+marker plot as an SVG document string."""
    pairs = [(float(a), float(b)) for a, b in zip(x, y)
             if math.isfinite(a) and math.isfinite(b)
             and not (logx and a <= 0) and not (logy and b <= 0)]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="16" '
        f'font-family="sans-serif">{title}</text>',
    ]
    if not pairs:
        parts.append(f'<text x="{WIDTH / 2}" y="{HEIGHT / 2}" text-anchor="middle" '
                     'font-size="14" font-family="sans-serif">no plottable data</text></svg>')
        return "\n".join(parts)

    xs = [p[0] for p in pairs]
    ys = [p[1] for p in pairs]
    tx = (lambda v: math.log10(v)) if logx else (lambda v: v)
    ty = (lambda v: math.log10(v)) if logy else (lambda v: v)
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_lo == x_hi:
        x_lo, x_hi = (x_lo * 0.5, x_hi * 2.0) if logx else (x_lo - 0.5, x_hi + 0.5)
    if y_lo == y_hi:
        y_lo, y_hi = (y_lo * 0.5, y_hi * 2.0) if logy else (y_lo - 0.5, y_hi + 0.5)
    sx_lo, sx_hi = tx(x_lo), tx(x_hi)
    sy_lo, sy_hi = ty(y_lo), ty(y_hi)
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(v):
        return MARGIN_L + plot_w * (tx(v) - sx_lo) / (sx_hi - sx_lo)

    def py(v):
        return MARGIN_T + plot_h * (1.0 - (ty(v) - sy_lo) / (sy_hi - sy_lo))

    parts.append(f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
                 'fill="none" stroke="#444"/>')
    for t in _ticks(x_lo, x_hi, logx):
        if x_lo <= t <= x_hi:
            parts.append(f'<line x1="{_fmt(px(t))}" y1="{MARGIN_T + plot_h}" '
                         f'x2="{_fmt(px(t))}" y2="{MARGIN_T + plot_h + 5}" stroke="#444"/>')
            parts.append(f'<text x="{_fmt(px(t))}" y="{MARGIN_T + plot_h + 20}" '
                         f'text-anchor="middle" font-size="11" font-family="sans-serif">'
                         f'{_fmt(t)}</text>')
    for t in _ticks(y_lo, y_hi, logy):
        if y_lo <= t <= y_hi:
            parts.append(f'<line x1="{MARGIN_L - 5}" y1="{_fmt(py(t))}" '
                         f'x2="{MARGIN_L}" y2="{_fmt(py(t))}" stroke="#444"/>')
            parts.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(py(t) + 4)}" '
                         f'text-anchor="end" font-size="11" font-family="sans-serif">'
                         f'{_fmt(t)}</text>')
    points = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in pairs)
    if len(pairs) > 1:
        parts.append(f'<polyline points="{points}" fill="none" stroke="#1f6fb2" stroke-width="1.5"/>')
    for a, b in pairs:
        parts.append(f'<circle cx="{_fmt(px(a))}" cy="{_fmt(py(b))}" r="3" fill="#1f6fb2"/>')
    parts.append(f'<text x="{MARGIN_L + plot_w / 2}" y="{HEIGHT - 14}" text-anchor="middle" '
                 f'font-size="13" font-family="sans-serif">{xlabel}</text>')
    parts.append(f'<text x="18" y="{MARGIN_T + plot_h / 2}" text-anchor="middle" '
                 f'font-size="13" font-family="sans-serif" '
                 f'transform="rotate(-90 18 {MARGIN_T + plot_h / 2})">{ylabel}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
