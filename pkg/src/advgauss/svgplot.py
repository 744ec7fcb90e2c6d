"""Tiny SVG writer for log-log line plots, one panel per entry."""

from __future__ import annotations

import math
from html import escape
from pathlib import Path

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

PANEL_W, PANEL_H = 320, 260
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 62, 14, 30, 46


def _decades(lo, hi):
    a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
    if a == b:
        b += 1
    return a, b


def _fmt_decade(k):
    return f"1e{k}" if abs(k) > 3 else f"{10.0**k:g}"


def _panel(title, series, x_label, y_label, ox, oy, colors):
    pts_x = [x for xs, ys in series.values() for x, y in zip(xs, ys) if x > 0 and y > 0]
    pts_y = [y for xs, ys in series.values() for x, y in zip(xs, ys) if x > 0 and y > 0]
    out = [f'<g transform="translate({ox},{oy})">']
    out.append(f'<text x="{PANEL_W / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>')
    x0, y0 = MARGIN_L, PANEL_H - MARGIN_B
    w, h = PANEL_W - MARGIN_L - MARGIN_R, PANEL_H - MARGIN_T - MARGIN_B
    out.append(f'<rect x="{x0}" y="{MARGIN_T}" width="{w}" height="{h}" fill="none" stroke="#000"/>')
    if not pts_x:
        out.append("</g>")
        return out
    xa, xb = _decades(min(pts_x), max(pts_x))
    ya, yb = _decades(min(pts_y), max(pts_y))

    def sx(x):
        return x0 + (math.log10(x) - xa) / (xb - xa) * w

    def sy(y):
        return y0 - (math.log10(y) - ya) / (yb - ya) * h

    for k in range(xa, xb + 1):
        px = sx(10.0**k)
        out.append(f'<line x1="{px:.1f}" y1="{y0}" x2="{px:.1f}" y2="{y0 + 4}" stroke="#000"/>')
        out.append(f'<text x="{px:.1f}" y="{y0 + 16}" text-anchor="middle" font-size="10">{_fmt_decade(k)}</text>')
    for k in range(ya, yb + 1):
        py = sy(10.0**k)
        out.append(f'<line x1="{x0 - 4}" y1="{py:.1f}" x2="{x0}" y2="{py:.1f}" stroke="#000"/>')
        out.append(f'<line x1="{x0}" y1="{py:.1f}" x2="{x0 + w}" y2="{py:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{x0 - 6}" y="{py + 3:.1f}" text-anchor="end" font-size="10">{_fmt_decade(k)}</text>')
    out.append(f'<text x="{x0 + w / 2:.1f}" y="{PANEL_H - 8}" text-anchor="middle" font-size="11">{escape(x_label)}</text>')
    out.append(
        f'<text x="14" y="{MARGIN_T + h / 2:.1f}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 14 {MARGIN_T + h / 2:.1f})">{escape(y_label)}</text>'
    )
    for i, (name, (xs, ys)) in enumerate(series.items()):
        color = colors[name]
        pts = [(sx(x), sy(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
        if len(pts) > 1:
            path = " ".join(f"{px:.1f},{py:.1f}" for px, py in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.6"/>')
        for px, py in pts:
            out.append(f'<circle cx="{px:.1f}" cy="{py:.1f}" r="2.6" fill="{color}"/>')
        ly = MARGIN_T + 14 + 14 * i
        out.append(f'<line x1="{x0 + w - 96}" y1="{ly - 4}" x2="{x0 + w - 80}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{x0 + w - 76}" y="{ly}" font-size="10">{escape(name)}</text>')
    out.append("</g>")
    return out


def loglog_svg(panels, x_label="n", y_label="excess risk", title=None) -> str:
    """Render ``panels``, a list of ``(panel_title, {series: (xs, ys)})``.

    Non-positive values are dropped, since they have no place on a log axis.
    """
    names = []
    for _, series in panels:
        names += [k for k in series if k not in names]
    colors = {k: PALETTE[i % len(PALETTE)] for i, k in enumerate(names)}
    top = 24 if title else 0
    width, height = PANEL_W * max(len(panels), 1), PANEL_H + top
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="#fff"/>',
    ]
    if title:
        parts.append(f'<text x="{width / 2:.1f}" y="17" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for i, (ptitle, series) in enumerate(panels):
        parts += _panel(ptitle, series, x_label, y_label, i * PANEL_W, top, colors)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_loglog_svg(path, panels, **kwargs) -> None:
    Path(path).write_text(loglog_svg(panels, **kwargs))
