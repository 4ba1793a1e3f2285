"""Minimal SVG scatter plots with byte-stable output."""
from __future__ import annotations

import csv
import fnmatch
import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 480
MARGIN = 56


class UsageError(Exception):
    """Bad request from the caller (missing column, unreadable CSV)."""


@dataclass
class SvgScatter:
    points: list[tuple[float, float]]
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    marker: float = 1.2
    title: str = ""
    x_label: str = "x"
    y_label: str = "y"

    def _ranges(self):
        def rng(vals, fixed):
            if fixed is not None:
                return fixed
            if not vals:
                return (0.0, 1.0)
            lo, hi = min(vals), max(vals)
            if hi == lo:
                lo, hi = lo - 0.5, hi + 0.5
            pad = 0.02 * (hi - lo)
            return (lo - pad, hi + pad)
        return rng([p[0] for p in self.points], self.x_range), rng([p[1] for p in self.points], self.y_range)

    def to_svg(self) -> str:
        (x0, x1), (y0, y1) = self._ranges()
        pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

        def px(x):
            return MARGIN + (x - x0) / (x1 - x0) * pw

        def py(y):
            return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph

        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<g stroke="black" stroke-width="1">'
            f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}"/>'
            f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}"/></g>',
            '<g font-family="sans-serif" font-size="11" fill="black">',
            f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 16}">{_num(x0)}</text>',
            f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 16}" text-anchor="end">{_num(x1)}</text>',
            f'<text x="{MARGIN - 4}" y="{HEIGHT - MARGIN}" text-anchor="end">{_num(y0)}</text>',
            f'<text x="{MARGIN - 4}" y="{MARGIN + 10}" text-anchor="end">{_num(y1)}</text>',
            f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 16}" text-anchor="middle">{escape(self.x_label)}</text>',
            f'<text x="16" y="{HEIGHT / 2:.0f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {HEIGHT / 2:.0f})">{escape(self.y_label)}</text>',
            f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-size="14">{escape(self.title)}</text>',
            '</g>',
            '<g fill="black" stroke="none">',
        ]
        for x, y in self.points:
            if x0 <= x <= x1 and y0 <= y <= y1:
                out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="{self.marker}"/>')
        out += ["</g>", "</svg>", ""]
        return "\n".join(out)

    def write(self, path) -> None:
        Path(path).write_bytes(self.to_svg().encode("utf-8"))


def _num(v: float) -> str:
    return format(v, ".4g")


def _resolve(header: list[str], pattern: str) -> list[int]:
    idx = [i for i, h in enumerate(header) if fnmatch.fnmatchcase(h, pattern)]
    if not idx:
        raise UsageError(f"column {pattern!r} not in CSV header {header}")
    return idx


def read_points(csv_in, x_col: str, y_col: str) -> list[tuple[float, float]]:
    """(x, y) pairs; ``y_col`` may be a glob such as 'value_*' (one point per match)."""
    try:
        with open(csv_in, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    if not rows:
        return []
    header, body = rows[0], rows[1:]
    xi = _resolve(header, x_col)
    if len(xi) != 1:
        raise UsageError(f"x column {x_col!r} must match exactly one column")
    yi = _resolve(header, y_col)
    pts = []
    for row in body:
        try:
            x = float(row[xi[0]])
        except (ValueError, IndexError):
            continue
        for j in yi:
            if j < len(row) and row[j] != "":
                y = float(row[j])
                if math.isfinite(x) and math.isfinite(y):
                    pts.append((x, y))
    return pts


def render_scatter(csv_in, x_col: str, y_col: str, svg_out, title: str = "") -> int:
    """Scatter ``y_col`` against ``x_col``; returns the number of dots drawn."""
    pts = read_points(csv_in, x_col, y_col)
    SvgScatter(pts, title=title, x_label=x_col, y_label=y_col).write(svg_out)
    return len(pts)
