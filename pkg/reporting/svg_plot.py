"""
SVG Charts
Minimal self-contained line, boxplot and bar charts (800 x 500 viewBox,
axis ticks at the quartiles of each axis range)
"""

from pathlib import Path
from typing import Dict, List, Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH = 800
HEIGHT = 500
MARGIN_LEFT = 80
MARGIN_RIGHT = 30
MARGIN_TOP = 50
MARGIN_BOTTOM = 60

PALETTE = ("#c0392b", "#2471a3", "#229954", "#7d3c98", "#d68910", "#566573")


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _label(value: float) -> str:
    return f"{value:.4g}"


class _Frame:
    """Maps data coordinates to the plot area"""

    def __init__(self, x_range, y_range):
        self.x0, self.x1 = self._pad(*x_range)
        self.y0, self.y1 = self._pad(*y_range)
        self.left = MARGIN_LEFT
        self.right = WIDTH - MARGIN_RIGHT
        self.top = MARGIN_TOP
        self.bottom = HEIGHT - MARGIN_BOTTOM

    @staticmethod
    def _pad(low: float, high: float):
        if not np.isfinite(low) or not np.isfinite(high):
            return 0.0, 1.0
        if high - low < 1e-12:
            return low - 0.5, high + 0.5
        return float(low), float(high)

    def x(self, value: float) -> float:
        return self.left + (value - self.x0) / (self.x1 - self.x0) * (self.right - self.left)

    def y(self, value: float) -> float:
        return self.bottom - (value - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)


def _axes(frame: _Frame, title: str, x_label: str, y_label: str, x_ticks: bool = True) -> List[str]:
    parts = [
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="28" text-anchor="middle" font-size="18">{escape(title)}</text>',
        f'<line x1="{frame.left}" y1="{frame.bottom}" x2="{frame.right}" y2="{frame.bottom}" stroke="black"/>',
        f'<line x1="{frame.left}" y1="{frame.top}" x2="{frame.left}" y2="{frame.bottom}" stroke="black"/>',
        f'<text x="{(frame.left + frame.right) / 2}" y="{HEIGHT - 15}" text-anchor="middle" '
        f'font-size="14">{escape(x_label)}</text>',
        f'<text x="20" y="{(frame.top + frame.bottom) / 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 20 {(frame.top + frame.bottom) / 2})">{escape(y_label)}</text>',
    ]
    for q in (0.0, 0.25, 0.5, 0.75, 1.0):
        yv = frame.y0 + q * (frame.y1 - frame.y0)
        yp = _fmt(frame.y(yv))
        parts.append(f'<line x1="{frame.left - 5}" y1="{yp}" x2="{frame.left}" y2="{yp}" stroke="black"/>')
        parts.append(
            f'<text x="{frame.left - 8}" y="{yp}" text-anchor="end" dominant-baseline="middle" '
            f'font-size="12">{_label(yv)}</text>'
        )
        if x_ticks:
            xv = frame.x0 + q * (frame.x1 - frame.x0)
            xp = _fmt(frame.x(xv))
            parts.append(f'<line x1="{xp}" y1="{frame.bottom}" x2="{xp}" y2="{frame.bottom + 5}" stroke="black"/>')
            parts.append(
                f'<text x="{xp}" y="{frame.bottom + 20}" text-anchor="middle" font-size="12">{_label(xv)}</text>'
            )
    return parts


def _document(parts: List[str]) -> str:
    body = "\n  ".join(parts)
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}">\n  {body}\n</svg>\n'
    )


def line_chart_svg(
    x: Sequence[float],
    series: Dict[str, Sequence[float]],
    title: str = "",
    x_label: str = "",
    y_label: str = ""
) -> str:
    """
    Line chart of one or more series against x

    Args:
        x: Abscissae
        series: Label -> ordinates (same length as x)
        title: Chart title
        x_label: x-axis label
        y_label: y-axis label

    Returns:
        SVG document as a string
    """
    x = np.asarray(x, dtype=float)
    ys = {name: np.asarray(values, dtype=float) for name, values in series.items()}
    stacked = np.concatenate(list(ys.values())) if ys else np.zeros(1)
    frame = _Frame((x.min(), x.max()), (np.nanmin(stacked), np.nanmax(stacked)))

    parts = _axes(frame, title, x_label, y_label)
    for index, (name, values) in enumerate(ys.items()):
        colour = PALETTE[index % len(PALETTE)]
        points = " ".join(f"{_fmt(frame.x(a))},{_fmt(frame.y(b))}" for a, b in zip(x, values))
        parts.append(f'<polyline fill="none" stroke="{colour}" stroke-width="2" points="{points}"/>')
        parts.append(
            f'<text x="{frame.right - 10}" y="{frame.top + 16 * (index + 1)}" text-anchor="end" '
            f'font-size="12" fill="{colour}">{escape(name)}</text>'
        )
    return _document(parts)


def boxplot_svg(
    boxes: Dict[str, Dict[str, float]],
    title: str = "",
    y_label: str = ""
) -> str:
    """
    Boxplots from precomputed five-number summaries

    Args:
        boxes: Label -> {"min", "q1", "median", "q3", "max"}
        title: Chart title
        y_label: y-axis label

    Returns:
        SVG document as a string
    """
    values = [v for stats in boxes.values() for v in stats.values() if np.isfinite(v)]
    low, high = (min(values), max(values)) if values else (0.0, 1.0)
    frame = _Frame((0.0, float(max(len(boxes), 1))), (low, high))

    parts = _axes(frame, title, "", y_label, x_ticks=False)
    for index, (name, stats) in enumerate(boxes.items()):
        colour = PALETTE[index % len(PALETTE)]
        centre = frame.x(index + 0.5)
        half = 0.25 * (frame.x(1.0) - frame.x(0.0))
        y = {key: _fmt(frame.y(stats[key])) for key in ("min", "q1", "median", "q3", "max")}
        top, bottom = frame.y(stats["q3"]), frame.y(stats["q1"])
        parts.extend([
            f'<line x1="{_fmt(centre)}" y1="{y["min"]}" x2="{_fmt(centre)}" y2="{y["max"]}" stroke="black"/>',
            f'<rect x="{_fmt(centre - half)}" y="{_fmt(top)}" width="{_fmt(2 * half)}" '
            f'height="{_fmt(max(bottom - top, 0.5))}" fill="{colour}" fill-opacity="0.4" stroke="{colour}"/>',
            f'<line x1="{_fmt(centre - half)}" y1="{y["median"]}" x2="{_fmt(centre + half)}" '
            f'y2="{y["median"]}" stroke="black" stroke-width="2"/>',
            f'<text x="{_fmt(centre)}" y="{frame.bottom + 20}" text-anchor="middle" font-size="12">{escape(name)}</text>',
        ])
    return _document(parts)


def bar_chart_svg(
    bars: Dict[str, float],
    title: str = "",
    y_label: str = ""
) -> str:
    """Bar chart of label -> value (values typically shares in [0, 1])"""
    heights = [v for v in bars.values() if np.isfinite(v)]
    frame = _Frame((0.0, float(max(len(bars), 1))), (0.0, max(heights + [1.0])))

    parts = _axes(frame, title, "", y_label, x_ticks=False)
    for index, (name, value) in enumerate(bars.items()):
        value = value if np.isfinite(value) else 0.0
        left = frame.x(index + 0.15)
        width = frame.x(index + 0.85) - left
        top = frame.y(value)
        parts.extend([
            f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(width)}" '
            f'height="{_fmt(frame.bottom - top)}" fill="{PALETTE[1]}"/>',
            f'<text x="{_fmt(left + width / 2)}" y="{frame.bottom + 20}" text-anchor="middle" '
            f'font-size="12">{escape(name)}</text>',
        ])
    return _document(parts)


def write_svg(path, svg: str) -> Path:
    path = Path(path)
    path.write_text(svg, encoding="utf-8")
    return path
