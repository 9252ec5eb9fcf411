"""Trace export: deterministic CSV and a static top-down SVG rendering."""

from __future__ import annotations

import math
from pathlib import Path as FilePath
from typing import Optional

import numpy as np

from .core import CorridorWorld
from .harness import SimTrace

GLYPH_INTERVAL = 0.5  # seconds between heading glyphs
SVG_SCALE = 100.0     # pixels per meter


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return ""
    return f"{v:.6g}"


def export_csv(trace: SimTrace, path: str | FilePath) -> None:
    """Write the trace as UTF-8 CSV: header plus one row per physics tick.

    Floats use 6 significant digits; output bytes depend only on the trace
    content, so identical (scenario, seed) runs produce identical files.
    """
    p = FilePath(path)
    lines = [",".join(trace.columns)]
    for row in trace.rows:
        lines.append(",".join(_fmt(v) for v in row))
    try:
        p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write trace CSV to {p}: {exc}") from exc


def _svg_point(x: float, y: float, bounds) -> tuple[float, float]:
    x0, y0, _, y1 = bounds
    return (x - x0) * SVG_SCALE, (y1 - y) * SVG_SCALE


def _world_bounds(world: CorridorWorld) -> tuple[float, float, float, float]:
    xs, ys = [], []
    for w in world.walls:
        xs += [w.x1, w.x2]
        ys += [w.y1, w.y2]
    pad = 0.3
    return min(xs) - pad, min(ys) - pad, max(xs) + pad, max(ys) + pad


def _glyph(x: float, y: float, heading: float, bounds, css: str, color: str) -> str:
    px, py = _svg_point(x, y, bounds)
    angle = -math.degrees(heading)  # SVG y axis points down
    return (
        f'<g class="{css}" transform="translate({px:.1f},{py:.1f}) '
        f'rotate({angle:.1f})">'
        f'<path d="M 14 0 L -6 7 L -6 -7 Z" fill="{color}" opacity="0.85"/></g>'
    )


def render_svg(trace: Optional[SimTrace], world: CorridorWorld,
               path: str | FilePath) -> None:
    """Static top-down rendering: walls, trajectories, heading glyphs every
    0.5 s, and a marker at the crossing (minimum clearance) tick."""
    bounds = _world_bounds(world)
    x0, y0, x1, y1 = bounds
    width = (x1 - x0) * SVG_SCALE
    height = (y1 - y0) * SVG_SCALE

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
    ]
    for w in world.walls:
        ax, ay = _svg_point(w.x1, w.y1, bounds)
        bx, by = _svg_point(w.x2, w.y2, bounds)
        parts.append(
            f'<line class="wall" x1="{ax:.1f}" y1="{ay:.1f}" x2="{bx:.1f}" '
            f'y2="{by:.1f}" stroke="black" stroke-width="4"/>')

    if trace is not None and trace.rows:
        rx = trace.column("robot_x")
        ry = trace.column("robot_y")
        heading = trace.column("robot_heading")
        times = trace.column("time")

        pts = " ".join("{:.1f},{:.1f}".format(*_svg_point(x, y, bounds))
                       for x, y in zip(rx, ry))
        parts.append(f'<polyline class="robot-path" points="{pts}" fill="none" '
                     f'stroke="#1f77b4" stroke-width="2"/>')

        for i in range(len(trace.ped_radii)):
            px = trace.column(f"ped{i}_x")
            py = trace.column(f"ped{i}_y")
            pp = " ".join("{:.1f},{:.1f}".format(*_svg_point(x, y, bounds))
                          for x, y in zip(px, py))
            parts.append(f'<polyline class="ped-path" points="{pp}" fill="none" '
                         f'stroke="#ff7f0e" stroke-width="2" stroke-dasharray="6 4"/>')

        interval_ticks = max(1, round(GLYPH_INTERVAL / trace.dt_physics))
        for tick in range(0, len(trace.rows), interval_ticks):
            parts.append(_glyph(rx[tick], ry[tick], heading[tick], bounds,
                                "heading-glyph", "#1f77b4"))

        if trace.ped_radii:
            clearance = trace.column("min_clearance")
            crossing = int(np.argmin(clearance))
            cx, cy = _svg_point(rx[crossing], ry[crossing], bounds)
            parts.append(f'<circle class="crossing-point" cx="{cx:.1f}" '
                         f'cy="{cy:.1f}" r="8" fill="none" stroke="#d62728" '
                         f'stroke-width="2"/>')
            parts.append(_glyph(rx[crossing], ry[crossing], heading[crossing],
                                bounds, "crossing-marker", "#d62728"))

    parts.append("</svg>")
    p = FilePath(path)
    try:
        p.write_text("\n".join(parts) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write SVG to {p}: {exc}") from exc
