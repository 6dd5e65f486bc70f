"""Minimal hand-written SVG line charts for the experiment outputs."""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

from signcone.errors import EmptyReport

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 60
COLORS = {"greedy": "#d62728", "random": "#1f77b4", "full": "#e377c2"}


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-12 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


class _Canvas:
    def __init__(self, x_range, y_range, title, xlabel, ylabel):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
            f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
            f'<text x="16" y="{HEIGHT / 2}" text-anchor="middle" '
            f'transform="rotate(-90 16 {HEIGHT / 2})">{escape(ylabel)}</text>',
        ]
        self._axes()

    def px(self, x: float) -> float:
        return LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)

    def py(self, y: float) -> float:
        return HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)

    def _axes(self):
        xb, yb = HEIGHT - BOTTOM, LEFT
        self.parts.append(f'<line x1="{LEFT}" y1="{xb}" x2="{WIDTH - RIGHT}" y2="{xb}" stroke="black"/>')
        self.parts.append(f'<line x1="{yb}" y1="{TOP}" x2="{yb}" y2="{xb}" stroke="black"/>')
        for t in _nice_ticks(self.x0, self.x1):
            x = self.px(t)
            self.parts.append(f'<line x1="{x:.2f}" y1="{xb}" x2="{x:.2f}" y2="{xb + 5}" stroke="black"/>')
            self.parts.append(f'<text x="{x:.2f}" y="{xb + 18}" text-anchor="middle">{t:g}</text>')
        for t in _nice_ticks(self.y0, self.y1):
            y = self.py(t)
            self.parts.append(f'<line x1="{yb - 5}" y1="{y:.2f}" x2="{yb}" y2="{y:.2f}" stroke="black"/>')
            self.parts.append(f'<text x="{yb - 8}" y="{y + 4:.2f}" text-anchor="end">{t:g}</text>')

    def polyline(self, xs, ys, color, dashed=False, cls=""):
        pts = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in zip(xs, ys) if math.isfinite(y))
        dash = ' stroke-dasharray="2,3"' if dashed else ""
        self.parts.append(
            f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{color}" stroke-width="2"{dash}/>'
        )

    def markers(self, xs, ys, color):
        for x, y in zip(xs, ys):
            if math.isfinite(y):
                self.parts.append(f'<circle cx="{self.px(x):.2f}" cy="{self.py(y):.2f}" r="3" fill="{color}"/>')

    def legend(self, entries):
        x, y = WIDTH - RIGHT - 150, TOP + 8
        for i, (label, color, dashed) in enumerate(entries):
            yy = y + 18 * i
            dash = ' stroke-dasharray="2,3"' if dashed else ""
            self.parts.append(
                f'<line x1="{x}" y1="{yy}" x2="{x + 24}" y2="{yy}" stroke="{color}" stroke-width="2"{dash}/>'
            )
            self.parts.append(f'<text x="{x + 30}" y="{yy + 4}">{escape(label)}</text>')

    def svg(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def rate_plot_svg(report) -> str:
    curves = {}
    floor = None
    for a in report.aggregates:
        if a.strategy == "full":
            floor = a.mean_delta_deg
        else:
            curves.setdefault(a.strategy, []).append((a.rate, a.mean_delta_deg))
    if not curves:
        raise EmptyReport("no strategy aggregates to plot")
    ys = [y for pts in curves.values() for _, y in pts if math.isfinite(y)]
    if floor is not None and math.isfinite(floor):
        ys.append(floor)
    xs = [x for pts in curves.values() for x, _ in pts]
    pad = 0.05 * (max(xs) - min(xs) or 1.0)
    c = _Canvas(
        (min(xs) - pad, max(xs) + pad),
        (0.0, max(ys) * 1.1 if ys else 1.0),
        "Mean angle error vs sampling rate",
        "sampling rate",
        "mean angle error (deg)",
    )
    legend = []
    for name in ("greedy", "random"):
        if name in curves:
            pts = sorted(curves[name])
            c.polyline([p[0] for p in pts], [p[1] for p in pts], COLORS[name], cls=name)
            c.markers([p[0] for p in pts], [p[1] for p in pts], COLORS[name])
            legend.append((name, COLORS[name], False))
    if floor is not None and math.isfinite(floor):
        c.polyline([c.x0, c.x1], [floor, floor], COLORS["full"], dashed=True, cls="full")
        legend.append(("full sampling", COLORS["full"], True))
    c.legend(legend)
    return c.svg()


def trace_plot_svg(traces, max_iters: int | None = None) -> str:
    traces = list(traces)
    if not traces:
        raise EmptyReport("no traces to plot")
    x_hi = max_iters or max(t.iterations[-1] for t in traces)
    ys = [a for t in traces for a in t.mean_angle_deg if math.isfinite(a)]
    c = _Canvas(
        (0.0, float(x_hi)),
        (0.0, max(ys) * 1.1 if ys else 1.0),
        f"Angle error during iteration at rate {traces[0].rate:g}",
        "iteration",
        "mean angle error (deg)",
    )
    legend = []
    for t in traces:
        color = COLORS.get(t.strategy, "black")
        c.polyline(t.iterations, t.mean_angle_deg, color, cls=t.strategy)
        legend.append((t.strategy, color, False))
    c.legend(legend)
    return c.svg()


def emit_svg_rate_plot(report, path) -> None:
    Path(path).write_text(rate_plot_svg(report))


def emit_svg_trace_plot(traces, path, max_iters: int | None = None) -> None:
    Path(path).write_text(trace_plot_svg(traces, max_iters))
