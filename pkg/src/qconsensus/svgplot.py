"""Minimal native SVG line charts with jammed-interval shading."""

from __future__ import annotations

import math

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#17becf", "#e377c2"]

W, H = 860, 320
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 28, 36


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo]
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / count))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= count:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 12))
        t += step
    return ticks


def line_chart(
    path: str,
    title: str,
    xs,
    series: dict[str, list[float]],
    spans: list[tuple[float, float]] | None = None,
    y_label: str = "",
    log_y: bool = False,
) -> None:
    """Write a polyline chart; ``spans`` are shaded as gray x-intervals."""
    xs = list(map(float, xs))
    data = {}
    for label, ys in series.items():
        vals = [float(v) for v in ys]
        if log_y:
            vals = [math.log10(v) if v > 0 else float("nan") for v in vals]
        data[label] = vals
    all_y = [v for ys in data.values() for v in ys if math.isfinite(v)]
    if not all_y:
        all_y = [0.0]
    y_lo, y_hi = min(all_y), max(all_y)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_lo, x_hi = (xs[0], xs[-1]) if xs and xs[-1] > xs[0] else (0.0, 1.0)

    def px(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (W - MARGIN_L - MARGIN_R)

    def py(y):
        return H - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (H - MARGIN_T - MARGIN_B)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W/2:.0f}" y="16" text-anchor="middle" font-size="13">{title}</text>',
    ]
    for t0, t1 in spans or []:
        x0, x1 = px(max(t0, x_lo)), px(min(t1, x_hi))
        if x1 > x0:
            parts.append(
                f'<rect x="{x0:.1f}" y="{MARGIN_T}" width="{x1 - x0:.1f}" '
                f'height="{H - MARGIN_T - MARGIN_B}" fill="#cccccc" opacity="0.5"/>'
            )
    for t in _ticks(x_lo, x_hi):
        parts.append(
            f'<line x1="{px(t):.1f}" y1="{H - MARGIN_B}" x2="{px(t):.1f}" '
            f'y2="{MARGIN_T}" stroke="#eeeeee"/>'
            f'<text x="{px(t):.1f}" y="{H - MARGIN_B + 14}" text-anchor="middle">{t:g}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        parts.append(
            f'<line x1="{MARGIN_L}" y1="{py(t):.1f}" x2="{W - MARGIN_R}" '
            f'y2="{py(t):.1f}" stroke="#eeeeee"/>'
            f'<text x="{MARGIN_L - 6}" y="{py(t) + 4:.1f}" text-anchor="end">{t:g}</text>'
        )
    parts.append(
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{W - MARGIN_L - MARGIN_R}" '
        f'height="{H - MARGIN_T - MARGIN_B}" fill="none" stroke="#333333"/>'
    )
    ylab = y_label + (" (log10)" if log_y else "")
    if ylab:
        parts.append(
            f'<text x="14" y="{H/2:.0f}" text-anchor="middle" '
            f'transform="rotate(-90 14 {H/2:.0f})">{ylab}</text>'
        )
    for idx, (label, ys) in enumerate(data.items()):
        color = PALETTE[idx % len(PALETTE)]
        pts = " ".join(
            f"{px(x):.2f},{py(y):.2f}"
            for x, y in zip(xs, ys)
            if math.isfinite(y)
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>'
        )
        parts.append(
            f'<text x="{W - MARGIN_R - 6}" y="{MARGIN_T + 14 + 13 * idx}" '
            f'text-anchor="end" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
