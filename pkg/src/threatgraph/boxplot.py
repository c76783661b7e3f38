"""Minimal standalone SVG box plots (no external assets).

Quartiles use linear interpolation (numpy's default percentile rule);
whiskers extend to the furthest observation within 1.5 IQR of the box, and
anything beyond is drawn as an outlier point.
"""

from __future__ import annotations

import numpy as np

PLOT_WIDTH = 640
PLOT_HEIGHT = 420
MARGIN_LEFT = 60
MARGIN_RIGHT = 20
MARGIN_TOP = 40
MARGIN_BOTTOM = 110
BOX_FILL = "#9ecae1"
LINE_COLOR = "#333333"


def box_stats(values):
    """(q1, median, q3, whisker_low, whisker_high, outliers)."""
    values = np.asarray(values, dtype=np.float64)
    q1, med, q3 = np.percentile(values, [25, 50, 75])
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = values[(values >= lo_fence) & (values <= hi_fence)]
    outliers = values[(values < lo_fence) | (values > hi_fence)]
    return (
        float(q1),
        float(med),
        float(q3),
        float(inside.min()),
        float(inside.max()),
        sorted(float(v) for v in outliers),
    )


def boxplot_svg(groups, title: str) -> str:
    """Render labeled groups [(label, values), ...] as one SVG document."""
    if not groups:
        raise ValueError("no groups to plot")
    all_values = np.concatenate([np.asarray(v, dtype=np.float64) for _, v in groups])
    vmin, vmax = float(all_values.min()), float(all_values.max())
    if vmax == vmin:
        vmax = vmin + 1.0
    span = vmax - vmin
    vmin -= 0.05 * span
    vmax += 0.05 * span

    inner_w = PLOT_WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    inner_h = PLOT_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    slot = inner_w / len(groups)
    box_w = min(60.0, slot * 0.5)

    def y_of(v):
        return MARGIN_TOP + inner_h * (1.0 - (v - vmin) / (vmax - vmin))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{PLOT_WIDTH}" '
        f'height="{PLOT_HEIGHT}" viewBox="0 0 {PLOT_WIDTH} {PLOT_HEIGHT}">',
        f'<rect width="{PLOT_WIDTH}" height="{PLOT_HEIGHT}" fill="white"/>',
        f'<text x="{PLOT_WIDTH / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]

    # y axis with 5 ticks
    axis_x = MARGIN_LEFT
    parts.append(
        f'<line x1="{axis_x}" y1="{MARGIN_TOP}" x2="{axis_x}" '
        f'y2="{MARGIN_TOP + inner_h}" stroke="{LINE_COLOR}"/>'
    )
    for i in range(6):
        v = vmin + (vmax - vmin) * i / 5
        y = y_of(v)
        parts.append(
            f'<line x1="{axis_x - 4}" y1="{y:.1f}" x2="{axis_x}" y2="{y:.1f}" '
            f'stroke="{LINE_COLOR}"/>'
        )
        parts.append(
            f'<text x="{axis_x - 8}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{v:.3f}</text>'
        )

    for idx, (label, values) in enumerate(groups):
        q1, med, q3, wlo, whi, outliers = box_stats(values)
        cx = MARGIN_LEFT + slot * (idx + 0.5)
        x0 = cx - box_w / 2
        x1 = cx + box_w / 2
        y_q1, y_med, y_q3 = y_of(q1), y_of(med), y_of(q3)
        y_wlo, y_whi = y_of(wlo), y_of(whi)

        parts.append(
            f'<line x1="{cx:.1f}" y1="{y_whi:.1f}" x2="{cx:.1f}" y2="{y_q3:.1f}" '
            f'stroke="{LINE_COLOR}"/>'
        )
        parts.append(
            f'<line x1="{cx:.1f}" y1="{y_q1:.1f}" x2="{cx:.1f}" y2="{y_wlo:.1f}" '
            f'stroke="{LINE_COLOR}"/>'
        )
        for y_w in (y_whi, y_wlo):
            parts.append(
                f'<line x1="{x0 + box_w * 0.2:.1f}" y1="{y_w:.1f}" '
                f'x2="{x1 - box_w * 0.2:.1f}" y2="{y_w:.1f}" stroke="{LINE_COLOR}"/>'
            )
        parts.append(
            f'<rect x="{x0:.1f}" y="{y_q3:.1f}" width="{box_w:.1f}" '
            f'height="{y_q1 - y_q3:.1f}" fill="{BOX_FILL}" stroke="{LINE_COLOR}"/>'
        )
        parts.append(
            f'<line x1="{x0:.1f}" y1="{y_med:.1f}" x2="{x1:.1f}" y2="{y_med:.1f}" '
            f'stroke="{LINE_COLOR}" stroke-width="2"/>'
        )
        for v in outliers:
            parts.append(
                f'<circle cx="{cx:.1f}" cy="{y_of(v):.1f}" r="2.5" '
                f'fill="none" stroke="{LINE_COLOR}"/>'
            )
        parts.append(
            f'<text x="{cx:.1f}" y="{MARGIN_TOP + inner_h + 14}" '
            f'font-family="sans-serif" font-size="10" text-anchor="end" '
            f'transform="rotate(-45 {cx:.1f} {MARGIN_TOP + inner_h + 14})">'
            f"{label}</text>"
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
