"""Tiny SVG line-chart writer for the experiment figures.

Figures are for eyeballing only; the CSV tables remain the contract.
No plotting dependency: axes, tick labels, polylines, point markers
and a legend are emitted as hand-built SVG elements.
"""

from xml.sax.saxutils import escape

_PALETTE = ("#1f6fb2", "#d1495b", "#3a9d5d", "#e0a421", "#7851a9",
            "#5f6a72", "#17a2b8", "#a0522d")


def _fmt(v):
    if v == int(v) and abs(v) < 1e6:
        return str(int(v))
    return f"{v:.3g}"


def line_chart(series, path, title="", x_label="", y_label="",
               width=720, height=460):
    """Write one chart; ``series`` is a list of (label, xs, ys) tuples."""
    pad_l, pad_r, pad_t, pad_b = 70, 160, 44, 52
    plot_w = width - pad_l - pad_r
    plot_h = height - pad_t - pad_b
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    if not xs_all:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    y_pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def sx(x):
        return pad_l + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        return pad_t + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
        f'font-size="15">{escape(title)}</text>',
        f'<rect x="{pad_l}" y="{pad_t}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#808080"/>',
    ]
    for k in range(5):
        tx = x_lo + (x_hi - x_lo) * k / 4
        ty = y_lo + (y_hi - y_lo) * k / 4
        out.append(f'<line x1="{sx(tx):.1f}" y1="{pad_t + plot_h}" '
                   f'x2="{sx(tx):.1f}" y2="{pad_t + plot_h + 5}" '
                   f'stroke="#808080"/>')
        out.append(f'<text x="{sx(tx):.1f}" y="{pad_t + plot_h + 18}" '
                   f'text-anchor="middle">{_fmt(tx)}</text>')
        out.append(f'<line x1="{pad_l - 5}" y1="{sy(ty):.1f}" '
                   f'x2="{pad_l}" y2="{sy(ty):.1f}" stroke="#808080"/>')
        out.append(f'<text x="{pad_l - 8}" y="{sy(ty) + 4:.1f}" '
                   f'text-anchor="end">{_fmt(ty)}</text>')
    out.append(f'<text x="{pad_l + plot_w / 2:.1f}" y="{height - 12}" '
               f'text-anchor="middle">{escape(x_label)}</text>')
    out.append(f'<text x="16" y="{pad_t + plot_h / 2:.1f}" '
               f'text-anchor="middle" transform="rotate(-90 16 '
               f'{pad_t + plot_h / 2:.1f})">{escape(y_label)}</text>')

    for idx, (label, xs, ys) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" '
                   f'stroke="{color}" stroke-width="1.8"/>')
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="2.6" '
                       f'fill="{color}"/>')
        ly = pad_t + 14 + idx * 18
        lx = pad_l + plot_w + 12
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="1.8"/>')
        out.append(f'<text x="{lx + 28}" y="{ly}">{escape(str(label))}'
                   f'</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
    return path
