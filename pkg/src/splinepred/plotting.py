"""Deterministic SVG rendering of benchmark result tables.

The file is assembled from fixed-format strings only (no timestamps, no
library state), so regenerating a plot from the same records is
byte-identical.  Each method contributes one polyline through its
seed-averaged RMS, with thin whiskers marking the seed min/max.
"""

import numpy as np

METHOD_COLORS = {
    "svr_noisy": "#d62728",
    "krr_noisy": "#1f77b4",
    "spline_krr": "#2ca02c",
}
_FALLBACK_COLORS = ("#9467bd", "#8c564b", "#e377c2", "#7f7f7f")

_WIDTH, _HEIGHT = 720.0, 480.0
_ML, _MR, _MT, _MB = 80.0, 30.0, 30.0, 60.0

_AXIS_LABELS = {"snr": "noise-to-signal variance ratio", "tf": "lookahead"}


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _aggregate(records, x_axis):
    """method -> sorted list of (x, mean_rms, min_rms, max_rms)."""
    scored = [r for r in records if not r.failed]
    if not scored:
        raise ValueError("empty selection: no scored records to plot")
    systems = {(r.system, r.h) for r in scored}
    if len(systems) > 1:
        raise ValueError(f"records mix several (system, h) pairs: {sorted(systems)}")
    other = "tf" if x_axis == "snr" else "snr"
    other_vals = {getattr(r, other) for r in scored}
    if len(other_vals) > 1:
        raise ValueError(
            f"records span several {other} values {sorted(other_vals)}; "
            f"filter to one before plotting against {x_axis}")

    series = {}
    for r in scored:
        series.setdefault(r.method, {}).setdefault(getattr(r, x_axis), []).append(r.rms)
    out = {}
    for method, by_x in series.items():
        pts = [(x, float(np.mean(v)), float(np.min(v)), float(np.max(v)))
               for x, v in sorted(by_x.items())]
        out[method] = pts
    return out


def _color_of(method, ordered_methods):
    if method in METHOD_COLORS:
        return METHOD_COLORS[method]
    extras = [m for m in ordered_methods if m not in METHOD_COLORS]
    return _FALLBACK_COLORS[extras.index(method) % len(_FALLBACK_COLORS)]


def render_svg(records, x_axis: str) -> str:
    """Render seed-averaged RMS vs snr or tf; returns the SVG text."""
    if x_axis not in ("snr", "tf"):
        raise ValueError(f"x_axis must be 'snr' or 'tf', got {x_axis!r}")
    series = _aggregate(records, x_axis)
    methods = sorted(series)

    xs = sorted({x for pts in series.values() for x, *_ in pts})
    y_top = 1.08 * max(hi for pts in series.values() for *_, hi in pts)
    if y_top <= 0:
        y_top = 1.0
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5

    def sx(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * (_WIDTH - _ML - _MR)

    def sy(y):
        return _HEIGHT - _MB - y / y_top * (_HEIGHT - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(_WIDTH)}" '
        f'height="{_fmt(_HEIGHT)}" viewBox="0 0 {_fmt(_WIDTH)} {_fmt(_HEIGHT)}">',
        f'<rect width="{_fmt(_WIDTH)}" height="{_fmt(_HEIGHT)}" fill="white"/>',
        f'<line x1="{_fmt(_ML)}" y1="{_fmt(_HEIGHT - _MB)}" x2="{_fmt(_WIDTH - _MR)}" '
        f'y2="{_fmt(_HEIGHT - _MB)}" stroke="black" stroke-width="1"/>',
        f'<line x1="{_fmt(_ML)}" y1="{_fmt(_MT)}" x2="{_fmt(_ML)}" '
        f'y2="{_fmt(_HEIGHT - _MB)}" stroke="black" stroke-width="1"/>',
    ]

    for x in xs:
        px = sx(x)
        parts.append(f'<line x1="{_fmt(px)}" y1="{_fmt(_HEIGHT - _MB)}" '
                     f'x2="{_fmt(px)}" y2="{_fmt(_HEIGHT - _MB + 5)}" '
                     f'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{_fmt(_HEIGHT - _MB + 20)}" '
                     f'font-family="sans-serif" font-size="12" '
                     f'text-anchor="middle">{_fmt(x)}</text>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = frac * y_top
        py = sy(y)
        parts.append(f'<line x1="{_fmt(_ML - 5)}" y1="{_fmt(py)}" x2="{_fmt(_ML)}" '
                     f'y2="{_fmt(py)}" stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(_ML - 9)}" y="{_fmt(py + 4)}" '
                     f'font-family="sans-serif" font-size="12" '
                     f'text-anchor="end">{_fmt(y)}</text>')

    parts.append(f'<text x="{_fmt((_ML + _WIDTH - _MR) / 2)}" y="{_fmt(_HEIGHT - 15)}" '
                 f'font-family="sans-serif" font-size="14" text-anchor="middle">'
                 f'{_AXIS_LABELS[x_axis]}</text>')
    parts.append(f'<text x="20" y="{_fmt((_MT + _HEIGHT - _MB) / 2)}" '
                 f'font-family="sans-serif" font-size="14" text-anchor="middle" '
                 f'transform="rotate(-90 20 {_fmt((_MT + _HEIGHT - _MB) / 2)})">'
                 f'RMS prediction error</text>')

    for mi, method in enumerate(methods):
        color = _color_of(method, methods)
        pts = series[method]
        for x, _, lo, hi in pts:
            if hi > lo:
                parts.append(f'<line x1="{_fmt(sx(x))}" y1="{_fmt(sy(lo))}" '
                             f'x2="{_fmt(sx(x))}" y2="{_fmt(sy(hi))}" '
                             f'stroke="{color}" stroke-width="1" opacity="0.5"/>')
        coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(m))}" for x, m, *_ in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                     f'stroke-width="2"/>')
        for x, m, *_ in pts:
            parts.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(m))}" r="3" '
                         f'fill="{color}"/>')
        ly = _MT + 16 + 18 * mi
        lx = _WIDTH - _MR - 150
        parts.append(f'<rect x="{_fmt(lx)}" y="{_fmt(ly - 9)}" width="18" height="4" '
                     f'fill="{color}"/>')
        parts.append(f'<text x="{_fmt(lx + 24)}" y="{_fmt(ly)}" '
                     f'font-family="sans-serif" font-size="13">{method}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plot(records, x_axis: str, output) -> None:
    """Write the rendered SVG; byte-identical for identical records."""
    svg = render_svg(records, x_axis)
    with open(output, "w", newline="\n") as fh:
        fh.write(svg)
