"""Static SVG figures for 2-D set overlays.

Hand-rolled markup with fixed coordinate formatting: identical inputs
produce byte-identical files, which matplotlib cannot promise.
"""

from __future__ import annotations

import numpy as np

__all__ = ["PALETTE", "render_overlay"]

# figure color order follows the reference plots: smaller N first
PALETTE = ("red", "green", "blue", "black", "darkorange", "purple", "teal", "magenta")

_W, _H = 640.0, 480.0
_MARGIN = 48.0


def _fmt(x: float) -> str:
    return format(x, ".3f")


def render_overlay(groups, title: str = "", xlabel: str = "x1", ylabel: str = "x2") -> str:
    """SVG overlay of polygon groups.

    `groups` is a sequence of (label, color, polygons) with each polygon an
    (k, 2) float array.  All polygons share one data-space bounding box.
    """
    groups = [(str(lbl), str(col), [np.asarray(p, dtype=float) for p in polys])
              for lbl, col, polys in groups]
    pts = [p for _, _, polys in groups for p in polys if p.size]
    if not pts:
        raise ValueError("nothing to plot: no polygons given")
    allp = np.vstack(pts)
    lo = allp.min(axis=0)
    hi = allp.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    pad = 0.05 * span
    lo, hi = lo - pad, hi + pad
    span = hi - lo

    sx = (_W - 2 * _MARGIN) / span[0]
    sy = (_H - 2 * _MARGIN) / span[1]

    def to_px(p):
        x = _MARGIN + (p[:, 0] - lo[0]) * sx
        y = _H - _MARGIN - (p[:, 1] - lo[1]) * sy
        return x, y

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(_W)}" height="{int(_H)}" '
        f'viewBox="0 0 {int(_W)} {int(_H)}">'
    )
    out.append(f'<rect width="{int(_W)}" height="{int(_H)}" fill="white"/>')
    out.append(
        f'<rect x="{_fmt(_MARGIN)}" y="{_fmt(_MARGIN)}" width="{_fmt(_W - 2 * _MARGIN)}" '
        f'height="{_fmt(_H - 2 * _MARGIN)}" fill="none" stroke="#888" stroke-width="1"/>'
    )
    if title:
        out.append(
            f'<text x="{_fmt(_W / 2)}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{title}</text>'
        )
    out.append(
        f'<text x="{_fmt(_W / 2)}" y="{_fmt(_H - 12)}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>'
    )
    out.append(
        f'<text x="14" y="{_fmt(_H / 2)}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 14 {_fmt(_H / 2)})">{ylabel}</text>'
    )

    for label, color, polys in groups:
        for poly in polys:
            if not poly.size:
                continue
            x, y = to_px(poly)
            d = "M" + " L".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(x, y)) + " Z"
            out.append(
                f'<path d="{d}" fill="{color}" fill-opacity="0.10" '
                f'stroke="{color}" stroke-width="1.5"/>'
            )

    # legend, top right inside the frame
    lx = _W - _MARGIN - 120.0
    ly = _MARGIN + 16.0
    for idx, (label, color, _polys) in enumerate(groups):
        yy = ly + 18.0 * idx
        out.append(
            f'<line x1="{_fmt(lx)}" y1="{_fmt(yy - 4)}" x2="{_fmt(lx + 26)}" '
            f'y2="{_fmt(yy - 4)}" stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{_fmt(lx + 32)}" y="{_fmt(yy)}" font-family="sans-serif" '
            f'font-size="12">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
