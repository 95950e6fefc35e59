"""Dependency-free SVG rendering of an entropy profile and its sampling plan."""

from __future__ import annotations

from typing import Optional
from xml.sax.saxutils import escape

from .glcm import EntropyProfile
from .sampler import SamplingPlan

WIDTH, HEIGHT = 960, 480
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 60, 40, 60


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_profile_svg(profile: EntropyProfile, plan: Optional[SamplingPlan] = None,
                       title: Optional[str] = None) -> str:
    """Raw and smoothed entropy, selected-slice markers and the plan CDF.

    Elements are tagged with classes ``raw``, ``smoothed``, ``marker`` and
    ``cdf``; axes are drawn as paths so ``<line>`` elements are markers only.
    """
    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    top, bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
    xs = [int(i) for i in profile.slice_indices]
    ys = list(profile.values)
    if profile.smoothed is not None:
        ys_all = ys + list(profile.smoothed)
    else:
        ys_all = ys
    x_lo, x_hi = xs[0], xs[-1]
    if plan is not None and plan.selected:
        x_lo, x_hi = min(x_lo, min(plan.selected)), max(x_hi, max(plan.selected))
    y_lo, y_hi = min(0.0, min(ys_all)), max(ys_all)
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0

    def px(x: float) -> float:
        if x_hi == x_lo:
            return (left + right) / 2
        return left + (x - x_lo) * (right - left) / (x_hi - x_lo)

    def py(y: float) -> float:
        return bottom - (y - y_lo) * (bottom - top) / (y_hi - y_lo)

    def points(pairs) -> str:
        return " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pairs)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
        f'<path class="axis" d="M{left},{top} L{left},{bottom} L{right},{bottom}" '
        'fill="none" stroke="#333333" stroke-width="1"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="16">{escape(title)}</text>')
    out.append(f'<text x="{(left + right) / 2:.0f}" y="{HEIGHT - 15}" text-anchor="middle" '
               'font-family="sans-serif" font-size="13">slice index</text>')
    out.append(f'<text x="18" y="{(top + bottom) / 2:.0f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 18 {(top + bottom) / 2:.0f})">entropy (nats)</text>')
    for x in (x_lo, x_hi):
        out.append(f'<text x="{_fmt(px(x))}" y="{bottom + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{x}</text>')
    for y in (y_lo, y_hi):
        out.append(f'<text x="{left - 6}" y="{_fmt(py(y) + 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{y:.3g}</text>')

    if plan is not None:
        for s in sorted(set(plan.selected)):
            out.append(f'<line class="marker" x1="{_fmt(px(s))}" y1="{top}" '
                       f'x2="{_fmt(px(s))}" y2="{bottom}" stroke="#d62728" '
                       'stroke-width="1" stroke-dasharray="4,3"/>')
    out.append(f'<polyline class="raw" points="{points(zip(xs, ys))}" fill="none" '
               'stroke="#1f77b4" stroke-width="1.5"/>')
    if profile.smoothed is not None:
        out.append(f'<polyline class="smoothed" points="{points(zip(xs, profile.smoothed))}" '
                   'fill="none" stroke="#2ca02c" stroke-width="2"/>')
    if plan is not None and len(plan.cdf):
        # the CDF spans the full plot height on its own [0, 1] scale
        cdf_pts = " ".join(
            f"{_fmt(px(xs[k]))},{_fmt(bottom - f * (bottom - top))}"
            for k, f in enumerate(plan.cdf[: len(xs)])
        )
        out.append(f'<polyline class="cdf" points="{cdf_pts}" fill="none" '
                   'stroke="#ff7f0e" stroke-width="1.5" stroke-dasharray="6,3"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
