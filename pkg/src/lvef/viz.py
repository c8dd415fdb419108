"""Beat-to-beat visualizer: LV area curve with ED/ES markers and per-cycle EF, as plain SVG."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from ._io import atomic_write_text

WIDTH, HEIGHT = 800, 360
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 60, 50


def _f(v):
    return f"{v:.2f}"


def render_beat_to_beat_svg(areas, cycles, per_cycle_efs, ef_all, hfref_label, title=""):
    """Return the SVG document as a string; identical inputs give identical bytes.

    ED frames are drawn as red circles, ES frames as blue downward triangles.
    """
    a = np.asarray(getattr(areas, "areas", areas), dtype=np.float64)
    if a.size < 1:
        raise ValueError("area series is empty")
    n = a.size
    lo, hi = float(a.min()), float(a.max())
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.08 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(i):
        return MARGIN_L + (pw * i / (n - 1) if n > 1 else pw / 2)

    def sy(v):
        return MARGIN_T + ph * (hi - v) / (hi - lo)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    header = f"Average LVEF {ef_all:.2f}% | {hfref_label}"
    if title:
        header = f"{title}: {header}"
    out.append(f'<text id="header" x="{WIDTH / 2:.2f}" y="24" text-anchor="middle" font-size="16">'
               f"{escape(header)}</text>")
    # axes
    x0, y0 = MARGIN_L, MARGIN_T + ph
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + pw}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}" stroke="black"/>')
    for k in range(6):
        i = round(k * (n - 1) / 5) if n > 1 else 0
        out.append(f'<text x="{_f(sx(i))}" y="{y0 + 18}" text-anchor="middle" font-size="11">{i}</text>')
        v = lo + k * (hi - lo) / 5
        out.append(f'<text x="{x0 - 6}" y="{_f(sy(v) + 4)}" text-anchor="end" font-size="11">{v:.0f}</text>')
    out.append(f'<text x="{x0 + pw / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">Frame</text>')
    out.append(f'<text x="16" y="{MARGIN_T + ph / 2:.2f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {MARGIN_T + ph / 2:.2f})">LV area (pixels)</text>')
    pts = " ".join(f"{_f(sx(i))},{_f(sy(v))}" for i, v in enumerate(a))
    out.append(f'<polyline id="area-curve" fill="none" stroke="black" stroke-width="1.5" points="{pts}"/>')
    for k, (cyc, ef) in enumerate(zip(cycles, per_cycle_efs)):
        ed, es = cyc.ed_frame, cyc.es_frame
        ex, ey = sx(ed), sy(a[ed])
        tx, ty = sx(es), sy(a[es])
        out.append(f'<circle class="ed" data-frame="{ed}" cx="{_f(ex)}" cy="{_f(ey)}" r="5" fill="red"/>')
        out.append(f'<polygon class="es" data-frame="{es}" points="{_f(tx - 5)},{_f(ty - 4)} '
                   f'{_f(tx + 5)},{_f(ty - 4)} {_f(tx)},{_f(ty + 5)}" fill="blue"/>')
        out.append(f'<text class="cycle-ef" data-cycle="{k}" x="{_f((ex + tx) / 2)}" y="{MARGIN_T - 8}" '
                   f'text-anchor="middle" font-size="11">{ef:.2f}%</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_beat_to_beat_svg(series, cycles, per_cycle_efs, ef_all, hfref_label, out_path, title=""):
    atomic_write_text(out_path, render_beat_to_beat_svg(series, cycles, per_cycle_efs, ef_all, hfref_label, title))
