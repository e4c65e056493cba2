"""Artifact emission: CSV with a fixed numeric format, JSON summaries, and a
small self-contained SVG polyline plotter (no rendering dependency)."""

import json
import os

import numpy as np


def fmt(x):
    """17 significant digits, '.' decimal; bit-stable across platforms."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    return f"{x:.16e}"


def write_csv(path, header, rows):
    """CSV with LF endings; numeric cells through fmt()."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for c in row:
                if isinstance(c, complex) or isinstance(c, np.complexfloating):
                    raise ValueError("split complex columns into re/im before writing")
                cells.append(fmt(c))
            fh.write(",".join(cells) + "\n")


def write_json(path, obj):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_coerce)
        fh.write("\n")


def _coerce(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    raise TypeError(f"not JSON-serializable: {type(x)}")


def write_snapshot(path, state):
    """Self-describing text header + CSV body (t, k, eta-index, Re, Im)."""
    grid = state.grid
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("# spectral snapshot\n")
        fh.write(f"# time = {fmt(state.time)}\n")
        fh.write(f"# nu = {fmt(state.nu)}\n")
        fh.write(f"# Kmax = {grid.Kmax}, Neta = {grid.Neta}, eta_max = {fmt(grid.eta_max)}\n")
        fh.write("t,k,eta_index,re,im\n")
        for i, k in enumerate(grid.modes):
            for j in range(grid.n_eta):
                v = state.values[i, j]
                fh.write(
                    ",".join([fmt(state.time), str(int(k)), str(j), fmt(v.real), fmt(v.imag)])
                    + "\n"
                )


# ---------------------------------------------------------------------------
# SVG

_COLORS = ["#1f6fb4", "#d1495b", "#3a8f5d", "#8060b0", "#c97b2d", "#4f4f4f"]


def _ticks(lo, hi, n=5):
    if lo == hi:
        hi = lo + 1.0
    span = hi - lo
    step = 10.0 ** np.floor(np.log10(span / n))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= n + 1:
            step *= mult
            break
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + step / 2, step)


def svg_plot(path, curves, xlabel="", ylabel="", title="", xlog=False, ylog=False,
             width=720, height=480):
    """Polyline plot of [(x, y, label), ...]; log axes drop nonpositive points."""
    ml, mr, mt, mb = 70, 20, 30, 50
    pw, ph = width - ml - mr, height - mt - mb

    tx = (lambda x: np.log10(x)) if xlog else (lambda x: np.asarray(x, dtype=float))
    ty = (lambda y: np.log10(y)) if ylog else (lambda y: np.asarray(y, dtype=float))
    pts = []
    for x, y, label in curves:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if xlog:
            keep &= x > 0
        if ylog:
            keep &= y > 0
        pts.append((tx(x[keep]), ty(y[keep]), label))
    xs = np.concatenate([p[0] for p in pts if len(p[0])] or [np.array([0.0, 1.0])])
    ys = np.concatenate([p[1] for p in pts if len(p[1])] or [np.array([0.0, 1.0])])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x0 == x1:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y0 == y1:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for tick in _ticks(x0, x1):
        x = px(tick)
        lab = f"1e{tick:g}" if xlog else f"{tick:g}"
        parts.append(f'<line x1="{x:.1f}" y1="{mt + ph}" x2="{x:.1f}" y2="{mt + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.1f}" y="{mt + ph + 18}" text-anchor="middle">{lab}</text>')
    for tick in _ticks(y0, y1):
        y = py(tick)
        lab = f"1e{tick:g}" if ylog else f"{tick:g}"
        parts.append(f'<line x1="{ml - 5}" y1="{y:.1f}" x2="{ml}" y2="{y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 8}" y="{y + 4:.1f}" text-anchor="end">{lab}</text>')
    parts.append(
        f'<text x="{ml + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{ylabel}</text>'
    )
    for i, (x, y, label) in enumerate(pts):
        color = _COLORS[i % len(_COLORS)]
        if len(x):
            coords = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if label:
            yleg = mt + 16 + 16 * i
            parts.append(f'<line x1="{ml + pw - 150}" y1="{yleg}" x2="{ml + pw - 125}" y2="{yleg}" stroke="{color}" stroke-width="1.5"/>')
            parts.append(f'<text x="{ml + pw - 118}" y="{yleg + 4}">{label}</text>')
    parts.append("</svg>")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
