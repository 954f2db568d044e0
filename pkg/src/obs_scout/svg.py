"""Minimal SVG writers for the eigenvector bar chart and EKF trace plots."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


def _doc(width: int, height: int, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">'
    )
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>\n"])


def eigenvector_bars(vectors: np.ndarray, eigenvalues: np.ndarray, labels) -> str:
    """One panel per eigenvector, bars of component magnitudes (unit 2-norm vectors)."""
    n = vectors.shape[1]
    pw, ph, pad = 150, 160, 30
    body = []
    for j in range(n):
        x0 = pad + j * (pw + pad)
        y0 = pad + 20
        body.append(f'<text x="{x0}" y="{pad}">lambda = {eigenvalues[j]:.4g}</text>')
        body.append(f'<line x1="{x0}" y1="{y0 + ph}" x2="{x0 + pw}" y2="{y0 + ph}" stroke="black"/>')
        bw = pw / len(labels)
        for i, lab in enumerate(labels):
            mag = abs(float(vectors[i, j]))
            h = mag * ph
            bx = x0 + i * bw + 2
            body.append(
                f'<rect x="{bx:.2f}" y="{y0 + ph - h:.2f}" width="{bw - 4:.2f}" height="{h:.2f}" '
                f'fill="{_COLORS[j % len(_COLORS)]}"/>'
            )
            body.append(f'<text x="{bx:.2f}" y="{y0 + ph + 14}">{escape(lab)}</text>')
    return _doc(pad + n * (pw + pad), ph + 2 * pad + 40, body)


def trace_panels(times: np.ndarray, series: dict, labels, markers=None) -> str:
    """Stacked panels, one per state: solid error and dashed 1-sigma traces.

    ``series`` maps a name to (errors, sigmas), each of shape (n, n_states).
    ``markers`` is an optional list of (t_start, t_end, text) segment annotations.
    """
    pw, ph, pad = 640, 90, 40
    body = []
    t0, t1 = float(times[0]), float(times[-1])
    span = (t1 - t0) or 1.0
    for i, lab in enumerate(labels):
        y0 = pad + i * (ph + pad)
        vals = np.concatenate([np.abs(np.asarray(e)[:, i]) for e, _ in series.values()]
                              + [np.asarray(s)[:, i] for _, s in series.values()])
        top = float(np.max(vals)) or 1.0
        body.append(f'<text x="5" y="{y0 + ph / 2}">{escape(lab)}</text>')
        body.append(f'<rect x="{pad + 20}" y="{y0}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>')
        for k, (name, (err, sig)) in enumerate(series.items()):
            color = _COLORS[k % len(_COLORS)]
            for arr, dash in ((np.abs(np.asarray(err)[:, i]), ""), (np.asarray(sig)[:, i], ' stroke-dasharray="4,3"')):
                xs = pad + 20 + (times - t0) / span * pw
                ys = y0 + ph - arr / top * ph
                pts = " ".join(f"{x:.1f},{y:.1f}" for x, y in zip(xs, ys))
                body.append(f'<polyline points="{pts}" fill="none" stroke="{color}"{dash}/>')
        if markers:
            for a, b, text in markers:
                xm = pad + 20 + ((a + b) / 2 - t0) / span * pw
                body.append(f'<text x="{xm:.1f}" y="{y0 - 4}" text-anchor="middle">{escape(text)}</text>')
    legend_y = pad + len(labels) * (ph + pad)
    for k, name in enumerate(series):
        body.append(
            f'<text x="{pad + 20 + 120 * k}" y="{legend_y}" fill="{_COLORS[k % len(_COLORS)]}">{escape(name)}</text>'
        )
    return _doc(pw + 2 * pad + 20, legend_y + 20, body)
