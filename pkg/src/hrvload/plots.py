"""Static SVG renderings of ROC curves, confusion matrices and CV accuracy box plots.

Output is plain text with fixed number formatting so identical inputs give
byte-identical files.
"""

from __future__ import annotations

from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
           "#7f7f7f", "#bcbd22", "#17becf")

W, H = 480, 420
LEFT, RIGHT, TOP, BOTTOM = 60, 170, 40, 50


def _f(x: float) -> str:
    return f"{x:.2f}"


def _header(title: str, width=W, height=H) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
    ]


def _axes(x0, y0, pw, ph, xlabel, ylabel, yticks, ymin=0.0, ymax=1.0, xticks=None) -> list[str]:
    out = [f'<rect x="{x0}" y="{y0}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in yticks:
        y = y0 + ph - (t - ymin) / (ymax - ymin) * ph
        out.append(f'<line x1="{x0 - 4}" y1="{_f(y)}" x2="{x0}" y2="{_f(y)}" stroke="black"/>')
        out.append(f'<text x="{x0 - 6}" y="{_f(y + 4)}" text-anchor="end">{t:g}</text>')
    for t in xticks or ():
        x = x0 + t * pw
        out.append(f'<line x1="{_f(x)}" y1="{y0 + ph}" x2="{_f(x)}" y2="{y0 + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{_f(x)}" y="{y0 + ph + 16}" text-anchor="middle">{t:g}</text>')
    out.append(f'<text x="{x0 + pw / 2:.1f}" y="{y0 + ph + 34}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{y0 + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {y0 + ph / 2:.1f})">{escape(ylabel)}</text>')
    return out


def roc_svg(curves: Mapping[str, tuple[Sequence[float], Sequence[float]]], title: str) -> str:
    """``curves`` maps a legend label (e.g. ``"RF macro (AUC 0.88)"``) to (fpr, tpr)."""
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM
    ticks = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
    out = _header(title) + _axes(LEFT, TOP, pw, ph, "False positive rate", "True positive rate",
                                 ticks, xticks=ticks)
    out.append(f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP}" stroke="#999" '
               'stroke-dasharray="4 3"/>')
    for i, (label, (fpr, tpr)) in enumerate(curves.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_f(LEFT + x * pw)},{_f(TOP + ph - y * ph)}" for x, y in zip(fpr, tpr))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = TOP + 10 + 16 * i
        out.append(f'<line x1="{LEFT + pw + 10}" y1="{ly}" x2="{LEFT + pw + 28}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{LEFT + pw + 32}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def confusion_svg(cm, labels: Sequence[str], title: str) -> str:
    cm = np.asarray(cm)
    k = cm.shape[0]
    cell = 80
    x0, y0 = 100, 50
    width, height = x0 + k * cell + 30, y0 + k * cell + 60
    out = _header(title, width, height)
    peak = max(int(cm.max()), 1)
    for i in range(k):
        for j in range(k):
            v = int(cm[i, j])
            shade = int(round(255 - 200 * v / peak))
            fg = "white" if v / peak > 0.6 else "black"
            x, y = x0 + j * cell, y0 + i * cell
            out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                       f'fill="rgb({shade},{shade},255)" stroke="black"/>')
            out.append(f'<text x="{x + cell / 2:.1f}" y="{y + cell / 2 + 5:.1f}" text-anchor="middle" '
                       f'font-size="16" fill="{fg}">{v}</text>')
        out.append(f'<text x="{x0 - 8}" y="{y0 + i * cell + cell / 2 + 4:.1f}" text-anchor="end">'
                   f'{escape(labels[i])}</text>')
        out.append(f'<text x="{x0 + i * cell + cell / 2:.1f}" y="{y0 + k * cell + 18}" '
                   f'text-anchor="middle">{escape(labels[i])}</text>')
    out.append(f'<text x="{x0 + k * cell / 2:.1f}" y="{y0 + k * cell + 40}" text-anchor="middle">'
               'Predicted</text>')
    out.append(f'<text x="16" y="{y0 + k * cell / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {y0 + k * cell / 2:.1f})">True</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def boxplot_svg(groups: Mapping[str, Sequence[float]], title: str) -> str:
    """Box plot of fold accuracies per method (whiskers at min/max)."""
    names = list(groups)
    width = max(W, LEFT + 60 * len(names) + 30)
    pw, ph = width - LEFT - 30, H - TOP - BOTTOM
    out = _header(title, width) + _axes(LEFT, TOP, pw, ph, "Method", "Accuracy",
                                        (0.0, 0.2, 0.4, 0.6, 0.8, 1.0))

    def yy(v):
        return TOP + ph - v * ph

    step = pw / max(len(names), 1)
    for i, name in enumerate(names):
        vals = np.asarray(groups[name], dtype=np.float64)
        cx = LEFT + step * (i + 0.5)
        if vals.size:
            q1, med, q3 = np.percentile(vals, [25, 50, 75])
            lo, hi = vals.min(), vals.max()
            out.append(f'<line x1="{_f(cx)}" y1="{_f(yy(lo))}" x2="{_f(cx)}" y2="{_f(yy(hi))}" stroke="black"/>')
            out.append(f'<rect x="{_f(cx - 14)}" y="{_f(yy(q3))}" width="28" height="{_f(yy(q1) - yy(q3))}" '
                       f'fill="{PALETTE[i % len(PALETTE)]}" fill-opacity="0.6" stroke="black"/>')
            out.append(f'<line x1="{_f(cx - 14)}" y1="{_f(yy(med))}" x2="{_f(cx + 14)}" y2="{_f(yy(med))}" '
                       'stroke="black" stroke-width="2"/>')
        out.append(f'<text x="{_f(cx)}" y="{TOP + ph + 16}" text-anchor="middle">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
