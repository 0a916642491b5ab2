"""Deterministic JSON text and small static SVG line plots."""
from __future__ import annotations

import enum
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

SCHEMA = "1"


def _float_text(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return f"{x:.17g}"


def dumps(obj, indent: int = 2) -> str:
    """JSON with every float written to 17 significant digits.

    Exact rationals (Fraction, gmpy2 mpq) become "p/q" strings; numpy
    scalars and arrays become plain numbers and lists.
    """
    pad = " " * indent

    def enc(o, level):
        if o is None or isinstance(o, bool):
            return json.dumps(o)
        if isinstance(o, enum.Enum):
            return enc(o.value, level)
        if isinstance(o, (int, np.integer)) or type(o).__name__ == "mpz":
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return _float_text(float(o))
        if isinstance(o, (complex, np.complexfloating)):
            return enc({"re": o.real, "im": o.imag}, level)
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, Fraction) or type(o).__name__ == "mpq":
            return json.dumps(str(o))
        if isinstance(o, np.ndarray):
            return enc(o.tolist(), level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            inner = pad * (level + 1)
            items = [f"{inner}{json.dumps(str(k))}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad * level + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in o):
                return "[" + ", ".join(enc(v, level) for v in o) + "]"
            inner = pad * (level + 1)
            return "[\n" + ",\n".join(inner + enc(v, level + 1) for v in o) + "\n" + pad * level + "]"
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return enc(obj, 0) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def write_line_svg(path, xs, ys, title: str = "", xlabel: str = "", ylabel: str = "",
                   width: int = 640, height: int = 400) -> Path:
    """A single polyline with axes and min/max tick labels."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = np.isfinite(xs) & np.isfinite(ys)
    xs, ys = xs[keep], ys[keep]
    m = 60
    x0, x1 = (float(xs.min()), float(xs.max())) if len(xs) else (0.0, 1.0)
    y0, y1 = (float(ys.min()), float(ys.max())) if len(ys) else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def px(x):
        return m + (x - x0) / (x1 - x0) * (width - 2 * m)

    def py(y):
        return height - m - (y - y0) / (y1 - y0) * (height - 2 * m)

    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    svg = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>',
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>',
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{pts}"/>',
        f'<text x="{width / 2}" y="{m / 2}" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="15" y="{height / 2}" font-size="12" transform="rotate(-90 15 {height / 2})" '
        f'text-anchor="middle">{ylabel}</text>',
        f'<text x="{m}" y="{height - m + 15}" font-size="10" text-anchor="middle">{x0:.4g}</text>',
        f'<text x="{width - m}" y="{height - m + 15}" font-size="10" text-anchor="middle">{x1:.4g}</text>',
        f'<text x="{m - 5}" y="{height - m}" font-size="10" text-anchor="end">{y0:.4g}</text>',
        f'<text x="{m - 5}" y="{m + 4}" font-size="10" text-anchor="end">{y1:.4g}</text>',
        "</svg>",
    ]
    path = Path(path)
    path.write_text("\n".join(svg) + "\n")
    return path
