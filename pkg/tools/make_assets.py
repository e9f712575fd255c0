#!/usr/bin/env python3
"""Regenerate the bundled data PNGs: 6 reference stroke bitmaps and the
3 synthetic seed character images. Deterministic; run from the repo root:

    python3 tools/make_assets.py
"""

import math
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from strokefont.raster import save_binary_png  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), "..", "src", "strokefont", "data")
PEN = 1  # Chebyshev radius -> 3 px wide strokes


def stamp(img, x, y, r=PEN):
    h, w = img.shape
    img[max(0, y - r):min(h, y + r + 1), max(0, x - r):min(w, x + r + 1)] = 1


def draw_points(img, points, scale=1.0, offset=(0, 0)):
    last = None
    for px, py in points:
        x = int(px * scale + offset[0] + 0.5)
        y = int(py * scale + offset[1] + 0.5)
        if last is not None:
            steps = max(abs(x - last[0]), abs(y - last[1]), 1)
            for i in range(steps + 1):
                stamp(img, last[0] + (x - last[0]) * i // steps,
                      last[1] + (y - last[1]) * i // steps)
        else:
            stamp(img, x, y)
        last = (x, y)


def line(p, q, n=48):
    return [(p[0] + (q[0] - p[0]) * i / n, p[1] + (q[1] - p[1]) * i / n) for i in range(n + 1)]


def arc(c, r, a0, a1, n=96):
    out = []
    for i in range(n + 1):
        a = math.radians(a0 + (a1 - a0) * i / n)
        out.append((c[0] + r * math.cos(a), c[1] + r * math.sin(a)))
    return out


def bowed(p, q, sag, n=48):
    """Line with a slight perpendicular bow, like a relaxed handwritten bar."""
    nx, ny = q[1] - p[1], p[0] - q[0]
    norm = math.hypot(nx, ny) or 1.0
    out = []
    for i in range(n + 1):
        t = i / n
        bend = sag * (1 - (2 * t - 1) ** 2)
        out.append((p[0] + (q[0] - p[0]) * t + bend * nx / norm,
                    p[1] + (q[1] - p[1]) * t + bend * ny / norm))
    return out


# Parametric centerlines of the six stroke classes (64x64 boxes, screen y down).
STROKE_PATHS = {
    1: line((8, 32), (56, 32)),                                  # horizontal bar
    2: line((32, 8), (32, 56)),                                  # vertical bar
    3: arc((40, 32), 22, 100, 260),                              # open-right curve '('
    4: arc((24, 32), 22, -80, 80),                               # open-left curve ')'
    5: line((12, 12), (36, 12)) + arc((36, 30), 18, -90, 90)     # hook: bar into right curl
       + line((36, 48), (24, 48)),
    6: line((14, 10), (14, 34)) + arc((32, 34), 18, 180, 0)      # bowl 'U'
       + line((50, 34), (50, 10)),
}

# Seed characters: disconnected stroke pairs so bank extraction is unambiguous.
SEEDS = {
    "0AA1": [(5, 1.6, (24, 16)), (2, 1.5, (104, 64))],   # hook over a vertical
    "0AB3": [(1, 1.6, (28, 12)), (6, 1.6, (32, 56))],    # bar over a bowl
    "0A9E": [(3, 1.5, (8, 40)), (4, 1.5, (80, 40))],     # facing curves
}


def main():
    strokes_dir = os.path.join(DATA, "strokes")
    seeds_dir = os.path.join(DATA, "seeds")
    os.makedirs(strokes_dir, exist_ok=True)
    os.makedirs(seeds_dir, exist_ok=True)

    for cls, path in STROKE_PATHS.items():
        img = np.zeros((64, 64), dtype=np.uint8)
        draw_points(img, path)
        out = os.path.join(strokes_dir, f"class{cls}.png")
        save_binary_png(img, out)
        print("wrote", out, f"({int(img.sum())} px)")

    for char_hex, parts in SEEDS.items():
        img = np.zeros((176, 176), dtype=np.uint8)
        for cls, scale, offset in parts:
            draw_points(img, STROKE_PATHS[cls], scale=scale, offset=offset)
        out = os.path.join(seeds_dir, f"{char_hex}.png")
        save_binary_png(img, out)
        print("wrote", out, f"({int(img.sum())} px)")


if __name__ == "__main__":
    main()
