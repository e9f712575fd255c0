"""Access to bundled data: reference stroke bitmaps, seed character images,
and the default composition ruleset. Regenerate with tools/make_assets.py.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .raster import load_binary_png

STROKE_CLASSES = (1, 2, 3, 4, 5, 6)
STROKE_CLASS_NAMES = {
    1: "horizontal bar",
    2: "vertical bar",
    3: "open-right curve",
    4: "open-left curve",
    5: "hook",
    6: "bowl",
}
# Seed characters (hex codepoints): Dda, Lla, Nya.
SEED_CHARS = ("0AA1", "0AB3", "0A9E")


def _data_path(*parts):
    node = resources.files("strokefont").joinpath("data")
    for part in parts:
        node = node.joinpath(part)
    return node


def reference_stroke(class_label: int) -> np.ndarray:
    """Bundled binary bitmap that operationally defines a stroke class."""
    if class_label not in STROKE_CLASSES:
        raise ValueError(f"stroke class must be 1..6, got {class_label}")
    with resources.as_file(_data_path("strokes", f"class{class_label}.png")) as path:
        return load_binary_png(path)


def seed_image(char_hex: str) -> np.ndarray:
    """Bundled synthetic seed character image (binary raster)."""
    with resources.as_file(_data_path("seeds", f"{char_hex}.png")) as path:
        return load_binary_png(path)


def default_ruleset_text() -> str:
    return _data_path("default_rules.json").read_text()
