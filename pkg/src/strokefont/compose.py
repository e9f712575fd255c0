"""Glyph composition: transform labeled bank strokes and weld or place them
on a canvas according to a composition rule.

Composition works on the original-resolution, full-pen-weight crops, not
the thinned skeletons, so the generated glyphs keep the writer's pen
weight. Welds get a local morphological close to smooth the seam.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .base import check_binary, dump_json
from .classify import Model
from .features import stroke_features
from .raster import crop_to_ink, full_kernel, load_binary_png, morphology, save_binary_png
from .rules import RuleSet, StrokePlacement
from .strokes import Stroke, decompose
from .thinning import thin

CANVAS = 256
MARGIN = 8


@dataclass
class StrokeBank:
    strokes: dict = field(default_factory=dict)  # class -> [Stroke]
    pen_width: int = 3

    def classes(self):
        return sorted(self.strokes)

    def pick(self, stroke_class: int, occurrence_index: int) -> Stroke:
        pool = self.strokes.get(stroke_class)
        if not pool:
            raise ValueError(f"stroke bank is missing class {stroke_class}")
        return pool[occurrence_index % len(pool)]


@dataclass
class GlyphRaster:
    raster: np.ndarray
    character: int
    variant: int = 0
    classes: list = field(default_factory=list)


def estimate_pen_width(img) -> int:
    """Median length of horizontal and vertical ink runs."""
    arr = check_binary(img)
    runs = []
    for rows in (arr, arr.T):
        for row in rows:
            length = 0
            for v in row.tolist() + [0]:
                if v:
                    length += 1
                elif length:
                    runs.append(length)
                    length = 0
    if not runs:
        return 1
    return int(np.median(runs))


def _reink(crop, pen_width):
    """Thicken a skeleton crop back to the estimated pen width."""
    radius = max((pen_width - 1) // 2, 0)
    if radius == 0:
        return crop.copy(), 0
    fat = np.pad(crop, radius)
    for _ in range(radius):
        fat = morphology(fat, "dilate", full_kernel())
    return fat, radius


def build_bank(char_images: dict, model: Model) -> StrokeBank:
    """Extract, classify, and re-ink strokes from seed character rasters.

    char_images maps a character id (hex string) to its binary raster.
    Each character is skeletonized and decomposed; every stroke is labeled
    with the model and stored at pen weight for composition.
    """
    widths = [estimate_pen_width(img) for img in char_images.values()]
    pen_width = max(int(np.median(widths)), 1) if widths else 3
    bank = StrokeBank(pen_width=pen_width)
    for char_id, img in char_images.items():
        for stroke in decompose(thin(img)):
            label = model.predict_one(stroke_features(stroke.normalized))
            fat, radius = _reink(stroke.crop, pen_width)
            bank.strokes.setdefault(label, []).append(Stroke(
                crop=fat,
                normalized=stroke.normalized,
                endpoints=[(x + radius, y + radius) for x, y in stroke.endpoints],
                class_label=label,
                source_char=char_id,
                origin=stroke.origin,
            ))
    return bank


def save_bank(bank: StrokeBank, directory):
    os.makedirs(directory, exist_ok=True)
    entries = []
    counters = {}
    for cls in bank.classes():
        for stroke in bank.strokes[cls]:
            char_id = stroke.source_char or "anon"
            index = counters.get(char_id, 0)
            counters[char_id] = index + 1
            name = f"{char_id}_{index}.png"
            save_binary_png(stroke.crop, os.path.join(directory, name))
            entries.append({
                "file": name,
                "char": char_id,
                "class": cls,
                "endpoints": [list(p) for p in stroke.endpoints],
            })
    meta = {"pen_width": bank.pen_width, "strokes": entries}
    dump_json(meta, os.path.join(directory, "bank.json"))


def load_bank(directory) -> StrokeBank:
    with open(os.path.join(directory, "bank.json")) as fh:
        meta = json.load(fh)
    bank = StrokeBank(pen_width=meta["pen_width"])
    for entry in meta["strokes"]:
        crop = load_binary_png(os.path.join(directory, entry["file"]))
        bank.strokes.setdefault(entry["class"], []).append(Stroke(
            crop=crop,
            normalized=None,
            endpoints=[tuple(p) for p in entry["endpoints"]],
            class_label=entry["class"],
            source_char=entry["char"],
        ))
    return bank


_ENDPOINT_MAPS = {
    "identity": lambda x, y, w, h: (x, y),
    "flip-h": lambda x, y, w, h: (w - 1 - x, y),
    "flip-v": lambda x, y, w, h: (x, h - 1 - y),
    "rot90": lambda x, y, w, h: (h - 1 - y, x),
    "rot180": lambda x, y, w, h: (w - 1 - x, h - 1 - y),
    "rot270": lambda x, y, w, h: (y, w - 1 - x),
}


def transform_stroke(stroke: Stroke, appearance: str, size: float, canvas=CANVAS):
    """Flip/rotate then nearest-neighbor scale a stroke crop.

    Returns (raster, endpoints) with the endpoints mapped consistently.
    """
    if appearance not in _ENDPOINT_MAPS:
        raise ValueError(f"unknown appearance {appearance!r}")
    if not 0 < size <= 4:
        raise ValueError(f"scale {size!r} out of range (0, 4]")
    arr = check_binary(stroke.crop)
    h, w = arr.shape
    if appearance == "flip-h":
        out = arr[:, ::-1]
    elif appearance == "flip-v":
        out = arr[::-1, :]
    elif appearance == "rot90":
        out = np.rot90(arr, -1)
    elif appearance == "rot180":
        out = arr[::-1, ::-1]
    elif appearance == "rot270":
        out = np.rot90(arr, 1)
    else:
        out = arr
    pts = [_ENDPOINT_MAPS[appearance](x, y, w, h) for x, y in stroke.endpoints]
    out = np.ascontiguousarray(out)

    if size != 1:
        oh, ow = out.shape
        nh = max(1, int(oh * size + 0.5))
        nw = max(1, int(ow * size + 0.5))
        row_idx = np.minimum((np.arange(nh) / size).astype(int), oh - 1)
        col_idx = np.minimum((np.arange(nw) / size).astype(int), ow - 1)
        out = out[row_idx][:, col_idx]
        pts = [(min(int(x * size + 0.5), nw - 1), min(int(y * size + 0.5), nh - 1))
               for x, y in pts]
    if out.shape[0] > canvas or out.shape[1] > canvas:
        raise ValueError(f"oversize stroke: {out.shape[1]}x{out.shape[0]} exceeds "
                         f"the {canvas}x{canvas} canvas")
    return out, pts


@dataclass
class Placed:
    raster: np.ndarray
    offset: tuple  # canvas (x, y) of the crop's top-left
    endpoints: list  # canvas coordinates
    bbox: tuple  # canvas (x0, y0, x1, y1)
    stroke_class: int


def _resolve_point(point, endpoints, bbox):
    x0, y0, x1, y1 = bbox
    if point == "A":
        if not endpoints:
            raise ValueError("stroke has no endpoint A")
        return endpoints[0]
    if point == "B":
        if len(endpoints) < 2:
            raise ValueError("stroke has no endpoint B")
        return endpoints[1]
    px, py = point
    return (x0 + int(px / 100 * (x1 - x0) + 0.5),
            y0 + int(py / 100 * (y1 - y0) + 0.5))


def _smooth_weld(canvas, cx, cy):
    """3x3 close confined to a 7x7 window around the weld (1-px context ring)."""
    h, w = canvas.shape
    x0, y0 = max(cx - 4, 0), max(cy - 4, 0)
    x1, y1 = min(cx + 5, w), min(cy + 5, h)
    closed = morphology(canvas[y0:y1, x0:x1], "close", full_kernel())
    ix0, iy0 = max(cx - 3, 0), max(cy - 3, 0)
    ix1, iy1 = min(cx + 4, w), min(cy + 4, h)
    canvas[iy0:iy1, ix0:ix1] = closed[iy0 - y0:iy1 - y0, ix0 - x0:ix1 - x0]


def place_and_join(canvas, placed: list, nxt: StrokePlacement, bank: StrokeBank):
    """Place the next stroke onto the canvas; returns (canvas, placed_record).

    Joined placements translate the stroke so its join point lands on the
    resolved target point, union it in, and smooth the weld locally.
    Disconnected placements anchor the stroke bbox center at the percent
    position offset by ds.
    """
    canvas = check_binary(canvas).copy()
    ch, cw = canvas.shape
    stroke = bank.pick(nxt.stroke_class, nxt.occurrence_index)
    raster, endpoints = transform_stroke(stroke, nxt.appearance, nxt.size, canvas=min(ch, cw))
    rh, rw = raster.shape
    local_bbox = (0, 0, rw - 1, rh - 1)

    if nxt.join is not None:
        if not 0 <= nxt.join.target_stroke < len(placed):
            raise ValueError(f"join target {nxt.join.target_stroke} does not reference "
                             f"an earlier placement")
        target = placed[nxt.join.target_stroke]
        tx, ty = _resolve_point(nxt.join.target_point, target.endpoints, target.bbox)
        sx, sy = _resolve_point(nxt.join.this_point, endpoints, local_bbox)
        ox, oy = tx - sx, ty - sy
        weld = (tx, ty)
    else:
        px, py = nxt.position
        ax = int(px / 100 * (cw - 1) + 0.5) + int(nxt.distance[0] / 100 * cw)
        ay = int(py / 100 * (ch - 1) + 0.5) + int(nxt.distance[1] / 100 * ch)
        ox, oy = ax - rw // 2, ay - rh // 2
        weld = None

    if ox < 0 or oy < 0 or ox + rw > cw or oy + rh > ch:
        raise ValueError(f"placement out of bounds: stroke {rw}x{rh} at offset ({ox}, {oy})")
    canvas[oy:oy + rh, ox:ox + rw] |= raster
    if weld is not None:
        _smooth_weld(canvas, *weld)
    record = Placed(
        raster=raster,
        offset=(ox, oy),
        endpoints=[(x + ox, y + oy) for x, y in endpoints],
        bbox=(ox, oy, ox + rw - 1, oy + rh - 1),
        stroke_class=nxt.stroke_class,
    )
    return canvas, record


def generate_character(char: int, bank: StrokeBank, rules: RuleSet, variant=0) -> GlyphRaster:
    """Compose one glyph: fold the rule's placements, then re-center."""
    rule = rules.characters.get(char)
    if rule is None:
        raise ValueError(f"unknown character U+{char:04X}: no rule defined")
    if not 0 <= variant < len(rule.variants):
        raise ValueError(f"U+{char:04X} has no variant {variant}")
    placements = rule.variants[variant]
    missing = sorted({p.stroke_class for p in placements} - set(bank.classes()))
    if missing:
        raise ValueError(f"U+{char:04X}: stroke bank is missing class(es) "
                         + ", ".join(str(m) for m in missing))
    canvas = np.zeros((CANVAS, CANVAS), dtype=np.uint8)
    placed = []
    for placement in placements:
        canvas, record = place_and_join(canvas, placed, placement, bank)
        placed.append(record)
    ink, _ = crop_to_ink(canvas)
    h, w = ink.shape
    if h + 2 * MARGIN > CANVAS or w + 2 * MARGIN > CANVAS:
        raise ValueError(f"U+{char:04X}: composed ink exceeds the canvas")
    out = np.zeros((CANVAS, CANVAS), dtype=np.uint8)
    y0 = (CANVAS - h) // 2
    x0 = (CANVAS - w) // 2
    out[y0:y0 + h, x0:x0 + w] = ink
    return GlyphRaster(raster=out, character=char, variant=variant,
                       classes=[p.stroke_class for p in placements])


def generate_all(bank: StrokeBank, rules: RuleSet, variant=0) -> list:
    """One glyph per ruleset character in codepoint order; aggregates errors."""
    glyphs = []
    failures = []
    for char in sorted(rules.characters):
        use = variant if variant < len(rules.characters[char].variants) else 0
        try:
            glyphs.append(generate_character(char, bank, rules, use))
        except ValueError as exc:
            failures.append(f"U+{char:04X}: {exc}")
    if failures:
        raise ValueError("glyph generation failed for:\n  " + "\n  ".join(failures))
    return glyphs


def glyph_filename(char: int, variant: int) -> str:
    return f"u{char:04X}_v{variant}.png"


def save_glyphs(glyphs, directory):
    os.makedirs(directory, exist_ok=True)
    manifest = []
    for glyph in glyphs:
        name = glyph_filename(glyph.character, glyph.variant)
        save_binary_png(glyph.raster, os.path.join(directory, name))
        manifest.append({
            "char": f"{glyph.character:04X}",
            "codepoint": glyph.character,
            "variant": glyph.variant,
            "classes": list(glyph.classes),
            "file": name,
        })
    dump_json(manifest, os.path.join(directory, "manifest.json"))


def load_glyphs(directory) -> list:
    with open(os.path.join(directory, "manifest.json")) as fh:
        manifest = json.load(fh)
    glyphs = []
    for entry in manifest:
        raster = load_binary_png(os.path.join(directory, entry["file"]))
        glyphs.append(GlyphRaster(raster=raster, character=entry["codepoint"],
                                  variant=entry["variant"], classes=entry["classes"]))
    return glyphs
