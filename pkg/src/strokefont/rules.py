"""Composition rules: how labeled strokes are placed, sized, and joined to
form each target character.

Ruleset files are JSON with one entry per character (hex codepoint key) and
1..2 variants, each an ordered placement list. Placement keys mirror the
feature short forms: class, occ (occurrence index), size (scale factor),
ap (appearance), pos (canvas anchor percent), ds (offset percent), jp
(joining point). Exactly one of jp / pos drives a placement.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from .base import dump_json

GUJARATI_CONSONANT_RANGE = (0x0A95, 0x0AB9)
APPEARANCES = ("identity", "flip-h", "flip-v", "rot90", "rot180", "rot270")


class RuleValidationError(ValueError):
    pass


@dataclass
class JoinSpec:
    this_point: object  # "A", "B", or (px, py) percent of the stroke bbox
    target_stroke: int  # index into prior placements
    target_point: object

    def to_dict(self):
        return {"this": _point_out(self.this_point),
                "target": self.target_stroke,
                "point": _point_out(self.target_point)}


@dataclass
class StrokePlacement:
    stroke_class: int
    occurrence_index: int = 0
    size: float = 1.0
    appearance: str = "identity"
    join: JoinSpec | None = None
    position: tuple | None = None  # (px, py) canvas percent
    distance: tuple = (0, 0)  # (dx, dy) canvas percent, only with position

    def to_dict(self):
        out = {"class": self.stroke_class, "occ": self.occurrence_index,
               "size": self.size, "ap": self.appearance}
        if self.join is not None:
            out["jp"] = self.join.to_dict()
        else:
            out["pos"] = list(self.position)
            if tuple(self.distance) != (0, 0):
                out["ds"] = list(self.distance)
        return out


@dataclass
class CompositionRule:
    character: int  # Unicode codepoint
    variants: list  # 1 or 2 ordered placement lists

    def classes(self, variant=0):
        return sorted(p.stroke_class for p in self.variants[variant])


@dataclass
class RuleSet:
    characters: dict  # codepoint -> CompositionRule
    metadata: dict = field(default_factory=dict)

    def __contains__(self, codepoint):
        return codepoint in self.characters

    def __len__(self):
        return len(self.characters)


def _point_out(point):
    return point if isinstance(point, str) else list(point)


def _check_percent(value, char, fname):
    try:
        px, py = value
    except (TypeError, ValueError):
        raise RuleValidationError(f"{char}: {fname}: expected a [px, py] pair, got {value!r}")
    for v in (px, py):
        if not isinstance(v, (int, float)) or not 0 <= v <= 100:
            raise RuleValidationError(f"{char}: {fname}: percent {v!r} out of range 0..100")
    return (px, py)


def _parse_point(raw, char, fname):
    if raw in ("A", "B"):
        return raw
    return _check_percent(raw, char, fname)


def _parse_placement(raw, index, char):
    cls = raw.get("class")
    if cls not in (1, 2, 3, 4, 5, 6):
        raise RuleValidationError(f"{char}: class: unknown stroke class {cls!r}")
    ap = raw.get("ap", "identity")
    if ap not in APPEARANCES:
        raise RuleValidationError(f"{char}: ap: unknown appearance {ap!r}")
    size = raw.get("size", 1.0)
    if not isinstance(size, (int, float)) or not 0 < size <= 4:
        raise RuleValidationError(f"{char}: size: scale {size!r} out of range (0, 4]")
    has_jp = "jp" in raw
    has_pos = "pos" in raw
    if has_jp == has_pos:
        raise RuleValidationError(f"{char}: placement {index}: exactly one of jp/pos required")
    join = None
    position = None
    distance = (0, 0)
    if has_jp:
        jp = raw["jp"]
        target = jp.get("target")
        if not isinstance(target, int) or not 0 <= target < index:
            raise RuleValidationError(
                f"{char}: jp.target: must reference an earlier placement, got {target!r}")
        join = JoinSpec(
            this_point=_parse_point(jp.get("this", "A"), char, "jp.this"),
            target_stroke=target,
            target_point=_parse_point(jp.get("point", "B"), char, "jp.point"),
        )
        if "ds" in raw:
            raise RuleValidationError(f"{char}: ds: only valid with pos placements")
    else:
        position = _check_percent(raw["pos"], char, "pos")
        if "ds" in raw:
            ds = raw["ds"]
            try:
                dx, dy = ds
            except (TypeError, ValueError):
                raise RuleValidationError(f"{char}: ds: expected a [dx, dy] pair, got {ds!r}")
            for v in (dx, dy):
                if not isinstance(v, (int, float)) or not -100 <= v <= 100:
                    raise RuleValidationError(f"{char}: ds: offset {v!r} out of range -100..100")
            distance = (dx, dy)
    occ = raw.get("occ", 0)
    if not isinstance(occ, int) or occ < 0:
        raise RuleValidationError(f"{char}: occ: must be a non-negative integer, got {occ!r}")
    return StrokePlacement(stroke_class=cls, occurrence_index=occ, size=size,
                           appearance=ap, join=join, position=position, distance=distance)


def load_ruleset(text: str) -> RuleSet:
    """Parse and validate a ruleset JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RuleValidationError(f"ruleset is not valid JSON: {exc}") from exc
    chars = {}
    for char_hex, entry in doc.get("characters", {}).items():
        try:
            codepoint = int(char_hex, 16)
        except ValueError:
            raise RuleValidationError(f"{char_hex}: not a hex codepoint")
        lo, hi = GUJARATI_CONSONANT_RANGE
        if not lo <= codepoint <= hi:
            raise RuleValidationError(
                f"{char_hex}: codepoint outside the Gujarati consonant range "
                f"U+{lo:04X}..U+{hi:04X}")
        variants = entry.get("variants", [])
        if not 1 <= len(variants) <= 2:
            raise RuleValidationError(f"{char_hex}: variants: expected 1 or 2, got {len(variants)}")
        parsed = []
        for placements in variants:
            if not placements:
                raise RuleValidationError(f"{char_hex}: variants: empty placement list")
            parsed.append([_parse_placement(p, i, char_hex) for i, p in enumerate(placements)])
        chars[codepoint] = CompositionRule(character=codepoint, variants=parsed)
    return RuleSet(characters=chars, metadata=doc.get("metadata", {"version": doc.get("version", 1)}))


def save_ruleset(rs: RuleSet, path=None) -> str:
    doc = {
        "version": rs.metadata.get("version", 1),
        "metadata": rs.metadata,
        "characters": {
            f"{cp:04X}": {"variants": [[p.to_dict() for p in variant] for variant in rule.variants]}
            for cp, rule in sorted(rs.characters.items())
        },
    }
    return dump_json(doc, path)


def learn_joining_point(samples, closeness=0.10) -> list:
    """Modal joining point(s) from junction observations.

    samples: iterable of ((x, y), (x0, y0, x1, y1)) pairs — a junction
    point with its character's bounding box. Points are normalized to
    integer percents of the box; the joint mode is returned first, and a
    second mode is included when its support is within `closeness` of the
    first. Returns [(px, py, support_fraction), ...].
    """
    samples = list(samples)
    if not samples:
        raise ValueError("learn_joining_point needs at least one sample")
    percents = []
    for (x, y), (x0, y0, x1, y1) in samples:
        spanx = max(x1 - x0, 1)
        spany = max(y1 - y0, 1)
        px = int(100 * (x - x0) / spanx + 0.5)
        py = int(100 * (y - y0) / spany + 0.5)
        percents.append((px, py))
    counts = Counter(percents)
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    total = len(percents)
    modes = [(ordered[0][0][0], ordered[0][0][1], ordered[0][1] / total)]
    if len(ordered) > 1:
        first_frac = ordered[0][1] / total
        second_frac = ordered[1][1] / total
        if first_frac - second_frac <= closeness + 1e-9:
            modes.append((ordered[1][0][0], ordered[1][0][1], second_frac))
    return modes


@dataclass
class CharacterSample:
    """One decomposed character observation used for rule learning."""

    bbox: tuple  # character ink bbox (x0, y0, x1, y1)
    strokes: list  # (class_label, (x0, y0, x1, y1)) in component order
    junctions: list  # (x, y) junction points in character coordinates


def _canonical_strokes(sample: CharacterSample):
    ordered = []
    seen = Counter()
    for cls, bbox in sample.strokes:
        ordered.append((cls, seen[cls], bbox))
        seen[cls] += 1
    ordered.sort(key=lambda item: (item[0], item[1]))
    return ordered


def _mode(values):
    counts = Counter(values)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]


def derive_rule(samples, character: int, closeness=0.10) -> CompositionRule:
    """Infer a composition rule from decomposed character samples.

    All samples must decompose into the same stroke-class multiset.
    Placement order and positions come from per-class modal statistics;
    joined characters take their joining point from learn_joining_point,
    emitting a second variant when two modes are close.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("derive_rule needs at least one sample")
    multisets = [tuple(sorted(cls for cls, _ in s.strokes)) for s in samples]
    if len(set(multisets)) != 1:
        raise ValueError(f"ambiguous decomposition for {character:04X}: "
                         f"stroke multisets differ across samples")

    keys = [(cls, occ) for cls, occ, _ in _canonical_strokes(samples[0])]
    stats = {key: {"size": [], "cx": [], "cy": []} for key in keys}
    for sample in samples:
        x0, y0, x1, y1 = sample.bbox
        spanx, spany = max(x1 - x0, 1), max(y1 - y0, 1)
        for cls, occ, (sx0, sy0, sx1, sy1) in _canonical_strokes(sample):
            entry = stats[(cls, occ)]
            entry["size"].append(round((sy1 - sy0 + 1) / (y1 - y0 + 1), 2))
            entry["cx"].append(int(100 * ((sx0 + sx1) / 2 - x0) / spanx + 0.5))
            entry["cy"].append(int(100 * ((sy0 + sy1) / 2 - y0) / spany + 0.5))

    joined = all(s.junctions for s in samples)
    join_modes = None
    if joined:
        observations = []
        for s in samples:
            observations.extend((pt, s.bbox) for pt in s.junctions)
        join_modes = learn_joining_point(observations, closeness=closeness)

    def build(join_point):
        placements = []
        for i, key in enumerate(keys):
            entry = stats[key]
            cls, occ = key
            size = _mode(entry["size"])
            if i == 0:
                placements.append(StrokePlacement(
                    stroke_class=cls, occurrence_index=occ, size=size,
                    position=(_mode(entry["cx"]), _mode(entry["cy"]))))
            elif join_point is not None:
                placements.append(StrokePlacement(
                    stroke_class=cls, occurrence_index=occ, size=size,
                    join=JoinSpec("A", 0, join_point)))
            else:
                placements.append(StrokePlacement(
                    stroke_class=cls, occurrence_index=occ, size=size,
                    position=(_mode(entry["cx"]), _mode(entry["cy"]))))
        return placements

    if join_modes:
        variants = [build((px, py)) for px, py, _ in join_modes[:2]]
    else:
        variants = [build(None)]
    return CompositionRule(character=character, variants=variants)


def default_ruleset() -> RuleSet:
    from .assets import default_ruleset_text

    return load_ruleset(default_ruleset_text())
