"""Command-line surface for the font-synthesis pipeline.

Subcommands: sheet segment, stroke extract, dataset synth, model train,
model eval, rules learn, rules validate, glyph generate, font build,
eval roundtrip. A JSON config file may supply defaults; flags override it.
"""

from __future__ import annotations

import json
import os
import sys
from collections import Counter
from dataclasses import dataclass, field

import click
import numpy as np

from . import assets, classify, compose, fontio, rules as rules_mod
from .base import dump_json, write_atomic
from .features import read_csv, stroke_features, write_csv
from .raster import binarize_otsu, connected_components, crop_to_ink, load_binary_png, load_gray, save_binary_png
from .strokes import decompose_full
from .thinning import thin

DEFAULTS = {
    "seed": 42,
    "per_class": 100,
    "algo": "knn",
    "k": 3,
    "trees": 25,
    "epsilon": 2.0,
    "family_name": "Handwritten",
    "chars": list(assets.SEED_CHARS),
    "layout": "1x3",
}


@dataclass
class SheetLayout:
    rows: int
    cols: int
    expected_chars: list  # codepoints, reading order (row-major)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("layout must have at least one row and column")
        if self.rows * self.cols < len(self.expected_chars):
            raise ValueError(f"layout {self.rows}x{self.cols} has fewer cells than "
                             f"{len(self.expected_chars)} expected characters")


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def get(self, key, override=None):
        if override is not None:
            return override
        if key in self.values:
            return self.values[key]
        return DEFAULTS.get(key)


def parse_layout(text: str):
    try:
        rows, cols = text.lower().split("x")
        return int(rows), int(cols)
    except ValueError:
        raise ValueError(f"layout must look like RxC, got {text!r}")


def parse_chars(text) -> list:
    if isinstance(text, (list, tuple)):
        return [c.upper() for c in text]
    return [c.strip().upper() for c in text.split(",") if c.strip()]


def ingest_sheet(scan, layout: SheetLayout, warn=None) -> dict:
    """Segment a grid sheet scan into per-character binary crops.

    Components are assigned to grid cells by centroid; components sharing
    a cell merge into one crop. Empty expected cells are an error naming
    every missing codepoint; a component whose bbox straddles cells is
    assigned by centroid with a warning.
    """
    binary = binarize_otsu(scan)
    h, w = binary.shape
    cell_h = h / layout.rows
    cell_w = w / layout.cols
    buckets = {}
    for comp in connected_components(binary):
        xs = [p[0] for p in comp.pixels]
        ys = [p[1] for p in comp.pixels]
        cx, cy = sum(xs) / len(xs), sum(ys) / len(ys)
        row = min(int(cy / cell_h), layout.rows - 1)
        col = min(int(cx / cell_w), layout.cols - 1)
        x0, y0, x1, y1 = comp.bbox
        spans = {(min(int(y / cell_h), layout.rows - 1), min(int(x / cell_w), layout.cols - 1))
                 for x, y in ((x0, y0), (x1, y1))}
        if len(spans) > 1 and warn is not None:
            warn(f"component at ({x0},{y0})-({x1},{y1}) straddles cells; "
                 f"assigned to cell ({row},{col}) by centroid")
        buckets.setdefault((row, col), []).extend(comp.pixels)

    out = {}
    missing = []
    for i, codepoint in enumerate(layout.expected_chars):
        cell = (i // layout.cols, i % layout.cols)
        pixels = buckets.get(cell)
        if not pixels:
            missing.append(codepoint)
            continue
        piece = np.zeros_like(binary)
        for x, y in pixels:
            piece[y, x] = 1
        crop, _ = crop_to_ink(piece)
        out[codepoint] = crop
    if missing:
        raise ValueError("no ink found for expected character(s): "
                         + ", ".join(f"U+{c:04X}" for c in missing))
    return out


def roundtrip_expectations(ruleset: rules_mod.RuleSet) -> dict:
    return {char: sorted(p.stroke_class for p in rule.variants[0])
            for char, rule in ruleset.characters.items()}


def run_roundtrip_eval(glyph_dir, ruleset: rules_mod.RuleSet, model: classify.Model) -> dict:
    """Re-extract and classify strokes from generated glyphs, compare with rules.

    Per character: pass when the extracted class multiset equals the
    rule's, partial when the rule's multiset is contained in the extracted
    one (weld stubs can survive as extra pieces), fail otherwise. Overall
    score = (passes + 0.5 * partials) / characters.
    """
    expectations = roundtrip_expectations(ruleset)
    rows = []
    score = 0.0
    for char in sorted(expectations):
        path = os.path.join(glyph_dir, compose.glyph_filename(char, 0))
        if not os.path.exists(path):
            rows.append({"char": f"{char:04X}", "expected": expectations[char],
                         "extracted": [], "verdict": "missing"})
            continue
        glyph = load_binary_png(path)
        extracted = []
        for stroke in decompose_full(thin(glyph)).strokes:
            extracted.append(model.predict_one(stroke_features(stroke.normalized)))
        extracted.sort()
        expected = expectations[char]
        if extracted == expected:
            verdict, value = "pass", 1.0
        elif not (Counter(expected) - Counter(extracted)):
            verdict, value = "partial", 0.5
        else:
            verdict, value = "fail", 0.0
        score += value
        rows.append({"char": f"{char:04X}", "expected": expected,
                     "extracted": extracted, "verdict": verdict})
    overall = score / len(expectations) if expectations else 0.0
    return {"rows": rows, "overall": overall}


def render_roundtrip_table(report: dict) -> str:
    lines = ["Character  Expected        Extracted       Verdict",
             "---------  --------------  --------------  -------"]
    for row in report["rows"]:
        lines.append(f"U+{row['char']}    "
                     f"{','.join(map(str, row['expected'])):<14}  "
                     f"{','.join(map(str, row['extracted'])):<14}  "
                     f"{row['verdict']}")
    lines.append(f"Overall score: {report['overall']:.4f}")
    return "\n".join(lines)


def _load_config(path) -> RunConfig:
    if not path:
        return RunConfig()
    with open(path) as fh:
        return RunConfig(json.load(fh))


def _fail(message):
    raise click.ClickException(str(message))


@click.group()
@click.option("--config", type=click.Path(exists=True), default=None,
              help="JSON config supplying defaults; flags override it.")
@click.pass_context
def main(ctx, config):
    """Stroke-based handwritten Gujarati font synthesis."""
    try:
        ctx.obj = _load_config(config)
    except (OSError, json.JSONDecodeError) as exc:
        _fail(f"cannot read config: {exc}")


@main.group()
def sheet():
    """Scanned input sheets."""


@sheet.command("segment")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--layout", default=None, help="Grid layout RxC.")
@click.option("--chars", default=None, help="Comma-separated hex codepoints, reading order.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_obj
def sheet_segment(cfg, input_path, layout, chars, out_dir):
    """Split a grid sheet scan into per-character images."""
    try:
        rows, cols = parse_layout(cfg.get("layout", layout))
        char_list = [int(c, 16) for c in parse_chars(cfg.get("chars", parse_chars(chars) if chars else None))]
        grid = SheetLayout(rows, cols, char_list)
        crops = ingest_sheet(load_gray(input_path), grid,
                             warn=lambda m: click.echo(f"warning: {m}", err=True))
    except ValueError as exc:
        _fail(exc)
    os.makedirs(out_dir, exist_ok=True)
    for codepoint, crop in crops.items():
        save_binary_png(crop, os.path.join(out_dir, f"{codepoint:04X}.png"))
    click.echo(f"wrote {len(crops)} character image(s) to {out_dir}")


@main.group()
def stroke():
    """Stroke extraction."""


@stroke.command("extract")
@click.option("--input", "input_dir", type=click.Path(exists=True), default=None,
              help="Directory of <hex>.png character images (default: bundled seeds).")
@click.option("--chars", default=None)
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_obj
def stroke_extract(cfg, input_dir, chars, model_path, out_dir):
    """Decompose seed characters into a labeled stroke bank."""
    char_list = parse_chars(cfg.get("chars", parse_chars(chars) if chars else None))
    images = {}
    try:
        for char_id in char_list:
            if input_dir:
                images[char_id] = load_binary_png(os.path.join(input_dir, f"{char_id}.png"))
            else:
                images[char_id] = assets.seed_image(char_id)
        model = classify.load_model(model_path)
        bank = compose.build_bank(images, model)
        missing = sorted(set(assets.STROKE_CLASSES) - set(bank.classes()))
        if missing:
            click.echo(f"warning: extracted bank lacks class(es) {missing}", err=True)
        compose.save_bank(bank, out_dir)
        for char_id, img in images.items():
            save_binary_png(img, os.path.join(out_dir, f"char_{char_id}.png"))
    except (ValueError, OSError) as exc:
        _fail(exc)
    total = sum(len(v) for v in bank.strokes.values())
    click.echo(f"extracted {total} stroke(s) across classes {bank.classes()} -> {out_dir}")


@main.group()
def dataset():
    """Training data."""


@dataset.command("synth")
@click.option("--per-class", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--no-perturb", is_flag=True, default=False)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_obj
def dataset_synth(cfg, per_class, seed, no_perturb, out_path):
    """Synthesize a labeled stroke dataset from the reference bitmaps."""
    try:
        ds = classify.synthesize_dataset(cfg.get("per_class", per_class),
                                         cfg.get("seed", seed),
                                         perturb=not no_perturb)
        write_csv(ds.to_rows(), out_path)
    except ValueError as exc:
        _fail(exc)
    click.echo(f"wrote {len(ds)} rows to {out_path}")


@main.group()
def model():
    """Classifier training and evaluation."""


@model.command("train")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--algo", default=None, type=click.Choice(sorted(classify.ALGORITHMS)))
@click.option("--k", type=int, default=None)
@click.option("--trees", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_obj
def model_train(cfg, input_path, algo, k, trees, seed, out_path):
    """Train a stroke classifier on a 26-column CSV dataset."""
    algo = cfg.get("algo", algo)
    hyper = {}
    if algo == "knn":
        hyper["k"] = cfg.get("k", k)
    elif algo == "forest":
        hyper["n_trees"] = cfg.get("trees", trees)
        hyper["seed"] = cfg.get("seed", seed)
    try:
        ds = classify.Dataset.from_rows(read_csv(input_path))
        trained = classify.train(ds, algo, **hyper)
        classify.save_model(trained, out_path)
    except ValueError as exc:
        _fail(exc)
    click.echo(f"trained {algo} on {len(ds)} rows -> {out_path}")


@model.command("eval")
@click.option("--model", "model_paths", multiple=True, required=True,
              type=click.Path(exists=True), help="Repeatable; one column per model.")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--verify-seed", type=int, default=None,
              help="Also evaluate a fresh 10-per-class verification set.")
@click.option("--out", "out_path", type=click.Path(), default=None)
def model_eval(model_paths, input_path, verify_seed, out_path):
    """Evaluate model(s) on a test CSV; renders class-wise accuracy tables."""
    try:
        test = classify.Dataset.from_rows(read_csv(input_path))
        models = [classify.load_model(p) for p in model_paths]
        reports = {m.algo: classify.evaluate(m, test) for m in models}
        text = classify.render_table(reports, "Testing accuracy (class rows, classifier columns)")
        payload = {"testing": {algo: r.to_dict() for algo, r in reports.items()}}
        if verify_seed is not None:
            verification = classify.synthesize_dataset(10, verify_seed)
            vreports = {m.algo: classify.evaluate(m, verification) for m in models}
            text += "\n\n" + classify.render_table(
                vreports, "Verification accuracy (60 samples, 10 per class)")
            payload["verification"] = {algo: r.to_dict() for algo, r in vreports.items()}
    except ValueError as exc:
        _fail(exc)
    click.echo(text)
    if out_path:
        dump_json(payload, out_path)
        write_atomic(os.path.splitext(out_path)[0] + ".txt", text + "\n")


@main.group("rules")
def rules_group():
    """Composition rulesets."""


@rules_group.command("validate")
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None,
              help="Ruleset JSON (default: bundled ruleset).")
def rules_validate(rules_path):
    """Validate a ruleset file."""
    try:
        text = open(rules_path).read() if rules_path else assets.default_ruleset_text()
        ruleset = rules_mod.load_ruleset(text)
    except (rules_mod.RuleValidationError, OSError) as exc:
        _fail(exc)
    click.echo(f"ruleset OK: {len(ruleset)} character(s)")


@rules_group.command("learn")
@click.option("--input", "input_dir", required=True, type=click.Path(exists=True),
              help="Directory of <hex>_<i>.png character samples.")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def rules_learn(input_dir, model_path, out_path):
    """Derive composition rules from decomposed character samples."""
    try:
        model = classify.load_model(model_path)
        groups = {}
        for name in sorted(os.listdir(input_dir)):
            if not name.lower().endswith(".png") or "_" not in name:
                continue
            char_hex = name.split("_")[0].upper()
            groups.setdefault(char_hex, []).append(os.path.join(input_dir, name))
        if not groups:
            raise ValueError(f"no <hex>_<i>.png samples found in {input_dir}")
        learned = {}
        for char_hex, paths in sorted(groups.items()):
            samples = []
            for path in paths:
                img = load_binary_png(path)
                skeleton = thin(img)
                result = decompose_full(skeleton)
                ys, xs = np.nonzero(img)
                bbox = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
                strokes = []
                for s in result.strokes:
                    label = model.predict_one(stroke_features(s.normalized))
                    ox, oy = s.origin
                    h, w = s.crop.shape
                    strokes.append((label, (ox, oy, ox + w - 1, oy + h - 1)))
                samples.append(rules_mod.CharacterSample(
                    bbox=bbox, strokes=strokes, junctions=result.removed))
            learned[int(char_hex, 16)] = rules_mod.derive_rule(samples, int(char_hex, 16))
        ruleset = rules_mod.RuleSet(characters=learned,
                                    metadata={"version": 1, "source": "learned"})
        rules_mod.save_ruleset(ruleset, out_path)
    except (ValueError, OSError) as exc:
        _fail(exc)
    click.echo(f"learned rules for {len(learned)} character(s) -> {out_path}")


@main.group()
def glyph():
    """Glyph generation."""


@glyph.command("generate")
@click.option("--bank", "bank_dir", required=True, type=click.Path(exists=True))
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--variant", type=int, default=0)
def glyph_generate(bank_dir, rules_path, out_dir, variant):
    """Generate every ruleset glyph plus the seed characters themselves."""
    try:
        ruleset = rules_mod.load_ruleset(
            open(rules_path).read() if rules_path else assets.default_ruleset_text())
        bank = compose.load_bank(bank_dir)
        glyphs = compose.generate_all(bank, ruleset, variant=variant)
        for name in sorted(os.listdir(bank_dir)):
            if name.startswith("char_") and name.endswith(".png"):
                char_hex = name[5:-4]
                img = load_binary_png(os.path.join(bank_dir, name))
                glyphs.append(_seed_glyph(int(char_hex, 16), img))
        compose.save_glyphs(glyphs, out_dir)
    except (ValueError, OSError, rules_mod.RuleValidationError) as exc:
        _fail(exc)
    click.echo(f"wrote {len(glyphs)} glyph(s) to {out_dir}")


def _seed_glyph(codepoint, img) -> compose.GlyphRaster:
    """Center a seed character's own ink on the glyph canvas."""
    crop, _ = crop_to_ink(img)
    h, w = crop.shape
    size = compose.CANVAS
    limit = size - 2 * compose.MARGIN
    if h > limit or w > limit:
        scale = limit / max(h, w)
        rows = np.minimum((np.arange(int(h * scale)) / scale).astype(int), h - 1)
        cols = np.minimum((np.arange(int(w * scale)) / scale).astype(int), w - 1)
        crop = crop[rows][:, cols]
        h, w = crop.shape
    canvas = np.zeros((size, size), dtype=np.uint8)
    y0, x0 = (size - h) // 2, (size - w) // 2
    canvas[y0:y0 + h, x0:x0 + w] = crop
    return compose.GlyphRaster(raster=canvas, character=codepoint, variant=0, classes=[])


@main.group()
def font():
    """Font file export."""


@font.command("build")
@click.option("--input", "glyph_dir", required=True, type=click.Path(exists=True))
@click.option("--family-name", default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_obj
def font_build(cfg, glyph_dir, family_name, epsilon, out_dir):
    """Vectorize generated glyphs into an SFD font plus per-glyph SVGs."""
    family = cfg.get("family_name", family_name)
    eps = cfg.get("epsilon", epsilon)
    try:
        rasters = {g.character: g.raster for g in compose.load_glyphs(glyph_dir)
                   if g.variant == 0}
        if not rasters:
            raise ValueError(f"no variant-0 glyphs found in {glyph_dir}")
        project = fontio.build_font_project(rasters, family, epsilon=eps)
        os.makedirs(os.path.join(out_dir, "svgs"), exist_ok=True)
        write_atomic(os.path.join(out_dir, f"{family}.sfd"), fontio.export_sfd(project))
        for codepoint, contours in project.glyphs.items():
            write_atomic(os.path.join(out_dir, "svgs", f"u{codepoint:04X}.svg"),
                         fontio.export_svg(codepoint, contours))
    except (ValueError, OSError) as exc:
        _fail(exc)
    click.echo(f"built {family}.sfd with {len(project.glyphs)} glyph(s) in {out_dir}")


@main.group("eval")
def eval_group():
    """Pipeline evaluation."""


@eval_group.command("roundtrip")
@click.option("--input", "glyph_dir", required=True, type=click.Path(exists=True))
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None)
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), default=None)
def eval_roundtrip(glyph_dir, rules_path, model_path, out_path):
    """Re-extract strokes from generated glyphs and score them against the rules."""
    try:
        ruleset = rules_mod.load_ruleset(
            open(rules_path).read() if rules_path else assets.default_ruleset_text())
        model = classify.load_model(model_path)
        report = run_roundtrip_eval(glyph_dir, ruleset, model)
    except (ValueError, OSError, rules_mod.RuleValidationError) as exc:
        _fail(exc)
    text = render_roundtrip_table(report)
    click.echo(text)
    if out_path:
        dump_json(report, out_path)
        write_atomic(os.path.splitext(out_path)[0] + ".txt", text + "\n")
    if report["overall"] < 0.5:
        click.echo("warning: round-trip score is low; check bank/rules pairing", err=True)


if __name__ == "__main__":
    main(prog_name="strokefont")
