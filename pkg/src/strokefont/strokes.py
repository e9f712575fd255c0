"""Stroke decomposition: find endpoints and junctions on a skeleton, split at
junctions, and normalize each stroke to a 30x30 unit-width raster.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .base import check_binary
from .raster import (
    NEIGHBOR_OFFSETS,
    branch_groups,
    connected_components,
    crop_to_ink,
    hit_or_miss,
    ink_neighbors,
    mask3,
    neighbor_count,
)
from .thinning import adaptive_thin, zhang_suen


def _endpoint_masks():
    """Center on, exactly one of the 8 neighbors on, everything else off."""
    masks = []
    for dx, dy in NEIGHBOR_OFFSETS:
        rows = [["0"] * 3 for _ in range(3)]
        rows[1][1] = "1"
        rows[1 + dy][1 + dx] = "1"
        masks.append(mask3(["".join(r) for r in rows]))
    return masks

ENDPOINT_MASKS = _endpoint_masks()


@dataclass
class JunctionReport:
    endpoints: list  # (x, y)
    junctions: list  # ((x, y), kind) with kind in {"T", "Y", "cross"}


@dataclass
class Stroke:
    """One decomposed stroke.

    crop holds the stroke's own pixels at source resolution, endpoints are
    the two tips (A first in row-major scan order, then B) in crop
    coordinates, and normalized is the padded 30x30 unit-width raster used
    for feature extraction.
    """

    crop: np.ndarray
    normalized: np.ndarray
    endpoints: list
    class_label: int | None = None
    source_char: str | None = None
    origin: tuple = (0, 0)  # crop offset inside the source raster


@dataclass
class DecompositionResult:
    strokes: list
    removed: list = field(default_factory=list)  # junction / ring-break pixels
    debris: list = field(default_factory=list)


def detect_endpoints(sk) -> list:
    """Ink pixels with exactly one ink neighbor, via the 8 endpoint masks."""
    found = set()
    for mask in ENDPOINT_MASKS:
        found.update(hit_or_miss(sk, mask))
    return sorted(found, key=lambda p: (p[1], p[0]))


def _junction_kind(groups) -> str:
    if len(groups) >= 4:
        return "cross"
    for i, ga in enumerate(groups):
        for gb in groups[i + 1:]:
            if any((-dx, -dy) in gb for dx, dy in ga):
                return "T"
    return "Y"


def is_junction(arr, x, y) -> bool:
    """True when the pixel's >= 3 ink neighbors form >= 3 distinct branches.

    Branch grouping (not raw neighbor count) is what distinguishes a real
    T/Y/cross meeting from an arm pixel that merely touches a
    perpendicular arm diagonally.
    """
    return len(branch_groups(ink_neighbors(arr, x, y))) >= 3


def detect_junctions(sk) -> JunctionReport:
    """Every ink pixel whose neighbors form >= 3 branches, tagged T, Y, or cross."""
    arr = check_binary(sk)
    counts = neighbor_count(arr)
    ys, xs = np.nonzero((arr == 1) & (counts >= 3))
    junctions = []
    for y, x in zip(ys.tolist(), xs.tolist()):
        groups = branch_groups(ink_neighbors(arr, x, y))
        if len(groups) >= 3:
            junctions.append(((x, y), _junction_kind(groups)))
    return JunctionReport(endpoints=detect_endpoints(arr), junctions=junctions)


def _component_endpoints(arr):
    counts = neighbor_count(arr)
    ys, xs = np.nonzero((arr == 1) & (counts == 1))
    return [(int(x), int(y)) for y, x in zip(ys, xs)]


def _ring_break_pixel(piece, pixels):
    """First scan-order pixel whose removal gives the loop two open tips.

    Deleting a pixel near a corner can leave the cycle closed through a
    diagonal shortcut, so each candidate removal is simulated.
    """
    for x, y in pixels:
        piece[y, x] = 0
        tips = _component_endpoints(piece)
        piece[y, x] = 1
        if len(tips) == 2:
            return (x, y)
    return pixels[0]


def _split_skeleton(arr, debris_limit=3):
    """Delete junction pixels iteratively and split into stroke pieces.

    Returns (pieces, removed, debris): pieces are full-size rasters, one
    per surviving connected piece, each opened (rings broken) to have two
    tips; removed and debris list the deleted pixels.
    """
    arr = check_binary(arr).copy()
    removed = []
    for _ in range(int(arr.sum()) + 1):
        counts = neighbor_count(arr)
        ys, xs = np.nonzero((arr == 1) & (counts >= 3))
        junctions = [(int(x), int(y)) for y, x in zip(ys, xs) if is_junction(arr, int(x), int(y))]
        if not junctions:
            break
        removed.extend(junctions)
        for x, y in junctions:
            arr[y, x] = 0

    pieces = []
    debris = []
    for comp in connected_components(arr):
        piece = np.zeros_like(arr)
        for x, y in comp.pixels:
            piece[y, x] = 1
        if len(comp.pixels) < debris_limit:
            debris.extend(comp.pixels)
            continue
        if not _component_endpoints(piece):  # closed loop: open it
            bx, by = _ring_break_pixel(piece, comp.pixels)
            piece[by, bx] = 0
            removed.append((bx, by))
        pieces.append(piece)
    return pieces, removed, debris


def decompose_full(sk, debris_limit=3) -> DecompositionResult:
    """Split a skeleton into strokes by deleting junction pixels.

    Pieces smaller than debris_limit pixels are dropped; closed loops are
    opened so every returned stroke has exactly two endpoints. All removed
    pixels are tallied so that |input ink| = sum of stroke pixels +
    removed + debris.
    """
    pieces, removed, debris = _split_skeleton(sk, debris_limit)
    strokes = []
    for piece in pieces:
        tips = _component_endpoints(piece)
        crop, origin = crop_to_ink(piece)
        local_tips = sorted(((x - origin[0], y - origin[1]) for x, y in tips),
                            key=lambda p: (p[1], p[0]))
        strokes.append(Stroke(
            crop=crop,
            normalized=preprocess_stroke(crop),
            endpoints=local_tips[:2],
            origin=origin,
        ))
    return DecompositionResult(strokes=strokes, removed=removed, debris=debris)


def decompose(sk) -> list:
    return decompose_full(sk).strokes


def _axis_map(length, target=28):
    if length == 1:
        return lambda v: target // 2
    scale = (target - 1) / (length - 1)
    return lambda v: int(v * scale + 0.5)


def _bresenham(p, q):
    x0, y0 = p
    x1, y1 = q
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    points = []
    while True:
        points.append((x0, y0))
        if (x0, y0) == (x1, y1):
            return points
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def preprocess_stroke(crop) -> np.ndarray:
    """Normalize a stroke crop to a padded 30x30 unit-width raster.

    The tight bounding box is remapped to 28x28 (nearest-neighbor index
    map, with segments drawn between adjacent source pixels so upscaled
    strokes stay connected), re-thinned, and padded by one background
    pixel on each side. A 1-pixel-tall or -wide crop stretches along its
    degenerate axis onto the center row/column.
    """
    arr = check_binary(crop)
    if int(arr.sum()) < 3:
        raise ValueError("stroke crop must contain at least 3 ink pixels")
    tight, _ = crop_to_ink(arr)
    h, w = tight.shape
    fx, fy = _axis_map(w), _axis_map(h)
    small = np.zeros((28, 28), dtype=np.uint8)
    ys, xs = np.nonzero(tight)
    pts = {(int(x), int(y)): (fx(int(x)), fy(int(y))) for y, x in zip(ys, xs)}
    for (x, y), dest in pts.items():
        small[dest[1], dest[0]] = 1
        for dx, dy in ((1, 0), (1, 1), (0, 1), (-1, 1)):
            other = pts.get((x + dx, y + dy))
            if other is not None:
                for px, py in _bresenham(dest, other):
                    small[py, px] = 1
    thin28 = adaptive_thin(zhang_suen(small))
    # Resampling webbing can leave a spur; keep the main piece so the
    # normalized stroke has at most two endpoints.
    pieces, _, _ = _split_skeleton(thin28, debris_limit=3)
    if pieces:
        thin28 = max(pieces, key=lambda p: int(p.sum()))
    return np.pad(thin28, 1)
