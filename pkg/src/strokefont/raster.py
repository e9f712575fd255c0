"""Binary/grayscale raster primitives: thresholding, 3x3 morphology,
hit-or-miss matching, and 8-connected component labeling.

A 3x3 mask ("Mask3") is a numpy int8 array with values 1 (must be ink),
0 (must be background) and -1 (don't care). All 3x3 operations treat
pixels outside the raster as background.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .base import check_binary, check_gray

ON, OFF, ANY = 1, 0, -1

# (dx, dy) offsets of the 8 neighbors, clockwise from north.
NEIGHBOR_OFFSETS = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)]


def mask3(rows) -> np.ndarray:
    """Build a Mask3 from three strings over {'1','0','.'} ('.' = don't care)."""
    table = {"1": ON, "0": OFF, ".": ANY}
    cells = [[table[ch] for ch in row] for row in rows]
    arr = np.array(cells, dtype=np.int8)
    if arr.shape != (3, 3):
        raise ValueError("mask must be 3x3")
    return arr


def full_kernel() -> np.ndarray:
    return np.ones((3, 3), dtype=np.int8)


def load_gray(path) -> np.ndarray:
    """Load PNG or PGM (P2/P5); color inputs become the integer channel average."""
    img = Image.open(path)
    if img.mode in ("L", "I;16", "I"):
        arr = np.asarray(img.convert("L"), dtype=np.uint8)
    elif img.mode == "1":
        arr = np.asarray(img, dtype=np.uint8) * 255
    else:
        rgb = np.asarray(img.convert("RGB"), dtype=np.uint32)
        arr = (rgb.sum(axis=2) // 3).astype(np.uint8)
    return check_gray(arr)


def save_binary_png(img, path):
    """Write a binary raster as a black-ink-on-white PNG."""
    arr = check_binary(img)
    Image.fromarray(np.where(arr > 0, 0, 255).astype(np.uint8), mode="L").save(path)


def load_binary_png(path, threshold=128) -> np.ndarray:
    """Read a PNG written by save_binary_png (dark pixels = ink)."""
    return (load_gray(path) < threshold).astype(np.uint8)


def binarize_otsu(img) -> np.ndarray:
    """Threshold a grayscale raster; ink = intensities below the Otsu threshold.

    The threshold maximizes between-class variance over the 256-bin
    histogram; ties resolve to the lowest threshold, so a constant image
    yields an all-background raster.
    """
    arr = check_gray(img)
    hist = np.bincount(arr.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    # w0/s0 accumulate the "< t" class for t = 0..255.
    weights = np.concatenate([[0.0], np.cumsum(hist)[:-1]])
    sums = np.concatenate([[0.0], np.cumsum(hist * np.arange(256))[:-1]])
    w0 = weights / total
    w1 = 1.0 - w0
    mean0 = np.divide(sums, weights, out=np.zeros(256), where=weights > 0)
    mean1 = np.divide(sums[-1] + hist[-1] * 255 - sums, total - weights,
                      out=np.zeros(256), where=(total - weights) > 0)
    variance = w0 * w1 * (mean0 - mean1) ** 2
    threshold = int(np.argmax(variance))  # argmax returns the first (lowest) maximizer
    return (arr < threshold).astype(np.uint8)


def _on_offsets(kernel):
    ky, kx = np.nonzero(np.asarray(kernel) == ON)
    return [(int(x) - 1, int(y) - 1) for y, x in zip(ky, kx)]


def _shift(img, dx, dy):
    """Translate img by (dx, dy), filling vacated cells with 0."""
    h, w = img.shape
    out = np.zeros_like(img)
    ys = slice(max(dy, 0), min(h + dy, h))
    xs = slice(max(dx, 0), min(w + dx, w))
    ys_src = slice(max(-dy, 0), min(h - dy, h))
    xs_src = slice(max(-dx, 0), min(w - dx, w))
    out[ys, xs] = img[ys_src, xs_src]
    return out


def morphology(img, kind, kernel=None) -> np.ndarray:
    """Erode, dilate, or close with a 3x3 kernel; out-of-bounds counts as 0."""
    arr = check_binary(img)
    kernel = full_kernel() if kernel is None else np.asarray(kernel)
    offsets = _on_offsets(kernel)
    if not offsets:
        raise ValueError("kernel must contain at least one on cell")
    if kind == "dilate":
        out = np.zeros_like(arr)
        for dx, dy in offsets:
            out |= _shift(arr, dx, dy)
        return out
    if kind == "erode":
        out = np.ones_like(arr)
        for dx, dy in offsets:
            out &= _shift(arr, -dx, -dy)
        return out
    if kind == "close":
        return morphology(morphology(arr, "dilate", kernel), "erode", kernel)
    raise ValueError(f"unknown morphology kind {kind!r}")


def hit_or_miss(img, mask) -> list:
    """Every (x, y) whose 3x3 neighborhood matches the mask exactly.

    On cells must be ink, off cells background, don't-care cells are
    ignored; neighbors outside the raster count as background.
    """
    arr = check_binary(img)
    mask = np.asarray(mask)
    ok = np.ones_like(arr, dtype=bool)
    for my in range(3):
        for mx in range(3):
            want = int(mask[my, mx])
            if want == ANY:
                continue
            shifted = _shift(arr, -(mx - 1), -(my - 1))
            ok &= shifted == want
    ys, xs = np.nonzero(ok)
    return [(int(x), int(y)) for y, x in zip(ys, xs)]


def neighbor_count(img) -> np.ndarray:
    """Per-pixel count of ink among the 8 neighbors."""
    arr = check_binary(img)
    out = np.zeros(arr.shape, dtype=np.int32)
    for dx, dy in NEIGHBOR_OFFSETS:
        out += _shift(arr, dx, dy)
    return out


def ink_neighbors(img, x, y) -> list:
    """Neighbor offsets (dx, dy) of (x, y) that are ink, clockwise from north."""
    h, w = img.shape
    found = []
    for dx, dy in NEIGHBOR_OFFSETS:
        nx, ny = x + dx, y + dy
        if 0 <= nx < w and 0 <= ny < h and img[ny, nx]:
            found.append((dx, dy))
    return found


def branch_groups(offsets) -> list:
    """Group neighbor offsets into contiguous runs around the 8-ring.

    Two neighbors 45 degrees apart belong to the same branch; the number
    of groups is the number of distinct branches leaving the pixel.
    """
    if not offsets:
        return []
    ring = [NEIGHBOR_OFFSETS.index(o) for o in offsets]
    present = [i in ring for i in range(8)]
    groups = []
    # Start at a gap so a wrap-around run is not split in two.
    start = next((i for i in range(8) if not present[i]), None)
    if start is None:
        return [list(NEIGHBOR_OFFSETS)]
    current = []
    for k in range(1, 9):
        i = (start + k) % 8
        if present[i]:
            current.append(NEIGHBOR_OFFSETS[i])
        elif current:
            groups.append(current)
            current = []
    if current:
        groups.append(current)
    return groups


@dataclass
class Component:
    """One 8-connected ink region."""

    pixels: list  # (x, y), row-major order
    bbox: tuple  # (x0, y0, x1, y1) inclusive

    def __len__(self):
        return len(self.pixels)


def connected_components(img) -> list:
    """8-connected ink components, ordered by (min-y, min-x) of bounding box."""
    arr = check_binary(img)
    h, w = arr.shape
    labels = np.zeros((h, w), dtype=np.int32)
    comps = []
    next_label = 0
    ys, xs = np.nonzero(arr)
    for y0, x0 in zip(ys.tolist(), xs.tolist()):
        if labels[y0, x0]:
            continue
        next_label += 1
        stack = [(x0, y0)]
        labels[y0, x0] = next_label
        pixels = []
        while stack:
            x, y = stack.pop()
            pixels.append((x, y))
            for dx, dy in NEIGHBOR_OFFSETS:
                nx, ny = x + dx, y + dy
                if 0 <= nx < w and 0 <= ny < h and arr[ny, nx] and not labels[ny, nx]:
                    labels[ny, nx] = next_label
                    stack.append((nx, ny))
        pixels.sort(key=lambda p: (p[1], p[0]))
        bx = [p[0] for p in pixels]
        by = [p[1] for p in pixels]
        comps.append(Component(pixels, (min(bx), min(by), max(bx), max(by))))
    comps.sort(key=lambda c: (c.bbox[1], c.bbox[0]))
    return comps


def raster_from_points(points, shape=None) -> np.ndarray:
    """Build a binary raster from (x, y) points (shape inferred if omitted)."""
    pts = list(points)
    if shape is None:
        if not pts:
            raise ValueError("cannot infer shape from no points")
        shape = (max(p[1] for p in pts) + 1, max(p[0] for p in pts) + 1)
    out = np.zeros(shape, dtype=np.uint8)
    for x, y in pts:
        out[y, x] = 1
    return out


def crop_to_ink(img, margin=0):
    """Tight bounding-box crop; returns (crop, (x0, y0)) of the crop origin."""
    arr = check_binary(img)
    ys, xs = np.nonzero(arr)
    if len(ys) == 0:
        raise ValueError("cannot crop an empty raster")
    y0, y1 = int(ys.min()), int(ys.max())
    x0, x1 = int(xs.min()), int(xs.max())
    y0m, x0m = max(0, y0 - margin), max(0, x0 - margin)
    y1m = min(arr.shape[0] - 1, y1 + margin)
    x1m = min(arr.shape[1] - 1, x1 + margin)
    return arr[y0m:y1m + 1, x0m:x1m + 1].copy(), (x0m, y0m)
