"""Skeletonization: Zhang-Suen thinning plus an adaptive pass that removes
the doubled pixels Zhang-Suen leaves behind, so stroke interiors satisfy
the strict width rule (every 3x3 window centered on ink holds < 4 ink).

The adaptive pass deletes redundant pixels one at a time (row-major, to a
fixpoint) under three constraints: the pixel's neighbors must form at most
two branches (genuine T/Y/cross junctions are preserved for stroke
decomposition), the neighbors must stay 8-connected without it (no splits),
and sharp axis-aligned corners are cut to their diagonal form when the
corner pixel is what keeps a neighbor too thick.
"""

from __future__ import annotations

import numpy as np

from .base import check_binary
from .raster import NEIGHBOR_OFFSETS, branch_groups, ink_neighbors, neighbor_count


class ThinningDivergence(RuntimeError):
    """Adaptive thinning failed to reach a fixpoint."""


def _zs_neighbors(arr):
    """Stacked neighbor planes P2..P9 (N, NE, E, SE, S, SW, W, NW) with 0 borders."""
    padded = np.pad(arr, 1)
    n = padded[:-2, 1:-1]
    ne = padded[:-2, 2:]
    e = padded[1:-1, 2:]
    se = padded[2:, 2:]
    s = padded[2:, 1:-1]
    sw = padded[2:, :-2]
    w = padded[1:-1, :-2]
    nw = padded[:-2, :-2]
    return [n, ne, e, se, s, sw, w, nw]


def zhang_suen(img) -> np.ndarray:
    """Classic two-subiteration Zhang-Suen thinning, iterated until stable."""
    arr = check_binary(img).copy()
    while True:
        changed = False
        for step in (0, 1):
            p = _zs_neighbors(arr)
            b = sum(x.astype(np.int32) for x in p)
            ring = p + [p[0]]
            a = sum(((ring[i] == 0) & (ring[i + 1] == 1)).astype(np.int32) for i in range(8))
            n_, e_, s_, w_ = p[0], p[2], p[4], p[6]
            if step == 0:
                cond = (n_ * e_ * s_ == 0) & (e_ * s_ * w_ == 0)
            else:
                cond = (n_ * e_ * w_ == 0) & (n_ * s_ * w_ == 0)
            remove = (arr == 1) & (b >= 2) & (b <= 6) & (a == 1) & cond
            if remove.any():
                arr[remove] = 0
                changed = True
        if not changed:
            return arr


def _neighbors_stay_connected(offsets) -> bool:
    """True if the neighbor pixels form one 8-connected group without the center."""
    if len(offsets) <= 1:
        return True
    remaining = set(offsets)
    stack = [next(iter(remaining))]
    seen = set()
    while stack:
        ax, ay = stack.pop()
        if (ax, ay) in seen:
            continue
        seen.add((ax, ay))
        for bx, by in remaining:
            if (bx, by) not in seen and max(abs(ax - bx), abs(ay - by)) == 1:
                stack.append((bx, by))
    return len(seen) == len(remaining)


def adaptive_thin(img) -> np.ndarray:
    """Delete redundant thickness until every non-junction window has < 4 ink.

    Scans ink pixels row-major and deletes, immediately, any pixel that is
    (a) thick — degree >= 3 with its neighbors in at most 2 branch groups —
    and removable without splitting its neighborhood, or (b) a degree-2
    corner pixel whose neighbors touch each other and that is adjacent to a
    stuck thick pixel (the diagonal corner cut). Junction pixels (>= 3
    branches) are never touched. Iterates to a fixpoint.
    """
    arr = check_binary(img).copy()
    h, w = arr.shape
    for _ in range(h * w + 1):
        changed = False
        counts = neighbor_count(arr)
        ys, xs = np.nonzero((arr == 1) & (counts >= 3))
        candidates = list(zip(ys.tolist(), xs.tolist()))
        for y, x in candidates:
            if not arr[y, x]:
                continue
            offsets = ink_neighbors(arr, x, y)
            if len(offsets) < 3 or len(branch_groups(offsets)) > 2:
                continue
            pixels = [(x + dx, y + dy) for dx, dy in offsets]
            if _neighbors_stay_connected(pixels):
                arr[y, x] = 0
                changed = True
        if not changed:
            # Corner cut: a stuck thick pixel is relieved by deleting an
            # adjacent degree-2 pixel whose own neighbors touch each other.
            counts = neighbor_count(arr)
            ys, xs = np.nonzero((arr == 1) & (counts >= 3))
            for y, x in zip(ys.tolist(), xs.tolist()):
                if not arr[y, x]:
                    continue
                offsets = ink_neighbors(arr, x, y)
                if len(branch_groups(offsets)) > 2:
                    continue
                for dx, dy in offsets:
                    nx, ny = x + dx, y + dy
                    around = ink_neighbors(arr, nx, ny)
                    if len(around) != 2:
                        continue
                    (ax, ay), (bx, by) = around
                    if max(abs((nx + ax) - (nx + bx)), abs((ny + ay) - (ny + by))) == 1:
                        arr[ny, nx] = 0
                        changed = True
                        break
                if changed:
                    break
        if not changed:
            return arr
    raise ThinningDivergence("thinning divergence")


def is_unit_width(img) -> bool:
    """True iff every 3x3 window centered on an ink pixel has < 4 ink pixels."""
    arr = check_binary(img)
    counts = neighbor_count(arr)
    return bool(((counts + 1) * (arr == 1) < 4).all())


def is_unit_width_outside_junctions(img) -> bool:
    """Width rule relaxed at junction pixels and their neighbors.

    A pixel where three strokes meet necessarily has >= 4 ink in its
    window, so full characters are checked with junction windows exempt.
    """
    arr = check_binary(img)
    counts = neighbor_count(arr)
    ys, xs = np.nonzero((arr == 1) & (counts >= 3))
    junctions = set()
    for y, x in zip(ys.tolist(), xs.tolist()):
        if len(branch_groups(ink_neighbors(arr, x, y))) >= 3:
            junctions.add((x, y))
            junctions.update((x + dx, y + dy) for dx, dy in NEIGHBOR_OFFSETS)
    for y, x in zip(ys.tolist(), xs.tolist()):
        if (x, y) not in junctions:
            return False
    return True


def thin(img) -> np.ndarray:
    """Full skeletonization: Zhang-Suen followed by the adaptive pass."""
    return adaptive_thin(zhang_suen(img))
