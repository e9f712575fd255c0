"""Structural features for normalized 30x30 strokes.

Each ink pixel gets a feature code from a bank of 16 exact 3x3 templates:
8 endpoint masks (code 10), 4 line masks (1 horizontal, 2 vertical,
3 right-slant, 4 left-slant) and 4 curve masks (5 left-flat, 6 left-deep,
7 right-flat, 8 right-deep). Ink pixels that match no template inherit the
code of their nearest coded neighbor. The 30x30 code matrix is then zoned
into 25 blocks of 6x6 and summarized into a 25-element feature vector.
"""

from __future__ import annotations

import csv

import numpy as np

from .base import BaseEstimator, check_binary
from .raster import NEIGHBOR_OFFSETS, mask3
from .strokes import ENDPOINT_MASKS, Stroke

BACKGROUND = 0
ENDPOINT_CODE = 10
CODE_VALUES = (0, 1, 2, 3, 4, 5, 6, 7, 8, 10)


def _pair_mask(a, b):
    rows = [["0"] * 3 for _ in range(3)]
    rows[1][1] = "1"
    rows[1 + a[1]][1 + a[0]] = "1"
    rows[1 + b[1]][1 + b[0]] = "1"
    return mask3(["".join(r) for r in rows])

N, NE, E, SE, S, SW, W, NW = NEIGHBOR_OFFSETS

LINE_MASKS = [
    (1, _pair_mask(E, W)),
    (2, _pair_mask(N, S)),
    (3, _pair_mask(NE, SW)),
    (4, _pair_mask(NW, SE)),
]
CURVE_MASKS = [
    (5, _pair_mask(S, NW)),
    (6, _pair_mask(S, W)),
    (7, _pair_mask(S, NE)),
    (8, _pair_mask(S, E)),
]
# Priority order: endpoints, then lines, then curves; first match wins.
TEMPLATE_BANK = [(ENDPOINT_CODE, m) for m in ENDPOINT_MASKS] + LINE_MASKS + CURVE_MASKS


def _matches(window, mask):
    for my in range(3):
        for mx in range(3):
            want = int(mask[my, mx])
            if want >= 0 and window[my, mx] != want:
                return False
    return True


def code_matrix(stroke30) -> np.ndarray:
    """Assign a feature code to every ink pixel of a 30x30 stroke raster."""
    arr = check_binary(stroke30)
    if arr.shape != (30, 30):
        raise ValueError(f"expected a 30x30 raster, got {arr.shape}")
    padded = np.pad(arr, 1)
    codes = np.zeros((30, 30), dtype=np.int64)
    uncoded = []
    ys, xs = np.nonzero(arr)
    for y, x in zip(ys.tolist(), xs.tolist()):
        window = padded[y:y + 3, x:x + 3]
        for code, mask in TEMPLATE_BANK:
            if _matches(window, mask):
                codes[y, x] = code
                break
        else:
            uncoded.append((x, y))
    if int((codes == ENDPOINT_CODE).sum()) > 2:
        raise ValueError("not a stroke: more than two endpoint pixels")

    # Unmatched ink pixels inherit the nearest coded neighbor (BFS over the
    # ink adjacency graph); equidistant sources resolve to the lower code.
    if uncoded:
        frontier = {(int(x), int(y)): int(codes[y, x])
                    for y, x in zip(ys.tolist(), xs.tolist()) if codes[y, x]}
        pending = set(uncoded)
        while pending and frontier:
            reached = {}
            for (x, y), code in frontier.items():
                for dx, dy in NEIGHBOR_OFFSETS:
                    nx, ny = x + dx, y + dy
                    if (nx, ny) in pending:
                        prev = reached.get((nx, ny))
                        if prev is None or code < prev:
                            reached[(nx, ny)] = code
            if not reached:
                break  # isolated uncoded region; stays background
            for (x, y), code in reached.items():
                codes[y, x] = code
                pending.discard((x, y))
            frontier = reached
    return codes


def feature_vector(cm) -> np.ndarray:
    """Summarize a 30x30 code matrix into 25 block codes (5x5 grid, row-major).

    A block containing an endpoint cell becomes 10; a block with fewer
    than two nonzero cells becomes 0; otherwise the block takes its most
    common nonzero code, ties going to the smaller code.
    """
    cm = np.asarray(cm)
    if cm.shape != (30, 30):
        raise ValueError(f"expected a 30x30 code matrix, got {cm.shape}")
    out = np.zeros(25, dtype=np.int64)
    for by in range(5):
        for bx in range(5):
            block = cm[by * 6:(by + 1) * 6, bx * 6:(bx + 1) * 6]
            if (block == ENDPOINT_CODE).any():
                out[by * 5 + bx] = ENDPOINT_CODE
                continue
            nonzero = block[block != 0]
            if len(nonzero) < 2:
                continue
            counts = np.bincount(nonzero)
            out[by * 5 + bx] = int(np.argmax(counts))  # argmax picks the smaller code on ties
    return out


def stroke_features(stroke30) -> np.ndarray:
    return feature_vector(code_matrix(stroke30))


def dataset_row(stroke: Stroke) -> list:
    """25 feature codes followed by the class label."""
    if stroke.class_label is None:
        raise ValueError("missing label: stroke has no class_label")
    return stroke_features(stroke.normalized).tolist() + [int(stroke.class_label)]


def write_csv(rows, path):
    """Headerless CSV of 26 integer columns (25 codes + label)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in rows:
            if len(row) != 26:
                raise ValueError(f"dataset rows must have 26 columns, got {len(row)}")
            writer.writerow([int(v) for v in row])


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = [[int(v) for v in row] for row in csv.reader(fh) if row]
    for row in rows:
        if len(row) != 26:
            raise ValueError(f"dataset rows must have 26 columns, got {len(row)}")
    return rows


class StrokeFeaturizer(BaseEstimator):
    """Stateless transformer from 30x30 stroke rasters to 25-code vectors.

    Composes with sklearn-style pipelines: fit is a no-op returning self,
    transform accepts a sequence of rasters (or Stroke objects) and returns
    an (n, 25) integer matrix.
    """

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        vectors = []
        for item in X:
            raster = item.normalized if isinstance(item, Stroke) else item
            vectors.append(stroke_features(raster))
        return np.array(vectors, dtype=np.int64).reshape(len(vectors), 25)

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)
