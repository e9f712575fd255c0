"""Estimator base class, input validation helpers, and shared small utilities.

Rasters throughout the package are plain numpy arrays, shape (height, width),
row-major: grayscale rasters are uint8 0..255, binary rasters are uint8 with
1 = ink (dark foreground) and 0 = background. Points are (x, y) tuples with
x = column and y = row.
"""

from __future__ import annotations

import inspect
import json
import os
import tempfile

import numpy as np


class NotFittedError(RuntimeError):
    """Raised when predict/transform is called before fit."""


class BaseEstimator:
    """Minimal sklearn-compatible parameter handling.

    Subclasses store every constructor argument under the same attribute
    name, which makes get_params/set_params (and therefore sklearn's
    clone/grid-search machinery) work by duck typing.
    """

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [p for p in sig.parameters if p != "self"]

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(f"unknown parameter {name!r} for {type(self).__name__}")
            setattr(self, name, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"


def check_gray(img) -> np.ndarray:
    """Validate and return a grayscale raster as a 2-D uint8 array."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"grayscale raster must be a non-empty 2-D array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("grayscale values must lie in 0..255")
        arr = arr.astype(np.uint8)
    return arr


def check_binary(img) -> np.ndarray:
    """Validate and return a binary raster as a 2-D uint8 array of {0, 1}."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"binary raster must be a non-empty 2-D array, got shape {arr.shape}")
    if arr.dtype == bool:
        return arr.astype(np.uint8)
    arr = arr.astype(np.uint8, copy=False)
    if arr.max(initial=0) > 1:
        raise ValueError("binary raster values must be 0 or 1")
    return arr


def check_feature_matrix(X) -> np.ndarray:
    """Validate a (n, 25) integer feature-code matrix."""
    arr = np.asarray(X, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 25:
        raise ValueError(f"feature matrix must have 25 columns, got shape {arr.shape}")
    return arr


def check_labels(y, n_rows=None) -> np.ndarray:
    arr = np.asarray(y, dtype=np.int64).ravel()
    if n_rows is not None and len(arr) != n_rows:
        raise ValueError(f"expected {n_rows} labels, got {len(arr)}")
    if arr.size and (arr.min() < 1 or arr.max() > 6):
        raise ValueError("class labels must lie in 1..6")
    return arr


def write_atomic(path, data):
    """Write bytes or text to path via a temp file + rename."""
    mode = "wb" if isinstance(data, bytes) else "w"
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj, path=None):
    """Deterministic JSON serialization; returns text, optionally writing it."""
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is not None:
        write_atomic(path, text)
    return text
