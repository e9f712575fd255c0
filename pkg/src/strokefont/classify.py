"""Stroke classifiers over 25-code feature vectors.

All four classifiers are implemented here rather than imported: the codes
are small categorical values, so distances are Hamming, tree splits are
categorical equality tests, and naive Bayes uses add-one smoothed code
frequencies. Every estimator follows the sklearn fit/predict convention
and is deterministic given its stored state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import assets
from .base import BaseEstimator, NotFittedError, check_feature_matrix, check_labels, dump_json, write_atomic
from .features import CODE_VALUES, stroke_features
from .raster import crop_to_ink, full_kernel, morphology
from .strokes import decompose_full
from .thinning import thin

CLASSES = np.arange(1, 7)

# Tables are rendered with the full classifier column set; algorithms we
# do not ship stay blank.
TABLE_COLUMNS = [
    ("tree", "Decision Tree"),
    ("svm", "SVM"),
    ("knn", "KNN"),
    ("gboost", "Gradient Boost"),
    ("logreg", "Logistic Regression"),
    ("nb", "Naive Bayes"),
    ("forest", "Random Forest"),
]
UNIMPLEMENTED = {"svm", "gboost", "logreg"}


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = check_feature_matrix(self.X)
        self.y = check_labels(self.y, len(self.X))

    def __len__(self):
        return len(self.y)

    @classmethod
    def from_rows(cls, rows):
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != 26:
            raise ValueError("dataset rows must have 26 columns")
        return cls(rows[:, :25], rows[:, 25])

    def to_rows(self):
        return np.hstack([self.X, self.y[:, None]]).tolist()


def split(ds: Dataset, test_fraction: float, seed: int):
    """Stratified per-class split, deterministic given seed."""
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for label in np.unique(ds.y):
        idx = np.nonzero(ds.y == label)[0]
        if len(idx) < 2:
            raise ValueError(f"insufficient samples for class {label}")
        idx = idx[rng.permutation(len(idx))]
        n_test = min(len(idx) - 1, max(1, int(round(len(idx) * test_fraction))))
        test_idx.extend(idx[:n_test])
        train_idx.extend(idx[n_test:])
    train_idx.sort()
    test_idx.sort()
    return (Dataset(ds.X[train_idx], ds.y[train_idx]),
            Dataset(ds.X[test_idx], ds.y[test_idx]))


def _majority(labels):
    """Most frequent label; ties resolve to the smaller label."""
    return int(np.argmax(np.bincount(labels, minlength=7)[1:]) + 1)


class KNNClassifier(BaseEstimator):
    """k nearest neighbors under Hamming distance over the 25 codes."""

    def __init__(self, k=3):
        self.k = k

    def fit(self, X, y):
        self.X_ = check_feature_matrix(X)
        self.y_ = check_labels(y, len(self.X_))
        return self

    def predict(self, X):
        if not hasattr(self, "X_"):
            raise NotFittedError("KNNClassifier is not fitted")
        X = check_feature_matrix(X)
        distances = (X[:, None, :] != self.X_[None, :, :]).sum(axis=2)
        out = np.empty(len(X), dtype=np.int64)
        for i, row in enumerate(distances):
            nearest = np.argsort(row, kind="stable")[:self.k]
            out[i] = _majority(self.y_[nearest])
        return out

    def to_state(self):
        return {"X": self.X_.tolist(), "y": self.y_.tolist()}

    def from_state(self, state):
        return self.fit(state["X"], state["y"])


def _gini(counts):
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return 1.0 - float((p * p).sum())


class DecisionTreeClassifier(BaseEstimator):
    """CART-style tree with categorical equality splits and Gini impurity."""

    def __init__(self, max_depth=None, min_samples_split=2, max_features=None, random_state=None):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.random_state = random_state

    def fit(self, X, y):
        X = check_feature_matrix(X)
        y = check_labels(y, len(X))
        rng = None
        if self.max_features is not None:
            rng = np.random.default_rng(self.random_state)
        self.tree_ = self._grow(X, y, depth=0, rng=rng)
        return self

    def _candidate_columns(self, rng):
        if rng is None:
            return range(25)
        k = min(self.max_features, 25)
        return sorted(rng.choice(25, size=k, replace=False).tolist())

    def _grow(self, X, y, depth, rng):
        counts = np.bincount(y, minlength=7)[1:]
        label = int(np.argmax(counts) + 1)
        if (len(np.unique(y)) == 1
                or len(y) < self.min_samples_split
                or (self.max_depth is not None and depth >= self.max_depth)):
            return {"leaf": label}
        parent = _gini(counts)
        best = None  # (gain, col, code)
        for col in self._candidate_columns(rng):
            column = X[:, col]
            for code in np.unique(column).tolist():
                mask = column == code
                if not mask.any() or mask.all():
                    continue
                left = np.bincount(y[mask], minlength=7)[1:]
                right = counts - left
                n_left = left.sum()
                gain = parent - (n_left * _gini(left) + (len(y) - n_left) * _gini(right)) / len(y)
                if best is None or gain > best[0] + 1e-12:
                    best = (gain, col, code)
        if best is None or best[0] <= 1e-12:
            return {"leaf": label}
        _, col, code = best
        mask = X[:, col] == code
        return {
            "col": int(col),
            "code": int(code),
            "eq": self._grow(X[mask], y[mask], depth + 1, rng),
            "ne": self._grow(X[~mask], y[~mask], depth + 1, rng),
        }

    def predict(self, X):
        if not hasattr(self, "tree_"):
            raise NotFittedError("DecisionTreeClassifier is not fitted")
        X = check_feature_matrix(X)
        return np.array([self._walk(row) for row in X], dtype=np.int64)

    def _walk(self, row):
        node = self.tree_
        while "leaf" not in node:
            node = node["eq"] if row[node["col"]] == node["code"] else node["ne"]
        return node["leaf"]

    def to_state(self):
        return {"tree": self.tree_}

    def from_state(self, state):
        self.tree_ = state["tree"]
        return self


class NaiveBayesClassifier(BaseEstimator):
    """Per-class categorical code frequencies with add-one smoothing."""

    def __init__(self, alpha=1.0):
        self.alpha = alpha

    def fit(self, X, y):
        X = check_feature_matrix(X)
        y = check_labels(y, len(X))
        self.priors_ = np.zeros(6)
        self.counts_ = np.zeros((6, 25, 11))  # code value used as last index (10 = endpoint)
        for cls in CLASSES:
            rows = X[y == cls]
            self.priors_[cls - 1] = len(rows)
            for col in range(25):
                vals, n = np.unique(rows[:, col], return_counts=True)
                self.counts_[cls - 1, col, vals] = n
        self.total_ = self.priors_.copy()
        return self

    def predict(self, X):
        if not hasattr(self, "counts_"):
            raise NotFittedError("NaiveBayesClassifier is not fitted")
        X = check_feature_matrix(X)
        n_values = len(CODE_VALUES)
        out = np.empty(len(X), dtype=np.int64)
        total = self.priors_.sum()
        for i, row in enumerate(X):
            scores = np.full(6, -np.inf)
            for cls in CLASSES:
                n_cls = self.total_[cls - 1]
                if n_cls == 0:
                    continue
                logp = np.log(n_cls / total)
                for col in range(25):
                    count = self.counts_[cls - 1, col, row[col]]
                    logp += np.log((count + self.alpha) / (n_cls + self.alpha * n_values))
                scores[cls - 1] = logp
            out[i] = int(np.argmax(scores) + 1)  # argmax breaks ties toward the smaller label
        return out

    def to_state(self):
        return {"priors": self.priors_.tolist(), "counts": self.counts_.tolist()}

    def from_state(self, state):
        self.priors_ = np.array(state["priors"], dtype=float)
        self.counts_ = np.array(state["counts"], dtype=float)
        self.total_ = self.priors_.copy()
        return self


class RandomForestClassifier(BaseEstimator):
    """Bootstrapped categorical trees with majority vote."""

    def __init__(self, n_trees=25, max_features=5, seed=0):
        self.n_trees = n_trees
        self.max_features = max_features
        self.seed = seed

    def fit(self, X, y):
        X = check_feature_matrix(X)
        y = check_labels(y, len(X))
        rng = np.random.default_rng(self.seed)
        tree_seeds = rng.integers(0, 2 ** 31, size=self.n_trees)
        self.trees_ = []
        for t in range(self.n_trees):
            idx = rng.integers(0, len(y), size=len(y))
            tree = DecisionTreeClassifier(max_features=self.max_features,
                                          random_state=int(tree_seeds[t]))
            self.trees_.append(tree.fit(X[idx], y[idx]))
        return self

    def predict(self, X):
        if not hasattr(self, "trees_"):
            raise NotFittedError("RandomForestClassifier is not fitted")
        X = check_feature_matrix(X)
        votes = np.stack([tree.predict(X) for tree in self.trees_])
        return np.array([_majority(votes[:, i]) for i in range(len(X))], dtype=np.int64)

    def to_state(self):
        return {"trees": [t.to_state() for t in self.trees_]}

    def from_state(self, state):
        self.trees_ = []
        for tree_state in state["trees"]:
            tree = DecisionTreeClassifier(max_features=self.max_features)
            self.trees_.append(tree.from_state(tree_state))
        return self


ALGORITHMS = {
    "knn": KNNClassifier,
    "tree": DecisionTreeClassifier,
    "nb": NaiveBayesClassifier,
    "forest": RandomForestClassifier,
}

MODEL_FORMAT = 1


@dataclass
class Model:
    algo: str
    estimator: object
    meta: dict = field(default_factory=dict)

    def predict_one(self, vector) -> int:
        return int(self.estimator.predict(np.asarray(vector).reshape(1, 25))[0])


def train(ds: Dataset, algo: str, **hyperparams) -> Model:
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}; expected one of {sorted(ALGORITHMS)}")
    if len(ds) == 0:
        raise ValueError("cannot train on an empty dataset")
    estimator = ALGORITHMS[algo](**hyperparams)
    estimator.fit(ds.X, ds.y)
    return Model(algo=algo, estimator=estimator, meta={"hyperparams": hyperparams})


def predict(model: Model, vector) -> int:
    return model.predict_one(vector)


def save_model(model: Model, path):
    payload = {
        "format": MODEL_FORMAT,
        "algo": model.algo,
        "params": model.estimator.get_params(),
        "meta": model.meta,
        "state": model.estimator.to_state(),
    }
    write_atomic(path, dump_json(payload))


def load_model(path) -> Model:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format {payload.get('format')!r}")
    algo = payload["algo"]
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r} in model file")
    estimator = ALGORITHMS[algo](**payload.get("params", {}))
    estimator.from_state(payload["state"])
    return Model(algo=algo, estimator=estimator, meta=payload.get("meta", {}))


@dataclass
class EvalReport:
    per_class_accuracy: dict
    overall_accuracy: float
    confusion: np.ndarray  # rows = true class, cols = predicted
    support: dict

    def to_dict(self):
        return {
            "per_class_accuracy": {str(k): v for k, v in self.per_class_accuracy.items()},
            "overall_accuracy": self.overall_accuracy,
            "confusion": self.confusion.tolist(),
            "support": {str(k): v for k, v in self.support.items()},
        }


def evaluate(model: Model, test: Dataset) -> EvalReport:
    if len(test) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    predicted = model.estimator.predict(test.X)
    confusion = np.zeros((6, 6), dtype=np.int64)
    for truth, pred in zip(test.y, predicted):
        confusion[truth - 1, pred - 1] += 1
    per_class = {}
    support = {}
    for cls in CLASSES:
        n = int(confusion[cls - 1].sum())
        support[int(cls)] = n
        per_class[int(cls)] = float(confusion[cls - 1, cls - 1] / n) if n else 0.0
    overall = float(np.trace(confusion) / confusion.sum())
    return EvalReport(per_class, overall, confusion, support)


def render_table(reports: dict, title: str) -> str:
    """Class-rows / classifier-columns accuracy table (blank = not shipped)."""
    header = ["Class"] + [label for _, label in TABLE_COLUMNS]
    rows = []
    for cls in CLASSES:
        row = [f"Class {cls}"]
        for key, _ in TABLE_COLUMNS:
            report = reports.get(key)
            row.append(f"{report.per_class_accuracy[int(cls)]:.2f}" if report else "-")
        rows.append(row)
    overall = ["Accuracy"]
    for key, _ in TABLE_COLUMNS:
        report = reports.get(key)
        overall.append(f"{report.overall_accuracy:.2f}" if report else "-")
    rows.append(overall)
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    lines = [title] if title else []
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(cell.ljust(w) for cell, w in zip(row, widths)) for row in rows)
    lines.append("(-: classifier not implemented in this toolkit)")
    return "\n".join(lines)


def _transform_points(points, angle_deg, sx, sy):
    theta = np.deg2rad(angle_deg)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    out = []
    for x, y in points:
        tx, ty = x * sx, y * sy
        out.append((tx * cos_t - ty * sin_t, tx * sin_t + ty * cos_t))
    return out


def _perturb_raster(img, rng):
    """Seeded +/-10% anisotropic scale, +/-15 degree rotation, 1-px jitter dilation."""
    angle = rng.uniform(-15.0, 15.0)
    sx = rng.uniform(0.9, 1.1)
    sy = rng.uniform(0.9, 1.1)
    dilate = rng.random() < 0.5
    ys, xs = np.nonzero(img)
    cx, cy = xs.mean(), ys.mean()
    moved = _transform_points([(x - cx, y - cy) for x, y in zip(xs, ys)], angle, sx, sy)
    min_x = min(p[0] for p in moved)
    min_y = min(p[1] for p in moved)
    pts = [(int(x - min_x + 0.5) + 1, int(y - min_y + 0.5) + 1) for x, y in moved]
    w = max(p[0] for p in pts) + 2
    h = max(p[1] for p in pts) + 2
    out = np.zeros((h, w), dtype=np.uint8)
    for x, y in pts:
        out[y, x] = 1
    out = morphology(out, "close", full_kernel())  # heal resampling pinholes
    if dilate:
        out = morphology(out, "dilate", full_kernel())
    return out


def synthesize_dataset(per_class: int, seed: int, perturb=True) -> Dataset:
    """Labeled dataset built from the bundled reference strokes.

    Each class contributes per_class seeded random variants which are run
    through the real preprocessing and feature pipeline; with perturb=False
    every variant is the untouched reference bitmap.
    """
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    rng = np.random.default_rng(seed)
    X, y = [], []
    for cls in assets.STROKE_CLASSES:
        base, _ = crop_to_ink(assets.reference_stroke(cls))
        for _ in range(per_class):
            raster = _perturb_raster(base, rng) if perturb else base
            # Real extraction path: skeletonize, decompose (sheds resampling
            # spurs), keep the main piece's normalized form.
            pieces = decompose_full(thin(raster)).strokes
            if not pieces:
                raise ValueError(f"reference stroke {cls} degenerated under perturbation")
            main = max(pieces, key=lambda s: int(s.crop.sum()))
            X.append(stroke_features(main.normalized))
            y.append(cls)
    return Dataset(np.array(X), np.array(y))
