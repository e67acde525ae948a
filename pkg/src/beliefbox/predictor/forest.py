"""Random forest of CART regression trees.

Each tree is grown on a bootstrap sample. At every node a random subset of
features is searched for the threshold minimizing the summed squared error
of the two children; if none of the drawn features can split the node the
remaining features are tried before giving up, as scikit-learn does.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError


@dataclass
class RegressionTree:
    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)
    seed: int | None = None

    def _add(self, value: float) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.value) - 1

    @property
    def n_nodes(self) -> int:
        return len(self.value)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty(len(X))
        for i, row in enumerate(X):
            node = 0
            while self.feature[node] >= 0:
                node = self.left[node] if row[self.feature[node]] <= self.threshold[node] else self.right[node]
            out[i] = self.value[node]
        return out

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "value": self.value,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        return cls(
            [int(v) for v in d["feature"]],
            [float(v) for v in d["threshold"]],
            [int(v) for v in d["left"]],
            [int(v) for v in d["right"]],
            [float(v) for v in d["value"]],
            d.get("seed"),
        )


def _best_split(Xn: np.ndarray, yn: np.ndarray, features: np.ndarray) -> tuple[int, float, float] | None:
    """Best (feature, threshold, sse) over ``features`` or None if none splits."""
    cols = Xn[:, features]
    order = np.argsort(cols, axis=0, kind="stable")
    xs = np.take_along_axis(cols, order, axis=0)
    ys = yn[order]
    n = len(yn)
    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys * ys, axis=0)
    total, total_sq = csum[-1], csq[-1]
    nl = np.arange(1, n, dtype=float)[:, None]
    nr = n - nl
    sl, sql = csum[:-1], csq[:-1]
    sse = (sql - sl * sl / nl) + ((total_sq - sql) - (total - sl) ** 2 / nr)
    valid = xs[1:] > xs[:-1]
    if not valid.any():
        return None
    sse = np.where(valid, sse, np.inf)
    # column-major argmin: ties resolve to the earliest feature, then position
    flat = int(np.argmin(sse.T))
    j, i = divmod(flat, n - 1)
    threshold = (xs[i, j] + xs[i + 1, j]) / 2.0
    if not threshold < xs[i + 1, j]:
        threshold = xs[i, j]
    return int(features[j]), float(threshold), float(sse[i, j])


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    features_per_split: int,
    min_split: int = 2,
    max_depth: int | None = None,
) -> RegressionTree:
    tree = RegressionTree()
    p = X.shape[1]
    root = tree._add(float(y.mean()))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yn = y[idx]
        if len(idx) < min_split or np.all(yn == yn[0]) or (max_depth is not None and depth >= max_depth):
            continue
        Xn = X[idx]
        perm = rng.permutation(p)
        split = _best_split(Xn, yn, np.sort(perm[:features_per_split]))
        if split is None and features_per_split < p:
            split = _best_split(Xn, yn, np.sort(perm[features_per_split:]))
        if split is None:
            continue
        f, thr, _ = split
        go_left = Xn[:, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        l_node = tree._add(float(y[li].mean()))
        r_node = tree._add(float(y[ri].mean()))
        tree.feature[node] = f
        tree.threshold[node] = thr
        tree.left[node] = l_node
        tree.right[node] = r_node
        stack.append((r_node, ri, depth + 1))
        stack.append((l_node, li, depth + 1))
    return tree


@dataclass
class ForestModel:
    trees: list[RegressionTree]
    features_per_split: int
    min_split: int
    seed: int
    bootstrap: bool = True

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.mean([t.predict(X) for t in self.trees], axis=0)

    def to_dict(self) -> dict:
        return {
            "kind": "forest",
            "features_per_split": self.features_per_split,
            "min_split": self.min_split,
            "seed": self.seed,
            "bootstrap": self.bootstrap,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls(
            [RegressionTree.from_dict(t) for t in d["trees"]],
            int(d["features_per_split"]),
            int(d["min_split"]),
            int(d["seed"]),
            bool(d.get("bootstrap", True)),
        )


def fit_forest(
    X,
    y,
    trees: int = 100,
    features_per_split: int | None = None,
    min_split: int = 2,
    seed: int = 0,
    bootstrap: bool = True,
    max_depth: int | None = None,
) -> ForestModel:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(y) == 0 or X.shape[0] != len(y):
        raise DomainError(f"X has {X.shape[0]} rows but y has {len(y)}")
    if len(y) < 2:
        raise DomainError("a forest needs at least two training rows")
    if trees < 1:
        raise DomainError("need at least one tree")
    n, p = X.shape
    mtry = max(1, p // 3) if features_per_split is None else int(features_per_split)
    mtry = min(max(1, mtry), p)
    tree_seeds = np.random.default_rng(seed).integers(0, 2**32, size=trees)
    built = []
    for ts in tree_seeds:
        rng = np.random.default_rng(int(ts))
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        tree = build_tree(X[idx], y[idx], rng, mtry, min_split, max_depth)
        tree.seed = int(ts)
        built.append(tree)
    return ForestModel(built, mtry, min_split, int(seed), bootstrap)
