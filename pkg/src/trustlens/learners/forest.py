"""Random forest: bagged CART trees, Gini impurity, per-split feature
subsampling, vote-fraction probabilities."""

from __future__ import annotations

import numpy as np

from trustlens.learners.base import Classifier, as_matrix, check_training_set


class _Tree:
    """CART tree stored as parallel arrays (feature -1 marks a leaf)."""

    __slots__ = ("feature", "threshold", "left", "right", "counts", "votes")

    def __init__(self):
        self.feature = None
        self.threshold = None
        self.left = None
        self.right = None
        self.counts = None  # (nodes, 2) class counts
        self.votes = None  # per-node argmax class

    def fit(self, X, y, rng, max_depth, min_split, k_features):
        n, d = X.shape
        feature, threshold, left, right, counts = [], [], [], [], []

        def new_node(idx):
            c1 = int(y[idx].sum())
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            counts.append((len(idx) - c1, c1))
            return len(feature) - 1

        root_idx = np.arange(n)
        stack = [(new_node(root_idx), root_idx, 0)]
        while stack:
            node, idx, depth = stack.pop()
            c0, c1 = counts[node]
            m = c0 + c1
            if c0 == 0 or c1 == 0 or m < min_split:
                continue
            if max_depth is not None and depth >= max_depth:
                continue
            node_gini = 1.0 - ((c0 / m) ** 2 + (c1 / m) ** 2)
            feat_subset = rng.choice(d, size=k_features, replace=False)
            best = self._best_split(X, y, idx, feat_subset, node_gini)
            if best is None:
                continue
            f, t = best
            go_left = X[idx, f] <= t
            left_idx, right_idx = idx[go_left], idx[~go_left]
            feature[node] = f
            threshold[node] = t
            left[node] = new_node(left_idx)
            right[node] = new_node(right_idx)
            stack.append((left[node], left_idx, depth + 1))
            stack.append((right[node], right_idx, depth + 1))

        self.feature = np.array(feature, dtype=np.int32)
        self.threshold = np.array(threshold, dtype=float)
        self.left = np.array(left, dtype=np.int32)
        self.right = np.array(right, dtype=np.int32)
        self.counts = np.array(counts, dtype=np.int64)
        self.votes = np.argmax(self.counts, axis=1).astype(np.int8)
        return self

    @staticmethod
    def _best_split(X, y, idx, feat_subset, node_gini):
        """Exhaustive threshold search over the sampled features.

        All candidate columns are sorted in one call; candidates sit midway
        between distinct consecutive values and Gini comes from cumulative
        class counts. Zero-improvement splits are allowed (XOR-like patterns
        need them); children always shrink, so growth still terminates.
        """
        n = len(idx)
        if n < 2:
            return None
        sub = X[np.ix_(idx, feat_subset)]  # (n, k)
        order = np.argsort(sub, axis=0, kind="stable")
        v = np.take_along_axis(sub, order, axis=0)
        ones = np.cumsum(y[idx][order], axis=0, dtype=np.int64)
        valid = v[1:] > v[:-1]  # (n-1, k)
        if not valid.any():
            return None
        m_left = np.arange(1, n, dtype=np.int64)[:, None]
        m_right = n - m_left
        l1 = ones[:-1]
        l0 = m_left - l1
        r1 = ones[-1] - l1
        r0 = m_right - r1
        gini_left = 1.0 - (l0 * l0 + l1 * l1) / (m_left * m_left)
        gini_right = 1.0 - (r0 * r0 + r1 * r1) / (m_right * m_right)
        weighted = (m_left * gini_left + m_right * gini_right) / n
        weighted[~valid] = np.inf
        flat = int(np.argmin(weighted))
        if weighted.flat[flat] > node_gini + 1e-12:
            return None
        cut, col = divmod(flat, len(feat_subset))
        return (int(feat_subset[col]),
                float((v[cut, col] + v[cut + 1, col]) / 2.0))

    def predict_votes(self, X):
        """Vectorized root-to-leaf descent; returns each row's leaf vote."""
        idx = np.zeros(X.shape[0], dtype=np.int32)
        while True:
            internal = self.feature[idx] >= 0
            if not internal.any():
                break
            cur = idx[internal]
            f = self.feature[cur]
            go_left = X[internal, f] <= self.threshold[cur]
            idx[internal] = np.where(go_left, self.left[cur], self.right[cur])
        return self.votes[idx]

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        tree = cls()
        tree.feature = np.array(d["feature"], dtype=np.int32)
        tree.threshold = np.array(d["threshold"], dtype=float)
        tree.left = np.array(d["left"], dtype=np.int32)
        tree.right = np.array(d["right"], dtype=np.int32)
        tree.counts = np.array(d["counts"], dtype=np.int64)
        tree.votes = np.argmax(tree.counts, axis=1).astype(np.int8)
        return tree


class RandomForest(Classifier):
    kind = "random_forest"

    def __init__(self, n_trees=100, max_depth=None, min_split=2, seed=0):
        if n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if min_split < 2:
            raise ValueError("min_split must be >= 2")
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_split = min_split
        self.seed = seed
        self.trees = []

    def fit(self, X, y):
        X, y = check_training_set(X, y)
        n, d = X.shape
        k_features = max(1, int(np.sqrt(d)))
        seeds = np.random.SeedSequence(self.seed).spawn(self.n_trees)
        self.trees = []
        for tree_seed in seeds:
            rng = np.random.default_rng(tree_seed)
            bag = rng.integers(0, n, size=n)
            tree = _Tree().fit(X[bag], y[bag], rng, self.max_depth,
                               self.min_split, k_features)
            self.trees.append(tree)
        return self

    def predict_proba(self, X):
        if not self.trees:
            raise ValueError("model not fitted")
        X = as_matrix(X)
        votes = np.zeros(X.shape[0], dtype=float)
        for tree in self.trees:
            votes += tree.predict_votes(X)
        p1 = votes / len(self.trees)
        return np.column_stack([1.0 - p1, p1])

    def get_params(self):
        return {"n_trees": self.n_trees, "max_depth": self.max_depth,
                "min_split": self.min_split, "seed": self.seed}

    def to_dict(self):
        return {
            "kind": self.kind,
            "params": self.get_params(),
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d):
        model = cls(**d["params"])
        model.trees = [_Tree.from_dict(t) for t in d["trees"]]
        return model


def train_random_forest(X, y, n_trees=100, max_depth=None, min_split=2, seed=0):
    return RandomForest(n_trees=n_trees, max_depth=max_depth,
                        min_split=min_split, seed=seed).fit(X, y)
