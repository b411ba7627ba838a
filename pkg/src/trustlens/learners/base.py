"""Shared plumbing for the three classifiers.

Every learner exposes fit(X, y), predict_proba(X) -> (n, 2) rows summing
to 1, and predict(X) = argmax of the probabilities. Training is rejected
unless both classes are present.
"""

from __future__ import annotations

import numpy as np


def check_training_set(X, y):
    """Validate and coerce a training set; both classes must appear."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-d, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ValueError(f"y shape {y.shape} does not match X rows {X.shape[0]}")
    if X.shape[0] < 2 or len(np.unique(y)) < 2:
        raise ValueError("degenerate training set")
    if not set(np.unique(y)) <= {0, 1}:
        raise ValueError(f"labels must be 0/1, got {sorted(set(y.tolist()))}")
    return X, y


def as_matrix(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    return X


class Classifier:
    """Base: predict via argmax over predict_proba (ties pick class 0)."""

    def predict_proba(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)
