"""The three probabilistic classifiers and their persistence format."""

from __future__ import annotations

import json
from pathlib import Path

from trustlens.model import LearnerKind
from trustlens.learners.forest import RandomForest, train_random_forest
from trustlens.learners.mlp import MultilayerPerceptron, train_mlp
from trustlens.learners.svm import SupportVectorMachine, train_svm

SNAPSHOT_VERSION = 1

_CLASSES = {
    RandomForest.kind: RandomForest,
    SupportVectorMachine.kind: SupportVectorMachine,
    MultilayerPerceptron.kind: MultilayerPerceptron,
}

_TRAINERS = {
    LearnerKind.RANDOM_FOREST: train_random_forest,
    LearnerKind.SVM: train_svm,
    LearnerKind.MLP: train_mlp,
}


def train(kind, X, y, seed=0, **params):
    """Train any learner by kind; params are that learner's keyword args."""
    kind = LearnerKind(kind)
    return _TRAINERS[kind](X, y, seed=seed, **params)


def save_model(model, path) -> None:
    snapshot = {"version": SNAPSHOT_VERSION, "model": model.to_dict()}
    Path(path).write_text(json.dumps(snapshot), encoding="utf-8")


def load_model(path):
    snapshot = json.loads(Path(path).read_text(encoding="utf-8"))
    if snapshot.get("version") != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {snapshot.get('version')!r}")
    payload = snapshot["model"]
    cls = _CLASSES.get(payload.get("kind"))
    if cls is None:
        raise ValueError(f"unknown model kind {payload.get('kind')!r}")
    return cls.from_dict(payload)


__all__ = [
    "MultilayerPerceptron",
    "RandomForest",
    "SupportVectorMachine",
    "load_model",
    "save_model",
    "train",
    "train_mlp",
    "train_random_forest",
    "train_svm",
]
