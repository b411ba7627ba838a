"""Pool-based active learning: ambiguity scoring, batch selection, the
retrain loop, and cross-validated evaluation.

Each round trains on the labeled set, scores it by stratified k-fold CV,
selects the most ambiguous unlabeled batch, asks the oracle for labels,
and moves the batch over. Per-round seeds derive from base_seed +
round_index, so any driver that replays rounds with the same derivation
reproduces the curve exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np

from trustlens import learners, preprocess
from trustlens.model import (
    FeatureVector,
    LabeledInstance,
    LabelSource,
    LearnerKind,
    MetricsReport,
    ModelState,
    ValidationError,
)

STRATEGIES = ("uncertainty", "margin", "entropy", "random")

DEFAULT_BATCH_SIZE = 100
DEFAULT_MAX_ROUNDS = 50
DEFAULT_MIN_GAIN = 0.005
DEFAULT_FOLDS = 10

CURVE_COLUMNS = (
    "round", "labeled_size", "accuracy",
    "precision_0", "recall_0", "f1_0",
    "precision_1", "recall_1", "f1_1",
)


def _check_probs(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("probability vector needs >= 2 entries")
    if abs(float(p.sum()) - 1.0) > 1e-6 or (p < -1e-12).any():
        raise ValueError(f"not a probability vector: {p}")
    return p


def uncertainty(p) -> float:
    """1 - confidence of the top prediction; higher is more ambiguous."""
    p = _check_probs(p)
    return 1.0 - float(p.max())


def margin(p) -> float:
    """Gap between the two most likely classes; lower is more ambiguous."""
    p = _check_probs(p)
    top2 = np.sort(p)[-2:]
    return float(top2[1] - top2[0])


def entropy(p) -> float:
    """Shannon entropy in nats, with 0 ln 0 = 0; higher is more ambiguous."""
    p = _check_probs(p)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


@dataclass
class Pool:
    """Labeled seed plus the unlabeled pool the loop draws from."""

    labeled: List[LabeledInstance]
    unlabeled: List[FeatureVector]
    batch_size: int = DEFAULT_BATCH_SIZE

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
        labeled_ids = [inst.user_id for inst in self.labeled]
        unlabeled_ids = [v.user_id for v in self.unlabeled]
        if len(set(labeled_ids)) != len(labeled_ids):
            raise ValidationError("duplicate user_id in labeled set")
        if len(set(unlabeled_ids)) != len(unlabeled_ids):
            raise ValidationError("duplicate user_id in unlabeled pool")
        overlap = set(labeled_ids) & set(unlabeled_ids)
        if overlap:
            raise ValidationError(
                f"user in both labeled and unlabeled: {sorted(overlap)[0]!r}")

    def absorb(self, instances: Sequence[LabeledInstance]) -> None:
        """Move freshly labeled instances out of the unlabeled pool."""
        ids = {inst.user_id for inst in instances}
        known = {v.user_id for v in self.unlabeled}
        missing = ids - known
        if missing:
            raise ValidationError(
                f"labeled instance not in unlabeled pool: {sorted(missing)[0]!r}")
        self.unlabeled = [v for v in self.unlabeled if v.user_id not in ids]
        self.labeled = list(self.labeled) + list(instances)


def select_batch(
    pool: Pool,
    model,
    strategy: str,
    feature_names: Optional[Sequence[str]] = None,
    rng: Optional[np.random.Generator] = None,
) -> List[FeatureVector]:
    """Up to batch_size unlabeled instances, most ambiguous first.

    Ties break by ascending user_id; the random strategy is a seeded
    permutation control.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if not pool.unlabeled:
        return []
    k = min(pool.batch_size, len(pool.unlabeled))
    if strategy == "random":
        rng = rng if rng is not None else np.random.default_rng(0)
        order = rng.permutation(len(pool.unlabeled))[:k]
        return [pool.unlabeled[i] for i in order]

    names = list(feature_names) if feature_names is not None \
        else preprocess.feature_mask("default")
    probs = model.predict_proba(preprocess.matrix(pool.unlabeled, names))
    if strategy == "uncertainty":
        scores = 1.0 - probs.max(axis=1)
        descending = True
    elif strategy == "margin":
        top2 = np.sort(probs, axis=1)[:, -2:]
        scores = top2[:, 1] - top2[:, 0]
        descending = False
    else:  # entropy
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(probs > 0, np.log(np.where(probs > 0, probs, 1.0)), 0.0)
        scores = -(probs * logs).sum(axis=1)
        descending = True
    keyed = sorted(
        range(len(pool.unlabeled)),
        key=lambda i: (-scores[i] if descending else scores[i],
                       pool.unlabeled[i].user_id),
    )
    return [pool.unlabeled[i] for i in keyed[:k]]


def _stratified_folds(y: np.ndarray, folds: int, rng: np.random.Generator):
    """Fold index per sample, class proportions preserved."""
    assignment = np.empty(len(y), dtype=int)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        for fold, chunk in enumerate(np.array_split(idx, folds)):
            assignment[chunk] = fold
    return assignment


def evaluate_cv(
    labeled: Sequence[LabeledInstance],
    learner_kind,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
    feature_names: Optional[Sequence[str]] = None,
    params: Optional[dict] = None,
) -> MetricsReport:
    """Stratified k-fold CV, confusion counts aggregated across folds."""
    labeled = list(labeled)
    if len(labeled) < folds:
        raise ValueError(
            f"need at least {folds} instances for {folds}-fold CV, got {len(labeled)}")
    names = list(feature_names) if feature_names is not None \
        else preprocess.feature_mask("default")
    params = dict(params or {})
    X = preprocess.matrix([inst.features for inst in labeled], names)
    y = np.array([inst.label for inst in labeled], dtype=int)
    if len(np.unique(y)) < 2:
        raise ValueError("degenerate training set")

    rng = np.random.default_rng(seed)
    assignment = _stratified_folds(y, folds, rng)
    tp = fp = fn = tn = 0
    for fold in range(folds):
        test = assignment == fold
        if not test.any():
            continue
        model = learners.train(learner_kind, X[~test], y[~test],
                               seed=seed, **params)
        pred = model.predict(X[test])
        truth = y[test]
        tp += int(np.sum((truth == 1) & (pred == 1)))
        fp += int(np.sum((truth == 0) & (pred == 1)))
        fn += int(np.sum((truth == 1) & (pred == 0)))
        tn += int(np.sum((truth == 0) & (pred == 0)))
    return MetricsReport(tp=tp, fp=fp, fn=fn, tn=tn, folds=folds)


def _curve_point(round_index: int, labeled_size: int, report: MetricsReport) -> dict:
    return {
        "round": round_index,
        "labeled_size": labeled_size,
        "accuracy": report.accuracy,
        "precision_0": report.precision(0),
        "recall_0": report.recall(0),
        "f1_0": report.f1(0),
        "precision_1": report.precision(1),
        "recall_1": report.recall(1),
        "f1_1": report.f1(1),
    }


def round_seed(base_seed: int, round_index: int) -> int:
    """Per-round seed derivation shared by every loop driver."""
    return base_seed + round_index


def run_round(
    pool: Pool,
    learner_kind,
    strategy: str,
    round_index: int,
    base_seed: int = 0,
    feature_names: Optional[Sequence[str]] = None,
    params: Optional[dict] = None,
    folds: int = DEFAULT_FOLDS,
):
    """One loop round minus the labeling: (model, report, batch).

    Deterministic given (pool contents, kind, strategy, round_index,
    base_seed); the service replays rounds through this same function.
    """
    seed = round_seed(base_seed, round_index)
    names = list(feature_names) if feature_names is not None \
        else preprocess.feature_mask("default")
    params = dict(params or {})
    report = evaluate_cv(pool.labeled, learner_kind, folds=folds, seed=seed,
                         feature_names=names, params=params)
    X = preprocess.matrix([inst.features for inst in pool.labeled], names)
    y = np.array([inst.label for inst in pool.labeled], dtype=int)
    model = learners.train(learner_kind, X, y, seed=seed, **params)
    batch = select_batch(pool, model, strategy, feature_names=names,
                         rng=np.random.default_rng(seed))
    return model, report, batch


def run_loop(
    pool: Pool,
    learner_kind,
    strategy: str,
    oracle: Callable[[FeatureVector], int],
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    min_gain: float = DEFAULT_MIN_GAIN,
    base_seed: int = 0,
    feature_names: Optional[Sequence[str]] = None,
    params: Optional[dict] = None,
    folds: int = DEFAULT_FOLDS,
):
    """Full retrain loop; returns (ModelState, learning curve).

    Stops when the unlabeled pool empties, max_rounds is reached, or the
    CV-accuracy gain stays below min_gain for 2 consecutive rounds (the
    first round's gain is 0 by definition). An oracle failure propagates
    with the pool untouched for that round, so the loop is resumable.
    """
    if not pool.labeled:
        raise ValueError("labeled seed set is empty")
    if len({inst.label for inst in pool.labeled}) < 2:
        raise ValueError("degenerate training set")

    kind = LearnerKind(learner_kind)
    state = ModelState(learner_kind=kind, hyperparameters=dict(params or {}))
    curve: List[dict] = []
    prev_accuracy = None
    rounds_below = 0
    for round_index in range(1, max_rounds + 1):
        model, report, batch = run_round(
            pool, kind, strategy, round_index, base_seed=base_seed,
            feature_names=feature_names, params=params, folds=folds)
        state.model = model
        state.trained = True
        state.training_set_size = len(pool.labeled)
        state.record(round_index, report)
        curve.append(_curve_point(round_index, len(pool.labeled), report))

        gain = 0.0 if prev_accuracy is None else report.accuracy - prev_accuracy
        prev_accuracy = report.accuracy
        rounds_below = rounds_below + 1 if gain < min_gain else 0
        if rounds_below >= 2:
            break
        if not batch:
            break
        labels = [oracle(vector) for vector in batch]
        pool.absorb([
            LabeledInstance(features=vector, label=label,
                            source=LabelSource.ACTIVE_LOOP)
            for vector, label in zip(batch, labels)
        ])
    return state, curve


def write_curve(curve: Iterable[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CURVE_COLUMNS)
        writer.writeheader()
        for point in curve:
            writer.writerow({k: point[k] for k in CURVE_COLUMNS})


def read_curve(path) -> List[dict]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CURVE_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(
                f"curve file missing columns: {sorted(missing)}")
        for row in reader:
            point = {"round": int(row["round"]),
                     "labeled_size": int(row["labeled_size"])}
            for k in CURVE_COLUMNS[2:]:
                point[k] = float(row[k])
            out.append(point)
    return out


def load_seed_labels(path) -> dict:
    """user_id -> label map from a JSONL seed file."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            out[str(record["user_id"])] = int(record["label"])
    return out


def build_pool(
    vectors: Sequence[FeatureVector],
    seed_labels: dict,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> Pool:
    """Split scored vectors into a labeled seed and the unlabeled pool."""
    labeled, unlabeled = [], []
    for vector in vectors:
        label = seed_labels.get(vector.user_id)
        if label is None:
            unlabeled.append(vector)
        else:
            labeled.append(LabeledInstance(
                features=vector, label=label, source=LabelSource.SEED))
    return Pool(labeled=labeled, unlabeled=unlabeled, batch_size=batch_size)
