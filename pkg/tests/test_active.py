"""Tests for ambiguity scoring, batch selection, and the retrain loop.

Selection tests drive ``select_batch`` with a stub model so the ranking
is fully controlled; loop tests run on a small two-cluster pool with a
lookup-table oracle so every stop condition can be reached quickly.
"""

import math

import numpy as np
import pytest

from conftest import blobs, make_vector
from trustlens import active
from trustlens.errors import OracleError
from trustlens.model import LabeledInstance, LabelSource, ValidationError

# ------------------------------------------------------- ambiguity scores


def test_uncertainty_examples():
    assert active.uncertainty([0.9, 0.1]) == pytest.approx(0.1, abs=1e-12)
    assert active.uncertainty([0.5, 0.5]) == pytest.approx(0.5, abs=1e-12)


def test_margin_examples():
    assert active.margin([0.9, 0.1]) == pytest.approx(0.8, abs=1e-12)
    assert active.margin([0.5, 0.5]) == pytest.approx(0.0, abs=1e-12)


def test_entropy_examples():
    assert active.entropy([0.9, 0.1]) == pytest.approx(
        0.32508297339144824, abs=1e-12)
    assert active.entropy([0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-12)
    # 0 ln 0 reads as 0, so a certain prediction has zero entropy
    assert active.entropy([1.0, 0.0]) == 0.0


def test_scores_handle_more_than_two_classes():
    p = [0.5, 0.3, 0.2]
    assert active.uncertainty(p) == pytest.approx(0.5, abs=1e-12)
    assert active.margin(p) == pytest.approx(0.2, abs=1e-12)
    assert active.entropy(p) == pytest.approx(
        -sum(v * math.log(v) for v in p), abs=1e-12)


@pytest.mark.parametrize("bad", [[0.7], [0.7, 0.7], [1.2, -0.2]])
def test_scores_reject_non_distributions(bad):
    for fn in (active.uncertainty, active.margin, active.entropy):
        with pytest.raises(ValueError):
            fn(bad)


# ------------------------------------------------------------------ pool


def seeded_instances(vectors, labels):
    return [
        LabeledInstance(features=v, label=lab, source=LabelSource.SEED)
        for v, lab in zip(vectors, labels)
    ]


def test_pool_rejects_overlap_and_duplicates():
    a, b = make_vector("a"), make_vector("b")
    with pytest.raises(ValidationError, match="both"):
        active.Pool(labeled=seeded_instances([a], [0]), unlabeled=[a, b])
    with pytest.raises(ValidationError, match="duplicate"):
        active.Pool(labeled=[], unlabeled=[b, make_vector("b")])
    with pytest.raises(ValidationError, match="batch_size"):
        active.Pool(labeled=[], unlabeled=[b], batch_size=0)


def test_pool_absorb_moves_instances():
    vs = [make_vector(f"u{i}") for i in range(4)]
    pool = active.Pool(labeled=[], unlabeled=list(vs), batch_size=2)
    pool.absorb(seeded_instances(vs[:2], [0, 1]))
    assert [v.user_id for v in pool.unlabeled] == ["u2", "u3"]
    assert [inst.user_id for inst in pool.labeled] == ["u0", "u1"]
    with pytest.raises(ValidationError, match="not in unlabeled"):
        pool.absorb(seeded_instances([make_vector("ghost")], [0]))


# -------------------------------------------------------- batch selection


class TableModel:
    """predict_proba driven by the followers column, for rigged rankings."""

    def __init__(self, p1_by_followers):
        self.table = p1_by_followers

    def predict_proba(self, X):
        p1 = np.array([self.table[int(round(v))] for v in X[:, 0]])
        return np.column_stack([1.0 - p1, p1])


def test_select_batch_takes_smallest_margins_first():
    # margins: a 0.1, b 0.5, c 0.2
    pool = active.Pool(
        labeled=[],
        unlabeled=[
            make_vector("a", followers=1),
            make_vector("b", followers=2),
            make_vector("c", followers=3),
        ],
        batch_size=2,
    )
    model = TableModel({1: 0.45, 2: 0.75, 3: 0.40})
    batch = active.select_batch(pool, model, "margin")
    assert [v.user_id for v in batch] == ["a", "c"]
    pool.batch_size = 100
    everything = active.select_batch(pool, model, "margin")
    assert [v.user_id for v in everything] == ["a", "c", "b"]


def test_select_batch_breaks_ties_by_user_id():
    pool = active.Pool(
        labeled=[],
        unlabeled=[
            make_vector("zz", followers=1),
            make_vector("aa", followers=2),
            make_vector("mm", followers=3),
        ],
        batch_size=3,
    )
    model = TableModel({1: 0.3, 2: 0.3, 3: 0.3})
    batch = active.select_batch(pool, model, "uncertainty")
    assert [v.user_id for v in batch] == ["aa", "mm", "zz"]


def test_select_batch_empty_pool_and_unknown_strategy():
    pool = active.Pool(labeled=[], unlabeled=[], batch_size=5)
    assert active.select_batch(pool, TableModel({}), "margin") == []
    pool = active.Pool(labeled=[], unlabeled=[make_vector("a", followers=1)])
    with pytest.raises(ValueError, match="unknown strategy"):
        active.select_batch(pool, TableModel({1: 0.5}), "sorted")


def test_select_batch_random_is_a_seeded_permutation():
    vs = [make_vector(f"u{i}", followers=i) for i in range(10)]
    pool = active.Pool(labeled=[], unlabeled=vs, batch_size=6)
    one = active.select_batch(pool, None, "random",
                              rng=np.random.default_rng(9))
    two = active.select_batch(pool, None, "random",
                              rng=np.random.default_rng(9))
    assert [v.user_id for v in one] == [v.user_id for v in two]
    ids = [v.user_id for v in one]
    assert len(set(ids)) == len(ids) == 6


def test_selection_order_matches_per_vector_scores():
    """Batch order must agree with ranking every row by the scalar score."""
    rng = np.random.default_rng(17)
    n = 40
    p1 = rng.uniform(0.01, 0.99, size=n)
    p1[5] = p1[25]  # engineered tie exercises the user_id fallback
    vs = [make_vector(f"u{i:02d}", followers=i) for i in range(n)]
    pool = active.Pool(labeled=[], unlabeled=vs, batch_size=n)
    model = TableModel({i: p1[i] for i in range(n)})

    scorers = {
        "uncertainty": (active.uncertainty, True),
        "margin": (active.margin, False),
        "entropy": (active.entropy, True),
    }
    for strategy, (fn, descending) in scorers.items():
        got = [v.user_id for v in active.select_batch(pool, model, strategy)]
        sign = -1.0 if descending else 1.0
        expected = sorted(
            (v.user_id for v in vs),
            key=lambda uid: (sign * fn([1.0 - p1[int(uid[1:])],
                                        p1[int(uid[1:])]]), uid),
        )
        assert got == expected, strategy


# -------------------------------------------------------------- cv + io


def cluster_pool(n=40, n_seed=12, batch_size=4, seed=3):
    """Two separable clusters as feature vectors plus a truth table."""
    X, y = blobs(n, seed=seed, separation=8.0)
    X = X - X.min() + 0.5  # engagement ratios must stay non-negative
    vs = [
        make_vector(f"u{i:03d}", retweet_ratio=float(X[i, 0]),
                    like_ratio=float(X[i, 1]))
        for i in range(n)
    ]
    truth = {f"u{i:03d}": int(y[i]) for i in range(n)}
    idx0 = [i for i in range(n) if y[i] == 0][: n_seed // 2]
    idx1 = [i for i in range(n) if y[i] == 1][: n_seed // 2]
    seed_ids = {f"u{i:03d}" for i in idx0 + idx1}
    labeled = seeded_instances(
        [v for v in vs if v.user_id in seed_ids],
        [truth[v.user_id] for v in vs if v.user_id in seed_ids],
    )
    unlabeled = [v for v in vs if v.user_id not in seed_ids]
    pool = active.Pool(labeled=labeled, unlabeled=unlabeled,
                       batch_size=batch_size)
    return pool, truth


NAMES = ["retweet_ratio", "like_ratio"]
FAST_RF = {"n_trees": 10, "max_depth": 6}


def test_evaluate_cv_perfect_on_separable_data():
    pool, _ = cluster_pool(n=30, n_seed=30)
    report = active.evaluate_cv(pool.labeled, "random_forest", folds=3,
                                feature_names=NAMES, params=FAST_RF)
    assert report.accuracy == 1.0
    assert report.tp + report.fp + report.fn + report.tn == 30


def test_evaluate_cv_needs_enough_instances():
    pool, _ = cluster_pool(n=30, n_seed=6)
    with pytest.raises(ValueError, match="at least"):
        active.evaluate_cv(pool.labeled, "random_forest", folds=10,
                           feature_names=NAMES)


def test_evaluate_cv_deterministic():
    pool, _ = cluster_pool(n=30, n_seed=20)
    kw = dict(folds=4, seed=5, feature_names=NAMES, params=FAST_RF)
    a = active.evaluate_cv(pool.labeled, "random_forest", **kw)
    b = active.evaluate_cv(pool.labeled, "random_forest", **kw)
    assert (a.tp, a.fp, a.fn, a.tn) == (b.tp, b.fp, b.fn, b.tn)


def test_curve_round_trip(tmp_path):
    curve = [
        {"round": 1, "labeled_size": 12, "accuracy": 0.5, "precision_0": 0.4,
         "recall_0": 0.6, "f1_0": 0.48, "precision_1": 0.7, "recall_1": 0.5,
         "f1_1": 0.5833333333333334},
        {"round": 2, "labeled_size": 16, "accuracy": 0.75, "precision_0": 1.0,
         "recall_0": 0.5, "f1_0": 0.6666666666666666, "precision_1": 0.6,
         "recall_1": 1.0, "f1_1": 0.75},
    ]
    path = tmp_path / "curve.csv"
    active.write_curve(curve, path)
    header = path.read_text().splitlines()[0]
    assert header == ("round,labeled_size,accuracy,precision_0,recall_0,"
                      "f1_0,precision_1,recall_1,f1_1")
    assert active.read_curve(path) == curve


def test_load_seed_labels(tmp_path):
    path = tmp_path / "seed.jsonl"
    path.write_text('{"user_id": "a", "label": 1}\n\n'
                    '{"user_id": 7, "label": 0}\n')
    assert active.load_seed_labels(path) == {"a": 1, "7": 0}


def test_build_pool_splits_on_seed_membership():
    vs = [make_vector(f"u{i}") for i in range(5)]
    pool = active.build_pool(vs, {"u1": 1, "u3": 0, "ghost": 1}, batch_size=2)
    assert [inst.user_id for inst in pool.labeled] == ["u1", "u3"]
    assert [inst.label for inst in pool.labeled] == [1, 0]
    assert all(inst.source is LabelSource.SEED for inst in pool.labeled)
    assert [v.user_id for v in pool.unlabeled] == ["u0", "u2", "u4"]
    assert pool.batch_size == 2


def test_build_pool_rejects_duplicate_vectors():
    vs = [make_vector("a"), make_vector("a")]
    with pytest.raises(ValidationError, match="duplicate"):
        active.build_pool(vs, {})


# -------------------------------------------------------------- run_loop


def run(pool, truth, **kw):
    kw.setdefault("folds", 3)
    kw.setdefault("params", FAST_RF)
    kw.setdefault("feature_names", NAMES)
    return active.run_loop(
        pool, "random_forest", kw.pop("strategy", "margin"),
        lambda v: truth[v.user_id], **kw)


def test_loop_unreachable_gain_stops_after_two_rounds():
    pool, truth = cluster_pool()
    state, curve = run(pool, truth, min_gain=1.0, max_rounds=50)
    # round 1 counts as a strike (its gain reads as 0), round 2 is the second
    assert [p["round"] for p in curve] == [1, 2]
    assert len(pool.labeled) == 12 + 4


def test_loop_stops_when_pool_runs_dry():
    pool, truth = cluster_pool(n=18, n_seed=12, batch_size=10)
    state, curve = run(pool, truth, min_gain=-1.0, max_rounds=50)
    # 6 unlabeled absorbed in round 1; round 2 selects nothing and stops
    assert [p["round"] for p in curve] == [1, 2]
    assert pool.unlabeled == []
    assert len(pool.labeled) == 18


def test_loop_grows_labeled_set_by_batch_each_round():
    pool, truth = cluster_pool()
    state, curve = run(pool, truth, min_gain=-1.0, max_rounds=3)
    assert [p["round"] for p in curve] == [1, 2, 3]
    assert [p["labeled_size"] for p in curve] == [12, 16, 20]
    assert len(pool.labeled) == 24
    assert state.trained and state.training_set_size == 20
    assert state.learner_kind.value == "random_forest"


def test_loop_random_strategy_never_duplicates_labels():
    pool, truth = cluster_pool()
    run(pool, truth, strategy="random", min_gain=-1.0, max_rounds=4)
    ids = [inst.user_id for inst in pool.labeled]
    assert len(set(ids)) == len(ids)


def test_loop_negative_min_gain_forces_max_rounds():
    pool, truth = cluster_pool(n=60, n_seed=12, batch_size=4)
    _, curve = run(pool, truth, min_gain=-1.0, max_rounds=6)
    assert [p["round"] for p in curve] == [1, 2, 3, 4, 5, 6]


def test_loop_oracle_failure_leaves_pool_resumable():
    pool, truth = cluster_pool()
    before_labeled = list(pool.labeled)
    before_unlabeled = list(pool.unlabeled)

    def oracle(vector):
        raise OracleError("annotator offline")

    with pytest.raises(OracleError):
        active.run_loop(pool, "random_forest", "margin", oracle,
                        min_gain=-1.0, folds=3, params=FAST_RF,
                        feature_names=NAMES)
    assert pool.labeled == before_labeled
    assert pool.unlabeled == before_unlabeled


def test_loop_rejects_empty_or_single_class_seed():
    pool, truth = cluster_pool()
    no_seed = active.Pool(labeled=[], unlabeled=pool.unlabeled)
    with pytest.raises(ValueError, match="empty"):
        active.run_loop(no_seed, "random_forest", "margin", lambda v: 0)
    one_class = active.Pool(
        labeled=[inst for inst in pool.labeled if inst.label == 0],
        unlabeled=pool.unlabeled)
    with pytest.raises(ValueError, match="degenerate"):
        active.run_loop(one_class, "random_forest", "margin", lambda v: 0)


def test_round_seed_derivation():
    assert active.round_seed(42, 1) == 43
    assert active.round_seed(0, 7) == 7
