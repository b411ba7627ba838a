"""Release gate: one check per shipping criterion.

Each test prints a single PASS or FAIL line (visible even under output
capture) so a full run reads as a checklist. Tolerances are pinned here
and nowhere else; if a criterion cannot be met the test fails loudly
rather than loosening the bound.

The slow entries are the calibrated cohort experiment (about a minute)
and the service drive (a few seconds). Everything else is instant.
"""

import csv
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from conftest import blobs, circles
from trustlens import active, ingest, preprocess, scoring, sentiment, synthetic
from trustlens.cli import main
from trustlens.config import load_config
from trustlens.learners import train
from trustlens.model import (
    FEATURE_FIELDS,
    FeatureVector,
    LabeledInstance,
    LabelSource,
    LearnerKind,
    MetricsReport,
)
from trustlens.service import create_app

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def announce(capsys):
    """Print a checklist line for one criterion, then enforce it."""

    def _announce(criterion, ok, detail=""):
        tag = "PASS" if ok else "FAIL"
        suffix = f" [{detail}]" if detail else ""
        with capsys.disabled():
            print(f"\n{tag}: {criterion}{suffix}")
        assert ok, f"{criterion}{suffix}"

    return _announce


# ------------------------------------------------------------ formulas


def test_h_index_matches_bruteforce_on_random_lists(announce):
    rng = np.random.default_rng(20240817)
    start = time.time()
    mismatches = 0
    for _ in range(1000):
        length = int(rng.integers(0, 201))
        counts = [int(c) for c in rng.integers(0, 10**6 + 1, size=length)]
        best = 0
        for h in range(len(counts), -1, -1):
            if sum(1 for c in counts if c >= h) >= h:
                best = h
                break
        if scoring.h_index(counts) != best:
            mismatches += 1
    elapsed = time.time() - start
    announce(
        "h-index equals the brute-force oracle on 1000 random count lists",
        mismatches == 0 and elapsed < 5.0,
        f"{1000 - mismatches}/1000 in {elapsed:.2f}s",
    )


def test_social_reputation_closed_form_and_monotonicity(announce):
    closed_form_ok = abs(scoring.social_reputation(99, 9, 9) - 4.0) <= 1e-12
    rng = np.random.default_rng(11)
    strict = True
    for _ in range(100):
        fol, st, fri = (int(v) for v in rng.integers(0, 10**6, size=3))
        base = scoring.social_reputation(fol, st, fri)
        strict &= scoring.social_reputation(fol + 1, st, fri) > base
        strict &= scoring.social_reputation(fol, st + 1, fri) > base
        strict &= scoring.social_reputation(fol, st, fri + 1) < base
    announce(
        "social reputation: closed form (99,9,9) = 4.0 and strict "
        "monotonicity on 100 random triples",
        closed_form_ok and strict,
    )


def test_component_scores_reproduce_hand_examples(announce):
    checks = [
        abs(scoring.sentiment_score(3, 2, 5) - 0.5),
        abs(scoring.sentiment_score(7, 0, 0) - 1.0),
        abs(scoring.sentiment_score(0, 0, 7) - 0.0),
        abs(scoring.tweet_credibility(0.2, 0.4, 0.1, 0.3, 0.5) - 0.125),
        abs(scoring.tweet_credibility(0.9, 0.8, 0.7, 0.6, 0.0) - 0.0),
        abs(scoring.tweet_credibility(1.0, 1.0, 1.0, 1.0, 1.0) - 1.0),
        abs(scoring.influence_score(0.5, 0.1, 0.9, 0.2, 0.3) - 0.4),
        abs(scoring.influence_score(1, 1, 1, 1, 1) - 1.0),
        abs(scoring.influence_score(0, 0, 0, 0, 0) - 0.0),
    ]
    worst = max(checks)
    announce(
        "sentiment score, tweet credibility, influence reproduce the "
        "hand-derived examples to 1e-12",
        worst <= 1e-12,
        f"worst abs err {worst:.1e}",
    )


def test_ambiguity_scores_reproduce_formula_values(announce):
    p = [0.9, 0.1]
    errs = [
        abs(active.uncertainty(p) - 0.1),
        abs(active.margin(p) - 0.8),
        abs(active.entropy(p) - 0.32508297339144824),
    ]
    uniform_err = abs(active.entropy([0.5, 0.5]) - math.log(2))
    announce(
        "uncertainty/margin/entropy match their formula values to 1e-9; "
        "entropy of uniform equals ln 2",
        max(errs) <= 1e-9 and uniform_err <= 1e-12,
        f"worst abs err {max(max(errs), uniform_err):.1e}",
    )


# ------------------------------------------------------ property suites


def test_normalization_properties_hold_on_large_sample(announce):
    rng = np.random.default_rng(101)
    n = 10_000
    followers = np.rint(np.exp(rng.normal(6.0, 2.5, size=n))).astype(int)
    vectors = []
    for i in range(n):
        vectors.append(FeatureVector(
            user_id=f"u{i:05d}",
            followers=int(followers[i]),
            friends=int(rng.integers(0, 5000)),
            statuses=int(rng.integers(1, 20000)),
            listed=7,  # deliberately constant across the sample
            total_retweets=int(rng.integers(0, 10**5)),
            total_likes=int(rng.integers(0, 10**5)),
            url_tweets=int(rng.integers(0, 200)),
            retweet_ratio=float(rng.uniform(0, 3)),
            like_ratio=float(rng.uniform(0, 3)),
            url_ratio=float(rng.uniform(0, 1)),
            hashtag_ratio=float(rng.uniform(0, 1)),
            original_ratio=float(rng.uniform(0, 1)),
            social_reputation=float(rng.normal(3, 2)),
            retweet_hindex=int(rng.integers(0, 80)),
            liked_hindex=int(rng.integers(0, 80)),
            positive_tweets=int(rng.integers(0, 100)),
            neutral_tweets=int(rng.integers(0, 100)),
            negative_tweets=int(rng.integers(0, 100)),
            sentiment_score=float(rng.uniform(0, 1)),
            tweet_credibility=float(rng.uniform(0, 2)),
            influence=float(rng.uniform(0, 1)),
        ))
    params = preprocess.fit(vectors)
    normed = preprocess.transform_dataset(vectors, params)

    in_unit = all(
        0.0 <= v.feature(name) <= 1.0
        for v in normed for name in FEATURE_FIELDS
    )
    constant_zero = all(v.feature("listed") == 0.0 for v in normed)

    clip_low, clip_high, _, _ = params.bounds["followers"]
    raw = followers.astype(float)
    unclipped = np.where((raw > clip_low) & (raw < clip_high))[0]
    scaled = np.array([normed[i].feature("followers") for i in unclipped])
    order = np.argsort(raw[unclipped], kind="stable")
    raw_sorted, scaled_sorted = raw[unclipped][order], scaled[order]
    ranks_ok = True
    for k in range(len(order) - 1):
        if raw_sorted[k + 1] > raw_sorted[k]:
            ranks_ok &= scaled_sorted[k + 1] > scaled_sorted[k]
        else:
            ranks_ok &= scaled_sorted[k + 1] == scaled_sorted[k]
    announce(
        "normalized features stay in [0,1], a constant feature maps to 0.0, "
        "and ranks survive among unclipped values (10000 samples)",
        in_unit and constant_zero and ranks_ok,
        f"{len(unclipped)} unclipped",
    )


def test_strategies_pick_identical_binary_top_sets(announce):
    rng = np.random.default_rng(202)
    probs = rng.uniform(0.0, 1.0, size=1000)
    vectors = [[p, 1.0 - p] for p in probs]
    unc = np.array([active.uncertainty(v) for v in vectors])
    mar = np.array([active.margin(v) for v in vectors])
    ent = np.array([active.entropy(v) for v in vectors])
    # most ambiguous first: high uncertainty, low margin, high entropy
    top_unc = set(np.argsort(-unc, kind="stable")[:100])
    top_mar = set(np.argsort(mar, kind="stable")[:100])
    top_ent = set(np.argsort(-ent, kind="stable")[:100])
    announce(
        "the three ambiguity strategies choose identical top-100 sets on "
        "1000 random binary probability vectors",
        top_unc == top_mar == top_ent,
    )


def test_gradient_check_and_duality_gap(announce):
    X, y = blobs(60, seed=3)
    model = train(LearnerKind.MLP, X, y, seed=0, hidden=(5,), epochs=0)
    batch_X, batch_y = X[:5], y[:5]
    _, grads = model.loss_gradients(batch_X, batch_y)
    eps = 1e-6
    worst = 0.0
    for (W, b), (dW, db) in zip(model.weights, grads):
        for arr, grad in ((W, dW), (b, db)):
            flat = arr.reshape(-1)
            for idx in range(flat.size):
                orig = flat[idx]
                flat[idx] = orig + eps
                up = model.loss(batch_X, batch_y)
                flat[idx] = orig - eps
                down = model.loss(batch_X, batch_y)
                flat[idx] = orig
                numeric = (up - down) / (2.0 * eps)
                denom = max(abs(numeric), 1e-8)
                worst = max(worst, abs(grad.reshape(-1)[idx] - numeric) / denom)

    Xb, yb = blobs(120, seed=5)
    Xc, yc = circles(120, seed=5)
    lin = train(LearnerKind.SVM, Xb, yb, seed=0, kernel="linear")
    rbf = train(LearnerKind.SVM, Xc, yc, seed=0, kernel="rbf")
    gaps_ok = (lin.duality_gap_ <= 1e-2 * abs(lin.objective_)
               and rbf.duality_gap_ <= 1e-2 * abs(rbf.objective_))
    announce(
        "MLP analytic gradients match central differences to 1e-5 relative; "
        "SVM duality gap is at most 1% of the objective",
        worst <= 1e-5 and gaps_ok,
        f"worst grad rel err {worst:.1e}",
    )


def test_metrics_match_bruteforce_counting(announce):
    rng = np.random.default_rng(303)
    exact = True
    for _ in range(500):
        while True:
            tp, fp, fn, tn = (int(v) for v in rng.integers(0, 40, size=4))
            if tp + fp + fn + tn > 0:
                break
        y_true = [1] * tp + [0] * fp + [1] * fn + [0] * tn
        y_pred = [1] * tp + [1] * fp + [0] * fn + [0] * tn
        report = MetricsReport(tp=tp, fp=fp, fn=fn, tn=tn)

        total = len(y_true)
        correct = sum(1 for t, p in zip(y_true, y_pred) if t == p)
        exact &= report.accuracy == correct / total
        for cls in (0, 1):
            predicted = sum(1 for p in y_pred if p == cls)
            actual = sum(1 for t in y_true if t == cls)
            hits = sum(1 for t, p in zip(y_true, y_pred) if t == p == cls)
            precision = hits / predicted if predicted else 0.0
            recall = hits / actual if actual else 0.0
            f1 = (2 * precision * recall / (precision + recall)
                  if precision + recall > 0 else 0.0)
            exact &= report.precision(cls) == precision
            exact &= report.recall(cls) == recall
            exact &= report.f1(cls) == f1
    announce(
        "accuracy/precision/recall/F1 agree exactly with brute-force "
        "counting on 500 random confusion matrices",
        exact,
    )


# ------------------------------------------- calibrated cohort experiment


def test_active_loop_hits_target_and_model_ordering_holds(announce):
    started = time.time()
    forest = {"n_trees": 40, "max_depth": 14, "min_split": 8}
    cohort = synthetic.make_cohort(n_users=5000, seed=0)
    params = preprocess.fit(cohort.vectors)
    normed = preprocess.transform_dataset(cohort.vectors, params)
    mask = preprocess.feature_mask("default")
    X_all = np.array([v.as_array(mask) for v in normed])
    y_all = np.array([cohort.labels[v.user_id] for v in normed])

    seeds = synthetic.seed_labels(cohort)
    pool = active.build_pool(normed, seeds)
    oracle = cohort.oracle()
    accuracies = []
    for round_index in range(1, 11):
        model, _, batch = active.run_round(
            pool, LearnerKind.RANDOM_FOREST, "margin", round_index,
            base_seed=42, params=forest)
        accuracies.append(float(np.mean(model.predict(X_all) == y_all)))
        if not batch:
            break
        pool.absorb([
            LabeledInstance(features=v, label=oracle(v),
                            source=LabelSource.ACTIVE_LOOP)
            for v in batch
        ])
    crossed = next((i + 1 for i, a in enumerate(accuracies) if a >= 0.93), None)

    wins = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        idx = rng.permutation(len(X_all))
        tr, te = idx[:1000], idx[1000:]
        rf = train(LearnerKind.RANDOM_FOREST, X_all[tr], y_all[tr],
                   seed=seed, **forest)
        acc_rf = float(np.mean(rf.predict(X_all[te]) == y_all[te]))
        svm = train(LearnerKind.SVM, X_all[tr], y_all[tr], seed=seed)
        acc_svm = float(np.mean(svm.predict(X_all[te]) == y_all[te]))
        worst_mlp = 1.0
        for act in ("tanh", "relu", "logistic"):
            mlp = train(LearnerKind.MLP, X_all[tr], y_all[tr], seed=seed,
                        activation=act, epochs=150)
            worst_mlp = min(worst_mlp,
                            float(np.mean(mlp.predict(X_all[te]) == y_all[te])))
        wins += acc_rf >= acc_svm >= worst_mlp

    elapsed = time.time() - started
    announce(
        "forest + margin sampling reaches 0.93 accuracy within 10 rounds of "
        "batch 100 on the 5000-user cohort; forest >= SVM >= worst MLP on at "
        "least 7 of 10 seeds; under 5 minutes",
        crossed is not None and crossed <= 10 and wins >= 7 and elapsed < 300,
        f"crossed at round {crossed}, peak {max(accuracies):.4f}, "
        f"ordering {wins}/10, {elapsed:.0f}s",
    )


def test_labeled_export_reproduction_optional(announce, capsys):
    """Optional: rerun tenfold CV on a real labeled export when one is
    supplied via TRUSTLENS_LABELED_EXPORT; nothing in CI depends on it."""
    root = os.environ.get("TRUSTLENS_LABELED_EXPORT")
    if not root:
        with capsys.disabled():
            print("\nSKIP: tenfold accuracy on a real labeled export "
                  "(optional; set TRUSTLENS_LABELED_EXPORT to run)")
        pytest.skip("no labeled export provided")
    vectors, _ = scoring.dataset_vectors(root)
    labels = active.load_seed_labels(Path(root) / "labels.jsonl")
    if not all(v.normalized for v in vectors):
        vectors = preprocess.transform_dataset(vectors, preprocess.fit(vectors))
    labeled = [
        LabeledInstance(features=v, label=labels[v.user_id],
                        source=LabelSource.SEED)
        for v in vectors if v.user_id in labels
    ]
    report = active.evaluate_cv(labeled, LearnerKind.RANDOM_FOREST, folds=10,
                                seed=0)
    announce(
        "tenfold forest accuracy on the labeled export lands within 0.05 "
        "of the 0.96 reference",
        abs(report.accuracy - 0.96) <= 0.05,
        f"accuracy {report.accuracy:.4f}",
    )


# ------------------------------------------------------------ end to end


def test_fixture_pipeline_matches_committed_oracle(announce, tmp_path):
    manifest, rejects = ingest.ingest_dataset(
        FIXTURES / "raw_users.jsonl", FIXTURES / "raw_tweets.jsonl",
        tmp_path / "ds")
    vectors, _ = scoring.dataset_vectors(tmp_path / "ds")
    by_id = {v.user_id: v for v in vectors}

    with open(FIXTURES / "expected_features.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    worst = 0.0
    complete = len(rows) == len(vectors) == manifest.user_count
    for row in rows:
        vector = by_id[row["user_id"]]
        for name in FEATURE_FIELDS:
            worst = max(worst, abs(vector.feature(name) - float(row[name])))
    announce(
        "the 20-user fixture scored end to end matches the committed "
        "spreadsheet oracle on every feature field to 1e-9",
        complete and worst <= 1e-9,
        f"worst abs diff {worst:.1e} over {len(rows)} users x "
        f"{len(FEATURE_FIELDS)} fields",
    )


def test_service_drive_matches_inprocess_curve(announce, tmp_path):
    sim_curve = tmp_path / "sim.csv"
    code = main(["al", "simulate", "--users", "200", "--batch", "25",
                 "--rounds", "3", "--seed", "7", "--seed-trusted", "30",
                 "--seed-untrusted", "20", "--curve-out", str(sim_curve),
                 "--dump-dataset", str(tmp_path / "ds")])
    assert code == 0
    expected = active.read_curve(sim_curve)

    cfg = load_config(overrides={
        "dataset_dir": str(tmp_path / "ds"),
        "seed_labels": str(tmp_path / "ds" / "seed.jsonl"),
        "state_dir": str(tmp_path / "state"),
        "learner": "rf",
        "learner_params": {"n_trees": 40, "max_depth": 14, "min_split": 8},
        "strategy": "margin",
        "batch_size": 25,
        "base_seed": 7,
    })
    client = TestClient(create_app(cfg))
    truth = active.load_seed_labels(tmp_path / "ds" / "truth.jsonl")

    def wait_rounds(count, timeout=90.0):
        deadline = time.time() + timeout
        while time.time() < deadline:
            health = client.get("/api/health").json()
            metrics = client.get("/api/model/metrics").json()
            if not health["retraining"] and len(metrics["curve"]) >= count:
                assert "last_error" not in health, health
                return metrics
            time.sleep(0.05)
        raise AssertionError(f"round {count} never finished")

    wait_rounds(1)
    for batch_number in range(1, 4):
        items = client.get("/api/annotation/next").json()["items"]
        for annotator in ("ann_a", "ann_b"):
            rows = [{"user_id": item["user_id"],
                     "label": truth[item["user_id"]],
                     "annotator_id": annotator} for item in items]
            response = client.post("/api/annotation/labels", json=rows)
            assert response.status_code == 200, response.text
        metrics = wait_rounds(batch_number + 1)

    served = metrics["curve"][:3]
    identical = all(
        s[column] == e[column]
        for s, e in zip(served, expected) for column in active.CURVE_COLUMNS
    )
    announce(
        "driving the service with two scripted annotators for 3 batches "
        "reproduces the in-process simulated curve round for round",
        len(expected) == 3 and identical,
    )
