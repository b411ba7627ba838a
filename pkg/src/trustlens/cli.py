"""Operator command line: ingest, score, normalize, train, al, serve, report.

Every subcommand is deterministic for fixed inputs and seeds; file outputs
never embed timestamps. Validation problems exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
import time
import urllib.error
import urllib.request
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from trustlens import active, ingest, preprocess, scoring, sentiment
from trustlens.config import load_config, resolve_learner
from trustlens.errors import OracleError, TrustlensError
from trustlens.learners import save_model
from trustlens.model import (
    FeatureVector,
    LabeledInstance,
    LabelSource,
    ValidationError,
    read_vectors_jsonl,
    write_vectors_jsonl,
)

#: Forest settings used by `al simulate`; small enough for CI, strong
#: enough to learn the bundled cohorts.
SIMULATE_FOREST = {"n_trees": 40, "max_depth": 14, "min_split": 8}


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _join_labels(vectors: Sequence[FeatureVector], labels: Dict[str, int],
                 source: LabelSource) -> List[LabeledInstance]:
    by_id = {v.user_id: v for v in vectors}
    missing = sorted(set(labels) - set(by_id))
    if missing:
        raise ValidationError(
            f"label references unknown user {missing[0]!r}")
    return [
        LabeledInstance(features=by_id[uid], label=label, source=source)
        for uid, label in sorted(labels.items())
    ]


def _scored_dataset(dataset_dir: str, dead_zone: float, denominator: str):
    vectors, _ = scoring.dataset_vectors(
        dataset_dir, dead_zone=dead_zone, denominator=denominator)
    if not vectors:
        raise ValidationError("no records in dataset")
    return vectors


# ---------------------------------------------------------------- ingest

def cmd_ingest(args) -> int:
    manifest, rejects = ingest.ingest_dataset(
        args.users, args.tweets, args.out,
        max_id=args.max_id, user_format=args.format)
    print(f"users kept: {manifest.user_count}")
    print(f"tweets kept: {manifest.tweet_count}")
    print(f"records rejected: {len(rejects)}")
    print(f"dataset written to {args.out}")
    return 0


# ----------------------------------------------------------------- score

def cmd_score(args) -> int:
    cfg = load_config(args.config, overrides={
        "dead_zone": args.dead_zone, "denominator": args.denominator})
    vectors = _scored_dataset(args.dataset, cfg.dead_zone, cfg.denominator)
    write_vectors_jsonl(vectors, args.out)
    print(f"scored {len(vectors)} users -> {args.out}")
    return 0


# ------------------------------------------------------------- normalize

def cmd_normalize(args) -> int:
    vectors = read_vectors_jsonl(args.features)
    if not vectors:
        return _fail("no records in features file")
    if args.params_in:
        with open(args.params_in, "r", encoding="utf-8") as fh:
            params = preprocess.NormalizationParams.from_dict(json.load(fh))
    else:
        params = preprocess.fit(vectors, percentile=args.percentile)
    normalized = preprocess.transform_dataset(vectors, params)
    write_vectors_jsonl(normalized, args.out)
    if args.params_out:
        with open(args.params_out, "w", encoding="utf-8") as fh:
            json.dump(params.to_dict(), fh, sort_keys=True, indent=2)
    print(f"normalized {len(normalized)} vectors -> {args.out}")
    return 0


# ----------------------------------------------------------------- train

def cmd_train(args) -> int:
    from trustlens.learners import train as train_model

    vectors = read_vectors_jsonl(args.features)
    labels = active.load_seed_labels(args.labels)
    if not labels:
        return _fail("no labels given")
    labeled = _join_labels(vectors, labels, LabelSource.SEED)
    names = preprocess.feature_mask(args.mask)
    X = preprocess.matrix([inst.features for inst in labeled], names)
    y = [inst.label for inst in labeled]
    kind = resolve_learner(args.learner)
    params = json.loads(args.params) if args.params else {}

    import numpy as np
    model = train_model(kind, X, np.array(y), seed=args.seed, **params)
    save_model(model, args.out)
    print(f"trained {kind.value} on {len(labeled)} instances -> {args.out}")

    if args.report_out:
        report = active.evaluate_cv(
            labeled, kind, folds=args.folds, seed=args.seed,
            feature_names=names, params=params)
        with open(args.report_out, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
        print(f"cv accuracy {report.accuracy:.4f} -> {args.report_out}")
    return 0


# ---------------------------------------------------------------- al run

def _synthetic_oracle(truth_path):
    truth = active.load_seed_labels(truth_path)

    def ask(vector: FeatureVector) -> int:
        label = truth.get(vector.user_id)
        if label is None:
            raise OracleError(f"no ground-truth label for {vector.user_id!r}")
        return label

    return ask


def cmd_al_run(args) -> int:
    if args.oracle == "service":
        return _drive_service(args)
    if not args.dataset or not args.seed_labels:
        return _fail("--oracle synthetic requires --dataset and --seed-labels")

    cfg = load_config(args.config, overrides={
        "learner": args.learner, "strategy": args.strategy,
        "batch_size": args.batch, "base_seed": args.seed,
        "max_rounds": args.max_rounds, "min_gain": args.min_gain,
        "folds": args.folds, "feature_mask": args.mask,
        "dead_zone": args.dead_zone, "denominator": args.denominator,
        "percentile": args.percentile,
    })
    truth_path = args.truth or str(Path(args.dataset) / "truth.jsonl")
    if not Path(truth_path).exists():
        return _fail(f"ground-truth file not found: {truth_path}")

    vectors = _scored_dataset(args.dataset, cfg.dead_zone, cfg.denominator)
    params = preprocess.fit(vectors, percentile=cfg.percentile)
    normalized = preprocess.transform_dataset(vectors, params)
    seed = active.load_seed_labels(args.seed_labels)
    pool = active.build_pool(normalized, seed, batch_size=cfg.batch_size)

    learner_params = json.loads(args.params) if args.params else {}
    names = preprocess.feature_mask(cfg.feature_mask)
    state, curve = active.run_loop(
        pool, cfg.learner_kind(), cfg.strategy, _synthetic_oracle(truth_path),
        max_rounds=cfg.max_rounds, min_gain=cfg.min_gain,
        base_seed=cfg.base_seed, feature_names=names,
        params=learner_params, folds=cfg.folds)

    active.write_curve(curve, args.curve_out)
    print(f"{len(curve)} rounds -> {args.curve_out}")
    if args.model_out:
        save_model(state.model, args.model_out)
        print(f"final model -> {args.model_out}")
    return 0


def _http_json(url: str, payload=None, timeout: float = 30.0):
    data = None
    headers = {"Accept": "application/json"}
    if payload is not None:
        data = json.dumps(payload).encode("utf-8")
        headers["Content-Type"] = "application/json"
    request = urllib.request.Request(url, data=data, headers=headers)
    with urllib.request.urlopen(request, timeout=timeout) as response:
        return json.loads(response.read().decode("utf-8"))


def _drive_service(args) -> int:
    """Scripted-annotator client: label batches over HTTP until done."""
    if not args.service_url:
        return _fail("--oracle service requires --service-url")
    truth_path = args.truth
    if not truth_path and args.dataset:
        truth_path = str(Path(args.dataset) / "truth.jsonl")
    if not truth_path or not Path(truth_path).exists():
        return _fail(f"ground-truth file not found: {truth_path}")
    truth = active.load_seed_labels(truth_path)
    annotators = [a.strip() for a in args.annotators.split(",") if a.strip()]
    base = args.service_url.rstrip("/")

    rounds_driven = 0
    while rounds_driven < args.rounds:
        try:
            batch = _http_json(f"{base}/api/annotation/next")
        except urllib.error.HTTPError as exc:
            if exc.code == 409:  # retrain still running
                time.sleep(0.2)
                continue
            raise
        items = batch["items"]
        if not items:
            break
        payload = []
        for item in items:
            label = truth.get(item["user_id"])
            if label is None:
                return _fail(f"no ground-truth label for {item['user_id']!r}")
            for annotator in annotators:
                payload.append({"user_id": item["user_id"], "label": label,
                                "annotator_id": annotator})
        _http_json(f"{base}/api/annotation/labels", payload)
        rounds_driven += 1

        deadline = time.time() + args.poll_timeout
        while time.time() < deadline:
            metrics = _http_json(f"{base}/api/model/metrics")
            if len(metrics["curve"]) > rounds_driven:
                break
            time.sleep(0.2)

    metrics = _http_json(f"{base}/api/model/metrics")
    active.write_curve(metrics["curve"], args.curve_out)
    print(f"drove {rounds_driven} batches; "
          f"{len(metrics['curve'])} rounds -> {args.curve_out}")
    return 0


# ----------------------------------------------------------- al simulate

def cmd_al_simulate(args) -> int:
    from trustlens import synthetic

    cohort = synthetic.make_cohort(n_users=args.users, seed=args.seed)
    params = preprocess.fit(cohort.vectors)
    normalized = preprocess.transform_dataset(cohort.vectors, params)
    seed = synthetic.seed_labels(
        cohort, n_trusted=args.seed_trusted, n_untrusted=args.seed_untrusted)
    pool = active.build_pool(normalized, seed, batch_size=args.batch)

    if args.dump_dataset:
        out = Path(args.dump_dataset)
        out.mkdir(parents=True, exist_ok=True)
        write_vectors_jsonl(cohort.vectors, out / scoring.FEATURES_FILE)
        with open(out / "seed.jsonl", "w", encoding="utf-8") as fh:
            for uid, label in seed.items():
                fh.write(json.dumps({"user_id": uid, "label": label}) + "\n")
        with open(out / "truth.jsonl", "w", encoding="utf-8") as fh:
            for uid, label in cohort.labels.items():
                fh.write(json.dumps({"user_id": uid, "label": label}) + "\n")
        print(f"cohort dataset -> {out}")

    kind = resolve_learner(args.learner)
    learner_params = json.loads(args.params) if args.params else (
        dict(SIMULATE_FOREST) if kind.value == "random_forest" else {})
    _, curve = active.run_loop(
        pool, kind, args.strategy, cohort.oracle(),
        max_rounds=args.rounds, min_gain=-1.0, base_seed=args.seed,
        params=learner_params)

    active.write_curve(curve, args.curve_out)
    print(f"{len(curve)} rounds -> {args.curve_out}")
    return 0


# ----------------------------------------------------------------- serve

def cmd_serve(args) -> int:
    import uvicorn

    from trustlens.service import create_app

    cfg = load_config(args.config, overrides={
        "host": args.host, "port": args.port})
    if cfg.dataset_dir is None:
        return _fail("config must set dataset_dir")
    app = create_app(cfg)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")
    return 0


# ---------------------------------------------------------------- report

def cmd_report(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    profiles, tweets_by_user, _ = ingest.load_dataset(args.dataset)
    if not profiles:
        return _fail("no records in dataset")
    stats = ingest.descriptive_stats(profiles, sample=args.sample_stddev)
    with open(out_dir / "stats.json", "w", encoding="utf-8") as fh:
        json.dump(stats, fh, sort_keys=True, indent=2)
    written.append("stats.json")

    if args.labels:
        labels = active.load_seed_labels(args.labels)
        lexicon = sentiment.load_lexicon()
        vectors = scoring.score_dataset(profiles, tweets_by_user, lexicon)
        params = preprocess.fit(vectors)
        normalized = preprocess.transform_dataset(vectors, params)
        labeled = _join_labels(
            [v for v in normalized if v.user_id in labels],
            labels, LabelSource.SEED)
        table = preprocess.correlation_report(labeled)
        with open(out_dir / "correlation.csv", "w", encoding="utf-8") as fh:
            fh.write("feature,r,degenerate\n")
            for name, row in table.items():
                fh.write(f"{name},{row['r']:.6f},{str(row['degenerate']).lower()}\n")
        written.append("correlation.csv")

    for curve_path in args.curve or []:
        curve = active.read_curve(curve_path)  # validates shape
        target = out_dir / Path(curve_path).name
        if Path(curve_path).resolve() != target.resolve():
            shutil.copyfile(curve_path, target)
        written.append(target.name + f" ({len(curve)} rounds)")

    print("report written: " + ", ".join(written))
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trustlens",
        description="Trust scoring and active-learning annotation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read raw user/tweet files into a dataset dir")
    p.add_argument("--users", required=True)
    p.add_argument("--tweets", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-id", type=int, default=None,
                   help="drop tweets with id above this bound")
    p.add_argument("--format", choices=("jsonl", "csv"), default=None,
                   help="user file format (default: by extension)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("score", help="compute feature vectors for a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--denominator", choices=("statuses", "collected"), default=None)
    p.add_argument("--dead-zone", type=float, default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("normalize", help="min-max scale feature vectors")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--percentile", type=float, default=99.0)
    p.add_argument("--params-in", default=None,
                   help="reuse normalization bounds from a previous fit")
    p.add_argument("--params-out", default=None)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("train", help="train a classifier on labeled vectors")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--learner", default="rf")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mask", choices=("default", "all"), default="default")
    p.add_argument("--params", default=None, help="learner params as JSON")
    p.add_argument("--report-out", default=None,
                   help="also write a cross-validation metrics report")
    p.add_argument("--folds", type=int, default=10)
    p.set_defaults(func=cmd_train)

    al = sub.add_parser("al", help="active-learning loops")
    al_sub = al.add_subparsers(dest="al_command", required=True)

    p = al_sub.add_parser("run", help="run the labeling loop on a dataset")
    p.add_argument("--dataset", default=None)
    p.add_argument("--seed-labels", default=None)
    p.add_argument("--learner", default=None)
    p.add_argument("--strategy", default=None,
                   choices=("uncertainty", "margin", "entropy", "random"))
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--oracle", choices=("synthetic", "service"), default="synthetic")
    p.add_argument("--truth", default=None,
                   help="ground-truth labels JSONL (default: dataset/truth.jsonl)")
    p.add_argument("--service-url", default=None)
    p.add_argument("--annotators", default="sim_a,sim_b")
    p.add_argument("--rounds", type=int, default=3,
                   help="batches to drive when --oracle service")
    p.add_argument("--poll-timeout", type=float, default=60.0)
    p.add_argument("--curve-out", default="curve.csv")
    p.add_argument("--model-out", default=None)
    p.add_argument("--max-rounds", type=int, default=None)
    p.add_argument("--min-gain", type=float, default=None)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--mask", choices=("default", "all"), default=None)
    p.add_argument("--params", default=None, help="learner params as JSON")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--denominator", choices=("statuses", "collected"), default=None)
    p.add_argument("--dead-zone", type=float, default=None)
    p.add_argument("--percentile", type=float, default=None)
    p.set_defaults(func=cmd_al_run)

    p = al_sub.add_parser("simulate",
                          help="self-contained loop on a generated cohort")
    p.add_argument("--learner", default="rf")
    p.add_argument("--strategy", default="margin",
                   choices=("uncertainty", "margin", "entropy", "random"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--users", type=int, default=600)
    p.add_argument("--batch", type=int, default=50)
    p.add_argument("--rounds", type=int, default=5)
    p.add_argument("--seed-trusted", type=int, default=116)
    p.add_argument("--seed-untrusted", type=int, default=84)
    p.add_argument("--params", default=None, help="learner params as JSON")
    p.add_argument("--curve-out", default="curve.csv")
    p.add_argument("--dump-dataset", default=None, metavar="DIR",
                   help="also write the cohort as a dataset directory "
                        "(features.jsonl, seed.jsonl, truth.jsonl)")
    p.set_defaults(func=cmd_al_simulate)

    p = sub.add_parser("serve", help="host the annotation service")
    p.add_argument("--config", required=True)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="emit dataset stats and analysis tables")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--labels", default=None)
    p.add_argument("--curve", action="append", default=None,
                   help="learning-curve CSV to validate and collect (repeatable)")
    p.add_argument("--sample-stddev", action="store_true",
                   help="use the sample standard deviation in stats")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TrustlensError, ValidationError, ValueError, OSError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
