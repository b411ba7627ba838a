"""HTTP facade over scoring and the annotation loop.

The server owns one annotation session: a scored dataset, a labeled pool,
the current model, the served batch, and the learning curve. Round r of
the loop trains with seed base_seed + r, exactly like the in-process loop,
so a scripted client labeling every batch reproduces the same curve.

Writes are serialized through one lock; training runs on a worker thread
behind a single-flight flag, and requests that would mutate the pool while
training is in flight get 409. Accepted labels go to an append-only log
and the pool is snapshotted after every round, so a restarted server
resumes mid-batch.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from trustlens import active, preprocess, scoring
from trustlens.config import Config, resolve_learner
from trustlens.model import (
    FeatureVector,
    LabeledInstance,
    LabelSource,
    ValidationError,
)

LABELS_FILE = "labels.jsonl"
SNAPSHOT_FILE = "snapshot.json"

_AMBIGUITY = {
    "uncertainty": active.uncertainty,
    "margin": active.margin,
    "entropy": active.entropy,
    "random": active.uncertainty,  # display only; selection stays random
}


class LabelRow(BaseModel):
    user_id: str
    label: int
    annotator_id: str


class AdjudicationRow(BaseModel):
    user_id: str
    label: int
    annotator_id: str


class ConfigPatch(BaseModel):
    strategy: Optional[str] = None
    learner: Optional[str] = None
    batch_size: Optional[int] = None
    learner_params: Optional[Dict[str, Any]] = None


class SessionStore:
    """Append-only label log plus a per-round pool snapshot."""

    def __init__(self, state_dir):
        self.root = Path(state_dir)
        self.root.mkdir(parents=True, exist_ok=True)

    def append(self, row: dict) -> None:
        with open(self.root / LABELS_FILE, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    def read_log(self) -> List[dict]:
        path = self.root / LABELS_FILE
        if not path.exists():
            return []
        rows = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rows.append(json.loads(line))
        return rows

    def write_snapshot(self, snapshot: dict) -> None:
        path = self.root / SNAPSHOT_FILE
        tmp = path.with_suffix(".json.tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(snapshot, fh, sort_keys=True)
        tmp.replace(path)

    def read_snapshot(self) -> Optional[dict]:
        path = self.root / SNAPSHOT_FILE
        if not path.exists():
            return None
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)


class AnnotationSession:
    """All mutable server state behind one lock."""

    def __init__(self, cfg: Config):
        self.cfg = cfg
        self.lock = threading.RLock()
        self.store = SessionStore(cfg.state_dir) if cfg.state_dir else None

        # session settings, adjustable between rounds
        self.strategy = cfg.strategy
        self.learner = cfg.learner
        self.batch_size = cfg.batch_size
        self.learner_params: Dict[str, Any] = dict(cfg.learner_params)
        self.feature_names = preprocess.feature_mask(cfg.feature_mask)

        self.raw_by_id: Dict[str, FeatureVector] = {}
        self.norm_by_id: Dict[str, FeatureVector] = {}
        self.tweets_by_id: Dict[str, tuple] = {}
        self.pool: Optional[active.Pool] = None

        self.model = None
        self.round_index = 0  # last trained round; 0 = untrained
        self.curve: List[dict] = []
        self.pending: List[str] = []  # full served batch, selection order
        self.pending_labels: Dict[str, Dict[str, int]] = {}
        self.resolved: Dict[str, tuple] = {}  # uid -> (label, annotators)
        self.conflicts: Dict[str, Dict[str, int]] = {}
        self.retraining = False
        self.last_error: Optional[str] = None

        self._load_dataset()
        snapshot = self.store.read_snapshot() if self.store else None
        if snapshot is not None:
            self._resume(snapshot)
        else:
            self._fresh_start()

    # ------------------------------------------------------------ setup

    def _load_dataset(self) -> None:
        if self.cfg.dataset_dir is None:
            return
        vectors, tweets_by_user = scoring.dataset_vectors(
            self.cfg.dataset_dir, dead_zone=self.cfg.dead_zone,
            denominator=self.cfg.denominator)
        if not vectors:
            raise ValidationError("no records in dataset")
        params = preprocess.fit(vectors, percentile=self.cfg.percentile)
        normalized = preprocess.transform_dataset(vectors, params)
        self.raw_by_id = {v.user_id: v for v in vectors}
        self.norm_by_id = {v.user_id: v for v in normalized}
        self.tweets_by_id = {
            uid: tuple(t.text for t in tweets if t.text)[:5]
            for uid, tweets in tweets_by_user.items()
        }

    def _seed_label_path(self) -> Optional[Path]:
        if self.cfg.seed_labels:
            return Path(self.cfg.seed_labels)
        if self.cfg.dataset_dir:
            candidate = Path(self.cfg.dataset_dir) / "seed.jsonl"
            if candidate.exists():
                return candidate
        return None

    def _fresh_start(self) -> None:
        if not self.norm_by_id:
            return
        seed_path = self._seed_label_path()
        if seed_path is None or not seed_path.exists():
            return
        seed = active.load_seed_labels(seed_path)
        self.pool = active.build_pool(
            list(self.norm_by_id.values()), seed, batch_size=self.batch_size)
        self._train_round(self.round_index + 1)

    def _resume(self, snapshot: dict) -> None:
        labeled = [
            LabeledInstance(
                features=self.norm_by_id[row["user_id"]],
                label=int(row["label"]),
                annotator_ids=tuple(row.get("annotator_ids", ())),
                source=LabelSource(row.get("source", "seed")),
            )
            for row in snapshot["labeled"]
        ]
        labeled_ids = {inst.user_id for inst in labeled}
        unlabeled = [v for v in self.norm_by_id.values()
                     if v.user_id not in labeled_ids]
        self.pool = active.Pool(labeled=labeled, unlabeled=unlabeled,
                                batch_size=int(snapshot["batch_size"]))
        self.strategy = snapshot["strategy"]
        self.learner = snapshot["learner"]
        self.batch_size = int(snapshot["batch_size"])
        self.learner_params = dict(snapshot.get("learner_params", {}))
        self.curve = list(snapshot["curve"])
        target_round = int(snapshot["round_index"])

        # retrain deterministically instead of persisting model weights
        model, _, batch = active.run_round(
            self.pool, resolve_learner(self.learner), self.strategy,
            target_round, base_seed=self.cfg.base_seed,
            feature_names=self.feature_names, params=self.learner_params,
            folds=self.cfg.folds)
        self.model = model
        self.round_index = target_round
        stored = snapshot.get("pending")
        self.pending = list(stored) if stored is not None else [
            v.user_id for v in batch]

        for row in (self.store.read_log() if self.store else []):
            if int(row.get("round", -1)) != self.round_index:
                continue
            try:
                if row.get("type") == "adjudication":
                    self._apply_adjudication(
                        row["user_id"], int(row["label"]),
                        row["annotator_id"], persist=False)
                else:
                    self._apply_label(
                        row["user_id"], int(row["label"]),
                        row["annotator_id"], persist=False)
            except HTTPException:
                continue  # stale or duplicate log rows are harmless
        self._maybe_finish_batch(asynchronous=False)

    # --------------------------------------------------------- training

    def _train_round(self, round_index: int) -> None:
        """Train synchronously; callers own the retraining flag."""
        model, report, batch = active.run_round(
            self.pool, resolve_learner(self.learner), self.strategy,
            round_index, base_seed=self.cfg.base_seed,
            feature_names=self.feature_names, params=self.learner_params,
            folds=self.cfg.folds)
        with self.lock:
            self.model = model
            self.round_index = round_index
            point = active._curve_point(round_index, len(self.pool.labeled),
                                        report)
            if self.curve and self.curve[-1]["round"] == round_index:
                self.curve[-1] = point
            else:
                self.curve.append(point)
            self.pending = [v.user_id for v in batch]
            self.pending_labels = {}
            self.resolved = {}
            self.conflicts = {}
            self._snapshot()

    def _snapshot(self) -> None:
        if self.store is None or self.pool is None:
            return
        self.store.write_snapshot({
            "round_index": self.round_index,
            "curve": self.curve,
            "strategy": self.strategy,
            "learner": self.learner,
            "batch_size": self.batch_size,
            "learner_params": self.learner_params,
            "pending": self.pending,
            "labeled": [
                {"user_id": inst.user_id, "label": inst.label,
                 "annotator_ids": list(inst.annotator_ids),
                 "source": inst.source.value}
                for inst in self.pool.labeled
            ],
        })

    def _spawn_round(self, round_index: int) -> None:
        self.retraining = True

        def work():
            try:
                self._train_round(round_index)
            except Exception as exc:  # surfaced via /api/health
                with self.lock:
                    self.last_error = f"round {round_index} failed: {exc}"
            finally:
                with self.lock:
                    self.retraining = False

        threading.Thread(target=work, name="trustlens-retrain",
                         daemon=True).start()

    # ------------------------------------------------------ label logic

    def _apply_label(self, user_id: str, label: int, annotator_id: str,
                     persist: bool = True) -> None:
        if label not in (0, 1):
            raise HTTPException(400, f"label must be 0 or 1, got {label}")
        if user_id in self.conflicts:
            raise HTTPException(
                422, f"{user_id!r} is in the conflict queue; adjudicate it")
        if user_id in self.resolved:
            raise HTTPException(422, f"{user_id!r} is already resolved")
        if user_id not in self.pending:
            raise HTTPException(
                422, f"{user_id!r} is not part of the served batch")
        votes = self.pending_labels.setdefault(user_id, {})
        votes[annotator_id] = label
        if persist and self.store:
            self.store.append({"type": "label", "round": self.round_index,
                               "user_id": user_id, "label": label,
                               "annotator_id": annotator_id})
        if len(votes) >= self.cfg.annotators_required:
            if len(set(votes.values())) == 1:
                self.resolved[user_id] = (label, tuple(sorted(votes)))
                self.pending_labels.pop(user_id, None)
            else:
                self.conflicts[user_id] = dict(votes)
                self.pending_labels.pop(user_id, None)

    def _apply_adjudication(self, user_id: str, label: int,
                            annotator_id: str, persist: bool = True) -> None:
        if label not in (0, 1):
            raise HTTPException(400, f"label must be 0 or 1, got {label}")
        if user_id not in self.conflicts:
            raise HTTPException(422, f"{user_id!r} has no open conflict")
        if persist and self.store:
            self.store.append({"type": "adjudication",
                               "round": self.round_index,
                               "user_id": user_id, "label": label,
                               "annotator_id": annotator_id})
        annotators = tuple(sorted(self.conflicts[user_id])) + (annotator_id,)
        del self.conflicts[user_id]
        self.resolved[user_id] = (label, annotators)

    def _maybe_finish_batch(self, asynchronous: bool = True) -> None:
        """Absorb a fully resolved batch and kick off the next round.

        Absorption happens in batch selection order, not label arrival
        order, so the pool evolves exactly as in the in-process loop no
        matter how annotators interleave their submissions.
        """
        if self.round_index == 0 or not self.pending or self.conflicts:
            return
        if any(uid not in self.resolved for uid in self.pending):
            return
        if self.retraining:
            return
        batch = [
            LabeledInstance(
                features=self.norm_by_id[uid], label=self.resolved[uid][0],
                annotator_ids=self.resolved[uid][1],
                source=LabelSource.ACTIVE_LOOP)
            for uid in self.pending
        ]
        self.pool.absorb(batch)
        self.pending = []
        self.pending_labels = {}
        self.resolved = {}
        next_round = self.round_index + 1
        if asynchronous:
            self._spawn_round(next_round)
        else:
            self._train_round(next_round)


def create_app(cfg: Config) -> FastAPI:
    session = AnnotationSession(cfg)
    app = FastAPI(title="trustlens annotation service")
    app.state.session = session

    @app.get("/api/health")
    def health():
        with session.lock:
            payload = {
                "status": "ok",
                "dataset_loaded": bool(session.norm_by_id),
                "model_trained": session.model is not None,
                "retraining": session.retraining,
            }
            if session.last_error:
                payload["last_error"] = session.last_error
            return payload

    @app.get("/api/users/{user_id}/score")
    def user_score(user_id: str):
        with session.lock:
            raw = session.raw_by_id.get(user_id)
            if raw is None:
                raise HTTPException(404, f"unknown user {user_id!r}")
            return {
                "user_id": user_id,
                "raw": raw.to_dict(),
                "normalized": session.norm_by_id[user_id].to_dict(),
                "influence": raw.influence,
            }

    @app.get("/api/annotation/next")
    def annotation_next(strategy: Optional[str] = None,
                        batch: Optional[int] = None):
        with session.lock:
            if session.retraining:
                raise HTTPException(409, "retrain in progress")
            if session.model is None:
                raise HTTPException(409, "model not trained; seed labels missing")
            want_strategy = strategy or session.strategy
            want_batch = batch or session.batch_size
            if want_strategy not in active.STRATEGIES:
                raise HTTPException(400, f"unknown strategy {want_strategy!r}")
            # reselect only while the served batch is still untouched
            untouched = (not session.pending_labels and not session.resolved
                         and not session.conflicts)
            if ((want_strategy != session.strategy
                 or want_batch != session.batch_size) and untouched):
                session.strategy = want_strategy
                session.batch_size = want_batch
                session.pool.batch_size = want_batch
                rng = np.random.default_rng(
                    active.round_seed(cfg.base_seed, session.round_index))
                batch_vectors = active.select_batch(
                    session.pool, session.model, want_strategy,
                    feature_names=session.feature_names, rng=rng)
                session.pending = [v.user_id for v in batch_vectors]
                session._snapshot()

            score_fn = _AMBIGUITY[session.strategy]
            items = []
            for uid in session.pending:
                vector = session.norm_by_id[uid]
                row = np.asarray(vector.as_array(session.feature_names),
                                 dtype=float).reshape(1, -1)
                proba = session.model.predict_proba(row)[0]
                items.append({
                    "user_id": uid,
                    "features": vector.to_dict(),
                    "influence": session.raw_by_id[uid].influence,
                    "sample_tweets": list(session.tweets_by_id.get(uid, ())),
                    "current_model_p1": float(proba[1]),
                    "ambiguity": float(score_fn(proba)),
                    "resolved": uid in session.resolved,
                    "conflicted": uid in session.conflicts,
                })
            return {"round": session.round_index,
                    "strategy": session.strategy,
                    "items": items}

    @app.post("/api/annotation/labels")
    def annotation_labels(rows: List[LabelRow]):
        with session.lock:
            if session.retraining:
                raise HTTPException(409, "retrain in progress")
            for row in rows:  # validate everything before applying anything
                if row.label not in (0, 1):
                    raise HTTPException(
                        400, f"label must be 0 or 1, got {row.label}")
                if row.user_id in session.resolved:
                    raise HTTPException(
                        422, f"{row.user_id!r} is already resolved")
                if row.user_id not in session.pending \
                        and row.user_id not in session.conflicts:
                    raise HTTPException(
                        422, f"{row.user_id!r} is not part of the served batch")
            for row in rows:
                session._apply_label(row.user_id, row.label, row.annotator_id)
            conflicts = sorted(session.conflicts)
            session._snapshot()
            session._maybe_finish_batch()
            return {"accepted": len(rows), "conflicts": conflicts}

    @app.get("/api/annotation/conflicts")
    def annotation_conflicts():
        with session.lock:
            items = []
            for uid in sorted(session.conflicts):
                vector = session.norm_by_id[uid]
                items.append({
                    "user_id": uid,
                    "labels": dict(session.conflicts[uid]),
                    "features": vector.to_dict(),
                    "influence": session.raw_by_id[uid].influence,
                    "sample_tweets": list(session.tweets_by_id.get(uid, ())),
                })
            return {"items": items}

    @app.post("/api/annotation/conflicts")
    def adjudicate(row: AdjudicationRow):
        with session.lock:
            if session.retraining:
                raise HTTPException(409, "retrain in progress")
            session._apply_adjudication(row.user_id, row.label,
                                        row.annotator_id)
            session._snapshot()
            session._maybe_finish_batch()
            return {"accepted": 1, "conflicts": sorted(session.conflicts)}

    @app.get("/api/model/metrics")
    def model_metrics():
        with session.lock:
            return {
                "curve": list(session.curve),
                "learner": session.learner,
                "strategy": session.strategy,
                "round_index": session.round_index,
                "model_trained": session.model is not None,
            }

    @app.post("/api/model/retrain", status_code=202)
    def model_retrain():
        with session.lock:
            if session.retraining:
                raise HTTPException(409, "retrain in progress")
            if session.pool is None or not session.pool.labeled:
                raise HTTPException(409, "no labeled seed yet")
            if session.pending_labels or session.conflicts or session.resolved:
                raise HTTPException(
                    409, "current batch has labels in flight")
            # untouched batch: re-run the current round (e.g. after a
            # config change); fully labeled batch: run the next one
            target = session.round_index + (0 if session.pending else 1)
            target = max(target, 1)
            session._spawn_round(target)
            return {"round_index": target}

    @app.get("/api/config")
    def get_config():
        with session.lock:
            return {
                "strategy": session.strategy,
                "learner": session.learner,
                "batch_size": session.batch_size,
                "learner_params": dict(session.learner_params),
                "annotators_required": cfg.annotators_required,
                "base_seed": cfg.base_seed,
            }

    @app.post("/api/config")
    def patch_config(patch: ConfigPatch):
        with session.lock:
            if session.retraining:
                raise HTTPException(409, "retrain in progress")
            if patch.strategy is not None:
                if patch.strategy not in active.STRATEGIES:
                    raise HTTPException(
                        400, f"unknown strategy {patch.strategy!r}")
                session.strategy = patch.strategy
            if patch.learner is not None:
                try:
                    resolve_learner(patch.learner)
                except ValidationError as exc:
                    raise HTTPException(400, str(exc))
                session.learner = patch.learner
            if patch.batch_size is not None:
                if patch.batch_size < 1:
                    raise HTTPException(400, "batch_size must be positive")
                session.batch_size = patch.batch_size
                if session.pool is not None:
                    session.pool.batch_size = patch.batch_size
            if patch.learner_params is not None:
                session.learner_params = dict(patch.learner_params)
            return get_config()

    static_dir = cfg.static_dir
    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")
    return app
