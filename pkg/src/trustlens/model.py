"""Domain types shared across the pipeline.

Everything here is an immutable value object: construct, validate, share.
Mutation happens by building a new instance (see ``FeatureVector.replace``).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from typing import Any, Iterable, Mapping, Optional, Sequence

UNTRUSTED = 0
TRUSTED = 1

#: Labels are encoded 1 = trusted, 0 = untrusted everywhere (file formats,
#: metric reports, classifier targets). Do not flip this.
LABELS = (UNTRUSTED, TRUSTED)


class LearnerKind(str, Enum):
    RANDOM_FOREST = "random_forest"
    SVM = "svm"
    MLP = "mlp"


class LabelSource(str, Enum):
    SEED = "seed"
    ACTIVE_LOOP = "active_loop"
    SYNTHETIC_ORACLE = "synthetic_oracle"


class ValidationError(ValueError):
    """A constructor rejected a value that violates a type invariant."""


def _check_counter(name: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < 0:
        raise ValidationError(f"{name} must be non-negative, got {value}")
    return value


@dataclass(frozen=True)
class UserProfile:
    """Account-level counters for one user."""

    user_id: str
    followers: int
    friends: int
    statuses: int
    listed: int
    is_public: bool = True

    def __post_init__(self):
        if not self.user_id:
            raise ValidationError("user_id must be non-empty")
        for name in ("followers", "friends", "statuses", "listed"):
            _check_counter(name, getattr(self, name))

    def check_selection_rule(self) -> Optional[str]:
        """Reason this profile fails the ingest selection rule, or None.

        Ingested profiles must be public with non-zero friends and followers;
        accounts with no statuses are inactive and are filtered too.
        """
        if not self.is_public:
            return "private profile"
        if self.followers == 0:
            return "zero followers"
        if self.friends == 0:
            return "zero friends"
        if self.statuses == 0:
            return "zero statuses"
        return None

    @classmethod
    def ingested(cls, **kwargs) -> "UserProfile":
        """Construct a profile, rejecting any that fails the selection rule."""
        profile = cls(**kwargs)
        reason = profile.check_selection_rule()
        if reason is not None:
            raise ValidationError(reason)
        return profile

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "UserProfile":
        return cls(**{f.name: d[f.name] for f in fields(cls)})


@dataclass(frozen=True)
class TweetRecord:
    """One collected tweet with its engagement counters and entity flags."""

    tweet_id: int
    user_id: str
    retweet_count: int
    like_count: int
    has_url: bool
    has_hashtag: bool
    is_retweet_of_other: bool
    text: str = ""

    def __post_init__(self):
        _check_counter("tweet_id", self.tweet_id)
        _check_counter("retweet_count", self.retweet_count)
        _check_counter("like_count", self.like_count)
        if not self.user_id:
            raise ValidationError("user_id must be non-empty")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TweetRecord":
        return cls(**{f.name: d[f.name] for f in fields(cls)})


#: Numeric feature fields, in canonical order. ``feature_mask`` in
#: :mod:`trustlens.preprocess` selects subsets of these by name.
FEATURE_FIELDS = (
    "followers",
    "friends",
    "statuses",
    "listed",
    "total_retweets",
    "total_likes",
    "url_tweets",
    "retweet_ratio",
    "like_ratio",
    "url_ratio",
    "hashtag_ratio",
    "original_ratio",
    "social_reputation",
    "retweet_hindex",
    "liked_hindex",
    "positive_tweets",
    "neutral_tweets",
    "negative_tweets",
    "sentiment_score",
    "tweet_credibility",
    "influence",
)

_UNIT_INTERVAL_ALWAYS = ("url_ratio", "hashtag_ratio", "original_ratio", "sentiment_score")


@dataclass(frozen=True)
class FeatureVector:
    """Per-user derived feature record, before or after normalization.

    Raw vectors keep natural scales (counts as integers, ratios possibly
    above 1). ``normalized=True`` marks a vector whose every feature field
    has been min-max mapped into [0, 1].
    """

    user_id: str
    followers: float = 0
    friends: float = 0
    statuses: float = 0
    listed: float = 0
    total_retweets: float = 0
    total_likes: float = 0
    url_tweets: float = 0
    retweet_ratio: float = 0.0
    like_ratio: float = 0.0
    url_ratio: float = 0.0
    hashtag_ratio: float = 0.0
    original_ratio: float = 0.0
    social_reputation: float = 0.0
    retweet_hindex: float = 0
    liked_hindex: float = 0
    positive_tweets: float = 0
    neutral_tweets: float = 0
    negative_tweets: float = 0
    sentiment_score: float = 0.0
    tweet_credibility: float = 0.0
    influence: Optional[float] = None
    normalized: bool = False

    def __post_init__(self):
        if not self.user_id:
            raise ValidationError("user_id must be non-empty")
        for name in _UNIT_INTERVAL_ALWAYS:
            v = getattr(self, name)
            if not (-1e-12 <= v <= 1 + 1e-12):
                raise ValidationError(f"{name} must lie in [0, 1], got {v}")
        if self.normalized:
            for name in FEATURE_FIELDS:
                v = getattr(self, name)
                if v is None:
                    raise ValidationError("normalized vector has unset influence")
                if not (-1e-12 <= v <= 1 + 1e-12):
                    raise ValidationError(
                        f"normalized vector has {name} outside [0, 1]: {v}"
                    )

    def feature(self, name: str) -> float:
        if name not in FEATURE_FIELDS:
            raise KeyError(f"unknown feature {name!r}")
        v = getattr(self, name)
        return 0.0 if v is None else float(v)

    def as_array(self, names: Sequence[str]) -> list:
        return [self.feature(n) for n in names]

    def replace(self, **changes) -> "FeatureVector":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "FeatureVector":
        return cls(**{f.name: d[f.name] for f in fields(cls) if f.name in d})


@dataclass(frozen=True)
class LabeledInstance:
    """A feature vector plus its trusted/untrusted label and provenance."""

    features: FeatureVector
    label: int
    annotator_ids: tuple = ()
    source: LabelSource = LabelSource.SEED

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValidationError(f"label must be 0 or 1, got {self.label!r}")
        object.__setattr__(self, "annotator_ids", tuple(self.annotator_ids))
        if not isinstance(self.source, LabelSource):
            object.__setattr__(self, "source", LabelSource(self.source))

    @property
    def user_id(self) -> str:
        return self.features.user_id

    def to_dict(self) -> dict:
        return {
            "features": self.features.to_dict(),
            "label": self.label,
            "annotator_ids": list(self.annotator_ids),
            "source": self.source.value,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "LabeledInstance":
        return cls(
            features=FeatureVector.from_dict(d["features"]),
            label=d["label"],
            annotator_ids=tuple(d.get("annotator_ids", ())),
            source=LabelSource(d.get("source", "seed")),
        )


@dataclass(frozen=True)
class MetricsReport:
    """Per-class precision/recall/F1 plus accuracy, from confusion counts.

    Class 1 (trusted) is the positive class: tp counts trusted users
    predicted trusted, tn untrusted predicted untrusted.
    """

    tp: int
    fp: int
    fn: int
    tn: int
    folds: int = 1

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            _check_counter(name, getattr(self, name))
        if self.total == 0:
            raise ValidationError("empty confusion matrix")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    def precision(self, cls: int) -> float:
        if cls == TRUSTED:
            denom = self.tp + self.fp
            return self.tp / denom if denom else 0.0
        denom = self.tn + self.fn
        return self.tn / denom if denom else 0.0

    def recall(self, cls: int) -> float:
        if cls == TRUSTED:
            denom = self.tp + self.fn
            return self.tp / denom if denom else 0.0
        denom = self.tn + self.fp
        return self.tn / denom if denom else 0.0

    def f1(self, cls: int) -> float:
        p, r = self.precision(cls), self.recall(cls)
        return 2 * p * r / (p + r) if (p + r) > 0 else 0.0

    def to_dict(self) -> dict:
        return {
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "folds": self.folds,
            "accuracy": self.accuracy,
            "precision_0": self.precision(UNTRUSTED),
            "recall_0": self.recall(UNTRUSTED),
            "f1_0": self.f1(UNTRUSTED),
            "precision_1": self.precision(TRUSTED),
            "recall_1": self.recall(TRUSTED),
            "f1_1": self.f1(TRUSTED),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "MetricsReport":
        c = d["confusion"]
        return cls(tp=c["tp"], fp=c["fp"], fn=c["fn"], tn=c["tn"], folds=d.get("folds", 1))


@dataclass
class ModelState:
    """A trained classifier's metadata and round-by-round evaluation history."""

    learner_kind: LearnerKind
    hyperparameters: dict = field(default_factory=dict)
    trained: bool = False
    training_set_size: int = 0
    history: list = field(default_factory=list)  # [(round_index, MetricsReport)]
    model: Any = None  # the fitted learner; not serialized

    def record(self, round_index: int, report: MetricsReport) -> None:
        if self.history and round_index <= self.history[-1][0]:
            raise ValidationError(
                f"round_index must increase: {round_index} after {self.history[-1][0]}"
            )
        self.history.append((round_index, report))

    def to_dict(self) -> dict:
        return {
            "learner_kind": self.learner_kind.value,
            "hyperparameters": dict(self.hyperparameters),
            "trained": self.trained,
            "training_set_size": self.training_set_size,
            "history": [[r, m.to_dict()] for r, m in self.history],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ModelState":
        state = cls(
            learner_kind=LearnerKind(d["learner_kind"]),
            hyperparameters=dict(d.get("hyperparameters", {})),
            trained=d.get("trained", False),
            training_set_size=d.get("training_set_size", 0),
        )
        for r, m in d.get("history", []):
            state.record(r, MetricsReport.from_dict(m))
        return state


def distinct_user_ids(items: Iterable) -> set:
    """Collect user ids from profiles, vectors or labeled instances."""
    out = set()
    for it in items:
        out.add(it.user_id)
    return out


def write_vectors_jsonl(vectors: Iterable["FeatureVector"], path) -> None:
    """One JSON object per line, keys sorted for stable diffs."""
    import json

    with open(path, "w", encoding="utf-8") as fh:
        for vector in vectors:
            fh.write(json.dumps(vector.to_dict(), sort_keys=True) + "\n")


def read_vectors_jsonl(path) -> list:
    import json

    from trustlens.errors import ParseError

    vectors = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                vectors.append(FeatureVector.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError,
                    ValidationError) as exc:
                raise ParseError(f"bad feature record: {exc}",
                                 line=line_no, path=str(path))
    return vectors
