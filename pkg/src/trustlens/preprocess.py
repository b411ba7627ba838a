"""Dataset-level feature conditioning for the classifiers.

Pipeline: clip unbounded features at symmetric percentiles, then min-max
everything to [0, 1]. Fitted parameters are frozen and serializable so a
pipeline can be replayed bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from trustlens.model import FEATURE_FIELDS, FeatureVector, LabeledInstance

#: Features with no a-priori upper bound; these get percentile-clipped.
DEFAULT_UNBOUNDED = frozenset({
    "followers",
    "friends",
    "statuses",
    "listed",
    "total_likes",
    "total_retweets",
    "retweet_ratio",
    "like_ratio",
    "social_reputation",
    "retweet_hindex",
    "liked_hindex",
})

#: Classifier feature set: drops the tweet-volume count (an outlier-prone
#: discriminator) and the URL presence pair (near-identical across classes),
#: plus the raw sentiment class counts, keeping 15 informative features.
DEFAULT_MASK = (
    "followers",
    "friends",
    "listed",
    "total_retweets",
    "total_likes",
    "retweet_ratio",
    "like_ratio",
    "hashtag_ratio",
    "original_ratio",
    "social_reputation",
    "retweet_hindex",
    "liked_hindex",
    "sentiment_score",
    "tweet_credibility",
    "influence",
)

DEFAULT_PERCENTILE = 99.0


@dataclass(frozen=True)
class NormalizationParams:
    """Per-feature clip and min-max bounds, frozen after fit."""

    bounds: Mapping[str, tuple]  # name -> (clip_low, clip_high, min, max)
    percentile: float

    def __post_init__(self):
        if not 50.0 < self.percentile <= 100.0:
            raise ValueError(f"percentile must lie in (50, 100], got {self.percentile}")
        for name, (clip_low, clip_high, lo, hi) in self.bounds.items():
            if clip_low > clip_high or lo > hi:
                raise ValueError(f"inverted bounds for {name}")
        object.__setattr__(self, "bounds", MappingProxyType(dict(self.bounds)))

    def normalize_value(self, name: str, value: float) -> float:
        clip_low, clip_high, lo, hi = self.bounds[name]
        x = min(clip_high, max(clip_low, float(value)))
        if hi == lo:
            return 0.0
        return min(1.0, max(0.0, (x - lo) / (hi - lo)))

    def to_dict(self) -> dict:
        return {
            "percentile": self.percentile,
            "bounds": {k: list(v) for k, v in self.bounds.items()},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "NormalizationParams":
        return cls(
            bounds={k: tuple(v) for k, v in d["bounds"].items()},
            percentile=d["percentile"],
        )


def fit(
    vectors: Sequence[FeatureVector],
    percentile: float = DEFAULT_PERCENTILE,
    unbounded_features: Iterable[str] = DEFAULT_UNBOUNDED,
) -> NormalizationParams:
    """Learn clip and min-max bounds from a dataset.

    Unbounded features are clipped at the (100 - p) and p percentiles
    (linear interpolation between closest ranks); min/max are taken after
    clipping. percentile 100 clips nothing.
    """
    vectors = list(vectors)
    if not vectors:
        raise ValueError("empty dataset")
    unbounded = set(unbounded_features)
    unknown = unbounded - set(FEATURE_FIELDS)
    if unknown:
        raise KeyError(f"unknown features in unbounded set: {sorted(unknown)}")

    bounds = {}
    for name in FEATURE_FIELDS:
        column = np.array([v.feature(name) for v in vectors], dtype=float)
        if name in unbounded:
            clip_low = float(np.percentile(column, 100.0 - percentile))
            clip_high = float(np.percentile(column, percentile))
        else:
            clip_low = float(column.min())
            clip_high = float(column.max())
        clipped = np.clip(column, clip_low, clip_high)
        bounds[name] = (clip_low, clip_high, float(clipped.min()), float(clipped.max()))
    return NormalizationParams(bounds=bounds, percentile=percentile)


def transform(vector: FeatureVector, params: NormalizationParams) -> FeatureVector:
    """Clamp-then-scale every feature field into [0, 1]."""
    changes = {
        name: params.normalize_value(name, vector.feature(name))
        for name in FEATURE_FIELDS
    }
    changes["normalized"] = True
    return vector.replace(**changes)


def transform_dataset(
    vectors: Sequence[FeatureVector], params: NormalizationParams
) -> list:
    return [transform(v, params) for v in vectors]


def correlation_report(labeled: Sequence[LabeledInstance]) -> dict:
    """Pearson r of each feature column against the 0/1 label.

    Constant columns get r = 0.0 and degenerate = True instead of NaN.
    """
    labeled = list(labeled)
    if len(labeled) < 2:
        raise ValueError("need at least 2 labeled instances")
    y = np.array([inst.label for inst in labeled], dtype=float)
    if y.min() == y.max():
        raise ValueError("single-class dataset")
    report = {}
    y_centered = y - y.mean()
    y_norm = float(np.sqrt((y_centered ** 2).sum()))
    for name in FEATURE_FIELDS:
        x = np.array([inst.features.feature(name) for inst in labeled], dtype=float)
        x_centered = x - x.mean()
        x_norm = float(np.sqrt((x_centered ** 2).sum()))
        if x_norm == 0.0:
            report[name] = {"r": 0.0, "degenerate": True}
        else:
            r = float((x_centered @ y_centered) / (x_norm * y_norm))
            report[name] = {"r": r, "degenerate": False}
    return report


def feature_mask(mode: str = "default", custom: Optional[Sequence[str]] = None) -> list:
    """Ordered feature-name list the classifiers train on.

    default: the 15-feature curated set; all: every numeric field;
    custom: caller-supplied names, validated.
    """
    if mode == "default":
        return list(DEFAULT_MASK)
    if mode == "all":
        return list(FEATURE_FIELDS)
    if mode == "custom":
        if not custom:
            raise ValueError("custom mask needs at least one feature name")
        unknown = [n for n in custom if n not in FEATURE_FIELDS]
        if unknown:
            raise KeyError(f"unknown feature name: {unknown[0]!r}")
        return list(custom)
    raise ValueError(f"unknown mask mode {mode!r}")


def matrix(vectors: Sequence[FeatureVector], names: Sequence[str]) -> np.ndarray:
    """Stack vectors into an (n, d) float matrix in mask order."""
    return np.array([[v.feature(n) for n in names] for v in vectors], dtype=float)
