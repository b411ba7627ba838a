"""Derived per-user scores and the two-pass dataset scoring pipeline.

The influence score averages five components that live on wildly different
scales (log-reputation, integer h-indexes, unit ratios). They are min-max
normalized across the whole dataset first, so influence is in [0, 1] and is
meaningful only relative to the cohort it was computed in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

from trustlens import features as feats
from trustlens import sentiment
from trustlens.model import (
    FeatureVector,
    TweetRecord,
    UserProfile,
    read_vectors_jsonl,
)

#: FeatureVector fields blended into the influence score.
INFLUENCE_COMPONENTS = (
    "sentiment_score",
    "tweet_credibility",
    "social_reputation",
    "retweet_hindex",
    "liked_hindex",
)


def h_index(counts: Sequence[int]) -> int:
    """Largest h such that at least h entries are >= h."""
    ranked = sorted(counts, reverse=True)
    h = 0
    for i, count in enumerate(ranked, start=1):
        if count >= i:
            h = i
        else:
            break
    return h


def social_reputation(followers: int, statuses: int, friends: int) -> float:
    """Log-scale reputation: followers help twice, statuses once, friends hurt.

    The +1 inside each log keeps zero counts defined.
    """
    return (
        2 * math.log10(1 + followers)
        + math.log10(1 + statuses)
        - math.log10(1 + friends)
    )


def sentiment_score(n_pos: int, n_neu: int, n_neg: int) -> float:
    """Non-negative share of the user's analyzed tweets."""
    total = n_pos + n_neu + n_neg
    if total == 0:
        raise ValueError("no analyzed tweets")
    return (n_neu + n_pos) / total


def tweet_credibility(r_ret: float, r_lik: float, r_has: float,
                      r_url: float, r_ori: float) -> float:
    """Mean of the four engagement ratios, scaled by original content."""
    for v in (r_ret, r_lik, r_has, r_url, r_ori):
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"ratio must be finite and non-negative, got {v}")
    return ((r_ret + r_lik + r_has + r_url) / 4) * r_ori


def influence_score(sen_s: float, twt_cr: float, r_s: float,
                    r_hind: float, l_hind: float) -> float:
    """Mean of the five already-normalized components."""
    components = (sen_s, twt_cr, r_s, r_hind, l_hind)
    for v in components:
        if not -1e-12 <= v <= 1 + 1e-12:
            raise ValueError("unnormalized component")
    return sum(components) / 5


@dataclass(frozen=True)
class ComponentRanges:
    """Dataset (min, max) of each influence component, frozen after fit."""

    ranges: Mapping[str, tuple]

    def __post_init__(self):
        for name in INFLUENCE_COMPONENTS:
            if name not in self.ranges:
                raise ValueError(f"missing range for {name}")
            lo, hi = self.ranges[name]
            if lo > hi:
                raise ValueError(f"range for {name} has min > max")
        object.__setattr__(self, "ranges", MappingProxyType(dict(self.ranges)))

    def normalize(self, name: str, value: float) -> float:
        lo, hi = self.ranges[name]
        if hi == lo:
            return 0.0
        x = (value - lo) / (hi - lo)
        return min(1.0, max(0.0, x))

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in self.ranges.items()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ComponentRanges":
        return cls(ranges={k: (v[0], v[1]) for k, v in d.items()})


def fit_component_ranges(vectors: Iterable[FeatureVector]) -> ComponentRanges:
    vectors = list(vectors)
    if not vectors:
        raise ValueError("empty dataset")
    ranges = {}
    for name in INFLUENCE_COMPONENTS:
        values = [v.feature(name) for v in vectors]
        ranges[name] = (min(values), max(values))
    return ComponentRanges(ranges=ranges)


def raw_vector(
    profile: UserProfile,
    tweets: Sequence[TweetRecord],
    lexicon: sentiment.Lexicon,
    dead_zone: float = sentiment.DEFAULT_DEAD_ZONE,
    denominator: str = feats.DENOMINATOR_STATUSES,
) -> FeatureVector:
    """First pass: every feature except influence (needs dataset context)."""
    n_t = profile.statuses
    r_ret = feats.retweet_ratio(tweets, n_t, denominator)
    r_lik = feats.liked_ratio(tweets, n_t, denominator)
    r_url = feats.url_ratio(tweets, n_t, denominator)
    r_has = feats.hashtag_ratio(tweets, n_t, denominator)
    r_ori = feats.original_content_ratio(tweets, n_t, denominator)
    n_pos, n_neu, n_neg = sentiment.class_counts(
        (t.text for t in tweets), lexicon, dead_zone)
    if tweets:
        sen_s = sentiment_score(n_pos, n_neu, n_neg)
    else:
        sen_s = 0.0  # no collected tweets to analyze
    return FeatureVector(
        user_id=profile.user_id,
        followers=profile.followers,
        friends=profile.friends,
        statuses=profile.statuses,
        listed=profile.listed,
        total_retweets=sum(t.retweet_count for t in tweets),
        total_likes=sum(t.like_count for t in tweets),
        url_tweets=sum(1 for t in tweets if t.has_url),
        retweet_ratio=r_ret,
        like_ratio=r_lik,
        url_ratio=r_url,
        hashtag_ratio=r_has,
        original_ratio=r_ori,
        social_reputation=social_reputation(
            profile.followers, profile.statuses, profile.friends),
        retweet_hindex=h_index([t.retweet_count for t in tweets]),
        liked_hindex=h_index([t.like_count for t in tweets]),
        positive_tweets=n_pos,
        neutral_tweets=n_neu,
        negative_tweets=n_neg,
        sentiment_score=sen_s,
        tweet_credibility=tweet_credibility(r_ret, r_lik, r_has, r_url, r_ori),
        influence=None,
    )


def apply_influence(vector: FeatureVector, context: ComponentRanges) -> FeatureVector:
    """Second pass: normalize the five components and average them."""
    normalized = [
        context.normalize(name, vector.feature(name))
        for name in INFLUENCE_COMPONENTS
    ]
    return vector.replace(influence=influence_score(*normalized))


def score_user(
    profile: UserProfile,
    tweets: Sequence[TweetRecord],
    lexicon: sentiment.Lexicon,
    context: Optional[ComponentRanges] = None,
    dead_zone: float = sentiment.DEFAULT_DEAD_ZONE,
    denominator: str = feats.DENOMINATOR_STATUSES,
) -> FeatureVector:
    """Full vector for one user.

    Without a dataset context the user is its own cohort, so every
    component range is degenerate and influence comes out 0.0.
    """
    vector = raw_vector(profile, tweets, lexicon, dead_zone, denominator)
    if context is None:
        context = fit_component_ranges([vector])
    return apply_influence(vector, context)


def score_dataset(
    profiles: Sequence[UserProfile],
    tweets_by_user: Mapping[str, Sequence[TweetRecord]],
    lexicon: sentiment.Lexicon,
    dead_zone: float = sentiment.DEFAULT_DEAD_ZONE,
    denominator: str = feats.DENOMINATOR_STATUSES,
) -> list:
    """Two-pass scoring of a whole cohort; returns vectors in profile order."""
    raw = [
        raw_vector(p, tuple(tweets_by_user.get(p.user_id, ())), lexicon,
                   dead_zone, denominator)
        for p in profiles
    ]
    if not raw:
        return []
    context = fit_component_ranges(raw)
    return [apply_influence(v, context) for v in raw]


FEATURES_FILE = "features.jsonl"


def dataset_vectors(
    dataset_dir,
    dead_zone: float = sentiment.DEFAULT_DEAD_ZONE,
    denominator: str = feats.DENOMINATOR_STATUSES,
) -> tuple:
    """Feature vectors plus tweet texts for a dataset directory.

    A directory holding a precomputed features.jsonl is used as-is, which
    keeps downstream runs byte-stable and lets scored cohorts ship without
    raw tweet material. Otherwise the users/tweets files are loaded and
    scored from scratch. Returns (vectors, tweets_by_user); the tweet map
    is empty when only features are available.
    """
    from pathlib import Path

    from trustlens import ingest

    root = Path(dataset_dir)
    features_path = root / FEATURES_FILE
    if features_path.exists():
        vectors = read_vectors_jsonl(features_path)
        tweets_by_user: Mapping = {}
        if (root / ingest.USERS_FILE).exists() and \
                (root / ingest.TWEETS_FILE).exists():
            _, tweets_by_user, _ = ingest.load_dataset(root)
        return vectors, tweets_by_user
    profiles, tweets_by_user, _ = ingest.load_dataset(root)
    lexicon = sentiment.load_lexicon()
    vectors = score_dataset(profiles, tweets_by_user, lexicon,
                            dead_zone=dead_zone, denominator=denominator)
    return vectors, tweets_by_user
