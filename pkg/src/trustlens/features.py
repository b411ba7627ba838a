"""Per-user ratio features computed from a user's collected tweets.

Numerators sum over the collected tweets; the denominator is the
account-level lifetime statuses count (configurable to the collected-tweet
count instead). Engagement ratios can therefore exceed 1 before
normalization; presence ratios cannot.
"""

from __future__ import annotations

from typing import Sequence

from trustlens.model import TweetRecord, UserProfile

DENOMINATOR_STATUSES = "statuses"
DENOMINATOR_COLLECTED = "collected"


def _denominator(tweets: Sequence[TweetRecord], n_t: int, mode: str) -> int:
    if mode == DENOMINATOR_COLLECTED:
        return len(tweets)
    if mode == DENOMINATOR_STATUSES:
        return n_t
    raise ValueError(f"unknown denominator mode {mode!r}")


def retweet_ratio(tweets: Sequence[TweetRecord], n_t: int,
                  mode: str = DENOMINATOR_STATUSES) -> float:
    """Total retweets earned per lifetime status."""
    denom = _denominator(tweets, n_t, mode)
    if denom == 0:
        raise ValueError("inactive user")
    return sum(t.retweet_count for t in tweets) / denom


def liked_ratio(tweets: Sequence[TweetRecord], n_t: int,
                mode: str = DENOMINATOR_STATUSES) -> float:
    """Total likes earned per lifetime status."""
    denom = _denominator(tweets, n_t, mode)
    if denom == 0:
        raise ValueError("inactive user")
    return sum(t.like_count for t in tweets) / denom


def url_ratio(tweets: Sequence[TweetRecord], n_t: int,
              mode: str = DENOMINATOR_STATUSES) -> float:
    denom = _denominator(tweets, n_t, mode)
    if denom == 0:
        raise ValueError("inactive user")
    n_url = sum(1 for t in tweets if t.has_url)
    if n_url > denom:
        raise ValueError("url tweet count exceeds status count")
    return n_url / denom


def hashtag_ratio(tweets: Sequence[TweetRecord], n_t: int,
                  mode: str = DENOMINATOR_STATUSES) -> float:
    denom = _denominator(tweets, n_t, mode)
    if denom == 0:
        raise ValueError("inactive user")
    n_has = sum(1 for t in tweets if t.has_hashtag)
    if n_has > denom:
        raise ValueError("hashtag tweet count exceeds status count")
    return n_has / denom


def original_content_ratio(tweets: Sequence[TweetRecord], n_t: int,
                           mode: str = DENOMINATOR_STATUSES) -> float:
    """Share of statuses that are the user's own content, clamped to [0, 1]."""
    denom = _denominator(tweets, n_t, mode)
    if denom == 0:
        raise ValueError("inactive user")
    n_retweeted_other = sum(1 for t in tweets if t.is_retweet_of_other)
    value = (denom - n_retweeted_other) / denom
    return min(1.0, max(0.0, value))


def follower_following_ratio(profile: UserProfile) -> float:
    """Diagnostic only; 1.0 is the balanced account."""
    if profile.friends == 0:
        raise ValueError("zero friends")
    return profile.followers / profile.friends
