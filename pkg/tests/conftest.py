import numpy as np
import pytest

from trustlens.model import FeatureVector, TweetRecord, UserProfile


def make_profile(user_id="u1", followers=100, friends=10, statuses=50,
                 listed=5, is_public=True):
    return UserProfile(user_id=user_id, followers=followers, friends=friends,
                       statuses=statuses, listed=listed, is_public=is_public)


def make_tweet(tweet_id, user_id="u1", retweet_count=0, like_count=0,
               has_url=False, has_hashtag=False, is_retweet_of_other=False,
               text=""):
    return TweetRecord(tweet_id=tweet_id, user_id=user_id,
                       retweet_count=retweet_count, like_count=like_count,
                       has_url=has_url, has_hashtag=has_hashtag,
                       is_retweet_of_other=is_retweet_of_other, text=text)


def make_vector(user_id="u1", **fields):
    return FeatureVector(user_id=user_id, **fields)


def blobs(n=200, seed=7, separation=6.0, dim=2):
    """Two well-separated Gaussian clusters; labels 0/1."""
    rng = np.random.default_rng(seed)
    half = n // 2
    lo = rng.normal(0.0, 1.0, size=(half, dim))
    hi = rng.normal(separation, 1.0, size=(n - half, dim))
    X = np.vstack([lo, hi])
    y = np.array([0] * half + [1] * (n - half))
    order = rng.permutation(n)
    return X[order], y[order]


def circles(n=200, seed=7, inner=1.0, outer=3.0, noise=0.1):
    """Concentric rings; not linearly separable."""
    rng = np.random.default_rng(seed)
    half = n // 2
    theta = rng.uniform(0, 2 * np.pi, size=n)
    radius = np.concatenate([
        np.full(half, inner), np.full(n - half, outer),
    ]) + rng.normal(0, noise, size=n)
    X = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    y = np.array([0] * half + [1] * (n - half))
    order = rng.permutation(n)
    return X[order], y[order]


def xor_points():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0])
    return X, y


@pytest.fixture
def tmp_jsonl(tmp_path):
    """Write dict rows to a JSONL file and return its path."""
    import json

    def write(rows, name="data.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
        return path

    return write
