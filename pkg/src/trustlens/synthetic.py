"""Synthetic cohort generator with a known trusted/untrusted ground truth.

Real labels for this problem come from manual annotation, so the experiment
harness fabricates a cohort with three layers:

1. Feature texture. Each class mixes two account archetypes (prominent and
   grassroots for trusted, amplifier and dormant for untrusted) so trusted
   users run high on reputation, h-indexes, sentiment and credibility and
   untrusted users run low, with overlap. Derived fields go through the real
   formulas (social reputation, tweet credibility, dataset-normalized
   influence), never through direct sampling.

2. Ground truth. The label is a credibility rule, not the archetype: a
   disjunction of high-indicator conjunctions (reputable and positive,
   consistently engaging, appreciated original content) evaluated against
   cohort quantiles. On top of the rule, a handful of axis-aligned exception
   pockets flip the label in small feature-space boxes. Pockets are what a
   targeted annotation strategy can genuinely resolve: they are invisible at
   small sample sizes and learnable once queries concentrate on them.

3. Annotator error. A small fraction of labels is flipped uniformly at
   random, which caps attainable accuracy below 1.

Everything is driven by one seeded generator, so a (seed, size) pair pins
the cohort exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from trustlens import scoring
from trustlens.errors import OracleError
from trustlens.model import TRUSTED, UNTRUSTED, FeatureVector

#: Per-archetype sampling parameters. ln_* are lognormal (mu, sigma);
#: beta_* are Beta(a, b); pois_* are Poisson means.
_MODES = {
    TRUSTED: [
        {  # prominent account: large audience, strong engagement
            "weight": 0.4,
            "ln_followers": (9.2, 1.0),
            "ln_friends": (5.3, 0.9),
            "ln_statuses": (8.4, 0.7),
            "beta_listed_frac": (3, 150),
            "beta_retweet_ratio": (2, 30),
            "beta_like_ratio": (6, 6),
            "beta_hashtag": (2, 8),
            "beta_original": (9, 2),
            "beta_sentiment": (9, 2.5),
            "pois_rh": 22.0,
            "pois_lh": 30.0,
        },
        {  # grassroots account: modest audience, consistent own content
            "weight": 0.6,
            "ln_followers": (7.6, 0.9),
            "ln_friends": (5.9, 0.9),
            "ln_statuses": (8.1, 0.7),
            "beta_listed_frac": (2, 250),
            "beta_retweet_ratio": (2, 40),
            "beta_like_ratio": (4, 7),
            "beta_hashtag": (2, 6),
            "beta_original": (7, 2),
            "beta_sentiment": (7, 3),
            "pois_rh": 12.0,
            "pois_lh": 16.0,
        },
    ],
    UNTRUSTED: [
        {  # amplifier: retweets and hashtags, little original content
            "weight": 0.5,
            "ln_followers": (6.9, 1.0),
            "ln_friends": (7.2, 0.9),
            "ln_statuses": (6.6, 0.8),
            "beta_listed_frac": (1, 400),
            "beta_retweet_ratio": (5, 12),
            "beta_like_ratio": (2, 9),
            "beta_hashtag": (5, 4),
            "beta_original": (3, 5),
            "beta_sentiment": (4, 5),
            "pois_rh": 6.0,
            "pois_lh": 5.0,
        },
        {  # dormant account: low engagement across the board
            "weight": 0.5,
            "ln_followers": (5.8, 1.1),
            "ln_friends": (6.6, 1.0),
            "ln_statuses": (6.2, 0.8),
            "beta_listed_frac": (1, 600),
            "beta_retweet_ratio": (2, 20),
            "beta_like_ratio": (2, 12),
            "beta_hashtag": (3, 6),
            "beta_original": (5, 4),
            "beta_sentiment": (5, 4),
            "pois_rh": 2.0,
            "pois_lh": 3.0,
        },
    ],
}

_URL_BETA = (2, 5)  # URL share is deliberately class-independent

#: Features eligible to host exception pockets.
_POCKET_FEATURES = ("social_reputation", "sentiment_score", "retweet_hindex",
                    "like_ratio", "tweet_credibility")


@dataclass(frozen=True)
class SyntheticCohort:
    vectors: Tuple[FeatureVector, ...]  # influence filled, cohort order
    labels: Dict[str, int]  # user_id -> ground-truth label

    def oracle(self) -> Callable[[FeatureVector], int]:
        """Annotator stand-in: answers by user_id, refuses strangers."""
        labels = self.labels

        def ask(vector: FeatureVector) -> int:
            label = labels.get(vector.user_id)
            if label is None:
                raise OracleError(f"unknown user {vector.user_id!r}")
            return label

        return ask


def _sample_features(rng: np.random.Generator, n_users: int,
                     trusted_share: float) -> Dict[str, np.ndarray]:
    prototype = np.array(
        [TRUSTED] * int(round(n_users * trusted_share))
        + [UNTRUSTED] * (n_users - int(round(n_users * trusted_share))))
    rng.shuffle(prototype)

    mode_of = np.zeros(n_users, dtype=int)
    for cls in (TRUSTED, UNTRUSTED):
        idx = np.flatnonzero(prototype == cls)
        weights = [m["weight"] for m in _MODES[cls]]
        mode_of[idx] = rng.choice(len(weights), size=len(idx), p=weights)

    cols = {name: np.zeros(n_users) for name in (
        "followers", "friends", "statuses", "listed",
        "retweet_ratio", "like_ratio", "url_ratio", "hashtag_ratio",
        "original_ratio", "sentiment_target", "retweet_hindex",
        "liked_hindex",
    )}
    for cls in (TRUSTED, UNTRUSTED):
        for mode_index, mode in enumerate(_MODES[cls]):
            idx = np.flatnonzero((prototype == cls) & (mode_of == mode_index))
            if idx.size == 0:
                continue
            k = idx.size
            cols["followers"][idx] = np.maximum(
                1, np.rint(rng.lognormal(*mode["ln_followers"], k)))
            cols["friends"][idx] = np.maximum(
                1, np.rint(rng.lognormal(*mode["ln_friends"], k)))
            cols["statuses"][idx] = np.maximum(
                10, np.rint(rng.lognormal(*mode["ln_statuses"], k)))
            cols["listed"][idx] = np.rint(
                cols["followers"][idx] * rng.beta(*mode["beta_listed_frac"], k))
            cols["retweet_ratio"][idx] = rng.beta(*mode["beta_retweet_ratio"], k)
            cols["like_ratio"][idx] = rng.beta(*mode["beta_like_ratio"], k)
            cols["url_ratio"][idx] = rng.beta(*_URL_BETA, k)
            cols["hashtag_ratio"][idx] = rng.beta(*mode["beta_hashtag"], k)
            cols["original_ratio"][idx] = rng.beta(*mode["beta_original"], k)
            cols["sentiment_target"][idx] = rng.beta(*mode["beta_sentiment"], k)
            cols["retweet_hindex"][idx] = rng.poisson(mode["pois_rh"], k)
            cols["liked_hindex"][idx] = rng.poisson(mode["pois_lh"], k)
    return cols


def _build_vectors(rng: np.random.Generator, n_users: int,
                   cols: Dict[str, np.ndarray]) -> Tuple[FeatureVector, ...]:
    # analyzed-tweet counts consistent with the sentiment target
    analyzed = rng.integers(50, 300, size=n_users)
    n_neg = np.rint((1.0 - cols["sentiment_target"]) * analyzed).astype(int)
    n_nonneg = analyzed - n_neg
    n_pos = np.rint(n_nonneg * rng.uniform(0.3, 0.9, size=n_users)).astype(int)
    n_neu = n_nonneg - n_pos

    width = len(str(n_users))
    raw = []
    for i in range(n_users):
        statuses = float(cols["statuses"][i])
        r_ret = float(cols["retweet_ratio"][i])
        r_lik = float(cols["like_ratio"][i])
        r_url = float(cols["url_ratio"][i])
        r_has = float(cols["hashtag_ratio"][i])
        r_ori = float(cols["original_ratio"][i])
        raw.append(FeatureVector(
            user_id=f"u{i:0{width}d}",
            followers=float(cols["followers"][i]),
            friends=float(cols["friends"][i]),
            statuses=statuses,
            listed=float(cols["listed"][i]),
            total_retweets=float(np.rint(r_ret * statuses)),
            total_likes=float(np.rint(r_lik * statuses)),
            url_tweets=float(np.rint(r_url * statuses)),
            retweet_ratio=r_ret,
            like_ratio=r_lik,
            url_ratio=r_url,
            hashtag_ratio=r_has,
            original_ratio=r_ori,
            social_reputation=scoring.social_reputation(
                int(cols["followers"][i]), int(statuses),
                int(cols["friends"][i])),
            retweet_hindex=float(cols["retweet_hindex"][i]),
            liked_hindex=float(cols["liked_hindex"][i]),
            positive_tweets=int(n_pos[i]),
            neutral_tweets=int(n_neu[i]),
            negative_tweets=int(n_neg[i]),
            sentiment_score=scoring.sentiment_score(
                int(n_pos[i]), int(n_neu[i]), int(n_neg[i])),
            tweet_credibility=scoring.tweet_credibility(
                r_ret, r_lik, r_has, r_url, r_ori),
            influence=None,
        ))
    context = scoring.fit_component_ranges(raw)
    return tuple(scoring.apply_influence(v, context) for v in raw)


def _credibility_rule(vectors) -> np.ndarray:
    get = lambda name: np.array([v.feature(name) for v in vectors])
    rs, sen = get("social_reputation"), get("sentiment_score")
    rh, lh = get("retweet_hindex"), get("liked_hindex")
    twt = get("tweet_credibility")
    lik, ori = get("like_ratio"), get("original_ratio")

    def hi(x, q):
        return x > np.quantile(x, q)

    reputable_positive = hi(rs, 0.62) & hi(sen, 0.55) & hi(lik, 0.40)
    consistently_engaging = hi(rh, 0.62) & hi(lh, 0.55) & hi(twt, 0.50)
    appreciated_original = hi(lik, 0.68) & hi(ori, 0.58) & hi(rs, 0.40)
    return (reputable_positive | consistently_engaging
            | appreciated_original).astype(int)


def _exception_pockets(rng: np.random.Generator, vectors, n_pockets: int,
                       pocket_half: Tuple[float, float]) -> np.ndarray:
    """Boolean mask of users inside any label-flipping pocket."""
    n = len(vectors)
    ranks = {}
    for name in _POCKET_FEATURES:
        x = np.array([v.feature(name) for v in vectors])
        order = np.argsort(x, kind="stable")
        r = np.empty(n)
        r[order] = np.arange(n) / max(n - 1, 1)
        ranks[name] = r
    inside = np.zeros(n, dtype=bool)
    for _ in range(n_pockets):
        a, b = rng.choice(len(_POCKET_FEATURES), size=2, replace=False)
        ra = ranks[_POCKET_FEATURES[a]]
        rb = ranks[_POCKET_FEATURES[b]]
        ca, cb = rng.uniform(0.10, 0.90, size=2)
        wa, wb = rng.uniform(*pocket_half, size=2)
        inside |= (np.abs(ra - ca) < wa) & (np.abs(rb - cb) < wb)
    return inside


def make_cohort(
    n_users: int = 5000,
    seed: int = 0,
    trusted_share: float = 0.55,
    flip_rate: float = 0.004,
    n_pockets: int = 5,
    pocket_half: Tuple[float, float] = (0.07, 0.09),
) -> SyntheticCohort:
    """Deterministic synthetic cohort of the given size."""
    if n_users < 10:
        raise ValueError("cohort needs at least 10 users")
    if not 0.0 < trusted_share < 1.0:
        raise ValueError("trusted_share must lie in (0, 1)")
    if not 0.0 <= flip_rate < 0.5:
        raise ValueError("flip_rate must lie in [0, 0.5)")
    rng = np.random.default_rng(seed)

    cols = _sample_features(rng, n_users, trusted_share)
    vectors = _build_vectors(rng, n_users, cols)

    truth = _credibility_rule(vectors)
    if n_pockets > 0:
        pocket = _exception_pockets(rng, vectors, n_pockets, pocket_half)
        truth = np.where(pocket, 1 - truth, truth)
    if flip_rate > 0:
        flip = rng.random(n_users) < flip_rate
        truth = np.where(flip, 1 - truth, truth)

    labels = {v.user_id: int(t) for v, t in zip(vectors, truth)}
    return SyntheticCohort(vectors=vectors, labels=labels)


def seed_labels(
    cohort: SyntheticCohort,
    n_trusted: int = 582,
    n_untrusted: int = 418,
) -> Dict[str, int]:
    """First-encountered seed annotation with exact per-class counts."""
    out: Dict[str, int] = {}
    need = {TRUSTED: n_trusted, UNTRUSTED: n_untrusted}
    for vector in cohort.vectors:
        label = cohort.labels[vector.user_id]
        if need[label] > 0:
            out[vector.user_id] = label
            need[label] -= 1
        if not any(need.values()):
            return out
    raise ValueError(
        f"cohort too small for requested seed split (short {need})")
