#!/usr/bin/env python3
"""Independent expected-feature computation for the fixture dataset.

Recomputes every per-user feature straight from the raw fixture files
and the lexicon TSV, using only the standard library. This script must
never import the package under test; it is the second opinion the
pipeline integration test compares against, so the two code paths have
to stay independent.
"""

import csv
import json
import math
import re
from pathlib import Path

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "tests" / "fixtures"
LEXICON = HERE.parent / "src" / "trustlens" / "data" / "lexicon.tsv"

DEAD_ZONE = 0.05

URL = re.compile(r"(?:https?://|www\.)\S+")
MENTION = re.compile(r"@\w+")
SPLIT = re.compile(r"[^a-z0-9]+")

COLUMNS = [
    "user_id", "followers", "friends", "statuses", "listed",
    "total_retweets", "total_likes", "url_tweets", "retweet_ratio",
    "like_ratio", "url_ratio", "hashtag_ratio", "original_ratio",
    "social_reputation", "retweet_hindex", "liked_hindex",
    "positive_tweets", "neutral_tweets", "negative_tweets",
    "sentiment_score", "tweet_credibility", "influence",
]


def read_lexicon(path):
    weights, negators = {}, set()
    for line in path.read_text("utf-8").splitlines():
        if not line.strip():
            continue
        parts = line.split("\t")
        if parts[0] == "#negator":
            negators.add(parts[1].strip().lower())
            continue
        if parts[0].startswith("#"):
            continue
        weights[parts[0].strip().lower()] = float(parts[1])
    return weights, negators


def tokens(text):
    text = text.lower()
    text = URL.sub(" ", text)
    text = MENTION.sub(" ", text)
    text = text.replace("#", " ")
    return [t for t in SPLIT.split(text) if t]


def polarity(text, weights, negators):
    toks = tokens(text)
    hits = []
    for i, tok in enumerate(toks):
        if tok not in weights:
            continue
        w = weights[tok]
        if i > 0 and toks[i - 1] in negators:
            w = -w
        hits.append(w)
    return sum(hits) / len(hits) if hits else 0.0


def h_index(counts):
    # counting formulation, distinct from a sort-and-scan
    best = 0
    for h in range(len(counts), 0, -1):
        if sum(1 for c in counts if c >= h) >= h:
            best = h
            break
    return best


def main():
    weights, negators = read_lexicon(LEXICON)

    users = []
    for line in (FIXTURES / "raw_users.jsonl").read_text().splitlines():
        r = json.loads(line)
        if r.get("protected"):
            continue
        if r["followers_count"] <= 0 or r["friends_count"] <= 0:
            continue
        users.append(r)

    seen = set()
    tweets_by_user = {}
    for line in (FIXTURES / "raw_tweets.jsonl").read_text().splitlines():
        r = json.loads(line)
        uid = (r.get("user") or {}).get("id_str")
        if not uid or "retweet_count" not in r or "favorite_count" not in r:
            continue  # ingest rejects these
        if r["id"] in seen:
            continue  # first occurrence wins
        seen.add(r["id"])
        tweets_by_user.setdefault(uid, []).append(r)

    rows = []
    for u in users:
        uid = u["id_str"]
        tw = tweets_by_user.get(uid, [])
        statuses = u["statuses_count"]
        total_ret = sum(t["retweet_count"] for t in tw)
        total_lik = sum(t["favorite_count"] for t in tw)
        n_url = sum(1 for t in tw if (t.get("entities") or {}).get("urls"))
        n_has = sum(1 for t in tw if (t.get("entities") or {}).get("hashtags"))
        n_own = sum(1 for t in tw if "retweeted_status" not in t)

        r_ret = total_ret / statuses
        r_lik = total_lik / statuses
        r_url = n_url / statuses
        r_has = n_has / statuses
        r_ori = min(1.0, (statuses - (len(tw) - n_own)) / statuses)

        n_pos = n_neu = n_neg = 0
        for t in tw:
            p = polarity(t.get("full_text", ""), weights, negators)
            if p > DEAD_ZONE:
                n_pos += 1
            elif p < -DEAD_ZONE:
                n_neg += 1
            else:
                n_neu += 1
        sen = (n_pos + n_neu) / len(tw) if tw else 0.0

        rows.append({
            "user_id": uid,
            "followers": u["followers_count"],
            "friends": u["friends_count"],
            "statuses": statuses,
            "listed": u["listed_count"],
            "total_retweets": total_ret,
            "total_likes": total_lik,
            "url_tweets": n_url,
            "retweet_ratio": r_ret,
            "like_ratio": r_lik,
            "url_ratio": r_url,
            "hashtag_ratio": r_has,
            "original_ratio": r_ori,
            "social_reputation": (2 * math.log10(1 + u["followers_count"])
                                  + math.log10(1 + statuses)
                                  - math.log10(1 + u["friends_count"])),
            "retweet_hindex": h_index([t["retweet_count"] for t in tw]),
            "liked_hindex": h_index([t["favorite_count"] for t in tw]),
            "positive_tweets": n_pos,
            "neutral_tweets": n_neu,
            "negative_tweets": n_neg,
            "sentiment_score": sen,
            "tweet_credibility": ((r_ret + r_lik + r_has + r_url) / 4) * r_ori,
        })

    components = ("sentiment_score", "tweet_credibility", "social_reputation",
                  "retweet_hindex", "liked_hindex")
    spans = {c: (min(r[c] for r in rows), max(r[c] for r in rows))
             for c in components}
    for r in rows:
        parts = []
        for c in components:
            lo, hi = spans[c]
            x = 0.0 if hi == lo else (r[c] - lo) / (hi - lo)
            parts.append(min(1.0, max(0.0, x)))
        r["influence"] = sum(parts) / 5

    with open(FIXTURES / "expected_features.csv", "w", encoding="utf-8",
              newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COLUMNS)
        writer.writeheader()
        for r in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v
                             for k, v in r.items()})
    print(f"{len(rows)} users -> {FIXTURES / 'expected_features.csv'}")


if __name__ == "__main__":
    main()
