#!/usr/bin/env python3
"""Generate the raw API-shaped fixture dataset under tests/fixtures/.

Deterministic: re-running reproduces the same bytes. The files imitate a
platform export (id_str / followers_count / favorite_count / entities /
retweeted_status / full_text) and deliberately include records the
ingest step must reject or deduplicate.
"""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

POSITIVE = ["good", "great", "love", "nice", "amazing", "happy", "win",
            "best", "fine"]
NEGATIVE = ["bad", "awful", "hate", "terrible", "horrible", "sad", "lose",
            "worst", "boring"]
NEUTRAL = ["update", "today", "thread", "meeting", "schedule", "notes",
           "release", "weather", "coffee", "commute"]
NEGATORS = ["not", "never", "hardly"]


def sentence(rng):
    words = []
    for _ in range(rng.randint(4, 10)):
        bucket = rng.random()
        if bucket < 0.28:
            word = rng.choice(POSITIVE)
        elif bucket < 0.5:
            word = rng.choice(NEGATIVE)
        else:
            word = rng.choice(NEUTRAL)
        if bucket < 0.5 and rng.random() < 0.2:
            words.append(rng.choice(NEGATORS))
        words.append(word)
    if rng.random() < 0.25:
        words.append("@colleague")
    if rng.random() < 0.2:
        words.append("https://t.co/" + "".join(
            rng.choice("abcdefghij") for _ in range(8)))
    text = " ".join(words)
    if rng.random() < 0.3:
        text += " #daily"
    return text


def main():
    rng = random.Random(20240501)
    OUT.mkdir(parents=True, exist_ok=True)

    users = []
    for i in range(1, 21):
        followers = rng.randint(5, 40000)
        users.append({
            "id_str": f"10{i:02d}",
            "screen_name": f"user{i:02d}",
            "followers_count": followers,
            "friends_count": rng.randint(1, 3000),
            "statuses_count": rng.randint(40, 9000),
            "listed_count": rng.randint(0, max(1, followers // 50)),
            "protected": False,
        })
    # records the selection rule must drop
    users.append({"id_str": "9001", "screen_name": "locked",
                  "followers_count": 120, "friends_count": 80,
                  "statuses_count": 500, "listed_count": 2,
                  "protected": True})
    users.append({"id_str": "9002", "screen_name": "unheard",
                  "followers_count": 0, "friends_count": 50,
                  "statuses_count": 200, "listed_count": 0,
                  "protected": False})
    users.append({"id_str": "9003", "screen_name": "hermit",
                  "followers_count": 75, "friends_count": 0,
                  "statuses_count": 90, "listed_count": 1,
                  "protected": False})

    tweets = []
    next_id = 50000
    for i in range(1, 20):  # user 20 stays tweetless on purpose
        uid = f"10{i:02d}"
        heavy = rng.random() < 0.3  # a few accounts with viral tails
        for _ in range(rng.randint(8, 24)):
            next_id += rng.randint(1, 9)
            record = {
                "id": next_id,
                "user": {"id_str": uid},
                "retweet_count": (rng.randint(0, 600) if heavy
                                  else rng.randint(0, 25)),
                "favorite_count": (rng.randint(0, 900) if heavy
                                   else rng.randint(0, 40)),
                "full_text": sentence(rng),
                "entities": {
                    "urls": (["https://t.co/x"] if rng.random() < 0.25
                             else []),
                    "hashtags": (["daily"] if rng.random() < 0.35 else []),
                },
            }
            if rng.random() < 0.3:
                record["retweeted_status"] = {"id": next_id - 7}
            tweets.append(record)

    # duplicates: the reader must keep the first occurrence only
    for source in rng.sample(range(len(tweets)), 5):
        duplicate = dict(tweets[source])
        duplicate["retweet_count"] = 999999
        duplicate["favorite_count"] = 999999
        tweets.append(duplicate)
    # tweets by unknown authors are kept by ingest but inert downstream
    for _ in range(4):
        next_id += 3
        tweets.append({"id": next_id, "user": {"id_str": "31337"},
                       "retweet_count": 1, "favorite_count": 1,
                       "full_text": "great meeting", "entities": {}})
    # per-record failures land in the reject log
    tweets.append({"id": next_id + 1, "user": {"id_str": "1001"},
                   "favorite_count": 3, "full_text": "no counter here",
                   "entities": {}})
    tweets.append({"id": next_id + 2, "user": {},
                   "retweet_count": 2, "favorite_count": 3,
                   "full_text": "authorless", "entities": {}})
    rng.shuffle(tweets)

    with open(OUT / "raw_users.jsonl", "w", encoding="utf-8") as fh:
        for record in users:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    with open(OUT / "raw_tweets.jsonl", "w", encoding="utf-8") as fh:
        for record in tweets:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    print(f"{len(users)} user records, {len(tweets)} tweet records -> {OUT}")


if __name__ == "__main__":
    main()
