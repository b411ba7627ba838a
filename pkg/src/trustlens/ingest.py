"""File-based dataset ingestion.

Readers accept two record shapes per line: the raw export shape with API
field names (followers_count, favorite_count, entities, retweeted_status)
and the canonical shape this module itself persists. Records that fail
validation are routed to a reject log instead of aborting the run; only a
structurally unreadable file is fatal.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from trustlens.errors import ParseError
from trustlens.model import TweetRecord, UserProfile, ValidationError

USERS_FILE = "users.jsonl"
TWEETS_FILE = "tweets.jsonl"
MANIFEST_FILE = "manifest.json"
REJECTS_FILE = "rejects.jsonl"

STAT_FIELDS = ("statuses", "followers", "listed", "friends")


@dataclass(frozen=True)
class DatasetManifest:
    user_count: int
    tweet_count: int
    source_files: Tuple[str, ...] = ()
    filters_applied: Tuple[str, ...] = ()
    created_at: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["source_files"] = list(self.source_files)
        d["filters_applied"] = list(self.filters_applied)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "DatasetManifest":
        return cls(
            user_count=d["user_count"],
            tweet_count=d["tweet_count"],
            source_files=tuple(d.get("source_files", ())),
            filters_applied=tuple(d.get("filters_applied", ())),
            created_at=d.get("created_at", ""),
        )


def _as_str_id(value) -> str:
    if value is None:
        return ""
    return str(value)


def _as_count(record: Mapping, key: str):
    """Value of a count field, or None when absent; non-integers raise."""
    if key not in record or record[key] is None:
        return None
    value = record[key]
    if isinstance(value, bool):
        raise ValueError(f"bad {key}")
    if isinstance(value, str):
        value = int(value)
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError(f"bad {key}")
        value = int(value)
    return value


def _user_from_record(record: Mapping) -> UserProfile:
    """Build a validated, selection-rule-checked profile from either shape."""
    if "followers_count" in record:  # raw export shape
        mapped = {
            "user_id": _as_str_id(
                record.get("user_id") or record.get("id_str") or record.get("id")),
            "followers": _as_count(record, "followers_count"),
            "friends": _as_count(record, "friends_count"),
            "statuses": _as_count(record, "statuses_count"),
            "listed": _as_count(record, "listed_count"),
            "is_public": not record.get("protected", False),
        }
    else:
        mapped = {
            "user_id": _as_str_id(record.get("user_id")),
            "followers": _as_count(record, "followers"),
            "friends": _as_count(record, "friends"),
            "statuses": _as_count(record, "statuses"),
            "listed": _as_count(record, "listed"),
            "is_public": record.get("is_public", True),
        }
    for key in ("followers", "friends", "statuses", "listed"):
        if mapped[key] is None:
            raise ValueError(f"missing {key}")
    if not mapped["user_id"]:
        raise ValueError("missing user_id")
    if isinstance(mapped["is_public"], str):
        mapped["is_public"] = mapped["is_public"].strip().lower() in ("true", "1", "yes")
    return UserProfile.ingested(**mapped)


def _tweet_from_record(record: Mapping) -> TweetRecord:
    if "tweet_id" in record:  # canonical shape
        mapped = {
            "tweet_id": _as_count(record, "tweet_id"),
            "user_id": _as_str_id(record.get("user_id")),
            "retweet_count": _as_count(record, "retweet_count"),
            "like_count": _as_count(record, "like_count"),
            "has_url": bool(record.get("has_url", False)),
            "has_hashtag": bool(record.get("has_hashtag", False)),
            "is_retweet_of_other": bool(record.get("is_retweet_of_other", False)),
            "text": record.get("text", ""),
        }
    else:  # raw export shape
        user = record.get("user") or {}
        entities = record.get("entities") or {}
        mapped = {
            "tweet_id": _as_count(record, "id"),
            "user_id": _as_str_id(
                record.get("user_id") or user.get("id_str") or user.get("id")),
            "retweet_count": _as_count(record, "retweet_count"),
            "like_count": _as_count(record, "favorite_count"),
            "has_url": bool(entities.get("urls")),
            "has_hashtag": bool(entities.get("hashtags")),
            "is_retweet_of_other": "retweeted_status" in record,
            "text": record.get("full_text", record.get("text", "")),
        }
    for key in ("tweet_id", "retweet_count", "like_count"):
        if mapped[key] is None:
            raise ValueError(f"missing {key}")
    if not mapped["user_id"]:
        raise ValueError("missing user_id")
    return TweetRecord(**mapped)


def _jsonl_records(path) -> Iterator[tuple]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})",
                                 line=lineno, path=str(path)) from None
            if not isinstance(record, dict):
                raise ParseError("record is not an object",
                                 line=lineno, path=str(path))
            yield lineno, record


def _csv_records(path) -> Iterator[tuple]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("missing header row", line=1, path=str(path))
        for record in reader:
            # +1 for the header line
            yield reader.line_num, {k: v for k, v in record.items() if k is not None}


def load_users(
    path,
    format: str = "jsonl",
    rejects: Optional[List[dict]] = None,
) -> Iterator[UserProfile]:
    """Yield validated profiles; invalid records land in `rejects`."""
    if format == "jsonl":
        records = _jsonl_records(path)
    elif format == "csv":
        records = _csv_records(path)
    else:
        raise ValueError(f"unknown format {format!r}")
    for lineno, record in records:
        try:
            yield _user_from_record(record)
        except (ValidationError, ValueError) as exc:
            if rejects is not None:
                rejects.append({"file": str(path), "line": lineno,
                                "kind": "user", "reason": str(exc)})


def load_tweets(
    path,
    max_id: Optional[int] = None,
    rejects: Optional[List[dict]] = None,
) -> Iterator[TweetRecord]:
    """Yield tweets per user in descending tweet_id order.

    Duplicate tweet ids keep their first occurrence; with max_id set,
    tweets above it are dropped (pagination semantics). Users appear in
    first-seen order.
    """
    seen_ids = set()
    per_user = {}  # user_id -> [TweetRecord], insertion-ordered
    for lineno, record in _jsonl_records(path):
        try:
            tweet = _tweet_from_record(record)
        except (ValidationError, ValueError) as exc:
            if rejects is not None:
                rejects.append({"file": str(path), "line": lineno,
                                "kind": "tweet", "reason": str(exc)})
            continue
        if max_id is not None and tweet.tweet_id > max_id:
            continue
        if tweet.tweet_id in seen_ids:
            continue
        seen_ids.add(tweet.tweet_id)
        per_user.setdefault(tweet.user_id, []).append(tweet)
    for tweets in per_user.values():
        yield from sorted(tweets, key=lambda t: -t.tweet_id)


def descriptive_stats(users: Iterable[UserProfile], sample: bool = False) -> dict:
    """total/mean/stddev of the four account counters.

    Population stddev by default; sample=True uses the n - 1 divisor
    (0.0 for a singleton).
    """
    users = list(users)
    if not users:
        raise ValueError("no records")
    n = len(users)
    out = {}
    for name in STAT_FIELDS:
        values = [getattr(u, name) for u in users]
        total = sum(values)
        mean = total / n
        var_num = sum((v - mean) ** 2 for v in values)
        if sample:
            stddev = math.sqrt(var_num / (n - 1)) if n > 1 else 0.0
        else:
            stddev = math.sqrt(var_num / n)
        out[name] = {"total": total, "mean": mean, "stddev": stddev}
    return out


def persist(
    users: Iterable[UserProfile],
    tweets: Iterable[TweetRecord],
    out_dir,
    source_files: Sequence[str] = (),
    filters_applied: Sequence[str] = (),
) -> DatasetManifest:
    """Write canonical users.jsonl / tweets.jsonl / manifest.json.

    Record files are byte-identical across re-runs on identical input; the
    manifest differs only in created_at.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    users = list(users)
    tweets = list(tweets)
    with open(out / USERS_FILE, "w", encoding="utf-8") as fh:
        for user in users:
            fh.write(json.dumps(user.to_dict(), sort_keys=True) + "\n")
    with open(out / TWEETS_FILE, "w", encoding="utf-8") as fh:
        for tweet in tweets:
            fh.write(json.dumps(tweet.to_dict(), sort_keys=True) + "\n")
    manifest = DatasetManifest(
        user_count=len(users),
        tweet_count=len(tweets),
        source_files=tuple(str(s) for s in source_files),
        filters_applied=tuple(filters_applied),
        created_at=datetime.now(timezone.utc).isoformat(),
    )
    with open(out / MANIFEST_FILE, "w", encoding="utf-8") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def load_dataset(dataset_dir) -> tuple:
    """(profiles, tweets_by_user, manifest) from a persisted dataset dir."""
    dataset_dir = Path(dataset_dir)
    profiles = list(load_users(dataset_dir / USERS_FILE))
    tweets_by_user = {}
    for tweet in load_tweets(dataset_dir / TWEETS_FILE):
        tweets_by_user.setdefault(tweet.user_id, []).append(tweet)
    manifest_path = dataset_dir / MANIFEST_FILE
    manifest = None
    if manifest_path.exists():
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = DatasetManifest.from_dict(json.load(fh))
    return profiles, tweets_by_user, manifest


def ingest_dataset(
    users_path,
    tweets_path,
    out_dir,
    max_id: Optional[int] = None,
    user_format: Optional[str] = None,
) -> tuple:
    """Full ingest: read, filter, dedup, persist. Returns (manifest, rejects)."""
    if user_format is None:
        user_format = "csv" if str(users_path).endswith(".csv") else "jsonl"
    rejects: List[dict] = []
    users = list(load_users(users_path, format=user_format, rejects=rejects))
    tweets = list(load_tweets(tweets_path, max_id=max_id, rejects=rejects))
    filters = ["selection_rule"]
    if max_id is not None:
        filters.append(f"max_id={max_id}")
    manifest = persist(
        users, tweets, out_dir,
        source_files=(str(users_path), str(tweets_path)),
        filters_applied=filters,
    )
    out = Path(out_dir)
    with open(out / REJECTS_FILE, "w", encoding="utf-8") as fh:
        for entry in rejects:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
    return manifest, rejects
