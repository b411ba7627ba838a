"""Lexicon-based polarity scoring for tweet text.

Deterministic by construction: the lexicon ships with the package and is
versioned, so the same text always yields the same polarity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from types import MappingProxyType
from typing import Iterable, Mapping

from trustlens.errors import ParseError

POSITIVE = "positive"
NEUTRAL = "neutral"
NEGATIVE = "negative"

DEFAULT_DEAD_ZONE = 0.05

_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_MENTION_RE = re.compile(r"@\w+")
_SPLIT_RE = re.compile(r"[^a-z0-9]+")


@dataclass(frozen=True)
class Lexicon:
    """Immutable token -> weight table plus negator tokens."""

    entries: Mapping[str, float]
    negators: frozenset = frozenset()
    version: str = ""

    def __post_init__(self):
        for token, weight in self.entries.items():
            if not -1.0 <= weight <= 1.0:
                raise ValueError(f"weight for {token!r} outside [-1, 1]: {weight}")
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))
        object.__setattr__(self, "negators", frozenset(self.negators))

    def __len__(self):
        return len(self.entries)


def load_lexicon(path=None) -> Lexicon:
    """Load a TSV lexicon; without a path, the bundled one.

    Lines are `token<TAB>weight`; `#negator<TAB>token` declares a negator,
    `#version<TAB>v` sets the version string, other `#` lines are comments.
    """
    if path is None:
        text = (resources.files("trustlens.data") / "lexicon.tsv").read_text("utf-8")
        src = "bundled lexicon.tsv"
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        src = str(path)

    entries = {}
    negators = set()
    version = ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        if line.startswith("#"):
            parts = line.split("\t")
            if parts[0] == "#negator" and len(parts) == 2:
                negators.add(parts[1].strip().lower())
            elif parts[0] == "#version" and len(parts) == 2:
                version = parts[1].strip()
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError("expected token<TAB>weight", line=lineno, path=src)
        token = parts[0].strip().lower()
        try:
            weight = float(parts[1])
        except ValueError:
            raise ParseError(f"bad weight {parts[1]!r}", line=lineno, path=src) from None
        if not -1.0 <= weight <= 1.0:
            raise ParseError(f"weight outside [-1, 1]: {weight}", line=lineno, path=src)
        entries[token] = weight
    return Lexicon(entries=entries, negators=frozenset(negators), version=version)


def tokenize(text: str) -> list:
    """Lowercase, drop URLs and @mentions, keep hashtag words without the
    marker, then split on runs of non-alphanumerics."""
    text = text.lower()
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    text = text.replace("#", " ")
    return [t for t in _SPLIT_RE.split(text) if t]


def polarity(text: str, lexicon: Lexicon) -> float:
    """Mean weight of matched tokens, sign-flipped right after a negator.

    Total on all strings: no matches (or empty text) gives 0.0.
    """
    tokens = tokenize(text)
    matched = []
    for i, token in enumerate(tokens):
        weight = lexicon.entries.get(token)
        if weight is None:
            continue
        if i > 0 and tokens[i - 1] in lexicon.negators:
            weight = -weight
        matched.append(weight)
    if not matched:
        return 0.0
    return sum(matched) / len(matched)


def classify(score: float, dead_zone: float = DEFAULT_DEAD_ZONE) -> str:
    """Map a polarity to positive/neutral/negative.

    The band [-dead_zone, +dead_zone] is neutral, boundary included.
    """
    if not 0.0 <= dead_zone < 1.0:
        raise ValueError(f"dead_zone must lie in [0, 1), got {dead_zone}")
    if score > dead_zone:
        return POSITIVE
    if score < -dead_zone:
        return NEGATIVE
    return NEUTRAL


def class_counts(
    texts: Iterable[str],
    lexicon: Lexicon,
    dead_zone: float = DEFAULT_DEAD_ZONE,
) -> tuple:
    """(n_pos, n_neu, n_neg) over a tweet stream."""
    n_pos = n_neu = n_neg = 0
    for text in texts:
        cls = classify(polarity(text, lexicon), dead_zone)
        if cls == POSITIVE:
            n_pos += 1
        elif cls == NEGATIVE:
            n_neg += 1
        else:
            n_neu += 1
    return n_pos, n_neu, n_neg
