"""Loading, filtering and normalizing raw tweet collections."""

from __future__ import annotations

import json
import re
import string
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .textproc import URL_PATTERN, tokenize

ENGLISH_CODE = "en"
RETWEET_MARKERS = frozenset({"RT", "rt", "Rt"})

URL_RE = re.compile(URL_PATTERN)
MENTION_RE = re.compile(r"(?<!\w)@\w+")
_STRIP_TRAILING = string.punctuation + "…“”’‘"


class CorpusError(ValueError):
    pass


class DuplicateTweetError(CorpusError):
    def __init__(self, tweet_id: str):
        super().__init__(f"duplicate tweet id: {tweet_id!r}")
        self.tweet_id = tweet_id


@dataclass(frozen=True)
class Tweet:
    id: str
    text: str
    lang_code: str | None = None
    pos_tags: tuple[tuple[str, str], ...] | None = None
    source_query: str | None = None

    def __post_init__(self):
        if not self.id:
            raise CorpusError("tweet id must be non-empty")
        if self.pos_tags is not None:
            n = len(tokenize(self.text))
            if len(self.pos_tags) != n:
                raise CorpusError(
                    f"tweet {self.id!r}: {len(self.pos_tags)} POS tags but text tokenizes to {n} tokens"
                )

    @property
    def tags(self) -> list[str] | None:
        if self.pos_tags is None:
            return None
        return [tag for _, tag in self.pos_tags]


@dataclass
class CorpusFilterReport:
    total_in: int = 0
    dropped_retweet: int = 0
    dropped_language: int = 0
    dropped_english_wordcount: int = 0
    kept: int = 0

    def __add__(self, other: "CorpusFilterReport") -> "CorpusFilterReport":
        return CorpusFilterReport(**{k: v + getattr(other, k) for k, v in asdict(self).items()})

    def to_dict(self) -> dict:
        return asdict(self)


def is_retweet(tweet: Tweet) -> bool:
    return any(tok in RETWEET_MARKERS for tok in tweet.text.split())


def _english_candidates(text: str) -> Iterable[str]:
    for tok in text.split():
        tok = tok.lower().lstrip("#@").rstrip(_STRIP_TRAILING)
        if tok:
            yield tok


def language_ok(tweet: Tweet, english_code: str = ENGLISH_CODE) -> bool:
    # a missing tag is not evidence against English
    return tweet.lang_code is None or tweet.lang_code == english_code


def english_word_count(tweet: Tweet, wordlist: set[str] | frozenset[str]) -> int:
    """Token positions (not distinct words) that are dictionary words."""
    return sum(1 for tok in _english_candidates(tweet.text) if tok in wordlist)


def passes_english_filter(tweet: Tweet, wordlist, english_code: str = ENGLISH_CODE, min_words: int = 2) -> bool:
    if not wordlist:
        raise ValueError("wordlist must be non-empty")
    return language_ok(tweet, english_code) and english_word_count(tweet, wordlist) >= min_words


def normalize(text: str) -> str:
    """Replace URLs with ``http://someurl`` and mentions with ``@someuser``."""
    text = URL_RE.sub("http://someurl", text)
    return MENTION_RE.sub("@someuser", text)


def filter_corpus(
    tweets: Sequence[Tweet], wordlist, english_code: str = ENGLISH_CODE
) -> tuple[list[Tweet], CorpusFilterReport]:
    """Drop retweets, non-English and too-short tweets; normalize the rest.

    Each dropped tweet is attributed to the first failing check, in the
    order retweet, language tag, English word count.  Predicates are
    evaluated on normalized text so the filter is idempotent.
    """
    if not wordlist:
        raise ValueError("wordlist must be non-empty")
    seen = set()
    report = CorpusFilterReport()
    kept = []
    for tweet in tweets:
        if tweet.id in seen:
            raise DuplicateTweetError(tweet.id)
        seen.add(tweet.id)
        report.total_in += 1
        tweet = replace(tweet, text=normalize(tweet.text))
        if is_retweet(tweet):
            report.dropped_retweet += 1
        elif not language_ok(tweet, english_code):
            report.dropped_language += 1
        elif english_word_count(tweet, wordlist) < 2:
            report.dropped_english_wordcount += 1
        else:
            report.kept += 1
            kept.append(tweet)
    return kept, report


# --------------------------------------------------------------------------
# I/O


def load_wordlist(path: str | Path) -> frozenset[str]:
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.lower())
    return frozenset(words)


def read_jsonl(path: str | Path) -> list[Tweet]:
    """Read tweets from JSON lines with keys id, text, lang, pos, query."""
    tweets = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                tid = str(obj["id"])
                text = obj["text"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad tweet record ({exc})") from None
            if tid in seen:
                raise DuplicateTweetError(tid)
            seen.add(tid)
            pos = obj.get("pos")
            if pos is not None:
                pos = tuple((str(tok), str(tag)) for tok, tag in pos)
            try:
                tweets.append(Tweet(tid, text, obj.get("lang"), pos, obj.get("query")))
            except CorpusError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from None
    return tweets


def tweet_to_json(tweet: Tweet) -> str:
    obj = {"id": tweet.id, "text": tweet.text}
    if tweet.lang_code is not None:
        obj["lang"] = tweet.lang_code
    if tweet.pos_tags is not None:
        obj["pos"] = [list(p) for p in tweet.pos_tags]
    if tweet.source_query is not None:
        obj["query"] = tweet.source_query
    return json.dumps(obj, ensure_ascii=False)


def write_jsonl(tweets: Iterable[Tweet], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in tweets:
            fh.write(tweet_to_json(t) + "\n")


def with_pos_tags(tweets: Sequence[Tweet], tags_by_id: dict[str, list[str]]) -> list[Tweet]:
    """Attach tags from a POS file; tweets not in the file are left untagged."""
    out = []
    for t in tweets:
        tags = tags_by_id.get(t.id)
        if tags is None:
            out.append(t)
            continue
        surfaces = [tok.surface for tok in tokenize(t.text)]
        if len(surfaces) != len(tags):
            raise CorpusError(f"tweet {t.id!r}: {len(tags)} POS tags but {len(surfaces)} tokens")
        out.append(replace(t, pos_tags=tuple(zip(surfaces, tags))))
    return out
