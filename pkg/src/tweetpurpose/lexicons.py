"""Word-emotion lexicons: the 8-emotion association lexicon and a hashtag
emotion lexicon induced from self-labelled tweets by PMI.

PMI is computed over tweets, not tokens: a word counts once per tweet that
contains it, and a tweet tagged with several emotion hashtags counts once
for each of them::

    pmi(w, e) = log2( joint(w, e) * n_tweets / (word_count(w) * emotion_count(e)) )

Only strictly positive scores enter the lexicon.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .textproc import EMOTICON, HASHTAG, NUMBER, WORD, ResourceFormatError, Token, tokenize

EMOTIONS = ("anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust")
POLARITIES = ("positive", "negative")
LEXICON_LABELS = EMOTIONS + POLARITIES

DEFAULT_MIN_WORD = 5
DEFAULT_MIN_JOINT = 2

_WORD_SIDE_KINDS = (WORD, HASHTAG, NUMBER, EMOTICON)


@dataclass
class EmotionLexicon:
    entries: dict[str, frozenset[str]] = field(default_factory=dict)

    def get(self, word: str) -> frozenset[str]:
        return self.entries.get(word.lower(), frozenset())

    def __len__(self):
        return len(self.entries)


def load_emotion_lexicon(path: str | Path) -> EmotionLexicon:
    """Parse ``word<TAB>label<TAB>0|1`` rows.  Words with only zero flags
    are kept with an empty label set."""
    entries: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ResourceFormatError(path, lineno, f"expected 3 tab-separated fields, got {len(parts)}")
            word, label, flag = (p.strip() for p in parts)
            if not word:
                raise ResourceFormatError(path, lineno, "empty word")
            if label not in LEXICON_LABELS:
                raise ResourceFormatError(path, lineno, f"unknown label {label!r}")
            if flag not in ("0", "1"):
                raise ResourceFormatError(path, lineno, f"flag must be 0 or 1, got {flag!r}")
            labels = entries.setdefault(word.lower(), set())
            if flag == "1":
                labels.add(label)
                if {"positive", "negative"} <= labels:
                    raise ResourceFormatError(path, lineno, f"{word!r} marked both positive and negative")
    return EmotionLexicon({w: frozenset(ls) for w, ls in entries.items()})


# --------------------------------------------------------------------------
# hashtag lexicon


@dataclass
class CooccurrenceCounts:
    n_tweets: int = 0
    word_count: Counter = field(default_factory=Counter)
    emotion_count: Counter = field(default_factory=Counter)
    joint: Counter = field(default_factory=Counter)

    def merge(self, other: "CooccurrenceCounts") -> "CooccurrenceCounts":
        return CooccurrenceCounts(
            self.n_tweets + other.n_tweets,
            self.word_count + other.word_count,
            self.emotion_count + other.emotion_count,
            self.joint + other.joint,
        )


def lookup_form(token: Token | str) -> str:
    """Lowercased surface with a leading hashtag mark removed."""
    s = token.surface if isinstance(token, Token) else token
    return s.lower().lstrip("#")


def tweet_sides(tokens: Sequence[Token], emotion_set: frozenset[str] | set[str]) -> tuple[set[str], set[str]]:
    """Split one tweet into (words, emotions).  Emotion hashtags go only to
    the emotion side; everything lexical (other hashtags included) to the
    word side."""
    words, emotions = set(), set()
    for tok in tokens:
        form = lookup_form(tok)
        if tok.kind == HASHTAG and form in emotion_set:
            emotions.add(form)
        elif tok.kind in _WORD_SIDE_KINDS and form:
            words.add(form)
    return words, emotions


def count_cooccurrences(texts: Iterable[str], emotion_hashtags: Iterable[str]) -> CooccurrenceCounts:
    emotion_set = frozenset(h.lower().lstrip("#") for h in emotion_hashtags)
    counts = CooccurrenceCounts()
    for text in texts:
        words, emotions = tweet_sides(tokenize(text), emotion_set)
        counts.n_tweets += 1
        counts.word_count.update(words)
        counts.emotion_count.update(emotions)
        for e in emotions:
            counts.joint.update((w, e) for w in words)
    return counts


def pmi(
    counts: CooccurrenceCounts,
    word: str,
    emotion: str,
    min_joint: int = DEFAULT_MIN_JOINT,
    min_word: int = DEFAULT_MIN_WORD,
) -> float | None:
    """Unsmoothed base-2 PMI, or None when the pair is below the count thresholds."""
    joint = counts.joint.get((word, emotion), 0)
    wc = counts.word_count.get(word, 0)
    if joint == 0 or joint < min_joint or wc < min_word:
        return None
    return math.log2(joint * counts.n_tweets / (wc * counts.emotion_count[emotion]))


@dataclass
class HashtagEmotionLexicon:
    emotions: list[str]
    by_word: dict[str, dict[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.emotions)) != len(self.emotions):
            raise ValueError("emotion names must be unique")
        for w, row in self.by_word.items():
            for e, v in row.items():
                if not v > 0:
                    raise ValueError(f"non-positive weight for ({w!r}, {e!r}): {v}")

    @property
    def weights(self) -> dict[tuple[str, str], float]:
        return {(w, e): v for w, row in self.by_word.items() for e, v in row.items()}

    def weight(self, word: str, emotion: str) -> float:
        return self.by_word.get(word, {}).get(emotion, 0.0)

    def __len__(self):
        return len(self.by_word)


def build_hashtag_lexicon(
    texts: Iterable[str],
    emotion_hashtags: Sequence[str],
    min_joint: int = DEFAULT_MIN_JOINT,
    min_word: int = DEFAULT_MIN_WORD,
) -> HashtagEmotionLexicon:
    """Induce word-emotion weights from tweets self-labelled with emotion hashtags."""
    emotions = []
    for h in emotion_hashtags:
        h = h.lower().lstrip("#")
        if h not in emotions:
            emotions.append(h)
    if not emotions:
        raise ValueError("need at least one emotion hashtag")
    counts = count_cooccurrences(texts, emotions)
    by_word: dict[str, dict[str, float]] = {}
    for (w, e) in sorted(counts.joint):
        score = pmi(counts, w, e, min_joint, min_word)
        if score is not None and score > 0:
            by_word.setdefault(w, {})[e] = score
    return HashtagEmotionLexicon(emotions, by_word)


def hashtag_feature_values(lexicon: HashtagEmotionLexicon, tokens: Iterable[Token | str]) -> dict[str, float]:
    """Per emotion, the sum of PMI weights over token occurrences."""
    out: dict[str, float] = {}
    for tok in tokens:
        row = lexicon.by_word.get(lookup_form(tok))
        if not row:
            continue
        for e, v in row.items():
            out[e] = out.get(e, 0.0) + v
    return out


def save_hashtag_lexicon(lexicon: HashtagEmotionLexicon, path: str | Path) -> None:
    # 12 decimals keeps the round trip within 1e-9 for any realistic PMI
    lines = ["#emotions:\t" + "\t".join(lexicon.emotions)]
    for w in sorted(lexicon.by_word):
        for e in sorted(lexicon.by_word[w]):
            lines.append(f"{w}\t{e}\t{lexicon.by_word[w][e]:.12f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_hashtag_lexicon(path: str | Path) -> HashtagEmotionLexicon:
    emotions: list[str] | None = None
    by_word: dict[str, dict[str, float]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            if lineno == 1:
                if parts[0] != "#emotions:":
                    raise ResourceFormatError(path, lineno, "first line must start with '#emotions:'")
                emotions = [p for p in parts[1:] if p]
                continue
            if len(parts) != 3:
                raise ResourceFormatError(path, lineno, "expected word<TAB>emotion<TAB>weight")
            w, e, v = parts
            if e not in emotions:
                raise ResourceFormatError(path, lineno, f"emotion {e!r} not declared in header")
            try:
                weight = float(v)
            except ValueError:
                raise ResourceFormatError(path, lineno, f"bad weight {v!r}") from None
            if not weight > 0:
                raise ResourceFormatError(path, lineno, f"weight must be positive, got {v}")
            by_word.setdefault(w, {})[e] = weight
    if emotions is None:
        raise ResourceFormatError(path, 1, "missing '#emotions:' header")
    return HashtagEmotionLexicon(emotions, by_word)


def load_hashtag_list(path: str | Path) -> list[str]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip().lower().lstrip("#")
            if line and line not in out:
                out.append(line)
    return out
