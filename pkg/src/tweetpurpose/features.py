"""Sparse named feature vectors for one tweet.

Feature names are namespaced by group so that disabling a group removes
exactly its own names:

=============  =====================================
group          names
=============  =====================================
ngrams         ``W1:`` .. ``W4:`` (word / skipped), ``C3:`` .. ``C5:``
pos            ``POS:<tag>``
clusters       ``CL:<bit path>``
allcaps        ``META:allcaps``
emolex         ``EMO:...``
negation       ``META:negated_contexts``
punctuation    ``PUNC:bang_run``, ``PUNC:question_run``, ``PUNC:mixed_run``
emoticons      ``META:emoticon_pos``, ``META:emoticon_neg``
hashtags       ``META:hashtags``
elongated      ``META:elongated``
hashtag_pmi    ``HPMI:<emotion>``
=============  =====================================

Negated words carry ``_NEG`` in n-grams and emotion counters whichever
groups are enabled; the ``negation`` group itself is only the context count.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .lexicons import EmotionLexicon, HashtagEmotionLexicon, hashtag_feature_values, lookup_form
from .textproc import (
    DEFAULT_NEGATIONS,
    EMOTICON,
    HASHTAG,
    MENTION,
    NUMBER,
    PUNCTUATION,
    WORD,
    ClusterMap,
    Token,
    attach_pos,
    count_negated_contexts,
    emoticon_polarity,
    is_allcaps,
    is_elongated,
    mark_negation,
    tokenize,
)

log = logging.getLogger(__name__)

FeatureVector = dict  # feature name -> value, no explicit zeros

GROUPS = (
    "ngrams",
    "pos",
    "clusters",
    "allcaps",
    "emolex",
    "negation",
    "punctuation",
    "emoticons",
    "hashtags",
    "elongated",
    "hashtag_pmi",
)

GROUP_PREFIXES = {
    "ngrams": ("W1:", "W2:", "W3:", "W4:", "C3:", "C4:", "C5:"),
    "pos": ("POS:",),
    "clusters": ("CL:",),
    "allcaps": ("META:allcaps",),
    "emolex": ("EMO:",),
    "negation": ("META:negated_contexts",),
    "punctuation": ("PUNC:",),
    "emoticons": ("META:emoticon_",),
    "hashtags": ("META:hashtags",),
    "elongated": ("META:elongated",),
    "hashtag_pmi": ("HPMI:",),
}

NGRAM_KINDS = (WORD, HASHTAG, MENTION, EMOTICON, NUMBER)
NEG_SUFFIX = "_NEG"

_PREFIX_TO_GROUP = sorted(
    ((p, g) for g, ps in GROUP_PREFIXES.items() for p in ps), key=lambda pg: -len(pg[0])
)


def group_of(name: str) -> str:
    for prefix, group in _PREFIX_TO_GROUP:
        if name.startswith(prefix):
            return group
    raise KeyError(f"feature {name!r} belongs to no group")


@dataclass(frozen=True)
class FeatureConfig:
    enabled_groups: frozenset[str] = frozenset(GROUPS)

    def __post_init__(self):
        groups = frozenset(self.enabled_groups)
        object.__setattr__(self, "enabled_groups", groups)
        if not groups:
            raise ValueError("feature config enables no group")
        unknown = groups - set(GROUPS)
        if unknown:
            raise ValueError(f"unknown feature groups: {sorted(unknown)}")

    @classmethod
    def all(cls) -> "FeatureConfig":
        return cls(frozenset(GROUPS))

    def without(self, group: str) -> "FeatureConfig":
        return FeatureConfig(self.enabled_groups - {group})

    def describe(self) -> list[str]:
        return [g for g in GROUPS if g in self.enabled_groups]

    def keeps(self, name: str) -> bool:
        return group_of(name) in self.enabled_groups


@dataclass
class Resources:
    emotion_lexicon: EmotionLexicon | None = None
    clusters: ClusterMap | None = None
    hashtag_lexicon: HashtagEmotionLexicon | None = None
    negations: frozenset[str] = field(default_factory=lambda: DEFAULT_NEGATIONS)


# --------------------------------------------------------------------------
# groups


def ngram_term(tok: Token) -> str:
    s = tok.surface.lower()
    return s + NEG_SUFFIX if tok.negated else s


def ngram_features(tokens: Sequence[Token]) -> FeatureVector:
    """Presence of word 1-4 grams, interior-skipped 3/4-grams and in-token char 3-5 grams."""
    terms = [ngram_term(t) for t in tokens if t.kind in NGRAM_KINDS]
    out = {}
    for n in range(1, 5):
        for i in range(len(terms) - n + 1):
            window = terms[i : i + n]
            out[f"W{n}:" + " ".join(window)] = 1.0
            if n >= 3:
                for p in range(1, n - 1):
                    out[f"W{n}:" + " ".join(window[:p] + ["*"] + window[p + 1 :])] = 1.0
    for t in tokens:
        s = t.surface.lower()
        for n in (3, 4, 5):
            for i in range(len(s) - n + 1):
                out[f"C{n}:" + s[i : i + n]] = 1.0
    return out


def emotion_lexicon_features(tokens: Sequence[Token], lexicon: EmotionLexicon) -> FeatureVector:
    """Counts of emotion-associated words, overall and split by POS tag,
    all-caps words and hashtags.  Negated tokens feed ``<emotion>_NEG``."""
    c: Counter = Counter()
    for t in tokens:
        if t.kind not in (WORD, HASHTAG):
            continue
        labels = lexicon.get(lookup_form(t))
        if not labels:
            continue
        suffix = NEG_SUFFIX if t.negated else ""
        caps = t.kind == WORD and is_allcaps(t.surface)
        for e in labels:
            c[f"EMO:{e}{suffix}"] += 1
            if t.pos is not None:
                c[f"EMO:pos:{t.pos}:{e}{suffix}"] += 1
            if caps:
                c[f"EMO:allcaps:{e}{suffix}"] += 1
            if t.kind == HASHTAG:
                c[f"EMO:hashtag:{e}{suffix}"] += 1
    return {k: float(v) for k, v in c.items()}


def allcaps_features(tokens):
    n = sum(1 for t in tokens if t.kind == WORD and is_allcaps(t.surface))
    return {"META:allcaps": float(n)} if n else {}


def punctuation_features(tokens):
    c: Counter = Counter()
    for t in tokens:
        if t.kind != PUNCTUATION:
            continue
        chars = set(t.surface)
        if chars == {"!"}:
            c["PUNC:bang_run"] += 1
        elif chars == {"?"}:
            c["PUNC:question_run"] += 1
        elif chars == {"!", "?"}:
            c["PUNC:mixed_run"] += 1
    return {k: float(v) for k, v in c.items()}


def hashtag_count_features(tokens):
    n = sum(1 for t in tokens if t.kind == HASHTAG)
    return {"META:hashtags": float(n)} if n else {}


def elongated_features(tokens):
    n = sum(1 for t in tokens if t.kind == WORD and is_elongated(t.surface))
    return {"META:elongated": float(n)} if n else {}


def negation_features(tokens, negations=DEFAULT_NEGATIONS):
    n = count_negated_contexts(tokens, negations)
    return {"META:negated_contexts": float(n)} if n else {}


def emoticon_features(tokens):
    out = {}
    for t in tokens:
        if t.kind != EMOTICON:
            continue
        pol = emoticon_polarity(t.surface)
        if pol > 0:
            out["META:emoticon_pos"] = 1.0
        elif pol < 0:
            out["META:emoticon_neg"] = 1.0
    return out


def pos_features(tokens):
    c = Counter(t.pos for t in tokens if t.pos is not None)
    return {f"POS:{tag}": float(v) for tag, v in c.items()}


def cluster_features(tokens, clusters: ClusterMap):
    out = {}
    for t in tokens:
        path = clusters.get(t.surface)
        if path is None and t.kind == HASHTAG:
            path = clusters.get(t.surface[1:])
        if path is not None:
            out[f"CL:{path}"] = 1.0
    return out


def surface_features(
    tokens: Sequence[Token], clusters: ClusterMap | None = None, negations=DEFAULT_NEGATIONS
) -> FeatureVector:
    """All-caps, punctuation runs, hashtags, elongation, negated contexts,
    emoticon polarity, POS counts and cluster presence."""
    out = {}
    out.update(allcaps_features(tokens))
    out.update(punctuation_features(tokens))
    out.update(hashtag_count_features(tokens))
    out.update(elongated_features(tokens))
    out.update(negation_features(tokens, negations))
    out.update(emoticon_features(tokens))
    out.update(pos_features(tokens))
    if clusters is not None:
        out.update(cluster_features(tokens, clusters))
    return out


def hashtag_pmi_features(tokens, lexicon: HashtagEmotionLexicon):
    return {f"HPMI:{e}": v for e, v in hashtag_feature_values(lexicon, tokens).items() if v != 0}


# --------------------------------------------------------------------------
# whole tweet

_warned_no_pos = False


def prepare_tokens(text: str, tags: Sequence[str] | None = None, negations=DEFAULT_NEGATIONS) -> list[Token]:
    return mark_negation(attach_pos(tokenize(text), tags), negations)


def extract(tweet, resources: Resources | None = None, config: FeatureConfig | None = None) -> FeatureVector:
    """Feature vector of one tweet over the enabled groups, keys sorted."""
    global _warned_no_pos
    resources = resources or Resources()
    config = config or FeatureConfig.all()
    groups = config.enabled_groups
    tags = tweet.tags
    if tags is None and "pos" in groups and not _warned_no_pos:
        log.warning("tweets without POS tags: POS features will be empty")
        _warned_no_pos = True
    tokens = prepare_tokens(tweet.text, tags, resources.negations)

    out: dict[str, float] = {}
    if "ngrams" in groups:
        out.update(ngram_features(tokens))
    if "pos" in groups:
        out.update(pos_features(tokens))
    if "clusters" in groups and resources.clusters is not None:
        out.update(cluster_features(tokens, resources.clusters))
    if "allcaps" in groups:
        out.update(allcaps_features(tokens))
    if "emolex" in groups and resources.emotion_lexicon is not None:
        out.update(emotion_lexicon_features(tokens, resources.emotion_lexicon))
    if "negation" in groups:
        out.update(negation_features(tokens, resources.negations))
    if "punctuation" in groups:
        out.update(punctuation_features(tokens))
    if "emoticons" in groups:
        out.update(emoticon_features(tokens))
    if "hashtags" in groups:
        out.update(hashtag_count_features(tokens))
    if "elongated" in groups:
        out.update(elongated_features(tokens))
    if "hashtag_pmi" in groups and resources.hashtag_lexicon is not None:
        out.update(hashtag_pmi_features(tokens, resources.hashtag_lexicon))

    for name, v in out.items():
        if not math.isfinite(v):
            raise ValueError(f"tweet {tweet.id!r}: non-finite value for {name!r}")
    return {k: out[k] for k in sorted(out) if out[k] != 0}


def restrict(vector: Mapping[str, float], config: FeatureConfig) -> FeatureVector:
    """Drop the names of disabled groups (equivalent to re-extracting)."""
    groups = config.enabled_groups
    if len(groups) == len(GROUPS):
        return dict(vector)
    return {k: v for k, v in vector.items() if group_of(k) in groups}


# --------------------------------------------------------------------------
# serialization


def format_vector(tweet_id: str, vector: Mapping[str, float]) -> str:
    """Canonical TSV line: id, then ``name:value`` pairs sorted by name."""
    return "\t".join([tweet_id] + [f"{k}:{float(vector[k])!r}" for k in sorted(vector)])


def parse_vector(line: str) -> tuple[str, FeatureVector]:
    parts = line.rstrip("\n\r").split("\t")
    vec = {}
    for p in parts[1:]:
        name, _, value = p.rpartition(":")
        if not name:
            raise ValueError(f"bad feature pair {p!r}")
        vec[name] = float(value)
    return parts[0], vec


def write_vectors(rows: Iterable[tuple[str, Mapping[str, float]]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tid, vec in rows:
            fh.write(format_vector(tid, vec) + "\n")


def read_vectors(path: str | Path) -> list[tuple[str, FeatureVector]]:
    with open(path, encoding="utf-8") as fh:
        return [parse_vector(line) for line in fh if line.strip()]
