"""Tweet tokenization, token kinds, negation scope marking and the external
linguistic resources consumed at feature time (word clusters, POS tags).

The tokenizer is a single alternation regex tried left to right.  Order
matters: URLs come before emoticons (``://`` contains ``:/``), emoticons
come before punctuation so ``:)`` is not split.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

WORD = "word"
HASHTAG = "hashtag"
MENTION = "mention"
URL = "url"
EMOTICON = "emoticon"
PUNCTUATION = "punctuation"
NUMBER = "number"
TOKEN_KINDS = (WORD, HASHTAG, MENTION, URL, EMOTICON, PUNCTUATION, NUMBER)

# Punctuation marks that close a negated context.
CLAUSE_PUNCTUATION = frozenset(",.:;!?")

URL_PATTERN = r"""(?:https?://|www\.)(?:\S*[^\s.,;:!?'"()\[\]<>])?"""

_EYES = r"[:;=]"
_NOSE = r"[\-o\*']?"
_MOUTH = r"[)\](\[dDpP/\\}{|]"
EMOTICON_PATTERN = (
    r"(?<![\w])(?:"
    rf"[<>]?{_EYES}{_NOSE}{_MOUTH}"
    r"|"
    rf"{_MOUTH}{_NOSE}{_EYES}[<>]?"
    r"|<3"
    r")(?![\w])"
)

_TOKEN_RE = re.compile(
    "|".join(
        [
            rf"(?P<url>{URL_PATTERN})",
            rf"(?P<emoticon>{EMOTICON_PATTERN})",
            r"(?P<mention>(?<!\w)@\w+)",
            r"(?P<hashtag>(?<!\w)\#\w+)",
            r"(?P<number>\d+(?:[.,:]\d+)+)",
            r"(?P<word>\w+(?:['’\-]\w+)*)",
            r"(?P<punct>[!?]+|(?P<rep>[.,;:])(?P=rep)*|[^\w\s])",
        ]
    ),
    re.UNICODE,
)
_DIGITS_RE = re.compile(r"\d+")
_ELONGATED_RE = re.compile(r"(.)\1\1", re.DOTALL)

_POSITIVE_MOUTHS = frozenset(")]}D")
_NEGATIVE_MOUTHS = frozenset("([{/\\")
_EYE_CHARS = frozenset(":;=")


@dataclass(frozen=True)
class Token:
    surface: str
    kind: str
    negated: bool = False
    pos: str | None = None


def tokenize(text: str) -> list[Token]:
    """Split normalized tweet text into typed tokens."""
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        group = m.lastgroup
        surface = m.group(0)
        if group == "punct":
            kind = PUNCTUATION
        elif group == "word":
            kind = NUMBER if _DIGITS_RE.fullmatch(surface) else WORD
        else:
            kind = group
        tokens.append(Token(surface, kind))
    return tokens


def emoticon_polarity(surface: str) -> int:
    """Return +1, -1 or 0 for a recognized emoticon surface.

    The mouth decides: for eyes-first emoticons ``) ] } D`` are happy and
    ``( [ { / \\`` sad; mouth-first emoticons read mirrored.
    """
    if surface == "<3":
        return 1
    s = surface.strip("<>")
    if not s:
        return 0
    if s[0] in _EYE_CHARS:
        mouth = s[-1]
        if mouth in _POSITIVE_MOUTHS:
            return 1
        if mouth in _NEGATIVE_MOUTHS:
            return -1
        return 0
    mouth = s[0]
    if mouth in "([":
        return 1
    if mouth in ")]/\\D":
        return -1
    return 0


def is_elongated(word: str) -> bool:
    return _ELONGATED_RE.search(word) is not None


def is_allcaps(word: str) -> bool:
    # single characters ("I", "A") are deliberately excluded
    if len(word) < 2:
        return False
    letters = [c for c in word if c.isalpha()]
    return bool(letters) and all(c.isupper() for c in letters)


def is_clause_punctuation(token: Token) -> bool:
    return token.kind == PUNCTUATION and all(c in CLAUSE_PUNCTUATION for c in token.surface)


# --------------------------------------------------------------------------
# negation


def load_negations(path: str | Path | None = None) -> frozenset[str]:
    """Read a negation cue list; ``None`` loads the bundled one."""
    if path is None:
        text = resources.files("tweetpurpose").joinpath("resources/negations.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


DEFAULT_NEGATIONS = load_negations()


def is_negation(surface: str, negations: frozenset[str] = DEFAULT_NEGATIONS) -> bool:
    s = surface.lower().replace("’", "'")
    return s in negations or s.endswith("n't")


def mark_negation(tokens: Sequence[Token], negations: frozenset[str] = DEFAULT_NEGATIONS) -> list[Token]:
    """Flag word and hashtag tokens inside negated contexts.

    A context opens after a negation word and closes at the next clause
    punctuation token (``, . : ; ! ?`` runs) or the end of the tweet.
    Negation words are never themselves flagged.
    """
    out = []
    in_scope = False
    for tok in tokens:
        if tok.kind == WORD and is_negation(tok.surface, negations):
            in_scope = True
            out.append(replace(tok, negated=False))
        elif is_clause_punctuation(tok):
            in_scope = False
            out.append(replace(tok, negated=False))
        else:
            out.append(replace(tok, negated=in_scope and tok.kind in (WORD, HASHTAG)))
    return out


def count_negated_contexts(tokens: Sequence[Token], negations: frozenset[str] = DEFAULT_NEGATIONS) -> int:
    """Number of negated segments; consecutive cues inside one open segment count once."""
    n = 0
    in_scope = False
    for tok in tokens:
        if tok.kind == WORD and is_negation(tok.surface, negations):
            if not in_scope:
                n += 1
            in_scope = True
        elif is_clause_punctuation(tok):
            in_scope = False
    return n


# --------------------------------------------------------------------------
# external resources


class ResourceFormatError(ValueError):
    """A resource file row could not be parsed."""

    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno


MAX_CLUSTERS = 1000


class ClusterMap:
    """Case-insensitive word -> Brown cluster bit-path lookup."""

    def __init__(self, mapping: dict[str, str] | None = None):
        self._map = {w.lower(): c for w, c in (mapping or {}).items()}
        n_clusters = len(set(self._map.values()))
        if n_clusters > MAX_CLUSTERS:
            raise ValueError(f"cluster inventory has {n_clusters} clusters, limit is {MAX_CLUSTERS}")

    def get(self, word: str) -> str | None:
        return self._map.get(word.lower())

    def __len__(self) -> int:
        return len(self._map)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._map

    def items(self):
        return self._map.items()

    @property
    def clusters(self) -> set[str]:
        return set(self._map.values())


def load_clusters(path: str | Path) -> ClusterMap:
    """Parse a ``cluster_path<TAB>word<TAB>count`` file.

    When a word appears twice the row with the higher count wins; equal
    counts keep the first row.
    """
    best: dict[str, tuple[int, str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ResourceFormatError(path, lineno, f"expected 3 tab-separated fields, got {len(parts)}")
            cluster, word, count = parts
            if not cluster or not word:
                raise ResourceFormatError(path, lineno, "empty cluster or word")
            try:
                n = int(count)
            except ValueError:
                raise ResourceFormatError(path, lineno, f"count is not an integer: {count!r}") from None
            key = word.lower()
            if key not in best or n > best[key][0]:
                best[key] = (n, cluster)
    return ClusterMap({w: c for w, (_, c) in best.items()})


def load_pos_file(path: str | Path) -> dict[str, list[str]]:
    """Parse ``tweet_id<TAB>space-joined tags`` rows."""
    tags = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                raise ResourceFormatError(path, lineno, "expected tweet_id<TAB>tags")
            if parts[0] in tags:
                raise ResourceFormatError(path, lineno, f"duplicate tweet id {parts[0]!r}")
            tags[parts[0]] = parts[1].split()
    return tags


def attach_pos(tokens: Sequence[Token], tags: Iterable[str] | None) -> list[Token]:
    """Return tokens carrying the aligned POS tags; ``None`` leaves them untagged."""
    if tags is None:
        return list(tokens)
    tags = list(tags)
    if len(tags) != len(tokens):
        raise ValueError(f"{len(tags)} POS tags for {len(tokens)} tokens")
    return [replace(t, pos=tag) for t, tag in zip(tokens, tags)]
