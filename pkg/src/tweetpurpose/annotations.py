"""Crowd annotation aggregation and agreement analytics.

Two notions of "majority" are used on purpose:

* strong majority -- label X wins iff count(X) > total - count(X).  Used for
  gold labels (category distributions, classifier targets).
* plurality -- the uniquely most frequent label; a tie means no majority.
  Used for annotator agreement probabilities and confusion matrices.
"""

from __future__ import annotations

import csv
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

# Display order follows the questionnaire's favour / oppose / other grouping.
FINE_LABELS = (
    "agree",
    "praise",
    "support",
    "hypocrisy",
    "mistake",
    "disagree",
    "ridicule",
    "criticize",
    "vent",
    "information",
    "none_of_above",
)
COARSE_LABELS = ("favour", "oppose", "other")
RELEVANCE_LABELS = ("political", "not_political")

COARSE_OF = {
    "agree": "favour",
    "praise": "favour",
    "support": "favour",
    "hypocrisy": "oppose",
    "mistake": "oppose",
    "disagree": "oppose",
    "ridicule": "oppose",
    "criticize": "oppose",
    "vent": "oppose",
    "information": "other",
    "none_of_above": "other",
}

Q1 = "q1"
Q2 = "q2"
FINE = "fine"
COARSE = "coarse"


class AnnotationError(ValueError):
    pass


@dataclass(frozen=True)
class AnnotationRecord:
    tweet_id: str
    annotator_id: str
    q1: str
    q2: str

    def __post_init__(self):
        if self.q1 not in COARSE_OF:
            raise AnnotationError(f"unknown Q1 label {self.q1!r}")
        if self.q2 not in RELEVANCE_LABELS:
            raise AnnotationError(f"unknown Q2 label {self.q2!r}")


@dataclass(frozen=True)
class AnnotationSet:
    tweet_id: str
    records: tuple[AnnotationRecord, ...]

    def __post_init__(self):
        if not self.records:
            raise AnnotationError(f"tweet {self.tweet_id!r} has no annotations")
        annotators = set()
        for r in self.records:
            if r.tweet_id != self.tweet_id:
                raise AnnotationError(f"record for {r.tweet_id!r} inside set for {self.tweet_id!r}")
            if r.annotator_id in annotators:
                raise AnnotationError(f"annotator {r.annotator_id!r} labelled tweet {self.tweet_id!r} twice")
            annotators.add(r.annotator_id)

    def __len__(self):
        return len(self.records)

    def labels(self, question: str = Q1, granularity: str = FINE) -> list[str]:
        return [record_label(r, question, granularity) for r in self.records]


@dataclass(frozen=True)
class GoldLabel:
    tweet_id: str
    label: str
    support_count: int
    total_count: int


def record_label(record: AnnotationRecord, question: str = Q1, granularity: str = FINE) -> str:
    if question == Q2:
        return record.q2
    if question != Q1:
        raise ValueError(f"unknown question {question!r}")
    if granularity == FINE:
        return record.q1
    if granularity == COARSE:
        return COARSE_OF[record.q1]
    raise ValueError(f"unknown granularity {granularity!r}")


def label_order(question: str = Q1, granularity: str = FINE) -> tuple[str, ...]:
    if question == Q2:
        return RELEVANCE_LABELS
    return COARSE_LABELS if granularity == COARSE else FINE_LABELS


def group_records(records: Iterable[AnnotationRecord]) -> list[AnnotationSet]:
    """Group records by tweet, preserving first-seen tweet order."""
    by_tweet: dict[str, list[AnnotationRecord]] = {}
    for r in records:
        by_tweet.setdefault(r.tweet_id, []).append(r)
    return [AnnotationSet(tid, tuple(rs)) for tid, rs in by_tweet.items()]


def plurality(labels: Sequence[str]) -> str | None:
    """The uniquely most frequent label, or None on a tie."""
    if not labels:
        return None
    counts = Counter(labels).most_common()
    if len(counts) > 1 and counts[0][1] == counts[1][1]:
        return None
    return counts[0][0]


# --------------------------------------------------------------------------
# gold labels


def strong_majority_label(aset: AnnotationSet, question: str = Q1, granularity: str = FINE) -> GoldLabel | None:
    labels = aset.labels(question, granularity)
    total = len(labels)
    label, count = Counter(labels).most_common(1)[0]
    if count > total - count:
        return GoldLabel(aset.tweet_id, label, count, total)
    return None


def gold_labels(
    sets: Iterable[AnnotationSet], question: str = Q1, granularity: str = FINE, min_annotations: int = 2
) -> list[GoldLabel]:
    """Strong-majority labels for every set with at least ``min_annotations`` records."""
    golds = []
    for s in sets:
        if len(s) < min_annotations:
            continue
        g = strong_majority_label(s, question, granularity)
        if g is not None:
            golds.append(g)
    return golds


# --------------------------------------------------------------------------
# annotator quality


def annotator_majority_agreement(
    sets: Iterable[AnnotationSet], question: str = Q1, granularity: str = FINE
) -> dict[str, float]:
    """Per annotator, the fraction of their assignments matching the plurality label.

    Tweets without a unique plurality count as disagreement for everyone.
    Single-annotation tweets carry no agreement information and are skipped.
    """
    hits: Counter = Counter()
    total: Counter = Counter()
    for s in sets:
        if len(s) < 2:
            continue
        labels = s.labels(question, granularity)
        maj = plurality(labels)
        for r, lab in zip(s.records, labels):
            total[r.annotator_id] += 1
            if maj is not None and lab == maj:
                hits[r.annotator_id] += 1
    return {a: hits[a] / n for a, n in total.items()}


def filter_poor_annotators(
    sets: Sequence[AnnotationSet], n_std: float = 2.0
) -> tuple[list[AnnotationSet], list[str]]:
    """Drop annotators whose Q1 agreement is more than ``n_std`` population
    standard deviations below the mean, along with all their records.

    Applied once.  Sets left empty are removed.
    """
    agreement = annotator_majority_agreement(sets, Q1, FINE)
    if len(agreement) < 2:
        raise AnnotationError("need at least 2 annotators to estimate a standard deviation")
    values = list(agreement.values())
    mean = math.fsum(values) / len(values)
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))
    cut = mean - n_std * std
    dropped = sorted(a for a, p in agreement.items() if p < cut)
    if not dropped:
        return list(sets), []
    gone = set(dropped)
    kept = []
    for s in sets:
        records = tuple(r for r in s.records if r.annotator_id not in gone)
        if records:
            kept.append(AnnotationSet(s.tweet_id, records))
    return kept, dropped


# --------------------------------------------------------------------------
# agreement statistics


def annotation_count_histogram(sets: Iterable[AnnotationSet], top: int = 5) -> list[tuple[str, int, int]]:
    """Rows ``(annotations per tweet, #tweets, #annotations)``; the last
    bucket pools every size >= ``top`` and a final ``all`` row totals."""
    n_tweets: Counter = Counter()
    n_annots: Counter = Counter()
    for s in sets:
        bucket = min(len(s), top)
        n_tweets[bucket] += 1
        n_annots[bucket] += len(s)
    rows = []
    for size in range(1, top + 1):
        name = f">={top}" if size == top else str(size)
        rows.append((name, n_tweets[size], n_annots[size]))
    rows.append(("all", sum(n_tweets.values()), sum(n_annots.values())))
    return rows


def majority_class_size_histogram(
    sets: Iterable[AnnotationSet], question: str = Q1, granularity: str = FINE
) -> dict[int, float]:
    """Percentage of 3-annotation tweets whose largest agreeing subset has size 1, 2, 3."""
    counts = {1: 0, 2: 0, 3: 0}
    n = 0
    for s in sets:
        if len(s) != 3:
            continue
        size = Counter(s.labels(question, granularity)).most_common(1)[0][1]
        counts[size] += 1
        n += 1
    if n == 0:
        raise AnnotationError("no tweets with exactly three annotations")
    return {k: 100.0 * v / n for k, v in counts.items()}


def pairwise_agreement(labels: Sequence[str]) -> float:
    """Fraction of unordered annotator pairs giving the same label."""
    n = len(labels)
    same = sum(c * (c - 1) // 2 for c in Counter(labels).values())
    return same / (n * (n - 1) // 2)


def inter_annotator_agreement(sets: Iterable[AnnotationSet], question: str = Q1, granularity: str = FINE) -> float:
    """Mean over tweets (with >= 2 annotations) of pairwise agreement, in percent."""
    per_tweet = [pairwise_agreement(s.labels(question, granularity)) for s in sets if len(s) >= 2]
    if not per_tweet:
        raise AnnotationError("no tweet has two or more annotations")
    return 100.0 * math.fsum(per_tweet) / len(per_tweet)


def average_probability_majority(
    sets: Iterable[AnnotationSet], question: str = Q1, granularity: str = FINE
) -> float:
    """Unweighted mean over annotators of their majority-agreement probability."""
    agreement = annotator_majority_agreement(sets, question, granularity)
    if not agreement:
        raise AnnotationError("no annotator has an assignment on a multiply-annotated tweet")
    return math.fsum(agreement.values()) / len(agreement)


def confusion_matrix(
    sets: Iterable[AnnotationSet],
    question: str = Q1,
    granularity: str = FINE,
    construction: str = "plurality",
) -> dict[str, dict[str, int]]:
    """Cell (x, y): records labelled y on tweets whose majority label is x.

    ``construction`` selects the majority rule: ``"plurality"`` (default)
    or ``"strong"``.  Single-annotation tweets say nothing about confusion
    and are skipped.
    """
    order = label_order(question, granularity)
    matrix = {x: {y: 0 for y in order} for x in order}
    for s in sets:
        if len(s) < 2:
            continue
        labels = s.labels(question, granularity)
        if construction == "plurality":
            maj = plurality(labels)
        elif construction == "strong":
            g = strong_majority_label(s, question, granularity)
            maj = g.label if g else None
        else:
            raise ValueError(f"unknown construction {construction!r}")
        if maj is None:
            continue
        for lab in labels:
            matrix[maj][lab] += 1
    return matrix


def category_distribution(golds: Sequence[GoldLabel], labels: Sequence[str] | None = None) -> dict[str, float]:
    """Percentage of gold labels per category, in display order."""
    if not golds:
        raise AnnotationError("no gold labels")
    counts = Counter(g.label for g in golds)
    if labels is None:
        for order in (FINE_LABELS, COARSE_LABELS, RELEVANCE_LABELS):
            if set(counts) <= set(order):
                labels = order
                break
        else:
            labels = sorted(counts)
    missing = set(counts) - set(labels)
    if missing:
        raise AnnotationError(f"labels outside the category list: {sorted(missing)}")
    n = len(golds)
    return {lab: 100.0 * counts[lab] / n for lab in labels}


def purpose_emotion_crosstab(
    purpose_golds: Mapping[str, str], emotion_golds: Mapping[str, str]
) -> dict[str, dict[str, float]]:
    """Row-normalized percentage of each purpose's tweets carrying each emotion."""
    shared = [tid for tid in purpose_golds if tid in emotion_golds]
    if not shared:
        raise AnnotationError("purpose and emotion gold labels share no tweet")
    table: dict[str, Counter] = defaultdict(Counter)
    for tid in shared:
        table[purpose_golds[tid]][emotion_golds[tid]] += 1
    purposes = [p for p in FINE_LABELS if p in table] + sorted(p for p in table if p not in COARSE_OF)
    out = {}
    for p in purposes:
        row = table[p]
        n = sum(row.values())
        out[p] = {e: 100.0 * c / n for e, c in sorted(row.items())}
    return out


# --------------------------------------------------------------------------
# I/O


def read_annotations(path: str | Path) -> list[AnnotationRecord]:
    """Read a TSV with header ``tweet_id annotator_id q1 q2``."""
    records = []
    seen = set()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if header is None:
            return records
        header = [h.strip() for h in header]
        try:
            idx = [header.index(c) for c in ("tweet_id", "annotator_id", "q1", "q2")]
        except ValueError:
            raise AnnotationError(f"{path}: header must contain tweet_id, annotator_id, q1, q2") from None
        for lineno, row in enumerate(reader, 2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise AnnotationError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            tid, ann, q1, q2 = (row[i].strip() for i in idx)
            if (tid, ann) in seen:
                raise AnnotationError(f"{path}:{lineno}: duplicate judgment by {ann!r} on {tid!r}")
            seen.add((tid, ann))
            try:
                records.append(AnnotationRecord(tid, ann, q1, q2))
            except AnnotationError as exc:
                raise AnnotationError(f"{path}:{lineno}: {exc}") from None
    return records


def read_label_map(path: str | Path) -> dict[str, str]:
    """Read ``tweet_id<TAB>label[<TAB>...]`` rows; a header starting with
    ``tweet_id`` is skipped."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            if lineno == 1 and parts[0] == "tweet_id":
                continue
            if len(parts) < 2:
                raise AnnotationError(f"{path}:{lineno}: expected tweet_id<TAB>label")
            out[parts[0]] = parts[1]
    return out


def write_golds(golds: Iterable[GoldLabel], path_or_fh) -> None:
    rows = ["tweet_id\tlabel\tsupport\ttotal"]
    rows += [f"{g.tweet_id}\t{g.label}\t{g.support_count}\t{g.total_count}" for g in golds]
    text = "\n".join(rows) + "\n"
    if hasattr(path_or_fh, "write"):
        path_or_fh.write(text)
    else:
        Path(path_or_fh).write_text(text, encoding="utf-8")


def _rounded(d):
    return {k: round(v, 2) for k, v in d.items()}


def annotation_report(
    sets: Sequence[AnnotationSet], emotion_golds: Mapping[str, str] | None = None, construction: str = "plurality"
) -> dict:
    """Every annotation table as one JSON-ready dict (percentages rounded to 2 places)."""
    views = [("Q1", Q1, FINE), ("Q1'", Q1, COARSE), ("Q2", Q2, FINE)]
    three = [s for s in sets if len(s) == 3]
    report: dict = {
        "annotation_histogram": [
            {"annotations_per_tweet": b, "tweets": t, "annotations": a} for b, t, a in annotation_count_histogram(sets)
        ],
        "distribution": {},
        "gold_counts": {},
        "majority_class_size": {},
        "agreement": {},
        "confusion": {},
    }
    for name, q, gran in views:
        golds = gold_labels(sets, q, gran)
        report["gold_counts"][name] = len(golds)
        if golds:
            report["distribution"][name] = _rounded(category_distribution(golds, label_order(q, gran)))
        if three:
            mcs = majority_class_size_histogram(three, q, gran)
            report["majority_class_size"][name] = {f"MCS-{k}": round(v, 2) for k, v in mcs.items()}
        report["agreement"][name] = {
            "IAA": round(inter_annotator_agreement(sets, q, gran), 2),
            "APMS": round(average_probability_majority(sets, q, gran), 3),
        }
        report["confusion"][name] = confusion_matrix(sets, q, gran, construction)
    if emotion_golds is not None:
        purposes = {g.tweet_id: g.label for g in gold_labels(sets, Q1, FINE)}
        table = purpose_emotion_crosstab(purposes, emotion_golds)
        report["purpose_emotion"] = {p: _rounded(row) for p, row in table.items()}
    return report
