"""Regenerate the synthetic demo data in this directory.

200 tweets in three coarse classes.  Each tweet carries two class cue
words; every other token (filler words, hashtags, mentions, links,
emoticons, shouting, stretched words) is drawn independently of the
class.  Cue words appear in neither the emotion lexicon nor the cluster
file, so only the n-gram features can see the signal.

    python3 demo/make_demo.py
"""

import json
import random
from pathlib import Path

from tweetpurpose.corpus import filter_corpus, load_wordlist, read_jsonl, write_jsonl
from tweetpurpose.textproc import EMOTICON, HASHTAG, MENTION, NUMBER, PUNCTUATION, URL, tokenize

HERE = Path(__file__).resolve().parent
SEED = 2012

CLASS_SIZES = {"favour": 84, "oppose": 66, "other": 50}

CUES = {
    "favour": ["zorbly", "quintrel", "marvex", "plendic", "toswin", "brevant"],
    "oppose": ["grudax", "spaltor", "vexlow", "drombit", "kurnash", "flendor"],
    "other": ["noteval", "brifset", "ondrix", "pasloom", "tekvid", "wumbral"],
}
FINE_OF = {
    "favour": ["agree", "praise", "support"],
    "oppose": ["disagree", "criticize", "ridicule", "mistake", "hypocrisy", "vent"],
    "other": ["information", "none_of_above"],
}

FILLER = (
    "the a and to of in on for with is was will this that they we you he she it just about "
    "vote election debate campaign president candidate speech tonight today people country "
    "policy plan jobs tax health care economy state party win lose news watch said says "
    "think know really big great bad good new old right left time year rally crowd live"
).split()
CAPS_OK = ["vote", "win", "lose", "big", "great", "bad", "good", "live", "news"]
HASHTAGS = ["#election", "#vote", "#debate", "#politics", "#joy", "#anger", "#fear", "#sadness", "#trust",
            "#surprise", "#disgust", "#anticipation"]
EMOTICONS = [":)", ":(", ":D", ";)", ":-(", ":P"]
NEGATORS = ["not", "never", "don't", "no"]
PUNCT = ["!", "!!!", "?", "?!", "...", ".", ","]
EMOTIONS = ["anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust"]

ANNOTATORS = [f"A{i:02d}" for i in range(1, 9)]


def make_text(rng: random.Random, label: str) -> str:
    words = rng.sample(FILLER, rng.randint(5, 9))
    if rng.random() < 0.25:
        i = rng.randrange(len(words))
        if words[i] in CAPS_OK:
            words[i] = words[i].upper()
    if rng.random() < 0.2:
        i = rng.randrange(len(words))
        w = words[i]
        words[i] = w[:-1] + w[-1] * rng.randint(3, 5)
    if rng.random() < 0.3:
        words.insert(rng.randrange(len(words)), rng.choice(NEGATORS))
    cues = rng.sample(CUES[label], 2)
    if rng.random() < 0.12:
        other = rng.choice([c for c in CUES if c != label])
        cues[1] = rng.choice(CUES[other])
    for cue in cues:
        words.insert(rng.randrange(len(words) + 1), cue)
    if rng.random() < 0.3:
        words.insert(rng.randrange(len(words) + 1), rng.choice(PUNCT))
    if rng.random() < 0.4:
        words.insert(0, "@user%d" % rng.randint(1, 40))
    if rng.random() < 0.5:
        words.append(rng.choice(HASHTAGS))
    if rng.random() < 0.3:
        words.append("http://t.co/%05d" % rng.randint(0, 99999))
    if rng.random() < 0.3:
        words.append(rng.choice(EMOTICONS))
    if rng.random() < 0.6:
        words.append(rng.choice(PUNCT))
    return " ".join(words)


def junk(rng: random.Random, n: int):
    """Retweets and non-English tweets for the filter stage to drop."""
    out = []
    for i in range(n):
        if i % 2 == 0:
            out.append({"id": f"x{i:03d}", "text": "RT @user%d " % i + " ".join(rng.sample(FILLER, 6)), "lang": "en"})
        else:
            out.append({"id": f"x{i:03d}", "text": "hola que tal la votación de hoy", "lang": "es"})
    return out


WORD_TAG = {w: ("V" if w in ("is", "was", "will", "vote", "win", "lose", "watch", "said", "says", "think", "know")
                else "D" if w in ("the", "a", "this", "that") else "P" if w in ("to", "of", "in", "on", "for", "with", "about")
                else "O" if w in ("they", "we", "you", "he", "she", "it") else "A" if w in ("big", "great", "bad", "good", "new", "old", "right", "left")
                else "N") for w in FILLER}
KIND_TAG = {HASHTAG: "#", MENTION: "@", URL: "U", EMOTICON: "E", PUNCTUATION: ",", NUMBER: "$"}


def pos_tags(text: str) -> list[str]:
    tags = []
    for tok in tokenize(text):
        if tok.kind in KIND_TAG:
            tags.append(KIND_TAG[tok.kind])
        else:
            base = tok.surface.lower()
            tags.append(WORD_TAG.get(base, "R" if base in NEGATORS else "N"))
    return tags


def annotate(rng: random.Random, tid: str, label: str):
    fine = rng.choice(FINE_OF[label])
    rows = []
    for ann in rng.sample(ANNOTATORS, 3):
        q1 = fine if rng.random() < 0.8 else rng.choice([f for fs in FINE_OF.values() for f in fs])
        q2 = "political" if rng.random() < 0.9 else "not_political"
        rows.append((tid, ann, q1, q2))
    return rows


def main():
    rng = random.Random(SEED)
    labels = [lab for lab, n in CLASS_SIZES.items() for _ in range(n)]
    rng.shuffle(labels)
    raw = [{"id": f"t{i:03d}", "text": make_text(rng, lab), "lang": "en", "query": "election"}
           for i, lab in enumerate(labels)]
    raw += junk(rng, 16)
    rng.shuffle(raw)
    raw_path = HERE / "raw_tweets.jsonl"
    raw_path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in raw), encoding="utf-8")

    words = set(FILLER) | set(NEGATORS) | {c for cs in CUES.values() for c in cs}
    (HERE / "wordlist.txt").write_text("".join(w + "\n" for w in sorted(words)), encoding="utf-8")

    kept, report = filter_corpus(read_jsonl(raw_path), load_wordlist(HERE / "wordlist.txt"))
    assert len(kept) == 200, report
    write_jsonl(kept, HERE / "tweets.jsonl")
    (HERE / "pos.tsv").write_text("".join(f"{t.id}\t{' '.join(pos_tags(t.text))}\n" for t in kept), encoding="utf-8")

    label_of = {f"t{i:03d}": lab for i, lab in enumerate(labels)}
    rows = ["tweet_id\tannotator_id\tq1\tq2"]
    for t in kept:
        rows += ["\t".join(r) for r in annotate(rng, t.id, label_of[t.id])]
    (HERE / "annotations.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    lex = []
    for w in sorted(set(FILLER)):
        r = rng.random()
        if r < 0.15:
            lex.append((w, "positive", 1))
            lex.append((w, rng.choice(["joy", "trust", "anticipation"]), 1))
        elif r < 0.3:
            lex.append((w, "negative", 1))
            lex.append((w, rng.choice(["anger", "fear", "sadness", "disgust"]), 1))
        else:
            lex.append((w, "joy", 0))
    (HERE / "emotion_lexicon.tsv").write_text("".join(f"{w}\t{l}\t{f}\n" for w, l, f in lex), encoding="utf-8")

    clusters = []
    for i, w in enumerate(sorted(set(FILLER))):
        path = format(rng.randrange(16), "04b") + format(i % 4, "02b")
        clusters.append(f"{path}\t{w}\t{rng.randint(10, 500)}")
    (HERE / "clusters.tsv").write_text("\n".join(clusters) + "\n", encoding="utf-8")

    (HERE / "emotion_hashtags.txt").write_text("".join(f"#{e}\n" for e in EMOTIONS), encoding="utf-8")
    print(json.dumps(report.to_dict()))


if __name__ == "__main__":
    main()
