import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tweetpurpose.corpus import (
    CorpusError,
    CorpusFilterReport,
    DuplicateTweetError,
    Tweet,
    english_word_count,
    filter_corpus,
    is_retweet,
    load_wordlist,
    normalize,
    passes_english_filter,
    read_jsonl,
    with_pos_tags,
    write_jsonl,
)


def tw(text, tid="1", lang="en"):
    return Tweet(tid, text, lang)


# --------------------------------------------------------------------------
# retweets


@pytest.mark.parametrize("text,expected", [
    ("RT @bob: vote now", True),
    ("Obama speaks tonight", False),
    ("START of the debate", False),
    ("so true rt", True),
    ("Rt this", True),
    ("rT this", False),
    ("RT: hi", False),
    ("", False),
])
def test_is_retweet_examples(text, expected):
    assert is_retweet(tw(text)) is expected


@given(st.lists(st.sampled_from(["RT", "rt", "Rt", "rT", "ART", "RTs", "vote", "start", "\t", "\n"]), max_size=8))
@settings(max_examples=200, deadline=None)
def test_is_retweet_matches_token_scan(parts):
    text = " ".join(parts)
    scan = False
    for tok in text.split():
        if tok == "RT" or tok == "rt" or tok == "Rt":
            scan = True
    assert is_retweet(tw(text)) is scan


# --------------------------------------------------------------------------
# English filter


def test_english_filter_examples():
    assert passes_english_filter(tw("vote now #gop"), {"vote", "now"})
    assert not passes_english_filter(tw("xyzzy qwerty"), {"vote", "now"})
    assert passes_english_filter(tw("vote vote vote"), {"vote"})


def test_english_word_count_counts_positions():
    words = {"vote", "now", "obama"}
    text = "#Vote NOW, @obama! vote. xyz"
    oracle = 0
    for tok in text.split():
        t = tok.lower()
        while t and t[0] in "#@":
            t = t[1:]
        while t and not t[-1].isalnum():
            t = t[:-1]
        oracle += t in words
    assert english_word_count(tw(text), words) == oracle == 4


def test_language_tag_rules():
    words = {"vote", "now"}
    assert not passes_english_filter(tw("vote now", lang="es"), words)
    assert passes_english_filter(Tweet("1", "vote now"), words)
    assert passes_english_filter(tw("vote now", lang="english"), words, english_code="english")


def test_empty_wordlist_rejected():
    with pytest.raises(ValueError):
        passes_english_filter(tw("vote now"), set())


# --------------------------------------------------------------------------
# normalization


@pytest.mark.parametrize("text,expected", [
    ("see http://bit.ly/x2 now", "see http://someurl now"),
    ("@mitt is wrong", "@someuser is wrong"),
    ("no links here", "no links here"),
    ("go to www.gop.com.", "go to http://someurl."),
    ("(https://t.co/a?b=c)", "(http://someurl)"),
    ("mail me@home.com @a,@b", "mail me@home.com @someuser,@someuser"),
    ("ünïcode ✓ @x", "ünïcode ✓ @someuser"),
])
def test_normalize_examples(text, expected):
    assert normalize(text) == expected


@given(st.lists(st.sampled_from(["http://", "www.", "a", "@", "b.", "/", " ", ".", "@x", "https://q", ")", "é"]),
                max_size=12).map("".join))
@settings(max_examples=300, deadline=None)
def test_normalize_idempotent(text):
    once = normalize(text)
    assert normalize(once) == once


# --------------------------------------------------------------------------
# corpus filter

WORDS = frozenset({"vote", "now", "obama", "debate", "tonight", "the", "is", "wrong", "great", "speech"})


def test_filter_three_tweets():
    tweets = [tw("RT @bob: vote now", "a"), tw("vote now", "b"), tw("vota ahora", "c", "es")]
    kept, report = filter_corpus(tweets, WORDS)
    assert [t.id for t in kept] == ["b"]
    assert report.total_in == 3 and report.kept == 1
    assert (report.dropped_retweet, report.dropped_language, report.dropped_english_wordcount) == (1, 1, 0)


def test_filter_empty():
    kept, report = filter_corpus([], WORDS)
    assert kept == [] and report.to_dict() == CorpusFilterReport().to_dict()


# (id, text, lang, expected fate) with the fate worked out by hand
FIXTURE = [
    ("t01", "RT @x: the debate tonight", "en", "retweet"),
    ("t02", "Obama is wrong http://t.co/1", "en", "kept"),
    ("t03", "el debate de hoy", "es", "language"),
    ("t04", "great speech", None, "kept"),
    ("t05", "xyzzy plugh", "en", "wordcount"),
    ("t06", "START the debate", "en", "kept"),
    ("t07", "vote", "en", "wordcount"),
    ("t08", "@obama vote", "en", "wordcount"),
    ("t09", "#vote #now!!", "en", "kept"),
    ("t10", "debate rt tonight", "fr", "retweet"),
]


def test_filter_ten_tweet_fixture():
    tweets = [Tweet(i, text, lang) for i, text, lang, _ in FIXTURE]
    kept, report = filter_corpus(tweets, WORDS)
    fate = {i: f for i, _, _, f in FIXTURE}
    assert [t.id for t in kept] == [i for i, f in fate.items() if f == "kept"]
    assert report.dropped_retweet == sum(f == "retweet" for f in fate.values())
    assert report.dropped_language == sum(f == "language" for f in fate.values())
    assert report.dropped_english_wordcount == sum(f == "wordcount" for f in fate.values())
    d = report.to_dict()
    assert d["total_in"] == 10 == d["kept"] + d["dropped_retweet"] + d["dropped_language"] + d["dropped_english_wordcount"]
    assert {t.id: t.text for t in kept}["t02"] == "Obama is wrong http://someurl"


def test_filter_idempotent():
    tweets = [Tweet(i, text, lang) for i, text, lang, _ in FIXTURE]
    kept, _ = filter_corpus(tweets, WORDS)
    again, report = filter_corpus(kept, WORDS)
    assert again == kept and report.kept == len(kept)


def test_filter_duplicate_id():
    with pytest.raises(DuplicateTweetError, match="'x'"):
        filter_corpus([tw("vote now", "x"), tw("vote now", "x")], WORDS)


def test_report_merge():
    a = CorpusFilterReport(3, 1, 1, 0, 1)
    b = CorpusFilterReport(2, 0, 0, 1, 1)
    assert (a + b).to_dict() == {"total_in": 5, "dropped_retweet": 1, "dropped_language": 1,
                                 "dropped_english_wordcount": 1, "kept": 2}


# --------------------------------------------------------------------------
# tweets and files


def test_tweet_invariants():
    with pytest.raises(CorpusError):
        Tweet("", "text")
    with pytest.raises(CorpusError, match="2 POS tags"):
        Tweet("1", "one two three", pos_tags=(("one", "N"), ("two", "N")))
    t = Tweet("1", "hi !", pos_tags=(("hi", "!"), ("!", ",")))
    assert t.tags == ["!", ","]


def test_jsonl_round_trip(tmp_path):
    tweets = [Tweet("1", "vote now ✓", "en", (("vote", "V"), ("now", "R"), ("✓", ",")), "q"),
              Tweet("2", "plain")]
    p = tmp_path / "c.jsonl"
    write_jsonl(tweets, p)
    assert read_jsonl(p) == tweets
    first = json.loads(p.read_text(encoding="utf-8").splitlines()[0])
    assert first == {"id": "1", "text": "vote now ✓", "lang": "en", "pos": [["vote", "V"], ["now", "R"], ["✓", ","]],
                     "query": "q"}


def test_read_jsonl_errors(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"id": "1", "text": "a"}\n{"text": "no id"}\n', encoding="utf-8")
    with pytest.raises(CorpusError, match=":2:"):
        read_jsonl(p)
    p.write_text('{"id": "1", "text": "a"}\n{"id": "1", "text": "b"}\n', encoding="utf-8")
    with pytest.raises(DuplicateTweetError):
        read_jsonl(p)


def test_wordlist_and_pos_attachment(tmp_path):
    p = tmp_path / "w.txt"
    p.write_text("# comment\nVote\n\nnow\n", encoding="utf-8")
    assert load_wordlist(p) == frozenset({"vote", "now"})
    tagged = with_pos_tags([Tweet("1", "vote now"), Tweet("2", "hi")], {"1": ["V", "R"]})
    assert tagged[0].tags == ["V", "R"] and tagged[1].tags is None
