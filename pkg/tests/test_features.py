import importlib.util
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from golden_features import CLUSTERS, EMOLEX, HASHTAG_LEXICON, TWEETS
from tweetpurpose.corpus import Tweet, read_jsonl
from tweetpurpose.features import (
    GROUPS,
    FeatureConfig,
    Resources,
    emotion_lexicon_features,
    extract,
    format_vector,
    group_of,
    ngram_features,
    parse_vector,
    prepare_tokens,
    read_vectors,
    restrict,
    surface_features,
    write_vectors,
)
from tweetpurpose.lexicons import EmotionLexicon, load_emotion_lexicon, load_hashtag_lexicon
from tweetpurpose.textproc import Token, load_clusters


@pytest.fixture(scope="module")
def golden_resources(data_dir):
    return Resources(
        emotion_lexicon=load_emotion_lexicon(data_dir / "golden_emolex.tsv"),
        clusters=load_clusters(data_dir / "golden_clusters.tsv"),
        hashtag_lexicon=load_hashtag_lexicon(data_dir / "golden_hashtag_lexicon.tsv"),
    )


@pytest.fixture(scope="module")
def golden_tweets(data_dir):
    return read_jsonl(data_dir / "golden_tweets.jsonl")


# --------------------------------------------------------------------------
# golden vectors


def test_golden_vectors_byte_identical(data_dir, golden_resources, golden_tweets):
    want = (data_dir / "feature_golden.tsv").read_text(encoding="utf-8").splitlines()
    got = [format_vector(t.id, extract(t, golden_resources)) for t in golden_tweets]
    assert len(got) == len(want) == 12
    for g, w in zip(got, want):
        assert g == w


def test_golden_file_is_current(data_dir):
    # regenerate from the oracle and compare with the checked-in file
    lines = [
        oracles.canonical_line(tid, oracles.features(tokens, tags, EMOLEX, CLUSTERS, HASHTAG_LEXICON))
        for tid, _, tokens, tags in TWEETS
    ]
    assert (data_dir / "feature_golden.tsv").read_text(encoding="utf-8") == "\n".join(lines) + "\n"


def test_golden_resource_files_are_current(data_dir, tmp_path, monkeypatch):
    spec = importlib.util.spec_from_file_location("make_feature_golden", data_dir / "make_feature_golden.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    monkeypatch.setattr(mod, "DATA", tmp_path)
    mod.main()
    for name in ("golden_emolex.tsv", "golden_clusters.tsv", "golden_hashtag_lexicon.tsv", "golden_tweets.jsonl"):
        assert (tmp_path / name).read_bytes() == (data_dir / name).read_bytes(), name


# --------------------------------------------------------------------------
# n-grams


def toks(*surfaces, negated=()):
    return [Token(s, "word", i in negated) for i, s in enumerate(surfaces)]


def test_ngram_not_perfect():
    f = ngram_features(toks("not", "perfect", negated={1}))
    words = {k for k in f if k.startswith("W")}
    assert words == {"W1:not", "W1:perfect_NEG", "W2:not perfect_NEG"}
    assert all(v == 1.0 for v in f.values())


def test_ngram_single_token():
    f = ngram_features(toks("hi"))
    assert set(f) == {"W1:hi"}


def window_oracle(terms):
    out = set()
    for n in range(1, 5):
        for i in range(len(terms) - n + 1):
            g = terms[i : i + n]
            out.add(f"W{n}:" + " ".join(g))
            if n >= 3:
                for hole in range(1, n - 1):
                    out.add(f"W{n}:" + " ".join(g[:hole] + ["*"] + g[hole + 1 :]))
    for t in terms:
        for n in (3, 4, 5):
            for i in range(len(t) - n + 1):
                out.add(f"C{n}:{t[i:i + n]}")
    return out


def test_ngram_five_token_windows():
    terms = ["we", "need", "real", "change", "now"]
    f = ngram_features(toks(*terms))
    assert set(f) == window_oracle(terms)
    assert sum(k.startswith("W4:") for k in f) == 2 + 2 * 2
    assert sum(k.startswith("W3:") for k in f) == 3 + 3


@given(st.lists(st.sampled_from(["vote", "tax", "no", "a", "obama", "great", "x"]), min_size=0, max_size=7))
@settings(max_examples=100, deadline=None)
def test_ngram_windows_property(terms):
    assert set(ngram_features(toks(*terms))) == window_oracle(terms)


def test_ngram_lowercases_and_keeps_hashtags():
    f = ngram_features(prepare_tokens("Vote #GOP"))
    assert "W2:vote #gop" in f and "C3:#go" in f


# --------------------------------------------------------------------------
# emotion lexicon and surface groups


LEX = EmotionLexicon({"great": frozenset({"joy", "positive"})})


def test_emolex_lookup_and_negation():
    assert emotion_lexicon_features(prepare_tokens("great"), LEX) == {"EMO:joy": 1, "EMO:positive": 1}
    f = emotion_lexicon_features(prepare_tokens("not great"), LEX)
    assert f == {"EMO:joy_NEG": 1, "EMO:positive_NEG": 1}


def test_emolex_hashtag_allcaps_fixture():
    f = emotion_lexicon_features(prepare_tokens("#great GREAT great"), LEX)
    # counting oracle: three occurrences, one hashtag, one all-caps word
    assert f["EMO:joy"] == 3
    assert f["EMO:hashtag:joy"] == 1
    assert f["EMO:allcaps:joy"] == 1


def test_emolex_pos_counts():
    f = emotion_lexicon_features(prepare_tokens("great great", ["A", "N"]), LEX)
    assert f["EMO:pos:A:joy"] == 1 and f["EMO:pos:N:joy"] == 1 and f["EMO:joy"] == 2


def test_surface_examples():
    f = surface_features(prepare_tokens("WOW!!! ?!"))
    assert f["PUNC:bang_run"] == 1 and f["PUNC:mixed_run"] == 1 and f["META:allcaps"] == 1
    assert "PUNC:question_run" not in f
    assert surface_features(prepare_tokens(":)")) == {"META:emoticon_pos": 1.0}
    assert surface_features(prepare_tokens("no way , fine"))["META:negated_contexts"] == 1


def test_emoticon_presence_not_count():
    f = surface_features(prepare_tokens(":) :) :("))
    assert f == {"META:emoticon_pos": 1.0, "META:emoticon_neg": 1.0}


# --------------------------------------------------------------------------
# extract


def full_resources():
    from tweetpurpose.lexicons import HashtagEmotionLexicon
    from tweetpurpose.textproc import ClusterMap

    return Resources(
        emotion_lexicon=EmotionLexicon({k: frozenset(v) for k, v in EMOLEX.items()}),
        clusters=ClusterMap(dict(CLUSTERS)),
        hashtag_lexicon=HashtagEmotionLexicon(["anger", "joy", "sadness", "trust"], HASHTAG_LEXICON),
    )


def test_empty_tweet_empty_vector():
    assert extract(Tweet("e", ""), full_resources()) == {}


def test_config_rules():
    with pytest.raises(ValueError):
        FeatureConfig(frozenset())
    with pytest.raises(ValueError):
        FeatureConfig(frozenset({"ngrams", "syntax"}))
    assert FeatureConfig.all().describe() == list(GROUPS)
    assert len(GROUPS) == 11


def test_group_gating_ngrams_only(golden_tweets, golden_resources):
    cfg = FeatureConfig(frozenset({"ngrams"}))
    for t in golden_tweets:
        assert all(k[:2] in ("W1", "W2", "W3", "W4", "C3", "C4", "C5") for k in extract(t, golden_resources, cfg))


@pytest.mark.parametrize("group", GROUPS)
def test_ablation_soundness(group, golden_tweets, golden_resources):
    cfg = FeatureConfig.all().without(group)
    for t in golden_tweets:
        full = extract(t, golden_resources)
        less = extract(t, golden_resources, cfg)
        assert less == {k: v for k, v in full.items() if group_of(k) != group}
        assert restrict(full, cfg) == less


def test_every_name_has_a_group(golden_tweets, golden_resources):
    seen = set()
    for t in golden_tweets:
        for k in extract(t, golden_resources):
            seen.add(group_of(k))
    assert seen == set(GROUPS)


def test_value_invariants(golden_tweets, golden_resources):
    for t in golden_tweets:
        for k, v in extract(t, golden_resources).items():
            assert math.isfinite(v) and v != 0
            g = group_of(k)
            if g in ("ngrams", "clusters") or k.startswith("META:emoticon"):
                assert v == 1.0
            elif g == "hashtag_pmi":
                assert v > 0
            else:
                assert v > 0 and v == int(v)


def test_extract_deterministic_and_order_independent(golden_tweets, golden_resources):
    a = [extract(t, golden_resources) for t in golden_tweets]
    b = [extract(t, golden_resources) for t in reversed(golden_tweets)][::-1]
    assert a == b


def test_missing_pos_leaves_group_empty():
    f = extract(Tweet("1", "vote now"), config=FeatureConfig(frozenset({"pos"})))
    assert f == {}


# --------------------------------------------------------------------------
# serialization


def test_vector_serialization_round_trip(tmp_path, golden_tweets, golden_resources):
    rows = [(t.id, extract(t, golden_resources)) for t in golden_tweets]
    p = tmp_path / "v.tsv"
    write_vectors(rows, p)
    assert read_vectors(p) == rows
    assert format_vector("x", {"b": 1.0, "a:b": 0.5}) == "x\ta:b:0.5\tb:1.0"
    assert parse_vector("x\ta:b:0.5\tb:1.0") == ("x", {"a:b": 0.5, "b": 1.0})
    with pytest.raises(ValueError):
        parse_vector("x\tnocolon")
