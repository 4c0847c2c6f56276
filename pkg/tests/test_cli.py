import argparse
import json

import pytest

from tweetpurpose import annotations as ann
from tweetpurpose.cli import build_parser, run
from tweetpurpose.learner import load_model

SUBCOMMANDS = ["filter", "annotate-stats", "gold", "build-lexicon", "featurize", "train", "predict", "evaluate",
               "ablate"]


def demo_resources(demo_dir):
    return [
        "--emotion-lexicon", str(demo_dir / "emotion_lexicon.tsv"),
        "--clusters", str(demo_dir / "clusters.tsv"),
        "--pos-file", str(demo_dir / "pos.tsv"),
    ]


def subparsers():
    parser = build_parser()
    action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return action.choices


# --------------------------------------------------------------------------
# exit codes and help


def test_unknown_flag_is_usage_error(capsys):
    assert run(["gold", "--annotations", "x.tsv", "--bogus"]) == 1
    err = capsys.readouterr().err
    assert "--bogus" in err and "usage:" in err and "--granularity" in err


def test_unknown_subcommand_and_no_arguments(capsys):
    assert run(["frobnicate"]) == 1
    assert run([]) == 1


def test_missing_input_is_data_error(tmp_path, capsys):
    missing = tmp_path / "nope.tsv"
    assert run(["gold", "--annotations", str(missing)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_malformed_input_is_data_error(tmp_path, capsys):
    bad = tmp_path / "a.tsv"
    bad.write_text("tweet_id\tannotator_id\tq1\tq2\nt1\tA\tcheer\tpolitical\n", encoding="utf-8")
    assert run(["gold", "--annotations", str(bad)]) == 2
    assert "cheer" in capsys.readouterr().err


@pytest.mark.parametrize("name", SUBCOMMANDS)
def test_help_lists_every_flag(name, capsys):
    p = subparsers()[name]
    assert run([name, "--help"]) == 0
    text = capsys.readouterr().out
    for action in p._actions:
        for opt in action.option_strings:
            assert opt in text, (name, opt)


def test_verbose_accepted_after_subcommand(demo_dir, tmp_path):
    assert run(["gold", "-v", "--annotations", str(demo_dir / "annotations.tsv"), "--output",
                str(tmp_path / "g.tsv")]) == 0


# --------------------------------------------------------------------------
# stages


def test_filter_reproduces_demo_corpus(demo_dir, tmp_path):
    out, rep = tmp_path / "t.jsonl", tmp_path / "r.json"
    assert run(["filter", "--input", str(demo_dir / "raw_tweets.jsonl"), "--wordlist", str(demo_dir / "wordlist.txt"),
                "--output", str(out), "--report", str(rep)]) == 0
    assert out.read_bytes() == (demo_dir / "tweets.jsonl").read_bytes()
    report = json.loads(rep.read_text())
    assert report["kept"] == 200
    assert report["total_in"] == report["kept"] + report["dropped_retweet"] + report["dropped_language"] + \
        report["dropped_english_wordcount"]


def test_gold_coarse_matches_strong_majority(demo_dir, tmp_path):
    out = tmp_path / "g.tsv"
    assert run(["gold", "--annotations", str(demo_dir / "annotations.tsv"), "--granularity", "coarse",
                "--output", str(out)]) == 0
    sets = ann.group_records(ann.read_annotations(demo_dir / "annotations.tsv"))
    expected = {}
    for s in sets:
        g = ann.strong_majority_label(s, ann.Q1, ann.COARSE)
        if g is not None and len(s) >= 2:
            expected[s.tweet_id] = g.label
    assert ann.read_label_map(out) == expected
    assert len(expected) > 150


def test_annotate_stats_tables(demo_dir, tmp_path):
    out, tables = tmp_path / "stats.json", tmp_path / "tables"
    assert run(["annotate-stats", "--annotations", str(demo_dir / "annotations.tsv"), "--output", str(out),
                "--tables-dir", str(tables)]) == 0
    report = json.loads(out.read_text())
    assert set(report["agreement"]) == {"Q1", "Q1'", "Q2"}
    assert report["agreement"]["Q1'"]["IAA"] >= report["agreement"]["Q1"]["IAA"]
    assert (tables / "annotation_histogram.tsv").exists() and (tables / "agreement.tsv").exists()


def test_featurize_groups(demo_dir, tmp_path):
    out = tmp_path / "v.tsv"
    assert run(["featurize", "--corpus", str(demo_dir / "tweets.jsonl"), "--groups", "ngrams,hashtags",
                "--output", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 200
    for line in lines:
        for pair in line.split("\t")[1:]:
            assert pair[:2] in ("W1", "W2", "W3", "W4", "C3", "C4", "C5") or pair.startswith("META:hashtags")
    assert run(["featurize", "--corpus", str(demo_dir / "tweets.jsonl"), "--groups", "syntax"]) == 1


@pytest.fixture(scope="module")
def gold_file(demo_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("gold") / "gold.tsv"
    assert run(["gold", "--annotations", str(demo_dir / "annotations.tsv"), "--granularity", "coarse",
                "--output", str(out)]) == 0
    return out


def test_train_predict(demo_dir, tmp_path, gold_file):
    model = tmp_path / "m.bin"
    common = ["--corpus", str(demo_dir / "tweets.jsonl"), *demo_resources(demo_dir)]
    assert run(["train", *common, "--labels", str(gold_file), "--C", "1", "--output", str(model)]) == 0
    m = load_model(model)
    assert m.label_set == ("favour", "oppose", "other")
    preds = tmp_path / "p.tsv"
    assert run(["predict", "--model", str(model), *common, "--output", str(preds)]) == 0
    rows = [line.split("\t") for line in preds.read_text(encoding="utf-8").splitlines()]
    gold = ann.read_label_map(gold_file)
    body = [r for r in rows if r[0] in gold]
    acc = sum(r[1] == gold[r[0]] for r in body) / len(body)
    assert acc >= 0.95


def test_small_evaluate(demo_dir, tmp_path, gold_file):
    out, tables = tmp_path / "e.json", tmp_path / "tables"
    args = ["evaluate", "--corpus", str(demo_dir / "tweets.jsonl"), "--labels", str(gold_file),
            *demo_resources(demo_dir), "--k", "3", "--repeats", "1", "--grid", "1", "--seed", "5",
            "--output", str(out), "--tables-dir", str(tables)]
    assert run(args) == 0
    report = json.loads(out.read_text())
    assert len(report["fold_accuracies"]) == 3
    assert report["micro"]["P"] == pytest.approx(report["pooled_accuracy"])
    assert report["mean_accuracy"] > report["majority_baseline"]
    assert (tables / "accuracy.tsv").read_text().startswith("system\taccuracy\n")
    first = out.read_bytes()
    assert run(args) == 0
    assert out.read_bytes() == first


# --------------------------------------------------------------------------
# byte-identical reruns


def test_reruns_are_byte_identical(demo_dir, tmp_path, gold_file):
    corpus = str(demo_dir / "tweets.jsonl")
    stages = {
        "lex.tsv": ["build-lexicon", "--corpus", corpus, "--hashtags", str(demo_dir / "emotion_hashtags.txt")],
        "gold.tsv": ["gold", "--annotations", str(demo_dir / "annotations.tsv")],
        "stats.json": ["annotate-stats", "--annotations", str(demo_dir / "annotations.tsv")],
        "vec.tsv": ["featurize", "--corpus", corpus, *demo_resources(demo_dir)],
        "model.bin": ["train", "--corpus", corpus, "--labels", str(gold_file), *demo_resources(demo_dir), "--grid",
                      "0.1,1", "--seed", "3"],
    }
    for name, argv in stages.items():
        outs = []
        for i in range(2):
            path = tmp_path / f"{i}-{name}"
            assert run([*argv, "--output", str(path)]) == 0, name
            outs.append(path.read_bytes())
        assert outs[0] == outs[1], name
