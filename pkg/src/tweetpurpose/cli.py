"""Command-line entry point: one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error (missing or malformed
input).  All randomness flows from ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import annotations as ann
from .corpus import filter_corpus, load_wordlist, read_jsonl, with_pos_tags, write_jsonl
from .evalharness import ablate, ablation_dict, ablation_tsv, cross_validate, majority_baseline
from .features import GROUPS, FeatureConfig, Resources, extract, format_vector
from .learner import DEFAULT_GRID, Dataset, config_string, load_model, save_model, train, tune_C
from .lexicons import build_hashtag_lexicon, load_emotion_lexicon, load_hashtag_lexicon, load_hashtag_list, \
    save_hashtag_lexicon
from .textproc import load_clusters, load_negations, load_pos_file

log = logging.getLogger("tweetpurpose")

DEFAULT_SEED = 13
EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# --------------------------------------------------------------------------
# argument groups


def _add_seed_jobs(p):
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
    p.add_argument("--jobs", type=int, default=None, help="worker threads (default: available CPUs)")


def _add_resources(p):
    g = p.add_argument_group("resources")
    g.add_argument("--emotion-lexicon", type=Path, help="word<TAB>label<TAB>0|1 emotion lexicon")
    g.add_argument("--clusters", type=Path, help="cluster_path<TAB>word<TAB>count word clusters")
    g.add_argument("--pos-file", type=Path, help="tweet_id<TAB>space-joined POS tags")
    g.add_argument("--negations", type=Path, help="negation word list (default: bundled)")
    g.add_argument("--hashtag-lexicon", type=Path, help="hashtag emotion lexicon TSV")


def _add_groups(p):
    p.add_argument("--groups", default=",".join(GROUPS), help="comma-separated feature groups (default: all)")
    p.add_argument("--without", default="", help="comma-separated feature groups to disable")


def _add_labels(p):
    g = p.add_argument_group("labels")
    g.add_argument("--labels", type=Path, help="tweet_id<TAB>label file (e.g. output of 'gold')")
    g.add_argument("--annotations", type=Path, help="annotation TSV; gold labels by strong majority")
    g.add_argument("--granularity", choices=(ann.FINE, ann.COARSE), default=ann.FINE)
    g.add_argument("--question", choices=(ann.Q1, ann.Q2), default=ann.Q1)
    g.add_argument("--filter-poor", action="store_true", help="drop outlier annotators first")


def _add_cv(p):
    p.add_argument("--k", type=int, default=10, help="folds (default 10)")
    p.add_argument("--repeats", type=int, default=10, help="CV repetitions (default 10)")
    p.add_argument("--grid", default=",".join(str(c) for c in DEFAULT_GRID), help="C grid, comma-separated")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser = _Parser(prog="tweetpurpose", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    _add_parser = sub.add_parser
    sub.add_parser = lambda *a, **kw: _add_parser(*a, parents=[common], **kw)
    sub.required = True

    p = sub.add_parser("filter", help="drop retweets / non-English tweets and normalize")
    p.add_argument("--input", type=Path, required=True, help="tweets JSON lines")
    p.add_argument("--wordlist", type=Path, required=True, help="English word inventory, one per line")
    p.add_argument("--output", type=Path, required=True, help="kept tweets JSON lines")
    p.add_argument("--report", type=Path, help="write the filter report JSON here (default: stdout)")
    p.add_argument("--english-code", default="en")

    p = sub.add_parser("annotate-stats", help="annotation histograms, agreement and confusion tables")
    p.add_argument("--annotations", type=Path, required=True)
    p.add_argument("--filter-poor", action="store_true", help="drop outlier annotators first")
    p.add_argument("--emotion-golds", type=Path, help="tweet_id<TAB>emotion for the purpose x emotion table")
    p.add_argument("--construction", choices=("plurality", "strong"), default="plurality",
                   help="majority rule for confusion matrices")
    p.add_argument("--output", type=Path, help="report JSON (default: stdout)")
    p.add_argument("--tables-dir", type=Path, help="also write one TSV per table here")

    p = sub.add_parser("gold", help="strong-majority gold labels")
    p.add_argument("--annotations", type=Path, required=True)
    p.add_argument("--granularity", choices=(ann.FINE, ann.COARSE), default=ann.FINE)
    p.add_argument("--question", choices=(ann.Q1, ann.Q2), default=ann.Q1)
    p.add_argument("--filter-poor", action="store_true")
    p.add_argument("--min-annotations", type=int, default=2)
    p.add_argument("--output", type=Path, help="gold TSV (default: stdout)")

    p = sub.add_parser("build-lexicon", help="induce a hashtag emotion lexicon by PMI")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--hashtags", type=Path, required=True, help="emotion hashtag words, one per line")
    p.add_argument("--min-word", type=int, default=5)
    p.add_argument("--min-joint", type=int, default=2)
    p.add_argument("--output", type=Path, required=True)

    p = sub.add_parser("featurize", help="write sparse feature vectors")
    p.add_argument("--corpus", type=Path, required=True)
    _add_resources(p)
    _add_groups(p)
    p.add_argument("--output", type=Path, help="vectors TSV (default: stdout)")

    p = sub.add_parser("train", help="train a linear SVM model")
    p.add_argument("--corpus", type=Path, required=True)
    _add_labels(p)
    _add_resources(p)
    _add_groups(p)
    p.add_argument("--C", type=float, help="regularization constant (default: tuned by inner CV over --grid)")
    p.add_argument("--grid", default=",".join(str(c) for c in DEFAULT_GRID))
    _add_seed_jobs(p)
    p.add_argument("--output", type=Path, required=True, help="model file")

    p = sub.add_parser("predict", help="label tweets with a trained model")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--corpus", type=Path, required=True)
    _add_resources(p)
    p.add_argument("--output", type=Path, help="predictions TSV (default: stdout)")

    for name, help_ in (("evaluate", "repeated stratified cross-validation"),
                        ("ablate", "cross-validation with one feature group removed at a time")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--corpus", type=Path, required=True)
        _add_labels(p)
        _add_resources(p)
        _add_groups(p)
        _add_cv(p)
        _add_seed_jobs(p)
        if name == "ablate":
            p.add_argument("--ablate-groups", help="groups to remove one at a time (default: all enabled)")
        p.add_argument("--output", type=Path, help="report JSON (default: stdout)")
        p.add_argument("--tables-dir", type=Path, help="also write TSV tables here")
    parser.set_defaults(_subparsers=sub.choices)
    return parser


# --------------------------------------------------------------------------
# helpers


def _check_inputs(args):
    for attr in ("input", "wordlist", "annotations", "emotion_golds", "corpus", "hashtags", "emotion_lexicon",
                 "clusters", "pos_file", "negations", "hashtag_lexicon", "labels", "model"):
        path = getattr(args, attr, None)
        if path is not None and not path.is_file():
            raise DataError(f"input file not found: {path}")


def _parse_groups(args) -> FeatureConfig:
    enabled = [g.strip() for g in args.groups.split(",") if g.strip()]
    removed = {g.strip() for g in args.without.split(",") if g.strip()}
    for g in list(enabled) + list(removed):
        if g not in GROUPS:
            raise UsageError(f"unknown feature group {g!r}; choose from {', '.join(GROUPS)}")
    groups = frozenset(enabled) - removed
    if not groups:
        raise UsageError("no feature group enabled")
    return FeatureConfig(groups)


def _parse_grid(text: str) -> list[float]:
    try:
        grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad --grid value {text!r}") from None
    if not grid or any(c <= 0 for c in grid):
        raise UsageError("--grid needs positive values")
    return grid


def _jobs(args) -> int:
    return args.jobs if args.jobs else (os.cpu_count() or 1)


def _resources(args) -> Resources:
    res = Resources()
    if args.emotion_lexicon:
        res.emotion_lexicon = load_emotion_lexicon(args.emotion_lexicon)
    if args.clusters:
        res.clusters = load_clusters(args.clusters)
    if args.hashtag_lexicon:
        res.hashtag_lexicon = load_hashtag_lexicon(args.hashtag_lexicon)
    if args.negations:
        res.negations = load_negations(args.negations)
    return res


def _tweets(args):
    tweets = read_jsonl(args.corpus)
    if getattr(args, "pos_file", None):
        tweets = with_pos_tags(tweets, load_pos_file(args.pos_file))
    return tweets


def _annotation_sets(path, filter_poor: bool):
    sets = ann.group_records(ann.read_annotations(path))
    if filter_poor:
        sets, dropped = ann.filter_poor_annotators(sets)
        log.info("dropped %d poor annotators", len(dropped))
    return sets


def _label_map(args) -> tuple[dict[str, str], tuple[str, ...] | None]:
    if args.labels and args.annotations:
        raise UsageError("give either --labels or --annotations, not both")
    if args.labels:
        return ann.read_label_map(args.labels), None
    if args.annotations:
        sets = _annotation_sets(args.annotations, args.filter_poor)
        golds = ann.gold_labels(sets, args.question, args.granularity)
        return {g.tweet_id: g.label for g in golds}, ann.label_order(args.question, args.granularity)
    raise UsageError("labels required: give --labels or --annotations")


def _labelled_dataset(args, config: FeatureConfig) -> Dataset:
    labels, order = _label_map(args)
    res = _resources(args)
    instances = [(t.id, extract(t, res, config), labels[t.id]) for t in _tweets(args) if t.id in labels]
    if not instances:
        raise DataError("no tweet in the corpus has a label")
    present = {lab for _, _, lab in instances}
    if order is None:
        for candidate in (ann.FINE_LABELS, ann.COARSE_LABELS, ann.RELEVANCE_LABELS):
            if present <= set(candidate):
                order = candidate
                break
        else:
            order = tuple(sorted(present))
    log.info("%d labelled tweets", len(instances))
    return Dataset.build(instances, [lab for lab in order if lab in present])


def _emit(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# --------------------------------------------------------------------------
# subcommands


def cmd_filter(args):
    kept, report = filter_corpus(read_jsonl(args.input), load_wordlist(args.wordlist), args.english_code)
    write_jsonl(kept, args.output)
    _emit(_dump(report.to_dict()), args.report)


def _matrix_tsv(matrix: dict) -> str:
    labels = list(matrix)
    rows = ["gold\\annotated\t" + "\t".join(labels)]
    rows += [x + "\t" + "\t".join(str(matrix[x][y]) for y in labels) for x in labels]
    return "\n".join(rows) + "\n"


def cmd_annotate_stats(args):
    sets = _annotation_sets(args.annotations, args.filter_poor)
    emotions = ann.read_label_map(args.emotion_golds) if args.emotion_golds else None
    report = ann.annotation_report(sets, emotions, args.construction)
    _emit(_dump(report), args.output)
    if args.tables_dir:
        d = args.tables_dir
        d.mkdir(parents=True, exist_ok=True)
        hist = ["annotations_per_tweet\ttweets\tannotations"]
        hist += [f"{r['annotations_per_tweet']}\t{r['tweets']}\t{r['annotations']}" for r in report["annotation_histogram"]]
        (d / "annotation_histogram.tsv").write_text("\n".join(hist) + "\n", encoding="utf-8")
        for view, dist in report["distribution"].items():
            body = "category\tpercentage\n" + "".join(f"{k}\t{v:.2f}\n" for k, v in dist.items())
            (d / f"distribution_{_slug(view)}.tsv").write_text(body, encoding="utf-8")
        mcs = ["question\tMCS-1\tMCS-2\tMCS-3"]
        mcs += [f"{v}\t" + "\t".join(f"{x:.2f}" for x in row.values()) for v, row in report["majority_class_size"].items()]
        (d / "majority_class_size.tsv").write_text("\n".join(mcs) + "\n", encoding="utf-8")
        agr = ["question\tIAA\tAPMS"]
        agr += [f"{v}\t{row['IAA']:.2f}\t{row['APMS']:.3f}" for v, row in report["agreement"].items()]
        (d / "agreement.tsv").write_text("\n".join(agr) + "\n", encoding="utf-8")
        for view, matrix in report["confusion"].items():
            (d / f"confusion_{_slug(view)}.tsv").write_text(_matrix_tsv(matrix), encoding="utf-8")
        if "purpose_emotion" in report:
            table = report["purpose_emotion"]
            emos = sorted({e for row in table.values() for e in row})
            rows = ["purpose\t" + "\t".join(emos)]
            rows += [p + "\t" + "\t".join(f"{row.get(e, 0):.0f}" for e in emos) for p, row in table.items()]
            (d / "purpose_emotion.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")


def _slug(view: str) -> str:
    return view.lower().replace("'", "_coarse")


def cmd_gold(args):
    sets = _annotation_sets(args.annotations, args.filter_poor)
    golds = ann.gold_labels(sets, args.question, args.granularity, args.min_annotations)
    if args.output:
        ann.write_golds(golds, args.output)
    else:
        ann.write_golds(golds, sys.stdout)


def cmd_build_lexicon(args):
    texts = [t.text for t in read_jsonl(args.corpus)]
    lex = build_hashtag_lexicon(texts, load_hashtag_list(args.hashtags), args.min_joint, args.min_word)
    save_hashtag_lexicon(lex, args.output)
    log.info("lexicon: %d words x %d emotions", len(lex), len(lex.emotions))


def cmd_featurize(args):
    config = _parse_groups(args)
    res = _resources(args)
    lines = [format_vector(t.id, extract(t, res, config)) + "\n" for t in _tweets(args)]
    _emit("".join(lines), args.output)


def cmd_train(args):
    config = _parse_groups(args)
    data = _labelled_dataset(args, config)
    if args.C is not None:
        if args.C <= 0:
            raise UsageError("--C must be positive")
        C = args.C
    else:
        C = tune_C(data, _parse_grid(args.grid), args.seed)
    model = train(data, C, args.seed, config=config_string(config.describe()))
    save_model(model, args.output)
    log.info("trained on %d tweets, C=%g, %d features", len(data), C, len(model.vocabulary))


def cmd_predict(args):
    model = load_model(args.model)
    groups = json.loads(model.config)["groups"] if model.config else list(GROUPS)
    config = FeatureConfig(frozenset(groups))
    res = _resources(args)
    tweets = _tweets(args)
    preds = model.predict_many(extract(t, res, config) for t in tweets)
    _emit("tweet_id\tlabel\n" + "".join(f"{t.id}\t{p}\n" for t, p in zip(tweets, preds)), args.output)


def _write_tables(d: Path | None, files: dict[str, str]):
    if d is None:
        return
    d.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (d / name).write_text(text, encoding="utf-8")


def cmd_evaluate(args):
    config = _parse_groups(args)
    data = _labelled_dataset(args, config)
    report = cross_validate(data, config, args.k, args.repeats, args.seed, grid=_parse_grid(args.grid),
                            jobs=_jobs(args))
    baseline = majority_baseline(data.labels)
    out = report.to_dict()
    out["majority_baseline"] = baseline
    _emit(_dump(out), args.output)
    _write_tables(args.tables_dir, {"accuracy.tsv": report.summary_tsv(baseline),
                                    "per_class.tsv": report.per_class_tsv()})
    log.info("mean accuracy %.4f (majority %.4f)", report.mean_accuracy, baseline)


def cmd_ablate(args):
    config = _parse_groups(args)
    data = _labelled_dataset(args, FeatureConfig.all())
    if args.ablate_groups:
        groups = [g.strip() for g in args.ablate_groups.split(",") if g.strip()]
        for g in groups:
            if g not in config.enabled_groups:
                raise UsageError(f"--ablate-groups: {g!r} is not an enabled group")
    else:
        groups = config.describe()
    reference, results = ablate(data, groups, args.k, args.repeats, args.seed, base_config=config,
                                grid=_parse_grid(args.grid), jobs=_jobs(args))
    out = ablation_dict(reference, results)
    out["majority_baseline"] = majority_baseline(data.labels)
    _emit(_dump(out), args.output)
    _write_tables(args.tables_dir, {"ablation.tsv": ablation_tsv(reference, results)})


COMMANDS = {
    "filter": cmd_filter,
    "annotate-stats": cmd_annotate_stats,
    "gold": cmd_gold,
    "build-lexicon": cmd_build_lexicon,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        if extra:
            # report against the subcommand so its own help is shown
            args._subparsers[args.command].error(f"unrecognized arguments: {' '.join(extra)}")
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _check_inputs(args)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"tweetpurpose {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, ValueError) as exc:
        print(f"tweetpurpose {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
