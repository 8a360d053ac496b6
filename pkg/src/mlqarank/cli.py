"""Command-line interface.

Subcommands cover each pipeline stage (build-tables, featurize, train,
rank, merge, evaluate, select-data, mask-contexts), the end-to-end
driver (run), and the synthetic fixture generator (gen-fixture). Every
randomized stage takes ``--seed``. Reports are tab-separated; the
evaluate and run paths also render PNG figures next to their output
unless ``--no-figures`` is given.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import classifier, corpus, data_selection, evaluation, features, ranking
from . import pipeline as pipeline_mod
from . import synthetic, translation


def _paths_from_args(args) -> pipeline_mod.ResourcePaths:
    return pipeline_mod.ResourcePaths(
        questions=Path(args.questions),
        corpus=Path(args.corpus),
        judgments=Path(args.judgments),
        tables_dir=Path(args.tables) if getattr(args, "tables", None) else None,
        stopwords=Path(args.stopwords) if getattr(args, "stopwords", None) else None,
        templates=Path(args.templates) if getattr(args, "templates", None) else None,
        output_dir=Path(args.outdir) if getattr(args, "outdir", None) else None,
    )


def _cmd_build_tables(args) -> int:
    pairs = translation.read_aligned_corpus(args.alignments)
    table = translation.build_word_table(pairs, normalize=not args.raw)
    translation.write_translation_table(table, args.output)
    print(f"wrote {len(table)} source words to {args.output}")
    return 0


def _cmd_mask_contexts(args) -> int:
    n_lines = 0
    with open(args.input, encoding="utf-8") as src, open(args.output, "w", encoding="utf-8") as dst:
        for lineno, line in enumerate(src, 1):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 2:
                raise ValueError(f"{args.input}:{lineno}: expected 'focus_index<TAB>tokens'")
            focus_index = int(fields[0])
            tokens = fields[1].split()
            samples = translation.mask_contexts(
                tokens, focus_index, args.window, args.samples, args.seed + lineno
            )
            for sample in samples:
                dst.write(" ".join(sample) + "\n")
                n_lines += 1
    print(f"wrote {n_lines} masked sequences to {args.output}")
    return 0


def _cmd_featurize(args) -> int:
    dataset = pipeline_mod.build_dataset(_paths_from_args(args), args.feature_set)
    selected = data_selection.filter_subset(
        dataset.judgments, dataset.candidates, args.subset
    )
    rows = [
        (qid, cid, label, dataset.features[(qid, cid)])
        for (qid, cid), label in selected.items()
    ]
    features.write_features(rows, args.output)
    print(f"wrote {len(rows)} feature rows ({args.subset}) to {args.output}")
    return 0


def _cmd_train(args) -> int:
    rows = features.read_features(args.features, args.feature_set)
    examples = []
    for question_id, candidate_id, fv in rows:
        if fv.label is None:
            raise ValueError(f"unlabeled pair ({question_id}, {candidate_id}) in training data")
        examples.append(classifier.TrainingExample(fv, fv.label))
    config = classifier.TrainConfig(l2=args.l2, seed=args.seed)
    model = classifier.train_ensemble(examples, config)
    classifier.write_model(model, args.output)
    print(f"trained {len(model.members)} members on {len(examples)} examples -> {args.output}")
    return 0


def _cmd_rank(args) -> int:
    model = classifier.read_model(args.model)
    rows = features.read_features(args.features, args.feature_set)
    by_id = corpus.index_candidates(corpus.load_corpus(args.corpus))
    scored: dict[str, list[tuple[str, str, float]]] = {}
    for question_id, candidate_id, fv in rows:
        candidate = by_id.get(candidate_id)
        if candidate is None:
            raise ValueError(f"feature row references unknown candidate {candidate_id!r}")
        if args.language and candidate.language != args.language:
            continue
        scored.setdefault(question_id, []).append(
            (candidate_id, candidate.language, classifier.score(model, fv))
        )
    lists = []
    for question_id in sorted(scored):
        ranked = ranking.ranked_list_from_scores(question_id, scored[question_id], args.n)
        if args.normalize:
            ranked = ranking.normalize_scores(ranked)
        lists.append(ranked)
    ranking.write_ranked_lists(lists, args.output)
    print(f"wrote ranked lists for {len(lists)} questions to {args.output}")
    return 0


def _cmd_merge(args) -> int:
    by_question: dict[str, list[ranking.RankedList]] = {}
    for path in args.lists:
        for question_id, ranked in ranking.read_ranked_lists(path).items():
            by_question.setdefault(question_id, []).append(ranking.normalize_scores(ranked))
    weights: dict[str, float] = {}
    if args.strategy == "weighted" and args.learn_weights:
        if not args.judgments:
            raise ValueError("--learn-weights needs --judgments for the grid search")
        grid = [float(w) for w in args.grid.split(",")]
        relevant: dict[str, set] = {}
        for judgment in corpus.load_judgments(args.judgments):
            if corpus.evaluation_label(judgment):
                relevant.setdefault(judgment.question_id, set()).add(judgment.candidate_id)
        relevant_ids = {qid: relevant.get(qid, set()) for qid in by_question}
        totals = {qid: len(ids) for qid, ids in relevant_ids.items()}
        weights = ranking.learn_merge_weight(
            by_question, relevant_ids, totals, grid, args.n, args.k
        )
    merged = []
    for question_id in sorted(by_question):
        lists = by_question[question_id]
        if args.strategy == "uniform":
            merged.append(ranking.merge_uniform(lists, args.n))
        elif args.strategy == "alternate":
            merged.append(ranking.merge_alternate(lists, args.n))
        elif args.strategy == "english-first":
            merged.append(ranking.merge_english_first(lists, args.n, args.threshold))
        else:
            weight = weights.get(question_id, args.english_weight)
            merged.append(ranking.merge_weighted(lists, args.n, weight))
    ranking.write_ranked_lists(merged, args.output)
    if weights:
        chosen = ", ".join(f"{qid}={weights[qid]:g}" for qid in sorted(weights))
        print(f"learned weights: {chosen}")
    print(f"merged {len(merged)} questions ({args.strategy}) to {args.output}")
    return 0


def _cmd_evaluate(args) -> int:
    lists = ranking.read_ranked_lists(args.ranked)
    judgments = corpus.load_judgments(args.judgments)
    by_question: dict[str, list] = {}
    for judgment in judgments:
        by_question.setdefault(judgment.question_id, []).append(judgment)
    per_question = {}
    for question_id, ranked in sorted(lists.items()):
        pool = by_question.get(question_id, [])
        relevant = {j.candidate_id for j in pool if corpus.evaluation_label(j)}
        relevance = [e.candidate_id in relevant for e in ranked.entries]
        per_question[question_id] = evaluation.ap_k(relevance, args.k, len(relevant))
    if not per_question:
        raise ValueError("no questions to evaluate")
    ratio = ranking.pooled_language_ratio(lists[qid] for qid in sorted(lists))
    p_value = None
    if args.baseline:
        baseline_lists = ranking.read_ranked_lists(args.baseline)
        if set(baseline_lists) != set(lists):
            raise ValueError("baseline run covers a different question set")
        baseline_ap = []
        run_ap = []
        for question_id in sorted(lists):
            pool = by_question.get(question_id, [])
            relevant = {j.candidate_id for j in pool if corpus.evaluation_label(j)}
            relevance = [e.candidate_id in relevant for e in baseline_lists[question_id].entries]
            baseline_ap.append(evaluation.ap_k(relevance, args.k, len(relevant)))
            run_ap.append(per_question[question_id])
        p_value = evaluation.paired_permutation_test(
            run_ap, baseline_ap, iterations=args.iterations, seed=args.seed
        )
    report = evaluation.report_from_ap(per_question, args.k, ratio, p_value)
    evaluation.write_report(report, args.output)
    written = [str(args.output)]
    if args.figures:
        from . import figures as figures_mod

        stem = Path(args.output).with_suffix("")
        ap_png = Path(f"{stem}_ap.png")
        figures_mod.render_ap_figure(report, ap_png)
        written.append(str(ap_png))
        if ratio is not None:
            lang_png = Path(f"{stem}_languages.png")
            figures_mod.render_language_figure(ratio, lang_png)
            written.append(str(lang_png))
    print(f"MAP = {report.map_score:.4f} over {len(per_question)} questions")
    if p_value is not None:
        print(f"p-value vs baseline = {p_value:.4f}")
    print("wrote " + ", ".join(written))
    return 0


def _cmd_select_data(args) -> int:
    dataset = pipeline_mod.build_dataset(_paths_from_args(args), args.feature_set)
    criteria = tuple(args.criteria.split(","))
    for criterion in criteria:
        if criterion not in data_selection.CRITERIA:
            raise ValueError(f"unknown subset criterion {criterion!r}")
    config = classifier.TrainConfig(l2=args.l2, seed=args.seed)
    result = data_selection.select_best_subset(
        criteria, dataset, args.folds, args.seed, config, args.k
    )
    lines = ["criterion\tretained\tcv_map"]
    for criterion in criteria:
        value = result.cv_map[criterion]
        value_text = "-" if value is None else repr(value)
        lines.append(f"{criterion}\t{result.retained[criterion]}\t{value_text}")
    text = "\n".join(lines) + "\n"
    with open(args.output, "w", encoding="utf-8") as handle:
        handle.write(text)
    print(text, end="")
    print(f"best criterion: {result.best}")
    return 0


def _cmd_run(args) -> int:
    config = pipeline_mod.RunConfig(
        feature_set=args.feature_set,
        subset=args.subset,
        mode=args.mode,
        seed=args.seed,
        ap_cutoff=args.k,
        folds=args.folds,
        list_size=args.n,
        merge_strategy=args.strategy,
        merge_threshold=args.threshold,
        merge_weight=args.english_weight,
        l2=args.l2,
        figures=args.figures,
    )
    result = pipeline_mod.run_pipeline(config, _paths_from_args(args))
    print(f"MAP = {result.report.map_score:.4f} over {len(result.report.per_question)} questions")
    if result.report.language_ratio is not None:
        en, ch, ar = result.report.language_ratio
        print(f"language share: en={en:.1f}% ch={ch:.1f}% ar={ar:.1f}%")
    for path in result.output_files:
        print(f"wrote {path}")
    return 0


def _cmd_gen_fixture(args) -> int:
    spec = synthetic.GeneratorSpec(
        seed=args.seed,
        n_questions=args.questions,
        synonym_fanout=args.fanout,
        synonym_fraction=args.synonym_fraction,
        relevant_per_language=args.relevant,
        irrelevant_per_language=args.irrelevant,
        hallucinated_per_language=args.hallucinated,
        doubly_annotated_fraction=args.doubly_annotated,
        label_noise=args.label_noise,
    )
    fixture = synthetic.generate(spec)
    written = synthetic.write_fixture(fixture, args.outdir)
    print(f"wrote {len(written)} fixture files to {args.outdir}")
    return 0


def _add_input_arguments(parser, tables: bool = True) -> None:
    parser.add_argument("--questions", required=True, help="question file (id, raw text)")
    parser.add_argument("--corpus", required=True, help="candidate sentence file")
    parser.add_argument("--judgments", required=True, help="judgment file")
    if tables:
        parser.add_argument("--tables", help="directory of per-language table files")
    parser.add_argument("--stopwords", help="stopword list, one per line")
    parser.add_argument("--templates", help="template phrase list, one per line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlqarank",
        description="Rank multilingual candidate answers with translation-based features.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-tables", help="turn an aligned corpus into a translation table")
    p.add_argument("--alignments", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--raw", action="store_true", help="keep raw link/occurrence ratios")
    p.set_defaults(func=_cmd_build_tables)

    p = sub.add_parser("mask-contexts", help="emit context-masked training sequences")
    p.add_argument("--input", required=True, help="lines of 'focus_index<TAB>tokens'")
    p.add_argument("--output", required=True)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--samples", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_mask_contexts)

    p = sub.add_parser("featurize", help="compute features for judged pairs")
    _add_input_arguments(p)
    p.add_argument("--feature-set", choices=features.FEATURE_SETS, default="both")
    p.add_argument("--subset", choices=data_selection.CRITERIA, default="all")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_featurize)

    p = sub.add_parser("train", help="train the balanced-subset ensemble")
    p.add_argument("--features", required=True)
    p.add_argument("--feature-set", choices=features.FEATURE_SETS, default="both")
    p.add_argument("--l2", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("rank", help="rank candidates with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--feature-set", choices=features.FEATURE_SETS, default="both")
    p.add_argument("--language", choices=corpus.LANGUAGES, help="restrict the pool")
    p.add_argument("-n", type=int, default=20)
    p.add_argument("--normalize", action="store_true", help="min-max normalize scores")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("merge", help="merge per-language ranked lists")
    p.add_argument("--lists", nargs="+", required=True)
    p.add_argument("--strategy", choices=ranking.MERGE_STRATEGIES, required=True)
    p.add_argument("-n", type=int, default=20)
    p.add_argument("--threshold", type=float, default=0.5, help="english-first cutoff")
    p.add_argument("--english-weight", type=float, default=2.0, help="weighted-merge factor")
    p.add_argument("--learn-weights", action="store_true",
                   help="grid-search a per-question weight on the other questions")
    p.add_argument("--grid", default="1,2,5,10", help="candidate weights for --learn-weights")
    p.add_argument("--judgments", help="judgment file (required by --learn-weights)")
    p.add_argument("--k", type=int, default=evaluation.DEFAULT_AP_CUTOFF)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_merge)

    p = sub.add_parser("evaluate", help="score ranked lists against judgments")
    p.add_argument("--ranked", required=True)
    p.add_argument("--judgments", required=True)
    p.add_argument("--k", type=int, default=evaluation.DEFAULT_AP_CUTOFF)
    p.add_argument("--baseline", help="second ranked-list file to test against")
    p.add_argument("--iterations", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.add_argument("--no-figures", dest="figures", action="store_false")
    p.set_defaults(func=_cmd_evaluate, figures=True)

    p = sub.add_parser("select-data", help="cross-validate training-data subsets")
    _add_input_arguments(p)
    p.add_argument("--feature-set", choices=features.FEATURE_SETS, default="both")
    p.add_argument("--criteria", default=",".join(data_selection.CRITERIA))
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--l2", type=float, default=1.0)
    p.add_argument("--k", type=int, default=evaluation.DEFAULT_AP_CUTOFF)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_select_data)

    p = sub.add_parser("run", help="run the full pipeline with cross-validation")
    _add_input_arguments(p)
    p.add_argument("--outdir", required=True)
    p.add_argument("--feature-set", choices=features.FEATURE_SETS, default="both")
    p.add_argument("--subset", choices=data_selection.CRITERIA, default="all")
    p.add_argument("--mode", choices=pipeline_mod.RANKING_MODES, default="single")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=evaluation.DEFAULT_AP_CUTOFF)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("-n", type=int, default=20)
    p.add_argument("--strategy", choices=ranking.MERGE_STRATEGIES, default="uniform")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--english-weight", type=float, default=2.0)
    p.add_argument("--l2", type=float, default=1.0)
    p.add_argument("--no-figures", dest="figures", action="store_false")
    p.set_defaults(func=_cmd_run, figures=True)

    p = sub.add_parser("gen-fixture", help="generate a synthetic corpus")
    p.add_argument("--outdir", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--questions", type=int, default=24)
    p.add_argument("--fanout", type=int, default=3)
    p.add_argument("--synonym-fraction", type=float, default=0.5)
    p.add_argument("--relevant", type=int, default=2)
    p.add_argument("--irrelevant", type=int, default=4)
    p.add_argument("--hallucinated", type=int, default=0)
    p.add_argument("--doubly-annotated", type=float, default=1.0)
    p.add_argument("--label-noise", type=float, default=0.0)
    p.set_defaults(func=_cmd_gen_fixture)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
