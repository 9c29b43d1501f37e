"""Command-line interface: one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage/config error, 2 data error. Selected defaults
honor SPARSEQA_* environment variables (K1, B, RETRIEVAL_K, JOBS, STRATEGY,
FUSION_K, RRF_C, VOTE_N, KS); precedence is flag > env > config file >
built-in default.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from sparseqa import augment as aug
from sparseqa import evaluation as ev
from sparseqa import fusion
from sparseqa import voting
from sparseqa.config import ENV_PREFIX, validate_config
from sparseqa.corpus import load_corpus, load_queries, load_questions
from sparseqa.errors import ConfigError, DataFormatError, SparseQAError, StageError
from sparseqa.index import InvertedIndex
from sparseqa.jsonl import read_records, require_field, write_records
from sparseqa.pipeline import retrieval_report, retrieve_run, run_pipeline
from sparseqa.runs import RunSet, read_trec_run, write_trec_run


class _Parser(argparse.ArgumentParser):
    """argparse with the usage-error exit code remapped from 2 to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _env(name: str, cast, default):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise ConfigError(f"bad value for {ENV_PREFIX}{name}: '{raw}'") from None


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _parse_ks(raw: str) -> list[int]:
    try:
        ks = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"bad cutoff list '{raw}'") from None
    if not ks or ks[0] < 1 or any(b <= a for a, b in zip(ks, ks[1:])):
        raise ConfigError(f"cutoffs must be strictly increasing and >= 1, got '{raw}'")
    return ks


def _emit(payload: dict, tsv_tables: list[list[list[str]]], fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    else:
        blocks = ["\n".join("\t".join(row) for row in table) for table in tsv_tables]
        text = "\n\n".join(blocks) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommand handlers -------------------------------------------------------


def cmd_index(args) -> int:
    corpus = load_corpus(args.corpus)
    _log(f"loaded {len(corpus)} passages")
    index = InvertedIndex.build(corpus, k1=args.k1, b=args.b)
    index.save(args.out)
    _log(f"indexed {index.n_docs} passages, {index.n_terms} terms, "
         f"{index.n_postings} postings, avgdl {index.avgdl:.3f} -> {args.out}")
    return 0


def cmd_prep_targets(args) -> int:
    questions = load_questions(args.questions)
    if args.type in ("sentence", "title"):
        if not args.corpus or not args.index:
            raise ConfigError(f"--corpus and --index are required for --type {args.type}")
        corpus = load_corpus(args.corpus)
        index = InvertedIndex.load(args.index)
    emitted: list[dict] = []
    skipped = 0
    for question in questions:
        if args.type == "answer":
            target = aug.extract_answer_target(question)
        elif args.type == "title":
            target = aug.extract_title_target(index, corpus, question, k=args.depth)
        else:
            positives = aug.find_positive_passages(index, corpus, question, k=args.depth)
            target = aug.extract_sentence_target(question, positives, corpus)
        if target is None:
            skipped += 1
            continue
        emitted.append(aug.target_to_record(target))
    write_records(args.out, emitted)
    _log(f"wrote {len(emitted)} '{args.type}' targets ({skipped} questions skipped) -> {args.out}")
    return 0


def cmd_augment(args) -> int:
    queries = load_queries(args.questions)
    known = {qid for qid, _ in queries}
    records = aug.read_context_file(args.contexts)
    aug.context_file_type(records, args.contexts)
    by_q: dict[str, list[aug.ContextRecord]] = {}
    for rec in records:
        if rec.question_id not in known:
            raise DataFormatError(f"context for unknown question id '{rec.question_id}'")
        by_q.setdefault(rec.question_id, []).append(rec)
    out = [{"id": qid, "text": aug.augment_query((qid, text), by_q.get(qid, []))}
           for qid, text in queries]
    write_records(args.out, out)
    _log(f"wrote {len(out)} augmented queries -> {args.out}")
    return 0


def cmd_retrieve(args) -> int:
    index = InvertedIndex.load(args.index)
    queries = load_queries(args.queries)
    run = retrieve_run(index, queries, args.k, args.tag, args.jobs)
    lines = write_trec_run(run, args.out)
    _log(f"retrieved for {len(queries)} queries ({lines} lines) -> {args.out}")
    return 0


def cmd_rm3(args) -> int:
    index = InvertedIndex.load(args.index)
    queries = load_queries(args.questions)
    run = RunSet(name="rm3")
    for qid, text in queries:
        weighted = aug.rm3_expand(index, text, args.fb_docs, args.fb_terms, args.alpha)
        ranked = index.search_weighted(weighted, args.k, question_id=qid, tag="rm3")
        run.add(ranked)
    lines = write_trec_run(run, args.out)
    _log(f"rm3-expanded retrieval for {len(queries)} queries ({lines} lines) -> {args.out}")
    return 0


def cmd_fuse(args) -> int:
    runs = [read_trec_run(path) for path in args.runs]
    fused = fusion.fuse_all(runs, args.strategy, args.k, c=args.rrf_c)
    lines = write_trec_run(fused, args.out)
    _log(f"fused {len(runs)} runs with {args.strategy} ({lines} lines) -> {args.out}")
    return 0


def cmd_eval_retrieval(args) -> int:
    ks = _parse_ks(args.ks)
    corpus = load_corpus(args.corpus)
    questions = load_questions(args.questions)
    run = read_trec_run(args.run)
    report = ev.topk_accuracy(run, questions, ks, corpus)
    group_k = max(ks)
    hits = {qid: (1.0 if d is not None and d <= group_k else 0.0)
            for qid, d in report.hit_depth.items()}
    if args.labels:
        labeler = ev.labeler_from_file(ev.load_label_file(args.labels))
    else:
        labeler = None
    groups = ev.grouped_metric(questions, hits, labeler)
    payload = retrieval_report(run, questions, ks, corpus)
    payload["groups"] = {label: {"mean": stat.mean, "count": stat.count, "k": group_k}
                         for label, stat in sorted(groups.items())}
    acc_table = [["k", "accuracy"]] + [[str(k), repr(report.accuracy[k])] for k in ks]
    group_table = [["label", "count", f"accuracy@{group_k}"]] + [
        [label, str(stat.count), repr(stat.mean)] for label, stat in sorted(groups.items())
    ]
    depth_table = [["question", "hit_depth"]] + [
        [qid, "-" if report.hit_depth[qid] is None else str(report.hit_depth[qid])]
        for qid in sorted(report.hit_depth)
    ]
    _emit(payload, [acc_table, group_table, depth_table], args.format, args.out)
    return 0


def _load_predictions(path: str) -> dict[str, str]:
    preds: dict[str, str] = {}
    for lineno, obj in read_records(path):
        qid = str(require_field(obj, "id", path, lineno))
        preds[qid] = str(require_field(obj, "prediction", path, lineno))
    return preds


def cmd_eval_em(args) -> int:
    questions = load_questions(args.questions)
    preds = _load_predictions(args.predictions)
    per_id = {}
    for question in questions:
        if question.id not in preds:
            raise DataFormatError(f"no prediction for question '{question.id}'")
        per_id[question.id] = ev.exact_match(preds[question.id], question.answers)
    n = len(questions)
    em = sum(per_id.values()) / n if n else 0.0
    payload = {"exact_match": em, "count": n,
               "per_id": {qid: per_id[qid] for qid in sorted(per_id)}}
    table = [["id", "exact_match"]] + [[qid, str(int(per_id[qid]))] for qid in sorted(per_id)]
    summary = [["metric", "value"], ["exact_match", repr(em)], ["count", str(n)]]
    _emit(payload, [summary, table], args.format, args.out)
    return 0


def _load_texts(path: str) -> dict[str, str]:
    """Load {id, text} records; context/target files work via field aliases."""
    texts: dict[str, str] = {}
    for lineno, obj in read_records(path):
        tid = obj.get("id", obj.get("question_id"))
        if tid is None:
            raise DataFormatError(f"{path}:{lineno}: missing field 'id'")
        tid = str(tid)
        text = obj.get("text", obj.get("reference"))
        if text is None:
            raise DataFormatError(f"{path}:{lineno}: missing field 'text'")
        if tid in texts:
            raise DataFormatError(f"{path}:{lineno}: duplicate id '{tid}'")
        texts[tid] = str(text)
    return texts


def cmd_eval_rouge(args) -> int:
    candidates = _load_texts(args.candidates)
    if args.references:
        refs = {tid: ev.split_references(text) for tid, text in _load_texts(args.references).items()}
    else:
        # Query-vs-positive-passage overlap mode: references are the texts of
        # answer-bearing passages retrieved for each original question.
        if not (args.index and args.corpus and args.questions):
            raise ConfigError("--references or (--index --corpus --questions) required")
        corpus = load_corpus(args.corpus)
        index = InvertedIndex.load(args.index)
        refs = {}
        for question in load_questions(args.questions):
            positives = aug.find_positive_passages(index, corpus, question, k=args.depth)
            texts = [corpus.get(pid).title + " " + corpus.get(pid).text
                     for pid, _ in positives.entries]
            if texts:
                refs[question.id] = texts
    if args.references:
        missing = sorted(set(candidates) - set(refs))
        if missing:
            raise DataFormatError(f"no reference for id '{missing[0]}'")
        ids = sorted(candidates)
    else:
        # questions with no positive passages are skipped in overlap mode
        ids = sorted(set(candidates) & set(refs))
    per_id = {}
    for tid in ids:
        scores = ev.rouge_f1(candidates[tid], refs[tid])
        per_id[tid] = {"rouge1_f1": scores.rouge1_f1, "rouge2_f1": scores.rouge2_f1,
                       "rougeL_f1": scores.rougeL_f1}
    n = len(per_id)
    means = {metric: (sum(row[metric] for row in per_id.values()) / n if n else 0.0)
             for metric in ("rouge1_f1", "rouge2_f1", "rougeL_f1")}
    payload = {"count": n, **means, "per_id": per_id}
    summary = [["metric", "value"]] + [[m, repr(means[m])] for m in sorted(means)]
    table = [["id", "rouge1_f1", "rouge2_f1", "rougeL_f1"]] + [
        [tid, repr(row["rouge1_f1"]), repr(row["rouge2_f1"]), repr(row["rougeL_f1"])]
        for tid, row in sorted(per_id.items())
    ]
    _emit(payload, [summary, table], args.format, args.out)
    return 0


def cmd_vote(args) -> int:
    outputs = voting.read_reader_outputs(args.reader_output)
    config = voting.VotingConfig(spans_per_passage=args.n,
                                 normalize_surfaces=not args.raw_surfaces)
    records = []
    for output in outputs:
        if args.baseline:
            records.append({"id": output.question_id,
                            "prediction": voting.baseline_select(output),
                            "score": None})
        else:
            ranking = voting.vote(output, config)
            surface, score = ranking[0]
            records.append({"id": output.question_id, "prediction": surface,
                            "score": score})
    write_records(args.out, records)
    mode = "baseline" if args.baseline else f"vote(n={args.n})"
    _log(f"wrote {len(records)} predictions ({mode}) -> {args.out}")
    return 0


def cmd_pipeline(args) -> int:
    overrides = {
        "paths.corpus": args.corpus,
        "paths.questions": args.questions,
        "paths.index_dir": args.index_dir,
        "paths.output_dir": args.output_dir,
        "paths.contexts": args.contexts,
        "paths.extra_runs": args.extra_runs,
        "bm25.k1": args.k1,
        "bm25.b": args.b,
        "retrieval.k": args.retrieval_k,
        "retrieval.jobs": args.jobs,
        "fusion.strategy": args.strategy,
        "fusion.k": args.fusion_k,
        "fusion.rrf_c": args.rrf_c,
        "voting.n": args.vote_n,
        "evaluation.ks": _parse_ks(args.ks) if args.ks else None,
    }
    cfg = validate_config(args.config, overrides)
    for line in cfg.describe():
        _log(line)
    if args.dry_run:
        return 0
    report = run_pipeline(cfg, force=args.force, log=_log)
    for name in sorted(report["runs"]):
        acc = report["runs"][name]["accuracy"]
        cells = "  ".join(f"top-{k}={acc[k]:.4f}" for k in sorted(acc, key=int))
        _log(f"{name}: {cells}")
    _log(f"report -> {os.path.join(cfg.output_dir, 'report.json')}")
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="sparseqa", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build a BM25 index from a passage file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="index directory")
    p.add_argument("--k1", type=float, default=_env("K1", float, 0.9))
    p.add_argument("--b", type=float, default=_env("B", float, 0.4))
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("prep-targets", help="extract generation targets from QA data")
    p.add_argument("--questions", required=True)
    p.add_argument("--type", required=True, choices=list(aug.CONTEXT_TYPES))
    p.add_argument("--out", required=True)
    p.add_argument("--corpus")
    p.add_argument("--index", help="index directory (sentence/title types)")
    p.add_argument("--depth", type=int, default=100,
                   help="positive-passage discovery depth")
    p.set_defaults(func=cmd_prep_targets)

    p = sub.add_parser("augment", help="build augmented queries from context records")
    p.add_argument("--questions", required=True)
    p.add_argument("--contexts", required=True, help="ContextRecord JSONL (one type)")
    p.add_argument("--out", required=True, help="augmented queries JSONL (id, text)")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("retrieve", help="BM25 retrieval for a query file")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True, help="questions or augmented queries JSONL")
    p.add_argument("--out", required=True, help="TREC run file")
    p.add_argument("--k", type=int, default=_env("RETRIEVAL_K", int, 100))
    p.add_argument("--tag", default="bm25")
    p.add_argument("--jobs", type=int, default=_env("JOBS", int, 1))
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("rm3", help="pseudo-relevance-feedback expanded retrieval")
    p.add_argument("--index", required=True)
    p.add_argument("--questions", required=True)
    p.add_argument("--out", required=True, help="TREC run file")
    p.add_argument("--fb-docs", type=int, default=10)
    p.add_argument("--fb-terms", type=int, default=10)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--k", type=int, default=_env("RETRIEVAL_K", int, 100))
    p.set_defaults(func=cmd_rm3)

    p = sub.add_parser("fuse", help="fuse ranked runs")
    p.add_argument("--runs", required=True, nargs="+")
    p.add_argument("--strategy", choices=list(fusion.STRATEGIES),
                   default=_env("STRATEGY", str, "round_robin"))
    p.add_argument("--k", type=int, default=_env("FUSION_K", int, 100))
    p.add_argument("--rrf-c", type=float, default=_env("RRF_C", float, 60.0))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval-retrieval", help="top-k retrieval accuracy report")
    p.add_argument("--run", required=True)
    p.add_argument("--questions", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--ks", default=_env("KS", str, "1,5,20,100"))
    p.add_argument("--labels", help="external JSONL {id, label} breakdown")
    p.add_argument("--format", choices=["json", "tsv"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval_retrieval)

    p = sub.add_parser("eval-em", help="exact-match accuracy of predictions")
    p.add_argument("--predictions", required=True, help="JSONL {id, prediction}")
    p.add_argument("--questions", required=True)
    p.add_argument("--format", choices=["json", "tsv"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval_em)

    p = sub.add_parser("eval-rouge", help="ROUGE-1/2/L F1 of candidates vs references")
    p.add_argument("--candidates", required=True, help="JSONL {id, text}")
    p.add_argument("--references",
                   help="JSONL {id, text}; [SEP]-joined references are split, max-over-refs")
    p.add_argument("--index", help="overlap mode: score candidates vs positive passages")
    p.add_argument("--corpus")
    p.add_argument("--questions")
    p.add_argument("--depth", type=int, default=100)
    p.add_argument("--format", choices=["json", "tsv"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval_rouge)

    p = sub.add_parser("vote", help="passage-level span voting over reader outputs")
    p.add_argument("--reader-output", required=True)
    p.add_argument("--out", required=True, help="predictions JSONL")
    p.add_argument("--n", type=int, default=_env("VOTE_N", int, 5),
                   help="spans retained per passage")
    p.add_argument("--baseline", action="store_true",
                   help="top span of top passage, no voting")
    p.add_argument("--raw-surfaces", action="store_true",
                   help="aggregate raw strings instead of normalized")
    p.set_defaults(func=cmd_vote)

    p = sub.add_parser("pipeline", help="index -> retrieve -> fuse -> evaluate")
    p.add_argument("--config", help="TOML config (sections per stage)")
    p.add_argument("--force", action="store_true", help="re-run completed stages")
    p.add_argument("--dry-run", action="store_true",
                   help="validate config, print provenance, exit")
    p.add_argument("--corpus")
    p.add_argument("--questions")
    p.add_argument("--index-dir")
    p.add_argument("--output-dir")
    p.add_argument("--contexts", nargs="*")
    p.add_argument("--extra-runs", nargs="*")
    p.add_argument("--k1", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--retrieval-k", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--strategy", choices=list(fusion.STRATEGIES))
    p.add_argument("--fusion-k", type=int)
    p.add_argument("--rrf-c", type=float)
    p.add_argument("--vote-n", type=int)
    p.add_argument("--ks")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 if isinstance(exc.cause, ConfigError) else 2
    except (DataFormatError, SparseQAError, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
