"""End-to-end orchestration: index -> retrieve -> fuse -> evaluate.

Each stage writes a content-addressed manifest (sha256 of inputs + params);
re-running on unchanged inputs skips completed stages. All stage artifacts
are plain files in the documented formats, so external runs can be injected
anywhere and every stage is independently testable.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from sparseqa import augment as aug
from sparseqa import evaluation as ev
from sparseqa import fusion
from sparseqa.config import PipelineConfig
from sparseqa.corpus import Corpus, Question, load_corpus, load_questions
from sparseqa.errors import StageError
from sparseqa.index import InvertedIndex
from sparseqa.runs import RankedList, RunSet, read_trec_run, write_trec_run


def _sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class _Stage:
    """Skip-or-run bookkeeping for one pipeline stage."""

    def __init__(self, name: str, out_dir: str, inputs: list[str], params: dict,
                 outputs: list[str], force: bool, log):
        self.name = name
        self.manifest_path = os.path.join(out_dir, "manifests", f"{name}.json")
        self.manifest = {
            "inputs": {p: _sha256_file(p) for p in sorted(inputs)},
            "params": params,
            "outputs": sorted(outputs),
        }
        self.force = force
        self.log = log

    def up_to_date(self) -> bool:
        if self.force or not os.path.exists(self.manifest_path):
            return False
        with open(self.manifest_path, encoding="utf-8") as fh:
            previous = json.load(fh)
        if previous != self.manifest:
            return False
        if not all(os.path.exists(p) for p in self.manifest["outputs"]):
            return False
        self.log(f"[{self.name}] up to date, skipping")
        return True

    def done(self) -> None:
        os.makedirs(os.path.dirname(self.manifest_path), exist_ok=True)
        with open(self.manifest_path, "w", encoding="utf-8") as fh:
            json.dump(self.manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")
        self.log(f"[{self.name}] done")


def retrieve_run(index: InvertedIndex, queries: list[tuple[str, str]], k: int,
                  tag: str, jobs: int) -> RunSet:
    """Batch retrieval; output order matches input order for any job count."""
    run = RunSet(name=tag)

    def one(pair: tuple[str, str]) -> RankedList:
        qid, text = pair
        ranked = index.search(text, k, question_id=qid, tag=tag)
        return ranked

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, queries))
    else:
        results = [one(q) for q in queries]
    for ranked in results:
        run.add(ranked)
    return run


def retrieval_report(run: RunSet, questions: list[Question], ks: list[int],
                     corpus: Corpus) -> dict:
    """JSON-ready per-run report: per-k table, question-type table, per-question depth."""
    report = ev.topk_accuracy(run, questions, ks, corpus)
    group_k = max(ks)
    hits = {qid: (1.0 if d is not None and d <= group_k else 0.0)
            for qid, d in report.hit_depth.items()}
    groups = ev.grouped_metric(questions, hits)
    return {
        "run": run.name,
        "questions": len(questions),
        "accuracy": {str(k): report.accuracy[k] for k in ks},
        "groups": {label: {"mean": stat.mean, "count": stat.count, "k": group_k}
                   for label, stat in sorted(groups.items())},
        "hit_depth": {qid: report.hit_depth[qid] for qid in sorted(report.hit_depth)},
    }


def run_pipeline(cfg: PipelineConfig, force: bool = False, log=None) -> dict:
    """Execute all stages; returns the final report dict (also written to disk)."""
    if log is None:
        log = lambda msg: print(msg, file=sys.stderr)  # noqa: E731
    os.makedirs(cfg.output_dir, exist_ok=True)
    runs_dir = os.path.join(cfg.output_dir, "runs")
    os.makedirs(runs_dir, exist_ok=True)

    # stage: index
    stage = _Stage("index", cfg.output_dir, [cfg.corpus],
                   {"k1": cfg.k1, "b": cfg.b, "format": 1},
                   [os.path.join(cfg.index_dir, "manifest.json")], force, log)
    try:
        if not stage.up_to_date():
            corpus = load_corpus(cfg.corpus)
            log(f"[index] {len(corpus)} passages from {cfg.corpus}")
            InvertedIndex.build(corpus, k1=cfg.k1, b=cfg.b).save(cfg.index_dir)
            stage.done()
    except StageError:
        raise
    except Exception as exc:
        raise StageError("index", exc) from exc

    # stage: retrieve (plain run + one run per context type)
    run_paths: dict[str, str] = {"bm25": os.path.join(runs_dir, "bm25.trec")}
    context_records = {}
    try:
        questions = load_questions(cfg.questions)
        for path in cfg.contexts:
            records = aug.read_context_file(path)
            ctype = aug.context_file_type(records, path)
            if ctype in context_records:
                raise ValueError(f"two context files share type '{ctype}'")
            context_records[ctype] = records
            run_paths[f"aug_{ctype}"] = os.path.join(runs_dir, f"aug_{ctype}.trec")
        stage = _Stage("retrieve", cfg.output_dir,
                       [cfg.corpus, cfg.questions, *cfg.contexts],
                       {"k": cfg.retrieval_k, "k1": cfg.k1, "b": cfg.b},
                       list(run_paths.values()), force, log)
        if not stage.up_to_date():
            index = InvertedIndex.load(cfg.index_dir)
            plain = retrieve_run(index, [(q.id, q.text) for q in questions],
                                  cfg.retrieval_k, "bm25", cfg.jobs)
            write_trec_run(plain, run_paths["bm25"])
            known = {q.id for q in questions}
            for ctype, records in context_records.items():
                by_q: dict[str, list[aug.ContextRecord]] = {}
                for rec in records:
                    if rec.question_id not in known:
                        raise ValueError(
                            f"context for unknown question id '{rec.question_id}'"
                        )
                    by_q.setdefault(rec.question_id, []).append(rec)
                queries = [(q.id, aug.augment_query(q, by_q.get(q.id, [])))
                           for q in questions]
                run = retrieve_run(index, queries, cfg.retrieval_k,
                                    f"aug_{ctype}", cfg.jobs)
                write_trec_run(run, run_paths[f"aug_{ctype}"])
            stage.done()
    except StageError:
        raise
    except Exception as exc:
        raise StageError("retrieve", exc) from exc

    # stage: fuse (context runs + external runs; skipped for the plain baseline)
    fused_path = None
    fuse_sources = [p for name, p in run_paths.items() if name != "bm25"]
    fuse_sources += list(cfg.extra_runs)
    try:
        if fuse_sources:
            fused_path = os.path.join(runs_dir, "fused.trec")
            stage = _Stage("fuse", cfg.output_dir, fuse_sources,
                           {"strategy": cfg.fusion_strategy, "k": cfg.fusion_k,
                            "rrf_c": cfg.rrf_c},
                           [fused_path], force, log)
            if not stage.up_to_date():
                sources = [read_trec_run(p) for p in fuse_sources]
                fused = fusion.fuse_all(sources, cfg.fusion_strategy, cfg.fusion_k,
                                        c=cfg.rrf_c)
                write_trec_run(fused, fused_path)
                stage.done()
        else:
            log("[fuse] no context files or external runs, skipping")
    except StageError:
        raise
    except Exception as exc:
        raise StageError("fuse", exc) from exc

    # stage: evaluate every run
    report_path = os.path.join(cfg.output_dir, "report.json")
    eval_inputs = [cfg.corpus, cfg.questions, *run_paths.values()]
    if fused_path:
        eval_inputs.append(fused_path)
    try:
        stage = _Stage("eval", cfg.output_dir, eval_inputs,
                       {"ks": cfg.eval_ks}, [report_path], force, log)
        if not stage.up_to_date():
            corpus = load_corpus(cfg.corpus)
            reports = {}
            for name, path in run_paths.items():
                reports[name] = retrieval_report(read_trec_run(path, name=name),
                                                 questions, cfg.eval_ks, corpus)
            if fused_path:
                fused_run = read_trec_run(fused_path)
                reports["fused"] = retrieval_report(fused_run, questions,
                                                    cfg.eval_ks, corpus)
            final = {"config": {"k1": cfg.k1, "b": cfg.b, "retrieval_k": cfg.retrieval_k,
                                "fusion_strategy": cfg.fusion_strategy,
                                "fusion_k": cfg.fusion_k, "ks": cfg.eval_ks},
                     "runs": reports}
            with open(report_path, "w", encoding="utf-8") as fh:
                json.dump(final, fh, sort_keys=True, indent=2, ensure_ascii=False)
                fh.write("\n")
            stage.done()
    except StageError:
        raise
    except Exception as exc:
        raise StageError("eval", exc) from exc

    with open(report_path, encoding="utf-8") as fh:
        return json.load(fh)
