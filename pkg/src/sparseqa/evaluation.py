"""Answer normalization and all retrieval/reader metrics.

Answer containment is a token-contiguous-subsequence check after
normalization (lowercase, punctuation stripped, articles dropped), never a
raw substring test, so "cat" does not match "concatenate".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from sparseqa.corpus import Corpus, Passage, Question
from sparseqa.errors import DataFormatError
from sparseqa.index import tokenize
from sparseqa.jsonl import read_records, require_field
from sparseqa.runs import RunSet

_ARTICLES = frozenset({"a", "an", "the"})

_WH_LABELS = {
    "who": "Who", "when": "When", "what": "What", "where": "Where",
    "how": "How", "which": "Which", "why": "Why",
}


def normalize_answer(s: str) -> str:
    """Lowercase, drop punctuation, drop standalone articles, collapse whitespace."""
    lowered = s.lower()
    stripped = "".join(ch for ch in lowered if ch.isalnum() or ch.isspace())
    return " ".join(tok for tok in stripped.split() if tok not in _ARTICLES)


def _contains_contiguous(haystack: Sequence[str], needle: Sequence[str]) -> bool:
    n = len(needle)
    if n == 0 or n > len(haystack):
        return False
    first = needle[0]
    needle = list(needle)
    for i in range(len(haystack) - n + 1):
        if haystack[i] == first and list(haystack[i:i + n]) == needle:
            return True
    return False


def passage_contains_answer(passage: Passage, answers: Iterable[str]) -> bool:
    """True iff some normalized answer occurs contiguously in title + text tokens."""
    hay = normalize_answer(passage.title + " " + passage.text).split()
    for answer in answers:
        needle = normalize_answer(answer).split()
        if needle and _contains_contiguous(hay, needle):
            return True
    return False


def exact_match(prediction: str, answers: Iterable[str]) -> bool:
    norm = normalize_answer(prediction)
    return any(norm == normalize_answer(a) for a in answers)


@dataclass
class RetrievalReport:
    accuracy: dict[int, float]
    hit_depth: dict[str, int | None]  # 1-based rank of first answer-bearing passage

    def n_questions(self) -> int:
        return len(self.hit_depth)


def topk_accuracy(run: RunSet, questions: list[Question], ks: list[int],
                  corpus: Corpus) -> RetrievalReport:
    """Fraction of questions whose top-k passages contain an answer, per cutoff k.

    Questions missing from the run count as misses; a run referencing a
    passage id absent from the corpus is a hard error.
    """
    if not ks or any(k < 1 for k in ks):
        raise ValueError("ks must be non-empty with every cutoff >= 1")
    hit_depth: dict[str, int | None] = {}
    for question in questions:
        ranked = run.get(question.id)
        depth = None
        if ranked is not None:
            for pid, _ in ranked.entries:
                if pid not in corpus:
                    raise DataFormatError(
                        f"run '{run.name}' references unknown passage id '{pid}'"
                    )
            for rank, (pid, _) in enumerate(ranked.entries, start=1):
                if passage_contains_answer(corpus.get(pid), question.answers):
                    depth = rank
                    break
        hit_depth[question.id] = depth
    n = len(questions)
    accuracy = {}
    for k in ks:
        hits = sum(1 for d in hit_depth.values() if d is not None and d <= k)
        accuracy[k] = hits / n if n else 0.0
    return RetrievalReport(accuracy=accuracy, hit_depth=hit_depth)


# -- ROUGE -------------------------------------------------------------------


@dataclass
class RougeScores:
    rouge1_f1: float
    rouge2_f1: float
    rougeL_f1: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.rouge1_f1, self.rouge2_f1, self.rougeL_f1)


def _f1(overlap: float, n_cand: int, n_ref: int) -> float:
    if n_cand == 0 or n_ref == 0 or overlap == 0:
        return 0.0
    p = overlap / n_cand
    r = overlap / n_ref
    return 2 * p * r / (p + r)


def _ngram_counts(tokens: list[str], n: int) -> dict[tuple[str, ...], int]:
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - n + 1):
        g = tuple(tokens[i:i + n])
        counts[g] = counts.get(g, 0) + 1
    return counts


def _rouge_n_f1(cand: list[str], ref: list[str], n: int) -> float:
    cc = _ngram_counts(cand, n)
    rc = _ngram_counts(ref, n)
    overlap = sum(min(c, rc.get(g, 0)) for g, c in cc.items())
    return _f1(overlap, sum(cc.values()), sum(rc.values()))


def _lcs_len(xs: list[str], ys: list[str]) -> int:
    if not xs or not ys:
        return 0
    prev = [0] * (len(ys) + 1)
    for x in xs:
        cur = [0] * (len(ys) + 1)
        for j, y in enumerate(ys, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_f1(candidate: str, reference: str | Sequence[str]) -> RougeScores:
    """ROUGE-1/2/L F1; multiple references aggregate by max per metric."""
    references = [reference] if isinstance(reference, str) else list(reference)
    cand = tokenize(candidate)
    best = RougeScores(0.0, 0.0, 0.0)
    for ref_text in references:
        ref = tokenize(ref_text)
        if not cand or not ref:
            continue
        lcs = _lcs_len(cand, ref)
        best = RougeScores(
            max(best.rouge1_f1, _rouge_n_f1(cand, ref, 1)),
            max(best.rouge2_f1, _rouge_n_f1(cand, ref, 2)),
            max(best.rougeL_f1, _f1(lcs, len(cand), len(ref))),
        )
    return best


def split_references(reference: str, separator: str = "[SEP]") -> list[str]:
    """Split a joined multi-reference string; blank segments dropped."""
    parts = [p.strip() for p in reference.split(separator)]
    return [p for p in parts if p] or [reference]


# -- grouped breakdowns -------------------------------------------------------


def question_type(text: str) -> str:
    """Wh-label from the case-insensitive first token, else "Other"."""
    tokens = tokenize(text)
    return _WH_LABELS.get(tokens[0], "Other") if tokens else "Other"


@dataclass
class GroupStat:
    mean: float
    count: int


def grouped_metric(questions: list[Question], values: Mapping[str, float],
                   labeler: Callable[[Question], str] | None = None) -> dict[str, GroupStat]:
    """Per-label mean and count of a per-question metric."""
    if labeler is None:
        labeler = lambda q: question_type(q.text)  # noqa: E731
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for question in questions:
        if question.id not in values:
            raise ValueError(f"no metric value for question '{question.id}'")
        label = labeler(question)
        sums[label] = sums.get(label, 0.0) + values[question.id]
        counts[label] = counts.get(label, 0) + 1
    return {label: GroupStat(mean=sums[label] / counts[label], count=counts[label])
            for label in sums}


def load_label_file(path: str) -> dict[str, str]:
    """JSONL {id, label} -> mapping, for external breakdown labels."""
    labels: dict[str, str] = {}
    for lineno, obj in read_records(path):
        qid = require_field(obj, "id", path, lineno)
        labels[str(qid)] = str(require_field(obj, "label", path, lineno))
    return labels


def labeler_from_file(labels: dict[str, str]) -> Callable[[Question], str]:
    def labeler(question: Question) -> str:
        if question.id not in labels:
            raise DataFormatError(f"label file missing question id '{question.id}'")
        return labels[question.id]

    return labeler
