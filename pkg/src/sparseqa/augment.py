"""Query-context targets, augmented queries, and RM3 expansion.

Three context types back the augmented queries: the answer itself, the
answer-bearing sentence from a retriever-positive passage, and the titles of
positive passages. Extracted targets double as seq2seq references; multiple
references join with the literal separator "[SEP]".
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from sparseqa.corpus import Corpus, Question
from sparseqa.errors import DataFormatError
from sparseqa.evaluation import normalize_answer, passage_contains_answer
from sparseqa.index import InvertedIndex, tokenize
from sparseqa.jsonl import read_records, require_field
from sparseqa.runs import RankedList

SEPARATOR = "[SEP]"

CONTEXT_TYPES = ("answer", "sentence", "title")

_SENTENCE_END = re.compile(r"(?<=[.!?])(?:\s+|$)")


@dataclass(frozen=True)
class ContextRecord:
    question_id: str
    context_type: str
    text: str


@dataclass(frozen=True)
class TargetRecord:
    question_id: str
    context_type: str
    source: str
    reference: str


def split_sentences(text: str) -> list[str]:
    """Split on '.', '!' or '?' followed by whitespace or end of text."""
    return [s.strip() for s in _SENTENCE_END.split(text) if s.strip()]


def extract_answer_target(question: Question) -> TargetRecord:
    """Reference = the answers joined with [SEP], in dataset order."""
    return TargetRecord(
        question_id=question.id,
        context_type="answer",
        source=question.text,
        reference=SEPARATOR.join(question.answers),
    )


def find_positive_passages(index: InvertedIndex, corpus: Corpus, question: Question,
                           k: int = 100) -> RankedList:
    """Top-k retrieval for the question, filtered to answer-bearing passages.

    Rank order of the underlying search is preserved.
    """
    ranked = index.search(question.text, k, question_id=question.id, tag="positives")
    entries = [(pid, score) for pid, score in ranked.entries
               if passage_contains_answer(corpus.get(pid), question.answers)]
    return RankedList(question_id=question.id, entries=entries, tag="positives")


def extract_title_target(index: InvertedIndex, corpus: Corpus, question: Question,
                         k: int = 100) -> TargetRecord | None:
    """Distinct titles of positive passages in rank order, or None if there are none."""
    positives = find_positive_passages(index, corpus, question, k)
    titles: list[str] = []
    for pid, _ in positives.entries:
        title = corpus.get(pid).title
        if title.strip() and title not in titles:
            titles.append(title)
    if not titles:
        return None
    return TargetRecord(
        question_id=question.id,
        context_type="title",
        source=question.text,
        reference=SEPARATOR.join(titles),
    )


def extract_sentence_target(question: Question, positives: RankedList,
                            corpus: Corpus) -> TargetRecord | None:
    """First sentence containing each distinct answer, scanning positives in rank order.

    The match is on normalized tokens (contiguous), so an answer crossing a
    sentence split never matches. Returns None when no sentence matches.
    """
    needles: list[list[str]] = []
    seen_norm: set[str] = set()
    for answer in question.answers:
        norm = normalize_answer(answer)
        if norm and norm not in seen_norm:
            seen_norm.add(norm)
            needles.append(norm.split())
    sentences: list[str] = []
    for needle in needles:
        for pid, _ in positives.entries:
            found = None
            for sentence in split_sentences(corpus.get(pid).text):
                hay = normalize_answer(sentence).split()
                if _contains(hay, needle):
                    found = sentence
                    break
            if found is not None:
                if found not in sentences:
                    sentences.append(found)
                break
    if not sentences:
        return None
    return TargetRecord(
        question_id=question.id,
        context_type="sentence",
        source=question.text,
        reference=SEPARATOR.join(sentences),
    )


def _contains(haystack: list[str], needle: list[str]) -> bool:
    n = len(needle)
    if n == 0 or n > len(haystack):
        return False
    return any(haystack[i:i + n] == needle for i in range(len(haystack) - n + 1))


def augment_query(question: Question | tuple[str, str],
                  contexts: list[ContextRecord]) -> str:
    """Question text + generated context texts, with [SEP] flattened to spaces.

    All contexts must carry the question's id and a single context type; the
    original question text is always the prefix of the result.
    """
    qid, qtext = (question.id, question.text) if isinstance(question, Question) else question
    if not contexts:
        return qtext
    types = {c.context_type for c in contexts}
    for ctx in contexts:
        if ctx.question_id != qid:
            raise DataFormatError(
                f"context for question '{ctx.question_id}' used with question '{qid}'"
            )
    if len(types) != 1:
        raise DataFormatError(f"contexts for '{qid}' mix types {sorted(types)}")
    suffix = " ".join(c.text for c in contexts).replace(SEPARATOR, " ")
    suffix = " ".join(suffix.split())
    return qtext + " " + suffix if suffix else qtext


def read_context_file(path: str) -> list[ContextRecord]:
    records: list[ContextRecord] = []
    for lineno, obj in read_records(path):
        ctype = require_field(obj, "context_type", path, lineno)
        text = require_field(obj, "text", path, lineno)
        if ctype not in CONTEXT_TYPES:
            raise DataFormatError(f"{path}:{lineno}: unknown context_type '{ctype}'")
        if not isinstance(text, str) or not text.strip():
            raise DataFormatError(f"{path}:{lineno}: context text is empty")
        records.append(ContextRecord(
            question_id=str(require_field(obj, "question_id", path, lineno)),
            context_type=ctype,
            text=text,
        ))
    return records


def context_file_type(records: list[ContextRecord], path: str) -> str:
    types = {r.context_type for r in records}
    if len(types) != 1:
        raise DataFormatError(f"{path}: expected a single context_type, found {sorted(types)}")
    return next(iter(types))


def target_to_record(target: TargetRecord) -> dict:
    return {
        "question_id": target.question_id,
        "context_type": target.context_type,
        "source": target.source,
        "reference": target.reference,
    }


# -- RM3 pseudo-relevance feedback --------------------------------------------


def _softmax(xs: list[float]) -> list[float]:
    m = max(xs)
    exps = [math.exp(x - m) for x in xs]
    total = sum(exps)
    return [e / total for e in exps]


def rm3_expand(index: InvertedIndex, query: str, fb_docs: int, fb_terms: int,
               alpha: float) -> list[tuple[str, float]]:
    """Weighted query from pseudo-relevance feedback.

    Feedback model: term weight ~ sum over the top-fb_docs passages of
    (tf/|d|) * softmax(BM25 score); the fb_terms best feedback terms are
    renormalized to sum 1 and mixed as alpha*original + (1-alpha)*feedback.
    Original-query weights are uniform per token occurrence (weight 1 each,
    so a repeated term carries its count); with alpha=1 the weighted query
    therefore scores every passage identically to the plain query.
    """
    if fb_docs < 1 or fb_terms < 1:
        raise ValueError("fb_docs and fb_terms must be >= 1")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    tokens = tokenize(query)
    original: dict[str, float] = {}
    for tok in tokens:
        original[tok] = original.get(tok, 0.0) + 1.0

    def as_list(weights: dict[str, float]) -> list[tuple[str, float]]:
        return sorted(weights.items(), key=lambda e: (-e[1], e[0]))

    ranked = index.search(query, fb_docs) if tokens else None
    if ranked is None or not ranked.entries:
        return as_list(original)

    probs = _softmax([score for _, score in ranked.entries])
    feedback: dict[str, float] = {}
    for (pid, _), p in zip(ranked.entries, probs):
        dl = float(index.doc_length(pid))
        if dl == 0.0:
            continue
        for term, tf in index.doc_term_freqs(pid).items():
            feedback[term] = feedback.get(term, 0.0) + (tf / dl) * p
    kept = sorted(feedback.items(), key=lambda e: (-e[1], e[0]))[:fb_terms]
    mass = sum(w for _, w in kept)
    feedback = {t: w / mass for t, w in kept} if mass > 0 else {}

    combined: dict[str, float] = {}
    for term, w in original.items():
        combined[term] = combined.get(term, 0.0) + alpha * w
    for term, w in feedback.items():
        combined[term] = combined.get(term, 0.0) + (1.0 - alpha) * w
    combined = {t: w for t, w in combined.items() if w != 0.0}
    return as_list(combined)
