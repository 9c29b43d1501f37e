"""Passage-level span voting over reader outputs.

A reader emits, per question, passage relevance scores and per-passage
candidate spans with scores (raw logits). Voting converts both to
probabilities — p(span j of passage i) = softmax(passage scores)[i] *
softmax(retained span scores of passage i)[j] — and sums the probability
mass of spans sharing a surface string across passages. The rank-1 surface
is the predicted answer. Retained spans per passage are the top N by span
score, truncated before softmax normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from sparseqa.errors import DataFormatError
from sparseqa.evaluation import normalize_answer
from sparseqa.jsonl import read_records, require_field


@dataclass(frozen=True)
class Span:
    text: str
    score: float


@dataclass(frozen=True)
class PassageScores:
    passage_id: str
    score: float
    spans: tuple[Span, ...]


@dataclass(frozen=True)
class ReaderOutput:
    question_id: str
    passages: tuple[PassageScores, ...]


@dataclass(frozen=True)
class VotingConfig:
    spans_per_passage: int = 5
    normalize_surfaces: bool = True

    def __post_init__(self):
        if self.spans_per_passage < 1:
            raise ValueError("spans_per_passage must be >= 1")


def _softmax(xs: list[float]) -> list[float]:
    m = max(xs)
    exps = [math.exp(x - m) for x in xs]
    total = sum(exps)
    return [e / total for e in exps]


def vote(output: ReaderOutput, config: VotingConfig = VotingConfig()) -> list[tuple[str, float]]:
    """Aggregate span probabilities by surface string; sorted by score desc, surface asc."""
    passage_probs = _softmax([p.score for p in output.passages])
    totals: dict[str, float] = {}
    for passage, p_passage in zip(output.passages, passage_probs):
        retained = sorted(passage.spans, key=lambda s: s.score, reverse=True)
        retained = retained[:config.spans_per_passage]
        span_probs = _softmax([s.score for s in retained])
        for span, p_span in zip(retained, span_probs):
            surface = normalize_answer(span.text) if config.normalize_surfaces else span.text
            totals[surface] = totals.get(surface, 0.0) + p_passage * p_span
    return sorted(totals.items(), key=lambda e: (-e[1], e[0]))


def baseline_select(output: ReaderOutput) -> str:
    """Top span of the top passage, without voting (ties: input order)."""
    best_passage = max(output.passages, key=lambda p: p.score)
    best_span = max(best_passage.spans, key=lambda s: s.score)
    return best_span.text


def read_reader_outputs(path: str) -> list[ReaderOutput]:
    """Load reader outputs, enforcing >= 1 passage, >= 1 span, finite scores."""
    outputs: list[ReaderOutput] = []
    for lineno, obj in read_records(path):
        qid = str(require_field(obj, "question_id", path, lineno))
        raw_passages = require_field(obj, "passages", path, lineno)
        if not isinstance(raw_passages, list) or not raw_passages:
            raise DataFormatError(f"{path}:{lineno}: 'passages' must be a non-empty list")
        passages = []
        for rp in raw_passages:
            spans = rp.get("spans")
            if not isinstance(spans, list) or not spans:
                raise DataFormatError(f"{path}:{lineno}: every passage needs >= 1 span")
            score = rp.get("score")
            if not isinstance(score, (int, float)) or not math.isfinite(score):
                raise DataFormatError(f"{path}:{lineno}: passage score must be finite")
            parsed_spans = []
            for sp in spans:
                s = sp.get("score")
                if not isinstance(s, (int, float)) or not math.isfinite(s):
                    raise DataFormatError(f"{path}:{lineno}: span score must be finite")
                parsed_spans.append(Span(text=str(sp.get("text", "")), score=float(s)))
            passages.append(PassageScores(
                passage_id=str(rp.get("passage_id", "")),
                score=float(score),
                spans=tuple(parsed_spans),
            ))
        outputs.append(ReaderOutput(question_id=qid, passages=tuple(passages)))
    return outputs
