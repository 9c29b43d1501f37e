"""Passage and question stores.

Passages and questions arrive as line-delimited JSON; the corpus handle is
immutable after load and safe to share across worker threads.
"""

from __future__ import annotations

from dataclasses import dataclass

from sparseqa.errors import DataFormatError
from sparseqa.jsonl import read_records, require_field, write_records


@dataclass(frozen=True)
class Passage:
    id: str
    title: str
    text: str


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    answers: tuple[str, ...]


class Corpus:
    """Ordered passage collection with total id lookup."""

    def __init__(self, passages: list[Passage]):
        self.passages = passages
        self._by_id = {p.id: p for p in passages}

    def __len__(self) -> int:
        return len(self.passages)

    def __iter__(self):
        return iter(self.passages)

    def __contains__(self, passage_id: str) -> bool:
        return passage_id in self._by_id

    def get(self, passage_id: str) -> Passage:
        try:
            return self._by_id[passage_id]
        except KeyError:
            raise KeyError(f"unknown passage id '{passage_id}'") from None

    def save(self, path: str) -> int:
        return write_records(
            path, ({"id": p.id, "title": p.title, "text": p.text} for p in self.passages)
        )


def _as_str(value, field: str, path: str, lineno: int) -> str:
    if not isinstance(value, str):
        raise DataFormatError(f"{path}:{lineno}: field '{field}' must be a string")
    return value


def load_corpus(path: str) -> Corpus:
    """Load a passage file. Duplicate ids and malformed records are hard errors."""
    passages: list[Passage] = []
    seen: set[str] = set()
    for lineno, obj in read_records(path):
        pid = _as_str(require_field(obj, "id", path, lineno), "id", path, lineno)
        title = _as_str(require_field(obj, "title", path, lineno), "title", path, lineno)
        text = _as_str(require_field(obj, "text", path, lineno), "text", path, lineno)
        if pid in seen:
            raise DataFormatError(f"{path}:{lineno}: duplicate passage id '{pid}'")
        if not text.strip():
            raise DataFormatError(f"{path}:{lineno}: passage text is empty")
        seen.add(pid)
        passages.append(Passage(id=pid, title=title, text=text))
    return Corpus(passages)


def load_questions(path: str) -> list[Question]:
    """Load questions in file order; every question needs >= 1 non-empty answer."""
    questions: list[Question] = []
    for lineno, obj in read_records(path):
        qid = _as_str(require_field(obj, "id", path, lineno), "id", path, lineno)
        text = _as_str(require_field(obj, "text", path, lineno), "text", path, lineno)
        answers = require_field(obj, "answers", path, lineno)
        if not isinstance(answers, list) or not answers:
            raise DataFormatError(f"{path}:{lineno}: 'answers' must be a non-empty list")
        for a in answers:
            if not isinstance(a, str) or not a.strip():
                raise DataFormatError(f"{path}:{lineno}: answers must be non-empty strings")
        questions.append(Question(id=qid, text=text, answers=tuple(answers)))
    return questions


def load_queries(path: str) -> list[tuple[str, str]]:
    """Load (id, text) query pairs; 'answers' is optional and ignored."""
    queries: list[tuple[str, str]] = []
    for lineno, obj in read_records(path):
        qid = _as_str(require_field(obj, "id", path, lineno), "id", path, lineno)
        text = _as_str(require_field(obj, "text", path, lineno), "text", path, lineno)
        queries.append((qid, text))
    return queries
