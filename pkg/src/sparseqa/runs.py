"""Ranked lists and run files.

A run is a per-question ranked list of (passage id, score) pairs; run files
use the TREC format `qid Q0 docid rank score tag` and are the interchange
unit between retrieval, fusion, and evaluation (external dense runs enter
through the same format).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from sparseqa.errors import DataFormatError


@dataclass
class RankedList:
    """Entries sorted by score descending, ties by passage id ascending."""

    question_id: str
    entries: list[tuple[str, float]]
    tag: str = ""

    def passage_ids(self) -> list[str]:
        return [pid for pid, _ in self.entries]

    @classmethod
    def from_scored(cls, question_id: str, scored: list[tuple[str, float]], tag: str = "") -> "RankedList":
        """Build a RankedList from unordered (id, score) pairs, enforcing invariants."""
        ids = [pid for pid, _ in scored]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate passage ids in ranked list for '{question_id}'")
        ordered = sorted(scored, key=lambda e: (-e[1], e[0]))
        return cls(question_id=question_id, entries=ordered, tag=tag)


@dataclass
class RunSet:
    """One ranked list per question id."""

    name: str
    lists: dict[str, RankedList] = field(default_factory=dict)

    def add(self, ranked: RankedList) -> None:
        if ranked.question_id in self.lists:
            raise ValueError(f"run '{self.name}' already has question '{ranked.question_id}'")
        self.lists[ranked.question_id] = ranked

    def get(self, question_id: str) -> RankedList | None:
        return self.lists.get(question_id)

    def question_ids(self) -> list[str]:
        return list(self.lists.keys())


def read_trec_run(path: str, name: str | None = None) -> RunSet:
    """Read a TREC run file; rank column order governs, scores kept as read."""
    per_q: dict[str, list[tuple[int, str, float]]] = {}
    tag_seen = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise DataFormatError(f"{path}:{lineno}: expected 6 whitespace-separated fields")
            qid, _, docid, rank_s, score_s, tag = parts
            try:
                rank = int(rank_s)
                score = float(score_s)
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: bad rank or score") from None
            if tag_seen is None:
                tag_seen = tag
            per_q.setdefault(qid, []).append((rank, docid, score))
    run = RunSet(name=name or tag_seen or path)
    for qid, rows in per_q.items():
        rows.sort(key=lambda r: r[0])
        ids = [docid for _, docid, _ in rows]
        if len(set(ids)) != len(ids):
            dup = next(d for i, d in enumerate(ids) if d in ids[:i])
            raise DataFormatError(f"{path}: duplicate passage '{dup}' for question '{qid}'")
        run.add(RankedList(question_id=qid, entries=[(d, s) for _, d, s in rows], tag=run.name))
    return run


def write_trec_run(run: RunSet, path: str) -> int:
    """Write a run file; scores use repr for lossless round trips. Returns line count."""
    tag = run.name.replace(" ", "_") or "run"
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for qid in run.question_ids():
            for rank, (docid, score) in enumerate(run.lists[qid].entries, start=1):
                fh.write(f"{qid} Q0 {docid} {rank} {score!r} {tag}\n")
                n += 1
    return n
