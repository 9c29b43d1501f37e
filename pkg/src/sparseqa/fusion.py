"""Rank fusion across runs: round-robin interleaving and reciprocal rank fusion.

Round robin takes an equal number of passages from the top of each source
(first occurrence wins on duplicates); RRF rescoring sums 1/(c + rank) over
the sources, reading only ranks, never raw scores.
"""

from __future__ import annotations

from sparseqa.runs import RankedList, RunSet

RRF_C = 60.0

STRATEGIES = ("round_robin", "rrf")


def round_robin_fuse(runs: list[RunSet], question_id: str, k: int) -> RankedList:
    """Interleave the sources round by round until k entries or exhaustion.

    Round r takes each source's rank-r passage in run order, skipping
    passages already taken. Output scores are synthetic (k - position):
    source scores are not comparable, so rank is the only signal kept.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    lists = [run.get(question_id) for run in runs]
    lists = [rl.entries for rl in lists if rl is not None]
    taken: list[str] = []
    seen: set[str] = set()
    depth = max((len(entries) for entries in lists), default=0)
    for r in range(depth):
        for entries in lists:
            if r < len(entries):
                pid = entries[r][0]
                if pid not in seen:
                    seen.add(pid)
                    taken.append(pid)
                    if len(taken) == k:
                        break
        if len(taken) == k:
            break
    entries = [(pid, float(k - i)) for i, pid in enumerate(taken)]
    return RankedList(question_id=question_id, entries=entries, tag="round_robin")


def rrf_fuse(runs: list[RunSet], question_id: str, k: int, c: float = RRF_C) -> RankedList:
    """score(p) = sum over runs containing p of 1/(c + rank), rank 1-based."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if c <= 0:
        raise ValueError("c must be > 0")
    scores: dict[str, float] = {}
    for run in runs:
        ranked = run.get(question_id)
        if ranked is None:
            continue
        for rank, (pid, _) in enumerate(ranked.entries, start=1):
            scores[pid] = scores.get(pid, 0.0) + 1.0 / (c + rank)
    ordered = sorted(scores.items(), key=lambda e: (-e[1], e[0]))[:k]
    return RankedList(question_id=question_id, entries=ordered, tag="rrf")


def fuse_all(runs: list[RunSet], strategy: str, k: int, c: float = RRF_C) -> RunSet:
    """Fuse every question id present in any run; name records strategy + sources."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown fusion strategy '{strategy}'")
    name = f"{strategy}({'+'.join(run.name for run in runs)})"
    fused = RunSet(name=name)
    seen: set[str] = set()
    for run in runs:
        for qid in run.question_ids():
            if qid in seen:
                continue
            seen.add(qid)
            if strategy == "round_robin":
                ranked = round_robin_fuse(runs, qid, k)
            else:
                ranked = rrf_fuse(runs, qid, k, c)
            ranked.tag = name
            fused.add(ranked)
    return fused
