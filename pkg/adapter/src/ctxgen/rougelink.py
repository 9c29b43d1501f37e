"""Checkpoint-selection metric, delegated to the retrieval toolkit's CLI.

There is exactly one ROUGE definition in the system; the generator shells
out to `sparseqa eval-rouge` rather than reimplementing it, so checkpoint
selection can never drift from the evaluation side. References may be
[SEP]-joined; the CLI splits them and takes the max per metric.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import tempfile


class RougeError(RuntimeError):
    pass


def validation_rouge1(pairs: list[tuple[str, str, str]]) -> float:
    """Mean ROUGE-1 F1 over (id, candidate, reference) pairs."""
    if not pairs:
        return 0.0
    with tempfile.TemporaryDirectory(prefix="ctxgen-rouge-") as tmp:
        cand_path = os.path.join(tmp, "candidates.jsonl")
        ref_path = os.path.join(tmp, "references.jsonl")
        with open(cand_path, "w", encoding="utf-8") as fh:
            for pid, cand, _ in pairs:
                fh.write(json.dumps({"id": pid, "text": cand}, ensure_ascii=False) + "\n")
        with open(ref_path, "w", encoding="utf-8") as fh:
            for pid, _, ref in pairs:
                fh.write(json.dumps({"id": pid, "text": ref}, ensure_ascii=False) + "\n")
        proc = subprocess.run(
            [sys.executable, "-m", "sparseqa", "eval-rouge",
             "--candidates", cand_path, "--references", ref_path, "--format", "json"],
            capture_output=True, text=True,
        )
    if proc.returncode != 0:
        raise RougeError(f"eval-rouge failed (exit {proc.returncode}): {proc.stderr.strip()}")
    try:
        return float(json.loads(proc.stdout)["rouge1_f1"])
    except (json.JSONDecodeError, KeyError) as exc:
        raise RougeError(f"could not parse eval-rouge output: {exc}") from exc
