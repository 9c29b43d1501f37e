"""Fixture target-record files, produced through the retrieval toolkit's CLI.

The generator only ever sees the primary component through its external
interfaces, so the fixtures are built the same way: a small corpus is
indexed and `prep-targets` extracts the three target types.
"""

import json
import subprocess
import sys

import pytest

N_QUESTIONS = 16


def _write(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return str(path)


def _cli(*argv):
    proc = subprocess.run([sys.executable, "-m", "sparseqa", *argv],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def fixture_world(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("targets")
    passages, questions = [], []
    for i in range(N_QUESTIONS):
        answer = f"year{i}x spring{i}y"
        questions.append({
            "id": f"q{i}",
            "text": f"when was relic{i} discovered at site{i}",
            "answers": [answer],
        })
        passages.append({
            "id": f"gold{i:03d}",
            "title": f"Relic{i} Survey",
            "text": (f"The relic{i} exhibit at site{i} opened to crowds. "
                     f"Records show relic{i} was discovered in {answer} season. "
                     f"Visitors arrive daily."),
        })
        passages.append({
            "id": f"noise{i:03d}",
            "title": f"Site{i} Guide",
            "text": f"A guide to site{i} amenities and opening hours.",
        })
    corpus = _write(tmp / "corpus.jsonl", passages)
    qfile = _write(tmp / "questions.jsonl", questions)
    index = str(tmp / "idx")
    _cli("index", "--corpus", corpus, "--out", index)
    targets = {}
    for ttype in ("answer", "sentence", "title"):
        out = str(tmp / f"targets_{ttype}.jsonl")
        _cli("prep-targets", "--questions", qfile, "--type", ttype,
             "--corpus", corpus, "--index", index, "--out", out)
        targets[ttype] = out
    return {
        "tmp": tmp,
        "corpus": corpus,
        "questions": qfile,
        "index": index,
        "targets": targets,
        "n_questions": N_QUESTIONS,
    }
