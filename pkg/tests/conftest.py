import json
import random

import pytest

from sparseqa.corpus import Corpus, Passage, Question


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return str(path)


@pytest.fixture
def jsonl(tmp_path):
    def _write(name, records):
        return write_jsonl(tmp_path / name, records)

    return _write


def make_corpus(docs):
    """docs: list of (id, title, text) triples."""
    return Corpus([Passage(id=i, title=t, text=x) for i, t, x in docs])


def random_docs(rng: random.Random, n_docs: int, vocab_size: int = 40,
                max_len: int = 24) -> list[tuple[str, str, str]]:
    vocab = [f"w{i:02d}" for i in range(vocab_size)]
    docs = []
    for d in range(n_docs):
        body = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, max_len)))
        title = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 3)))
        docs.append((f"p{d:03d}", title, body))
    return docs


def random_query(rng: random.Random, vocab_size: int = 40, max_terms: int = 8) -> str:
    vocab = [f"w{i:02d}" for i in range(vocab_size)]
    return " ".join(rng.choice(vocab) for _ in range(rng.randint(1, max_terms)))


def q(qid, text, answers):
    return Question(id=qid, text=text, answers=tuple(answers))
