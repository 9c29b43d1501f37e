"""Target/context record I/O and model-side tokenization.

Target records ({question_id, context_type, source, reference}) are consumed
for training; context records ({question_id, context_type, text}) are the
only output contract. Output files are schema-validated before the atomic
rename, so a consumer never sees a partially written or invalid file.
"""

from __future__ import annotations

import json
import os

CONTEXT_TYPES = ("answer", "sentence", "title")

SEPARATOR = "[SEP]"

PAD, BOS, EOS, UNK = "<pad>", "<s>", "</s>", "<unk>"


class SchemaError(ValueError):
    pass


def read_jsonl(path: str) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            rows.append(obj)
    return rows


def read_target_records(path: str) -> list[dict]:
    rows = read_jsonl(path)
    if not rows:
        raise SchemaError(f"{path}: empty training file")
    for i, row in enumerate(rows, start=1):
        for field in ("question_id", "context_type", "source", "reference"):
            if field not in row or not isinstance(row[field], str):
                raise SchemaError(f"{path}:{i}: missing or non-string '{field}'")
        if row["context_type"] not in CONTEXT_TYPES:
            raise SchemaError(f"{path}:{i}: bad context_type '{row['context_type']}'")
        if not row["reference"].strip():
            raise SchemaError(f"{path}:{i}: empty reference")
    return rows


def read_questions(path: str) -> list[tuple[str, str]]:
    rows = read_jsonl(path)
    out = []
    for i, row in enumerate(rows, start=1):
        if "id" not in row or "text" not in row:
            raise SchemaError(f"{path}:{i}: question rows need 'id' and 'text'")
        out.append((str(row["id"]), str(row["text"])))
    return out


def validate_context_record(rec: dict) -> None:
    if set(rec) != {"question_id", "context_type", "text"}:
        raise SchemaError(f"context record has fields {sorted(rec)}")
    if not isinstance(rec["question_id"], str) or not rec["question_id"]:
        raise SchemaError("context record question_id must be a non-empty string")
    if rec["context_type"] not in CONTEXT_TYPES:
        raise SchemaError(f"bad context_type '{rec['context_type']}'")
    if not isinstance(rec["text"], str) or not rec["text"].strip():
        raise SchemaError(f"empty context text for '{rec['question_id']}'")


def write_context_records(path: str, records: list[dict]) -> int:
    for rec in records:
        validate_context_record(rec)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
    os.replace(tmp, path)
    return len(records)


def model_tokens(text: str) -> list[str]:
    """Whitespace tokens with the reference separator kept as its own token."""
    return text.replace(SEPARATOR, f" {SEPARATOR} ").split()


class Vocab:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.index = {t: i for i, t in enumerate(tokens)}

    @classmethod
    def build(cls, texts: list[str]) -> "Vocab":
        seen: dict[str, None] = {}
        for text in texts:
            for tok in model_tokens(text):
                seen.setdefault(tok, None)
        return cls([PAD, BOS, EOS, UNK] + list(seen))

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, text: str) -> list[int]:
        unk = self.index[UNK]
        return [self.index.get(t, unk) for t in model_tokens(text)]

    def decode(self, ids: list[int]) -> str:
        specials = {self.index[PAD], self.index[BOS], self.index[EOS]}
        return " ".join(self.tokens[i] for i in ids if i not in specials)
