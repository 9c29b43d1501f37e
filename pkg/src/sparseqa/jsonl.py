"""Line-delimited JSON helpers with line-number error reporting."""

from __future__ import annotations

import json
import os
from typing import Any, Iterable, Iterator

from sparseqa.errors import DataFormatError


def read_records(path: str) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, record) for each non-blank line of a JSONL file."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise DataFormatError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def require_field(obj: dict, field: str, path: str, lineno: int) -> Any:
    if field not in obj:
        raise DataFormatError(f"{path}:{lineno}: missing field '{field}'")
    return obj[field]


def dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def write_records(path: str, records: Iterable[dict]) -> int:
    """Write records as JSONL (atomic: temp file then rename). Returns count."""
    tmp = path + ".tmp"
    n = 0
    with open(tmp, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(dumps(rec))
            fh.write("\n")
            n += 1
    os.replace(tmp, path)
    return n
