"""Generate context records for a question file from a trained checkpoint."""

from __future__ import annotations

from ctxgen.data import read_questions, write_context_records
from ctxgen.train import _encode_batch, load_checkpoint


def generate(checkpoint_path: str, questions_path: str, out_path: str,
             max_len: int | None = None, batch_size: int = 32) -> int:
    """Greedy-decode one context per question; validates schema before writing."""
    model, vocab, payload = load_checkpoint(checkpoint_path)
    cfg = payload["config"]
    context_type = payload["context_type"]
    limit = max_len or cfg["max_tgt_len"]
    questions = read_questions(questions_path)
    records = []
    for start in range(0, len(questions), batch_size):
        chunk = questions[start:start + batch_size]
        src = _encode_batch(vocab, [text for _, text in chunk], cfg["max_src_len"])
        for (qid, _), ids in zip(chunk, model.greedy_decode(src, max_len=limit)):
            text = vocab.decode(ids)
            records.append({
                "question_id": qid,
                "context_type": context_type,
                "text": text if text.strip() else "<unk>",
            })
    return write_context_records(out_path, records)
