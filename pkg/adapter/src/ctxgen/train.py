"""Fine-tune one generator per target type on target-record files.

Checkpoint selection: after every evaluation interval the validation sources
are decoded greedily and scored against the [SEP]-joined references; the
checkpoint with the best validation ROUGE-1 F1 is kept.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import torch
import torch.nn as nn

from ctxgen.data import Vocab, read_target_records
from ctxgen.model import BOS_ID, EOS_ID, PAD_ID, Seq2Seq
from ctxgen.rougelink import validation_rouge1


@dataclass
class AdapterConfig:
    model: str = "tiny-gru"
    target_type: str = "answer"
    train_path: str = ""
    val_path: str = ""          # falls back to train_path when empty
    max_src_len: int = 40
    max_tgt_len: int = 40
    decoding: str = "greedy"
    emb: int = 32
    hidden: int = 64
    epochs: int = 40
    lr: float = 5e-3
    eval_every: int = 5
    seed: int = 0


def _encode_batch(vocab: Vocab, texts: list[str], max_len: int,
                  add_bos: bool = False, add_eos: bool = False) -> torch.Tensor:
    rows = []
    for text in texts:
        ids = vocab.encode(text)[:max_len]
        if add_bos:
            ids = [BOS_ID] + ids
        if add_eos:
            ids = ids + [EOS_ID]
        rows.append(ids)
    width = max(len(r) for r in rows)
    return torch.tensor([r + [PAD_ID] * (width - len(r)) for r in rows],
                        dtype=torch.long)


def _validation_score(model: Seq2Seq, vocab: Vocab, records: list[dict],
                      cfg: AdapterConfig) -> float:
    src = _encode_batch(vocab, [r["source"] for r in records], cfg.max_src_len)
    decoded = model.greedy_decode(src, max_len=cfg.max_tgt_len)
    pairs = [(r["question_id"] + f"#{i}", vocab.decode(ids), r["reference"])
             for i, (r, ids) in enumerate(zip(records, decoded))]
    return validation_rouge1(pairs)


def train(cfg: AdapterConfig, log=print) -> dict:
    """Returns the checkpoint payload (also suitable for torch.save)."""
    torch.manual_seed(cfg.seed)
    train_records = read_target_records(cfg.train_path)
    bad = [r for r in train_records if r["context_type"] != cfg.target_type]
    if bad:
        raise ValueError(
            f"{cfg.train_path} contains '{bad[0]['context_type']}' records, "
            f"expected only '{cfg.target_type}'"
        )
    val_records = (read_target_records(cfg.val_path)
                   if cfg.val_path else train_records)

    vocab = Vocab.build([r["source"] for r in train_records] +
                        [r["reference"] for r in train_records])
    model = Seq2Seq(len(vocab), emb=cfg.emb, hidden=cfg.hidden)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD_ID)

    src = _encode_batch(vocab, [r["source"] for r in train_records], cfg.max_src_len)
    tgt_in = _encode_batch(vocab, [r["reference"] for r in train_records],
                           cfg.max_tgt_len, add_bos=True)
    tgt_out = _encode_batch(vocab, [r["reference"] for r in train_records],
                            cfg.max_tgt_len, add_eos=True)
    width = max(tgt_in.size(1), tgt_out.size(1))
    tgt_in = nn.functional.pad(tgt_in, (0, width - tgt_in.size(1)), value=PAD_ID)
    tgt_out = nn.functional.pad(tgt_out, (0, width - tgt_out.size(1)), value=PAD_ID)

    best_score = -1.0
    best_state = None
    best_epoch = -1
    for epoch in range(1, cfg.epochs + 1):
        model.train()
        optimizer.zero_grad()
        logits = model(src, tgt_in)
        loss = loss_fn(logits.reshape(-1, logits.size(-1)), tgt_out.reshape(-1))
        loss.backward()
        optimizer.step()
        if epoch % cfg.eval_every == 0 or epoch == cfg.epochs:
            score = _validation_score(model, vocab, val_records, cfg)
            log(f"epoch {epoch}: loss {loss.item():.4f} val rouge1_f1 {score:.4f}")
            if score > best_score:
                best_score = score
                best_epoch = epoch
                best_state = {k: v.detach().clone()
                              for k, v in model.state_dict().items()}
    return {
        "model_state": best_state,
        "vocab_tokens": vocab.tokens,
        "config": asdict(cfg),
        "context_type": cfg.target_type,
        "best_val_rouge1_f1": best_score,
        "best_epoch": best_epoch,
    }


def save_checkpoint(payload: dict, path: str) -> None:
    torch.save(payload, path)


def load_checkpoint(path: str) -> tuple[Seq2Seq, Vocab, dict]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    vocab = Vocab(payload["vocab_tokens"])
    cfg = payload["config"]
    model = Seq2Seq(len(vocab), emb=cfg["emb"], hidden=cfg["hidden"])
    model.load_state_dict(payload["model_state"])
    model.eval()
    return model, vocab, payload
