"""Small recurrent encoder-decoder with dot-product attention.

Deliberately tiny: the retrieval toolkit's quality gates never depend on
generation quality, so desk-scale training has to be possible in seconds on
CPU. Decoding is greedy only.
"""

from __future__ import annotations

import torch
import torch.nn as nn

PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3


class Seq2Seq(nn.Module):
    def __init__(self, vocab_size: int, emb: int = 32, hidden: int = 64):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, emb, padding_idx=PAD_ID)
        self.encoder = nn.GRU(emb, hidden, batch_first=True)
        self.decoder = nn.GRU(emb, hidden, batch_first=True)
        self.out = nn.Linear(hidden * 2, vocab_size)

    def encode(self, src: torch.Tensor):
        mask = src.ne(PAD_ID)
        lengths = mask.sum(dim=1).clamp(min=1)
        enc_out, _ = self.encoder(self.embed(src))
        # final non-pad state as the decoder's initial hidden state
        idx = (lengths - 1).view(-1, 1, 1).expand(-1, 1, enc_out.size(-1))
        h0 = enc_out.gather(1, idx).transpose(0, 1).contiguous()
        return enc_out, h0, mask

    def _attend(self, dec_out, enc_out, mask):
        scores = torch.bmm(dec_out, enc_out.transpose(1, 2))
        scores = scores.masked_fill(~mask.unsqueeze(1), float("-inf"))
        ctx = torch.bmm(torch.softmax(scores, dim=-1), enc_out)
        return torch.cat([dec_out, ctx], dim=-1)

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        enc_out, h0, mask = self.encode(src)
        dec_out, _ = self.decoder(self.embed(tgt_in), h0)
        return self.out(self._attend(dec_out, enc_out, mask))

    @torch.no_grad()
    def greedy_decode(self, src: torch.Tensor, max_len: int = 40) -> list[list[int]]:
        """Greedy decoding; EOS is barred at the first step so output is never empty."""
        self.eval()
        enc_out, hidden, mask = self.encode(src)
        batch = src.size(0)
        tok = torch.full((batch, 1), BOS_ID, dtype=torch.long, device=src.device)
        finished = torch.zeros(batch, dtype=torch.bool, device=src.device)
        outputs: list[list[int]] = [[] for _ in range(batch)]
        for step in range(max_len):
            dec_out, hidden = self.decoder(self.embed(tok), hidden)
            logits = self.out(self._attend(dec_out, enc_out, mask))[:, -1, :]
            logits[:, PAD_ID] = float("-inf")
            logits[:, BOS_ID] = float("-inf")
            if step == 0:
                logits[:, EOS_ID] = float("-inf")
            tok = logits.argmax(dim=-1, keepdim=True)
            for i in range(batch):
                if finished[i]:
                    continue
                t = int(tok[i, 0])
                if t == EOS_ID:
                    finished[i] = True
                else:
                    outputs[i].append(t)
            if bool(finished.all()):
                break
        return outputs
