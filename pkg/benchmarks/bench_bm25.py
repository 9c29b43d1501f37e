#!/usr/bin/env python3
"""Benchmark the compiled BM25 kernel against the pure-Python fallback.

Builds a synthetic corpus, scores the same query batch through both kernels,
checks the score arrays are bit-identical, and reports throughput.

    python3 benchmarks/bench_bm25.py --docs 8000 --queries 50
"""

import argparse
import random
import time

import numpy as np

from sparseqa.corpus import Corpus, Passage
from sparseqa.index import InvertedIndex, tokenize


def synthetic_corpus(n_docs: int, doc_len: int, vocab: int, seed: int) -> Corpus:
    rng = random.Random(seed)
    # zipf-ish draw: low ids much more frequent, like natural text
    words = [f"w{i}" for i in range(vocab)]
    weights = [1.0 / (i + 1) for i in range(vocab)]
    passages = []
    for d in range(n_docs):
        body = " ".join(rng.choices(words, weights=weights, k=doc_len))
        passages.append(Passage(id=f"d{d:06d}", title="", text=body))
    return Corpus(passages)


def run_backend(score_terms, index, query_batches, repeats: int):
    best = float("inf")
    out = np.zeros(index.n_docs, dtype=np.float64)
    checksum = None
    for _ in range(repeats):
        started = time.perf_counter()
        acc = 0.0
        for term_ids, weights in query_batches:
            out[:] = 0.0
            score_terms(index.offsets, index.postings_docs, index.postings_tfs,
                        index.doc_lens, term_ids, weights, index.idf,
                        index.k1, index.b, index.avgdl, out)
            acc += float(out.sum())
        best = min(best, time.perf_counter() - started)
        checksum = acc
    return best, checksum


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=8000)
    parser.add_argument("--doc-len", type=int, default=60)
    parser.add_argument("--vocab", type=int, default=4000)
    parser.add_argument("--queries", type=int, default=50)
    parser.add_argument("--query-len", type=int, default=6)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    print(f"building corpus: {args.docs} docs x {args.doc_len} tokens, "
          f"vocab {args.vocab}")
    corpus = synthetic_corpus(args.docs, args.doc_len, args.vocab, args.seed)
    index = InvertedIndex.build(corpus)
    print(f"index: {index.n_terms} terms, {index.n_postings} postings")

    rng = random.Random(args.seed + 1)
    words = [f"w{i}" for i in range(args.vocab)]
    weights_z = [1.0 / (i + 1) for i in range(args.vocab)]
    batches = []
    for _ in range(args.queries):
        text = " ".join(rng.choices(words, weights=weights_z, k=args.query_len))
        counts: dict[str, float] = {}
        for tok in tokenize(text):
            counts[tok] = counts.get(tok, 0.0) + 1.0
        pairs = sorted((t, w) for t, w in counts.items() if t in index._term_id)
        if not pairs:
            continue
        batches.append((
            np.array([index._term_id[t] for t, _ in pairs], dtype=np.int64),
            np.array([w for _, w in pairs], dtype=np.float64),
        ))
    print(f"query batch: {len(batches)} queries")

    from sparseqa.kernels import available_backends, pyfallback

    py_time, py_sum = run_backend(pyfallback.score_terms, index, batches, args.repeats)
    print(f"python  kernel: {py_time:.3f}s  "
          f"({1000 * py_time / len(batches):.2f} ms/query)")

    if "cython" in available_backends():
        from sparseqa.kernels import _bm25

        cy_time, cy_sum = run_backend(_bm25.score_terms, index, batches, args.repeats)
        print(f"cython  kernel: {cy_time:.3f}s  "
              f"({1000 * cy_time / len(batches):.2f} ms/query)")
        assert py_sum == cy_sum, "backends disagree"
        print(f"checksums identical; speedup: {py_time / cy_time:.1f}x")
    else:
        print("compiled kernel not built; python fallback only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
