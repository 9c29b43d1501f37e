"""Pure-Python BM25 scoring kernel, used when the compiled extension is absent.

Same signature and the same expression structure as the Cython kernel in
_bm25.pyx; both run IEEE double arithmetic in the same order, so scores are
bit-identical across backends.
"""


def score_terms(offsets, postings_docs, postings_tfs, doc_lens,
                query_term_ids, query_weights, idf, k1, b, avgdl, out):
    for qi in range(len(query_term_ids)):
        t = int(query_term_ids[qi])
        w = float(query_weights[qi])
        tidf = float(idf[t])
        start = int(offsets[t])
        end = int(offsets[t + 1])
        for p in range(start, end):
            d = int(postings_docs[p])
            tf = float(postings_tfs[p])
            dl = float(doc_lens[d])
            denom = tf + k1 * (1.0 - b + b * dl / avgdl)
            out[d] += w * (tidf * (tf * (k1 + 1.0)) / denom)
