# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled BM25 scoring kernel.

Accumulates weighted BM25 contributions over postings into a dense score
array. Arithmetic mirrors kernels/pyfallback.py expression-for-expression so
both backends produce bit-identical doubles.
"""


def score_terms(const long long[::1] offsets,
                const int[::1] postings_docs,
                const int[::1] postings_tfs,
                const int[::1] doc_lens,
                const long long[::1] query_term_ids,
                const double[::1] query_weights,
                const double[::1] idf,
                double k1,
                double b,
                double avgdl,
                double[::1] out):
    cdef Py_ssize_t qi, p, start, end
    cdef long long t
    cdef int d
    cdef double w, tidf, tf, dl, denom
    with nogil:
        for qi in range(query_term_ids.shape[0]):
            t = query_term_ids[qi]
            w = query_weights[qi]
            tidf = idf[t]
            start = offsets[t]
            end = offsets[t + 1]
            for p in range(start, end):
                d = postings_docs[p]
                tf = postings_tfs[p]
                dl = doc_lens[d]
                denom = tf + k1 * (1.0 - b + b * dl / avgdl)
                out[d] += w * (tidf * (tf * (k1 + 1.0)) / denom)
