"""Tokenization, inverted index, and BM25 ranked retrieval.

Scoring: for each query term t,
    idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
    contribution = idf(t) * tf*(k1+1) / (tf + k1*(1 - b + b*|d|/avgdl))
with k1=0.9, b=0.4 by default. Repeated query terms contribute once per
occurrence. Accumulation runs in term-sorted order in double precision so
results are deterministic across platforms, thread counts, and kernel
backends.
"""

from __future__ import annotations

import json
import os
import re

import numpy as np

from sparseqa import kernels
from sparseqa.corpus import Corpus
from sparseqa.errors import DataFormatError
from sparseqa.runs import RankedList

_TOKEN_SPLIT = re.compile(r"[\W_]+", re.UNICODE)

FORMAT_VERSION = 1


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character; drop empties."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


class InvertedIndex:
    """Immutable array-backed inverted index over a passage corpus.

    Postings are stored CSR-style: `offsets[t]:offsets[t+1]` slices
    `postings_docs`/`postings_tfs` for term id t, with doc indices ascending.
    """

    def __init__(self, doc_ids, terms, offsets, postings_docs, postings_tfs,
                 doc_lens, k1: float, b: float):
        self.doc_ids: list[str] = doc_ids
        self.terms: list[str] = terms
        self.offsets = offsets
        self.postings_docs = postings_docs
        self.postings_tfs = postings_tfs
        self.doc_lens = doc_lens
        self.k1 = float(k1)
        self.b = float(b)
        self.n_docs = len(doc_ids)
        self.avgdl = float(doc_lens.sum()) / self.n_docs if self.n_docs else 0.0
        self._term_id = {t: i for i, t in enumerate(terms)}
        self._doc_index = {d: i for i, d in enumerate(doc_ids)}
        # Tie-break permutation: rank of each doc's id in ascending id order.
        order = sorted(range(self.n_docs), key=doc_ids.__getitem__)
        self.id_rank = np.empty(self.n_docs, dtype=np.int64)
        for rank, doc in enumerate(order):
            self.id_rank[doc] = rank
        df = (offsets[1:] - offsets[:-1]).astype(np.float64)
        self.idf = np.log(1.0 + (self.n_docs - df + 0.5) / (df + 0.5))
        self._doc_major: list[list[tuple[int, int]]] | None = None

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, corpus: Corpus, k1: float = 0.9, b: float = 0.4) -> "InvertedIndex":
        """Index title + " " + body for every passage, in corpus order."""
        doc_ids = [p.id for p in corpus]
        doc_lens = np.zeros(len(doc_ids), dtype=np.int32)
        term_postings: dict[str, list[tuple[int, int]]] = {}
        for doc, passage in enumerate(corpus):
            tokens = tokenize(passage.title + " " + passage.text)
            doc_lens[doc] = len(tokens)
            counts: dict[str, int] = {}
            for tok in tokens:
                counts[tok] = counts.get(tok, 0) + 1
            for term, tf in counts.items():
                term_postings.setdefault(term, []).append((doc, tf))
        terms = sorted(term_postings)
        offsets = np.zeros(len(terms) + 1, dtype=np.int64)
        for i, term in enumerate(terms):
            offsets[i + 1] = offsets[i] + len(term_postings[term])
        total = int(offsets[-1])
        postings_docs = np.empty(total, dtype=np.int32)
        postings_tfs = np.empty(total, dtype=np.int32)
        pos = 0
        for term in terms:
            for doc, tf in term_postings[term]:
                postings_docs[pos] = doc
                postings_tfs[pos] = tf
                pos += 1
        return cls(doc_ids, terms, offsets, postings_docs, postings_tfs, doc_lens, k1, b)

    # -- stats -------------------------------------------------------------

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @property
    def n_postings(self) -> int:
        return int(self.offsets[-1])

    def doc_term_freqs(self, passage_id: str) -> dict[str, int]:
        """Term -> tf map for one passage (terms in sorted order)."""
        doc = self._doc_index[passage_id]
        major = self._doc_major
        if major is None:
            # built locally then bound once, so concurrent readers only ever
            # see a complete transpose
            major = [[] for _ in range(self.n_docs)]
            for t in range(self.n_terms):
                for p in range(int(self.offsets[t]), int(self.offsets[t + 1])):
                    major[int(self.postings_docs[p])].append((t, int(self.postings_tfs[p])))
            self._doc_major = major
        return {self.terms[t]: tf for t, tf in major[doc]}

    def doc_length(self, passage_id: str) -> int:
        return int(self.doc_lens[self._doc_index[passage_id]])

    # -- scoring -----------------------------------------------------------

    def _score_array(self, weighted_terms: list[tuple[str, float]]) -> np.ndarray:
        """Dense per-doc scores for a weighted term list (term-sorted accumulation)."""
        scores = np.zeros(self.n_docs, dtype=np.float64)
        pairs = sorted((t, w) for t, w in weighted_terms if t in self._term_id)
        if not pairs or not self.n_docs:
            return scores
        term_ids = np.array([self._term_id[t] for t, _ in pairs], dtype=np.int64)
        weights = np.array([w for _, w in pairs], dtype=np.float64)
        kernels.score_terms(self.offsets, self.postings_docs, self.postings_tfs,
                            self.doc_lens, term_ids, weights, self.idf,
                            self.k1, self.b, self.avgdl, scores)
        return scores

    def _top_k(self, scores: np.ndarray, k: int, tag: str, question_id: str) -> RankedList:
        cand = np.nonzero(scores > 0.0)[0]
        if cand.size == 0:
            return RankedList(question_id=question_id, entries=[], tag=tag)
        order = np.lexsort((self.id_rank[cand], -scores[cand]))
        top = cand[order[:k]]
        entries = [(self.doc_ids[d], float(scores[d])) for d in top]
        return RankedList(question_id=question_id, entries=entries, tag=tag)

    def bm25_score(self, query_terms: list[str], passage_id: str) -> float:
        """Score one indexed passage against pre-tokenized query terms."""
        doc = self._doc_index[passage_id]  # KeyError for unindexed passages
        counts: dict[str, int] = {}
        for t in query_terms:
            counts[t] = counts.get(t, 0) + 1
        score = 0.0
        dl = float(self.doc_lens[doc])
        for term in sorted(counts):
            t = self._term_id.get(term)
            if t is None:
                continue
            lo, hi = int(self.offsets[t]), int(self.offsets[t + 1])
            pos = lo + int(np.searchsorted(self.postings_docs[lo:hi], doc))
            if pos >= hi or int(self.postings_docs[pos]) != doc:
                continue
            tf = float(self.postings_tfs[pos])
            w = float(counts[term])
            tidf = float(self.idf[t])
            denom = tf + self.k1 * (1.0 - self.b + self.b * dl / self.avgdl)
            score += w * (tidf * (tf * (self.k1 + 1.0)) / denom)
        return score

    def search(self, query_text: str, k: int, question_id: str = "", tag: str = "") -> RankedList:
        """Top-k passages for a query string; zero-score passages excluded."""
        if k < 1:
            raise ValueError("k must be >= 1")
        counts: dict[str, int] = {}
        for t in tokenize(query_text):
            counts[t] = counts.get(t, 0) + 1
        scores = self._score_array([(t, float(c)) for t, c in counts.items()])
        return self._top_k(scores, k, tag, question_id)

    def search_weighted(self, weighted_terms: list[tuple[str, float]], k: int,
                        question_id: str = "", tag: str = "") -> RankedList:
        """Top-k for a weighted query: each term's contribution times its weight."""
        if k < 1:
            raise ValueError("k must be >= 1")
        scores = self._score_array(weighted_terms)
        return self._top_k(scores, k, tag, question_id)

    # -- persistence -------------------------------------------------------

    def save(self, directory: str) -> None:
        os.makedirs(directory, exist_ok=True)
        manifest = {
            "format_version": FORMAT_VERSION,
            "k1": self.k1,
            "b": self.b,
            "n_docs": self.n_docs,
            "n_terms": self.n_terms,
            "n_postings": self.n_postings,
        }
        with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")
        with open(os.path.join(directory, "doc_ids.json"), "w", encoding="utf-8") as fh:
            json.dump(self.doc_ids, fh, ensure_ascii=False)
        with open(os.path.join(directory, "terms.json"), "w", encoding="utf-8") as fh:
            json.dump(self.terms, fh, ensure_ascii=False)
        np.save(os.path.join(directory, "offsets.npy"), self.offsets)
        np.save(os.path.join(directory, "postings_docs.npy"), self.postings_docs)
        np.save(os.path.join(directory, "postings_tfs.npy"), self.postings_tfs)
        np.save(os.path.join(directory, "doc_lens.npy"), self.doc_lens)

    @classmethod
    def load(cls, directory: str) -> "InvertedIndex":
        manifest_path = os.path.join(directory, "manifest.json")
        if not os.path.exists(manifest_path):
            raise DataFormatError(f"not an index directory (no manifest): {directory}")
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        version = manifest.get("format_version")
        if version != FORMAT_VERSION:
            raise DataFormatError(
                f"index format version {version} unsupported (expected {FORMAT_VERSION})"
            )
        with open(os.path.join(directory, "doc_ids.json"), encoding="utf-8") as fh:
            doc_ids = json.load(fh)
        with open(os.path.join(directory, "terms.json"), encoding="utf-8") as fh:
            terms = json.load(fh)
        offsets = np.load(os.path.join(directory, "offsets.npy"))
        postings_docs = np.load(os.path.join(directory, "postings_docs.npy"))
        postings_tfs = np.load(os.path.join(directory, "postings_tfs.npy"))
        doc_lens = np.load(os.path.join(directory, "doc_lens.npy"))
        return cls(doc_ids, terms, offsets, postings_docs, postings_tfs, doc_lens,
                   manifest["k1"], manifest["b"])


def build_index(corpus: Corpus, k1: float = 0.9, b: float = 0.4) -> InvertedIndex:
    return InvertedIndex.build(corpus, k1=k1, b=b)
