"""Sparse retrieval and evaluation toolkit for open-domain QA."""

__version__ = "0.1.0"

from sparseqa.corpus import Corpus, Passage, Question, load_corpus, load_questions
from sparseqa.index import InvertedIndex, build_index, tokenize
from sparseqa.runs import RankedList, RunSet, read_trec_run, write_trec_run

__all__ = [
    "Corpus",
    "Passage",
    "Question",
    "InvertedIndex",
    "RankedList",
    "RunSet",
    "build_index",
    "load_corpus",
    "load_questions",
    "read_trec_run",
    "tokenize",
    "write_trec_run",
    "__version__",
]
