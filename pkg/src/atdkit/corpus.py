"""Vocabularies and sparse bag-of-words corpora.

File formats:
  * vocabulary: UTF-8, one term per line, LF-terminated.
  * corpus: one document per line, ``K w1:c1 w2:c2 ...`` where K is the
    number of distinct word ids on the line; ids are dense 0-based
    integers, counts are positive.

Corpus and Vocabulary objects are immutable after construction and safe
to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised when an input file or data structure violates the format."""


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """An ordered list of unique terms; word ids are line order."""

    terms: tuple[str, ...]

    def __post_init__(self):
        if not self.terms:
            raise DataError("vocabulary is empty")

    @property
    def size(self) -> int:
        return len(self.terms)

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True, eq=False)
class Document:
    """Sparse counts of one document; ``word_ids`` sorted ascending."""

    doc_id: int
    word_ids: np.ndarray  # int64, sorted, unique
    counts: np.ndarray    # int64, all positive

    @property
    def length(self) -> int:
        return int(self.counts.sum())

    @property
    def n_distinct(self) -> int:
        return len(self.word_ids)


@dataclass(frozen=True, eq=False)
class Corpus:
    """A list of documents over a fixed vocabulary size."""

    docs: tuple[Document, ...]
    vocab_size: int
    # flattened CSR-style views, built lazily by _flat()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        ids = [d.doc_id for d in self.docs]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate document ids in corpus")

    def __len__(self) -> int:
        return len(self.docs)

    @property
    def doc_ids(self) -> np.ndarray:
        return np.array([d.doc_id for d in self.docs], dtype=np.int64)

    def _flat(self):
        """(doc_ptr, word_ids, counts, lengths) flattened over documents."""
        if "flat" not in self._cache:
            sizes = np.array([d.n_distinct for d in self.docs], dtype=np.int64)
            doc_ptr = np.zeros(len(self.docs) + 1, dtype=np.int64)
            np.cumsum(sizes, out=doc_ptr[1:])
            if self.docs:
                words = np.concatenate([d.word_ids for d in self.docs])
                counts = np.concatenate([d.counts for d in self.docs])
            else:
                words = np.zeros(0, dtype=np.int64)
                counts = np.zeros(0, dtype=np.int64)
            lengths = np.array([d.length for d in self.docs], dtype=np.int64)
            self._cache["flat"] = (doc_ptr, words, counts, lengths)
        return self._cache["flat"]

    @property
    def lengths(self) -> np.ndarray:
        return self._flat()[3]

    def total_tokens(self) -> int:
        return int(self.lengths.sum())

    def global_counts(self) -> np.ndarray:
        """Total count of each word over the corpus, shape (vocab_size,)."""
        _, words, counts, _ = self._flat()
        return np.bincount(words, weights=counts.astype(np.float64),
                           minlength=self.vocab_size)

    def subset(self, doc_ids) -> "Corpus":
        """New corpus holding the given documents, original ids preserved."""
        wanted = list(doc_ids)
        by_id = {d.doc_id: d for d in self.docs}
        missing = [i for i in wanted if i not in by_id]
        if missing:
            raise KeyError(f"unknown document ids: {missing[:5]}")
        return Corpus(tuple(by_id[i] for i in wanted), self.vocab_size)


def make_document(doc_id: int, counts_by_word: dict[int, int],
                  vocab_size: int) -> Document:
    """Build a Document from a {word_id: count} mapping, validating it."""
    if not counts_by_word:
        raise DataError(f"document {doc_id} is empty")
    ids = np.array(sorted(counts_by_word), dtype=np.int64)
    cts = np.array([counts_by_word[int(i)] for i in ids], dtype=np.int64)
    if ids[0] < 0 or ids[-1] >= vocab_size:
        raise DataError(
            f"document {doc_id}: word id out of range 0..{vocab_size - 1}")
    if (cts <= 0).any():
        raise DataError(f"document {doc_id}: non-positive count")
    return Document(doc_id, ids, cts)


def load_vocabulary(path) -> Vocabulary:
    """Read a one-term-per-line vocabulary file."""
    path = Path(path)
    terms: list[str] = []
    seen: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            term = line.rstrip("\n")
            if not term:
                raise DataError(f"{path}:{lineno}: empty term")
            if term in seen:
                raise DataError(
                    f"{path}:{lineno}: duplicate token {term!r} "
                    f"(first seen at line {seen[term]})")
            seen[term] = lineno
            terms.append(term)
    if not terms:
        raise DataError(f"{path}: vocabulary file is empty")
    return Vocabulary(tuple(terms))


def write_vocabulary(vocab: Vocabulary, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for term in vocab.terms:
            fh.write(term + "\n")


def _parse_doc_line(line: str, lineno: int, doc_id: int, vocab_size: int,
                    path) -> Document:
    parts = line.split()
    try:
        k = int(parts[0])
    except (ValueError, IndexError):
        raise DataError(f"{path}:{lineno}: malformed document header") from None
    pairs = parts[1:]
    if len(pairs) != k:
        raise DataError(
            f"{path}:{lineno}: declared {k} terms but found {len(pairs)}")
    counts: dict[int, int] = {}
    for pair in pairs:
        try:
            wid_s, cnt_s = pair.split(":")
            wid, cnt = int(wid_s), int(cnt_s)
        except ValueError:
            raise DataError(f"{path}:{lineno}: malformed pair {pair!r}") from None
        if wid < 0 or wid >= vocab_size:
            raise DataError(
                f"{path}:{lineno}: word id {wid} out of range 0..{vocab_size - 1}")
        if cnt <= 0:
            raise DataError(f"{path}:{lineno}: non-positive count for word {wid}")
        if wid in counts:
            raise DataError(f"{path}:{lineno}: duplicate word id {wid}")
        counts[wid] = cnt
    if not counts:
        raise DataError(f"{path}:{lineno}: empty document")
    return make_document(doc_id, counts, vocab_size)


def load_corpus(path, vocab_size: int) -> Corpus:
    """Read a sparse bag-of-words corpus file; doc ids are 0-based line order."""
    path = Path(path)
    docs: list[Document] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                raise DataError(f"{path}:{lineno}: blank line")
            docs.append(_parse_doc_line(line, lineno, lineno - 1, vocab_size, path))
    return Corpus(tuple(docs), vocab_size)


def write_corpus(corpus: Corpus, path) -> None:
    """Write in the same line format load_corpus reads (ids ascending)."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc in corpus.docs:
            pairs = " ".join(f"{int(w)}:{int(c)}"
                             for w, c in zip(doc.word_ids, doc.counts))
            fh.write(f"{doc.n_distinct} {pairs}\n")
