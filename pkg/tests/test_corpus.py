import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from atdkit.corpus import (Corpus, DataError, load_corpus, load_vocabulary,
                           make_document, write_corpus, write_vocabulary,
                           Vocabulary)

from conftest import corpus_from_rows


class TestVocabulary:
    def test_ids_by_line_order(self, tmp_path):
        p = tmp_path / "vocab.txt"
        p.write_text("apple\nball\n", encoding="utf-8")
        vocab = load_vocabulary(p)
        assert vocab.size == 2
        assert vocab.terms == ("apple", "ball")

    def test_duplicate_token_names_line(self, tmp_path):
        p = tmp_path / "vocab.txt"
        p.write_text("apple\napple\n", encoding="utf-8")
        with pytest.raises(DataError, match="line 2|:2"):
            load_vocabulary(p)

    def test_empty_file_rejected(self, tmp_path):
        p = tmp_path / "vocab.txt"
        p.write_text("", encoding="utf-8")
        with pytest.raises(DataError):
            load_vocabulary(p)

    def test_round_trip(self, tmp_path):
        vocab = Vocabulary(("alpha", "beta", "gamma"))
        p = tmp_path / "v.txt"
        write_vocabulary(vocab, p)
        assert load_vocabulary(p).terms == vocab.terms


class TestLoadCorpus:
    def test_length_is_sum_of_counts(self, tmp_path):
        p = tmp_path / "c.dat"
        p.write_text("2 0:1 1:3\n", encoding="utf-8")
        corpus = load_corpus(p, 5)
        assert corpus.docs[0].length == 4
        assert corpus.docs[0].doc_id == 0

    def test_word_id_out_of_range(self, tmp_path):
        p = tmp_path / "c.dat"
        p.write_text("1 5:2\n", encoding="utf-8")
        with pytest.raises(DataError, match="out of range"):
            load_corpus(p, 3)

    def test_term_count_mismatch(self, tmp_path):
        p = tmp_path / "c.dat"
        p.write_text("3 0:1 1:1\n", encoding="utf-8")
        with pytest.raises(DataError, match="declared 3"):
            load_corpus(p, 5)

    def test_nonpositive_count(self, tmp_path):
        p = tmp_path / "c.dat"
        p.write_text("2 0:1 1:0\n", encoding="utf-8")
        with pytest.raises(DataError, match="non-positive"):
            load_corpus(p, 5)

    def test_empty_document_rejected(self, tmp_path):
        p = tmp_path / "c.dat"
        p.write_text("0\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_corpus(p, 5)


class TestRoundTrip:
    def test_write_read_identical_counts(self, tmp_path, rng):
        from conftest import random_corpus
        corpus = random_corpus(rng, 12, 30)
        p = tmp_path / "c.dat"
        write_corpus(corpus, p)
        back = load_corpus(p, 30)
        assert len(back) == len(corpus)
        for a, b in zip(corpus.docs, back.docs):
            assert np.array_equal(a.word_ids, b.word_ids)
            assert np.array_equal(a.counts, b.counts)
            assert a.length == b.length

    def test_write_read_write_byte_identical(self, tmp_path, rng):
        from conftest import random_corpus
        corpus = random_corpus(rng, 20, 40)
        p1, p2 = tmp_path / "a.dat", tmp_path / "b.dat"
        write_corpus(corpus, p1)
        write_corpus(load_corpus(p1, 40), p2)
        assert p1.read_bytes() == p2.read_bytes()

    @settings(max_examples=25, deadline=None)
    @given(st.lists(
        st.dictionaries(st.integers(0, 19), st.integers(1, 9),
                        min_size=1, max_size=8),
        min_size=1, max_size=6))
    def test_round_trip_property(self, tmp_path_factory, rows):
        corpus = corpus_from_rows(rows, 20)
        path = tmp_path_factory.mktemp("rt") / "c.dat"
        write_corpus(corpus, path)
        back = load_corpus(path, 20)
        for a, b in zip(corpus.docs, back.docs):
            assert np.array_equal(a.word_ids, b.word_ids)
            assert np.array_equal(a.counts, b.counts)
            assert a.length == int(b.counts.sum())


class TestCorpusStructure:
    def test_duplicate_doc_ids_rejected(self):
        d = make_document(0, {0: 1}, 3)
        with pytest.raises(DataError, match="duplicate"):
            Corpus((d, d), 3)

    def test_subset_preserves_ids_and_order(self, tiny_corpus):
        sub = tiny_corpus.subset([3, 1])
        assert [d.doc_id for d in sub.docs] == [3, 1]

    def test_global_counts(self, tiny_corpus):
        counts = tiny_corpus.global_counts()
        assert counts[0] == 4  # 2 + 1 + 1
        assert counts.sum() == tiny_corpus.total_tokens()
