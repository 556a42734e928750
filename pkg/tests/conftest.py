import numpy as np
import pytest

from atdkit.corpus import Corpus, make_document
from atdkit.ptm import (PtmModel, PtmParams, PtmStructure, shared_model)


def corpus_from_rows(rows, vocab_size):
    """rows: list of {word_id: count} dicts."""
    docs = tuple(make_document(i, row, vocab_size)
                 for i, row in enumerate(rows))
    return Corpus(docs, vocab_size)


def random_corpus(rng, n_docs, vocab_size, max_count=4, fill=0.4):
    rows = []
    for _ in range(n_docs):
        n_words = rng.integers(1, max(2, int(vocab_size * fill)) + 1)
        words = rng.choice(vocab_size, size=n_words, replace=False)
        rows.append({int(w): int(rng.integers(1, max_count + 1))
                     for w in words})
    return corpus_from_rows(rows, vocab_size)


def random_model(rng, corpus, n_topics, specific_frac=0.3):
    """A structurally valid random model over the corpus (pmfs exact)."""
    N = corpus.vocab_size
    D = len(corpus)
    beta0 = shared_model(corpus, 0.1)
    u = rng.random((n_topics, N)) < specific_frac
    # only corpus-present words may be specific (training eligibility)
    present = corpus.global_counts() > 0
    u &= present[None, :]
    beta = np.zeros((n_topics, N))
    for j in range(n_topics):
        if not u[j].any():
            continue
        raw = rng.random(u[j].sum()) + 0.05
        raw /= raw.sum()
        beta[j, u[j]] = raw * beta0[u[j]].sum()
    v = rng.random((D, n_topics)) < 0.7
    for d in range(D):
        if not v[d].any():
            v[d, rng.integers(n_topics)] = True
    theta = np.zeros((D, n_topics))
    for d in range(D):
        raw = rng.random(v[d].sum()) + 0.1
        theta[d, v[d]] = raw / raw.sum()
    structure = PtmStructure(n_topics, u, v)
    params = PtmParams(beta, beta0, theta)
    return PtmModel(structure, params, N)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_corpus():
    return corpus_from_rows(
        [{0: 2, 1: 1, 3: 1}, {1: 3, 2: 1}, {0: 1, 2: 2, 4: 1},
         {3: 2, 4: 2}, {0: 1, 1: 1, 2: 1, 3: 1, 4: 1}], 5)
