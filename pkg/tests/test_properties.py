"""Invariant suites over randomized instances."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from atdkit.ptm import (TrainOpts, bic_value, e_step, infer, m_step_beta,
                        m_step_theta, shared_model, sweep_switches, train)
from atdkit.significance import BootstrapConfig

from conftest import corpus_from_rows, random_corpus, random_model

corpus_strategy = st.lists(
    st.dictionaries(st.integers(0, 11), st.integers(1, 5),
                    min_size=1, max_size=6),
    min_size=2, max_size=8)


class TestPmfInvariants:
    @settings(max_examples=20, deadline=None)
    @given(corpus_strategy, st.integers(1, 4), st.integers(0, 10_000))
    def test_m_step_preserves_pmfs(self, rows, n_topics, seed):
        corpus = corpus_from_rows(rows, 12)
        model = random_model(np.random.default_rng(seed), corpus, n_topics)
        resp = e_step(model, corpus)
        theta = m_step_theta(resp, model.structure)
        beta = m_step_beta(resp, model.structure, model.params.beta0)
        v = model.structure.v
        assert np.allclose((theta * v).sum(axis=1), 1.0, atol=1e-10)
        assert (theta[~v] == 0).all()
        for j in range(n_topics):
            uj = model.structure.u[j]
            total = beta[j, uj].sum() + model.params.beta0[~uj].sum()
            assert total == pytest.approx(1.0, abs=1e-10)

    @settings(max_examples=20, deadline=None)
    @given(corpus_strategy, st.integers(1, 3), st.integers(0, 10_000))
    def test_responsibility_rows_sum_to_one(self, rows, n_topics, seed):
        corpus = corpus_from_rows(rows, 12)
        model = random_model(np.random.default_rng(seed), corpus, n_topics)
        resp = e_step(model, corpus)
        assert np.allclose(resp.probs.sum(axis=1), 1.0, atol=1e-10)

    @settings(max_examples=10, deadline=None)
    @given(corpus_strategy, st.integers(1, 3), st.integers(0, 10_000))
    def test_sweep_preserves_pmfs(self, rows, n_topics, seed):
        corpus = corpus_from_rows(rows, 12)
        model = random_model(np.random.default_rng(seed), corpus, n_topics)
        out = sweep_switches(model, corpus)
        for j in range(n_topics):
            uj = out.structure.u[j]
            total = (out.params.beta[j, uj].sum()
                     + out.params.beta0[~uj].sum())
            assert total == pytest.approx(1.0, abs=1e-8)
        v = out.structure.v
        assert np.allclose((out.params.theta * v).sum(axis=1), 1.0,
                           atol=1e-8)
        assert v.sum(axis=1).min() >= 1


class TestGemMonotonicity:
    def test_fifty_random_corpora(self):
        failures = []
        for seed in range(50):
            rng = np.random.default_rng(seed)
            corpus = random_corpus(rng, int(rng.integers(4, 12)),
                                   int(rng.integers(6, 16)), fill=0.6)
            model = train(corpus, int(rng.integers(1, 4)), seed=seed,
                          opts=TrainOpts(max_iters=40))
            trace = np.array(model.bic_trace)
            ok = np.all(trace[1:] <= trace[:-1] + 1e-6 * np.abs(trace[:-1]))
            if not ok:
                failures.append(seed)
        assert not failures, f"non-monotone seeds: {failures}"


class TestStatBounds:
    def test_t_and_p_within_counting_bounds(self):
        # exercised end to end on a small world; bounds are structural
        from atdkit.synthgen import SynthSpec, generate
        from atdkit.atd import detect_all
        spec = SynthSpec(vocab_size=200, n_normal=2, n_anomalous=1,
                         salient_per_topic=10, train_docs_per_topic=30,
                         val_docs_per_topic=30, test_docs_per_topic=10,
                         anom_docs_per_topic=6, doc_length=50, seed=31)
        train_c, val_c, test_c, _ = generate(spec)
        model = train(train_c, 2, seed=1)
        cfg = BootstrapConfig(b1=39, b2=19, seed=4)
        reports = detect_all(model, test_c, val_c, cfg)
        for rep in reports:
            assert 1.0 / (cfg.b2 + 1) <= rep.p_value <= 1.0
            for _, _, t, _ in rep.doc_tests:
                assert 1.0 / (cfg.b1 + 1) <= t <= 1.0


class TestDeterminismAcrossWorkers:
    def test_detect_bitwise_under_worker_counts(self):
        from atdkit.synthgen import SynthSpec, generate
        from atdkit.atd import detect_all
        spec = SynthSpec(vocab_size=200, n_normal=2, n_anomalous=1,
                         salient_per_topic=10, train_docs_per_topic=30,
                         val_docs_per_topic=30, test_docs_per_topic=8,
                         anom_docs_per_topic=6, doc_length=50, seed=8)
        train_c, val_c, test_c, _ = generate(spec)
        model = train(train_c, 2, seed=1)
        cfg = BootstrapConfig(b1=19, b2=16, tau=0.04, seed=12)
        r1 = detect_all(model, test_c, val_c, cfg, workers=1)
        r8 = detect_all(model, test_c, val_c, cfg, workers=8)
        assert [r.members for r in r1] == [r.members for r in r8]
        assert [r.p_value for r in r1] == [r.p_value for r in r8]
        assert [r.score for r in r1] == [r.score for r in r8]
