"""Test shard-top-K sets with single-doc contrastive probabilities."""
import numpy as np

from atdkit import SynthSpec, generate
from atdkit.corpus import Corpus
from atdkit.ptm import shared_model
from atdkit._gem import GemState, TrainingCost, run_gem

spec = SynthSpec(vocab_size=300, n_normal=4, n_anomalous=1,
                 salient_per_topic=12, train_docs_per_topic=60,
                 val_docs_per_topic=60, test_docs_per_topic=25,
                 anom_docs_per_topic=12, doc_length=80, seed=7)
train_c, _, _, truth = generate(spec)


def init_contrastive(corpus: Corpus, M: int, rng, k: int, floor=0.1):
    doc_ptr, words, counts, lengths = corpus._flat()
    D, N = len(corpus), corpus.vocab_size
    beta0 = shared_model(corpus, 0.1)
    u = np.zeros((M, N), dtype=bool)
    P = np.tile(beta0, (M, 1))
    shards = np.array_split(rng.permutation(D), M)
    for j, shard in enumerate(shards):
        shard_counts = np.zeros(N)
        for d in shard:
            lo, hi = doc_ptr[d], doc_ptr[d + 1]
            shard_counts[words[lo:hi]] += counts[lo:hi]
        pos = np.flatnonzero(shard_counts > 0)
        if not len(pos):
            continue
        top = pos[np.lexsort((pos, -shard_counts[pos]))][:k]
        u[j, top] = True
        seed_doc = shard[0]
        lo, hi = doc_ptr[seed_doc], doc_ptr[seed_doc + 1]
        dc = np.zeros(N)
        dc[words[lo:hi]] = counts[lo:hi]
        x0 = dc + floor * shard_counts / max(1, len(shard))
        mu = float(x0[top].sum()) / float(beta0[top].sum())
        P[j] = np.where(u[j], x0 / mu, beta0)
    theta = np.full((D, M), 1.0 / M)
    v = np.ones((D, M), dtype=bool)
    return GemState(doc_ptr, words, counts, lengths, beta0, P, u, theta, v)


for k in (8, 24, 48):
    state = init_contrastive(
        train_c, 4, np.random.default_rng(np.random.SeedSequence(1)), k)
    trc = TrainingCost(state)
    trace, conv = run_gem(state, trc, u_rows=range(4), v_cols=range(4),
                          eligible=train_c.global_counts() > 0,
                          sweep_burnin=3)
    print(f"k={k}: iters={len(trace)-1} conv={conv} bic={trace[-1]:.1f} "
          f"Nj={state.Nj} meanMd={state.Md.mean():.2f} "
          f"meanMaxTheta={state.theta.max(axis=1).mean():.2f}")
    for j in range(4):
        sw = set(np.flatnonzero(state.u[j]).tolist())
        overlaps = [len(sw & set(s.tolist())) for s in truth.salient_sets]
        print(f"  topic{j}: Nj={int(state.Nj[j])} truth-overlap={overlaps}")
