"""Test single-document topic seeding."""
import numpy as np

from atdkit import SynthSpec, generate
from atdkit.corpus import Corpus
from atdkit.ptm import TrainOpts, shared_model
from atdkit._gem import GemState, TrainingCost, run_gem

spec = SynthSpec(vocab_size=300, n_normal=4, n_anomalous=1,
                 salient_per_topic=12, train_docs_per_topic=60,
                 val_docs_per_topic=60, test_docs_per_topic=25,
                 anom_docs_per_topic=12, doc_length=80, seed=7)
train_c, _, _, truth = generate(spec)


def init_doc_seeded(corpus: Corpus, M: int, rng, k: int):
    doc_ptr, words, counts, lengths = corpus._flat()
    D, N = len(corpus), corpus.vocab_size
    beta0 = shared_model(corpus, 0.1)
    u = np.zeros((M, N), dtype=bool)
    P = np.tile(beta0, (M, 1))
    seeds = rng.permutation(D)[:M]
    for j, d in enumerate(seeds):
        lo, hi = doc_ptr[d], doc_ptr[d + 1]
        dc = np.zeros(N)
        dc[words[lo:hi]] = counts[lo:hi]
        pos = np.flatnonzero(dc > 0)
        top = pos[np.lexsort((pos, -dc[pos]))][:k]
        u[j, top] = True
        mu = float(dc[top].sum()) / float(beta0[top].sum())
        P[j] = np.where(u[j], dc / mu, beta0)
    theta = np.full((D, M), 1.0 / M)
    v = np.ones((D, M), dtype=bool)
    return GemState(doc_ptr, words, counts, lengths, beta0, P, u, theta, v)


rng = np.random.default_rng(np.random.SeedSequence(1))
state = init_doc_seeded(train_c, 4, rng, k=8)
trc = TrainingCost(state)
for it in range(8):
    resp = state.e_step()
    state.theta_update(resp)
    state.collect_x(resp, range(4))
    state.beta_update(range(4))
    state.refresh_mix()
    theta_max = state.theta.max(axis=1).mean()
    contrast = [float((state.P[j][state.u[j]] / state.beta0[state.u[j]]).max())
                for j in range(4) if state.u[j].any()]
    bic = trc.total(state) - state.loglik()
    print(f"it={it} bic={bic:.1f} mean-max-theta={theta_max:.3f} "
          f"contrast={np.round(contrast, 2)}")

# now run the full GEM with sweeps enabled after burn-in
state2 = init_doc_seeded(train_c, 4,
                         np.random.default_rng(np.random.SeedSequence(1)), 8)
trc2 = TrainingCost(state2)
trace, conv = run_gem(state2, trc2, u_rows=range(4), v_cols=range(4),
                      eligible=train_c.global_counts() > 0,
                      sweep_burnin=3)
print(f"full GEM: iters={len(trace)-1} conv={conv} bic={trace[-1]:.1f} "
      f"Nj={state2.Nj} meanMd={state2.Md.mean():.2f}")
for j in range(4):
    spec_words = set(np.flatnonzero(state2.u[j]).tolist())
    overlaps = [len(spec_words & set(s.tolist())) for s in truth.salient_sets]
    print(f"  topic{j}: Nj={state2.Nj[j]} overlap-with-truth={overlaps}")
