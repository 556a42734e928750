"""Paper-scale training with N/M-sized init sets."""
import time

import numpy as np

from atdkit import SynthSpec, generate
from atdkit.ptm import TrainOpts, _init_state, _training_eligibility
from atdkit._gem import TrainingCost, run_gem

spec = SynthSpec(seed=42)
train_c, _, _, truth = generate(spec)

for factor, burnin in ((1, 3), (1, 8)):
    rng = np.random.default_rng(np.random.SeedSequence(1))
    opts = TrainOpts(shard_factor=factor, sweep_burnin=burnin)
    state = _init_state(train_c, 10, rng, opts)
    trc = TrainingCost(state)
    t0 = time.time()
    trace, conv = run_gem(state, trc, u_rows=range(10), v_cols=range(10),
                          eligible=_training_eligibility(train_c),
                          sweep_burnin=burnin, tol=1e-5)
    tm = state.theta.max(axis=1).mean()
    print(f"factor={factor} burnin={burnin}: {time.time()-t0:.0f}s "
          f"iters={len(trace)-1} conv={conv} bic={trace[-1]:.0f} "
          f"maxtheta={tm:.2f} Nj={state.Nj}", flush=True)
    hits = []
    for j in range(10):
        idx = np.flatnonzero(state.u[j])
        if not len(idx):
            hits.append(None)
            continue
        top = idx[np.argsort(-state.P[j][idx])][:30]
        best = max(range(12),
                   key=lambda t: len(set(top.tolist())
                                     & set(truth.salient_sets[t].tolist())))
        ov = len(set(top.tolist())
                 & set(truth.salient_sets[best].tolist()))
        hits.append((best, ov))
    print("  topic->truth:", hits, flush=True)
