"""Paper-scale staged run with timings."""
import time

import numpy as np

from atdkit import SynthSpec, generate, train, select_order
from atdkit.atd import detect_all
from atdkit.significance import BootstrapConfig

t0 = time.time()
spec = SynthSpec(seed=42)
train_c, val_c, test_c, truth = generate(spec)
print(f"gen {time.time()-t0:.1f}s sizes={len(train_c)}/{len(val_c)}/{len(test_c)} "
      f"nnz={len(train_c._flat()[1])}", flush=True)

t0 = time.time()
m10 = train(train_c, 10, seed=1)
print(f"train M=10: {time.time()-t0:.1f}s bic={m10.bic:.0f} "
      f"iters={len(m10.bic_trace)-1} conv={m10.converged} "
      f"Nj={m10.structure.u.sum(1)}", flush=True)

# topic recovery: top-30 beta words vs truth salient sets
P = m10.topic_word_probs()
hits = []
for j in range(10):
    idx = np.flatnonzero(m10.structure.u[j])
    top = idx[np.argsort(-m10.params.beta[j][idx])][:30]
    best = max(range(12),
               key=lambda t: len(set(top.tolist())
                                 & set(truth.salient_sets[t].tolist())))
    ov = len(set(top.tolist()) & set(truth.salient_sets[best].tolist()))
    hits.append((best, ov))
print("topic->truth matches:", hits, flush=True)

t0 = time.time()
best = select_order(train_c, 20, seed=1)
print(f"select_order 20: {time.time()-t0:.1f}s M*={best.n_topics}", flush=True)
print("order trace:", [(m, round(b)) for m, b in best.order_trace], flush=True)

t0 = time.time()
cfg = BootstrapConfig(b1=99, b2=199, seed=7)
reports = detect_all(best, test_c, val_c, cfg, workers=2)
print(f"detect: {time.time()-t0:.1f}s clusters={len(reports)}", flush=True)
for r in reports:
    labs = [truth.test_labels[i] for i in r.members]
    from collections import Counter
    print(f"  size={len(r.members)} p={r.p_value:.4f} det={r.detected} "
          f"score={r.score:.1f} labels={Counter(labs)} "
          f"salient={sum(1 for _, _, o in r.salient if o)}/{len(r.salient)}",
          flush=True)
