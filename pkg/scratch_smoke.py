"""Scratch smoke run: tiny synthetic corpus through train/infer/detect."""
import time

import numpy as np

from atdkit import (BootstrapConfig, SynthSpec, bic_value, detect_all,
                    generate, select_order, train, infer)
from atdkit.ptm import TrainOpts

t0 = time.time()
spec = SynthSpec(vocab_size=300, n_normal=4, n_anomalous=1,
                 salient_per_topic=12, train_docs_per_topic=60,
                 val_docs_per_topic=60, test_docs_per_topic=25,
                 anom_docs_per_topic=12, doc_length=80, seed=7)
train_c, val_c, test_c, truth = generate(spec)
print(f"gen: {time.time()-t0:.2f}s sizes={len(train_c)}/{len(val_c)}/{len(test_c)}")

t0 = time.time()
model = train(train_c, 4, seed=1)
print(f"train M=4: {time.time()-t0:.2f}s bic={model.bic:.2f} "
      f"converged={model.converged} iters={len(model.bic_trace)-1}")
trace = np.array(model.bic_trace)
mono = np.all(trace[1:] <= trace[:-1] + 1e-6 * np.abs(trace[:-1]))
print("monotone trace:", mono)
print("bic check:", model.bic, bic_value(model, train_c))
print("Nj:", model.structure.u.sum(axis=1), "mean Md:",
      model.structure.v.sum(axis=1).mean())

t0 = time.time()
best = select_order(train_c, 6, seed=1)
print(f"select_order M_max=6: {time.time()-t0:.2f}s -> M*={best.n_topics}")
print("order trace:", [(m, round(b, 1)) for m, b in best.order_trace])

t0 = time.time()
nf = infer(best, test_c)
print(f"infer test: {time.time()-t0:.2f}s mean l0={nf.loglik.mean():.2f} "
      f"mean Md={nf.v.sum(axis=1).mean():.2f}")

t0 = time.time()
cfg = BootstrapConfig(b1=19, b2=39, seed=11)
reports = detect_all(best, test_c, val_c, cfg)
print(f"detect: {time.time()-t0:.2f}s clusters={len(reports)}")
for r in reports:
    labs = [truth.test_labels[i] for i in r.members]
    print(f"  size={len(r.members)} p={r.p_value:.4f} det={r.detected} "
          f"labels={sorted(set(labs))} score={r.score:.1f}")
