"""Trace the growth loop decision by decision."""
import numpy as np

from atdkit import SynthSpec, generate, select_order
from atdkit.atd import (fit_alternative, fit_null, candidate_next,
                        seed_document)
from atdkit.significance import (BootstrapConfig, ValidationPool,
                                 doc_significance, empirical_proportion)

spec = SynthSpec(vocab_size=300, n_normal=4, n_anomalous=1,
                 salient_per_topic=12, train_docs_per_topic=60,
                 val_docs_per_topic=60, test_docs_per_topic=25,
                 anom_docs_per_topic=12, doc_length=80, seed=7)
train_c, val_c, test_c, truth = generate(spec)
model = select_order(train_c, 6, seed=1)
print(f"M*={model.n_topics}")

nf = fit_null(model, test_c)
pool = ValidationPool.build(model, val_c)
cfg = BootstrapConfig(b1=49, b2=39, seed=11)
master = np.random.SeedSequence(11)

ids = [int(i) for i in test_c.doc_ids]
by_id = {int(d.doc_id): d for d in test_c.docs}
lab = truth.test_labels
seed_id = seed_document(nf, ids)
members = [seed_id]
print(f"seed={seed_id} label={lab[seed_id]} l0/L="
      f"{nf.l0(seed_id)/by_id[seed_id].length:.3f}")
excluded = set()
fails = 0
for step in range(30):
    cluster = test_c.subset(members)
    null_v = nf.v[[nf.row(i) for i in members]]
    alt = fit_alternative(model, cluster, null_v)
    rem = [i for i in ids if i not in members and i not in excluded]
    if not rem:
        break
    cand, dl, scoring = candidate_next(nf, alt, test_c.subset(rem))
    row = rem.index(cand)
    th = empirical_proportion(alt.topic_probs(), scoring.theta[row],
                              by_id[cand])
    info = (f"step={step} |S|={len(members)} Nhat={int(alt.u_hat.sum())} "
            f"cand={cand} lab={lab[cand]} dl={dl:.4f} theta_hat={th:.3f}")
    if len(members) >= cfg.min_cluster and th < cfg.theta_gate:
        t = doc_significance(alt, by_id[cand], nf.theta[nf.row(cand)],
                             pool, cfg, master.spawn(1)[0])
        info += f" t={t:.3f}"
        if t < cfg.tau:
            fails += 1
            excluded.add(cand)
            info += " FAIL"
            print(info)
            if fails >= 2:
                break
            continue
        fails = 0
    else:
        fails = 0
    members.append(cand)
    print(info + " ADD")
labels_in = [lab[i] for i in members]
print("cluster labels:", {v: labels_in.count(v) for v in set(labels_in)})
