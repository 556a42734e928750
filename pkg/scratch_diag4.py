"""Watch parameter-only differentiation speed at paper scale."""
import time

import numpy as np

from atdkit import SynthSpec, generate
from atdkit.ptm import TrainOpts, _init_state
from atdkit._gem import TrainingCost

spec = SynthSpec(seed=42)
train_c, _, _, truth = generate(spec)

rng = np.random.default_rng(np.random.SeedSequence(1))
state = _init_state(train_c, 10, rng, TrainOpts())
trc = TrainingCost(state)
t0 = time.time()
prev = None
for it in range(40):
    resp = state.e_step()
    state.theta_update(resp)
    state.collect_x(resp, range(10))
    state.beta_update(range(10))
    state.refresh_mix()
    if it % 2 == 0:
        bic = trc.total(state) - state.loglik()
        tm = state.theta.max(axis=1).mean()
        d = "" if prev is None else f" d={prev - bic:+.1f}"
        prev = bic
        print(f"it={it} bic={bic:.0f}{d} maxtheta={tm:.3f} "
              f"({time.time()-t0:.0f}s)", flush=True)
