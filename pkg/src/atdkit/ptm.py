"""Parsimonious topic model: penalized-likelihood training and inference.

Topics are multinomials over the vocabulary in which each word is either
*topic-specific* (switch ``u=1``, own probability) or *shared* (``u=0``,
probability taken from a single global distribution ``beta0``).  Each
document mixes only the topics its presence switches ``v`` turn on.  The
training objective is a structure-penalized negative log-likelihood,
minimized by generalized EM with coordinate-descent sweeps over the
binary switches; model order is chosen top-down by pruning the
lowest-mass topic and retraining.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _gem
from ._gem import (GemState, InferenceCost, TrainingCost,
                   bernoulli_entropy_bits, log_binom, param_term)
from .corpus import Corpus, DataError

TWO_PI = _gem.TWO_PI


@dataclass
class TrainOpts:
    """Knobs for GEM training."""

    tol: float = 1e-5
    max_iters: int = 200
    max_sweep_cycles: int = 50
    sweep_burnin: int = 3     # parameter-only iterations before sweeps
    shard_factor: int = 1     # initial specific words per topic = N/(M*this)
    smoothing: float = 0.1    # shared-model pseudo-count per word


@dataclass
class PtmStructure:
    n_topics: int
    u: np.ndarray  # (M, N) bool
    v: np.ndarray  # (D, M) bool


@dataclass
class PtmParams:
    beta: np.ndarray   # (M, N); zero where u=0
    beta0: np.ndarray  # (N,)
    theta: np.ndarray  # (D, M); zero where v=0


@dataclass
class PtmModel:
    structure: PtmStructure
    params: PtmParams
    vocab_size: int
    bic: float = math.nan
    converged: bool = True
    bic_trace: list = field(default_factory=list)
    order_trace: list = field(default_factory=list)  # [(M, bic), ...]

    @property
    def n_topics(self) -> int:
        return self.structure.n_topics

    def topic_word_probs(self) -> np.ndarray:
        """Dense (M, N) word probabilities: beta where specific, else beta0."""
        return np.where(self.structure.u, self.params.beta,
                        self.params.beta0)


@dataclass
class Responsibilities:
    """Posterior topic assignment per (document, distinct word) entry."""

    doc_ptr: np.ndarray
    words: np.ndarray
    counts: np.ndarray
    probs: np.ndarray  # (nnz, M); rows sum to 1, zero for absent topics

    def for_doc(self, d: int) -> np.ndarray:
        lo, hi = self.doc_ptr[d], self.doc_ptr[d + 1]
        return self.probs[lo:hi]


# -- elementary operations --------------------------------------------------


def word_prob(model: PtmModel, topic: int, word: int) -> float:
    """Probability of a word under a topic, honoring its switch."""
    if not (0 <= topic < model.n_topics):
        raise IndexError(f"topic {topic} out of range")
    if not (0 <= word < model.vocab_size):
        raise IndexError(f"word {word} out of range")
    if model.structure.u[topic, word]:
        return float(model.params.beta[topic, word])
    return float(model.params.beta0[word])


def _check_dims(model: PtmModel, corpus: Corpus) -> None:
    if corpus.vocab_size != model.vocab_size:
        raise DataError(f"vocabulary size mismatch: corpus has "
                        f"{corpus.vocab_size}, model has {model.vocab_size}")
    if len(corpus) != model.structure.v.shape[0]:
        raise DataError(f"document count mismatch: corpus has {len(corpus)}, "
                        f"model has {model.structure.v.shape[0]}")


def log_likelihood(model: PtmModel, corpus: Corpus) -> float:
    """Corpus log-likelihood in nats, grouped over distinct words."""
    _check_dims(model, corpus)
    doc_ptr, words, counts, _ = corpus._flat()
    doc_idx = np.repeat(np.arange(len(corpus)), np.diff(doc_ptr))
    P = model.topic_word_probs()
    mix = (model.params.theta[doc_idx] * P[:, words].T).sum(axis=1)
    if (mix <= 0.0).any():
        raise DataError("a document word has zero probability under every "
                        "present topic")
    return float(counts.astype(np.float64) @ np.log(mix))


def cost(structure: PtmStructure, corpus: Corpus) -> float:
    """Structure penalty in nats (the model-complexity half of the
    objective)."""
    M = structure.n_topics
    N = corpus.vocab_size
    D = len(corpus)
    if structure.v.shape != (D, M):
        raise DataError("structure/corpus shape mismatch")
    lengths = corpus.lengths.astype(np.float64)
    md = structure.v.sum(axis=1)
    if (md == 0).any():
        raise DataError("a document has no present topics")
    nj = structure.u.sum(axis=1)
    lbar = lengths @ structure.v
    nbar = float(nj.mean())
    out = D * math.log(M)
    out += float(log_binom(M, md).sum())
    out += M * N * bernoulli_entropy_bits(nbar / N) * _gem.LN2
    out -= 0.5 * math.log(M * N)
    out += float(((md - 1) * 0.5 * np.log(lengths / TWO_PI)).sum())
    out += sum(param_term(int(n), float(lb)) for n, lb in zip(nj, lbar))
    return out


def bic_value(model: PtmModel, corpus: Corpus) -> float:
    """Objective recomputed from scratch: cost minus log-likelihood."""
    return cost(model.structure, corpus) - log_likelihood(model, corpus)


def shared_model(corpus: Corpus, eps: float = 0.1) -> np.ndarray:
    """Smoothed global word frequencies; fixed for the life of a model."""
    if len(corpus) == 0:
        raise DataError("empty corpus")
    counts = corpus.global_counts()
    total = counts.sum() + corpus.vocab_size * eps
    return (counts + eps) / total


def e_step(model: PtmModel, corpus: Corpus) -> Responsibilities:
    """Posterior topic responsibilities for every document word."""
    _check_dims(model, corpus)
    state = _state_from_model(model, corpus)
    probs = state.e_step()
    doc_ptr, words, counts, _ = corpus._flat()
    return Responsibilities(doc_ptr, words, counts, probs)


def m_step_theta(resp: Responsibilities,
                 structure: PtmStructure) -> np.ndarray:
    """Closed-form proportion update; rows sum to one over present topics."""
    sums = np.add.reduceat(resp.counts[:, None].astype(np.float64)
                           * resp.probs, resp.doc_ptr[:-1], axis=0)
    sums[~structure.v] = 0.0
    return sums / sums.sum(axis=1, keepdims=True)


def m_step_beta(resp: Responsibilities, structure: PtmStructure,
                beta0: np.ndarray) -> np.ndarray:
    """Closed-form specific-word probability update.

    Topics whose specific set has zero expected mass are demoted in place
    (their ``u`` row is cleared) per the degenerate-topic rule.
    """
    M = structure.n_topics
    N = len(beta0)
    w = resp.counts.astype(np.float64)[:, None] * resp.probs
    beta = np.zeros((M, N))
    for j in range(M):
        uj = structure.u[j]
        if not uj.any():
            continue
        xj = np.bincount(resp.words, weights=w[:, j], minlength=N)
        xbar = float(xj[uj].sum())
        if xbar <= 0.0:
            structure.u[j] = False
            continue
        mu = xbar / float(beta0[uj].sum())
        beta[j, uj] = xj[uj] / mu
    return beta


# -- engine adapters --------------------------------------------------------


def _state_from_model(model: PtmModel, corpus: Corpus) -> GemState:
    doc_ptr, words, counts, lengths = corpus._flat()
    P = model.topic_word_probs()
    return GemState(doc_ptr, words, counts, lengths, model.params.beta0,
                    P, model.structure.u.copy(),
                    model.params.theta.copy(), model.structure.v.copy())


def _model_from_state(state: GemState, vocab_size: int, bic: float,
                      converged: bool = True, bic_trace=None) -> PtmModel:
    beta = np.where(state.u, state.P, 0.0)
    structure = PtmStructure(state.T, state.u, state.v)
    params = PtmParams(beta, state.beta0, state.theta)
    return PtmModel(structure, params, vocab_size, bic, converged,
                    list(bic_trace) if bic_trace is not None else [])


def _training_eligibility(corpus: Corpus) -> np.ndarray:
    # words never seen in training stay shared so their smoothed shared
    # probability keeps test likelihoods finite
    return corpus.global_counts() > 0


# -- trial-flip helpers (also used by fixed-point scans in tests) -----------


def _canonical_state(model: PtmModel, corpus: Corpus) -> GemState:
    """State with specific-word probabilities re-derived from fresh
    expected counts, matching what a sweep cycle sees."""
    state = _state_from_model(model, corpus)
    resp = state.e_step()
    state.collect_x(resp, range(state.T))
    state.beta_update(range(state.T))
    state.refresh_mix()
    return state


def _u_trial(state: GemState, j: int, n: int):
    """(new_prob_for_n, rescale_r, valid) for flipping u[j, n]."""
    uj = state.u[j]
    xj = state.x[j]
    b0 = state.beta0
    xbar = float(xj[uj].sum())
    s = float(b0[uj].sum())
    on = bool(uj[n])
    xbar2 = xbar - xj[n] if on else xbar + xj[n]
    s2 = s - b0[n] if on else s + b0[n]
    n2 = int(uj.sum()) + (-1 if on else 1)
    if n2 > 0 and xbar2 <= 0.0:
        return 0.0, 1.0, False
    q2 = float(b0[n]) if on else float(xj[n] * (s2 / xbar2))
    if n2 == 0 or not uj.any() or xbar <= 0.0:
        r = 1.0
    else:
        r = (xbar * s2) / (xbar2 * s)
    return q2, r, True


def u_flip_delta(model: PtmModel, corpus: Corpus, j: int, n: int):
    """Exact objective change of flipping one word switch on the
    canonicalized model, or None when the flip is undefined (it would
    leave specific words with no expected mass)."""
    state = _canonical_state(model, corpus)
    q2, r, valid = _u_trial(state, j, n)
    if not valid:
        return None
    uj = state.u[j]
    tj = state.theta[state.doc_idx, j]
    live = tj > 0.0
    affected = live & ((state.words == n) | uj[state.words])
    idx = np.flatnonzero(affected)
    q_old = state.P[j, state.words[idx]]
    q_new = np.where(state.words[idx] == n, q2, q_old * r)
    base = state.mix[idx] - tj[idx] * q_old
    with np.errstate(divide="ignore"):
        dl = float(state.counts[idx] @ (np.log(base + tj[idx] * q_new)
                                        - np.log(state.mix[idx])))
    d_n = -1 if uj[n] else 1
    trc = TrainingCost(state)
    d_cost = trc.u_delta(int(uj.sum()), d_n, int(state.Nj.sum()),
                         float(state.Lbar[j]))
    return d_cost - dl


def apply_u_flip(model: PtmModel, corpus: Corpus, j: int, n: int) -> PtmModel:
    """Model with one word switch flipped under the repair rule (other
    specific words rescale through the recomputed normalizer)."""
    state = _canonical_state(model, corpus)
    _, _, valid = _u_trial(state, j, n)
    if not valid:
        raise ValueError(f"flip u[{j},{n}] leaves a specific set with no "
                         f"expected mass")
    state.u[j, n] = not state.u[j, n]
    state.beta_update([j])  # x unchanged; recompute row from new switch set
    state.refresh_mix()
    out = _model_from_state(state, model.vocab_size, math.nan)
    out.bic = bic_value(out, corpus)
    return out


def canonicalized(model: PtmModel, corpus: Corpus) -> PtmModel:
    """The baseline model that u-flip deltas are measured against."""
    state = _canonical_state(model, corpus)
    out = _model_from_state(state, model.vocab_size, math.nan)
    out.bic = bic_value(out, corpus)
    return out


def v_flip_delta(model: PtmModel, corpus: Corpus, d: int, j: int) -> float:
    """Exact objective change of flipping one presence switch (with the
    proportional theta repair)."""
    state = _state_from_model(model, corpus)
    trc = TrainingCost(state)
    d_m = -1 if state.v[d, j] else 1
    if d_m == -1 and int(state.Md[d]) <= 1:
        raise ValueError("cannot remove the only present topic")
    d_cost = trc.v_delta(d, j, d_m, int(state.Md[d]), int(state.Nj[j]),
                         float(state.Lbar[j]), float(state.lengths[d]))
    return d_cost - _gem._v_doc_delta(state, d, j, float(state.Md[d]))


def apply_v_flip(model: PtmModel, corpus: Corpus, d: int, j: int) -> PtmModel:
    state = _state_from_model(model, corpus)
    if state.v[d, j] and int(state.Md[d]) <= 1:
        raise ValueError("cannot remove the only present topic")
    _gem._apply_v_flip(state, d, j, float(state.Md[d]))
    out = _model_from_state(state, model.vocab_size, math.nan)
    out.bic = bic_value(out, corpus)
    return out


# -- sweeps, training, model order ------------------------------------------


def sweep_switches(model: PtmModel, corpus: Corpus,
                   which: str = "both") -> PtmModel:
    """Coordinate-descent over switches in fixed order (topics outer for
    word switches, documents outer for presence switches), full cycles
    until nothing changes.  Each flip is kept only if it lowers the
    objective."""
    if which not in ("both", "u-only", "v-only"):
        raise ValueError(f"unknown sweep selection {which!r}")
    _check_dims(model, corpus)
    state = _state_from_model(model, corpus)
    trc = TrainingCost(state)
    u_rows = range(state.T) if which in ("both", "u-only") else ()
    v_cols = range(state.T) if which in ("both", "v-only") else ()
    _gem.run_sweep_cycles(state, trc, u_rows, v_cols,
                          _training_eligibility(corpus))
    state.refresh_mix()
    bic = trc.total(state) - state.loglik()
    return _model_from_state(state, model.vocab_size, bic)


def _init_state(corpus: Corpus, n_topics: int, rng,
                opts: TrainOpts) -> GemState:
    """Shard-based initialization.  Documents are randomly partitioned
    into one shard per topic; each topic marks its shard's top words as
    specific but takes probabilities over that set from a single seed
    document of the shard (floored by the shard average).  Proportions
    start uniform with every topic present everywhere.

    The single-document seeding is what breaks symmetry: a topic can
    only differ from the shared model by redistributing its specific
    set's shared mass, and shard-level counts are too close to global
    for that redistribution to carry any signal, whereas one document is
    dominated by one latent theme.
    """
    doc_ptr, words, counts, lengths = corpus._flat()
    D, N = len(corpus), corpus.vocab_size
    beta0 = shared_model(corpus, opts.smoothing)
    u = np.zeros((n_topics, N), dtype=bool)
    P = np.tile(beta0, (n_topics, 1))
    k = max(4, round(N / (n_topics * opts.shard_factor)))
    shards = np.array_split(rng.permutation(D), n_topics)
    for j, shard in enumerate(shards):
        shard_counts = np.zeros(N)
        for d in shard:
            lo, hi = doc_ptr[d], doc_ptr[d + 1]
            shard_counts[words[lo:hi]] += counts[lo:hi]
        pos = np.flatnonzero(shard_counts > 0)
        if len(pos) == 0:
            continue
        top = pos[np.lexsort((pos, -shard_counts[pos]))][:k]
        u[j, top] = True
        seed_counts = np.zeros(N)
        lo, hi = doc_ptr[shard[0]], doc_ptr[shard[0] + 1]
        seed_counts[words[lo:hi]] = counts[lo:hi]
        x0 = seed_counts + 0.1 * shard_counts / len(shard)
        mu = float(x0[top].sum()) / float(beta0[top].sum())
        P[j] = np.where(u[j], x0 / mu, beta0)
    theta = np.full((D, n_topics), 1.0 / n_topics)
    v = np.ones((D, n_topics), dtype=bool)
    return GemState(doc_ptr, words, counts, lengths, beta0, P, u, theta, v)


def train(corpus: Corpus, n_topics: int, seed: int,
          opts: TrainOpts | None = None) -> PtmModel:
    """GEM training at a fixed topic count.  Deterministic in
    (corpus, n_topics, seed, opts)."""
    if n_topics < 1:
        raise ValueError("n_topics must be >= 1")
    if len(corpus) == 0:
        raise DataError("empty training corpus")
    opts = opts or TrainOpts()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    state = _init_state(corpus, n_topics, rng, opts)
    trc = TrainingCost(state)
    trace, converged = _gem.run_gem(
        state, trc, u_rows=range(n_topics), v_cols=range(n_topics),
        eligible=_training_eligibility(corpus), tol=opts.tol,
        max_iters=opts.max_iters, max_sweep_cycles=opts.max_sweep_cycles,
        sweep_burnin=opts.sweep_burnin)
    return _model_from_state(state, corpus.vocab_size, trace[-1],
                             converged, trace)


def topic_masses(model: PtmModel, corpus: Corpus) -> np.ndarray:
    """Overall mass of each topic: sum over docs of v * theta * length."""
    lengths = corpus.lengths.astype(np.float64)
    return (model.params.theta * model.structure.v
            * lengths[:, None]).sum(axis=0)


def select_order(corpus: Corpus, max_topics: int, seed: int,
                 opts: TrainOpts | None = None) -> PtmModel:
    """Top-down model-order search: train at max_topics, then repeatedly
    drop the lowest-mass topic and retrain (warm start); return the model
    whose objective is lowest over all visited orders."""
    opts = opts or TrainOpts()
    model = train(corpus, max_topics, seed, opts)
    best = model
    order_trace = [(max_topics, model.bic)]
    doc_ptr, words, counts, lengths = corpus._flat()
    for m in range(max_topics - 1, 0, -1):
        drop = int(np.argmin(topic_masses(model, corpus)))
        keep = [j for j in range(model.n_topics) if j != drop]
        u = model.structure.u[keep].copy()
        beta = model.params.beta[keep].copy()
        v = model.structure.v[:, keep].copy()
        theta = model.params.theta[:, keep].copy()
        row_mass = theta.sum(axis=1)
        orphans = ~v.any(axis=1) | (row_mass <= 0.0)
        theta[orphans] = 1.0 / m
        v[orphans] = True
        row_mass[orphans] = 1.0
        theta /= row_mass[:, None]
        theta[~v] = 0.0
        P = np.where(u, beta, model.params.beta0)
        state = GemState(doc_ptr, words, counts, lengths,
                         model.params.beta0, P, u, theta, v)
        trc = TrainingCost(state)
        trace, converged = _gem.run_gem(
            state, trc, u_rows=range(m), v_cols=range(m),
            eligible=_training_eligibility(corpus), tol=opts.tol,
            max_iters=opts.max_iters, max_sweep_cycles=opts.max_sweep_cycles)
        model = _model_from_state(state, corpus.vocab_size, trace[-1],
                                  converged, trace)
        order_trace.append((m, model.bic))
        if model.bic < best.bic:
            best = model
    best.order_trace = order_trace
    return best


# -- inference on held-out documents -----------------------------------------


@dataclass
class InferenceResult:
    theta: np.ndarray    # (D, T)
    v: np.ndarray        # (D, T) bool
    loglik: np.ndarray   # (D,) per-document log-likelihood
    converged: bool = True


def infer_matrix(P: np.ndarray, docs: Corpus, *, pinned_col: int | None = None,
                 tol: float = 1e-5, max_iters: int = 200,
                 init: tuple[np.ndarray, np.ndarray] | None = None,
                 init_theta: np.ndarray | None = None,
                 fit_presence: bool = True,
                 max_sweep_cycles: int = 50) -> InferenceResult:
    """Fit per-document proportions (and, when ``fit_presence``, presence
    switches) against frozen topic-word probabilities P, minimizing the
    reduced per-document objective.  ``pinned_col`` forces one topic
    present everywhere.  Documents are independent; convergence is
    checked per document."""
    T, N = P.shape
    if docs.vocab_size != N:
        raise DataError(f"vocabulary size mismatch: corpus has "
                        f"{docs.vocab_size}, topics have {N}")
    doc_ptr, words, counts, lengths = docs._flat()
    D = len(docs)
    if init is not None:
        theta, v = init[0].copy(), init[1].copy()
    else:
        v = np.ones((D, T), dtype=bool)
        if init_theta is not None:
            theta = init_theta.copy()
        else:
            theta = np.full((D, T), 1.0 / T)
    if pinned_col is not None:
        v[:, pinned_col] = True
    u = np.zeros((T, N), dtype=bool)
    state = GemState(doc_ptr, words, counts, lengths, np.full(N, 1.0 / N),
                     P.copy(), u, theta, v)
    cst = InferenceCost(state)
    v_cols = ([j for j in range(T) if j != pinned_col]
              if fit_presence else [])

    def per_doc_loglik():
        return np.add.reduceat(state.counts * np.log(state.mix),
                               state.doc_ptr[:-1])

    bic_d = cst.per_doc(state) - per_doc_loglik()
    converged = False
    for _ in range(max_iters):
        resp = state.e_step()
        state.theta_update(resp)
        state.refresh_mix()
        if v_cols:
            _gem.run_sweep_cycles(state, cst, (), v_cols,
                                  np.ones(N, dtype=bool),
                                  max_cycles=max_sweep_cycles)
        new_bic_d = cst.per_doc(state) - per_doc_loglik()
        if np.all(np.abs(new_bic_d - bic_d) < tol * np.abs(bic_d) + 1e-12):
            converged = True
            bic_d = new_bic_d
            break
        bic_d = new_bic_d
    return InferenceResult(state.theta, state.v, per_doc_loglik(), converged)


def infer(model: PtmModel, docs: Corpus, *, tol: float = 1e-5,
          max_iters: int = 200) -> InferenceResult:
    """Null-model inference: topics and shared model frozen, only each
    document's proportions and presence switches are fitted."""
    if docs.vocab_size != model.vocab_size:
        raise DataError(f"vocabulary size mismatch: corpus has "
                        f"{docs.vocab_size}, model has {model.vocab_size}")
    return infer_matrix(model.topic_word_probs(), docs, tol=tol,
                        max_iters=max_iters)


# -- serialization -----------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_model(model: PtmModel, path) -> None:
    """Versioned text serialization; probabilities keep full precision."""
    from pathlib import Path
    u, v = model.structure.u, model.structure.v
    beta, beta0, theta = (model.params.beta, model.params.beta0,
                          model.params.theta)
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"PTM v1 {model.n_topics} {model.vocab_size}\n")
        fh.write("beta0: " + " ".join(_fmt(p) for p in beta0) + "\n")
        for j in range(model.n_topics):
            idx = np.flatnonzero(u[j])
            fh.write(f"topic {j} {len(idx)}\n")
            fh.write(" ".join(f"{int(n)}:{_fmt(beta[j, n])}"
                              for n in idx) + "\n")
        for d in range(v.shape[0]):
            idx = np.flatnonzero(v[d])
            fh.write(f"doc {d} {len(idx)}\n")
            fh.write(" ".join(f"{int(j)}:{_fmt(theta[d, j])}"
                              for j in idx) + "\n")


def read_model(path) -> PtmModel:
    from pathlib import Path
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("PTM v1 "):
        raise DataError(f"{path}: not a recognized model file")
    try:
        _, _, m_s, n_s = lines[0].split()
        M, N = int(m_s), int(n_s)
    except ValueError:
        raise DataError(f"{path}: malformed header") from None
    if not lines[1].startswith("beta0: "):
        raise DataError(f"{path}: missing shared model")
    beta0 = np.array([float(t) for t in lines[1][7:].split()])
    if len(beta0) != N:
        raise DataError(f"{path}: shared model has {len(beta0)} entries, "
                        f"expected {N}")
    u = np.zeros((M, N), dtype=bool)
    beta = np.zeros((M, N))
    pos = 2
    for j in range(M):
        head = lines[pos].split()
        if head[:2] != ["topic", str(j)]:
            raise DataError(f"{path}: expected topic {j} at line {pos + 1}")
        nj = int(head[2])
        pairs = lines[pos + 1].split()
        if len(pairs) != nj:
            raise DataError(f"{path}: topic {j} declares {nj} words, "
                            f"found {len(pairs)}")
        for pair in pairs:
            n_str, b_str = pair.split(":")
            n = int(n_str)
            u[j, n] = True
            beta[j, n] = float(b_str)
        pos += 2
    docs_v = []
    docs_theta = []
    d = 0
    while pos < len(lines):
        head = lines[pos].split()
        if head[:2] != ["doc", str(d)]:
            raise DataError(f"{path}: expected doc {d} at line {pos + 1}")
        md = int(head[2])
        pairs = lines[pos + 1].split()
        if len(pairs) != md:
            raise DataError(f"{path}: doc {d} declares {md} topics, "
                            f"found {len(pairs)}")
        vrow = np.zeros(M, dtype=bool)
        trow = np.zeros(M)
        for pair in pairs:
            j_str, t_str = pair.split(":")
            j = int(j_str)
            vrow[j] = True
            trow[j] = float(t_str)
        docs_v.append(vrow)
        docs_theta.append(trow)
        pos += 2
        d += 1
    v = np.array(docs_v) if docs_v else np.zeros((0, M), dtype=bool)
    theta = np.array(docs_theta) if docs_theta else np.zeros((0, M))
    structure = PtmStructure(M, u, v)
    params = PtmParams(beta, beta0, theta)
    return PtmModel(structure, params, N)
