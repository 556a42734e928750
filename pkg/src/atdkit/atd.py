"""Greedy discovery of anomalous document clusters in a test batch.

The trained topic model, fitted to each test document by proportion and
presence inference only, is the null.  A candidate cluster is grown
greedily from the worst-fitting document; an alternative model appends
one extra topic (pinned present in every cluster member) and refits it
from scratch after each addition.  Growth stops when candidate documents
repeatedly fail a bootstrap test of the new topic's contribution; the
finished cluster is kept only if its likelihood-ratio score beats
bootstrap clusters (empirical p-value below the significance level).
Detected clusters are removed and the search repeats until a candidate
comes up insignificant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _gem
from .corpus import Corpus, DataError, Document
from .ptm import (InferenceResult, PtmModel, TrainOpts, infer, infer_matrix)
from .significance import (BootstrapConfig, ValidationPool, cluster_significance,
                           doc_significance, empirical_proportion)


@dataclass
class NullFit:
    """Per-document null-model fit over a test batch (cached once; the
    fit is per-document independent, so removing documents later cannot
    change the remaining rows)."""

    doc_ids: np.ndarray
    lengths: np.ndarray
    theta: np.ndarray   # (D_t, M)
    v: np.ndarray       # (D_t, M)
    loglik: np.ndarray  # (D_t,) l0 per document

    def __post_init__(self):
        self._row = {int(i): k for k, i in enumerate(self.doc_ids)}

    def row(self, doc_id: int) -> int:
        return self._row[int(doc_id)]

    def l0(self, doc_id: int) -> float:
        return float(self.loglik[self.row(doc_id)])


@dataclass
class AltModel:
    """Null topics plus one candidate topic fitted on a cluster."""

    base: PtmModel
    u_hat: np.ndarray       # (N,) switches of the candidate topic
    beta_hat: np.ndarray    # (N,) its word probabilities; zero where shared
    member_ids: list
    theta: np.ndarray       # (|S|, M+1)
    v: np.ndarray           # (|S|, M+1); last column pinned True
    l1_members: np.ndarray  # (|S|,)
    bic: float
    converged: bool = True

    @property
    def new_col(self) -> int:
        return self.base.n_topics

    def new_topic_probs(self) -> np.ndarray:
        return np.where(self.u_hat, self.beta_hat, self.base.params.beta0)

    def topic_probs(self) -> np.ndarray:
        return np.vstack([self.base.topic_word_probs(),
                          self.new_topic_probs()])


@dataclass
class ClusterReport:
    """One candidate cluster in the order its members were added."""

    members: list
    score: float
    p_value: float | None
    detected: bool
    delta_l: list                 # None for the seed document
    salient: list                 # (word_id, prob, occurring) by prob desc
    l0_members: np.ndarray
    l1_members: np.ndarray
    doc_tests: list = field(default_factory=list)  # (doc_id, theta_hat, t, passed)

    def to_dict(self) -> dict:
        return {
            "members": [int(i) for i in self.members],
            "score": float(self.score),
            "p_value": None if self.p_value is None else float(self.p_value),
            "detected": bool(self.detected),
            "delta_l": [None if d is None else float(d) for d in self.delta_l],
            "salient_words": [
                {"word": int(w), "prob": float(b), "occurring": bool(o)}
                for w, b, o in self.salient],
            "l0": [float(x) for x in self.l0_members],
            "l1": [float(x) for x in self.l1_members],
            "doc_tests": [
                {"doc": int(d), "theta_hat": float(th), "t": float(t),
                 "passed": bool(p)} for d, th, t, p in self.doc_tests],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterReport":
        return cls(
            members=list(d["members"]), score=d["score"],
            p_value=d["p_value"], detected=d["detected"],
            delta_l=list(d["delta_l"]),
            salient=[(s["word"], s["prob"], s["occurring"])
                     for s in d["salient_words"]],
            l0_members=np.array(d["l0"]), l1_members=np.array(d["l1"]),
            doc_tests=[(t["doc"], t["theta_hat"], t["t"], t["passed"])
                       for t in d["doc_tests"]])


# -- null model --------------------------------------------------------------


def fit_null(model: PtmModel, test: Corpus, opts: TrainOpts | None = None) -> NullFit:
    """Fit the trained model to each test document and cache l0."""
    opts = opts or TrainOpts()
    fit = infer(model, test, tol=opts.tol, max_iters=opts.max_iters)
    return NullFit(test.doc_ids, test.lengths.astype(np.float64),
                   fit.theta, fit.v, fit.loglik)


def seed_document(nf: NullFit, remaining=None) -> int:
    """Document with the lowest length-normalized null log-likelihood;
    ties break toward the smaller id."""
    if remaining is None:
        ids = nf.doc_ids
        per_word = nf.loglik / nf.lengths
    else:
        ids = np.array([int(i) for i in remaining], dtype=np.int64)
        if len(ids) == 0:
            raise ValueError("no remaining documents")
        rows = [nf.row(i) for i in ids]
        per_word = nf.loglik[rows] / nf.lengths[rows]
    k = np.lexsort((ids, per_word))[0]
    return int(ids[k])


# -- alternative model -------------------------------------------------------


def fit_alternative(base: PtmModel, cluster: Corpus, null_v: np.ndarray,
                    seed: int | None = None,
                    opts: TrainOpts | None = None) -> AltModel:
    """Fully re-initialize and fit the (M+1)-topic alternative on a
    cluster: candidate-topic probabilities start from cluster frequency
    counts with every occurring word specific, the candidate topic starts
    dominant in every member, and only the candidate topic's structure
    and the members' proportions/presences are optimized.

    ``seed`` is accepted for interface stability; the fit is
    deterministic and does not use it.
    """
    del seed
    opts = opts or TrainOpts()
    if len(cluster) == 0:
        raise DataError("empty cluster")
    M = base.n_topics
    N = base.vocab_size
    beta0 = base.params.beta0
    counts = cluster.global_counts()
    u_hat = counts > 0
    s = float(beta0[u_hat].sum())
    xbar = float(counts[u_hat].sum())
    new_row = np.where(u_hat, counts * (s / xbar), beta0)
    P = np.vstack([base.topic_word_probs(), new_row])
    u = np.vstack([base.structure.u, u_hat])
    D = len(cluster)
    null_v = np.asarray(null_v, dtype=bool)
    theta = np.zeros((D, M + 1))
    n_present = null_v.sum(axis=1)
    theta[:, :M] = np.where(null_v, 0.1 / n_present[:, None], 0.0)
    theta[:, M] = 0.9
    v = np.hstack([null_v, np.ones((D, 1), dtype=bool)])
    doc_ptr, words, cnts, lengths = cluster._flat()
    state = _gem.GemState(doc_ptr, words, cnts, lengths, beta0, P, u,
                          theta, v)
    cost = _gem.AlternativeCost(state)
    trace, converged = _gem.run_gem(
        state, cost, u_rows=(M,), v_cols=range(M),
        tol=opts.tol, max_iters=opts.max_iters,
        max_sweep_cycles=opts.max_sweep_cycles)
    l1 = np.add.reduceat(state.counts * np.log(state.mix), doc_ptr[:-1])
    return AltModel(base, state.u[M].copy(),
                    np.where(state.u[M], state.P[M], 0.0),
                    [int(i) for i in cluster.doc_ids],
                    state.theta, state.v, l1, trace[-1], converged)


def score_candidates(alt: AltModel, remaining: Corpus,
                     opts: TrainOpts | None = None) -> InferenceResult:
    """Per-document l1 under the current alternative: structure frozen,
    only each document's proportions fitted over all topics plus the
    pinned candidate topic.

    Proportions-only fitting matters: refitting presence switches here
    prunes a document's minor topics and funnels their stray tokens onto
    the pinned topic, making every document look like a weak member.
    """
    opts = opts or TrainOpts()
    return infer_matrix(alt.topic_probs(), remaining,
                        pinned_col=alt.new_col, tol=opts.tol,
                        max_iters=opts.max_iters, fit_presence=False)


def candidate_next(nf: NullFit, alt: AltModel, remaining: Corpus,
                   opts: TrainOpts | None = None,
                   scoring: InferenceResult | None = None):
    """Best next document by relative log-likelihood gain; returns
    (doc_id, delta_l, scoring_fit).  Ties break toward the smaller id."""
    if len(remaining) == 0:
        raise ValueError("no remaining documents")
    if scoring is None:
        scoring = score_candidates(alt, remaining, opts)
    ids = remaining.doc_ids
    l0 = np.array([nf.l0(i) for i in ids])
    dl = (scoring.loglik - l0) / np.abs(l0)
    k = int(np.lexsort((ids, -dl))[0])
    return int(ids[k]), float(dl[k]), scoring


def salient_words(alt: AltModel, cluster: Corpus):
    """Candidate-topic specific words, flagged by cluster occurrence and
    sorted by probability descending (word id breaks ties)."""
    occurring = cluster.global_counts() > 0
    idx = np.flatnonzero(alt.u_hat)
    order = np.lexsort((idx, -alt.beta_hat[idx]))
    return [(int(idx[k]), float(alt.beta_hat[idx[k]]), bool(occurring[idx[k]]))
            for k in order]


# -- cluster growth and the outer loop ---------------------------------------


def grow_cluster(model: PtmModel, nf: NullFit, test: Corpus,
                 pool: ValidationPool, cfg: BootstrapConfig,
                 seed_seq: np.random.SeedSequence,
                 opts: TrainOpts | None = None):
    """Grow one candidate cluster greedily; returns (report, alt_model)
    with the report's p-value left for the cluster-level test.

    The per-document bootstrap test runs only once the cluster has
    cfg.min_cluster members and only when the candidate's empirical
    new-topic proportion falls below cfg.theta_gate; growth stops after
    two consecutive failed candidates (failures are never added).
    """
    opts = opts or TrainOpts()
    ids = [int(i) for i in test.doc_ids]
    by_id = {int(d.doc_id): d for d in test.docs}
    members = [seed_document(nf, ids)]
    member_set = set(members)
    delta_trace: list = [None]
    doc_tests: list = []
    excluded: set = set()
    fails = 0
    alt = None
    need_refit = True
    while True:
        if need_refit:
            cluster = test.subset(members)
            null_v = nf.v[[nf.row(i) for i in members]]
            alt = fit_alternative(model, cluster, null_v, opts=opts)
            need_refit = False
        rem_ids = [i for i in ids if i not in member_set and i not in excluded]
        if not rem_ids:
            break
        cand_id, cand_dl, scoring = candidate_next(
            nf, alt, test.subset(rem_ids), opts)
        cand_doc = by_id[cand_id]
        cand_row = rem_ids.index(cand_id)
        theta_hat = empirical_proportion(alt.topic_probs(),
                                         scoring.theta[cand_row], cand_doc)
        if len(members) >= cfg.min_cluster and theta_hat < cfg.theta_gate:
            t = doc_significance(alt, cand_doc, nf.theta[nf.row(cand_id)],
                                 pool, cfg, seed_seq.spawn(1)[0], opts)
            passed = t >= cfg.tau
            doc_tests.append((cand_id, theta_hat, t, passed))
            if not passed:
                fails += 1
                excluded.add(cand_id)
                if fails >= 2:
                    break
                continue
        fails = 0
        members.append(cand_id)
        member_set.add(cand_id)
        delta_trace.append(cand_dl)
        need_refit = True
    l0_members = np.array([nf.l0(i) for i in members])
    score = float(alt.l1_members.sum() - l0_members.sum())
    report = ClusterReport(members, score, None, False, delta_trace,
                           salient_words(alt, test.subset(members)),
                           l0_members, alt.l1_members.copy(), doc_tests)
    return report, alt


def detect_all(model: PtmModel, test: Corpus, validation: Corpus,
               cfg: BootstrapConfig, opts: TrainOpts | None = None,
               workers: int = 1) -> list[ClusterReport]:
    """Detect anomalous clusters one by one until a candidate cluster
    fails the significance test (that final cluster is still reported,
    flagged not detected) or the batch is exhausted."""
    opts = opts or TrainOpts()
    if len(test) == 0:
        return []
    nf = fit_null(model, test, opts)
    pool = ValidationPool.build(model, validation)
    master = np.random.SeedSequence(cfg.seed)
    remaining = [int(i) for i in test.doc_ids]
    reports: list[ClusterReport] = []
    while remaining:
        grow_seq, cluster_seq = master.spawn(2)
        report, alt = grow_cluster(model, nf, test.subset(remaining), pool,
                                   cfg, grow_seq, opts)
        member_docs = [d for d in test.docs if int(d.doc_id) in
                       set(report.members)]
        member_docs.sort(key=lambda d: report.members.index(int(d.doc_id)))
        theta0 = np.array([nf.theta[nf.row(i)] for i in report.members])
        p = cluster_significance(model, member_docs, theta0, report.score,
                                 pool, cfg, cluster_seq, workers, opts)
        report.p_value = p
        report.detected = p < cfg.alpha
        reports.append(report)
        if not report.detected:
            break
        taken = set(report.members)
        remaining = [i for i in remaining if i not in taken]
    return reports
