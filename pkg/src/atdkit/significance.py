"""Nonparametric bootstrap tests for candidate documents and clusters.

Bootstrap documents are length-matched resamples of the validation
document whose null-model topic proportions are most similar (cosine) to
the target's.  The per-document test compares the new topic's empirical
proportion in the candidate against proportions in bootstrap documents;
the cluster test compares likelihood-ratio scores of bootstrap clusters
against the candidate cluster's score.  Statistics are counting-based,
so they always lie in [1/(B+1), 1].

Replicates derive private RNG streams from the master seed by
counter-based spawning, so results are bitwise identical no matter how
many workers run them.
"""

from __future__ import annotations

import logging
import multiprocessing
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, DataError, Document
from .ptm import PtmModel, TrainOpts, infer, infer_matrix

RHO_DECIMALS = 12  # similarity ties compared after rounding, for stability


@dataclass
class BootstrapConfig:
    """Replicate counts, thresholds, and the master seed."""

    b1: int = 99          # replicates for the per-document test
    b2: int = 999         # replicates for the cluster test
    tau: float = 0.05     # document-test threshold on t
    alpha: float = 0.05   # cluster significance level
    theta_gate: float = 0.2   # run the document test only below this
    min_cluster: int = 4      # and only once the cluster has this many docs
    seed: int = 0

    def __post_init__(self):
        if self.b1 < 1 or self.b2 < 1:
            raise ValueError("replicate counts must be >= 1")
        for name in ("tau", "alpha", "theta_gate"):
            val = getattr(self, name)
            if not (0.0 < val <= 1.0):  # 1.0 is degenerate but legal
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.min_cluster < 1:
            raise ValueError("min_cluster must be >= 1")
        # legal but degenerate: the counting floor can never cross the
        # threshold, so the test in question loses all rejection power
        if 1.0 / (self.b1 + 1) >= self.tau:
            logging.getLogger(__name__).warning(
                "b1=%d cannot produce t below tau=%g; the document test "
                "will never reject", self.b1, self.tau)
        if 1.0 / (self.b2 + 1) >= self.alpha:
            logging.getLogger(__name__).warning(
                "b2=%d cannot produce p below alpha=%g; no cluster can "
                "be significant", self.b2, self.alpha)


@dataclass
class BootstrapDoc:
    doc: Document
    source_doc: int  # validation doc id the words were resampled from


@dataclass
class ValidationPool:
    """Validation corpus with its null-model topic proportions."""

    corpus: Corpus
    theta0: np.ndarray  # (D_v, M)

    @classmethod
    def build(cls, model: PtmModel, validation: Corpus) -> "ValidationPool":
        if len(validation) == 0:
            raise DataError("empty validation corpus")
        fit = infer(model, validation)
        return cls(validation, fit.theta)


def cosine_theta(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two non-negative proportion vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("proportion vectors differ in length")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("zero proportion vector")
    return float(a @ b / (na * nb))


def gen_bootstrap_doc(target: Document, target_theta0: np.ndarray,
                      pool: ValidationPool, rng: np.random.Generator,
                      doc_id: int = 0) -> BootstrapDoc:
    """Resample a document of the target's length from the most similar
    validation document (cosine over null proportions; ties uniform)."""
    if len(pool.corpus) == 0:
        raise DataError("empty validation pool")
    t = np.asarray(target_theta0, dtype=np.float64)
    tn = np.linalg.norm(t)
    if tn == 0.0:
        raise ValueError("target has a zero proportion vector")
    norms = np.linalg.norm(pool.theta0, axis=1)
    rho = (pool.theta0 @ t) / (norms * tn)
    rho = np.round(rho, RHO_DECIMALS)
    ties = np.flatnonzero(rho == rho.max())
    src = pool.corpus.docs[int(ties[rng.integers(len(ties))])]
    probs = src.counts / src.counts.sum()
    draw = rng.multinomial(target.length, probs)
    nz = draw > 0
    return BootstrapDoc(Document(doc_id, src.word_ids[nz],
                                 draw[nz].astype(np.int64)), src.doc_id)


def empirical_proportion(topic_probs: np.ndarray, theta_row: np.ndarray,
                         doc: Document, new_col: int | None = None) -> float:
    """Fraction of the document's tokens hard-assigned (argmax posterior)
    to the given topic; ties break toward lower topic indices."""
    if new_col is None:
        new_col = topic_probs.shape[0] - 1
    post = theta_row[:, None] * topic_probs[:, doc.word_ids]
    winners = np.argmax(post, axis=0)
    return float(doc.counts[winners == new_col].sum() / doc.length)


def _bootstrap_batch(targets, theta0_rows, pool: ValidationPool,
                     rng: np.random.Generator) -> Corpus:
    docs = []
    for i, (target, th) in enumerate(zip(targets, theta0_rows)):
        docs.append(gen_bootstrap_doc(target, th, pool, rng, doc_id=i).doc)
    return Corpus(tuple(docs), pool.corpus.vocab_size)


def doc_significance(alt, d_star: Document, d_star_theta0: np.ndarray,
                     pool: ValidationPool, cfg: BootstrapConfig,
                     seed_seq: np.random.SeedSequence,
                     opts: TrainOpts | None = None) -> float:
    """Counting statistic t for the new topic's significance in d_star;
    the caller treats d_star as significant iff t >= cfg.tau."""
    opts = opts or TrainOpts()
    P = alt.topic_probs()
    new_col = P.shape[0] - 1
    single = Corpus((d_star,), pool.corpus.vocab_size)
    # proportions only, matching how candidates are scored during growth
    fit_star = infer_matrix(P, single, pinned_col=new_col, tol=opts.tol,
                            max_iters=opts.max_iters, fit_presence=False)
    theta_hat_star = empirical_proportion(P, fit_star.theta[0], d_star,
                                          new_col)
    rng = np.random.default_rng(seed_seq)
    boot = _bootstrap_batch([d_star] * cfg.b1, [d_star_theta0] * cfg.b1,
                            pool, rng)
    fit_b = infer_matrix(P, boot, pinned_col=new_col, tol=opts.tol,
                         max_iters=opts.max_iters, fit_presence=False)
    below = sum(
        1 for i, doc in enumerate(boot.docs)
        if empirical_proportion(P, fit_b.theta[i], doc, new_col)
        < theta_hat_star)
    return (below + 1) / (cfg.b1 + 1)


def _one_bootstrap_score(model: PtmModel, pool: ValidationPool, targets,
                         theta0_rows, opts: TrainOpts,
                         seed_seq: np.random.SeedSequence) -> float:
    """Score of one bootstrap cluster: generate a matched document per
    member, then fit the null and alternative models on it from scratch."""
    from .atd import fit_alternative

    rng = np.random.default_rng(seed_seq)
    boot = _bootstrap_batch(targets, theta0_rows, pool, rng)
    null_fit = infer(model, boot, tol=opts.tol, max_iters=opts.max_iters)
    alt = fit_alternative(model, boot, null_fit.v, opts=opts)
    return float(alt.l1_members.sum() - null_fit.loglik.sum())


_CLUSTER_PAYLOAD = None


def _init_cluster_worker(payload):
    global _CLUSTER_PAYLOAD
    _CLUSTER_PAYLOAD = payload


def _cluster_replicate(seed_seq) -> float:
    model, pool, targets, theta0_rows, opts = _CLUSTER_PAYLOAD
    return _one_bootstrap_score(model, pool, targets, theta0_rows, opts,
                                seed_seq)


def cluster_significance(model: PtmModel, member_docs, member_theta0,
                         score: float, pool: ValidationPool,
                         cfg: BootstrapConfig,
                         seed_seq: np.random.SeedSequence,
                         workers: int = 1,
                         opts: TrainOpts | None = None) -> float:
    """Empirical p-value of a cluster's anomaly score against bootstrap
    clusters; the cluster is anomalous iff p < cfg.alpha.

    Replicates get pre-spawned RNG streams, so the p-value is identical
    for any worker count.
    """
    opts = opts or TrainOpts()
    children = seed_seq.spawn(cfg.b2)
    if workers > 1:
        payload = (model, pool, list(member_docs), np.asarray(member_theta0),
                   opts)
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers, initializer=_init_cluster_worker,
                      initargs=(payload,)) as pool_proc:
            scores = pool_proc.map(_cluster_replicate, children,
                                   chunksize=max(1, cfg.b2 // (workers * 8)))
    else:
        scores = [_one_bootstrap_score(model, pool, member_docs,
                                       member_theta0, opts, child)
                  for child in children]
    exceed = sum(1 for s in scores if s > score)
    return (exceed + 1) / (cfg.b2 + 1)
