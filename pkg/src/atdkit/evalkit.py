"""Scoring of detection output against ground truth, plus the two
individual-point baselines (length-normalized null likelihood, and
K-th-nearest-neighbor distance on bag-of-words cosine)."""

from __future__ import annotations

from dataclasses import dataclass
from collections import Counter

import numpy as np
from scipy import sparse

from .corpus import Corpus
from .atd import NullFit


@dataclass
class ClusterEval:
    majority_label: str | None
    recall: float
    precision: float
    f1: float
    auc: float


@dataclass
class PointScore:
    doc_id: int
    score: float
    rank: int


def f1_score(recall: float, precision: float) -> float:
    if recall + precision == 0.0:
        return 0.0
    return 2.0 * recall * precision / (recall + precision)


def _trapezoid(xs, ys) -> float:
    area = 0.0
    for i in range(1, len(xs)):
        area += (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]) / 2.0
    return area


def eval_cluster(members, labels, anomalous_labels) -> ClusterEval:
    """Recall/precision/F1/AUC of one cluster against the majority
    anomalous class among its members.

    ``labels`` maps doc id -> label for the whole test batch (a list
    indexed by id or a dict).  Recall divides by the class's total count
    in the batch; the recall-precision curve is traced in member
    insertion order.
    """
    get = labels.__getitem__
    anom = set(anomalous_labels)
    member_labels = [get(int(i)) for i in members]
    hits = Counter(lab for lab in member_labels if lab in anom)
    if not hits:
        return ClusterEval(None, 0.0, 0.0, 0.0, 0.0)
    majority = max(sorted(hits), key=hits.get)
    all_labels = (labels.values() if isinstance(labels, dict) else labels)
    class_total = sum(1 for lab in all_labels if lab == majority)
    true_in_cluster = hits[majority]
    recall = true_in_cluster / class_total
    precision = true_in_cluster / len(members)
    running_tp = 0
    rs, ps = [], []
    for k, lab in enumerate(member_labels, start=1):
        if lab == majority:
            running_tp += 1
        rs.append(running_tp / class_total)
        ps.append(running_tp / k)
    return ClusterEval(majority, recall, precision,
                       f1_score(recall, precision), _trapezoid(rs, ps))


def point_set_eval(selected_ids, labels, anomalous_labels):
    """(recall, precision, f1) of a selected point set against the union
    of anomalous classes."""
    get = labels.__getitem__
    anom = set(anomalous_labels)
    all_labels = (labels.values() if isinstance(labels, dict) else labels)
    total_true = sum(1 for lab in all_labels if lab in anom)
    tp = sum(1 for i in selected_ids if get(int(i)) in anom)
    recall = tp / total_true if total_true else 0.0
    precision = tp / len(selected_ids) if len(selected_ids) else 0.0
    return recall, precision, f1_score(recall, precision)


def point_auc(ordered_ids, labels, anomalous_labels) -> float:
    """Area under the recall-precision trace of an ordered point list."""
    get = labels.__getitem__
    anom = set(anomalous_labels)
    all_labels = (labels.values() if isinstance(labels, dict) else labels)
    total_true = sum(1 for lab in all_labels if lab in anom)
    if total_true == 0:
        return 0.0
    tp = 0
    rs, ps = [], []
    for k, i in enumerate(ordered_ids, start=1):
        if get(int(i)) in anom:
            tp += 1
        rs.append(tp / total_true)
        ps.append(tp / k)
    return _trapezoid(rs, ps)


def lb_scores(nullfit: NullFit, test: Corpus) -> list[PointScore]:
    """Length-normalized negative null log-likelihood; higher = more
    anomalous.  Ranks break ties by doc id."""
    ids = test.doc_ids
    lengths = test.lengths.astype(np.float64)
    l0 = np.array([nullfit.l0(i) for i in ids])
    scores = -l0 / lengths
    order = np.lexsort((ids, -scores))
    out = [None] * len(ids)
    for rank, k in enumerate(order):
        out[k] = PointScore(int(ids[k]), float(scores[k]), rank)
    return out


def _normalized_rows(corpus: Corpus) -> sparse.csr_matrix:
    doc_ptr, words, counts, _ = corpus._flat()
    mat = sparse.csr_matrix(
        (counts.astype(np.float64), words, doc_ptr),
        shape=(len(corpus), corpus.vocab_size))
    norms = np.sqrt(mat.multiply(mat).sum(axis=1)).A1
    inv = sparse.diags(1.0 / norms)
    return inv @ mat


def nn_scores(train: Corpus, test: Corpus, k: int) -> list[PointScore]:
    """K-th-nearest-neighbor p-values (lower = more anomalous).

    Distance is one minus cosine similarity of bag-of-words vectors; the
    reference radius of a training document excludes itself; a test
    document's p-value is the fraction of training documents with a
    strictly larger radius.
    """
    d_train = len(train)
    if k >= d_train:
        raise ValueError(f"k={k} must be smaller than the training size "
                         f"{d_train}")
    a = _normalized_rows(train)
    b = _normalized_rows(test)
    sim_tt = np.asarray((a @ a.T).todense())
    dist_tt = 1.0 - sim_tt
    np.fill_diagonal(dist_tt, np.inf)
    r_train = np.partition(dist_tt, k - 1, axis=1)[:, k - 1]
    sim_ts = np.asarray((b @ a.T).todense())
    dist_ts = 1.0 - sim_ts
    r_test = np.partition(dist_ts, k - 1, axis=1)[:, k - 1]
    pvals = (r_test[:, None] < r_train[None, :]).sum(axis=1) / d_train
    ids = test.doc_ids
    order = np.lexsort((ids, pvals))
    out = [None] * len(ids)
    for rank, idx in enumerate(order):
        out[idx] = PointScore(int(ids[idx]), float(pvals[idx]), rank)
    return out


def topk_pointset(scores: list[PointScore], n0: int,
                  largest: bool = True) -> list[int]:
    """Doc ids of the n0 most anomalous points; ties break by doc id."""
    if n0 > len(scores):
        raise ValueError("n0 exceeds the number of scored points")
    ids = np.array([s.doc_id for s in scores])
    vals = np.array([s.score for s in scores])
    order = np.lexsort((ids, -vals if largest else vals))
    return [int(ids[i]) for i in order[:n0]]
