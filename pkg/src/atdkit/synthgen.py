"""Deterministic synthetic benchmark: planted normal and anomalous topics.

Each topic boosts a small salient word set above a uniform floor.  Normal
documents mix one dominant topic with the rest equal; anomalous test
documents split dominance between one anomalous and one normal topic, so
roughly half of each anomalous document still looks normal.  Labels and
salient sets are emitted as sidecar files and never consumed by
detection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, Document, Vocabulary


@dataclass
class SynthSpec:
    vocab_size: int = 3000
    n_normal: int = 10
    n_anomalous: int = 2
    salient_per_topic: int = 30
    train_docs_per_topic: int = 300
    val_docs_per_topic: int = 300
    test_docs_per_topic: int = 200
    anom_docs_per_topic: int = 30
    doc_length: int = 150
    dominant_prop: float = 0.85
    anom_dominant_prop: float = 0.425  # each of the two dominant topics
    salient_boost: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if self.salient_per_topic > self.vocab_size:
            raise ValueError("salient_per_topic exceeds vocabulary size")
        for name in ("vocab_size", "n_normal", "salient_per_topic",
                     "train_docs_per_topic", "val_docs_per_topic",
                     "test_docs_per_topic", "doc_length"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.n_anomalous < 0 or self.anom_docs_per_topic < 0:
            raise ValueError("anomalous counts must be non-negative")
        if not (0.0 < self.dominant_prop < 1.0):
            raise ValueError("dominant_prop must lie in (0, 1)")
        if self.salient_boost <= 1.0:
            raise ValueError("salient_boost must exceed 1")


@dataclass
class GroundTruth:
    """Per-topic salient word sets plus per-document labels.  Normal
    topics are labeled '0'..'K-1'; anomalous topics continue the range."""

    salient_sets: list = field(default_factory=list)  # np.ndarray per topic
    train_labels: list = field(default_factory=list)
    val_labels: list = field(default_factory=list)
    test_labels: list = field(default_factory=list)

    def anomalous_labels(self, spec: SynthSpec) -> list:
        return [str(spec.n_normal + a) for a in range(spec.n_anomalous)]


def _topic_distributions(spec: SynthSpec, rng) -> tuple[np.ndarray, list]:
    k = spec.n_normal + spec.n_anomalous
    floor = 1.0 / (spec.vocab_size
                   + spec.salient_per_topic * (spec.salient_boost - 1.0))
    dists = np.full((k, spec.vocab_size), floor)
    salient = []
    for t in range(k):
        words = np.sort(rng.choice(spec.vocab_size, spec.salient_per_topic,
                                   replace=False))
        dists[t, words] = floor * spec.salient_boost
        salient.append(words)
    return dists, salient


def _docs_from_counts(count_rows: np.ndarray, start_id: int) -> list:
    docs = []
    for i, row in enumerate(count_rows):
        nz = np.flatnonzero(row)
        docs.append(Document(start_id + i, nz.astype(np.int64),
                             row[nz].astype(np.int64)))
    return docs


def _normal_block(spec: SynthSpec, dists: np.ndarray, docs_per_topic: int,
                  rng) -> tuple[list, list]:
    """Documents with one dominant normal topic each, grouped by topic."""
    k = spec.n_normal
    rest = (1.0 - spec.dominant_prop) / (k - 1) if k > 1 else 0.0
    docs: list = []
    labels: list = []
    for t in range(k):
        theta = np.full(k, rest)
        theta[t] = spec.dominant_prop if k > 1 else 1.0
        mixed = theta @ dists[:k]
        counts = rng.multinomial(spec.doc_length, mixed,
                                 size=docs_per_topic)
        docs.extend(_docs_from_counts(counts, len(docs)))
        labels.extend([str(t)] * docs_per_topic)
    return docs, labels


def _anomalous_block(spec: SynthSpec, dists: np.ndarray, start_id: int,
                     rng) -> tuple[list, list]:
    """Documents dominated by one anomalous and one random normal topic."""
    k = spec.n_normal
    docs: list = []
    labels: list = []
    spread = 1.0 - 2.0 * spec.anom_dominant_prop
    for a in range(spec.n_anomalous):
        for _ in range(spec.anom_docs_per_topic):
            partner = int(rng.integers(k))
            theta = np.zeros(k + spec.n_anomalous)
            if k > 1:
                theta[:k] = spread / (k - 1)
            theta[partner] = spec.anom_dominant_prop
            theta[k + a] = spec.anom_dominant_prop
            mixed = theta @ dists
            counts = rng.multinomial(spec.doc_length, mixed)
            docs.extend(_docs_from_counts(counts[None, :],
                                          start_id + len(docs)))
            labels.append(str(k + a))
    return docs, labels


def generate(spec: SynthSpec):
    """Build (train, validation, test, truth); byte-stable in the seed."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    dists, salient = _topic_distributions(spec, rng)
    truth = GroundTruth(salient_sets=salient)

    train_docs, truth.train_labels = _normal_block(
        spec, dists, spec.train_docs_per_topic, rng)
    val_docs, truth.val_labels = _normal_block(
        spec, dists, spec.val_docs_per_topic, rng)
    test_docs, test_labels = _normal_block(
        spec, dists, spec.test_docs_per_topic, rng)
    anom_docs, anom_labels = _anomalous_block(spec, dists, len(test_docs),
                                              rng)
    test_docs.extend(anom_docs)
    truth.test_labels = test_labels + anom_labels

    n = spec.vocab_size
    return (Corpus(tuple(train_docs), n), Corpus(tuple(val_docs), n),
            Corpus(tuple(test_docs), n), truth)


def synthetic_vocabulary(spec: SynthSpec) -> Vocabulary:
    width = len(str(spec.vocab_size - 1))
    return Vocabulary(tuple(f"w{n:0{width}d}" for n in range(spec.vocab_size)))


def write_labels(labels, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for lab in labels:
            fh.write(f"{lab}\n")


def load_labels(path) -> list:
    with Path(path).open("r", encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def write_truth(truth: GroundTruth, path) -> None:
    """One line per topic: label then its salient word ids."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for t, words in enumerate(truth.salient_sets):
            ids = " ".join(str(int(w)) for w in words)
            fh.write(f"topic {t} {ids}\n")


def load_truth(path) -> dict:
    out = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] != "topic":
                raise ValueError(f"{path}: malformed truth line")
            out[parts[1]] = np.array([int(w) for w in parts[2:]])
    return out
