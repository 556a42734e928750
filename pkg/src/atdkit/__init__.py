"""Anomalous-topic discovery toolkit.

Train a parsimonious topic model on a corpus of normal documents, then
find statistically significant anomalous clusters of documents (and each
cluster's salient-word subset) in a test batch via greedy cluster growth
and nonparametric bootstrap tests.
"""

__version__ = "0.1.0"

from .corpus import (Corpus, DataError, Document, Vocabulary, load_corpus,
                     load_vocabulary, write_corpus, write_vocabulary)
from .ptm import (PtmModel, PtmParams, PtmStructure, Responsibilities,
                  TrainOpts, bic_value, cost, e_step, infer, log_likelihood,
                  m_step_beta, m_step_theta, read_model, select_order,
                  shared_model, sweep_switches, train, word_prob, write_model)
from .atd import (AltModel, ClusterReport, NullFit, candidate_next,
                  detect_all, fit_alternative, fit_null, grow_cluster,
                  salient_words, seed_document)
from .significance import (BootstrapConfig, BootstrapDoc, ValidationPool,
                           cluster_significance, cosine_theta,
                           doc_significance, empirical_proportion,
                           gen_bootstrap_doc)
from .synthgen import GroundTruth, SynthSpec, generate
from .evalkit import (ClusterEval, PointScore, eval_cluster, lb_scores,
                      nn_scores, topk_pointset)

__all__ = [
    "Corpus", "DataError", "Document", "Vocabulary", "load_corpus",
    "load_vocabulary", "write_corpus", "write_vocabulary",
    "PtmModel", "PtmParams", "PtmStructure", "Responsibilities", "TrainOpts",
    "bic_value", "cost", "e_step", "infer", "log_likelihood", "m_step_beta",
    "m_step_theta", "read_model", "select_order", "shared_model",
    "sweep_switches", "train", "word_prob", "write_model",
    "AltModel", "ClusterReport", "NullFit", "candidate_next", "detect_all",
    "fit_alternative", "fit_null", "grow_cluster", "salient_words",
    "seed_document",
    "BootstrapConfig", "BootstrapDoc", "ValidationPool",
    "cluster_significance", "cosine_theta", "doc_significance",
    "empirical_proportion", "gen_bootstrap_doc",
    "GroundTruth", "SynthSpec", "generate",
    "ClusterEval", "PointScore", "eval_cluster", "lb_scores", "nn_scores",
    "topk_pointset",
]
