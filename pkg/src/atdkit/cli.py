"""Command-line front end: train / detect / synth / eval.

Every run resolves a seed (flag, then ATD_SEED, then fresh entropy) and
writes a manifest of its resolved flags next to its outputs so the run
can be reproduced byte-for-byte.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .atd import ClusterReport, detect_all, fit_null
from .corpus import (Corpus, DataError, load_corpus, load_vocabulary,
                     write_corpus, write_vocabulary)
from .evalkit import (eval_cluster, lb_scores, nn_scores, point_auc,
                      point_set_eval, topk_pointset)
from .ptm import TrainOpts, read_model, select_order, write_model
from .significance import BootstrapConfig
from .synthgen import (SynthSpec, generate, load_labels, synthetic_vocabulary,
                       write_labels, write_truth)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NONCONVERGED = 4


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get("ATD_SEED")
    if env is not None:
        return int(env)
    return secrets.randbits(32)


def _write_manifest(path: Path, command: str, flags: dict, seed: int) -> None:
    payload = {"command": command, "version": __version__, "seed": seed,
               "flags": {k: (str(v) if isinstance(v, Path) else v)
                         for k, v in flags.items()}}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _train_opts(args) -> TrainOpts:
    return TrainOpts(tol=args.tol, max_iters=args.max_iters)


# -- train --------------------------------------------------------------------


def cmd_train(args) -> int:
    seed = _resolve_seed(args)
    vocab = load_vocabulary(args.vocab)
    corpus = load_corpus(args.corpus, vocab.size)
    opts = _train_opts(args)
    model = select_order(corpus, args.max_topics, seed, opts)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_model(model, out)
    log_lines = [f"SEED value={seed}"]
    for m, bic in model.order_trace:
        log_lines.append(f"BIC m={m} value={bic:.6f}")
    log_lines.append(f"BEST m={model.n_topics} value={model.bic:.6f}")
    if not model.converged:
        log_lines.append("WARN non-convergence at max iterations")
    log_path = out.with_name(out.name + ".log")
    log_path.write_text("\n".join(log_lines) + "\n", encoding="utf-8")
    for line in log_lines:
        print(line)
    _write_manifest(out.with_name(out.name + ".manifest.json"), "train",
                    {"corpus": args.corpus, "vocab": args.vocab,
                     "max_topics": args.max_topics, "out": args.out,
                     "tol": args.tol, "max_iters": args.max_iters}, seed)
    if not model.converged and args.strict:
        print("error: training did not converge", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


# -- detect --------------------------------------------------------------------


def _report_text(reports: list[ClusterReport]) -> str:
    lines = []
    for k, rep in enumerate(reports, start=1):
        occurring = sum(1 for _, _, occ in rep.salient if occ)
        lines.append(
            f"cluster {k} size={len(rep.members)} score={rep.score:.4f} "
            f"p={rep.p_value:.6g} detected={'yes' if rep.detected else 'no'} "
            f"salient={occurring}/{len(rep.salient)}")
        lines.append("  members " + " ".join(str(i) for i in rep.members))
        words = " ".join(f"{w}:{b:.4g}{'' if occ else '*'}"
                         for w, b, occ in rep.salient[:20])
        lines.append(f"  top-salient {words}")
    if not reports:
        lines.append("no clusters")
    return "\n".join(lines) + "\n"


def cmd_detect(args) -> int:
    seed = _resolve_seed(args)
    model = read_model(args.model)
    test = load_corpus(args.test, model.vocab_size)
    validation = load_corpus(args.validation, model.vocab_size)
    cfg = BootstrapConfig(b1=args.b1, b2=args.b2, tau=args.tau,
                          alpha=args.alpha, theta_gate=args.theta_gate,
                          min_cluster=args.min_cluster, seed=seed)
    opts = _train_opts(args)
    reports = detect_all(model, test, validation, cfg, opts,
                         workers=args.workers)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n0 = sum(len(r.members) for r in reports if r.detected)
    payload = {"version": 1, "test_size": len(test), "n0": n0,
               "seed": seed, "clusters": [r.to_dict() for r in reports]}
    (out_dir / "report.json").write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    (out_dir / "report.txt").write_text(_report_text(reports),
                                        encoding="utf-8")
    _write_manifest(out_dir / "manifest.json", "detect",
                    {"model": args.model, "test": args.test,
                     "validation": args.validation, "b1": args.b1,
                     "b2": args.b2, "tau": args.tau, "alpha": args.alpha,
                     "theta_gate": args.theta_gate,
                     "min_cluster": args.min_cluster,
                     "workers": args.workers, "out_dir": args.out_dir,
                     "tol": args.tol, "max_iters": args.max_iters}, seed)
    print(f"SEED value={seed}")
    for k, rep in enumerate(reports, start=1):
        print(f"CLUSTER index={k} size={len(rep.members)} "
              f"p={rep.p_value:.6g} detected={int(rep.detected)}")
    return EXIT_OK


# -- synth ---------------------------------------------------------------------


def cmd_synth(args) -> int:
    seed = _resolve_seed(args)
    try:
        spec = SynthSpec(
            vocab_size=args.vocab_size, n_normal=args.normal_topics,
            n_anomalous=args.anomalous_topics,
            salient_per_topic=args.salient_words,
            train_docs_per_topic=args.train_docs,
            val_docs_per_topic=args.val_docs,
            test_docs_per_topic=args.test_docs,
            anom_docs_per_topic=args.anom_docs,
            doc_length=args.doc_length, dominant_prop=args.dominant_prop,
            salient_boost=args.salient_boost, seed=seed)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    train, validation, test, truth = generate(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_corpus(train, out / "train.dat")
    write_corpus(validation, out / "validation.dat")
    write_corpus(test, out / "test.dat")
    write_vocabulary(synthetic_vocabulary(spec), out / "vocab.txt")
    write_labels(truth.test_labels, out / "labels.txt")
    write_labels(truth.train_labels, out / "labels-train.txt")
    write_labels(truth.val_labels, out / "labels-validation.txt")
    write_truth(truth, out / "truth.txt")
    _write_manifest(out / "manifest.json", "synth",
                    {"out_dir": args.out_dir, "vocab_size": args.vocab_size,
                     "normal_topics": args.normal_topics,
                     "anomalous_topics": args.anomalous_topics,
                     "salient_words": args.salient_words,
                     "train_docs": args.train_docs,
                     "val_docs": args.val_docs, "test_docs": args.test_docs,
                     "anom_docs": args.anom_docs,
                     "doc_length": args.doc_length,
                     "dominant_prop": args.dominant_prop,
                     "salient_boost": args.salient_boost}, seed)
    print(f"SEED value={seed}")
    print(f"WROTE train={len(train)} validation={len(validation)} "
          f"test={len(test)}")
    return EXIT_OK


# -- eval ----------------------------------------------------------------------


def cmd_eval(args) -> int:
    report = json.loads(Path(args.report).read_text(encoding="utf-8"))
    labels = load_labels(args.labels)
    if len(labels) != report["test_size"]:
        raise DataError(
            f"label file has {len(labels)} lines but the report covers "
            f"{report['test_size']} test documents")
    anom = [s.strip() for s in args.anomalous_labels.split(",") if s.strip()]
    reports = [ClusterReport.from_dict(d) for d in report["clusters"]]
    lines = ["index\tsize\tlabel\trecall\tprecision\tp-value\tf1\tauc"
             "\tsalient-occurring\tsalient-total"]
    evals = []
    for k, rep in enumerate(reports, start=1):
        ev = eval_cluster(rep.members, labels, anom)
        occurring = sum(1 for _, _, occ in rep.salient if occ)
        if rep.detected:
            evals.append(ev)
        lab = ev.majority_label if rep.detected and ev.majority_label else "-"
        rec = f"{ev.recall:.3f}" if rep.detected else "-"
        prec = f"{ev.precision:.3f}" if rep.detected else "-"
        f1s = f"{ev.f1:.3f}" if rep.detected else "-"
        aucs = f"{ev.auc:.3f}" if rep.detected else "-"
        lines.append(f"{k}\t{len(rep.members)}\t{lab}\t{rec}\t{prec}\t"
                     f"{rep.p_value:.6g}\t{f1s}\t{aucs}\t{occurring}\t"
                     f"{len(rep.salient)}")
    if evals:
        mean_f1 = sum(e.f1 for e in evals) / len(evals)
        mean_auc = sum(e.auc for e in evals) / len(evals)
        lines.append(f"mean\t-\t-\t-\t-\t-\t{mean_f1:.3f}\t{mean_auc:.3f}"
                     f"\t-\t-")
    detected_members = [i for r in reports if r.detected for i in r.members]
    n0 = len(detected_members)
    if n0:
        rec, prec, f1v = point_set_eval(detected_members, labels, anom)
        auc = point_auc(detected_members, labels, anom)
        lines.append(f"POINT method=atd n0={n0} recall={rec:.3f} "
                     f"precision={prec:.3f} f1={f1v:.3f} auc={auc:.3f}")
    if args.baseline:
        lines.extend(_baseline_lines(args, labels, anom, n0))
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        _write_manifest(out.with_name(out.name + ".manifest.json"), "eval",
                        {"report": args.report, "labels": args.labels,
                         "anomalous_labels": args.anomalous_labels,
                         "baseline": args.baseline, "k": args.k,
                         "out": args.out}, 0)
    return EXIT_OK


def _baseline_lines(args, labels, anom, n0: int) -> list[str]:
    if n0 == 0:
        return ["POINT baseline skipped: no detected clusters"]
    if args.baseline == "lb":
        if not (args.model and args.test):
            raise DataError("--baseline lb needs --model and --test")
        model = read_model(args.model)
        test = load_corpus(args.test, model.vocab_size)
        nf = fit_null(model, test)
        scores = lb_scores(nf, test)
        chosen = topk_pointset(scores, n0, largest=True)
        ordered = sorted(scores, key=lambda s: s.rank)
    elif args.baseline == "nn":
        if not (args.train and args.test and args.vocab):
            raise DataError("--baseline nn needs --train, --test and --vocab")
        vocab = load_vocabulary(args.vocab)
        train = load_corpus(args.train, vocab.size)
        test = load_corpus(args.test, vocab.size)
        scores = nn_scores(train, test, args.k)
        chosen = topk_pointset(scores, n0, largest=False)
        ordered = sorted(scores, key=lambda s: s.rank)
    else:
        raise DataError(f"unknown baseline {args.baseline!r}")
    rec, prec, f1v = point_set_eval(chosen, labels, anom)
    auc = point_auc([s.doc_id for s in ordered[:n0]], labels, anom)
    return [f"POINT method={args.baseline} n0={n0} recall={rec:.3f} "
            f"precision={prec:.3f} f1={f1v:.3f} auc={auc:.3f}"]


# -- parser ---------------------------------------------------------------------


def _add_common_train_flags(p) -> None:
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atdkit",
        description="Train a parsimonious topic model on normal documents "
                    "and discover anomalous document clusters in a test "
                    "batch with bootstrap significance tests.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="model-order search and training")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--max-topics", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true",
                   help="exit 4 if training hits the iteration cap")
    _add_common_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="discover anomalous clusters")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--validation", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--b1", type=int, default=99)
    p.add_argument("--b2", type=int, default=999)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--theta-gate", type=float, default=0.2)
    p.add_argument("--min-cluster", type=int, default=4)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    _add_common_train_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("synth", help="generate the synthetic benchmark")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--vocab-size", type=int, default=3000)
    p.add_argument("--normal-topics", type=int, default=10)
    p.add_argument("--anomalous-topics", type=int, default=2)
    p.add_argument("--salient-words", type=int, default=30)
    p.add_argument("--train-docs", type=int, default=300)
    p.add_argument("--val-docs", type=int, default=300)
    p.add_argument("--test-docs", type=int, default=200)
    p.add_argument("--anom-docs", type=int, default=30)
    p.add_argument("--doc-length", type=int, default=150)
    p.add_argument("--dominant-prop", type=float, default=0.85)
    p.add_argument("--salient-boost", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score a detection report")
    p.add_argument("--report", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--anomalous-labels", required=True,
                   help="comma-separated anomalous label tokens")
    p.add_argument("--baseline", choices=["lb", "nn"], default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--test", default=None)
    p.add_argument("--train", default=None)
    p.add_argument("--vocab", default=None)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
