"""Command-line surface: `fsc <command>`.

Commands cover the whole pipeline: MFCC extraction, codebook training,
quantization, barycentre computation, threshold calibration, evaluation,
and the softmax regression baseline.  All outputs are written atomically;
every command is deterministic given its inputs and flags.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 internal
invariant failure.  FSC_LOG={error,warn,info,debug} controls logging.
"""

import argparse
import json
import logging
import os
import sys
import urllib.parse
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .baseline import TrainConfig, assess, load_model, save_model, train
from .barycentre import EDB_ALPHABETS, DbaConfig, EdbConfig, dba, edb
from .errors import DataError, FscError, InvariantError
from .features import (KMeansConfig, MfccConfig, extract_mfcc, load_codebook,
                       load_wav, mean_pool, quantize, save_codebook,
                       train_codebook)
from .fewshot import (MODES, REDUCTIONS, REPRESENTATIONS, ScoredItem,
                      build_models, calibrate, calibrate_per_class,
                      evaluate_split, load_sequence, with_prediction)
from .metrics import (balanced_accuracy, confusion, macro_report,
                      report_to_dict)
from .seqdata import (atomic_write_bytes, load_manifest, read_cseq, read_fseq,
                      write_cseq, write_fseq)

log = logging.getLogger(__name__)

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING,
               "warning": logging.WARNING, "info": logging.INFO,
               "debug": logging.DEBUG}

THRESHOLD_KEYS = ("tau", "representation", "mode", "calibration_accuracy",
                  "n_dev_items")


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; this surface
    reserves 2 for data errors, so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _write_json(path, obj):
    payload = json.dumps(obj, indent=2, sort_keys=True).encode() + b"\n"
    atomic_write_bytes(path, payload)


def _write_scores(path, items):
    lines = []
    for it in items:
        lines.append(json.dumps({
            "item_id": it.item_id, "word_class": it.word_class,
            "score": it.score, "true_label": it.true_label,
            "predicted_correct": it.predicted_correct,
        }, sort_keys=True))
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode())


def _mfcc_config(path):
    if path is None:
        return MfccConfig()
    try:
        with open(path, "rb") as fh:
            raw = json.load(fh)
    except (OSError, ValueError) as e:
        raise DataError(f"{path}: unreadable config: {e}") from e
    if not isinstance(raw, dict):
        raise DataError(f"{path}: config must be a JSON object")
    try:
        return MfccConfig(**raw)
    except TypeError as e:
        raise DataError(f"{path}: {e}") from e


def _input_files(directory, suffix):
    root = Path(directory)
    if not root.is_dir():
        raise DataError(f"{directory}: not a directory")
    files = sorted(root.glob(f"*{suffix}"))
    if not files:
        raise DataError(f"{directory}: no {suffix} files")
    return files


def _map_jobs(fn, inputs, jobs):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, inputs))
    return [fn(item) for item in inputs]


def _convert_dir(files, out_dir, suffix, convert, jobs):
    """Run convert(src, dst) for each file, collecting per-file failures
    instead of stopping at the first (operators fix batches in one pass)."""
    os.makedirs(out_dir, exist_ok=True)

    def one(src):
        dst = Path(out_dir) / (src.stem + suffix)
        try:
            convert(src, dst)
            return None
        except FscError as e:
            return f"{src}: {e}"

    failures = [f for f in _map_jobs(one, files, jobs) if f is not None]
    for line in failures:
        print(f"error: {line}", file=sys.stderr)
    print(f"wrote {len(files) - len(failures)} of {len(files)} files "
          f"to {out_dir}")
    return 2 if failures else 0


def cmd_mfcc(args):
    cfg = _mfcc_config(args.config)
    files = _input_files(args.wav_dir, ".wav")

    def convert(src, dst):
        samples, rate = load_wav(src)
        write_fseq(extract_mfcc(samples, rate, cfg), dst)

    return _convert_dir(files, args.out_dir, ".fseq", convert, args.jobs)


def cmd_train_codebook(args):
    files = _input_files(args.fseq_dir, ".fseq")
    seqs = [read_fseq(p) for p in files]
    cfg = KMeansConfig(k=args.k, seed=args.seed, max_iters=args.max_iters)
    codebook = train_codebook(seqs, cfg)
    save_codebook(codebook, args.out)
    print(f"codebook {codebook.size} x {codebook.dim} "
          f"from {sum(len(s) for s in seqs)} frames -> {args.out}")
    return 0


def cmd_quantize(args):
    codebook = load_codebook(args.codebook)
    files = _input_files(args.fseq_dir, ".fseq")

    def convert(src, dst):
        write_cseq(quantize(read_fseq(src), codebook, dedup=args.dedup), dst)

    return _convert_dir(files, args.out_dir, ".cseq", convert, args.jobs)


def cmd_barycentre(args):
    manifest = load_manifest(args.manifest)
    entries = manifest.templates_for(args.word_class)
    if not entries:
        raise DataError(f"no templates for class {args.word_class!r}")
    trace = []
    if args.algo == "dba":
        templates = [read_fseq(e.path) for e in entries]
        result = dba(templates, DbaConfig(max_iters=args.max_iters), trace)
        write_fseq(result, args.out)
    else:
        templates = [read_cseq(e.path) for e in entries]
        result = edb(templates, EdbConfig(alphabet=args.alphabet), trace)
        write_cseq(result, args.out)
    for i, value in enumerate(trace, start=1):
        print(f"iteration {i}: objective {value:.10g}")
    print(f"{args.algo} barycentre of {len(templates)} templates "
          f"({len(result)} frames) -> {args.out}")
    return 0


def cmd_calibrate(args):
    manifest = load_manifest(args.manifest)
    cfg = _mfcc_config(args.mfcc_config)
    models = build_models(manifest, args.representation, args.mode,
                          mfcc_cfg=cfg)
    items, _ = evaluate_split(manifest, "dev", models,
                              representation=args.representation,
                              reduction=args.score_reduction,
                              mfcc_cfg=cfg, jobs=args.jobs)
    threshold = calibrate(items, representation=args.representation)
    _write_json(args.out, {
        "tau": threshold.tau,
        "representation": args.representation,
        "mode": args.mode,
        "calibration_accuracy": threshold.calibration_accuracy,
        "n_dev_items": len(items),
    })
    if args.scores_out:
        _write_scores(args.scores_out, items)
    print(f"tau {threshold.tau:.10g}, balanced accuracy "
          f"{threshold.calibration_accuracy:.4f} on {len(items)} dev items "
          f"-> {args.out}")
    return 0


def _load_threshold_file(path, representation, mode):
    try:
        with open(path, "rb") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as e:
        raise DataError(f"{path}: unreadable threshold file: {e}") from e
    missing = [k for k in THRESHOLD_KEYS if k not in data]
    if missing:
        raise DataError(f"{path}: missing keys {missing}")
    if data["representation"] != representation:
        raise DataError(f"threshold file is for representation "
                        f"{data['representation']!r}, run uses "
                        f"{representation!r}")
    if data["mode"] != mode:
        raise DataError(f"threshold file is for mode {data['mode']!r}, "
                        f"run uses {mode!r}")
    return data


def _safe_name(name):
    return urllib.parse.quote(name, safe="")


def _write_roc_csvs(roc_dir, curves):
    os.makedirs(roc_dir, exist_ok=True)
    for name, curve in curves.items():
        rows = ["fpr,tpr"]
        rows.extend(f"{f!r},{t!r}" for f, t in curve.points)
        atomic_write_bytes(Path(roc_dir) / f"{_safe_name(name)}.csv",
                           ("\n".join(rows) + "\n").encode())


def _per_class_diagnostic(items, representation):
    """Best per-class thresholds tuned on these very items: an oracle
    upper bound on what class-specific tuning could add."""
    per_thr = calibrate_per_class(items, representation=representation)
    out = {}
    for name, thr in per_thr.items():
        group = [it for it in items if it.word_class == name]
        judged = [with_prediction(it, it.score < thr.tau) for it in group]
        out[name] = {
            "tau": thr.tau,
            "balanced_accuracy": balanced_accuracy(confusion(judged)),
        }
    macro = sum(v["balanced_accuracy"] for v in out.values()) / len(out)
    return {"per_class": out, "macro_balanced_accuracy": macro}


def cmd_evaluate(args):
    manifest = load_manifest(args.manifest)
    cfg = _mfcc_config(args.mfcc_config)
    data = _load_threshold_file(args.threshold_file, args.representation,
                                args.mode)
    models = build_models(manifest, args.representation, args.mode,
                          mfcc_cfg=cfg)
    curves = {}
    items, report = evaluate_split(manifest, args.split, models,
                                   tau=data["tau"],
                                   representation=args.representation,
                                   reduction=args.score_reduction,
                                   mfcc_cfg=cfg, jobs=args.jobs,
                                   roc_curves=curves)
    _write_json(args.report, report_to_dict(report))
    if args.roc_dir:
        _write_roc_csvs(args.roc_dir, curves)
    if args.scores_out:
        _write_scores(args.scores_out, items)
    agg = report.aggregate
    print(f"{args.split}: {len(items)} items, macro balanced accuracy "
          f"{agg['macro_balanced_accuracy']:.4f}, macro AUC "
          f"{agg['macro_auc']:.4f} -> {args.report}")
    if args.per_class_thresholds:
        diag = _per_class_diagnostic(items, args.representation)
        diag_path = str(args.report) + ".per-class.json"
        _write_json(diag_path, diag)
        print(f"per-class thresholds: macro balanced accuracy "
              f"{diag['macro_balanced_accuracy']:.4f} "
              f"(single threshold {agg['macro_balanced_accuracy']:.4f}) "
              f"-> {diag_path}")
    return 0


def _pooled_samples(manifest, role, representation, cfg, jobs):
    if representation == "discrete-import":
        raise DataError("the baseline mean-pools continuous features; "
                        "use mfcc or continuous-import")
    entries = manifest.by_role(role)
    if not entries:
        raise DataError(f"split {role!r} is empty")

    def one(e):
        return mean_pool(load_sequence(e.path, representation, cfg)), e

    return _map_jobs(one, entries, jobs)


def cmd_baseline_train(args):
    manifest = load_manifest(args.manifest)
    cfg = _mfcc_config(args.mfcc_config)
    pooled = _pooled_samples(manifest, "template", args.representation,
                             cfg, args.jobs)
    samples = [(vec, e.word_class) for vec, e in pooled]
    train_cfg = TrainConfig(learning_rate=args.learning_rate,
                            epochs=args.epochs, l2=args.l2)
    trace = []
    model = train(samples, train_cfg, trace)
    save_model(model, args.out_prefix, cfg=train_cfg, loss_trace=trace)
    print(f"trained {len(model.classes)} classes on {len(samples)} "
          f"templates, loss {trace[0]:.6g} -> {trace[-1]:.6g} "
          f"over {len(trace) - 1} epochs -> {args.out_prefix}.fseq/.json")
    return 0


def cmd_baseline_evaluate(args):
    manifest = load_manifest(args.manifest)
    cfg = _mfcc_config(args.mfcc_config)
    model = load_model(args.model_prefix)
    pooled = _pooled_samples(manifest, args.split, args.representation,
                             cfg, args.jobs)
    items = []
    for vec, e in pooled:
        ok, score = assess(model, vec, e.word_class)
        items.append(ScoredItem(item_id=e.id, word_class=e.word_class,
                                score=score, true_label=e.label,
                                predicted_correct=ok))
    items.sort(key=lambda it: it.item_id)
    report = macro_report(items, tau=None)
    _write_json(args.report, report_to_dict(report))
    if args.scores_out:
        _write_scores(args.scores_out, items)
    agg = report.aggregate
    print(f"{args.split}: {len(items)} items, macro balanced accuracy "
          f"{agg['macro_balanced_accuracy']:.4f}, micro recall "
          f"{agg['micro_recall']:.4f} -> {args.report}")
    return 0


def _add_common(p, mfcc_config=True, jobs=True):
    if mfcc_config:
        p.add_argument("--mfcc-config", default=None,
                       help="JSON file overriding MFCC settings")
    if jobs:
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel workers (default 1)")


def _add_run_flags(p):
    p.add_argument("--representation", required=True,
                   choices=list(REPRESENTATIONS))
    p.add_argument("--mode", default="all-templates", choices=list(MODES))
    p.add_argument("--score-reduction", default="mean",
                   choices=list(REDUCTIONS))


def build_parser():
    parser = _Parser(prog="fsc",
                     description="few-shot isolated-word assessment")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("mfcc", help="extract MFCC .fseq files from WAVs")
    p.add_argument("--wav-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", default=None,
                   help="JSON file overriding MFCC settings")
    _add_common(p, mfcc_config=False)
    p.set_defaults(func=cmd_mfcc)

    p = sub.add_parser("train-codebook", help="K-means codebook from .fseq files")
    p.add_argument("--fseq-dir", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--out", required=True)
    _add_common(p, mfcc_config=False, jobs=False)
    p.set_defaults(func=cmd_train_codebook)

    p = sub.add_parser("quantize", help="map .fseq files to .cseq codes")
    p.add_argument("--fseq-dir", required=True)
    p.add_argument("--codebook", required=True)
    p.add_argument("--dedup", action="store_true",
                   help="collapse consecutive repeated codes")
    p.add_argument("--out-dir", required=True)
    _add_common(p, mfcc_config=False)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("barycentre", help="aggregate a class's templates")
    p.add_argument("--manifest", required=True)
    p.add_argument("--class", dest="word_class", required=True)
    p.add_argument("--algo", required=True, choices=["dba", "edb"])
    p.add_argument("--max-iters", type=int, default=10,
                   help="dba iteration cap")
    p.add_argument("--alphabet", default="full-codebook",
                   choices=list(EDB_ALPHABETS), help="edb neighbour alphabet")
    p.add_argument("--out", required=True)
    _add_common(p, mfcc_config=False, jobs=False)
    p.set_defaults(func=cmd_barycentre)

    p = sub.add_parser("calibrate", help="choose the global threshold on dev")
    p.add_argument("--manifest", required=True)
    _add_run_flags(p)
    p.add_argument("--out", required=True, help="threshold JSON path")
    p.add_argument("--scores-out", default=None,
                   help="also write dev scores as JSON lines")
    _add_common(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("evaluate", help="score a split and write the report")
    p.add_argument("--manifest", required=True)
    _add_run_flags(p)
    p.add_argument("--split", default="test", choices=["dev", "test"])
    p.add_argument("--threshold-file", required=True)
    p.add_argument("--report", required=True, help="report JSON path")
    p.add_argument("--roc-dir", default=None,
                   help="write per-class ROC CSVs here")
    p.add_argument("--per-class-thresholds", action="store_true",
                   help="also report per-class tuned thresholds (diagnostic)")
    p.add_argument("--scores-out", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline-train",
                       help="train the softmax regression baseline")
    p.add_argument("--manifest", required=True)
    p.add_argument("--representation", required=True,
                   choices=["mfcc", "continuous-import"])
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--l2", type=float, default=1e-3)
    p.add_argument("--out-prefix", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_baseline_train)

    p = sub.add_parser("baseline-evaluate",
                       help="evaluate the baseline on a split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--representation", required=True,
                   choices=["mfcc", "continuous-import"])
    p.add_argument("--model-prefix", required=True)
    p.add_argument("--split", default="test", choices=["dev", "test"])
    p.add_argument("--report", required=True)
    p.add_argument("--scores-out", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_baseline_evaluate)

    return parser


def main(argv=None):
    level = _LOG_LEVELS.get(os.environ.get("FSC_LOG", "warn").lower())
    if level is None:
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse signals usage errors (and --help)
        return int(e.code or 0)
    try:
        return args.func(args)
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InvariantError as e:
        print(f"invariant violated: {e}", file=sys.stderr)
        return 3
    except FscError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # anything unplanned is an internal failure
        log.exception("internal failure")
        print(f"internal error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
