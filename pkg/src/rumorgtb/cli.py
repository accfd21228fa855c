"""Command-line front end.

Exit status: 0 success, 1 internal error, 2 usage error, 3 data error.
Every command that writes an output file also writes ``<out>.manifest.json``
recording the resolved configuration, input digests and elapsed time.
"""

import argparse
import csv
import hashlib
import json
import logging
import sys
import time

from . import __version__
from .boosting import TrainConfig, train_detector
from .data import load_dataset
from .errors import DataError, SchemaMismatch
from .evaluation import (deadline_sweep, hyperparam_sweep, kfold_cv, summary_line,
                         write_cv_table, write_sweep_table)
from .features import SCHEMAS, format_deadline, materialize, parse_deadline, write_feature_table
from .persistence import load_model, save_model
from .selection import select_features, write_importance_table

log = logging.getLogger("rumorgtb")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


def _deadline(text):
    try:
        return parse_deadline(text)
    except DataError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _rate(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"learning rate must be in (0, 1], got {v}")
    return v


def _list_of(conv):
    def parse(text):
        items = [t for t in text.split(",") if t.strip()]
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        return [conv(t.strip()) for t in items]
    return parse


def _folds(text):
    v = _positive_int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("need at least 2 folds")
    return v


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return p


def _train_flags():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("boosting")
    g.add_argument("--trees", type=_positive_int, default=500,
                   help="base detectors per class (default 500)")
    g.add_argument("--max-depth", type=_positive_int, default=6,
                   help="maximum tree depth (default 6)")
    g.add_argument("--learning-rate", type=_rate, default=0.2,
                   help="learning rate in (0, 1] (default 0.2)")
    g.add_argument("--min-region", type=_positive_int, default=2,
                   help="smallest node that may be split (default 2)")
    return p


def _deadline_flag(p):
    p.add_argument("--deadline", type=_deadline, default=float("inf"),
                   help="hours after posting, or 'all' for full history (default all)")


def _schema_flag(p, default="selected"):
    p.add_argument("--schema", choices=sorted(SCHEMAS), default=default,
                   help=f"feature schema (default {default})")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rumorgtb", description="Gradient tree boosting rumor detector.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    common, train = _common(), _train_flags()

    p = sub.add_parser("extract", parents=[common], help="write a feature table")
    p.add_argument("data", help="event dataset (JSON lines)")
    _deadline_flag(p)
    _schema_flag(p)
    p.add_argument("-o", "--out", required=True, help="output CSV path")

    p = sub.add_parser("train", parents=[common, train], help="train and save a model")
    p.add_argument("data", help="event dataset (JSON lines)")
    _deadline_flag(p)
    _schema_flag(p)
    p.add_argument("-o", "--out", required=True, help="output model path")

    p = sub.add_parser("predict", parents=[common], help="score events with a model")
    p.add_argument("model", help="model file written by train")
    p.add_argument("data", help="event dataset (JSON lines)")
    _deadline_flag(p)
    _schema_flag(p)
    p.add_argument("-o", "--out", required=True, help="output CSV path")

    p = sub.add_parser("select", parents=[common, train],
                       help="rank features by split count")
    p.add_argument("data", help="event dataset (JSON lines)")
    p.add_argument("--candidates", choices=sorted(SCHEMAS), default="all34",
                   help="candidate feature set (default all34)")
    p.add_argument("--keep", type=_positive_int, default=23,
                   help="number of features to select (default 23)")
    _deadline_flag(p)
    p.add_argument("-o", "--out", required=True, help="output CSV path")

    p = sub.add_parser("evaluate", parents=[common, train],
                       help="repeated stratified k-fold cross-validation")
    p.add_argument("data", help="event dataset (JSON lines)")
    _deadline_flag(p)
    _schema_flag(p)
    p.add_argument("--folds", type=_folds, default=10, help="number of folds k (default 10)")
    p.add_argument("--repeats", type=_positive_int, default=10,
                   help="CV repetitions, seeded seed+r (default 10)")
    p.add_argument("--jobs", type=int, default=None, help="parallel fold workers")
    p.add_argument("-o", "--out", required=True, help="output CSV path")

    p = sub.add_parser("sweep", parents=[common, train],
                       help="cross-validate over deadlines or a hyperparameter grid")
    p.add_argument("data", help="event dataset (JSON lines)")
    axis = p.add_mutually_exclusive_group(required=True)
    axis.add_argument("--deadlines", type=_list_of(_deadline),
                      help="comma-separated deadlines in hours, e.g. 0,4,8,12,24")
    axis.add_argument("--grid", nargs=3, metavar=("TREES", "DEPTHS", "RATES"),
                      help="comma-separated lists, e.g. --grid 20,100,200 5 0.2")
    _deadline_flag(p)
    _schema_flag(p)
    p.add_argument("--folds", type=_folds, default=10, help="number of folds k (default 10)")
    p.add_argument("--repeats", type=_positive_int, default=10,
                   help="CV repetitions, seeded seed+r (default 10)")
    p.add_argument("--jobs", type=int, default=None, help="parallel fold workers")
    p.add_argument("-o", "--out", required=True, help="output CSV path")
    return parser


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _config(args):
    return TrainConfig(trees=args.trees, max_depth=args.max_depth,
                       learning_rate=args.learning_rate,
                       min_region_size=args.min_region, seed=args.seed)


def _resolved(args):
    out = {}
    for k, v in sorted(vars(args).items()):
        if k == "deadline":
            v = format_deadline(v)
        elif k == "deadlines" and v is not None:
            v = [format_deadline(t) for t in v]
        out[k] = v
    return out


def write_manifest(args, inputs, outputs, started, extra=None):
    manifest = {
        "command": args.command,
        "config": _resolved(args),
        "inputs": {p: _digest(p) for p in inputs},
        "seed": args.seed,
        "elapsed_seconds": round(time.perf_counter() - started, 3),
        "outputs": list(outputs),
    }
    if extra:
        manifest.update(extra)
    path = f"{args.out}.manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def cmd_extract(args, started):
    fm = materialize(load_dataset(args.data), args.deadline, args.schema)
    write_feature_table(fm, args.out)
    write_manifest(args, [args.data], [args.out], started)
    log.info("wrote %d rows x %d features to %s", fm.n, fm.schema.total, args.out)


def cmd_train(args, started):
    fm = materialize(load_dataset(args.data), args.deadline, args.schema)
    model = train_detector(fm, _config(args))
    save_model(model, args.out)
    traces = {"rumor": model.loss_trace_rumor_, "nonrumor": model.loss_trace_nonrumor_}
    extra = {
        "training_mse": {k: {"first": t[0], "last": t[-1]} for k, t in traces.items()},
        "fit_seconds": round(model.fit_seconds_, 3),
    }
    write_manifest(args, [args.data], [args.out], started, extra)
    log.info("trained on %d events (%d features) in %.1fs; final training MSE %.3g",
             fm.n, fm.schema.total, model.fit_seconds_, model.loss_trace_rumor_[-1])


def cmd_predict(args, started):
    model = load_model(args.model)
    fm = materialize(load_dataset(args.data), args.deadline, args.schema)
    if model.feature_names is not None and list(model.feature_names) != list(fm.schema.names):
        raise SchemaMismatch(
            f"model expects features {list(model.feature_names)}, "
            f"extraction produced {list(fm.schema.names)}")
    proba = model.predict_proba(fm.values)
    labels = model.predict(fm.values)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["event_id", "p_rumor", "p_nonrumor", "label"])
        for eid, (pr, pn), lab in zip(fm.event_ids, proba, labels):
            w.writerow([eid, repr(float(pr)), repr(float(pn)), lab.value])
    write_manifest(args, [args.model, args.data], [args.out], started)
    log.info("scored %d events -> %s", fm.n, args.out)


def cmd_select(args, started):
    fm = materialize(load_dataset(args.data), args.deadline, args.candidates)
    report, selected = select_features(fm, _config(args), args.keep)
    write_importance_table(report, args.out, selected)
    names = [fm.schema.names[i] for i in selected]
    write_manifest(args, [args.data], [args.out], started,
                   {"selected": names, "total_splits": report.total_splits})
    if not args.quiet:
        print("selected: " + ",".join(names))


def cmd_evaluate(args, started):
    cv = kfold_cv(load_dataset(args.data), args.deadline, _config(args),
                  args.folds, args.repeats, args.seed, args.schema, args.jobs)
    write_cv_table(cv, args.out)
    write_manifest(args, [args.data], [args.out], started,
                   {"mean": cv.mean, "std": cv.std})
    if not args.quiet:
        print(summary_line(cv))


def cmd_sweep(args, started):
    d = load_dataset(args.data)
    cfg = _config(args)
    if args.deadlines is not None:
        sweep = deadline_sweep(d, args.deadlines, cfg, args.folds, args.repeats,
                               args.seed, args.schema, args.jobs)
    else:
        try:
            grid = {"trees": _list_of(_positive_int)(args.grid[0]),
                    "max_depth": _list_of(_positive_int)(args.grid[1]),
                    "learning_rate": _list_of(_rate)(args.grid[2])}
        except argparse.ArgumentTypeError as exc:
            raise _UsageError(f"--grid: {exc}") from None
        sweep = hyperparam_sweep(d, grid, args.deadline, args.folds, args.repeats,
                                 args.seed, cfg, args.schema, args.jobs)
    write_sweep_table(sweep, args.out)
    write_manifest(args, [args.data], [args.out], started, {"points": len(sweep.rows)})
    if not args.quiet:
        for row in sweep.rows:
            print(f"deadline={row['deadline']} trees={row['trees']} "
                  f"max_depth={row['max_depth']} learning_rate={row['learning_rate']} "
                  f"accuracy={row['accuracy']:.4f}")


class _UsageError(Exception):
    pass


COMMANDS = {
    "extract": cmd_extract,
    "train": cmd_train,
    "predict": cmd_predict,
    "select": cmd_select,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr, force=True)
    started = time.perf_counter()
    try:
        COMMANDS[args.command](args, started)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rumorgtb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"rumorgtb: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"rumorgtb: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
