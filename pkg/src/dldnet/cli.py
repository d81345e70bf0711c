"""Command-line front end: simulate, tune, train, evaluate, importance, predict.

Exit status is 0 on success, 1 on a runtime failure and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path


from dldnet import __version__
from dldnet._io import atomic_write_json, atomic_write_text
from dldnet.dataset import FEATURE_ORDER, Dataset, SplitSpec, load_cohort, split_train_test, write_cohort
from dldnet.importance import importance_report
from dldnet.metrics import mean_roc, metrics_report, roc_curve
from dldnet.network import Hyperparams, TrainedModel, label_for, train
from dldnet.report import band_svg
from dldnet.synth import SynthSpec, default_paper_like_spec, generate_with_flags
from dldnet.tuner import FoldScores, GridSpec, grid_search

log = logging.getLogger("dldnet")

U64_MAX = 2**64 - 1


class UsageError(Exception):
    pass


# -- argument types --------------------------------------------------------


def u64(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2^64 - 1], got {value}")
    return value


def int_list(text: str) -> list[int]:
    """Parse ``"1..10"``, ``"1,2,8"`` or a mix such as ``"1..3,8"``."""
    out: list[int] = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def float_list(text: str) -> list[float]:
    try:
        out = [float(p) for p in str(text).split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def fraction(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return value


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


# -- helpers ---------------------------------------------------------------


def _out_dir(args) -> Path:
    if not args.out:
        raise UsageError(f"{args.command}: --out <dir> is required")
    path = Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _resolved(args) -> dict:
    skip = {"func", "config"}
    cfg = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        cfg[key] = list(value) if isinstance(value, tuple) else value
    return {"dldnet_version": __version__, **cfg}


def _write_config(args, path: Path) -> None:
    atomic_write_json(path, _resolved(args))


def _split(args, ds: Dataset) -> tuple[Dataset, Dataset]:
    return split_train_test(ds, SplitSpec(train_fraction=args.train_fraction, seed=args.seed))


def _check_features(model: TrainedModel) -> None:
    if tuple(model.feature_order) != FEATURE_ORDER:
        raise ValueError(
            f"model feature_order {list(model.feature_order)} does not match the cohort schema {list(FEATURE_ORDER)}"
        )


# -- commands --------------------------------------------------------------


def cmd_simulate(args) -> None:
    if args.output:
        csv_path = Path(args.output)
        config_path = csv_path.with_name(csv_path.stem + ".config.json")
    elif args.out:
        csv_path = _out_dir(args) / "cohort.csv"
        config_path = Path(args.out) / "run_config.json"
    else:
        raise UsageError("simulate: an output path is required (-o FILE or --out DIR)")
    spec = SynthSpec.from_json(args.spec) if args.spec else default_paper_like_spec()
    if args.n_per_class is not None:
        spec = SynthSpec(args.n_per_class, spec.features, spec.seed)
    spec = spec.with_seed(args.seed)
    ds, clamped = generate_with_flags(spec)
    write_cohort(ds, csv_path)
    cfg = _resolved(args)
    cfg["synth_spec"] = spec.to_dict()
    cfg["clamped"] = list(clamped)
    atomic_write_json(config_path, cfg)
    log.info("wrote %d samples to %s", len(ds), csv_path)


def cmd_tune(args) -> None:
    out = _out_dir(args)
    ds = load_cohort(args.cohort)
    train_ds, test_ds = _split(args, ds)
    grid = GridSpec(
        sizes=tuple(args.sizes),
        decays=tuple(args.decays),
        k=args.k,
        seed=args.seed,
        maxit=args.maxit,
        max_weights=args.max_weights,
    )
    result = grid_search(train_ds, grid)
    best = result.cell(*result.best)
    atomic_write_text(out / "grid.csv", result.to_csv())
    atomic_write_json(out / "cells.json", [c.to_dict() for c in result.cells])
    atomic_write_json(
        out / "best.json",
        {
            "size": best.size,
            "decay": best.decay,
            "accuracy": best.accuracy,
            "accuracy_sd": best.accuracy_sd,
            "kappa": best.kappa,
            "kappa_sd": best.kappa_sd,
        },
    )
    atomic_write_json(out / "folds.json", result.folds.to_dict())
    atomic_write_json(
        out / "fold_scores.json",
        {"size": best.size, "decay": best.decay, "folds": [f.to_dict() for f in best.fold_scores]},
    )
    atomic_write_json(out / "split.json", {"train": train_ds.ids, "test": test_ds.ids})
    _write_config(args, out / "run_config.json")
    log.info("best size=%d decay=%g accuracy=%.3f kappa=%.3f", best.size, best.decay, best.accuracy, best.kappa)


def cmd_train(args) -> None:
    out = _out_dir(args)
    size, decay = args.size, args.decay
    if args.best:
        with open(args.best, encoding="utf-8") as fh:
            chosen = json.load(fh)
        size, decay = int(chosen["size"]), float(chosen["decay"])
    args.size, args.decay = size, decay
    hp = Hyperparams(size=size, decay=decay, maxit=args.maxit, max_weights=args.max_weights)
    hp.check(len(FEATURE_ORDER))
    ds = load_cohort(args.cohort)
    train_ds, test_ds = _split(args, ds)
    model = train(train_ds, hp, seed=args.seed)
    model.save(out / "model.json")
    write_cohort(train_ds, out / "train.csv")
    write_cohort(test_ds, out / "test.csv")
    _write_config(args, out / "run_config.json")
    log.info("trained size=%d decay=%g, final loss %.6g after %d iterations",
             size, decay, model.loss_trace[-1], len(model.loss_trace) - 1)


def _fold_curves(folds: list[FoldScores], family: str) -> tuple[list, int]:
    curves, skipped = [], 0
    for f in folds:
        scores = getattr(f, f"{family}_scores")
        labels = getattr(f, f"{family}_labels")
        if len(set(labels)) < 2:
            skipped += 1
            continue
        curves.append(roc_curve(scores, labels))
    return curves, skipped


def cmd_evaluate(args) -> None:
    out = _out_dir(args)
    model = TrainedModel.load(args.model)
    _check_features(model)
    ds = load_cohort(args.data)
    scores = model.predict_proba(ds.X)
    report = metrics_report(ds.labels, scores.tolist())
    atomic_write_json(out / "metrics.json", report.to_dict())
    if report.auc is not None:
        atomic_write_text(out / "roc.csv", roc_curve(scores.tolist(), ds.labels).to_csv())
    if args.folds:
        with open(args.folds, encoding="utf-8") as fh:
            payload = json.load(fh)
        folds = [FoldScores.from_dict(d) for d in payload["folds"]]
        bands = {}
        summary = {}
        for family in ("train", "test"):
            curves, skipped = _fold_curves(folds, family)
            if not curves:
                raise ValueError(f"no {family} fold contains both classes; cannot build a ROC band")
            band = mean_roc(curves)
            bands[family] = band
            atomic_write_text(out / f"roc_band_{family}.csv", band.to_csv())
            summary[family] = {
                "mean_auc": band.mean_auc,
                "sd_auc": band.sd_auc,
                "n_curves": band.n_curves,
                "skipped_single_class_folds": skipped,
                "flags": list(band.flags),
            }
        atomic_write_json(out / "roc_bands.json", summary)
        atomic_write_text(out / "roc_bands.svg", band_svg(bands))
    _write_config(args, out / "run_config.json")
    log.info("accuracy=%.3f auc=%s", report.accuracy, report.auc)


def cmd_importance(args) -> None:
    out = _out_dir(args)
    model = TrainedModel.load(args.model)
    report = importance_report(model)
    atomic_write_text(out / "importance.csv", report.to_csv())
    atomic_write_json(out / "importance.json", report.to_dict())
    _write_config(args, out / "run_config.json")


def cmd_predict(args) -> None:
    if args.output:
        csv_path = Path(args.output)
        config_path = csv_path.with_name(csv_path.stem + ".config.json")
    else:
        csv_path = _out_dir(args) / "predictions.csv"
        config_path = Path(args.out) / "run_config.json"
    model = TrainedModel.load(args.model)
    _check_features(model)
    ds = load_cohort(args.data, require_group=False)
    probs = model.predict_proba(ds.X)
    lines = ["id,probability,label"]
    for sid, p in zip(ds.ids, probs):
        lines.append(f"{sid},{p:.6f},{label_for(float(p))}")
    atomic_write_text(csv_path, "\n".join(lines) + "\n")
    atomic_write_json(config_path, _resolved(args))


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=u64, default=0, help="random seed (u64), default 0")
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="JSON file of option defaults (keys are option names)")
    common.add_argument("-v", "--verbose", action="store_true")

    split = argparse.ArgumentParser(add_help=False)
    split.add_argument("--train-fraction", type=fraction, default=0.8)

    net = argparse.ArgumentParser(add_help=False)
    net.add_argument("--maxit", type=positive_int, default=100)
    net.add_argument("--max-weights", type=positive_int, default=500)

    parser = argparse.ArgumentParser(prog="dldnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic cohort CSV")
    p.add_argument("-o", "--output", help="cohort CSV path")
    p.add_argument("--paper-like", action="store_true", help="use the built-in paper-like spec (the default)")
    p.add_argument("--spec", help="synthetic spec JSON file")
    p.add_argument("--n-per-class", type=positive_int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tune", parents=[common, split, net], help="cross-validated grid search")
    p.add_argument("cohort")
    p.add_argument("--sizes", type=int_list, default=list(range(1, 11)), help='e.g. "1..10" or "2,4,8"')
    p.add_argument("--decays", type=float_list, default=[0.0, 0.0001, 0.001, 0.01, 0.1])
    p.add_argument("--k", type=positive_int, default=10, help="number of folds")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("train", parents=[common, split, net], help="fit one network on the training split")
    p.add_argument("cohort")
    p.add_argument("--size", type=positive_int, default=8)
    p.add_argument("--decay", type=float, default=0.001)
    p.add_argument("--best", help="best.json from tune; overrides --size/--decay")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="metrics and ROC outputs for a labeled CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="labeled cohort CSV, e.g. test.csv written by train")
    p.add_argument("--folds", help="fold_scores.json from tune, for mean-ROC bands")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("importance", parents=[common], help="connection-weights variable importance")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("predict", parents=[common], help="probabilities and labels for unlabeled samples")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("-o", "--output", help="predictions CSV path")
    p.set_defaults(func=cmd_predict)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str], args) -> argparse.Namespace:
    """Re-parse with options from the --config file inserted ahead of the user's flags.

    Later occurrences win in argparse, so explicit command-line flags override
    the file.
    """
    with open(args.config, encoding="utf-8") as fh:
        defaults = json.load(fh)
    if not isinstance(defaults, dict):
        raise UsageError("--config must contain a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    by_dest = {a.dest: a for a in subparser._actions if a.option_strings}
    tokens: list[str] = []
    for key, value in defaults.items():
        dest = key.lstrip("-").replace("-", "_")
        action = by_dest.get(dest)
        if action is None or dest in ("config", "help"):
            raise UsageError(f"--config: unknown option {key!r} for {args.command}")
        flag = action.option_strings[-1]
        if action.nargs == 0:
            if value:
                tokens.append(flag)
        elif value is not None:
            text = ",".join(str(v) for v in value) if isinstance(value, list) else str(value)
            tokens += [flag, text]
    at = argv.index(args.command)
    return parser.parse_args(argv[: at + 1] + tokens + argv[at + 1 :])


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.config:
            try:
                args = _apply_config(parser, argv, args)
            except SystemExit as exc:
                return int(exc.code or 0)
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dldnet: error: {exc}", file=sys.stderr)
        return 2
    except argparse.ArgumentTypeError as exc:
        print(f"dldnet: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(f"dldnet: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
