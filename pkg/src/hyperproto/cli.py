"""Command line interface.

Exit codes: 0 success, 1 bad flags or invalid input, 2 I/O failure,
3 non-finite loss during training. Standard output carries only the
result lines; diagnostics go to standard error.
"""

import argparse
import sys

import numpy as np

from . import data as datamod
from . import io
from .errors import DomainError, HyperprotoError, RunError
from .losses import RegressionBounds, classify, embed_equator, predict_value
from .network import TrainConfig, evaluate, forward, train
from .prototypes import ProtoOptConfig, optimize_prototypes, separation_stats

TASK_NAMES = {"classify": "classification", "regress": "regression", "joint": "joint"}


class UsageError(DomainError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _parse_bounds(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--bounds expects 'v_l,v_u', got {text!r}") from None
    return RegressionBounds(lo, hi)


def _parse_ints(text, flag):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag} expects comma-separated integers, got {text!r}") from None
    return vals


def _parse_floats(text, flag):
    try:
        return np.array([float(v) for v in text.split(",")], dtype=np.float64)
    except ValueError:
        raise UsageError(f"{flag} expects comma-separated numbers, got {text!r}") from None


def _metric_lines(metrics):
    return [f"{name}={metrics[name]:.6f}" for name in ("accuracy", "mae") if name in metrics]


def cmd_prototypes(args):
    priors = None
    names = None
    if args.embeddings:
        priors = datamod.load_embeddings(args.embeddings)
        if len(priors) != args.classes:
            raise DomainError(f"embedding file has {len(priors)} classes, --classes is {args.classes}")
        names = priors.names
    config = ProtoOptConfig(epochs=args.epochs, learning_rate=args.lr, momentum=args.momentum,
                            seed=args.seed, triplet_subsample=args.triplet_subsample,
                            pair_update=args.pair_update)
    P, _ = optimize_prototypes(args.classes, args.dims, config, priors)
    io.write_prototypes(args.out, P, names)
    print(separation_stats(P).line())


def cmd_stats(args):
    P, _ = io.read_prototypes(args.prototypes)
    print(separation_stats(P).line())


def _load_data(args):
    if args.data:
        return datamod.load_csv(args.data)
    if args.synthetic == "blobs":
        return datamod.gen_blobs(args.n_classes, args.n_per_class, args.input_dim, args.spread, args.seed)
    return datamod.gen_rotated(args.n_classes, args.n_per_class, args.seed)


def _targets(task, args):
    """Prototype matrix, bounds or joint space for ``task`` plus class names."""
    names = None
    if task in ("classification", "joint"):
        if not args.prototypes:
            raise UsageError(f"--prototypes is required for {task}")
        P, names = io.read_prototypes(args.prototypes)
    if task in ("regression", "joint"):
        if not args.bounds:
            raise UsageError(f"--bounds is required for {task}")
        bounds = _parse_bounds(args.bounds)
    if task == "classification":
        return P, names
    if task == "regression":
        return bounds, None
    return embed_equator(P, bounds), names


def _infer_task(args):
    if getattr(args, "task", None):
        return TASK_NAMES[args.task]
    if args.prototypes and args.bounds:
        return "joint"
    if args.prototypes:
        return "classification"
    if args.bounds:
        return "regression"
    raise UsageError("give --prototypes, --bounds or both")


def _output_dim(task, targets, args):
    if task == "classification":
        return targets.shape[1]
    if task == "joint":
        return targets.dims
    return args.dims


def cmd_train(args):
    task = TASK_NAMES[args.task]
    targets, _ = _targets(task, args)
    dataset = _load_data(args)
    tr, te = datamod.split_dataset(dataset, args.test_fraction, args.seed)
    base = TrainConfig()
    config = TrainConfig(epochs=base.epochs, batch_size=args.batch_size, learning_rate=args.lr,
                         momentum=args.momentum, weight_decay=args.weight_decay, seed=args.seed,
                         task=task).scaled(args.epochs)
    hidden = _parse_ints(args.layers, "--layers")
    params, log = train(config, tr, targets, eval_data=te if te.n else None, hidden=hidden,
                        out_dim=_output_dim(task, targets, args))
    io.write_model(args.out, params)
    if args.metrics:
        io.write_metrics(args.metrics, log)
    final = evaluate(params, te if te.n else tr, targets, task)
    for line in _metric_lines(final):
        print(line)


def _check_dims(task, targets, params, args):
    want = _output_dim(task, targets, args) if task != "regression" else None
    if want is not None and params.output_dim != want:
        raise DomainError(f"model outputs {params.output_dim} dims, targets need {want}")
    if task == "regression":
        targets.upper(params.output_dim)


def cmd_eval(args):
    task = _infer_task(args)
    targets, _ = _targets(task, args)
    params = io.read_model(args.model)
    _check_dims(task, targets, params, args)
    dataset = _load_data(args)
    if params.input_dim != dataset.inputs.shape[1]:
        raise DomainError(f"model expects {params.input_dim} inputs, data has {dataset.inputs.shape[1]}")
    tr, te = datamod.split_dataset(dataset, args.test_fraction, args.seed)
    chosen = {"train": tr, "test": te, "all": dataset}[args.split]
    if chosen.n == 0:
        raise DomainError(f"{args.split} split is empty")
    for line in _metric_lines(evaluate(params, chosen, targets, task)):
        print(line)


def cmd_predict(args):
    task = _infer_task(args)
    targets, names = _targets(task, args)
    params = io.read_model(args.model)
    _check_dims(task, targets, params, args)
    x = _parse_floats(args.input, "--input")
    if x.size != params.input_dim:
        raise DomainError(f"model expects {params.input_dim} inputs, got {x.size}")
    z, _ = forward(params, x)
    if np.linalg.norm(z) < 1e-12:
        z = z.copy()
        z[0] += 1e-12
    if task in ("classification", "joint"):
        P = targets if task == "classification" else targets.class_prototypes
        c = classify(z, P)
        print(f"{c} {names[c]}" if names else str(c))
    if task in ("regression", "joint"):
        b = targets if task == "regression" else targets.bounds
        print(f"{predict_value(z, b):.6f}")


def _add_data_flags(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="dataset CSV with a 'class' and/or 'target' column")
    src.add_argument("--synthetic", choices=("blobs", "rotated"))
    p.add_argument("--n-classes", type=int, default=5, help="synthetic classes (default 5)")
    p.add_argument("--n-per-class", type=int, default=200)
    p.add_argument("--input-dim", type=int, default=2, help="blobs input dimension")
    p.add_argument("--spread", type=float, default=0.1, help="blobs noise level")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=0.2)


def _add_target_flags(p):
    p.add_argument("--prototypes", help="prototype file (D-1 dims for the joint task)")
    p.add_argument("--bounds", help="regression bounds 'v_l,v_u'")
    p.add_argument("--dims", type=int, default=2, help="output dims for regression (default 2)")


def build_parser():
    parser = _Parser(prog="hyperproto", description="Hyperspherical prototype networks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prototypes", help="optimize class prototypes")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--dims", type=int, required=True)
    p.add_argument("--embeddings", help="word2vec text file with one vector per class")
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--triplet-subsample", type=int, default=None)
    p.add_argument("--pair-update", choices=("anchor", "both"), default="anchor")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prototypes)

    p = sub.add_parser("stats", help="print prototype separation statistics")
    p.add_argument("--prototypes", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="train a network against fixed prototypes")
    p.add_argument("--task", choices=tuple(TASK_NAMES), required=True)
    _add_data_flags(p)
    _add_target_flags(p)
    p.add_argument("--layers", default="64,64", help="hidden layer widths (default 64,64)")
    p.add_argument("--epochs", type=int, default=250)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--weight-decay", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--metrics", help="metrics CSV to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--task", choices=tuple(TASK_NAMES))
    _add_data_flags(p)
    _add_target_flags(p)
    p.add_argument("--split", choices=("test", "train", "all"), default="test")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="predict for one input vector")
    p.add_argument("--model", required=True)
    p.add_argument("--task", choices=tuple(TASK_NAMES))
    p.add_argument("--input", required=True, help="comma-separated input features")
    _add_target_flags(p)
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except RunError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (HyperprotoError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
