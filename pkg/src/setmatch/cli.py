"""Command-line interface: train, eval, predict, inspect, bench.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Every subcommand writes machine-readable output to its --out path (and the
checkpoint path for train) and a human-readable summary to stdout. All
randomness flows from --seed.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .assignment import MATCHING_BACKEND
from .data import (
    Dataset,
    load_embeddings,
    load_set_file,
    load_stopwords,
    synthetic_bench,
    synthetic_toy,
)
from .errors import DataError, InputError, NumericError
from .training import (
    TrainConfig,
    evaluate,
    load_checkpoint,
    predict_dataset,
    save_checkpoint,
    timed_epoch_seconds,
    train,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on bad flags; our contract wants 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}")
    if not values:
        raise UsageError(f"expected a nonempty list of integers, got {text!r}")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="setmatch", description=__doc__)
    parser.add_argument("--version", action="version", version=f"setmatch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_model_flags(p):
        p.add_argument("--m", type=int, default=30, help="number of hidden sets")
        p.add_argument("--card", type=int, default=20, help="hidden-set cardinality")
        p.add_argument("--mode", choices=["exact", "relaxed"], default="exact")
        p.add_argument("--optimizer", choices=["adam", "sgd"], default="adam")
        p.add_argument("--lr", type=float, default=0.1)
        p.add_argument("--epochs", type=int, default=200)
        p.add_argument("--batch-size", type=int, default=32)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--patience", type=int, default=20)
        p.add_argument("--val-fraction", type=float, default=0.1)
        p.add_argument("--normalize-inputs", action="store_true")
        p.add_argument("--hidden-fc", action="store_true")

    p_train = sub.add_parser("train", help="train a model on a set file or synthetic data")
    p_train.add_argument("--data", help="set file (JSON lines)")
    p_train.add_argument("--synthetic", choices=["toy", "bench"])
    add_common_model_flags(p_train)
    p_train.add_argument("--bench-n", type=int, default=100)
    p_train.add_argument("--bench-set-card", type=int, default=10)
    p_train.add_argument("--bench-d", type=int, default=20)
    p_train.add_argument("--bench-classes", type=int, default=2)
    p_train.add_argument("--checkpoint", default="checkpoint.json", help="where to save the best model")
    p_train.add_argument("--out", default="metrics.csv", help="per-epoch metrics CSV")
    p_train.add_argument("--sweep", action="store_true", help="run an (m, cardinality) sensitivity grid")
    p_train.add_argument("--sweep-m", type=_int_list, default=[10, 20, 30])
    p_train.add_argument("--sweep-card", type=_int_list, default=[5, 10, 20])

    p_eval = sub.add_parser("eval", help="accuracy and mean loss of a checkpoint on a set file")
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--out", default="eval.csv")

    p_pred = sub.add_parser("predict", help="per-example class predictions")
    p_pred.add_argument("--data", required=True)
    p_pred.add_argument("--checkpoint", required=True)
    p_pred.add_argument("--out", default="predictions.csv")

    p_ins = sub.add_parser("inspect", help="nearest vocabulary terms per hidden-set element")
    p_ins.add_argument("--checkpoint", required=True)
    p_ins.add_argument("--embeddings", required=True)
    p_ins.add_argument("--topk", type=int, default=5)
    p_ins.add_argument("--out", default="inspect.tsv")

    p_bench = sub.add_parser("bench", help="seconds per training epoch over a parameter grid")
    p_bench.add_argument("--m-list", type=_int_list, default=[30])
    p_bench.add_argument("--card-list", type=_int_list, default=[20])
    p_bench.add_argument("--set-card-list", type=_int_list, default=[10])
    p_bench.add_argument("--n-list", type=_int_list, default=[100])
    p_bench.add_argument("--d-list", type=_int_list, default=[20])
    p_bench.add_argument("--mode", choices=["exact", "relaxed", "both"], default="both")
    p_bench.add_argument("--batch-size", type=int, default=32)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--out", default="bench.csv")
    return parser


def _config_from_args(args) -> TrainConfig:
    try:
        return TrainConfig(
            m=args.m,
            cardinality=args.card,
            mode=args.mode,
            learning_rate=args.lr,
            epochs=args.epochs,
            batch_size=args.batch_size,
            optimizer=args.optimizer,
            seed=args.seed,
            val_fraction=args.val_fraction,
            patience=args.patience,
            normalize_inputs=args.normalize_inputs,
            hidden_fc=args.hidden_fc,
        )
    except InputError as exc:
        raise UsageError(str(exc))


def _load_train_dataset(args) -> Dataset:
    if args.synthetic == "toy":
        return synthetic_toy()
    if args.synthetic == "bench":
        return synthetic_bench(
            args.bench_n, args.bench_set_card, args.bench_d, args.bench_classes, args.seed
        )
    if not args.data:
        raise UsageError("train needs --data or --synthetic")
    return load_set_file(args.data)


def _write_metrics_csv(metrics, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "train_acc", "val_acc", "seconds"])
        for row in metrics:
            writer.writerow(
                [
                    row.epoch,
                    f"{row.train_loss:.17g}",
                    f"{row.train_acc:.17g}",
                    "" if row.val_acc is None else f"{row.val_acc:.17g}",
                    f"{row.seconds:.6f}",
                ]
            )


def cmd_train(args) -> int:
    dataset = _load_train_dataset(args)
    if args.sweep:
        return _run_sweep(args, dataset)
    config = _config_from_args(args)
    checkpoint, metrics = train(dataset, config)
    save_checkpoint(checkpoint, args.checkpoint)
    _write_metrics_csv(metrics, args.out)
    final = metrics[-1]
    best_train = max(row.train_acc for row in metrics)
    print(f"trained {len(metrics)} epochs on {len(dataset)} examples (mode={config.mode})")
    print(f"final train accuracy {final.train_acc:.4f} (best {best_train:.4f})")
    if checkpoint.best_val_accuracy is not None:
        print(f"best validation accuracy {checkpoint.best_val_accuracy:.4f} at epoch {checkpoint.epoch}")
    print(f"checkpoint -> {args.checkpoint}")
    print(f"metrics -> {args.out}")
    return EXIT_OK


def _run_sweep(args, dataset: Dataset) -> int:
    rows = []
    base = _config_from_args(args)
    for m, card in itertools.product(args.sweep_m, args.sweep_card):
        config = replace(base, m=m, cardinality=card)
        checkpoint, metrics = train(dataset, config)
        if checkpoint.best_val_accuracy is not None:
            acc = checkpoint.best_val_accuracy
        else:
            acc = max(row.train_acc for row in metrics)
        rows.append((m, card, 1.0 - acc))
        print(f"m={m:4d} card={card:4d} error={1.0 - acc:.4f}")
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "card", "error"])
        for m, card, err in rows:
            writer.writerow([m, card, f"{err:.17g}"])
    print(f"sweep matrix -> {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    checkpoint = load_checkpoint(args.checkpoint)
    dataset = load_set_file(args.data, class_names=checkpoint.class_names)
    accuracy, mean_loss = evaluate(dataset, checkpoint)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["accuracy", "mean_loss"])
        writer.writerow([f"{accuracy:.17g}", f"{mean_loss:.17g}"])
    print(f"examples {len(dataset)}  accuracy {accuracy:.4f}  mean loss {mean_loss:.6f}")
    print(f"metrics -> {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    checkpoint = load_checkpoint(args.checkpoint)
    dataset = load_set_file(args.data, class_names=checkpoint.class_names, allow_unlabeled=True)
    rows = predict_dataset(dataset, checkpoint)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "predicted_class", "prob"])
        for set_id, cls, prob in rows:
            writer.writerow([set_id, cls, f"{prob:.17g}"])
    print(f"predicted {len(rows)} examples -> {args.out}")
    return EXIT_OK


def _cosine_top(vocab_tokens, vocab_matrix, query: np.ndarray, topk: int):
    qn = np.linalg.norm(query)
    norms = np.linalg.norm(vocab_matrix, axis=1)
    denom = norms * (qn if qn > 0 else 1.0)
    denom[denom == 0.0] = np.inf
    sims = (vocab_matrix @ query) / denom
    order = np.argsort(-sims, kind="stable")[:topk]
    return [(vocab_tokens[i], float(sims[i])) for i in order]


def cmd_inspect(args) -> int:
    if args.topk < 1:
        raise UsageError("--topk must be >= 1")
    checkpoint = load_checkpoint(args.checkpoint)
    table = load_embeddings(args.embeddings)
    if table.dim != checkpoint.dim:
        raise DataError(
            f"embedding dimension {table.dim} != checkpoint dimension {checkpoint.dim}"
        )
    tokens = list(table.vectors.keys())
    matrix = np.stack([table.vectors[t] for t in tokens])
    topk = min(args.topk, len(tokens))
    lines = []
    for k, h in enumerate(checkpoint.hidden.matrices):
        for j in range(h.shape[1]):
            for rank, (term, sim) in enumerate(_cosine_top(tokens, matrix, h[:, j], topk), 1):
                lines.append((k, f"element-{j}", rank, term, sim))
        centroid = h.mean(axis=1)
        for rank, (term, sim) in enumerate(_cosine_top(tokens, matrix, centroid, topk), 1):
            lines.append((k, "centroid", rank, term, sim))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("hidden_set\telement\trank\tterm\tcosine\n")
        for k, element, rank, term, sim in lines:
            fh.write(f"{k}\t{element}\t{rank}\t{term}\t{sim:.6f}\n")
    print(f"inspected {len(checkpoint.hidden.matrices)} hidden sets (topk={topk}) -> {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    modes = ["exact", "relaxed"] if args.mode == "both" else [args.mode]
    grid = list(
        itertools.product(args.m_list, args.card_list, args.set_card_list, args.n_list, args.d_list)
    )
    rows = []
    print(f"matching backend: {MATCHING_BACKEND}")
    for m, card, set_card, n, d in grid:
        dataset = synthetic_bench(n, set_card, d, num_classes=2, seed=args.seed)
        for mode in modes:
            config = TrainConfig(
                m=m,
                cardinality=card,
                mode=mode,
                epochs=1,
                batch_size=args.batch_size,
                seed=args.seed,
                val_fraction=0.0,
            )
            seconds = timed_epoch_seconds(dataset, config)
            rows.append((mode, m, card, set_card, n, d, seconds))
            print(
                f"mode={mode:7s} m={m:4d} card={card:4d} set_card={set_card:4d} "
                f"N={n:5d} d={d:4d} seconds={seconds:.4f}"
            )
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "m", "card", "set_card", "N", "d", "seconds"])
        for row in rows:
            writer.writerow([*row[:-1], f"{row[-1]:.6f}"])
    print(f"bench table -> {args.out}")
    return EXIT_OK


_COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "inspect": cmd_inspect,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
