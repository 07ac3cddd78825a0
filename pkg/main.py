#!/usr/bin/env python3
"""
Quantum Circuit Knowledge Graph Embedding CLI
Trains entity/relation circuits on a triple dataset, evaluates filtered link
prediction, and inspects saved checkpoints.

Usage:
    # Train (defaults: 2 qubits, 2/2 layers, 1 negative tail, 10 epochs, lr 0.01)
    python main.py train --data-dir ./data/umls --out ./output/umls-2q.json
    python main.py train --data-dir ./data/umls --qubits 4 --negatives 4

    # Evaluate a checkpoint
    python main.py eval --model ./output/umls-2q.json --data-dir ./data/umls --split test --mode both

    # Inspect a checkpoint, optionally scoring one triple
    python main.py inspect --model ./output/umls-2q.json --triple "acquired_abnormality location_of experimental_model_of_disease"

Exit codes: 0 success, 1 usage, 2 data/integrity, 3 numerical failure.
"""

import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path

import numpy as np
from dotenv import load_dotenv

from qkge.ansatz import unitary
from qkge.checkpoint import build_checkpoint, load_checkpoint, save_checkpoint
from qkge.config import load_config
from qkge.data import load_knowledge_graph, save_vocabulary
from qkge.errors import QKGEError, UsageError
from qkge.evaluation import PUBLISHED_UMLS_RESULTS, EvalMode, evaluate, random_baseline
from qkge.model import score_triple
from qkge.sampling import NegativeMode
from qkge.training import train, write_loss_log

logger = logging.getLogger("qkge")


class CliParser(argparse.ArgumentParser):
    """Argument errors become UsageError (exit code 1) instead of exiting with 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    """Parse command line arguments."""
    common = CliParser(add_help=False)
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    common.add_argument("--quiet", "-q", action="store_true", help="No progress bars, warnings only")

    parser = CliParser(
        description="Knowledge graph embedding with parameterized quantum circuits",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    python main.py train --data-dir ./data/umls
    python main.py train --data-dir ./data/umls --qubits 4 --epochs 10 -o ./output/umls-4q.json
    python main.py eval --model ./output/umls-4q.json --data-dir ./data/umls --split test
    python main.py inspect --model ./output/umls-4q.json
        """,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p_train = commands.add_parser("train", parents=[common], help="Train a model and save a checkpoint")
    p_train.add_argument("--data-dir", type=Path, required=True, help="Directory with train/valid/test.txt")
    p_train.add_argument("--qubits", type=positive_int, default=None, help="Qubits per circuit (default: 2)")
    p_train.add_argument("--entity-layers", type=positive_int, default=None, help="Entity ansatz layers (default: 2)")
    p_train.add_argument("--relation-layers", type=positive_int, default=None, help="Relation ansatz layers (default: 2)")
    p_train.add_argument("--negatives", "-k", type=positive_int, default=None, help="Tails per negative example (default: 1)")
    p_train.add_argument(
        "--negative-mode",
        choices=[m.value for m in NegativeMode],
        default=None,
        help="superposed: one k-tail example; separate: k single-tail examples (default: superposed)",
    )
    p_train.add_argument(
        "--filter-negatives",
        action="store_true",
        default=None,
        help="Never sample a tail known true for (head, relation) in training data",
    )
    p_train.add_argument("--epochs", type=positive_int, default=None, help="Training epochs (default: 10)")
    p_train.add_argument("--lr", type=float, default=None, help="Adam learning rate (default: 0.01)")
    p_train.add_argument("--batch-size", type=positive_int, default=None, help="Positives per batch (default: 128)")
    p_train.add_argument("--seed", type=int, default=None, help="Random seed (default: 42)")
    p_train.add_argument("--threads", type=positive_int, default=None, help="Worker threads (default: available cores)")
    p_train.add_argument("--config", type=Path, default=None, help="key=value file mirroring these flags")
    p_train.add_argument("--no-validate", action="store_true", help="Skip per-epoch validation MRR")
    p_train.add_argument("--out", "-o", type=Path, default=None, help="Checkpoint path (default: ./output/<date>_<n>q-<k>neg.json)")
    p_train.add_argument("--loss-log", type=Path, default=None, help="Loss CSV path (default: <out>.loss.csv)")

    p_eval = commands.add_parser("eval", parents=[common], help="Filtered link prediction metrics")
    p_eval.add_argument("--model", type=Path, required=True, help="Checkpoint JSON")
    p_eval.add_argument("--data-dir", type=Path, required=True, help="Directory with train/valid/test.txt")
    p_eval.add_argument("--split", choices=["valid", "test"], default="test")
    p_eval.add_argument("--mode", choices=[m.value for m in EvalMode], default=EvalMode.TAIL.value)
    p_eval.add_argument("--json", type=Path, default=None, help="Also write the metrics as JSON")
    p_eval.add_argument("--per-relation", action="store_true", help="Include per-relation MRR")
    p_eval.add_argument("--threads", type=positive_int, default=None, help="Worker threads (default: available cores)")

    p_inspect = commands.add_parser("inspect", parents=[common], help="Describe a checkpoint")
    p_inspect.add_argument("--model", type=Path, required=True, help="Checkpoint JSON")
    p_inspect.add_argument("--triple", type=str, default=None, help='"head relation tail" to score')
    p_inspect.add_argument("--relation", type=str, default=None, help="Relation name for --unitary")
    p_inspect.add_argument("--unitary", action="store_true", help="Print the relation's unitary matrix")
    p_inspect.add_argument("--data-dir", type=Path, default=None, help="Also summarize this dataset and check it against the checkpoint")

    args = parser.parse_args(argv)

    if args.command == "inspect" and args.unitary and not args.relation:
        parser.error("--unitary requires --relation")

    return args


def setup_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def default_checkpoint_path(n_qubits: int, negatives: int) -> Path:
    """Format: output/yyyy-mm-dd_<n>q-<k>neg.json"""
    date_prefix = datetime.now().strftime("%Y-%m-%d")
    return Path("output") / f"{date_prefix}_{n_qubits}q-{negatives}neg.json"


def print_training_summary(result, config, out_path: Path, loss_log: Path, vocab_path: Path) -> None:
    print("\n" + "=" * 60)
    print("TRAINING COMPLETE")
    print("=" * 60)
    print(f"\nQubits: {config.n_qubits}")
    print(f"Layers (entity/relation): {config.entity_layers}/{config.relation_layers}")
    print(f"Negatives: {config.negatives} ({config.negative_mode.value})")
    print(f"Angles per tensor: {config.entity_shape.parameter_count}/{config.relation_shape.parameter_count}")
    print("\nLoss history:")
    for record in result.history:
        val = f"  valid MRR {record.val_mrr:.4f}" if record.val_mrr is not None else ""
        print(f"  epoch {record.epoch:>3}: {record.loss:.6f}{val}")
    print(f"\nCheckpoint saved to: {out_path.absolute()}")
    print(f"Loss log saved to: {loss_log.absolute()}")
    print(f"Vocabulary saved to: {vocab_path.absolute()}")
    print("=" * 60)


def require_data_dir(path: Path) -> None:
    if not path.is_dir():
        raise UsageError(f"--data-dir {path} is not a directory")


def cmd_train(args: argparse.Namespace) -> int:
    require_data_dir(args.data_dir)
    kg = load_knowledge_graph(args.data_dir)
    config = load_config(
        args.config,
        n_qubits=args.qubits,
        entity_layers=args.entity_layers,
        relation_layers=args.relation_layers,
        negatives=args.negatives,
        negative_mode=args.negative_mode,
        filter_negatives=args.filter_negatives,
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        seed=args.seed,
        threads=args.threads,
        validate_epochs=False if args.no_validate else None,
    )
    out_path = args.out or default_checkpoint_path(config.n_qubits, config.negatives)
    loss_log = args.loss_log or out_path.with_suffix(".loss.csv")
    vocab_path = out_path.with_suffix(".vocab.json")

    result = train(kg, config, progress=not args.quiet)

    save_checkpoint(out_path, build_checkpoint(result.store, kg, config, result.history))
    write_loss_log(loss_log, result.history)
    save_vocabulary(vocab_path, kg.entities, kg.relations)
    print_training_summary(result, config, out_path, loss_log, vocab_path)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    require_data_dir(args.data_dir)
    checkpoint = load_checkpoint(args.model)
    kg = load_knowledge_graph(args.data_dir)
    checkpoint.verify_against(kg)
    store = checkpoint.to_store()

    threads = load_config(threads=args.threads).threads
    report = evaluate(
        store, kg, args.split, EvalMode(args.mode), per_relation=args.per_relation, threads=threads
    )
    baseline = random_baseline(kg.entity_count)

    print(report.format_table())
    print(f"random ranking: MRR {baseline['mrr']:.4f}  Hits@10 {baseline['hits10']:.4f}")
    published = PUBLISHED_UMLS_RESULTS.get(
        (checkpoint.entity_shape.n_qubits, checkpoint.config.get("negatives", 1))
    )
    if published and args.split == "test":
        print(
            "published: "
            + "  ".join(f"{name} {value:.3f}" for name, value in published.items())
        )
    if report.per_relation:
        print("\nper relation:")
        for name, stats in report.per_relation.items():
            print(f"  {name:<40} MRR {stats['mrr']:.4f}  ({stats['n_ranks']} ranks)")

    if args.json:
        args.json.parent.mkdir(parents=True, exist_ok=True)
        args.json.write_text(report.to_json(), encoding="utf-8")
        print(f"\nMetrics saved to: {args.json.absolute()}")
    return 0


def cmd_inspect(args: argparse.Namespace) -> int:
    checkpoint = load_checkpoint(args.model)
    store = checkpoint.to_store()
    entities, relations = checkpoint.vocabularies()

    print("=" * 60)
    print(f"Checkpoint: {args.model}")
    print("=" * 60)
    print(f"qubits={store.n_qubits}  layers={store.entity_shape.n_layers}/{store.relation_shape.n_layers}")
    print(f"entities={store.entity_count}  relations={store.relation_count}")
    print(
        f"angles per tensor: entity {store.entity_shape.parameter_count}, "
        f"relation {store.relation_shape.parameter_count}"
    )
    print("\nConfig:")
    for key, value in checkpoint.config.items():
        print(f"  {key}: {value}")
    print("\nLoss history:")
    records = checkpoint.epoch_records()
    if not records:
        print("  (none)")
    for record in records:
        val = f"  valid MRR {record.val_mrr:.4f}" if record.val_mrr is not None else ""
        print(f"  epoch {record.epoch:>3}: {record.loss:.6f}{val}")

    if args.data_dir:
        require_data_dir(args.data_dir)
        kg = load_knowledge_graph(args.data_dir)
        checkpoint.verify_against(kg)
        print(f"\nDataset: {args.data_dir}")
        for key, value in kg.summary().items():
            print(f"  {key}: {value}")

    if args.triple:
        parts = args.triple.split()
        if len(parts) != 3:
            raise UsageError(f'--triple needs "head relation tail", got {args.triple!r}')
        h = entities.lookup(parts[0])
        r = relations.lookup(parts[1])
        t = entities.lookup(parts[2])
        print(f"\nscore({parts[0]}, {parts[1]}, {parts[2]}) = {score_triple(store, h, r, t):.6f}")

    if args.unitary:
        matrix = unitary(store.relation(relations.lookup(args.relation)))
        print(f"\nU({args.relation}):")
        with np.printoptions(precision=4, suppress=True, linewidth=120):
            print(matrix)
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "inspect": cmd_inspect}


def main(argv: list[str] | None = None) -> int:
    """Main entry point."""
    # Load environment variables (QKGE_* settings)
    load_dotenv()

    try:
        args = parse_args(argv)
    except UsageError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code

    setup_logging(args)

    try:
        return COMMANDS[args.command](args)
    except QKGEError as e:
        print(f"Error: {e}", file=sys.stderr)
        logger.debug("Failure details", exc_info=True)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
