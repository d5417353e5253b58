"""Command-line interface.

Subcommands: ``train`` (multi-seed experiment, optional checkpoint),
``eval`` (checkpoint accuracy on a labeled file), ``predict`` (checkpoint
predictions for unlabeled text), ``bench`` (test-size scaling sweep), and
``compare`` (inductive vs transductive on the same subsample).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import checkpoint, harness, inference
from .corpus import CorpusFormatError, load_corpus, tokenize
from .harness import GCN, MODEL_KINDS, ExperimentConfig
from .model import NumericError


def _parse_seeds(text: str) -> tuple[int, ...]:
    """Accept ``0..9``, comma lists like ``0,3,7``, or a single integer."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(part) for part in text.split(",") if part.strip())


def _parse_multipliers(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _add_data_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--train", required=True, help="training corpus (label<TAB>text per line)")
    parser.add_argument("--test", required=True, help="test corpus (label<TAB>text per line)")


def _add_experiment_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", default=GCN, choices=MODEL_KINDS,
                        help="model kind")
    parser.add_argument("--fraction", type=float, default=1.0,
                        help="fraction of the training set to keep")
    parser.add_argument("--val-ratio", type=float, default=0.1,
                        help="share of kept training docs used for validation")
    parser.add_argument("--seeds", type=_parse_seeds, default=tuple(range(10)),
                        help="seed list: '0..9', '0,1,2' or a single integer")
    parser.add_argument("--hidden", type=int, default=200, help="hidden layer width")
    parser.add_argument("--lr", type=float, default=0.02, help="Adam learning rate")
    parser.add_argument("--epochs", type=int, default=200, help="maximum training epochs")
    parser.add_argument("--patience", type=int, default=10,
                        help="early stopping patience (epochs without val-loss improvement)")
    parser.add_argument("--pmi-window", type=int, default=20,
                        help="sliding window size for word co-occurrence")
    parser.add_argument("--pmi-threshold", type=float, default=0.0,
                        help="keep word-word edges with PMI strictly above this")
    parser.add_argument("--batch-size", type=int, default=64,
                        help="test batch size (accuracy is batch-size invariant)")
    parser.add_argument("--min-freq", type=int, default=2,
                        help="drop words seen fewer times in the training documents")
    parser.add_argument("--stopwords", default=None,
                        help="stopword file (default: bundled English list)")
    parser.add_argument("--stratified", action="store_true",
                        help="subsample per class instead of uniformly")
    parser.add_argument("--dropout", type=float, default=0.0,
                        help="training-time dropout on input and hidden features")
    parser.add_argument("--weight-decay", type=float, default=0.0,
                        help="L2 penalty added to the gradients")
    parser.add_argument("--augment-test", type=int, default=1, metavar="N",
                        help="grow the test split N-fold with random delete/swap copies")
    parser.add_argument("--augment-seed", type=int, default=0,
                        help="seed for the test-set augmentation perturbations")
    parser.add_argument("--parallel-seeds", action="store_true",
                        help="run seeds concurrently")
    parser.add_argument("--raw-test-edges", action="store_true",
                        help="skip degree normalization of test batch rows (ablation)")
    parser.add_argument("--dump-graph", default=None, metavar="PREFIX",
                        help="write <PREFIX>.seedN.edges.tsv and node manifest")
    parser.add_argument("--report", default=None, metavar="FILE",
                        help="write a JSON report to FILE")


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        train_path=args.train,
        test_path=args.test,
        model=args.model,
        train_fraction=args.fraction,
        val_ratio=args.val_ratio,
        seeds=tuple(args.seeds),
        hidden=args.hidden,
        lr=args.lr,
        max_epochs=args.epochs,
        patience=args.patience,
        pmi_window=args.pmi_window,
        pmi_threshold=args.pmi_threshold,
        batch_size=args.batch_size,
        min_train_frequency=args.min_freq,
        stopwords_path=args.stopwords,
        stratified=args.stratified,
        dropout=args.dropout,
        weight_decay=args.weight_decay,
        test_multiplier=args.augment_test,
        augment_seed=args.augment_seed,
        parallel_seeds=args.parallel_seeds,
        raw_test_edges=args.raw_test_edges,
        dump_graph_prefix=args.dump_graph,
    )


def _cmd_train(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if config.model == harness.TRANSDUCTIVE:
        report = harness.run_transductive(config)
        model = None
    else:
        report, model = harness.run_experiment(config)
    print(report.table())
    if args.report:
        harness.write_report(report, args.report)
        print(f"report written to {args.report}")
    if args.save_model:
        if model is None:
            print("--save-model is not available for the transductive mode", file=sys.stderr)
            return 1
        checkpoint.save_model(model, args.save_model)
        print(f"model (seed {config.seeds[0]}) written to {args.save_model}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    model = checkpoint.load_model(args.model_file)
    corpus = load_corpus(args.train, args.test) if args.train else None
    if corpus is None:
        # Without a training file we only need the test documents; labels
        # must be a subset of the model's label set.
        from .corpus import Document

        docs = []
        with open(args.test, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                if "\t" not in line:
                    raise CorpusFormatError(f"{args.test}:{lineno}: expected 'label<TAB>text'")
                label, text = line.split("\t", 1)
                if label not in model.labels:
                    raise CorpusFormatError(
                        f"{args.test}:{lineno}: label {label!r} unknown to the model"
                    )
                docs.append(
                    Document(
                        id=len(docs),
                        tokens=tuple(t for t in tokenize(text) if t in model.vocab),
                        label=label,
                        split="test",
                    )
                )
        if not docs:
            raise CorpusFormatError(f"{args.test}: no test documents")
        predictions = inference.predict_documents(model, docs, batch_size=args.batch_size)
        correct = sum(1 for d, p in zip(docs, predictions) if d.label == p.label)
        accuracy = correct / len(docs)
    else:
        accuracy = inference.evaluate(model, corpus, batch_size=args.batch_size)
    print(f"accuracy {accuracy:.4f}")
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    model = checkpoint.load_model(args.model_file)
    with open(args.input, encoding="utf-8") as fh:
        token_lists = [tokenize(line.rstrip("\n")) for line in fh]
    predictions = inference.predict_texts(model, token_lists, batch_size=args.batch_size)
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        for pred in predictions:
            probs = ",".join(f"{p:.8g}" for p in pred.probabilities)
            out.write(f"{pred.doc_id}\t{pred.label}\t{probs}\n")
    finally:
        if args.output:
            out.close()
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    report = harness.run_bench(config, multipliers=args.multipliers)
    print(report.table())
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"report written to {args.report}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    inductive, transductive = harness.compare_modes(config)
    print(inductive.table())
    print()
    print(transductive.table())
    print()
    print(
        f"inductive   {inductive.mean_accuracy:.4f} +/- {inductive.std_accuracy:.4f}\n"
        f"transductive {transductive.mean_accuracy:.4f} +/- {transductive.std_accuracy:.4f}"
    )
    if args.report:
        payload = {
            "format_version": harness.REPORT_FORMAT_VERSION,
            "inductive": inductive.to_dict(),
            "transductive": transductive.to_dict(),
        }
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corpusgcn",
        description="Corpus-level graph convolutional text classification "
        "with inductive inference on unseen documents.",
    )
    sub = parser.add_subparsers(dest="command")
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p_train = sub.add_parser("train", help="run the multi-seed training protocol",
                             formatter_class=fmt)
    _add_data_args(p_train)
    _add_experiment_args(p_train)
    p_train.add_argument("--save-model", default=None, metavar="FILE",
                         help="save the first seed's trained model checkpoint")
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on a labeled test file",
                            formatter_class=fmt)
    p_eval.add_argument("--model-file", required=True)
    p_eval.add_argument("--test", required=True)
    p_eval.add_argument("--train", default=None,
                        help="optional training file (only used to re-derive label order)")
    p_eval.add_argument("--batch-size", type=int, default=64, help="test batch size")
    p_eval.set_defaults(func=_cmd_eval)

    p_pred = sub.add_parser("predict", help="predict labels for unlabeled text",
                            formatter_class=fmt)
    p_pred.add_argument("--model-file", required=True)
    p_pred.add_argument("--input", required=True, help="one raw document per line")
    p_pred.add_argument("--output", default=None, help="TSV output (default stdout)")
    p_pred.add_argument("--batch-size", type=int, default=64, help="test batch size")
    p_pred.set_defaults(func=_cmd_predict)

    p_bench = sub.add_parser("bench", help="test-size scaling sweep (inductive vs transductive)",
                             formatter_class=fmt)
    _add_data_args(p_bench)
    _add_experiment_args(p_bench)
    p_bench.add_argument("--multipliers", type=_parse_multipliers, default=[1, 2, 3, 4, 5],
                         help="comma-separated test-size multipliers")
    p_bench.set_defaults(func=_cmd_bench)

    p_cmp = sub.add_parser("compare", help="inductive vs transductive on the same subsample",
                           formatter_class=fmt)
    _add_data_args(p_cmp)
    _add_experiment_args(p_cmp)
    p_cmp.set_defaults(func=_cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (CorpusFormatError, NumericError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
