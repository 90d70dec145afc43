"""Command-line entry point.

Exit codes: 0 success, 1 usage error (bad flags, missing input file),
2 validation failure (malformed or misaligned data), 3 runtime or numeric
failure (bad checkpoint, non-finite loss). ``NERKIT_SEED`` overrides the
default seed of every seeded subcommand.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .corpus import corpus_stats, read_conll, validate_conll, write_conll
from .errors import (
    AlignmentError,
    BioError,
    CheckpointError,
    ConllFormatError,
    NumericError,
    UnknownTagError,
)
from .model import ModelConfig, predict_corpus
from .noise import OPS, NoiseConfig, corrupt_corpus, read_membership, write_membership
from .optim import AdamWHyper, TrainConfig, history_log, load_checkpoint, save_checkpoint, train
from .scorer import (
    dumps,
    format_report,
    format_split_report,
    macro_report,
    report_to_dict,
    split_report,
    split_report_to_dict,
)
from .synthetic import synthetic_splits
from .taxonomy import taxonomy_lines

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3
SEED_ENV = "NERKIT_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _input(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    return p


def _write_json(path: str | None, doc: dict) -> None:
    if path:
        Path(path).write_text(dumps(doc), encoding="utf-8")


# --------------------------------------------------------------------------
# subcommands


def cmd_stats(args) -> int:
    stats = corpus_stats(read_conll(_input(args.file)))
    print(f"sentences\t{stats.sentences}")
    print(f"tokens\t{stats.tokens}")
    for label, n in stats.spans.items():
        print(f"{label}\t{n}")
    _write_json(
        args.json_out,
        {"sentences": stats.sentences, "tokens": stats.tokens, "spans": stats.spans},
    )
    return EXIT_OK


def cmd_validate(args) -> int:
    text = _input(args.file).read_text(encoding="utf-8")
    report = validate_conll(text, strict=args.strict)
    for line in report.lines():
        print(line)
    if report.ok:
        print("ok", file=sys.stderr)
        return EXIT_OK
    print(f"{len(report.violations)} violation(s)", file=sys.stderr)
    return EXIT_INVALID if args.strict else EXIT_OK


def cmd_train(args) -> int:
    train_c = read_conll(_input(args.train), split_name="train")
    dev_c = read_conll(_input(args.dev), split_name="dev")
    hyper = AdamWHyper(lr=args.lr, epsilon=args.epsilon, weight_decay=args.weight_decay)
    tconf = TrainConfig(
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
        hyper=hyper,
        vocab_max_size=args.vocab_size,
    )
    mconf = ModelConfig(
        d_model=args.d_model,
        n_heads=args.heads,
        n_layers=args.layers,
        d_ff=args.d_ff,
        max_len=args.max_len,
        dropout=args.dropout,
    )
    result = train(train_c, dev_c, tconf, mconf)
    save_checkpoint(result.checkpoint, args.out)
    log = history_log(result.history)
    sys.stdout.write(log)
    if args.history_out:
        Path(args.history_out).write_text(log, encoding="utf-8")
    print(
        f"best epoch {result.checkpoint.epoch}, dev macro-F1 {result.checkpoint.dev_f1:.4f}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_predict(args) -> int:
    ckpt = load_checkpoint(_input(args.ckpt))
    corpus = read_conll(_input(args.input))
    pred = predict_corpus(ckpt.params, corpus, ckpt.vocab, ckpt.config)
    write_conll(args.out, pred)
    return EXIT_OK


def cmd_score(args) -> int:
    gold = read_conll(_input(args.gold))
    pred = read_conll(_input(args.pred))
    granularity = "coarse" if args.coarse else "fine"
    if args.corrupted_ids:
        ids = read_membership(_input(args.corrupted_ids))
        report = split_report(gold, pred, ids, granularity, args.full_universe)
        sys.stdout.write(format_split_report(report))
        _write_json(args.json_out, split_report_to_dict(report))
    else:
        report = macro_report(gold, pred, granularity, args.full_universe)
        sys.stdout.write(format_report(report))
        _write_json(args.json_out, report_to_dict(report))
    return EXIT_OK


def cmd_corrupt(args) -> int:
    corpus = read_conll(_input(args.input))
    config = NoiseConfig(rate=args.rate, ops=tuple(args.ops), seed=args.seed)
    noisy, membership = corrupt_corpus(corpus, config)
    write_conll(args.out, noisy)
    write_membership(args.ids_out, membership, order=corpus.ids)
    print(f"corrupted {len(membership)} of {len(corpus)} sentences", file=sys.stderr)
    return EXIT_OK


def cmd_taxonomy(args) -> int:
    for line in taxonomy_lines():
        print(line)
    return EXIT_OK


def cmd_synth(args) -> int:
    train_c, dev_c = synthetic_splits(args.seed, args.n_train, args.n_dev)
    write_conll(args.train_out, train_c)
    write_conll(args.dev_out, dev_c)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser(default_seed: int) -> argparse.ArgumentParser:
    parser = _Parser(prog="nerkit", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"nerkit {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stats", help="sentence, token and per-class span counts")
    p.add_argument("file")
    p.add_argument("--json-out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("validate", help="list BIO and format violations")
    p.add_argument("file")
    p.add_argument("--strict", action="store_true", help="exit 2 on any violation")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("train", help="train a tagger and save the best-dev checkpoint")
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--history-out", help="per-epoch JSON-lines log")
    p.add_argument("--epochs", type=int, default=15)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--lr", type=float, default=2e-5)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--max-len", type=int, default=16)
    p.add_argument("--d-model", type=int, default=64)
    p.add_argument("--d-ff", type=int, default=128)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--vocab-size", type=int, default=4000, help="maximum subword vocabulary size")
    p.add_argument("--seed", type=int, default=default_seed)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="tag a CoNLL file with a checkpoint")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("score", help="entity-level macro P/R/F1")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--coarse", action="store_true", help="score the 6 coarse groups")
    p.add_argument("--corrupted-ids", help="membership file; adds corrupted/uncorrupted reports")
    p.add_argument("--full-universe", action="store_true", help="average over every class")
    p.add_argument("--json-out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("corrupt", help="inject seeded typos")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ids-out", required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--ops", nargs="+", choices=OPS, default=list(OPS))
    p.add_argument("--seed", type=int, default=default_seed)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("taxonomy-dump", help="print <fine>\\t<coarse> per class")
    p.set_defaults(func=cmd_taxonomy)

    p = sub.add_parser("synth", help="write the templated toy train/dev corpora")
    p.add_argument("--train-out", required=True)
    p.add_argument("--dev-out", required=True)
    p.add_argument("--n-train", type=int, default=250)
    p.add_argument("--n-dev", type=int, default=50)
    p.add_argument("--seed", type=int, default=default_seed)
    p.set_defaults(func=cmd_synth)
    return parser


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser(_default_seed()).parse_args(argv)
        if args.verbose:
            logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConllFormatError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        for v in exc.violations:
            print(f"{v.sentence_id}\t{v.index}\t{v.kind}", file=sys.stderr)
        return EXIT_INVALID
    except (AlignmentError, BioError, UnknownTagError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (CheckpointError, NumericError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        # invalid hyperparameter combinations surface from config dataclasses
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
