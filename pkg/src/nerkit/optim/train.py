"""Training loop with per-epoch dev evaluation and best-checkpoint selection."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from ..corpus import Corpus
from ..errors import NumericError
from ..model.encoder import ModelConfig, init_params, predict_corpus
from ..model.vocab import build_vocab, encode_sentence
from ..scorer import macro_report
from .adamw import AdamWHyper, OptimizerState, adamw_step
from .backprop import backward
from .checkpoint import Checkpoint

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 4
    epochs: int = 15
    seed: int = 0
    hyper: AdamWHyper = field(default_factory=AdamWHyper)
    vocab_max_size: int = 4000
    eval_batch_size: int = 32

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be >= 1")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    mean_loss: float
    dev_f1: float

    def to_json(self) -> str:
        return json.dumps(
            {"epoch": self.epoch, "mean_loss": self.mean_loss, "dev_macro_f1": self.dev_f1},
            sort_keys=True,
        )


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    history: list[EpochRecord]


def history_log(history: list[EpochRecord]) -> str:
    """One JSON object per line: epoch, mean_loss, dev_macro_f1."""
    return "".join(rec.to_json() + "\n" for rec in history)


def evaluate(params, corpus: Corpus, vocab, model_config: ModelConfig, batch_size: int = 32) -> float:
    pred = predict_corpus(params, corpus, vocab, model_config, batch_size)
    return macro_report(corpus, pred, "fine").macro_f1


def train(
    train_corpus: Corpus,
    dev_corpus: Corpus,
    config: TrainConfig | None = None,
    model_config: ModelConfig | None = None,
) -> TrainResult:
    """Train from scratch; keep the epoch with the best dev fine macro-F1.

    ``config.seed`` drives initialization, shuffling and dropout. The
    vocabulary is built from the training corpus and fills in
    ``model_config.vocab_size``. Ties in dev F1 keep the earliest epoch.

    Raises:
        ValueError: if either corpus is empty.
        NumericError: on a non-finite loss, naming the epoch and batch.
    """
    config = config or TrainConfig()
    model_config = model_config or ModelConfig()
    if not len(train_corpus) or not len(dev_corpus):
        raise ValueError("train and dev corpora must be non-empty")

    vocab = build_vocab(train_corpus, config.vocab_max_size)
    model_config = replace(model_config, vocab_size=len(vocab), seed=config.seed)
    params = init_params(model_config)
    state = OptimizerState.zeros_like(params)
    shuffle_rng = np.random.default_rng([config.seed, 1])
    dropout_rng = np.random.default_rng([config.seed, 2])

    encoded = [encode_sentence(s, vocab, model_config.max_len) for s in train_corpus]
    history: list[EpochRecord] = []
    best_params, best_epoch, best_f1 = params, 0, -1.0

    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(len(encoded))
        losses = []
        for b, start in enumerate(range(0, len(order), config.batch_size)):
            batch = [encoded[i] for i in order[start : start + config.batch_size]]
            try:
                grads, loss = backward(params, batch, model_config, train_mode=True, rng=dropout_rng)
                params, state = adamw_step(params, grads, state, config.hyper)
            except NumericError as exc:
                raise NumericError(f"epoch {epoch}, batch {b}: {exc}") from None
            losses.append(loss)
        mean_loss = float(np.mean(losses))
        dev_f1 = evaluate(params, dev_corpus, vocab, model_config, config.eval_batch_size)
        history.append(EpochRecord(epoch, mean_loss, dev_f1))
        logger.info("epoch %d  loss %.4f  dev macro-F1 %.4f", epoch, mean_loss, dev_f1)
        if dev_f1 > best_f1:
            best_params, best_epoch, best_f1 = params, epoch, dev_f1

    ckpt = Checkpoint(model_config, vocab, best_params, best_epoch, best_f1)
    return TrainResult(ckpt, history)
