"""Transformer-encoder token classifier in plain numpy.

token + position embeddings -> N post-LN encoder layers (multi-head
self-attention, GELU feed-forward) -> dropout -> linear head over the BIO
tagset. ``forward`` can keep the intermediates needed by the hand-written
backward pass in :mod:`nerkit.optim.backprop`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.special import erf

from ..corpus import Corpus, Sentence, repair_bio, with_tags
from ..taxonomy import OUTSIDE, TAGS, BioTag
from .vocab import TRUNCATED, EncodedSentence, Vocab, collate, encode_sentence

LN_EPS = 1e-5
INIT_STD = 0.02

ModelParams = dict[str, np.ndarray]


@dataclass(frozen=True)
class ModelConfig:
    # 0 = not yet known; training fills it in from the built vocabulary
    vocab_size: int = 0
    d_model: int = 64
    n_heads: int = 4
    n_layers: int = 2
    d_ff: int = 128
    max_len: int = 16
    dropout: float = 0.2
    # dropout on attention / feed-forward outputs; off by default
    internal_dropout: float = 0.0
    tagset_size: int = len(TAGS)
    seed: int = 0

    def __post_init__(self):
        if self.d_model % self.n_heads:
            raise ValueError(f"d_model {self.d_model} not divisible by n_heads {self.n_heads}")
        if self.max_len < 2:
            raise ValueError("max_len must be >= 2")
        for name in ("dropout", "internal_dropout"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.vocab_size == 1 or self.vocab_size < 0:
            raise ValueError("vocab_size must be 0 (unset) or >= 2")
        if self.n_layers < 1 or self.d_ff < 1:
            raise ValueError("n_layers >= 1 and d_ff >= 1 required")

    @property
    def head_dim(self) -> int:
        return self.d_model // self.n_heads

    def to_dict(self) -> dict:
        return asdict(self)


def param_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    if config.vocab_size < 2:
        raise ValueError("vocab_size not set")
    D, F = config.d_model, config.d_ff
    shapes = {
        "tok_emb": (config.vocab_size, D),
        "pos_emb": (config.max_len, D),
    }
    for layer in range(config.n_layers):
        p = f"layers.{layer}."
        shapes.update(
            {
                p + "wq": (D, D), p + "bq": (D,),
                p + "wk": (D, D), p + "bk": (D,),
                p + "wv": (D, D), p + "bv": (D,),
                p + "wo": (D, D), p + "bo": (D,),
                p + "ln1_g": (D,), p + "ln1_b": (D,),
                p + "w1": (D, F), p + "b1": (F,),
                p + "w2": (F, D), p + "b2": (D,),
                p + "ln2_g": (D,), p + "ln2_b": (D,),
            }
        )  # fmt: skip
    shapes["head.w"] = (D, config.tagset_size)
    shapes["head.b"] = (config.tagset_size,)
    return shapes


def init_params(config: ModelConfig, dtype=np.float32) -> ModelParams:
    """Normal(0, 0.02) matrices and embeddings, zero biases, unit LN gains."""
    rng = np.random.default_rng(config.seed)
    params: ModelParams = {}
    for name, shape in param_shapes(config).items():
        leaf = name.rsplit(".", 1)[-1]
        if leaf.endswith("_g"):
            params[name] = np.ones(shape, dtype=dtype)
        elif len(shape) == 1:
            params[name] = np.zeros(shape, dtype=dtype)
        else:
            params[name] = (rng.standard_normal(shape) * INIT_STD).astype(dtype)
    return params


def check_params(params: ModelParams, config: ModelConfig) -> None:
    expected = param_shapes(config)
    if set(params) != set(expected):
        raise ValueError(f"parameter names differ from config: {sorted(set(params) ^ set(expected))}")
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise ValueError(f"{name}: shape {params[name].shape}, expected {shape}")


# --------------------------------------------------------------------------
# building blocks


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    cdf = 0.5 * (1.0 + erf(x / math.sqrt(2.0)))
    pdf = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return cdf + x * pdf


def layer_norm(x, gain, bias):
    mu = x.mean(-1, keepdims=True)
    xc = x - mu
    rstd = 1.0 / np.sqrt((xc * xc).mean(-1, keepdims=True) + LN_EPS)
    xhat = xc * rstd
    return xhat * gain + bias, (xhat, rstd)


def masked_softmax(scores: np.ndarray, key_mask: np.ndarray) -> np.ndarray:
    """Softmax over the last axis; masked keys get exactly zero weight.

    ``key_mask`` broadcasts against ``scores`` and is True at real keys.
    """
    scores = np.where(key_mask, scores, -np.inf)
    scores = scores - scores.max(-1, keepdims=True)
    e = np.exp(scores)
    return e / e.sum(-1, keepdims=True)


def _dropout_mask(shape, rate, rng, dtype):
    keep = rng.random(shape) >= rate
    return keep.astype(dtype) / dtype.type(1.0 - rate)


def _split_heads(x, n_heads):
    B, T, D = x.shape
    return x.reshape(B, T, n_heads, D // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    B, H, T, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(B, T, H * dh)


def _layer_forward(x, mask, params, prefix, config, train_mode, rng):
    P = lambda k: params[prefix + k]  # noqa: E731
    H = config.n_heads
    q = _split_heads(x @ P("wq") + P("bq"), H)
    k = _split_heads(x @ P("wk") + P("bk"), H)
    v = _split_heads(x @ P("wv") + P("bv"), H)
    scale = x.dtype.type(1.0 / math.sqrt(config.head_dim))
    attn = masked_softmax((q @ k.transpose(0, 1, 3, 2)) * scale, mask[:, None, None, :])
    ctx = _merge_heads(attn @ v)
    a = ctx @ P("wo") + P("bo")

    drop_a = drop_f = None
    if train_mode and config.internal_dropout > 0:
        drop_a = _dropout_mask(a.shape, config.internal_dropout, rng, x.dtype)
        a = a * drop_a
    h1, ln1 = layer_norm(x + a, P("ln1_g"), P("ln1_b"))

    u = h1 @ P("w1") + P("b1")
    g = gelu(u)
    f = g @ P("w2") + P("b2")
    if train_mode and config.internal_dropout > 0:
        drop_f = _dropout_mask(f.shape, config.internal_dropout, rng, x.dtype)
        f = f * drop_f
    out, ln2 = layer_norm(h1 + f, P("ln2_g"), P("ln2_b"))
    cache = {
        "x": x, "q": q, "k": k, "v": v, "attn": attn, "ctx": ctx, "drop_a": drop_a,
        "h1": h1, "ln1": ln1, "u": u, "g": g, "drop_f": drop_f, "ln2": ln2, "scale": scale,
    }  # fmt: skip
    return out, cache


def forward(
    params: ModelParams,
    batch: Sequence[EncodedSentence],
    config: ModelConfig,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
    return_cache: bool = False,
    length: int | None = None,
):
    """Logits of shape ``[B, T, tagset_size]``.

    ``T`` is the longest sequence in the batch unless ``length`` pads
    further. With ``return_cache`` the result is ``(logits, cache)``.
    Dropout is inverted, so eval mode is the identity.
    """
    ids, mask, labels = collate(batch, length)
    B, T = ids.shape
    if T > config.max_len:
        raise ValueError(f"sequence length {T} exceeds max_len {config.max_len}")
    if params["tok_emb"].shape != (config.vocab_size, config.d_model):
        raise ValueError("token embedding shape does not match config")
    if ids.max() >= config.vocab_size:
        raise ValueError("subword id outside the vocabulary")
    if train_mode and rng is None and (config.dropout > 0 or config.internal_dropout > 0):
        raise ValueError("train_mode with dropout needs an rng")

    x = params["tok_emb"][ids] + params["pos_emb"][:T]
    layers = []
    for layer in range(config.n_layers):
        x, cache = _layer_forward(x, mask, params, f"layers.{layer}.", config, train_mode, rng)
        layers.append(cache)

    hidden = x
    drop = None
    if train_mode and config.dropout > 0:
        drop = _dropout_mask(hidden.shape, config.dropout, rng, hidden.dtype)
        hidden = hidden * drop
    logits = hidden @ params["head.w"] + params["head.b"]
    if not return_cache:
        return logits
    return logits, {
        "ids": ids,
        "mask": mask,
        "labels": labels,
        "layers": layers,
        "hidden": hidden,
        "drop": drop,
    }


def attention_maps(params: ModelParams, batch: Sequence[EncodedSentence], config: ModelConfig):
    """Eval-mode attention weights, one ``[B, H, T, T]`` array per layer."""
    _, cache = forward(params, batch, config, return_cache=True)
    return [layer["attn"] for layer in cache["layers"]]


# --------------------------------------------------------------------------
# inference


def _decode(logits_row: np.ndarray, alignment: Sequence[int]) -> list[BioTag]:
    # np.argmax returns the first maximum, i.e. the lowest tag index
    tags = [OUTSIDE if pos == TRUNCATED else TAGS[int(np.argmax(logits_row[pos]))] for pos in alignment]
    return repair_bio(tags)


def predict(params: ModelParams, sentence: Sentence, vocab: Vocab, config: ModelConfig) -> list[BioTag]:
    enc = encode_sentence(sentence, vocab, config.max_len)
    logits = forward(params, [enc], config)
    return _decode(logits[0], enc.word_alignment)


def predict_corpus(
    params: ModelParams, corpus: Corpus, vocab: Vocab, config: ModelConfig, batch_size: int = 32
) -> Corpus:
    """Tag every sentence; returns a copy of ``corpus`` with predicted tags."""
    out: list[Sentence] = []
    sents = list(corpus)
    for i in range(0, len(sents), batch_size):
        chunk = sents[i : i + batch_size]
        encoded = [encode_sentence(s, vocab, config.max_len) for s in chunk]
        logits = forward(params, encoded, config)
        for row, sent, enc in zip(logits, chunk, encoded):
            out.append(with_tags(sent, _decode(row, enc.word_alignment)))
    return Corpus(tuple(out), corpus.split_name)
