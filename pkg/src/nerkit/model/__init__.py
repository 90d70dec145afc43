from .encoder import (
    ModelConfig,
    ModelParams,
    attention_maps,
    forward,
    init_params,
    param_shapes,
    predict,
    predict_corpus,
)
from .loss import softmax_cross_entropy
from .vocab import IGNORE, PAD, TRUNCATED, UNK, EncodedSentence, Vocab, build_vocab, encode_sentence, tokenize

__all__ = [
    "IGNORE",
    "PAD",
    "TRUNCATED",
    "UNK",
    "EncodedSentence",
    "ModelConfig",
    "ModelParams",
    "Vocab",
    "attention_maps",
    "build_vocab",
    "encode_sentence",
    "forward",
    "init_params",
    "param_shapes",
    "predict",
    "predict_corpus",
    "softmax_cross_entropy",
    "tokenize",
]
