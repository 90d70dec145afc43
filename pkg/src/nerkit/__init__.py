"""Multilingual fine-grained NER: CoNLL I/O, a numpy transformer tagger,
AdamW training, and entity-level macro-F1 scoring."""

__version__ = "0.1.0"
