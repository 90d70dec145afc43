"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class NerkitError(Exception):
    """Base class for all toolkit errors."""


class UnknownTagError(NerkitError, ValueError):
    def __init__(self, tag: str):
        super().__init__(f"unknown tag: {tag!r}")
        self.tag = tag


class ConllFormatError(NerkitError, ValueError):
    """Malformed CoNLL input.

    ``violations`` holds ``(sentence_id, token_index, kind)`` triples when the
    error comes from strict validation.
    """

    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class BioError(NerkitError, ValueError):
    """Tag or span sequence that breaks BIO well-formedness."""


class AlignmentError(NerkitError, ValueError):
    """Gold and predicted corpora do not line up sentence by sentence."""


class CheckpointError(NerkitError):
    pass


class NumericError(NerkitError, ArithmeticError):
    """Non-finite loss or gradient encountered."""
