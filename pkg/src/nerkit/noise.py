"""Seeded character-level typo simulator.

Each selected token receives exactly one edit drawn uniformly from the
enabled operations. Tags are never touched, so gold spans stay valid for
the corrupted text.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .corpus import Corpus, Sentence, Token

OPS = ("swap-adjacent", "delete-char", "substitute-char", "duplicate-char")


@dataclass(frozen=True)
class NoiseConfig:
    rate: float = 0.1
    ops: tuple[str, ...] = OPS
    seed: int = 0
    # None: use the characters of the corpus being corrupted
    alphabet: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate must lie in [0, 1], got {self.rate}")
        unknown = set(self.ops) - set(OPS)
        if unknown:
            raise ValueError(f"unknown noise ops: {sorted(unknown)}")
        if self.rate > 0 and not self.ops:
            raise ValueError("at least one op is required when rate > 0")
        if self.alphabet is not None and (not self.alphabet or any(c.isspace() for c in self.alphabet)):
            raise ValueError("alphabet must be non-empty and free of whitespace")


def corrupt_word(word: str, config: NoiseConfig, rng: random.Random, alphabet: str | None = None) -> str:
    """Apply one randomly chosen enabled edit to ``word``.

    Swap and delete need at least two characters; on single-character words
    they fall back to a substitution so the result is never empty.
    """
    if not word:
        raise ValueError("cannot corrupt an empty word")
    chars = alphabet or config.alphabet or word
    op = rng.choice(config.ops)
    if len(word) < 2 and op in ("swap-adjacent", "delete-char"):
        op = "substitute-char"
    if op == "swap-adjacent":
        i = rng.randrange(len(word) - 1)
        return word[:i] + word[i + 1] + word[i] + word[i + 2 :]
    if op == "delete-char":
        i = rng.randrange(len(word))
        return word[:i] + word[i + 1 :]
    if op == "duplicate-char":
        i = rng.randrange(len(word))
        return word[: i + 1] + word[i:]
    i = rng.randrange(len(word))
    return word[:i] + rng.choice(chars) + word[i + 1 :]


def corpus_alphabet(corpus: Corpus) -> str:
    return "".join(sorted({ch for sent in corpus for tok in sent.tokens for ch in tok.text}))


def corrupt_corpus(corpus: Corpus, config: NoiseConfig) -> tuple[Corpus, frozenset[str]]:
    """Corrupt each token independently with probability ``config.rate``.

    Returns the corrupted corpus and the ids of sentences in which at least
    one token actually changed.
    """
    rng = random.Random(config.seed)
    alphabet = config.alphabet or corpus_alphabet(corpus)
    sentences: list[Sentence] = []
    changed: set[str] = set()
    for sent in corpus:
        tokens = []
        for tok in sent.tokens:
            text = tok.text
            if config.rate > 0 and rng.random() < config.rate:
                text = corrupt_word(text, config, rng, alphabet)
                if text != tok.text:
                    changed.add(sent.id)
            tokens.append(Token(text, tok.tag))
        sentences.append(Sentence(sent.id, tuple(tokens), sent.domain))
    return Corpus(tuple(sentences), corpus.split_name), frozenset(changed)


def write_membership(path: str | Path, ids: Iterable[str], order: Iterable[str] | None = None) -> None:
    """One sentence id per line; corpus order when ``order`` is given, else sorted."""
    ids = set(ids)
    ordered = [i for i in order if i in ids] if order is not None else sorted(ids)
    Path(path).write_text("".join(f"{i}\n" for i in ordered), encoding="utf-8")


def read_membership(path: str | Path) -> frozenset[str]:
    text = Path(path).read_text(encoding="utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())
