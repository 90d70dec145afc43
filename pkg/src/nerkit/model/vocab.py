"""Character n-gram subword vocabulary, greedy tokenizer, sentence encoding."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from ..corpus import Corpus, Sentence
from ..taxonomy import TAG_INDEX

PAD, UNK = 0, 1
SPECIALS = ("<pad>", "<unk>")
IGNORE = -100
TRUNCATED = -1
MAX_NGRAM = 6


@dataclass(frozen=True)
class Vocab:
    subwords: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "subwords", tuple(self.subwords))
        if self.subwords[:2] != SPECIALS:
            raise ValueError(f"vocab must start with {SPECIALS}")
        if len(set(self.subwords)) != len(self.subwords):
            raise ValueError("duplicate subwords in vocab")

    def __len__(self) -> int:
        return len(self.subwords)

    @cached_property
    def piece_ids(self) -> dict[str, int]:
        # specials are not matchable pieces
        return {piece: i for i, piece in enumerate(self.subwords) if i >= len(SPECIALS)}

    @cached_property
    def longest(self) -> int:
        return max((len(p) for p in self.piece_ids), default=1)


def build_vocab(corpus: Corpus, max_size: int = 4000) -> Vocab:
    """Specials, every character seen, then the most frequent 2..6-grams.

    N-gram frequencies count every occurrence inside every token occurrence;
    ties are broken lexicographically.
    """
    words = [tok.text for sent in corpus for tok in sent.tokens]
    if not words:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    alphabet = sorted({ch for w in words for ch in w})
    if max_size < len(alphabet) + len(SPECIALS):
        raise ValueError(
            f"max_size {max_size} is below alphabet size {len(alphabet)} + {len(SPECIALS)} specials"
        )
    grams: Counter[str] = Counter()
    for word in words:
        for n in range(2, MAX_NGRAM + 1):
            for i in range(len(word) - n + 1):
                grams[word[i : i + n]] += 1
    for special in SPECIALS:
        grams.pop(special, None)
    ranked = sorted(grams.items(), key=lambda kv: (-kv[1], kv[0]))
    room = max_size - len(SPECIALS) - len(alphabet)
    return Vocab(SPECIALS + tuple(alphabet) + tuple(g for g, _ in ranked[:room]))


def tokenize(word: str, vocab: Vocab) -> list[int]:
    """Greedy longest match, left to right; unknown characters become UNK."""
    ids = []
    pieces = vocab.piece_ids
    i = 0
    while i < len(word):
        for n in range(min(vocab.longest, len(word) - i), 0, -1):
            piece_id = pieces.get(word[i : i + n])
            if piece_id is not None:
                ids.append(piece_id)
                i += n
                break
        else:
            ids.append(UNK)
            i += 1
    return ids


@dataclass(frozen=True)
class EncodedSentence:
    ids: np.ndarray
    labels: np.ndarray
    word_alignment: tuple[int, ...]

    @property
    def mask(self) -> np.ndarray:
        return np.ones(len(self.ids), dtype=bool)

    def __len__(self) -> int:
        return len(self.ids)


def encode_sentence(sentence: Sentence, vocab: Vocab, max_len: int) -> EncodedSentence:
    """Subword ids truncated to ``max_len``; labels on first subwords only.

    ``word_alignment[w]`` is the position of word ``w``'s first subword, or
    ``TRUNCATED`` if it starts beyond ``max_len``.
    """
    ids: list[int] = []
    labels: list[int] = []
    alignment: list[int] = []
    for tok in sentence.tokens:
        pieces = tokenize(tok.text, vocab)
        if len(ids) >= max_len:
            alignment.append(TRUNCATED)
            continue
        alignment.append(len(ids))
        pieces = pieces[: max_len - len(ids)]
        ids.extend(pieces)
        labels.append(TAG_INDEX[tok.tag])
        labels.extend([IGNORE] * (len(pieces) - 1))
    return EncodedSentence(
        np.array(ids, dtype=np.int64), np.array(labels, dtype=np.int64), tuple(alignment)
    )


def collate(batch: Sequence[EncodedSentence], length: int | None = None):
    """Pad a batch to a common length.

    Returns ``(ids, mask, labels)`` arrays of shape ``[B, T]``; padding uses
    ``PAD`` ids, ``False`` mask entries and ``IGNORE`` labels.
    """
    longest = max(len(e) for e in batch)
    T = longest if length is None else length
    if T < longest:
        raise ValueError(f"pad length {T} shorter than longest sequence {longest}")
    ids = np.full((len(batch), T), PAD, dtype=np.int64)
    labels = np.full((len(batch), T), IGNORE, dtype=np.int64)
    mask = np.zeros((len(batch), T), dtype=bool)
    for b, enc in enumerate(batch):
        n = len(enc)
        ids[b, :n] = enc.ids
        labels[b, :n] = enc.labels
        mask[b, :n] = True
    return ids, mask, labels
