"""MultiCoNER-style CoNLL reading/writing and the BIO <-> span algebra.

File layout, one block per sentence::

    # id <ID>[ domain=<D>]
    <token> _ _ <tag>
    ...
    <blank line>

Lenient parsing (the default) maps unknown tags to ``O`` and rewrites
orphan or label-switching ``I-X`` tags to ``B-X``. Strict parsing collects
every violation and raises :class:`ConllFormatError`.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .errors import BioError, ConllFormatError, UnknownTagError
from .taxonomy import FINE_LABELS, OUTSIDE, BioTag, parse_tag, render_tag

SPLITS = ("train", "dev", "test", "other")
VIOLATION_KINDS = ("orphan-I", "label-switch-I", "unknown-tag", "column-count", "empty-sentence")

_STRICT_META_RE = re.compile(r"^# id (\S+)(?: domain=(\S+))?$")
_WS_RE = re.compile(r"\s")


@dataclass(frozen=True)
class Token:
    text: str
    tag: BioTag = OUTSIDE

    def __post_init__(self):
        if not self.text or _WS_RE.search(self.text):
            raise ValueError(f"token text must be non-empty without whitespace: {self.text!r}")


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple[Token, ...]
    domain: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError(f"sentence {self.id!r} has no tokens")
        if not self.id or _WS_RE.search(self.id):
            raise ValueError(f"sentence id must be non-empty without whitespace: {self.id!r}")
        if self.domain is not None and (not self.domain or _WS_RE.search(self.domain)):
            raise ValueError(f"domain must be non-empty without whitespace: {self.domain!r}")

    @property
    def words(self) -> list[str]:
        return [tok.text for tok in self.tokens]

    @property
    def tags(self) -> list[BioTag]:
        return [tok.tag for tok in self.tokens]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...] = ()
    split_name: str = "other"

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if self.split_name not in SPLITS:
            raise ValueError(f"split_name must be one of {SPLITS}, got {self.split_name!r}")
        seen: set[str] = set()
        for sent in self.sentences:
            if sent.id in seen:
                raise ValueError(f"duplicate sentence id {sent.id!r}")
            seen.add(sent.id)

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.sentences]

    def subset(self, ids: Iterable[str]) -> "Corpus":
        """Sentences whose id is in ``ids``, in corpus order."""
        keep = set(ids)
        return Corpus(tuple(s for s in self.sentences if s.id in keep), self.split_name)


class Span(NamedTuple):
    start: int
    end: int
    label: str


class Violation(NamedTuple):
    sentence_id: str
    index: int
    kind: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        return [f"{v.sentence_id}\t{v.index}\t{v.kind}" for v in self.violations]


@dataclass(frozen=True)
class CorpusStats:
    sentences: int = 0
    tokens: int = 0
    spans: dict[str, int] = field(default_factory=dict)


# --------------------------------------------------------------------------
# BIO algebra


def validate_bio(tags: Sequence[BioTag], sentence_id: str = "") -> ValidationReport:
    violations = []
    prev = OUTSIDE
    for i, tag in enumerate(tags):
        if tag.kind == "I":
            if prev.kind == "O":
                violations.append(Violation(sentence_id, i, "orphan-I"))
            elif prev.label != tag.label:
                violations.append(Violation(sentence_id, i, "label-switch-I"))
        prev = tag
    return ValidationReport(tuple(violations))


def repair_bio(tags: Sequence[BioTag]) -> list[BioTag]:
    """Rewrite every I-X that does not continue an X entity to B-X."""
    out: list[BioTag] = []
    prev = OUTSIDE
    for tag in tags:
        if tag.kind == "I" and (prev.kind == "O" or prev.label != tag.label):
            tag = BioTag("B", tag.label)
        out.append(tag)
        prev = tag
    return out


def spans_from_bio(tags: Sequence[BioTag]) -> list[Span]:
    """Collapse ``B-X (I-X)*`` runs into half-open spans.

    Raises:
        BioError: on an I tag that does not continue an open entity of the
            same label. Repair the sequence first.
    """
    spans: list[Span] = []
    start, label = -1, None
    for i, tag in enumerate(tags):
        if tag.kind == "I":
            if label != tag.label:
                raise BioError(f"invalid I tag {render_tag(tag)} at index {i}")
            continue
        if label is not None:
            spans.append(Span(start, i, label))
            start, label = -1, None
        if tag.kind == "B":
            start, label = i, tag.label
    if label is not None:
        spans.append(Span(start, len(tags), label))
    return spans


def bio_from_spans(spans: Iterable[Span], length: int) -> list[BioTag]:
    tags = [OUTSIDE] * length
    for span in sorted(spans):
        start, end, label = span
        if not 0 <= start < end <= length:
            raise BioError(f"span {tuple(span)} out of range for length {length}")
        if any(t is not OUTSIDE for t in tags[start:end]):
            raise BioError(f"span {tuple(span)} overlaps another span")
        tags[start] = BioTag("B", label)
        for i in range(start + 1, end):
            tags[i] = BioTag("I", label)
    return tags


def sentence_spans(sentence: Sentence) -> list[Span]:
    return spans_from_bio(repair_bio(sentence.tags))


def corpus_stats(corpus: Corpus) -> CorpusStats:
    counts: Counter[str] = Counter()
    n_tokens = 0
    for sent in corpus:
        n_tokens += len(sent)
        counts.update(span.label for span in sentence_spans(sent))
    per_class = {label: counts[label] for label in FINE_LABELS if counts[label]}
    return CorpusStats(len(corpus), n_tokens, per_class)


# --------------------------------------------------------------------------
# reading and writing


class _Block:
    def __init__(self, first_line: int):
        self.first_line = first_line
        self.id: str | None = None
        self.domain: str | None = None
        self.tokens: list[tuple[str, BioTag]] = []
        self.issues: list[tuple[int, str]] = []


def _parse_meta(line: str, lineno: int, strict: bool) -> tuple[str, str | None]:
    if strict:
        m = _STRICT_META_RE.match(line)
        if m:
            return m.group(1), m.group(2)
    else:
        fields = line.split()
        if len(fields) == 3:
            return fields[2], None
        if len(fields) == 4 and fields[3].startswith("domain=") and len(fields[3]) > 7:
            return fields[2], fields[3][7:]
    raise ConllFormatError(f"line {lineno}: malformed metadata line {line!r}")


def _read(text: str, strict: bool, split_name: str) -> tuple[Corpus, list[Violation]]:
    sentences: list[Sentence] = []
    violations: list[Violation] = []
    seen: set[str] = set()
    block: _Block | None = None

    def close() -> None:
        nonlocal block
        if block is None:
            return
        b, block = block, None
        sid = b.id if b.id is not None else f"line-{b.first_line}"
        if sid in seen:
            raise ConllFormatError(f"line {b.first_line}: duplicate sentence id {sid!r}")
        seen.add(sid)
        if not b.tokens:
            violations.append(Violation(sid, 0, "empty-sentence"))
            return
        violations.extend(Violation(sid, i, kind) for i, kind in b.issues)
        tags = [tag for _, tag in b.tokens]
        violations.extend(validate_bio(tags, sid).violations)
        tokens = tuple(Token(t, tag) for (t, _), tag in zip(b.tokens, repair_bio(tags)))
        sentences.append(Sentence(sid, tokens, b.domain))

    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.rstrip("\r")
        if not line.strip():
            close()
            continue
        fields = line.split()
        if fields[0] == "#" and len(fields) > 1 and fields[1] == "id":
            close()
            block = _Block(lineno)
            block.id, block.domain = _parse_meta(line, lineno, strict)
            continue
        if line.startswith("#") and len(fields) != 4:
            raise ConllFormatError(f"line {lineno}: malformed metadata line {line!r}")

        if block is None:
            block = _Block(lineno)
        index = len(block.tokens)
        columns = line.split(" ") if strict else fields
        if len(columns) != 4 or not all(columns) or len(fields) != 4:
            block.issues.append((index, "column-count"))
        token = fields[0]
        tag = OUTSIDE
        if len(fields) >= 2:
            try:
                tag = parse_tag(fields[-1])
            except UnknownTagError:
                block.issues.append((index, "unknown-tag"))
        block.tokens.append((token, tag))
    close()

    return Corpus(tuple(sentences), split_name), violations


def parse_conll(text: str, strict: bool = False, split_name: str = "other") -> Corpus:
    """Parse a CoNLL document into a :class:`Corpus`.

    Raises:
        ConllFormatError: on a malformed metadata line or a duplicate id, and
            in strict mode on any violation (all of them are attached).
    """
    corpus, violations = _read(text, strict, split_name)
    if strict and violations:
        first = violations[0]
        raise ConllFormatError(
            f"{len(violations)} violation(s); first: {first.kind} in sentence "
            f"{first.sentence_id!r} at token {first.index}",
            violations,
        )
    return corpus


def validate_conll(text: str, strict: bool = True) -> ValidationReport:
    """Collect violations without raising on them."""
    _, violations = _read(text, strict, "other")
    return ValidationReport(tuple(violations))


def serialize_conll(corpus: Corpus) -> str:
    out: list[str] = []
    for sent in corpus:
        meta = f"# id {sent.id}"
        if sent.domain is not None:
            meta += f" domain={sent.domain}"
        out.append(meta + "\n")
        out.extend(f"{tok.text} _ _ {render_tag(tok.tag)}\n" for tok in sent.tokens)
        out.append("\n")
    return "".join(out)


def read_conll(path: str | Path, strict: bool = False, split_name: str = "other") -> Corpus:
    return parse_conll(Path(path).read_text(encoding="utf-8"), strict, split_name)


def write_conll(path: str | Path, corpus: Corpus) -> None:
    Path(path).write_text(serialize_conll(corpus), encoding="utf-8")


def with_tags(sentence: Sentence, tags: Sequence[BioTag]) -> Sentence:
    """Copy of ``sentence`` carrying ``tags`` instead of its own."""
    if len(tags) != len(sentence):
        raise ValueError(f"expected {len(sentence)} tags, got {len(tags)}")
    tokens = tuple(Token(tok.text, tag) for tok, tag in zip(sentence.tokens, tags))
    return Sentence(sentence.id, tokens, sentence.domain)
