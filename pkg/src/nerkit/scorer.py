"""Entity-level exact-match scoring with macro averaging.

A predicted span counts as a true positive only when start, end and label
all match a gold span. Per-class precision, recall and F1 are averaged with
equal weight over the class universe: by default the classes that occur in
gold or prediction, optionally the full fine (33) or coarse (6) label set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Iterable, Sequence

from .corpus import Corpus, Span, sentence_spans
from .errors import AlignmentError, BioError
from .taxonomy import COARSE_LABELS, FINE_LABELS, coarse_of

GRANULARITIES = ("fine", "coarse")


@dataclass
class ClassCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __iadd__(self, other: "ClassCounts") -> "ClassCounts":
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn
        return self


@dataclass(frozen=True)
class ClassScore:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class ScoreReport:
    granularity: str
    per_class: dict[str, ClassScore]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    class_universe: tuple[str, ...]


@dataclass(frozen=True)
class SplitScoreReport:
    overall: ScoreReport
    corrupted: ScoreReport
    uncorrupted: ScoreReport
    membership: frozenset[str] = field(default_factory=frozenset)


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


def _check_sorted_disjoint(spans: Sequence[Span], which: str) -> None:
    for a, b in zip(spans, spans[1:]):
        if b.start < a.end:
            raise BioError(f"{which} spans overlap or are unsorted: {tuple(a)} / {tuple(b)}")


def match_spans(gold: Sequence[Span], pred: Sequence[Span]) -> dict[str, ClassCounts]:
    """Count per-class tp/fp/fn for one sentence.

    Spans within each list are disjoint, so an exact (start, end, label)
    match pairs at most one prediction with each gold span.
    """
    _check_sorted_disjoint(gold, "gold")
    _check_sorted_disjoint(pred, "pred")
    counts: dict[str, ClassCounts] = {}
    gold_set = set(gold)
    pred_set = set(pred)
    for span in pred:
        c = counts.setdefault(span.label, ClassCounts())
        if span in gold_set:
            c.tp += 1
        else:
            c.fp += 1
    for span in gold:
        if span not in pred_set:
            counts.setdefault(span.label, ClassCounts()).fn += 1
    return counts


def _coarsen(spans: Iterable[Span]) -> list[Span]:
    return [Span(s.start, s.end, coarse_of(s.label)) for s in spans]


def _aligned_pairs(gold: Corpus, pred: Corpus):
    if len(gold) != len(pred):
        raise AlignmentError(f"gold has {len(gold)} sentences, prediction has {len(pred)}")
    for g, p in zip(gold, pred):
        if g.id != p.id:
            raise AlignmentError(f"sentence id mismatch: gold {g.id!r} vs prediction {p.id!r}")
        if len(g) != len(p):
            raise AlignmentError(
                f"sentence {g.id!r}: gold has {len(g)} tokens, prediction has {len(p)}"
            )
        yield g, p


def count_corpus(gold: Corpus, pred: Corpus, granularity: str = "fine") -> dict[str, ClassCounts]:
    if granularity not in GRANULARITIES:
        raise ValueError(f"granularity must be one of {GRANULARITIES}")
    totals: dict[str, ClassCounts] = {}
    for g, p in _aligned_pairs(gold, pred):
        gs, ps = sentence_spans(g), sentence_spans(p)
        if granularity == "coarse":
            gs, ps = _coarsen(gs), _coarsen(ps)
        for label, c in match_spans(gs, ps).items():
            totals.setdefault(label, ClassCounts())
            totals[label] += c
    return totals


def report_from_counts(
    counts: dict[str, ClassCounts], granularity: str = "fine", full_universe: bool = False
) -> ScoreReport:
    order = FINE_LABELS if granularity == "fine" else COARSE_LABELS
    if full_universe:
        universe = order
    else:
        universe = tuple(c for c in order if c in counts)
    per_class = {}
    for label in universe:
        c = counts.get(label, ClassCounts())
        per_class[label] = ClassScore(*prf(c.tp, c.fp, c.fn), c.tp, c.fp, c.fn)
    n = len(universe)
    if n:
        macro_p = sum(s.precision for s in per_class.values()) / n
        macro_r = sum(s.recall for s in per_class.values()) / n
        macro_f = sum(s.f1 for s in per_class.values()) / n
    else:
        macro_p = macro_r = macro_f = 0.0
    return ScoreReport(granularity, per_class, macro_p, macro_r, macro_f, tuple(universe))


def macro_report(
    gold: Corpus, pred: Corpus, granularity: str = "fine", full_universe: bool = False
) -> ScoreReport:
    """Score ``pred`` against ``gold``.

    Both corpora must list the same sentence ids in the same order with the
    same token counts. Predicted tag sequences are repaired before span
    extraction.

    Raises:
        AlignmentError: naming the first sentence that does not line up.
    """
    counts = count_corpus(gold, pred, granularity)
    return report_from_counts(counts, granularity, full_universe)


def split_report(
    gold: Corpus,
    pred: Corpus,
    corrupted_ids: Iterable[str],
    granularity: str = "fine",
    full_universe: bool = False,
) -> SplitScoreReport:
    corrupted = frozenset(corrupted_ids)
    missing = corrupted.difference(gold.ids)
    if missing:
        raise AlignmentError(f"corrupted ids not in gold: {sorted(missing)[:5]}")
    clean = [i for i in gold.ids if i not in corrupted]
    return SplitScoreReport(
        overall=macro_report(gold, pred, granularity, full_universe),
        corrupted=macro_report(
            gold.subset(corrupted), pred.subset(corrupted), granularity, full_universe
        ),
        uncorrupted=macro_report(gold.subset(clean), pred.subset(clean), granularity, full_universe),
        membership=corrupted,
    )


# --------------------------------------------------------------------------
# output formats


def fmt4(x: float) -> str:
    """Four decimals, round-half-even on the shortest decimal repr of ``x``."""
    return str(Decimal(repr(x)).quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN))


def format_report(report: ScoreReport, title: str | None = None) -> str:
    header = f"{'class':<24}{'precision':>10}{'recall':>10}{'f1':>10}{'tp':>7}{'fp':>7}{'fn':>7}"
    lines = []
    if title:
        lines.append(title)
    lines.append(header)
    lines.append("-" * len(header))
    tp = fp = fn = 0
    for label in report.class_universe:
        s = report.per_class[label]
        tp, fp, fn = tp + s.tp, fp + s.fp, fn + s.fn
        lines.append(
            f"{label:<24}{fmt4(s.precision):>10}{fmt4(s.recall):>10}{fmt4(s.f1):>10}"
            f"{s.tp:>7}{s.fp:>7}{s.fn:>7}"
        )
    lines.append("-" * len(header))
    lines.append(
        f"{'MACRO (' + report.granularity + ')':<24}{fmt4(report.macro_precision):>10}"
        f"{fmt4(report.macro_recall):>10}{fmt4(report.macro_f1):>10}{tp:>7}{fp:>7}{fn:>7}"
    )
    return "\n".join(lines) + "\n"


def format_split_report(report: SplitScoreReport) -> str:
    parts = [
        format_report(report.overall, "== overall"),
        format_report(report.corrupted, f"== corrupted ({len(report.membership)} sentences)"),
        format_report(report.uncorrupted, "== uncorrupted"),
    ]
    return "\n".join(parts)


def _rounded(x: float) -> float:
    return float(fmt4(x))


def report_to_dict(report: ScoreReport) -> dict:
    classes = []
    for label in report.class_universe:
        s = report.per_class[label]
        classes.append(
            {
                "class": label,
                "precision": _rounded(s.precision),
                "recall": _rounded(s.recall),
                "f1": _rounded(s.f1),
                "tp": s.tp,
                "fp": s.fp,
                "fn": s.fn,
            }
        )
    return {
        "granularity": report.granularity,
        "classes": classes,
        "macro": {
            "class": "MACRO",
            "precision": _rounded(report.macro_precision),
            "recall": _rounded(report.macro_recall),
            "f1": _rounded(report.macro_f1),
            "tp": sum(c["tp"] for c in classes),
            "fp": sum(c["fp"] for c in classes),
            "fn": sum(c["fn"] for c in classes),
        },
    }


def split_report_to_dict(report: SplitScoreReport) -> dict:
    return {
        "overall": report_to_dict(report.overall),
        "corrupted": report_to_dict(report.corrupted),
        "uncorrupted": report_to_dict(report.uncorrupted),
        "corrupted_ids": sorted(report.membership),
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"
