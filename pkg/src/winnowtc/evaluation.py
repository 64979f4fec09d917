"""Recall/precision evaluation and interpolated break-even points.

A classifier is evaluated by ranking test documents by score. Walking the
ranking from the top induces a precision-recall curve; the break-even
point is the interpolated value where the two measures cross. Categories
are evaluated one-vs-rest and aggregated both macro (mean of per-category
break-evens) and micro (one break-even over the pooled decisions).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .corpus import SparseVector
from .model import Classifier, score

__all__ = [
    "Contingency",
    "EvalReport",
    "PRPoint",
    "break_even",
    "contingency",
    "evaluate",
    "pr_curve",
    "render_report",
]

ScoredLabel = tuple[float, bool]


@dataclass(frozen=True)
class Contingency:
    """Decision counts: p1/p2 = class members decided/undecided, n2/n1 =
    non-members decided/undecided."""

    p1: int = 0
    p2: int = 0
    n1: int = 0
    n2: int = 0

    @property
    def recall(self) -> float:
        return self.p1 / (self.p1 + self.p2) if self.p1 + self.p2 else 0.0

    @property
    def precision(self) -> float:
        return self.p1 / (self.p1 + self.n2) if self.p1 + self.n2 else 1.0


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    recall: float
    precision: float


@dataclass
class EvalReport:
    """Per-category break-evens plus macro/micro aggregates.

    ``skipped`` lists categories without positive test examples (excluded
    from the macro mean); ``approximate`` lists categories whose curve
    never crosses, where the break-even falls back to the closest
    approach.
    """

    per_category: dict[str, float] = field(default_factory=dict)
    per_category_contingency: dict[str, Contingency] = field(default_factory=dict)
    macro_bep: float = 0.0
    micro_bep: float = 0.0
    contingency_at_theta: Contingency = Contingency()
    skipped: list[str] = field(default_factory=list)
    approximate: list[str] = field(default_factory=list)


def contingency(scores: Sequence[ScoredLabel], threshold: float) -> Contingency:
    """Count decisions (score strictly above threshold) against labels."""
    p1 = p2 = n1 = n2 = 0
    for s, label in scores:
        decided = s > threshold
        if label:
            if decided:
                p1 += 1
            else:
                p2 += 1
        elif decided:
            n2 += 1
        else:
            n1 += 1
    return Contingency(p1=p1, p2=p2, n1=n1, n2=n2)


def pr_curve(scores: Sequence[ScoredLabel]) -> list[PRPoint]:
    """Precision-recall points for every cut of the score ranking.

    Items are ordered by descending score with equal scores grouped (a
    cut never splits ties). Cut thresholds lie midway between adjacent
    distinct scores; the accept-none and accept-all endpoints are
    included. Recall is non-decreasing along the returned list.
    """
    total_pos = sum(1 for _, label in scores if label)
    if total_pos == 0:
        raise ValueError("undefined recall: no positive labels")
    total = len(scores)

    ranked = sorted(scores, key=lambda sl: -sl[0])
    # Collapse tie groups to (score, positives-in-group, group-size).
    groups: list[tuple[float, int, int]] = []
    for s, label in ranked:
        if groups and groups[-1][0] == s:
            prev_s, pos, size = groups[-1]
            groups[-1] = (prev_s, pos + int(label), size + 1)
        else:
            groups.append((s, int(label), 1))

    points: list[PRPoint] = []

    def add_point(threshold: float, p1: int, decided: int) -> None:
        n2 = decided - p1
        recall = p1 / total_pos
        precision = p1 / (p1 + n2) if p1 + n2 else 1.0
        points.append(PRPoint(threshold=threshold, recall=recall, precision=precision))

    add_point(groups[0][0] + 1.0, 0, 0)  # accept none
    p1 = decided = 0
    for i, (s, pos, size) in enumerate(groups):
        p1 += pos
        decided += size
        if i + 1 < len(groups):
            add_point((s + groups[i + 1][0]) / 2.0, p1, decided)
    add_point(groups[-1][0] - 1.0, total_pos, total)  # accept all
    return points


def _break_even_detail(curve: Sequence[PRPoint]) -> tuple[float, bool]:
    """Break-even value plus whether an exact crossing was found."""
    if not curve:
        raise ValueError("empty precision-recall curve")
    prev = curve[0]
    d_prev = prev.precision - prev.recall
    if d_prev == 0.0:
        return prev.recall, True
    for pt in curve[1:]:
        d = pt.precision - pt.recall
        if d == 0.0:
            return pt.recall, True
        if (d_prev > 0.0) != (d > 0.0):
            # Linear interpolation of both series between the two points.
            t = d_prev / (d_prev - d)
            return prev.recall + t * (pt.recall - prev.recall), True
        prev, d_prev = pt, d
    best = min(curve, key=lambda p: abs(p.precision - p.recall))
    return (best.precision + best.recall) / 2.0, False


def break_even(curve: Sequence[PRPoint]) -> float:
    """Interpolated value where precision equals recall.

    When the curve never crosses, falls back to the midpoint of precision
    and recall at their closest approach (an approximate break-even).
    """
    value, _ = _break_even_detail(curve)
    return value


LabeledDoc = tuple[SparseVector, frozenset[str]]


def evaluate(
    classifiers: Mapping[str, Classifier], test_docs: Sequence[LabeledDoc]
) -> EvalReport:
    """Score every (document, category) pair and aggregate break-evens.

    All classifiers must share one vocabulary and strength configuration;
    ``test_docs`` pairs each vectorized document with its label set.
    Categories without positive test documents are skipped from the macro
    mean but still contribute their decisions to the micro pool.
    """
    report = EvalReport()
    pooled: list[ScoredLabel] = []
    theta = None
    for category in sorted(classifiers):
        c = classifiers[category]
        theta = c.params.theta if theta is None else theta
        scored = [(score(c, v), category in labels) for v, labels in test_docs]
        pooled.extend(scored)
        if not any(label for _, label in scored):
            report.skipped.append(category)
            continue
        value, exact = _break_even_detail(pr_curve(scored))
        report.per_category[category] = value
        report.per_category_contingency[category] = contingency(scored, c.params.theta)
        if not exact:
            report.approximate.append(category)

    if not report.per_category:
        raise ValueError("no positive test examples in any category")
    report.macro_bep = sum(report.per_category.values()) / len(report.per_category)
    report.micro_bep = break_even(pr_curve(pooled))
    report.contingency_at_theta = contingency(pooled, theta)
    return report


def render_report(report: EvalReport) -> str:
    """Delimited report: one category row, then macro and micro footers."""
    lines = []
    for category, bep in report.per_category.items():
        ct = report.per_category_contingency[category]
        lines.append(f"{category}\t{bep!r}\t{ct.p1} {ct.p2} {ct.n1} {ct.n2}")
    lines.append(f"macro\t{report.macro_bep!r}")
    lines.append(f"micro\t{report.micro_bep!r}")
    return "\n".join(lines) + "\n"
