"""Multi-epoch mistake-driven training with threshold band and filtering.

Training repeats single passes over the examples until an epoch makes no
mistakes or an epoch cap is hit. When filtering is enabled, one filter
event discards every feature whose weight still sits within one
promotion/demotion step of its initial value; training then continues on
the surviving features.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import SparseVector, StrengthMode
from .model import (
    BalancedWinnowModel,
    Classifier,
    HyperParams,
    Outcome,
    PerceptronModel,
    VariantKind,
    demote,
    init_classifier,
    promote,
    train_outcome,
)

__all__ = [
    "FilterPolicy",
    "TrainConfig",
    "TrainReport",
    "apply_filter",
    "filter_range",
    "train",
    "train_epoch",
    "train_example",
]

Example = tuple[SparseVector, bool]


@dataclass(frozen=True)
class FilterPolicy:
    """When and whether to run the single in-training filter event.

    The filter fires after the first epoch whose mistake count is at most
    ``trigger_mistake_fraction`` of the example count, or unconditionally
    after epoch ``trigger_max_epochs``, whichever comes first.
    """

    enabled: bool = False
    trigger_mistake_fraction: float = 0.02
    trigger_max_epochs: int = 10

    def __post_init__(self) -> None:
        if not 0.0 < self.trigger_mistake_fraction <= 1.0:
            raise ValueError("trigger_mistake_fraction must be in (0, 1]")
        if self.trigger_max_epochs < 1:
            raise ValueError("trigger_max_epochs must be >= 1")


@dataclass(frozen=True)
class TrainConfig:
    """Everything that determines a training run besides the corpus."""

    hyper: HyperParams = HyperParams()
    max_epochs: int = 50
    strength_mode: StrengthMode = StrengthMode.BINARY
    normalize: bool = False
    filter: FilterPolicy = FilterPolicy()
    shuffle_seed: int | None = None

    def __post_init__(self) -> None:
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")


@dataclass
class TrainReport:
    epochs_run: int
    mistakes_per_epoch: list[int] = field(default_factory=list)
    filtered_count: int = 0
    converged: bool = False
    filter_epoch: int | None = None


def train_example(c: Classifier, v: SparseVector, label: bool) -> Outcome:
    """Process one example: update weights iff it falls in the mistake band."""
    outcome = train_outcome(c, v, label)
    if outcome is Outcome.NEED_PROMOTE:
        promote(c, v)
    elif outcome is Outcome.NEED_DEMOTE:
        demote(c, v)
    return outcome


def train_epoch(c: Classifier, examples: Sequence[Example]) -> tuple[Classifier, int]:
    """One pass in sequence order; returns the number of mistakes made."""
    mistakes = 0
    for v, label in examples:
        if train_example(c, v, label) is not Outcome.CORRECT:
            mistakes += 1
    return c, mistakes


def filter_range(c: Classifier) -> tuple[float, float]:
    """Closed weight interval reachable by at most one update step.

    Centered on the initial weight: one promotion above, one demotion
    below. Balanced Winnow works on effective coefficients, so the bounds
    come from applying one promotion/demotion to the initial weight pair.
    """
    alpha, beta = c.params.alpha, c.params.beta
    variant = c.variant
    if isinstance(variant, BalancedWinnowModel):
        ip, ineg = variant.initial_pos, variant.initial_neg
        return ip * beta - ineg * alpha, ip * alpha - ineg * beta
    if isinstance(variant, PerceptronModel):
        w0 = variant.initial_weight
        return w0 - alpha, w0 + alpha
    w0 = variant.initial_weight
    return beta * w0, alpha * w0


def apply_filter(c: Classifier) -> tuple[Classifier, int]:
    """Discard every feature whose current weight lies in the filter range.

    Unmaterialized features still carry the initial weight, which is
    inside the range by construction, so they are discarded too. Filtered
    ids are recorded on the classifier and their storage removed; they can
    never score or be re-created afterwards.
    """
    if c.n_features is None:
        raise ValueError("apply_filter needs classifier.n_features (feature-space size)")
    lo, hi = filter_range(c)
    variant = c.variant
    balanced = isinstance(variant, BalancedWinnowModel)
    count = 0
    for fid in range(c.n_features):
        if fid in c.filtered:
            continue
        if lo <= variant.weight(fid) <= hi:
            c.filtered.add(fid)
            count += 1
            if balanced:
                variant.pos_weights.pop(fid, None)
                variant.neg_weights.pop(fid, None)
            else:
                variant.weights.pop(fid, None)
    return c, count


def train(
    c: Classifier,
    examples: Sequence[Example],
    cfg: TrainConfig,
    verbose: bool = False,
) -> tuple[Classifier, TrainReport]:
    """Run epochs until a zero-mistake pass or ``cfg.max_epochs``.

    ``c`` must have been initialized with ``cfg.hyper``. Example order is
    fixed across epochs; if ``shuffle_seed`` is set, one seeded shuffle
    happens before the first epoch. An epoch that triggers the filter
    never ends training, since filtering changes the hypothesis.
    """
    if not examples:
        raise ValueError("empty example set")
    if cfg.hyper != c.params:
        raise ValueError("classifier params differ from cfg.hyper")

    order = list(examples)
    if cfg.shuffle_seed is not None:
        random.Random(cfg.shuffle_seed).shuffle(order)

    report = TrainReport(epochs_run=0)
    policy = cfg.filter
    filter_done = False
    trigger_at = policy.trigger_mistake_fraction * len(order)
    for epoch in range(1, cfg.max_epochs + 1):
        _, mistakes = train_epoch(c, order)
        report.epochs_run = epoch
        report.mistakes_per_epoch.append(mistakes)
        just_filtered = False
        if (
            policy.enabled
            and not filter_done
            and (mistakes <= trigger_at or epoch >= policy.trigger_max_epochs)
        ):
            _, report.filtered_count = apply_filter(c)
            report.filter_epoch = epoch
            filter_done = True
            just_filtered = True
        if verbose:
            print(f"epoch={epoch} mistakes={mistakes} filtered={len(c.filtered)}")
        if mistakes == 0 and not just_filtered:
            report.converged = True
            break
    if not report.converged:
        report.converged = report.mistakes_per_epoch[-1] == 0
    return c, report


def train_one_vs_rest(
    vectorized: Sequence[tuple[SparseVector, frozenset[str]]],
    categories: Sequence[str],
    kind: VariantKind,
    cfg: TrainConfig,
    avg_active: float,
    n_features: int | None = None,
    verbose: bool = False,
) -> tuple[dict[str, Classifier], dict[str, TrainReport]]:
    """Train one binary classifier per category over a shared corpus.

    Each document is a positive example for the categories in its label
    set and a negative for every other. Categories are trained
    independently (and could run concurrently; order here is sorted for
    reproducibility).
    """
    if cfg.normalize and kind is not VariantKind.POSITIVE_WINNOW:
        raise ValueError("strength normalization applies only to positive Winnow")
    classifiers: dict[str, Classifier] = {}
    reports: dict[str, TrainReport] = {}
    for category in sorted(set(categories)):
        c = init_classifier(
            kind,
            cfg.hyper,
            avg_active=avg_active,
            category=category,
            normalized=cfg.normalize,
            n_features=n_features,
        )
        examples = [(v, category in labels) for v, labels in vectorized]
        if verbose:
            print(f"category={category}")
        _, report = train(c, examples, cfg, verbose=verbose)
        classifiers[category] = c
        reports[category] = report
    return classifiers, reports
