"""Sparse linear classifiers with mistake-driven updates.

Three variants share one scoring/update surface:

* positive Winnow: one positive weight per feature, multiplicative updates;
* balanced Winnow: a positive and a negative weight per feature, so the
  effective coefficient ``w+ - w-`` may be negative;
* perceptron: one unconstrained weight per feature, additive updates.

Weights are materialized lazily: a feature keeps its initial weight until
the first update touches it, so every operation is O(active features)
regardless of the dimensionality of the feature space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import exp
from pathlib import Path

from .corpus import SparseVector

__all__ = [
    "BalancedWinnowModel",
    "Classifier",
    "HyperParams",
    "ModelFormatError",
    "Outcome",
    "PerceptronModel",
    "PositiveWinnowModel",
    "VariantKind",
    "demote",
    "init_classifier",
    "load_model",
    "model_text",
    "predict",
    "probability",
    "promote",
    "save_model",
    "score",
    "train_outcome",
]

DEFAULT_ALPHA = 1.5
DEFAULT_BETA = 0.5
PERCEPTRON_ALPHA_FACTOR = 0.1  # default perceptron step is 0.1 * theta


class ModelFormatError(ValueError):
    """A model file does not parse."""


class VariantKind(Enum):
    POSITIVE_WINNOW = "pw"
    BALANCED_WINNOW = "bw"
    PERCEPTRON = "perc"


class Outcome(Enum):
    """Result of checking one training example against the classifier."""

    CORRECT = "correct"
    NEED_PROMOTE = "promote"
    NEED_DEMOTE = "demote"


@dataclass(frozen=True)
class HyperParams:
    """Update parameters and thresholds shared by all variants.

    ``theta`` is the decision threshold; ``theta_minus``/``theta_plus``
    bound the training-time mistake band (equal to ``theta`` for the
    basic algorithms). Winnow variants need ``alpha > 1`` and
    ``0 < beta < 1``; the perceptron uses ``alpha`` as an additive step
    and ignores ``beta``.
    """

    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    theta: float = 1.0
    theta_minus: float | None = None
    theta_plus: float | None = None

    def __post_init__(self) -> None:
        if not self.theta > 0.0:
            raise ValueError(f"theta must be > 0, got {self.theta}")
        if self.theta_minus is None:
            object.__setattr__(self, "theta_minus", self.theta)
        if self.theta_plus is None:
            object.__setattr__(self, "theta_plus", self.theta)
        if not self.theta_minus <= self.theta <= self.theta_plus:
            raise ValueError(
                f"need theta_minus <= theta <= theta_plus, got "
                f"{self.theta_minus} / {self.theta} / {self.theta_plus}"
            )


@dataclass
class PositiveWinnowModel:
    """Multiplicative updates over strictly positive weights."""

    initial_weight: float
    weights: dict[int, float] = field(default_factory=dict)

    def weight(self, fid: int) -> float:
        return self.weights.get(fid, self.initial_weight)

    def promote_feature(self, fid: int, alpha: float, beta: float) -> None:
        self.weights[fid] = self.weight(fid) * alpha

    def demote_feature(self, fid: int, alpha: float, beta: float) -> None:
        self.weights[fid] = self.weight(fid) * beta

    def materialized(self) -> dict[int, float]:
        return self.weights


@dataclass
class BalancedWinnowModel:
    """Paired positive/negative weights; the coefficient is their difference."""

    initial_pos: float
    initial_neg: float
    pos_weights: dict[int, float] = field(default_factory=dict)
    neg_weights: dict[int, float] = field(default_factory=dict)

    def weight(self, fid: int) -> float:
        pos = self.pos_weights.get(fid, self.initial_pos)
        neg = self.neg_weights.get(fid, self.initial_neg)
        return pos - neg

    def promote_feature(self, fid: int, alpha: float, beta: float) -> None:
        self.pos_weights[fid] = self.pos_weights.get(fid, self.initial_pos) * alpha
        self.neg_weights[fid] = self.neg_weights.get(fid, self.initial_neg) * beta

    def demote_feature(self, fid: int, alpha: float, beta: float) -> None:
        self.pos_weights[fid] = self.pos_weights.get(fid, self.initial_pos) * beta
        self.neg_weights[fid] = self.neg_weights.get(fid, self.initial_neg) * alpha

    def materialized(self) -> dict[int, float]:
        return self.pos_weights


@dataclass
class PerceptronModel:
    """Additive updates; weights may cross zero."""

    initial_weight: float
    weights: dict[int, float] = field(default_factory=dict)

    def weight(self, fid: int) -> float:
        return self.weights.get(fid, self.initial_weight)

    def promote_feature(self, fid: int, alpha: float, beta: float) -> None:
        self.weights[fid] = self.weight(fid) + alpha

    def demote_feature(self, fid: int, alpha: float, beta: float) -> None:
        self.weights[fid] = self.weight(fid) - alpha

    def materialized(self) -> dict[int, float]:
        return self.weights


Variant = PositiveWinnowModel | BalancedWinnowModel | PerceptronModel

_KIND_BY_TYPE = {
    PositiveWinnowModel: VariantKind.POSITIVE_WINNOW,
    BalancedWinnowModel: VariantKind.BALANCED_WINNOW,
    PerceptronModel: VariantKind.PERCEPTRON,
}


@dataclass
class Classifier:
    """One per-category linear classifier: variant weights plus metadata.

    ``filtered`` features never contribute to a score and are never
    touched by updates again. ``n_features`` (the feature-space size) is
    optional; it is required only to run in-training feature filtering.
    """

    variant: Variant
    params: HyperParams
    category: str = ""
    filtered: set[int] = field(default_factory=set)
    n_features: int | None = None

    @property
    def kind(self) -> VariantKind:
        return _KIND_BY_TYPE[type(self.variant)]


def init_classifier(
    kind: VariantKind,
    params: HyperParams,
    avg_active: float,
    category: str = "",
    normalized: bool = False,
    n_features: int | None = None,
) -> Classifier:
    """Build a fresh classifier with lazily materialized initial weights.

    Initial weights are theta/avg_active so that initial scores land near
    theta (balanced Winnow: 2*theta/avg_active and theta/avg_active for
    the positive and negative parts). With normalized strengths
    (positive Winnow only) document strengths sum to one, so the initial
    weight is theta itself.
    """
    if not avg_active > 0.0:
        raise ValueError(f"avg_active must be > 0, got {avg_active}")
    theta = params.theta
    if kind is VariantKind.POSITIVE_WINNOW or kind is VariantKind.BALANCED_WINNOW:
        if not params.alpha > 1.0:
            raise ValueError(f"Winnow promotion alpha must be > 1, got {params.alpha}")
        if not 0.0 < params.beta < 1.0:
            raise ValueError(f"Winnow demotion beta must be in (0, 1), got {params.beta}")
    elif not params.alpha > 0.0:
        raise ValueError(f"perceptron step alpha must be > 0, got {params.alpha}")

    variant: Variant
    if kind is VariantKind.POSITIVE_WINNOW:
        w0 = theta if normalized else theta / avg_active
        variant = PositiveWinnowModel(initial_weight=w0)
    elif kind is VariantKind.BALANCED_WINNOW:
        variant = BalancedWinnowModel(
            initial_pos=2.0 * theta / avg_active, initial_neg=theta / avg_active
        )
    else:
        variant = PerceptronModel(initial_weight=theta / avg_active)
    return Classifier(
        variant=variant, params=params, category=category, n_features=n_features
    )


def score(c: Classifier, v: SparseVector) -> float:
    """Dot product over active, non-filtered features (lazy weights)."""
    variant = c.variant
    filtered = c.filtered
    total = 0.0
    if isinstance(variant, BalancedWinnowModel):
        pos, neg = variant.pos_weights, variant.neg_weights
        ip, ineg = variant.initial_pos, variant.initial_neg
        for fid, s in v.pairs:
            if fid in filtered:
                continue
            total += s * (pos.get(fid, ip) - neg.get(fid, ineg))
    else:
        weights = variant.weights
        w0 = variant.initial_weight
        for fid, s in v.pairs:
            if fid in filtered:
                continue
            total += s * weights.get(fid, w0)
    return total


def predict(c: Classifier, v: SparseVector) -> bool:
    """Positive iff the score strictly exceeds theta."""
    return score(c, v) > c.params.theta


def train_outcome(c: Classifier, v: SparseVector, label: bool) -> Outcome:
    """Classify one training example against the mistake band.

    Any score inside the closed band [theta_minus, theta_plus] counts as
    a mistake regardless of label; outside it, only the wrong side does.
    """
    s = score(c, v)
    if label:
        return Outcome.NEED_PROMOTE if s <= c.params.theta_plus else Outcome.CORRECT
    return Outcome.NEED_DEMOTE if s >= c.params.theta_minus else Outcome.CORRECT


def promote(c: Classifier, v: SparseVector) -> None:
    """Strengthen all active, non-filtered features after a missed positive."""
    alpha, beta = c.params.alpha, c.params.beta
    variant = c.variant
    filtered = c.filtered
    for fid, _ in v.pairs:
        if fid not in filtered:
            variant.promote_feature(fid, alpha, beta)


def demote(c: Classifier, v: SparseVector) -> None:
    """Weaken all active, non-filtered features after a false positive."""
    alpha, beta = c.params.alpha, c.params.beta
    variant = c.variant
    filtered = c.filtered
    for fid, _ in v.pairs:
        if fid not in filtered:
            variant.demote_feature(fid, alpha, beta)


def probability(raw_score: float) -> float:
    """Sigmoid of a raw score: 1 / (1 + e^-score), numerically stable."""
    if raw_score >= 0.0:
        return 1.0 / (1.0 + exp(-raw_score))
    e = exp(raw_score)
    return e / (1.0 + e)


# ---------------------------------------------------------------------------
# Model file format (line-oriented UTF-8):
#   winnowtc-model v1 variant=<pw|bw|perc> theta=<..> alpha=<..> beta=<..>
#       init=<..> [vocab=<hash>] category=<name>
#   <feature-id> TAB <w>            (pw / perc, one line per materialized id)
#   <feature-id> TAB <w+> TAB <w->  (bw)
#   filtered: <comma-separated ids>
#
# For balanced Winnow `init` stores the negative-part initial weight; the
# positive part is fixed at twice that. `category` is always the last
# header field so names may contain spaces.

_MODEL_MAGIC = "winnowtc-model v1"


def model_text(c: Classifier, vocab_hash: str = "") -> str:
    """Render the full classifier state as the canonical file text."""
    variant = c.variant
    if isinstance(variant, BalancedWinnowModel):
        init = variant.initial_neg
    else:
        init = variant.initial_weight
    header = (
        f"{_MODEL_MAGIC} variant={c.kind.value} theta={c.params.theta!r} "
        f"alpha={c.params.alpha!r} beta={c.params.beta!r} init={init!r}"
    )
    if vocab_hash:
        header += f" vocab={vocab_hash}"
    header += f" category={c.category}"
    lines = [header]
    if isinstance(variant, BalancedWinnowModel):
        ids = sorted(set(variant.pos_weights) | set(variant.neg_weights))
        for fid in ids:
            wp = variant.pos_weights.get(fid, variant.initial_pos)
            wn = variant.neg_weights.get(fid, variant.initial_neg)
            lines.append(f"{fid}\t{wp!r}\t{wn!r}")
    else:
        for fid in sorted(variant.weights):
            lines.append(f"{fid}\t{variant.weights[fid]!r}")
    lines.append("filtered: " + ",".join(str(fid) for fid in sorted(c.filtered)))
    return "\n".join(lines) + "\n"


def save_model(c: Classifier, path: str | Path, vocab_hash: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(model_text(c, vocab_hash=vocab_hash))


def parse_model_text(text: str) -> tuple[Classifier, str]:
    """Inverse of :func:`model_text`; returns (classifier, vocab_hash)."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith(_MODEL_MAGIC):
        raise ModelFormatError("not a winnowtc model file")
    padded = " " + lines[0][len(_MODEL_MAGIC):].strip()
    category = ""
    idx = padded.find(" category=")
    if idx >= 0:
        category = padded[idx + len(" category="):]
        padded = padded[:idx]
    fields = dict(part.split("=", 1) for part in padded.split() if "=" in part)
    try:
        kind = VariantKind(fields["variant"])
        theta = float(fields["theta"])
        alpha = float(fields["alpha"])
        beta = float(fields["beta"])
        init = float(fields["init"])
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"bad model header: {lines[0]!r}") from exc
    vocab_hash = fields.get("vocab", "")

    params = HyperParams(alpha=alpha, beta=beta, theta=theta)
    variant: Variant
    if kind is VariantKind.POSITIVE_WINNOW:
        variant = PositiveWinnowModel(initial_weight=init)
    elif kind is VariantKind.BALANCED_WINNOW:
        variant = BalancedWinnowModel(initial_pos=2.0 * init, initial_neg=init)
    else:
        variant = PerceptronModel(initial_weight=init)

    filtered: set[int] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        if line.startswith("filtered:"):
            ids = line[len("filtered:"):].strip()
            if ids:
                filtered = {int(tok) for tok in ids.split(",")}
            continue
        parts = line.split("\t")
        try:
            fid = int(parts[0])
            if isinstance(variant, BalancedWinnowModel):
                variant.pos_weights[fid] = float(parts[1])
                variant.neg_weights[fid] = float(parts[2])
            else:
                variant.weights[fid] = float(parts[1])
        except (IndexError, ValueError) as exc:
            raise ModelFormatError(f"line {lineno}: bad weight line {line!r}") from exc
    c = Classifier(variant=variant, params=params, category=category, filtered=filtered)
    return c, vocab_hash


def load_model(path: str | Path) -> tuple[Classifier, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_model_text(fh.read())
