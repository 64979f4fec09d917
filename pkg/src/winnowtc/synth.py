"""Synthetic targets and corpora for desk-scale behavioral checks.

Generators produce Boolean-strength examples labeled by a hidden linear
threshold target (disjunction, conjunction, or r-of-k), with filler
features drawn from a Zipf-like rank distribution so that features recur
the way words do in text. On top of these sit two benchmarks: one with
extreme document-length variation (contrasting normalization and negative
weights) and one text-like token corpus (exercising the full vocabulary
pipeline and in-training feature filtering).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .corpus import RawDocument, SparseVector
from .model import (
    HyperParams,
    PERCEPTRON_ALPHA_FACTOR,
    VariantKind,
    init_classifier,
    score,
)
from .evaluation import break_even, pr_curve
from .training import Example, Outcome, TrainConfig, train, train_example

__all__ = [
    "FilteringBenchResult",
    "RateTopicSpec",
    "SynthCorpusSpec",
    "SynthTarget",
    "TargetKind",
    "TextCorpusSpec",
    "gen_examples",
    "gen_rate_topic_examples",
    "gen_text_corpus",
    "length_variation_benchmark",
    "length_variation_scored",
    "mistake_bound_run",
    "online_mistakes",
    "target_value",
    "text_filtering_benchmark",
]


class TargetKind(Enum):
    DISJUNCTION = "disjunction"
    CONJUNCTION = "conjunction"
    R_OF_K = "r-of-k"


@dataclass(frozen=True)
class SynthTarget:
    """A hidden Boolean target over ``n`` features.

    ``r`` matters only for r-of-k targets (a disjunction is 1-of-k, a
    conjunction k-of-k). ``drift_schedule`` swaps the relevant set when
    generation reaches the given example indices.
    """

    kind: TargetKind
    relevant: frozenset[int]
    n: int
    r: int = 1
    drift_schedule: tuple[tuple[int, frozenset[int]], ...] = ()

    def __post_init__(self) -> None:
        if not self.relevant:
            raise ValueError("target needs at least one relevant feature")
        if not all(0 <= f < self.n for f in self.relevant):
            raise ValueError("relevant features must lie in [0, n)")
        if not 1 <= self.r <= len(self.relevant):
            raise ValueError("need 1 <= r <= k")

    @property
    def threshold_count(self) -> int:
        """How many relevant features must be active for a positive label."""
        return _required_hits(self, self.relevant)


def _required_hits(target: SynthTarget, relevant: frozenset[int]) -> int:
    if target.kind is TargetKind.DISJUNCTION:
        return 1
    if target.kind is TargetKind.CONJUNCTION:
        return len(relevant)
    return target.r


def target_value(target: SynthTarget, active: Iterable[int], relevant: frozenset[int]) -> bool:
    """Evaluate the target on an active set, against a given relevant set."""
    hits = sum(1 for f in active if f in relevant)
    return hits >= _required_hits(target, relevant)


@dataclass(frozen=True)
class SynthCorpusSpec:
    """Pure generation parameters; examples are a function of the spec.

    ``positive_rate`` steers the construction mix (how many documents are
    built around a satisfying relevant-feature count), making the label
    balance independent of document length. ``zipf_exponent`` 0 means
    uniform filler sampling; larger values concentrate fillers on a head
    of frequently recurring features.
    """

    n_docs: int
    length_range: tuple[int, int]
    noise_rate: float = 0.0
    seed: int = 0
    zipf_exponent: float = 1.1
    positive_rate: float = 0.5

    def __post_init__(self) -> None:
        lo, hi = self.length_range
        if not (1 <= lo <= hi):
            raise ValueError(f"bad length range {self.length_range}")
        if not 0.0 <= self.noise_rate < 1.0:
            raise ValueError("noise_rate must be in [0, 1)")
        if not 0.0 < self.positive_rate < 1.0:
            raise ValueError("positive_rate must be in (0, 1)")


def _zipf_rank(rng: random.Random, n: int, s: float) -> int:
    """Continuous inverse-CDF sample of a Zipf-like rank in [0, n)."""
    u = rng.random()
    if s == 1.0:
        x = (n + 1.0) ** u
    else:
        top = (n + 1.0) ** (1.0 - s)
        x = (1.0 + u * (top - 1.0)) ** (1.0 / (1.0 - s))
    rank = int(x) - 1
    return min(max(rank, 0), n - 1)


def _draw_fillers(
    rng: random.Random, n: int, s: float, count: int, excluded: frozenset[int]
) -> set[int]:
    """Distinct non-relevant feature ids, Zipf-distributed with rejection."""
    fillers: set[int] = set()
    attempts = 0
    while len(fillers) < count:
        attempts += 1
        if attempts > 50 * count + 200:
            # Head exhausted; top up uniformly so generation always finishes.
            fid = rng.randrange(n)
            if fid in excluded or fid in fillers:
                continue
            fillers.add(fid)
            continue
        fid = _zipf_rank(rng, n, s)
        if fid in excluded or fid in fillers:
            continue
        fillers.add(fid)
    return fillers


def gen_examples(target: SynthTarget, spec: SynthCorpusSpec) -> list[Example]:
    """Generate Boolean-strength examples labeled by the target.

    Half of the documents are constructed around a satisfying count of
    relevant features and half around a falsifying count, so both labels
    occur regardless of document length; the label is always the target
    evaluated on the final active set (then flipped with probability
    ``noise_rate``). Filler features are Zipf-distributed and never
    include relevant ids, so a noiseless corpus is exactly consistent.
    """
    rng = random.Random(spec.seed)
    lo, hi = spec.length_range
    drift = dict(target.drift_schedule)
    relevant = target.relevant
    examples: list[Example] = []
    for i in range(spec.n_docs):
        if i in drift:
            relevant = drift[i]
        k = len(relevant)
        need = _required_hits(target, relevant)
        length = rng.randint(lo, hi)
        if rng.random() < spec.positive_rate:
            hits = rng.randint(need, k)
        else:
            hits = rng.randint(0, need - 1)
        length = max(length, hits)
        chosen = rng.sample(sorted(relevant), hits)
        fillers = _draw_fillers(
            rng, target.n, spec.zipf_exponent, length - hits, relevant
        )
        active = sorted(set(chosen) | fillers)
        label = target_value(target, active, relevant)
        if spec.noise_rate and rng.random() < spec.noise_rate:
            label = not label
        examples.append((SparseVector(tuple((f, 1.0) for f in active)), label))
    return examples


# ---------------------------------------------------------------------------
# Online mistake-bound runs


def _default_params(kind: VariantKind) -> HyperParams:
    if kind is VariantKind.PERCEPTRON:
        return HyperParams(alpha=PERCEPTRON_ALPHA_FACTOR * 1.0)
    return HyperParams()


def online_mistakes(
    kind: VariantKind,
    examples: Sequence[Example],
    params: HyperParams | None = None,
) -> list[bool]:
    """Single online pass; per-example mistake flags (updates applied)."""
    if params is None:
        params = _default_params(kind)
    total = sum(len(v) for v, _ in examples)
    avg_active = total / len(examples) if examples else 0.0
    c = init_classifier(kind, params, avg_active=avg_active)
    return [train_example(c, v, label) is not Outcome.CORRECT for v, label in examples]


def mistake_bound_run(
    kind: VariantKind,
    target: SynthTarget,
    spec: SynthCorpusSpec,
    params: HyperParams | None = None,
) -> int:
    """Total mistakes over one online pass with basic thresholds.

    Meaningful as a bound check only with ``noise_rate`` 0.
    """
    return sum(online_mistakes(kind, gen_examples(target, spec), params))


# ---------------------------------------------------------------------------
# Length-variation benchmark


def _normalize_examples(examples: Sequence[Example]) -> list[Example]:
    out = []
    for v, label in examples:
        total = v.total_strength()
        if total:
            v = SparseVector(tuple((f, s / total) for f, s in v.pairs))
        out.append((v, label))
    return out


@dataclass(frozen=True)
class RateTopicSpec:
    """Latent-topic stream whose evidence scales with document length.

    The label is a hidden topic; every token slot of a document is an
    indicator token with a class-dependent probability (``q_pos`` or
    ``q_neg``), otherwise a Zipf filler. Indicative content therefore
    appears at a steady per-slot rate, the way topical vocabulary does in
    real text, and the data is not linearly separable (a short negative
    with a stray indicator looks exactly like a short positive).
    """

    n_docs: int = 1000
    length_range: tuple[int, int] = (5, 200)
    positive_rate: float = 0.3
    indicator_pool: int = 40
    q_pos: float = 0.20
    q_neg: float = 0.03
    n: int = 2000
    zipf_exponent: float = 0.9
    seed: int = 13


def gen_rate_topic_examples(spec: RateTopicSpec) -> list[Example]:
    """Boolean-strength examples from the length-scaled topic model."""
    rng = random.Random(spec.seed)
    indicators = list(range(10, 10 + spec.indicator_pool))
    ind_set = set(indicators)
    lo, hi = spec.length_range
    out: list[Example] = []
    for _ in range(spec.n_docs):
        z = rng.random() < spec.positive_rate
        length = rng.randint(lo, hi)
        q = spec.q_pos if z else spec.q_neg
        active: set[int] = set()
        for _ in range(length):
            if rng.random() < q:
                active.add(rng.choice(indicators))
            else:
                f = _zipf_rank(rng, spec.n, spec.zipf_exponent)
                if f not in ind_set:
                    active.add(f)
        out.append((SparseVector(tuple((f, 1.0) for f in sorted(active))), z))
    return out


def length_variation_scored(
    train_spec: RateTopicSpec | None = None,
    test_spec: RateTopicSpec | None = None,
    max_epochs: int = 20,
) -> dict[str, list[tuple[float, bool]]]:
    """Train the three variants on the length-spread stream; test scores.

    Returns, per variant, the (score, label) list over the test examples,
    from which break-evens or full curves can be computed.
    """
    if train_spec is None:
        train_spec = RateTopicSpec()
    if test_spec is None:
        test_spec = RateTopicSpec(n_docs=800, seed=train_spec.seed + 1)
    train_examples = gen_rate_topic_examples(train_spec)
    test_examples = gen_rate_topic_examples(test_spec)
    train_norm = _normalize_examples(train_examples)
    test_norm = _normalize_examples(test_examples)
    avg_active = sum(len(v) for v, _ in train_examples) / len(train_examples)

    scored: dict[str, list[tuple[float, bool]]] = {}
    runs = {
        "pw": (VariantKind.POSITIVE_WINNOW, False),
        "pw_norm": (VariantKind.POSITIVE_WINNOW, True),
        "bw": (VariantKind.BALANCED_WINNOW, False),
        "perc": (VariantKind.PERCEPTRON, False),  # additive-update contrast
    }
    for name, (kind, normalized) in runs.items():
        cfg = TrainConfig(
            hyper=_default_params(kind), max_epochs=max_epochs, normalize=normalized
        )
        c = init_classifier(
            kind, cfg.hyper, avg_active=avg_active, category=name, normalized=normalized
        )
        train(c, train_norm if normalized else train_examples, cfg)
        tests = test_norm if normalized else test_examples
        scored[name] = [(score(c, v), label) for v, label in tests]
    return scored


def length_variation_benchmark(
    train_spec: RateTopicSpec | None = None,
    test_spec: RateTopicSpec | None = None,
    max_epochs: int = 20,
) -> dict[str, float]:
    """Break-even points of the three variants under extreme length spread.

    With lengths spanning 5..200 and per-slot topical evidence, the raw
    score of the positive-weights-only variant grows with document length
    wherever weights have not fully decayed, so long off-topic documents
    crowd the top of its ranking. Normalized strengths (or negative
    weights) cancel the length term. Returns a table keyed
    ``pw`` / ``pw_norm`` / ``bw`` plus an additive-update ``perc`` row
    for contrast (no direction is asserted on it).
    """
    scored = length_variation_scored(train_spec, test_spec, max_epochs)
    return {name: break_even(pr_curve(sl)) for name, sl in scored.items()}


# ---------------------------------------------------------------------------
# Text-like token corpus (Zipf-sampled words, multi-label categories)


@dataclass(frozen=True)
class TextCorpusSpec:
    """Token-level corpus with category labels driven by indicator words."""

    n_docs: int = 800
    n_categories: int = 4
    vocab_size: int = 1500
    length_range: tuple[int, int] = (20, 120)
    indicators_per_category: int = 3
    indicator_base_rank: int = 25
    injection_rate: float = 0.45
    label_noise: float = 0.0
    seed: int = 0
    zipf_exponent: float = 1.1


def _token_name(idx: int) -> str:
    """Alphabetic token for a rank (tokenizer keeps letters only)."""
    letters = ""
    while True:
        letters = chr(ord("a") + idx % 26) + letters
        idx //= 26
        if idx == 0:
            return "t" + letters


def _category_indicators(spec: TextCorpusSpec) -> dict[str, list[int]]:
    """Indicator token ranks per category, starting at the base rank."""
    indicators: dict[str, list[int]] = {}
    for i in range(spec.n_categories):
        name = f"cat{i:02d}"
        indicators[name] = [
            spec.indicator_base_rank + i * spec.indicators_per_category + j
            for j in range(spec.indicators_per_category)
        ]
    return indicators


def gen_text_corpus(spec: TextCorpusSpec) -> tuple[list[RawDocument], dict[str, list[int]]]:
    """Zipf-sampled token documents labeled by indicator-word presence.

    Tokens repeat within documents (draws are with replacement), so
    minimum-frequency pruning and the frequency strength modes behave as
    they do on real text. Returns the documents plus the indicator map.
    """
    rng = random.Random(spec.seed)
    indicators = _category_indicators(spec)
    lo, hi = spec.length_range
    docs: list[RawDocument] = []
    for d in range(spec.n_docs):
        length = rng.randint(lo, hi)
        token_ids = [
            _zipf_rank(rng, spec.vocab_size, spec.zipf_exponent) for _ in range(length)
        ]
        if rng.random() < spec.injection_rate:
            cat = rng.choice(sorted(indicators))
            picks = rng.sample(indicators[cat], rng.randint(1, len(indicators[cat])))
            for tok in picks:
                token_ids[rng.randrange(length)] = tok
        present = set(token_ids)
        labels = {
            name
            for name, toks in indicators.items()
            if any(t in present for t in toks)
        }
        if spec.label_noise:
            for name in indicators:
                if rng.random() < spec.label_noise:
                    labels.symmetric_difference_update({name})
        text = " ".join(_token_name(t) for t in token_ids)
        docs.append(RawDocument(doc_id=f"d{d:05d}", text=text, labels=frozenset(labels)))
    return docs, indicators


@dataclass
class FilteringBenchResult:
    """Side-by-side run of the text benchmark with and without filtering."""

    pre_bep: dict[str, float]
    post_bep: dict[str, float]
    filtered_fraction: dict[str, float]
    vocab_size: int
    classifiers: dict[str, object]
    pre_scored: dict[str, list[tuple[float, bool]]]
    post_scored: dict[str, list[tuple[float, bool]]]

    @property
    def macro_pre(self) -> float:
        return sum(self.pre_bep.values()) / len(self.pre_bep)

    @property
    def macro_post(self) -> float:
        return sum(self.post_bep.values()) / len(self.post_bep)


def text_filtering_benchmark(
    spec: TextCorpusSpec | None = None,
    train_fraction: float = 0.6,
) -> FilteringBenchResult:
    """Full-pipeline filtering contrast on the Zipf token corpus.

    Runs tokenization, vocabulary pruning, square-root strengths and
    threshold-band balanced Winnow twice (filtering off, then on,
    identical otherwise) and reports per-category break-evens plus the
    fraction of vocabulary features each category discarded.
    """
    from .corpus import build_vocabulary, vectorize_corpus
    from .training import FilterPolicy, train_one_vs_rest
    from .corpus import StrengthMode

    if spec is None:
        spec = TextCorpusSpec()
    docs, indicators = gen_text_corpus(spec)
    split = int(len(docs) * train_fraction)
    train_docs, test_docs = docs[:split], docs[split:]
    vocab = build_vocabulary(train_docs, min_frequency=3)
    train_vecs = vectorize_corpus(train_docs, vocab, StrengthMode.SQRT)
    test_vecs = vectorize_corpus(test_docs, vocab, StrengthMode.SQRT)
    avg_active = vocab.avg_active
    hyper = HyperParams(theta=1.0, theta_minus=0.9, theta_plus=1.1)
    categories = sorted(indicators)

    results: list[dict[str, float]] = []
    scored_runs: list[dict[str, list[tuple[float, bool]]]] = []
    classifiers_on: dict[str, object] = {}
    fractions: dict[str, float] = {}
    for enabled in (False, True):
        cfg = TrainConfig(
            hyper=hyper,
            strength_mode=StrengthMode.SQRT,
            filter=FilterPolicy(enabled=enabled),
        )
        classifiers, reports = train_one_vs_rest(
            train_vecs,
            categories,
            VariantKind.BALANCED_WINNOW,
            cfg,
            avg_active=avg_active,
            n_features=len(vocab),
        )
        beps = {}
        run_scored: dict[str, list[tuple[float, bool]]] = {}
        for cat, c in classifiers.items():
            scored = [(score(c, v), cat in labels) for v, labels in test_vecs]
            run_scored[cat] = scored
            beps[cat] = break_even(pr_curve(scored))
        results.append(beps)
        scored_runs.append(run_scored)
        if enabled:
            classifiers_on = dict(classifiers)
            fractions = {
                cat: reports[cat].filtered_count / len(vocab) for cat in categories
            }
    return FilteringBenchResult(
        pre_bep=results[0],
        post_bep=results[1],
        filtered_fraction=fractions,
        vocab_size=len(vocab),
        classifiers=classifiers_on,
        pre_scored=scored_runs[0],
        post_scored=scored_runs[1],
    )
