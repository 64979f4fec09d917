#!/usr/bin/env python3
"""Regenerate the committed 10-category fixture and its golden break-evens.

The fixture corpora are written to tests/data/, then the standard pipeline
(minimum frequency 3, square-root strengths, balanced Winnow with the
0.9..1.1 band, filtering, shuffle seed 17) is trained in memory and every
test document scored. Break-evens are computed by the brute-force oracle
in bep_oracle.py, NOT by the package's evaluation module, so the golden
file is an independent reference for it.

Run from the repository root:  python3 tests/make_golden_bep.py
"""

from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent))

from bep_oracle import brute_force_bep, brute_force_curve
from winnowtc.corpus import StrengthMode, build_vocabulary, vectorize_corpus, write_corpus
from winnowtc.model import HyperParams, VariantKind, score
from winnowtc.synth import TextCorpusSpec, gen_text_corpus
from winnowtc.training import FilterPolicy, TrainConfig, train_one_vs_rest

DATA_DIR = Path(__file__).parent / "data"

FIXTURE_SPEC = TextCorpusSpec(
    n_docs=500,
    n_categories=10,
    vocab_size=1800,
    indicators_per_category=3,
    indicator_base_rank=150,
    injection_rate=0.5,
    label_noise=0.03,
    seed=2026,
)
TRAIN_SPLIT = 300
SHUFFLE_SEED = 17

TRAIN_CONFIG = TrainConfig(
    hyper=HyperParams(theta=1.0, theta_minus=0.9, theta_plus=1.1),
    strength_mode=StrengthMode.SQRT,
    filter=FilterPolicy(enabled=True),
    shuffle_seed=SHUFFLE_SEED,
)


def main() -> None:
    DATA_DIR.mkdir(exist_ok=True)
    docs, _ = gen_text_corpus(FIXTURE_SPEC)
    train_docs, test_docs = docs[:TRAIN_SPLIT], docs[TRAIN_SPLIT:]
    write_corpus(train_docs, DATA_DIR / "fixture_train.tsv")
    write_corpus(test_docs, DATA_DIR / "fixture_test.tsv")

    vocab = build_vocabulary(train_docs, min_frequency=3)
    train_vecs = vectorize_corpus(train_docs, vocab, StrengthMode.SQRT)
    test_vecs = vectorize_corpus(test_docs, vocab, StrengthMode.SQRT)
    categories = sorted({label for doc in train_docs for label in doc.labels})
    classifiers, _ = train_one_vs_rest(
        train_vecs,
        categories,
        VariantKind.BALANCED_WINNOW,
        TRAIN_CONFIG,
        avg_active=vocab.avg_active,
        n_features=len(vocab),
    )

    lines = []
    beps = {}
    pooled = []
    for category in categories:
        c = classifiers[category]
        scored = [(score(c, v), category in labels) for v, labels in test_vecs]
        pooled.extend(scored)
        beps[category] = brute_force_bep(brute_force_curve(scored))
        lines.append(f"{category}\t{beps[category]!r}")
    macro = sum(beps.values()) / len(beps)
    micro = brute_force_bep(brute_force_curve(pooled))
    lines.append(f"macro\t{macro!r}")
    lines.append(f"micro\t{micro!r}")
    (DATA_DIR / "golden_bep.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {DATA_DIR / 'golden_bep.tsv'}")
    for line in lines:
        print(" ", line)


if __name__ == "__main__":
    main()
