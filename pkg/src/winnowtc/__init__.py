"""Sparse mistake-driven linear classifiers for text categorization.

Positive Winnow, balanced Winnow and the perceptron over bag-of-words
features, with length normalization, threshold-band training, frequency
strength modes, in-training feature filtering, break-even evaluation and
synthetic benchmarks.
"""

from .corpus import (
    RawDocument,
    SparseVector,
    StrengthMode,
    Vocabulary,
    build_vocabulary,
    normalize,
    read_corpus,
    tokenize,
    vectorize,
    vectorize_corpus,
    write_corpus,
)
from .model import (
    Classifier,
    HyperParams,
    Outcome,
    VariantKind,
    demote,
    init_classifier,
    load_model,
    predict,
    probability,
    promote,
    save_model,
    score,
    train_outcome,
)
from .training import (
    FilterPolicy,
    TrainConfig,
    TrainReport,
    apply_filter,
    filter_range,
    train,
    train_epoch,
    train_one_vs_rest,
)
from .evaluation import (
    Contingency,
    EvalReport,
    PRPoint,
    break_even,
    contingency,
    evaluate,
    pr_curve,
    render_report,
)

__version__ = "0.1.0"
