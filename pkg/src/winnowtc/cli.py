"""Command line: vocab, train, eval, predict, bench.

Data goes to the output stream or output files; diagnostics go to stderr.
Flags override values from an optional flat ``key = value`` config file,
which overrides built-in defaults. The ``bw+`` algorithm alias selects
balanced Winnow with the threshold band 0.9..1.1, square-root strengths
and feature filtering.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from .corpus import (
    RawDocument,
    StrengthMode,
    build_vocabulary,
    load_vocabulary,
    read_corpus,
    save_vocabulary,
    vectorize,
    vectorize_corpus,
    normalize as normalize_vector,
    vocabulary_hash,
)
from .evaluation import break_even, contingency, evaluate, pr_curve, render_report
from .model import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    PERCEPTRON_ALPHA_FACTOR,
    HyperParams,
    VariantKind,
    load_model,
    probability,
    save_model,
    score,
)
from .training import FilterPolicy, TrainConfig, train_one_vs_rest

__all__ = ["main"]

_ALGORITHMS = ("pw", "bw", "perc", "bw+")
_STRENGTHS = {"binary": StrengthMode.BINARY, "linear": StrengthMode.LINEAR, "sqrt": StrengthMode.SQRT}
_BWPLUS_PRESETS = {
    "strength": "sqrt",
    "theta_minus": "0.9",
    "theta_plus": "1.1",
    "filter": "true",
}
_CFG_FILE = "train.cfg"
_VOCAB_FILE = "vocab.txt"


def _read_config(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path} line {lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


class _Settings:
    """Layered option lookup: CLI flag > config file > alias preset > default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = _read_config(args.config) if getattr(args, "config", None) else {}
        self.presets: dict[str, str] = {}
        self.algorithm = self.pick_str("algorithm", None)
        if self.algorithm == "bw+":
            self.presets = dict(_BWPLUS_PRESETS)

    def _raw(self, name: str):
        flag = getattr(self.args, name, None)
        if flag is not None:
            return flag
        if name in self.config:
            return self.config[name]
        if name in self.presets:
            return self.presets[name]
        return None

    def pick_str(self, name: str, default):
        raw = self._raw(name)
        return default if raw is None else str(raw)

    def pick_float(self, name: str, default):
        raw = self._raw(name)
        return default if raw is None else float(raw)

    def pick_int(self, name: str, default):
        raw = self._raw(name)
        return default if raw is None else int(raw)

    def pick_bool(self, name: str, default: bool) -> bool:
        raw = self._raw(name)
        if raw is None:
            return default
        if isinstance(raw, bool):
            return raw
        return _parse_bool(raw)


def _variant_kind(algorithm: str) -> VariantKind:
    if algorithm == "bw+":
        return VariantKind.BALANCED_WINNOW
    try:
        return VariantKind(algorithm)
    except ValueError:
        raise ValueError(
            f"unknown algorithm {algorithm!r} (expected one of {', '.join(_ALGORITHMS)})"
        ) from None


def _build_train_config(settings: _Settings) -> tuple[VariantKind, TrainConfig, int]:
    if settings.algorithm is None:
        raise ValueError("no algorithm given (use --algorithm or a config file)")
    kind = _variant_kind(settings.algorithm)
    theta = settings.pick_float("theta", 1.0)
    if kind is VariantKind.PERCEPTRON:
        alpha = settings.pick_float("alpha", PERCEPTRON_ALPHA_FACTOR * theta)
    else:
        alpha = settings.pick_float("alpha", DEFAULT_ALPHA)
    hyper = HyperParams(
        alpha=alpha,
        beta=settings.pick_float("beta", DEFAULT_BETA),
        theta=theta,
        theta_minus=settings.pick_float("theta_minus", theta),
        theta_plus=settings.pick_float("theta_plus", theta),
    )
    strength = settings.pick_str("strength", "binary")
    if strength not in _STRENGTHS:
        raise ValueError(f"unknown strength mode {strength!r}")
    cfg = TrainConfig(
        hyper=hyper,
        max_epochs=settings.pick_int("max_epochs", 50),
        strength_mode=_STRENGTHS[strength],
        normalize=settings.pick_bool("normalize", False),
        filter=FilterPolicy(
            enabled=settings.pick_bool("filter", False),
            trigger_mistake_fraction=settings.pick_float("filter_trigger", 0.02),
            trigger_max_epochs=settings.pick_int("filter_epoch_cap", 10),
        ),
        shuffle_seed=settings.pick_int("seed", None),
    )
    min_freq = settings.pick_int("min_freq", 3)
    return kind, cfg, min_freq


def _safe_filename(category: str, taken: set[str]) -> str:
    base = re.sub(r"[^A-Za-z0-9_.-]", "_", category) or "category"
    name = base
    counter = 1
    while name in taken:
        counter += 1
        name = f"{base}.{counter}"
    taken.add(name)
    return name


def _write_train_cfg(path: Path, kind: VariantKind, cfg: TrainConfig, min_freq: int, vhash: str) -> None:
    h = cfg.hyper
    lines = [
        f"algorithm = {kind.value}",
        f"strength = {cfg.strength_mode.value}",
        f"normalize = {'true' if cfg.normalize else 'false'}",
        f"theta = {h.theta!r}",
        f"theta_minus = {h.theta_minus!r}",
        f"theta_plus = {h.theta_plus!r}",
        f"alpha = {h.alpha!r}",
        f"beta = {h.beta!r}",
        f"max_epochs = {cfg.max_epochs}",
        f"filter = {'true' if cfg.filter.enabled else 'false'}",
        f"filter_trigger = {cfg.filter.trigger_mistake_fraction!r}",
        f"filter_epoch_cap = {cfg.filter.trigger_max_epochs}",
        f"min_freq = {min_freq}",
        f"vocab_hash = {vhash}",
    ]
    if cfg.shuffle_seed is not None:
        lines.append(f"seed = {cfg.shuffle_seed}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Subcommands


def cmd_vocab(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    min_freq = settings.pick_int("min_freq", 3)
    docs = read_corpus(args.corpus)
    vocab = build_vocabulary(docs, min_frequency=min_freq)
    save_vocabulary(vocab, args.out)
    print(
        f"vocabulary: {len(vocab)} features, avg_active={vocab.avg_active:.2f}",
        file=sys.stderr,
    )
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    kind, cfg, min_freq = _build_train_config(settings)
    docs = read_corpus(args.corpus)
    vocab = load_vocabulary(args.vocab)
    if vocab.min_frequency != min_freq and settings._raw("min_freq") is not None:
        print(
            f"note: vocabulary was built with min_freq={vocab.min_frequency}",
            file=sys.stderr,
        )
    categories = sorted({label for doc in docs for label in doc.labels})
    if not categories:
        raise ValueError("corpus has no labeled documents; nothing to train")
    vectorized = vectorize_corpus(
        docs, vocab, cfg.strength_mode, normalized=cfg.normalize
    )
    classifiers, reports = train_one_vs_rest(
        vectorized,
        categories,
        kind,
        cfg,
        avg_active=vocab.avg_active,
        n_features=len(vocab),
        verbose=args.verbose,
    )

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    vhash = vocabulary_hash(vocab)
    save_vocabulary(vocab, out_dir / _VOCAB_FILE)
    _write_train_cfg(out_dir / _CFG_FILE, kind, cfg, vocab.min_frequency, vhash)

    taken: set[str] = set()
    log_lines: list[str] = []
    for category in categories:
        c = classifiers[category]
        report = reports[category]
        save_model(c, out_dir / f"{_safe_filename(category, taken)}.model", vocab_hash=vhash)
        log_lines.append(f"category={category}")
        for i, mistakes in enumerate(report.mistakes_per_epoch, start=1):
            filtered = (
                report.filtered_count
                if report.filter_epoch is not None and i >= report.filter_epoch
                else 0
            )
            log_lines.append(f"epoch={i} mistakes={mistakes} filtered={filtered}")
    (out_dir / "training.log").write_text("\n".join(log_lines) + "\n", encoding="utf-8")

    if not args.no_figures:
        from .figures import render_training_curves

        render_training_curves(
            {cat: reports[cat].mistakes_per_epoch for cat in categories},
            out_dir / "training_mistakes.png",
        )
    print(f"trained {len(categories)} categories into {out_dir}", file=sys.stderr)
    return 0


def _load_models_dir(models_dir: str | Path):
    models_dir = Path(models_dir)
    vocab_path = models_dir / _VOCAB_FILE
    cfg_path = models_dir / _CFG_FILE
    if not vocab_path.exists():
        raise ValueError(f"{models_dir}: missing {_VOCAB_FILE}")
    if not cfg_path.exists():
        raise ValueError(f"{models_dir}: missing {_CFG_FILE}")
    vocab = load_vocabulary(vocab_path)
    cfg = _read_config(cfg_path)
    vhash = vocabulary_hash(vocab)
    if cfg.get("vocab_hash") and cfg["vocab_hash"] != vhash:
        raise ValueError(f"{models_dir}: vocabulary file was modified after training")
    classifiers = {}
    for model_path in sorted(models_dir.glob("*.model")):
        c, model_hash = load_model(model_path)
        if model_hash and model_hash != vhash:
            raise ValueError(
                f"{model_path.name}: trained against a different vocabulary"
            )
        classifiers[c.category] = c
    if not classifiers:
        raise ValueError(f"{models_dir}: no .model files found")
    mode = _STRENGTHS[cfg.get("strength", "binary")]
    normalized = _parse_bool(cfg.get("normalize", "false"))
    return vocab, classifiers, mode, normalized


def cmd_eval(args: argparse.Namespace) -> int:
    vocab, classifiers, mode, normalized = _load_models_dir(args.models)
    docs = read_corpus(args.corpus)
    for category in sorted({l for doc in docs for l in doc.labels} - set(classifiers)):
        print(f"warning: no model for category {category}; skipped", file=sys.stderr)
    vectorized = vectorize_corpus(docs, vocab, mode, normalized=normalized)
    report = evaluate(classifiers, vectorized)

    text = render_report(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)

    for category in report.skipped:
        print(f"note: category {category} skipped (no positive test documents)", file=sys.stderr)
    for category in report.approximate:
        print(
            f"note: category {category}: approximate break-even (curve never crosses)",
            file=sys.stderr,
        )
    print(
        "note: summary break-even is macro-averaged; the table reports both macro and micro",
        file=sys.stderr,
    )

    if args.out and not args.no_figures:
        from .figures import render_bep_bars, render_pr_curves

        stem = Path(args.out)
        curves = {}
        for category, c in sorted(classifiers.items()):
            if category in report.per_category:
                scored = [(score(c, v), category in labels) for v, labels in vectorized]
                curves[category] = pr_curve(scored)
        render_pr_curves(curves, stem.with_name(stem.stem + "_pr.png"))
        render_bep_bars(report.per_category, stem.with_name(stem.stem + "_bep.png"))
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    vocab, classifiers, mode, normalized = _load_models_dir(args.models)
    if args.text is not None:
        text = args.text
    elif args.input:
        text = Path(args.input).read_text(encoding="utf-8")
    else:
        text = sys.stdin.read()
    if not text.strip():
        return 0
    v = vectorize(RawDocument(doc_id="input", text=text), vocab, mode)
    if normalized:
        v = normalize_vector(v)
    rows = []
    for category, c in classifiers.items():
        s = score(c, v)
        rows.append((s, category, probability(s - c.params.theta), s > c.params.theta))
    rows.sort(key=lambda row: (-row[0], row[1]))
    for s, category, prob, decision in rows:
        print(f"{category}\t{s!r}\t{prob!r}\t{'true' if decision else 'false'}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else 13
    theta = 1.0
    if args.benchmark == "length":
        from .synth import RateTopicSpec, length_variation_scored

        scored = length_variation_scored(train_spec=RateTopicSpec(seed=seed))
        rows = {name: sl for name, sl in scored.items()}
        title = "Length-variation benchmark"
    else:
        from .synth import TextCorpusSpec, text_filtering_benchmark

        result = text_filtering_benchmark(TextCorpusSpec(seed=seed, label_noise=0.05))
        rows = {}
        for cat, sl in result.pre_scored.items():
            rows[f"{cat}.nofilter"] = sl
        for cat, sl in result.post_scored.items():
            rows[f"{cat}.filter"] = sl
        for cat, frac in sorted(result.filtered_fraction.items()):
            print(f"note: {cat}: filtered {frac:.1%} of {result.vocab_size} features", file=sys.stderr)
        title = "Filtering benchmark"

    beps = {}
    lines = []
    pooled = []
    for name in sorted(rows):
        sl = rows[name]
        pooled.extend(sl)
        bep = break_even(pr_curve(sl))
        beps[name] = bep
        ct = contingency(sl, theta)
        lines.append(f"{name}\t{bep!r}\t{ct.p1} {ct.p2} {ct.n1} {ct.n2}")
    macro = sum(beps.values()) / len(beps)
    micro = break_even(pr_curve(pooled))
    lines.append(f"macro\t{macro!r}")
    lines.append(f"micro\t{micro!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)

    if args.out and not args.no_figures:
        from .figures import render_bep_bars, render_pr_curves

        stem = Path(args.out)
        render_pr_curves(
            {name: pr_curve(sl) for name, sl in rows.items()},
            stem.with_name(stem.stem + "_pr.png"),
            title=title,
        )
        render_bep_bars(beps, stem.with_name(stem.stem + "_bep.png"), title=title)
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file; flags override it")
    p.add_argument("--algorithm", choices=_ALGORITHMS, help="classifier variant")
    p.add_argument("--normalize", action="store_const", const=True, default=None,
                   help="length-normalized strengths (positive Winnow only)")
    p.add_argument("--strength", choices=sorted(_STRENGTHS), help="feature strength mode")
    p.add_argument("--theta", type=float, help="decision threshold (default 1.0)")
    p.add_argument("--theta-minus", dest="theta_minus", type=float,
                   help="lower edge of the training mistake band")
    p.add_argument("--theta-plus", dest="theta_plus", type=float,
                   help="upper edge of the training mistake band")
    p.add_argument("--alpha", type=float, help="promotion parameter / perceptron step")
    p.add_argument("--beta", type=float, help="demotion parameter (Winnow variants)")
    p.add_argument("--max-epochs", dest="max_epochs", type=int, help="epoch cap (default 50)")
    p.add_argument("--filter", dest="filter", action="store_const", const=True, default=None,
                   help="enable in-training feature filtering")
    p.add_argument("--no-filter", dest="filter", action="store_const", const=False,
                   help="disable in-training feature filtering")
    p.add_argument("--filter-trigger", dest="filter_trigger", type=float,
                   help="mistake fraction that triggers filtering (default 0.02)")
    p.add_argument("--filter-epoch-cap", dest="filter_epoch_cap", type=int,
                   help="latest epoch at which filtering fires (default 10)")
    p.add_argument("--min-freq", dest="min_freq", type=int,
                   help="minimum corpus frequency for vocabulary tokens (default 3)")
    p.add_argument("--seed", type=int, help="shuffle / generation seed")
    p.add_argument("--verbose", action="store_true", help="per-epoch training log on stdout")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="winnowtc",
        description="Mistake-driven sparse linear text categorization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_vocab = sub.add_parser("vocab", help="build a vocabulary file from a corpus")
    p_vocab.add_argument("--corpus", required=True, help="training corpus file")
    p_vocab.add_argument("--out", required=True, help="vocabulary file to write")
    _add_shared_flags(p_vocab)
    p_vocab.set_defaults(func=cmd_vocab)

    p_train = sub.add_parser("train", help="train one classifier per category")
    p_train.add_argument("--corpus", required=True, help="training corpus file")
    p_train.add_argument("--vocab", required=True, help="vocabulary file")
    p_train.add_argument("--out-dir", dest="out_dir", required=True,
                         help="directory for model files, vocab copy and log")
    _add_shared_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate trained models on a corpus")
    p_eval.add_argument("--models", required=True, help="directory produced by train")
    p_eval.add_argument("--corpus", required=True, help="test corpus file")
    p_eval.add_argument("--out", help="report file (default: stdout, no figures)")
    _add_shared_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_pred = sub.add_parser("predict", help="score a document against all categories")
    p_pred.add_argument("--models", required=True, help="directory produced by train")
    p_pred.add_argument("--text", help="document text on the command line")
    p_pred.add_argument("--input", help="file with the document text (default: stdin)")
    _add_shared_flags(p_pred)
    p_pred.set_defaults(func=cmd_predict)

    p_bench = sub.add_parser("bench", help="run a synthetic benchmark")
    p_bench.add_argument("--benchmark", choices=("length", "filtering"), default="length")
    p_bench.add_argument("--out", help="table file (default: stdout, no figures)")
    _add_shared_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
