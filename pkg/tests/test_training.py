"""Training loop, threshold band, filtering and dense-reference traces."""

import random

import pytest

from dense_reference import make_dense
from winnowtc.corpus import SparseVector, StrengthMode
from winnowtc.model import (
    Classifier,
    HyperParams,
    VariantKind,
    init_classifier,
    model_text,
    parse_model_text,
    score,
)
from winnowtc.training import (
    FilterPolicy,
    TrainConfig,
    apply_filter,
    filter_range,
    train,
    train_epoch,
)

PW, BW, PERC = VariantKind.POSITIVE_WINNOW, VariantKind.BALANCED_WINNOW, VariantKind.PERCEPTRON


def vec(*fids, strength=1.0):
    return SparseVector(tuple((f, strength) for f in sorted(fids)))


def to_dense(v, n):
    dense = [0.0] * n
    for fid, s in v.pairs:
        dense[fid] = s
    return dense


def effective_weights(c, n):
    return [0.0 if i in c.filtered else c.variant.weight(i) for i in range(n)]


class TestTrainEpoch:
    def test_no_mistakes_leaves_state_unchanged(self):
        c = init_classifier(PW, HyperParams(theta=1.0), avg_active=2.0)
        c.variant.weights.update({0: 2.0, 1: 0.1})
        examples = [(vec(0), True), (vec(1), False)]
        before = model_text(c)
        _, mistakes = train_epoch(c, examples)
        assert mistakes == 0
        assert model_text(c) == before

    def test_single_promotion(self):
        c = init_classifier(PW, HyperParams(theta=1.0, alpha=1.5), avg_active=4.0)
        _, mistakes = train_epoch(c, [(vec(2, 3), True)])  # score 0.5 < theta
        assert mistakes == 1
        assert c.variant.weights[2] == pytest.approx(0.375)
        assert c.variant.weights[3] == pytest.approx(0.375)

    def test_and_target_matches_dense_reference_count(self):
        """AND of features 0 and 1 over the four Boolean inputs."""
        examples = [
            (vec(0, 1), True),
            (vec(0), False),
            (vec(1), False),
            (SparseVector(), False),
        ]
        n = 2
        params = HyperParams(alpha=1.5, beta=0.5, theta=1.0)
        avg = sum(len(v) for v, _ in examples) / len(examples)
        c = init_classifier(BW, params, avg_active=avg)
        dense = make_dense("bw", n, params.alpha, params.beta, params.theta,
                           params.theta, params.theta, avg)
        for epoch in range(25):
            _, mistakes = train_epoch(c, examples)
            dense_mistakes = sum(dense.step(to_dense(v, n), label) for v, label in examples)
            assert mistakes == dense_mistakes
            if mistakes == 0:
                break

    def test_empty_example_list_makes_no_mistakes(self):
        c = init_classifier(PW, HyperParams(), avg_active=2.0)
        _, mistakes = train_epoch(c, [])
        assert mistakes == 0


def separable_examples(seed=11, n=40, count=120):
    """Disjunction of features 0..2 with non-overlapping filler draws."""
    rng = random.Random(seed)
    examples = []
    for _ in range(count):
        if rng.random() < 0.5:
            active = {rng.randint(0, 2)} | {rng.randint(3, n - 1) for _ in range(4)}
            label = True
        else:
            active = {rng.randint(3, n - 1) for _ in range(5)}
            label = False
        examples.append((vec(*active), label))
    return examples


class TestTrain:
    def test_perceptron_converges_on_separable_data(self):
        examples = separable_examples()
        avg = sum(len(v) for v, _ in examples) / len(examples)
        cfg = TrainConfig(hyper=HyperParams(alpha=0.1))
        c = init_classifier(PERC, cfg.hyper, avg_active=avg)
        _, report = train(c, examples, cfg)
        assert report.converged
        assert report.epochs_run < 50
        assert report.mistakes_per_epoch[-1] == 0

    def test_epoch_cap_respected(self):
        examples = separable_examples()
        avg = sum(len(v) for v, _ in examples) / len(examples)
        cfg = TrainConfig(hyper=HyperParams(), max_epochs=1)
        c = init_classifier(BW, cfg.hyper, avg_active=avg)
        _, report = train(c, examples, cfg)
        assert report.epochs_run == 1

    def test_balanced_disjunction_total_mistakes_bounded(self):
        # k=3 disjunction over n=100: multi-epoch mistakes stay far below
        # ten times the k*log2(n) scale (150).
        rng = random.Random(7)
        examples = []
        for _ in range(400):
            if rng.random() < 0.5:
                active = {rng.choice([4, 9, 14])} | set(rng.sample(range(20, 100), 6))
            else:
                active = set(rng.sample(range(20, 100), 7))
            examples.append((vec(*active), 4 in active or 9 in active or 14 in active))
        avg = sum(len(v) for v, _ in examples) / len(examples)
        cfg = TrainConfig(hyper=HyperParams())
        c = init_classifier(BW, cfg.hyper, avg_active=avg)
        _, report = train(c, examples, cfg)
        assert report.converged
        assert sum(report.mistakes_per_epoch) <= 150

    def test_empty_example_set_rejected(self):
        c = init_classifier(BW, HyperParams(), avg_active=2.0)
        with pytest.raises(ValueError, match="empty example set"):
            train(c, [], TrainConfig(hyper=HyperParams()))

    def test_mismatched_hyper_params_rejected(self):
        c = init_classifier(BW, HyperParams(theta=2.0), avg_active=2.0)
        with pytest.raises(ValueError, match="differ"):
            train(c, [(vec(0), True)], TrainConfig(hyper=HyperParams(theta=1.0)))

    def test_mistake_series_reproducible(self):
        examples = separable_examples(seed=3)
        avg = sum(len(v) for v, _ in examples) / len(examples)
        series = []
        for _ in range(2):
            cfg = TrainConfig(hyper=HyperParams(), shuffle_seed=99)
            c = init_classifier(BW, cfg.hyper, avg_active=avg)
            _, report = train(c, examples, cfg)
            series.append(report.mistakes_per_epoch)
        assert series[0] == series[1]

    def test_shuffle_changes_order_but_stays_deterministic(self):
        examples = separable_examples(seed=3)
        avg = sum(len(v) for v, _ in examples) / len(examples)

        def run(seed):
            cfg = TrainConfig(hyper=HyperParams(), shuffle_seed=seed)
            c = init_classifier(BW, cfg.hyper, avg_active=avg)
            _, report = train(c, examples, cfg)
            return model_text(c)

        assert run(1) == run(1)
        assert run(1) != run(2)


class TestBasicModeMatchesDenseReference:
    """With band edges collapsed onto theta, training reduces to the plain
    mistake-driven algorithms; traces must match the dense oracle
    update-for-update."""

    @pytest.mark.parametrize("kind_code", ["pw", "bw", "perc"])
    def test_trace_matches(self, kind_code):
        rng = random.Random(hash(kind_code) % 1000)
        n = 12
        kind = {"pw": PW, "bw": BW, "perc": PERC}[kind_code]
        alpha = 0.2 if kind_code == "perc" else 1.6
        params = HyperParams(alpha=alpha, beta=0.45, theta=1.1)
        examples = []
        for _ in range(150):
            fids = sorted(rng.sample(range(n), rng.randint(1, 5)))
            pairs = tuple((f, rng.uniform(0.3, 2.0)) for f in fids)
            examples.append((SparseVector(pairs), rng.random() < 0.5))
        avg = sum(len(v) for v, _ in examples) / len(examples)
        c = init_classifier(kind, params, avg_active=avg)
        dense = make_dense(kind_code, n, params.alpha, params.beta, params.theta,
                           params.theta, params.theta, avg)
        from winnowtc.training import train_example
        from winnowtc.model import Outcome

        for v, label in examples * 3:
            mistake = train_example(c, v, label) is not Outcome.CORRECT
            assert dense.step(to_dense(v, n), label) == mistake
            for i, (got, want) in enumerate(zip(effective_weights(c, n), dense.weights())):
                assert abs(got - want) <= 1e-12, f"feature {i}"


class TestFilterRange:
    def test_normalized_positive_winnow(self):
        c = init_classifier(PW, HyperParams(alpha=1.5, beta=0.5, theta=1.0),
                            avg_active=10.0, normalized=True)
        assert filter_range(c) == (pytest.approx(0.5), pytest.approx(1.5))

    def test_perceptron(self):
        c = init_classifier(PERC, HyperParams(alpha=0.1, theta=1.0), avg_active=4.0)
        lo, hi = filter_range(c)
        assert lo == pytest.approx(0.15)
        assert hi == pytest.approx(0.35)

    def test_balanced_one_step_effective_bounds(self):
        c = init_classifier(BW, HyperParams(alpha=1.5, beta=0.5, theta=1.0), avg_active=10.0)
        lo, hi = filter_range(c)
        assert lo == pytest.approx(-0.05)
        assert hi == pytest.approx(0.25)


class TestApplyFilter:
    def fresh(self, n=8):
        c = init_classifier(PW, HyperParams(alpha=1.5, beta=0.5, theta=1.0),
                            avg_active=4.0, n_features=n)
        return c

    def test_promoted_once_is_filtered(self):
        c = self.fresh()
        c.variant.weights[0] = c.variant.initial_weight * 1.5
        _, count = apply_filter(c)
        assert 0 in c.filtered
        assert 0 not in c.variant.weights

    def test_promoted_twice_is_retained(self):
        c = self.fresh()
        c.variant.weights[0] = c.variant.initial_weight * 1.5**2
        apply_filter(c)
        assert 0 not in c.filtered
        assert c.variant.weights[0] == pytest.approx(c.variant.initial_weight * 2.25)

    def test_untouched_features_are_filtered(self):
        c = self.fresh(n=8)
        c.variant.weights[0] = c.variant.initial_weight * 1.5**2
        _, count = apply_filter(c)
        assert count == 7
        assert c.filtered == set(range(1, 8))

    def test_canceling_updates_are_filtered(self):
        c = self.fresh()
        w0 = c.variant.initial_weight
        c.variant.weights[0] = w0 * 1.5 * 0.5  # promoted once, demoted once
        apply_filter(c)
        assert 0 in c.filtered

    def test_needs_feature_space_size(self):
        c = init_classifier(PW, HyperParams(), avg_active=4.0)
        with pytest.raises(ValueError, match="n_features"):
            apply_filter(c)

    def test_balanced_filters_on_effective_coefficient(self):
        c = init_classifier(BW, HyperParams(alpha=1.5, beta=0.5, theta=1.0),
                            avg_active=10.0, n_features=4)
        # two promotions: effective 0.2*2.25 - 0.1*0.25 = 0.425 > 0.25
        c.variant.pos_weights[2] = 0.2 * 1.5**2
        c.variant.neg_weights[2] = 0.1 * 0.5**2
        apply_filter(c)
        assert c.filtered == {0, 1, 3}
        assert 2 in c.variant.pos_weights


class TestThickSeparator:
    def test_converged_band_training_separates_widely(self):
        examples = separable_examples(seed=19, n=30, count=100)
        avg = sum(len(v) for v, _ in examples) / len(examples)
        hyper = HyperParams(theta=1.0, theta_minus=0.9, theta_plus=1.1)
        cfg = TrainConfig(hyper=hyper)
        c = init_classifier(BW, hyper, avg_active=avg)
        _, report = train(c, examples, cfg)
        assert report.converged
        for v, label in examples:
            s = score(c, v)
            if label:
                assert s > 1.1
            else:
                assert s < 0.9


class TestFilteredInert:
    def test_filtering_keeps_scores_consistent_after_reload(self):
        examples = separable_examples(seed=29, n=25, count=150)
        avg = sum(len(v) for v, _ in examples) / len(examples)
        cfg = TrainConfig(
            hyper=HyperParams(theta=1.0, theta_minus=0.9, theta_plus=1.1),
            filter=FilterPolicy(enabled=True, trigger_max_epochs=3),
        )
        c = init_classifier(BW, cfg.hyper, avg_active=avg, n_features=25)
        _, report = train(c, examples, cfg)
        assert report.filtered_count > 0
        text = model_text(c, vocab_hash="x")
        back, _ = parse_model_text(text)
        for v, _ in examples:
            assert score(back, v) == score(c, v)

    def test_filtered_features_never_score_even_when_active(self):
        c = init_classifier(PW, HyperParams(theta=1.0), avg_active=2.0, n_features=4)
        c.variant.weights[0] = 9.0
        apply_filter(c)  # filters 1, 2, 3
        assert score(c, vec(1, 2, 3)) == 0.0
        assert score(c, vec(0, 1)) == 9.0
