"""Tests for brute-force verification of the optimal-predictions table."""

import itertools
import random
from fractions import Fraction

import pytest

from eopkit.tradeoffs import (
    FairnessCriterion,
    FiniteHypothesisClass,
    optimal_hypotheses,
    verify_table_row,
)


def all_binary_hypotheses(instances):
    """Every lookup table instances -> {0, 1}."""
    out = []
    for values in itertools.product((0, 1), repeat=len(instances)):
        out.append(dict(zip(instances, values)))
    return out


def binary_class(n_instances=4) -> FiniteHypothesisClass:
    instances = tuple(f"x{i}" for i in range(n_instances))
    return FiniteHypothesisClass(instances, all_binary_hypotheses(instances))


def random_sample(instances, rng, values=(0, 1), realizable_by=None):
    if realizable_by is not None:
        targets = {x: realizable_by[x] for x in instances}
    else:
        targets = {x: rng.choice(values) for x in instances}
    groups = {x: rng.choice("ab") for x in instances}
    groups[instances[0]], groups[instances[1]] = "a", "b"
    return [(x, groups[x], targets[x]) for x in instances]


class TestFiniteHypothesisClass:
    def test_undefined_hypothesis_rejected(self):
        with pytest.raises(ValueError, match="undefined"):
            FiniteHypothesisClass(("x", "y"), [{"x": 1}])

    def test_value_range(self):
        hc = FiniteHypothesisClass(
            ("x",), [{"x": Fraction(1, 2)}, {"x": Fraction(1, 4)}]
        )
        assert hc.y_min == Fraction(1, 4) and hc.y_max == Fraction(1, 2)

    def test_empty_class_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            FiniteHypothesisClass(("x",), [])


class TestOptimalHypotheses:
    def test_social_welfare_prefers_all_ones(self):
        hc = binary_class(3)
        sample = [("x0", "a", 0), ("x1", "b", 1), ("x2", "a", 0)]
        optimal = optimal_hypotheses(hc, sample, "social_welfare")
        assert hc.constant_index(1) in optimal
        assert optimal == {hc.constant_index(1)}

    def test_prd_prefers_all_zeros_unrealizable(self):
        hc = binary_class(3)
        sample = [("x0", "a", 1), ("x1", "b", 0), ("x2", "a", 1)]
        optimal = optimal_hypotheses(hc, sample, "positive_residual_difference")
        assert hc.constant_index(0) in optimal

    def test_nrd_contains_all_ones_and_truth_when_realizable(self):
        hc = binary_class(3)
        truth = {"x0": 1, "x1": 0, "x2": 1}
        sample = [(x, g, truth[x]) for x, g in zip(truth, "aba")]
        optimal = optimal_hypotheses(hc, sample, "negative_residual_difference")
        assert hc.constant_index(1) in optimal
        assert hc.truth_index(sample) in optimal

    def test_order_independence(self):
        rng = random.Random(2)
        hc = binary_class(3)
        sample = random_sample(hc.instance_space, rng)
        base = optimal_hypotheses(hc, sample, "mean_difference")
        order = list(range(len(hc.hypotheses)))
        rng.shuffle(order)
        shuffled_class = FiniteHypothesisClass(
            hc.instance_space, [hc.hypotheses[i] for i in order]
        )
        shuffled = optimal_hypotheses(shuffled_class, sample, "mean_difference")
        assert {order[i] for i in shuffled} == set(base)

    def test_double_brute_force_cross_check(self):
        # independently re-evaluate with a second exhaustive pass
        rng = random.Random(9)
        for _ in range(20):
            instances = ("p", "q", "r")
            hyps = [
                {x: Fraction(rng.randrange(0, 5), 4) for x in instances}
                for _ in range(5)
            ]
            hc = FiniteHypothesisClass(instances, hyps)
            sample = random_sample(
                instances, rng, values=[Fraction(i, 4) for i in range(5)]
            )
            crit = FairnessCriterion.of("positive_residual_difference")
            optimal = optimal_hypotheses(hc, sample, crit)
            scores = {
                i: crit.evaluate(sample, hc.predictions(i, sample))
                for i in reversed(range(len(hyps)))
            }
            best = min(scores.values())
            assert optimal == {i for i, s in scores.items() if s == best}

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            optimal_hypotheses(binary_class(2), [], "social_welfare")

    def test_unsupported_criterion_rejected(self):
        with pytest.raises(ValueError, match="unsupported"):
            optimal_hypotheses(binary_class(2), [("x0", "a", 0)], "atkinson_index")


class TestVerifyTableRow:
    def test_social_welfare_unrealizable_regression(self):
        values = [Fraction(0), Fraction(1, 2), Fraction(1)]
        instances = ("u", "v")
        hyps = [
            {x: v for x in instances} for v in values
        ] + [{"u": Fraction(1, 2), "v": Fraction(1)}]
        hc = FiniteHypothesisClass(instances, hyps)
        sample = [("u", "a", Fraction(1, 4)), ("v", "b", Fraction(3, 4))]
        assert verify_table_row("social_welfare", "unrealizable", "regression", hc, sample)

    def test_nrd_unrealizable_classification(self):
        hc = binary_class(3)
        sample = [("x0", "a", 1), ("x1", "b", 0), ("x2", "b", 1)]
        assert verify_table_row(
            "negative_residual_difference", "unrealizable", "classification", hc, sample
        )

    def test_missing_constant_raises(self):
        hc = FiniteHypothesisClass(("x",), [{"x": 1}])
        with pytest.raises(ValueError, match="constant"):
            verify_table_row(
                "positive_residual_difference", "unrealizable", "classification",
                hc, [("x", "a", 1)],
            )

    def test_unsupported_row_rejected(self):
        hc = binary_class(2)
        with pytest.raises(ValueError, match="no verifiable claim"):
            verify_table_row("atkinson_index", "realizable", "classification",
                             hc, [("x0", "a", 0), ("x1", "b", 1)])

    def test_realizable_truth_achieves_zero_residual_gaps(self):
        rng = random.Random(4)
        for _ in range(20):
            hc = binary_class(4)
            truth = hc.hypotheses[rng.randrange(len(hc.hypotheses))]
            sample = random_sample(hc.instance_space, rng, realizable_by=truth)
            crit_p = FairnessCriterion.of("positive_residual_difference")
            crit_n = FairnessCriterion.of("negative_residual_difference")
            ti = hc.truth_index(sample)
            preds = hc.predictions(ti, sample)
            assert crit_p.evaluate(sample, preds) == 0
            assert crit_n.evaluate(sample, preds) == 0

    def test_welfare_of_ymax_upper_bounds_class(self):
        rng = random.Random(8)
        values = [Fraction(i, 3) for i in range(4)]
        instances = ("s", "t", "u")
        hyps = [{x: rng.choice(values) for x in instances} for _ in range(6)]
        hyps.append({x: max(values) for x in instances})
        hc = FiniteHypothesisClass(instances, hyps)
        sample = random_sample(instances, rng, values=values)
        crit = FairnessCriterion.of("social_welfare")
        top = crit.evaluate(sample, hc.predictions(len(hyps) - 1, sample))
        for i in range(len(hyps)):
            assert crit.evaluate(sample, hc.predictions(i, sample)) <= top

    def test_full_matrix_on_binary_classes(self):
        rng = random.Random(123)
        for _ in range(10):
            hc = binary_class(4)
            truth = hc.hypotheses[rng.randrange(len(hc.hypotheses))]
            for mode in ("realizable", "unrealizable"):
                sample = random_sample(
                    hc.instance_space, rng,
                    realizable_by=truth if mode == "realizable" else None,
                )
                for crit in ("social_welfare", "mean_difference",
                             "positive_residual_difference",
                             "negative_residual_difference"):
                    assert verify_table_row(crit, mode, "classification", hc, sample)
