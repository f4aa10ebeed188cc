"""Brute-force verification of optimal predictions under fairness criteria.

Over a finite hypothesis class and a finite sample, each criterion can
be optimized by exhaustive evaluation, which makes claims of the form
"the constant predictor is optimal for social welfare" mechanically
checkable.  The claims verified here:

====================  ==========================  ======================
criterion             classification              regression
====================  ==========================  ======================
social welfare        1 (realizable and not)      y_max (both)
mean difference       0 or 1 (both)               any constant (both)
pos. residual diff.   0, plus truth if realizable y_min, plus truth if r.
neg. residual diff.   1, plus truth if realizable y_max, plus truth if r.
====================  ==========================  ======================

Social welfare at this level is the average predicted outcome (average
allocation); the max-min utility objective used in training is a
different quantity and lives in the solver.  Tie sets are reported in
full, never broken: several of the claims above name multiple optima.

Instances, predictions, and targets may be exact number types; with
exact inputs the optimal sets are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

from .metrics import (
    mean_difference,
    negative_residual_difference,
    positive_residual_difference,
)

__all__ = [
    "FiniteHypothesisClass",
    "FairnessCriterion",
    "CRITERION_NAMES",
    "optimal_hypotheses",
    "verify_table_row",
    "table_claims",
    "random_verification_instance",
]

CRITERION_NAMES = (
    "social_welfare",
    "mean_difference",
    "positive_residual_difference",
    "negative_residual_difference",
)

# (instance, group, target) rows evaluated against lookup-table hypotheses
Sample = Sequence[tuple[Hashable, Hashable, object]]


@dataclass(frozen=True)
class FiniteHypothesisClass:
    """A finite set of lookup-table hypotheses over a finite instance space."""

    instance_space: tuple
    hypotheses: tuple

    def __post_init__(self):
        if not self.hypotheses:
            raise ValueError("hypothesis class must be non-empty")
        object.__setattr__(self, "instance_space", tuple(self.instance_space))
        object.__setattr__(self, "hypotheses", tuple(dict(h) for h in self.hypotheses))
        for i, h in enumerate(self.hypotheses):
            missing = [x for x in self.instance_space if x not in h]
            if missing:
                raise ValueError(f"hypothesis {i} undefined on {missing!r}")

    @property
    def prediction_values(self) -> list:
        vals = {h[x] for h in self.hypotheses for x in self.instance_space}
        return sorted(vals)

    @property
    def y_max(self):
        return self.prediction_values[-1]

    @property
    def y_min(self):
        return self.prediction_values[0]

    def constant_index(self, value) -> int | None:
        """Index of the hypothesis predicting ``value`` everywhere, if any."""
        for i, h in enumerate(self.hypotheses):
            if all(h[x] == value for x in self.instance_space):
                return i
        return None

    def truth_index(self, sample: Sample) -> int | None:
        """Index of a hypothesis reproducing every target in ``sample``."""
        for i, h in enumerate(self.hypotheses):
            if all(h[x] == y for x, _, y in sample):
                return i
        return None

    def predictions(self, index: int, sample: Sample) -> list:
        h = self.hypotheses[index]
        return [h[x] for x, _, _ in sample]


@dataclass(frozen=True)
class FairnessCriterion:
    """A named criterion together with its optimization direction."""

    name: str
    direction: str  # "maximize" or "minimize"

    @classmethod
    def of(cls, name: str) -> "FairnessCriterion":
        if name not in CRITERION_NAMES:
            raise ValueError(
                f"unsupported criterion {name!r}; supported: {CRITERION_NAMES}"
            )
        return cls(name, "maximize" if name == "social_welfare" else "minimize")

    def evaluate(self, sample: Sample, predictions: Sequence):
        y = [t for _, _, t in sample]
        z = [g for _, g, _ in sample]
        if self.name == "social_welfare":
            return sum(predictions) / len(predictions)
        if self.name == "mean_difference":
            return mean_difference(predictions, z).gap
        if self.name == "positive_residual_difference":
            return positive_residual_difference(y, predictions, z).gap
        return negative_residual_difference(y, predictions, z).gap


def optimal_hypotheses(
    hclass: FiniteHypothesisClass,
    sample: Sample,
    criterion: FairnessCriterion | str,
) -> frozenset[int]:
    """Indices of every hypothesis attaining the criterion's optimum.

    Exhaustive evaluation; the result is independent of enumeration
    order, and ties are preserved as a set.
    """
    if isinstance(criterion, str):
        criterion = FairnessCriterion.of(criterion)
    if not sample:
        raise ValueError("sample must be non-empty")
    scores = [
        criterion.evaluate(sample, hclass.predictions(i, sample))
        for i in range(len(hclass.hypotheses))
    ]
    best = max(scores) if criterion.direction == "maximize" else min(scores)
    return frozenset(i for i, s in enumerate(scores) if s == best)


def table_claims(
    criterion_name: str,
    mode: str,
    task: str,
    hclass: FiniteHypothesisClass,
) -> list[tuple]:
    """The claimed optimizers for one cell of the optimal-predictions table.

    Claims are ``("constant", value)`` or ``("truth",)`` markers resolved
    against a concrete class by :func:`verify_table_row`.
    """
    if criterion_name not in CRITERION_NAMES:
        raise ValueError(
            f"criterion {criterion_name!r} has no verifiable claim; "
            f"supported: {CRITERION_NAMES}"
        )
    if mode not in ("realizable", "unrealizable"):
        raise ValueError(f"unknown mode {mode!r}")
    if task not in ("classification", "regression"):
        raise ValueError(f"unknown task {task!r}")

    hi = 1 if task == "classification" else hclass.y_max
    lo = 0 if task == "classification" else hclass.y_min
    realizable = mode == "realizable"

    if criterion_name == "social_welfare":
        return [("constant", hi)]
    if criterion_name == "mean_difference":
        if task == "classification":
            return [("constant", 0), ("constant", 1)]
        return [("constant", v) for v in hclass.prediction_values
                if hclass.constant_index(v) is not None]
    if criterion_name == "positive_residual_difference":
        return [("constant", lo)] + ([("truth",)] if realizable else [])
    return [("constant", hi)] + ([("truth",)] if realizable else [])


def random_verification_instance(
    mode: str, task: str, seed: int, n_instances: int = 4
) -> tuple[FiniteHypothesisClass, list[tuple]]:
    """A random class-and-sample pair on which the table claims apply.

    Classification builds the full binary lookup class (16 hypotheses on
    4 instances); regression uses the quarter-grid constants plus random
    lookup tables.  Realizable mode draws the targets from a hypothesis
    in the class; targets always lie within the class's prediction
    range, as the table's preamble assumes.  Everything is exact
    rational arithmetic, so optimal sets have exact ties.
    """
    import itertools
    import random as _random
    from fractions import Fraction

    rng = _random.Random(seed)
    instances = tuple(f"x{i}" for i in range(n_instances))
    if task == "classification":
        hypotheses = [
            dict(zip(instances, values))
            for values in itertools.product((0, 1), repeat=n_instances)
        ]
        value_pool = (0, 1)
    else:
        values = [Fraction(i, 4) for i in range(5)]
        hypotheses = [{x: v for x in instances} for v in values]
        seen = {tuple(h[x] for x in instances) for h in hypotheses}
        while len(hypotheses) < 16:
            cand = tuple(rng.choice(values) for _ in instances)
            if cand not in seen:
                seen.add(cand)
                hypotheses.append(dict(zip(instances, cand)))
        value_pool = values
    hclass = FiniteHypothesisClass(instances, hypotheses)
    if mode == "realizable":
        truth = hclass.hypotheses[rng.randrange(len(hclass.hypotheses))]
        targets = {x: truth[x] for x in instances}
    else:
        targets = {x: rng.choice(value_pool) for x in instances}
    groups = {x: rng.choice("ab") for x in instances}
    groups[instances[0]], groups[instances[1]] = "a", "b"
    sample = [(x, groups[x], targets[x]) for x in instances]
    return hclass, sample


def verify_table_row(
    criterion_name: str,
    mode: str,
    task: str,
    hclass: FiniteHypothesisClass,
    sample: Sample,
) -> bool:
    """Whether every claimed optimizer lies in the brute-force optimal set.

    Raises if a claimed optimizer is not representable in the class (the
    claims only make sense for classes containing them).
    """
    claims = table_claims(criterion_name, mode, task, hclass)
    resolved = []
    for claim in claims:
        if claim[0] == "constant":
            idx = hclass.constant_index(claim[1])
            if idx is None:
                raise ValueError(
                    f"class has no constant-{claim[1]!r} hypothesis required by the claim"
                )
        else:
            idx = hclass.truth_index(sample)
            if idx is None:
                raise ValueError(
                    "realizable-mode claim needs a hypothesis matching every target"
                )
        resolved.append(idx)
    optimal = optimal_hypotheses(hclass, sample, criterion_name)
    return all(idx in optimal for idx in resolved)
