"""Exact equality-of-opportunity checks on finite discrete distributions.

Two checkers implement the two substantive readings of equality of
opportunity for a predictive model:

* Rawlsian (absolutist): at every fixed effort-based-utility level, the
  distribution of advantage must be identical across groups.  The
  effort-based utility may depend only on the label, never on the group
  or the model; the checker's signature enforces this.

* Luck egalitarian (relative): effort-based utility may depend on the
  group and on the model itself; individuals are compared at matched
  quantile slices of their own group's effort distribution.  For the
  finite discrete distributions handled here each distinct effort value
  occupies one slice, so slices are the effort-value strata (for a
  binary effort variable, exactly the two value strata), and order
  preserving rescalings of the effort scale leave verdicts unchanged.

Both checkers quantify over realizable strata: a conditional
distribution given a zero-probability event is undefined, so a stratum
is compared only across the groups that actually realize it; strata
realized by a single group of a pair are reported, not scored.  All
arithmetic is exact rational arithmetic, so ``satisfied`` is equivalent
to ``gap == 0`` with no tolerance.

The ``verify_*`` functions are executable statements of the four
equivalences between classical fairness criteria and EOP conditions.
Each evaluates the classical criterion directly from conditional
frequencies, evaluates the EOP side through the generic CDF engine, and
returns whether the two verdicts agree -- the two routes share no
comparison code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from numbers import Rational
from typing import Callable, Hashable, Iterable, Iterator

from .core import Group, advantage

__all__ = [
    "FiniteJointDistribution",
    "EopVerdict",
    "check_rawlsian_eop",
    "check_luck_egalitarian_eop",
    "statistical_parity_holds",
    "equality_of_odds_holds",
    "accuracy_distributional_parity_holds",
    "accuracy_expectation_parity_holds",
    "predictive_value_parity_holds",
    "verify_equality_of_odds_equivalence",
    "verify_statistical_parity_equivalence",
    "verify_accuracy_parity_equivalence",
    "verify_pvp_equivalence",
    "enumerate_joint_distributions",
]

Cell = tuple[Group, object, object]


@dataclass(frozen=True)
class FiniteJointDistribution:
    """Exact distribution over (group, outcome, prediction) triples.

    Masses must be rational, non-negative, and sum to exactly 1; support
    entries are unique.  Cells with zero mass are dropped.
    """

    cells: dict[Cell, Fraction]

    def __post_init__(self):
        clean: dict[Cell, Fraction] = {}
        for cell, mass in self.cells.items():
            if not isinstance(mass, Rational):
                raise TypeError(
                    f"mass for {cell!r} must be rational for exact checking, got {type(mass).__name__}"
                )
            mass = Fraction(mass)
            if mass < 0:
                raise ValueError(f"negative mass for {cell!r}")
            if cell in clean:
                raise ValueError(f"duplicate support entry {cell!r}")
            if mass > 0:
                clean[cell] = mass
        if sum(clean.values(), Fraction(0)) != 1:
            raise ValueError("masses must sum to exactly 1")
        object.__setattr__(self, "cells", clean)

    @classmethod
    def from_counts(cls, counts: dict[Cell, int]) -> "FiniteJointDistribution":
        total = sum(counts.values())
        if total <= 0:
            raise ValueError("counts must sum to a positive number")
        return cls({cell: Fraction(c, total) for cell, c in counts.items() if c})

    @property
    def groups(self) -> list[Group]:
        seen: dict[Group, None] = {}
        for (g, _, _) in self.cells:
            seen.setdefault(g)
        return list(seen)

    def group_mass(self, group: Group) -> Fraction:
        return sum(
            (m for (g, _, _), m in self.cells.items() if g == group), Fraction(0)
        )

    def items(self) -> Iterator[tuple[Group, object, object, Fraction]]:
        for (g, y, yhat), m in self.cells.items():
            yield g, y, yhat, m


@dataclass(frozen=True)
class EopVerdict:
    """Outcome of an EOP check.

    ``gap`` is the largest sup-norm difference between conditional
    advantage CDFs over strata realized by both groups of a pair;
    ``satisfied`` holds exactly when ``gap == 0``.  ``witness`` locates
    the worst pair as ``(group, group', stratum value, advantage value)``.
    ``strata_skipped`` lists ``(stratum, group)`` pairs where the
    stratum was not realizable and hence not scored.
    """

    satisfied: bool
    gap: Fraction
    witness: tuple | None = None
    strata_skipped: list[tuple] = field(default_factory=list)


def _compare_conditionals(
    by_group_stratum: dict[Group, dict[object, dict[object, Fraction]]],
) -> EopVerdict:
    """Worst sup-norm CDF difference across groups at shared strata.

    Input maps group -> stratum -> (advantage value -> unnormalized
    mass).  Comparison is exact: conditional CDFs are rational, and the
    sup over a finite support is a maximum.
    """
    groups = list(by_group_stratum)
    strata: dict[object, None] = {}
    for per in by_group_stratum.values():
        for s in per:
            strata.setdefault(s)

    gap = Fraction(0)
    witness = None
    skipped: list[tuple] = []
    for s in strata:
        present = [g for g in groups if s in by_group_stratum[g]]
        skipped.extend((s, g) for g in groups if s not in by_group_stratum[g])
        for ga, gb in combinations(present, 2):
            pa, pb = by_group_stratum[ga][s], by_group_stratum[gb][s]
            ta = sum(pa.values(), Fraction(0))
            tb = sum(pb.values(), Fraction(0))
            support = sorted(set(pa) | set(pb))
            ca = cb = Fraction(0)
            for u in support:
                ca += pa.get(u, Fraction(0))
                cb += pb.get(u, Fraction(0))
                d = abs(ca / ta - cb / tb)
                if d > gap:
                    gap, witness = d, (ga, gb, s, u)
    return EopVerdict(satisfied=(gap == 0), gap=gap, witness=witness, strata_skipped=skipped)


def _collect(
    dist: FiniteJointDistribution,
    stratum_of: Callable[[Group, object, object], object],
    utility_at: Callable[[Group, object, object], object],
) -> dict[Group, dict[object, dict[object, Fraction]]]:
    out: dict[Group, dict[object, dict[object, Fraction]]] = {}
    for g, y, yhat, m in dist.items():
        s = stratum_of(g, y, yhat)
        u = utility_at(g, y, yhat)
        per = out.setdefault(g, {}).setdefault(s, {})
        per[u] = per.get(u, Fraction(0)) + m
    return out


def check_rawlsian_eop(
    dist: FiniteJointDistribution,
    effort_of: Callable[[object], object],
    actual_of: Callable[[object, object], object],
    utility_of: Callable[[object, object], object] = advantage,
) -> EopVerdict:
    """Check the absolutist EOP condition on an exact distribution.

    ``effort_of(y)`` assigns the effort-based utility from the label
    alone -- it cannot see the group or the prediction, which is the
    absolutist requirement.  ``actual_of(y, yhat)`` assigns the actual
    utility, and ``utility_of`` combines the two into the advantage
    (defaults to their difference).

    Satisfied exactly when, at every effort level realized by both
    groups of a pair, the conditional advantage distributions coincide.
    """
    table = _collect(
        dist,
        stratum_of=lambda g, y, yhat: effort_of(y),
        utility_at=lambda g, y, yhat: utility_of(actual_of(y, yhat), effort_of(y)),
    )
    return _compare_conditionals(table)


def check_luck_egalitarian_eop(
    dist: FiniteJointDistribution,
    effort_of: Callable[[Group, object, object], object],
    actual_of: Callable[[object, object], object],
    utility_of: Callable[[object, object], object] = advantage,
) -> EopVerdict:
    """Check the relative (quantile-slice) EOP condition.

    ``effort_of(group, y, yhat)`` may depend on the group and on the
    model's prediction -- the relative view of effort.  Each distinct
    effort value within a group is one quantile slice of that group's
    effort distribution; slices are compared across groups, and a slice
    realized by only one group of a pair is vacuous.  For binary effort
    the slices are exactly the two value strata, and the verdict depends
    on the effort scale only through its order.
    """
    table = _collect(
        dist,
        stratum_of=lambda g, y, yhat: effort_of(g, y, yhat),
        utility_at=lambda g, y, yhat: utility_of(
            actual_of(y, yhat), effort_of(g, y, yhat)
        ),
    )
    return _compare_conditionals(table)


# --- Classical criteria, evaluated directly from conditional frequencies ---
#
# These deliberately compare probability masses stratum by stratum
# instead of going through the CDF engine above, so that each verify_*
# below exercises two independent computations.


def _conditional_pmfs(
    pairs: Iterable[tuple[Group, object, Fraction]],
) -> dict[Group, dict[object, Fraction]]:
    masses: dict[Group, dict[object, Fraction]] = {}
    totals: dict[Group, Fraction] = {}
    for g, v, m in pairs:
        masses.setdefault(g, {})
        masses[g][v] = masses[g].get(v, Fraction(0)) + m
        totals[g] = totals.get(g, Fraction(0)) + m
    return {
        g: {v: m / totals[g] for v, m in per.items()} for g, per in masses.items()
    }


def _pmfs_equal(pmfs: dict[Group, dict[object, Fraction]]) -> bool:
    per = list(pmfs.values())
    return all(p == per[0] for p in per[1:])


def statistical_parity_holds(dist: FiniteJointDistribution) -> bool:
    """Whether the prediction distribution is identical across groups."""
    pmfs = _conditional_pmfs((g, yhat, m) for g, _, yhat, m in dist.items())
    return _pmfs_equal(pmfs)


def _holds_per_stratum(
    dist: FiniteJointDistribution,
    stratum_of: Callable[[object, object], object],
    value_of: Callable[[object, object], object],
) -> bool:
    strata: dict[object, list] = {}
    for g, y, yhat, m in dist.items():
        strata.setdefault(stratum_of(y, yhat), []).append((g, value_of(y, yhat), m))
    return all(_pmfs_equal(_conditional_pmfs(pairs)) for pairs in strata.values())


def equality_of_odds_holds(dist: FiniteJointDistribution) -> bool:
    """Whether prediction distributions agree across groups at each label."""
    return _holds_per_stratum(dist, lambda y, yhat: y, lambda y, yhat: yhat)


def predictive_value_parity_holds(dist: FiniteJointDistribution) -> bool:
    """Whether label distributions agree across groups at each prediction."""
    return _holds_per_stratum(dist, lambda y, yhat: yhat, lambda y, yhat: y)


def accuracy_distributional_parity_holds(dist: FiniteJointDistribution) -> bool:
    """Whether squared-error distributions are identical across groups."""
    pmfs = _conditional_pmfs(
        (g, (yhat - y) ** 2, m) for g, y, yhat, m in dist.items()
    )
    return _pmfs_equal(pmfs)


def accuracy_expectation_parity_holds(dist: FiniteJointDistribution) -> bool:
    """Whether expected squared error is identical across groups.

    Weaker than distributional parity; kept separate because equality of
    expectations does not imply equality of distributions.
    """
    num: dict[Group, Fraction] = {}
    den: dict[Group, Fraction] = {}
    for g, y, yhat, m in dist.items():
        num[g] = num.get(g, Fraction(0)) + m * (yhat - y) ** 2
        den[g] = den.get(g, Fraction(0)) + m
    means = [num[g] / den[g] for g in num]
    return all(v == means[0] for v in means[1:])


# --- Executable equivalence statements ---


def verify_equality_of_odds_equivalence(dist: FiniteJointDistribution) -> bool:
    """Equality of odds holds iff the absolutist check with the label as
    effort-based utility and the prediction as actual utility is satisfied."""
    classical = equality_of_odds_holds(dist)
    eop = check_rawlsian_eop(
        dist, effort_of=lambda y: y, actual_of=lambda y, yhat: yhat
    ).satisfied
    return classical == eop


def verify_statistical_parity_equivalence(dist: FiniteJointDistribution) -> bool:
    """Statistical parity holds iff the absolutist check with constant
    effort-based utility and the prediction as actual utility is satisfied."""
    classical = statistical_parity_holds(dist)
    eop = check_rawlsian_eop(
        dist, effort_of=lambda y: 1, actual_of=lambda y, yhat: yhat
    ).satisfied
    return classical == eop


def verify_accuracy_parity_equivalence(dist: FiniteJointDistribution) -> bool:
    """Distributional accuracy parity holds iff the absolutist check with
    zero effort-based utility and squared error as actual utility is
    satisfied; additionally, distributional parity must imply expectation
    parity (the converse is not claimed)."""
    classical = accuracy_distributional_parity_holds(dist)
    eop = check_rawlsian_eop(
        dist, effort_of=lambda y: 0, actual_of=lambda y, yhat: (yhat - y) ** 2
    ).satisfied
    implies_expectation = (not classical) or accuracy_expectation_parity_holds(dist)
    return (classical == eop) and implies_expectation


def verify_pvp_equivalence(dist: FiniteJointDistribution) -> bool:
    """Predictive value parity holds iff the relative (quantile-slice)
    check with the prediction as effort-based utility and the label as
    actual utility is satisfied."""
    classical = predictive_value_parity_holds(dist)
    eop = check_luck_egalitarian_eop(
        dist,
        effort_of=lambda g, y, yhat: yhat,
        actual_of=lambda y, yhat: y,
    ).satisfied
    return classical == eop


def enumerate_joint_distributions(
    mass_denominator: int,
    groups: tuple = (0, 1),
    outcomes: tuple = (0, 1),
    predictions: tuple = (0, 1),
) -> Iterator[FiniteJointDistribution]:
    """All distributions with cell masses in multiples of ``1/denominator``.

    Enumerates every composition of ``mass_denominator`` units over the
    ``len(groups) * len(outcomes) * len(predictions)`` cells (6,435
    compositions for 8 units over 8 cells).
    """
    support = [
        (g, y, yhat) for g in groups for y in outcomes for yhat in predictions
    ]

    def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    for counts in compositions(mass_denominator, len(support)):
        yield FiniteJointDistribution.from_counts(
            {cell: c for cell, c in zip(support, counts) if c}
        )
