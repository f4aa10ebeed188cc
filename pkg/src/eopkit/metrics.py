"""Empirical group-fairness gap metrics.

Every gap is a worst case over group pairs, so it is zero exactly when
the underlying parity definition holds on the empirical frequencies, it
is invariant under relabeling of groups, and it is non-negative.

The counting-based metrics (statistical parity, equality of odds,
predictive value parity) are computed in exact rational arithmetic, so
"gap == 0" is a decidable statement rather than a tolerance check; the
residual metrics use whatever arithmetic the inputs carry (floats for
float arrays, exact for ``Fraction`` sequences).

Strata convention: a conditioning stratum with zero count in some group
has an undefined conditional frequency there.  Such strata are skipped
in the worst-case max and reported in ``MetricReport.strata_skipped``;
silently scoring them 0 or NaN would corrupt the max.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Hashable, Sequence

import numpy as np

from .core import Dataset, Group, LinearModel, UtilitySpec

__all__ = [
    "MetricReport",
    "statistical_parity_gap",
    "equality_of_odds_gap",
    "accuracy_parity_gap",
    "predictive_value_parity_gap",
    "positive_residual_difference",
    "negative_residual_difference",
    "mean_difference",
    "group_average_utility",
    "min_group_average_utility",
]


@dataclass(frozen=True)
class MetricReport:
    """A computed gap with its per-group components.

    ``gap`` is a ``Fraction`` on the exact code paths and a ``float``
    otherwise.  ``per_group`` holds each group's value of the quantity
    whose cross-group difference attains the gap (for stratified metrics,
    the values in the attaining stratum).  ``strata_skipped`` lists
    ``(stratum, group)`` pairs where the conditional was undefined.
    """

    name: str
    gap: object
    per_group: dict[Group, object] = field(default_factory=dict)
    strata_skipped: list[tuple] = field(default_factory=list)

    def __float__(self) -> float:
        return float(self.gap)

    def to_record(self) -> dict:
        return {
            "metric": self.name,
            "gap": float(self.gap),
            "per_group": ";".join(
                f"{g}={float(v):.6g}" for g, v in sorted(self.per_group.items(), key=lambda kv: str(kv[0]))
            ),
            "strata_skipped": ";".join(
                f"{s}@{g}" for s, g in self.strata_skipped
            ),
        }


def _as_list(values) -> list:
    if isinstance(values, np.ndarray):
        return values.tolist()
    return list(values)


def _by_group(groups, *value_seqs) -> dict[Group, list[tuple]]:
    groups = _as_list(groups)
    seqs = [_as_list(v) for v in value_seqs]
    for s in seqs:
        if len(s) != len(groups):
            raise ValueError("all inputs must have the same length")
    out: dict[Group, list[tuple]] = {}
    for i, g in enumerate(groups):
        out.setdefault(g, []).append(tuple(s[i] for s in seqs))
    return out


def _require_binary(values, what: str):
    for v in _as_list(values):
        if v != 0 and v != 1:
            raise ValueError(f"{what} must be binary (0/1) in classification mode, got {v!r}")


def _require_multi_group(by_group, name: str):
    if len(by_group) < 2:
        raise ValueError(f"{name} is undefined with fewer than two groups")


def _mean(values: Sequence):
    return sum(values) / len(values)


def statistical_parity_gap(yhat, z) -> MetricReport:
    """Worst cross-group difference of prediction frequencies.

    max over predicted values v and group pairs of
    ``|P[Yhat = v | Z = g] - P[Yhat = v | Z = g']|`` on empirical
    frequencies.
    """
    _require_binary(yhat, "predictions")
    per = _by_group(z, yhat)
    _require_multi_group(per, "statistical parity gap")
    freq = {
        g: Fraction(sum(1 for (v,) in rows if v == 1), len(rows)) for g, rows in per.items()
    }
    gap = Fraction(0)
    for a, b in combinations(freq, 2):
        gap = max(gap, abs(freq[a] - freq[b]))
    return MetricReport("statistical_parity", gap, per_group=dict(freq))


def _stratified_conditional_gap(
    name: str,
    rows_by_group: dict[Group, list[tuple]],
) -> MetricReport:
    """Worst conditional-frequency difference over shared strata.

    ``rows_by_group`` maps each group to ``(stratum, value)`` pairs with
    binary values; for each stratum present in a pair of groups the
    conditional frequency of ``value == 1`` is compared.
    """
    _require_multi_group(rows_by_group, name)
    cond: dict[Group, dict] = {}
    strata = set()
    for g, rows in rows_by_group.items():
        per_stratum: dict = {}
        for stratum, value in rows:
            cnt, pos = per_stratum.get(stratum, (0, 0))
            per_stratum[stratum] = (cnt + 1, pos + (1 if value == 1 else 0))
        cond[g] = {s: Fraction(pos, cnt) for s, (cnt, pos) in per_stratum.items()}
        strata.update(per_stratum)

    gap = Fraction(0)
    attaining = None
    skipped: list[tuple] = []
    for s in sorted(strata, key=repr):
        present = [g for g in rows_by_group if s in cond[g]]
        skipped.extend((s, g) for g in rows_by_group if s not in cond[g])
        for a, b in combinations(present, 2):
            d = abs(cond[a][s] - cond[b][s])
            if d > gap:
                gap, attaining = d, s
    per_group = (
        {g: cond[g][attaining] for g in rows_by_group if attaining in cond[g]}
        if attaining is not None
        else {}
    )
    return MetricReport(name, gap, per_group=per_group, strata_skipped=skipped)


def equality_of_odds_gap(y, yhat, z) -> MetricReport:
    """Worst cross-group difference of ``P[Yhat = v | Z, Y = y]``.

    For binary predictions the two values v give the same difference, so
    comparing the frequency of 1s per (group, label) stratum is exhaustive.
    """
    _require_binary(y, "labels")
    _require_binary(yhat, "predictions")
    per = _by_group(z, y, yhat)
    rows = {g: [(yi, vi) for yi, vi in rows] for g, rows in per.items()}
    return _stratified_conditional_gap("equality_of_odds", rows)


def predictive_value_parity_gap(y, yhat, z) -> MetricReport:
    """Worst cross-group difference of ``P[Y = y | Z, Yhat = v]``."""
    _require_binary(y, "labels")
    _require_binary(yhat, "predictions")
    per = _by_group(z, yhat, y)
    rows = {g: [(vi, yi) for vi, yi in rows] for g, rows in per.items()}
    return _stratified_conditional_gap("predictive_value_parity", rows)


def accuracy_parity_gap(y, yhat, z) -> MetricReport:
    """Worst cross-group difference of mean squared error."""
    per = _by_group(z, y, yhat)
    _require_multi_group(per, "accuracy parity gap")
    mse = {g: _mean([(vi - yi) ** 2 for yi, vi in rows]) for g, rows in per.items()}
    gap = 0
    for a, b in combinations(mse, 2):
        gap = max(gap, abs(mse[a] - mse[b]))
    return MetricReport("accuracy_parity", gap, per_group=dict(mse))


def _residual_difference(name: str, y, yhat, z, sign: int) -> MetricReport:
    """Shared body of the positive/negative residual differences.

    ``sign=+1`` scores over-prediction ``max(0, yhat - y)``; ``sign=-1``
    scores under-prediction ``max(0, y - yhat)``.  The per-group mean
    divides the summed clipped residuals by the count of residuals on
    the scored side, with ties (residual exactly 0) counted on that
    side; a group with no such residuals contributes 0, the limit of
    "no mis-predictions on this side".
    """
    per = _by_group(z, y, yhat)
    means = {}
    for g, rows in per.items():
        residuals = [sign * (vi - yi) for yi, vi in rows]
        count = sum(1 for r in residuals if r >= 0)
        total = sum(r for r in residuals if r > 0)
        means[g] = total / count if count else 0
    gap = 0
    for a, b in combinations(means, 2):
        gap = max(gap, abs(means[a] - means[b]))
    return MetricReport(name, gap, per_group=means)


def positive_residual_difference(y, yhat, z) -> MetricReport:
    """Absolute cross-group difference of mean positive residuals.

    The regression analogue of a false-positive-rate gap: how much more
    one group is over-predicted than another, among the over-predicted.
    """
    return _residual_difference("positive_residual_difference", y, yhat, z, sign=+1)


def negative_residual_difference(y, yhat, z) -> MetricReport:
    """Absolute cross-group difference of mean negative residuals.

    The regression analogue of a false-negative-rate gap.
    """
    return _residual_difference("negative_residual_difference", y, yhat, z, sign=-1)


def mean_difference(yhat, z) -> MetricReport:
    """Absolute difference of mean predictions across groups.

    Any constant predictor scores 0.
    """
    per = _by_group(z, yhat)
    _require_multi_group(per, "mean difference")
    means = {g: _mean([v for (v,) in rows]) for g, rows in per.items()}
    gap = 0
    for a, b in combinations(means, 2):
        gap = max(gap, abs(means[a] - means[b]))
    return MetricReport("mean_difference", gap, per_group=means)


def group_average_utility(
    dataset: Dataset, model: LinearModel, spec: UtilitySpec
) -> dict[Group, float]:
    """Average utility per group under ``model``."""
    yhat = model.predict_all(dataset.X)
    out = {}
    for g, idx in dataset.group_indices.items():
        c = spec.coefficients(g)
        yg, vg = dataset.y[idx], yhat[idx]
        out[g] = float(np.mean(c.alpha * vg * yg + c.beta * vg + c.gamma * yg + c.delta))
    return out


def min_group_average_utility(
    dataset: Dataset, model: LinearModel, spec: UtilitySpec
) -> float:
    """Average utility of the worst-off group.

    This is the quantity the max-min training objective maximizes, and
    the headline fairness measure of the sweep harness.
    """
    return min(group_average_utility(dataset, model, spec).values())
