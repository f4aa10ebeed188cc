"""Shared domain types and the advantage-utility algebra.

Utility here means the benefit an individual derives from being subject
to a predictive model.  It decomposes into an *actual* utility ``a``
(what they receive) and an *effort-based* utility ``d`` (what their
accountability factors alone would earn them); the *advantage*
``u = a - d`` is the benefit or harm the model distributes through its
errors, and it is the currency every fairness notion in this package is
expressed in.

All arithmetic in this module is plain Python arithmetic, so exact
number types (``fractions.Fraction``, ``int``) pass through without
rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

Group = Hashable

__all__ = [
    "Instance",
    "Dataset",
    "LinearModel",
    "GroupCoefficients",
    "UtilitySpec",
    "advantage",
    "coefficients_from_benefit_table",
    "evaluate_utility",
    "crime_utility_spec",
]


def advantage(actual, effort_based):
    """Advantage earned under a model: actual minus effort-based utility.

    Zero exactly when the individual receives what their accountability
    factors alone would earn them.
    """
    return actual - effort_based


def coefficients_from_benefit_table(b00, b01, b10, b11):
    """Affine-in-prediction coefficients reproducing a binary benefit table.

    For outcomes and predictions in {0, 1}, a benefit table ``b[y, yhat]``
    is reproduced exactly by ``c_y * yhat + d_y`` with

        c0 = b01 - b00,  c1 = b11 - b10,  d0 = b00,  d1 = b10.

    Returns ``(c0, c1, d0, d1)``.  Exact for exact input types.
    """
    return b01 - b00, b11 - b10, b00, b10


@dataclass(frozen=True)
class GroupCoefficients:
    """One group's utility as an affine function of the prediction.

    ``u(y, yhat) = alpha * yhat * y + beta * yhat + gamma * y + delta``.

    Affinity in ``yhat`` is what keeps expected group utility affine in
    the weights of a linear model, which the training solver relies on.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float

    def evaluate(self, y, yhat):
        return self.alpha * yhat * y + self.beta * yhat + self.gamma * y + self.delta

    def prediction_slope(self, y):
        """Coefficient of ``yhat`` at fixed outcome ``y``."""
        return self.alpha * y + self.beta


@dataclass(frozen=True)
class UtilitySpec:
    """Per-group utility functions, each affine in the prediction.

    Construct directly from coefficients, or from binary benefit tables
    via :meth:`from_benefit_tables`.
    """

    groups: dict[Group, GroupCoefficients]

    def __post_init__(self):
        if not self.groups:
            raise ValueError("UtilitySpec needs at least one group")

    def coefficients(self, group: Group) -> GroupCoefficients:
        try:
            return self.groups[group]
        except KeyError:
            raise KeyError(
                f"utility spec has no coefficients for group {group!r}"
            ) from None

    def covers(self, groups: Iterable[Group]) -> bool:
        return all(g in self.groups for g in groups)

    @classmethod
    def from_benefit_tables(cls, tables: dict[Group, tuple]) -> "UtilitySpec":
        """Build a spec from per-group benefit tables ``(b00, b01, b10, b11)``.

        The resulting utility reproduces the table exactly at the four
        binary (y, yhat) points:

            u = y * (c1*yhat + d1) + (1-y) * (c0*yhat + d0)
              = (c1-c0)*yhat*y + c0*yhat + (d1-d0)*y + d0.
        """
        coeffs = {}
        for group, (b00, b01, b10, b11) in tables.items():
            c0, c1, d0, d1 = coefficients_from_benefit_table(b00, b01, b10, b11)
            coeffs[group] = GroupCoefficients(
                alpha=c1 - c0, beta=c0, gamma=d1 - d0, delta=d0
            )
        return cls(coeffs)

    def scaled(self, factor) -> "UtilitySpec":
        """Spec with every coefficient multiplied by ``factor``."""
        return UtilitySpec(
            {
                g: GroupCoefficients(
                    factor * c.alpha, factor * c.beta, factor * c.gamma, factor * c.delta
                )
                for g, c in self.groups.items()
            }
        )


def evaluate_utility(spec: UtilitySpec, group: Group, y, yhat):
    """Utility of one individual under ``spec``.

    Raises ``KeyError`` if the spec does not define the group.
    """
    return spec.coefficients(group).evaluate(y, yhat)


def crime_utility_spec() -> UtilitySpec:
    """The two-group utility functions of the neighborhood-crime study.

    Group 0 (majority): u = (1 + 0.5*yhat*y) - 0.5*yhat.
    Group 1 (minority): u = (1 + 3*yhat*y + 2*yhat) - y.
    """
    return UtilitySpec(
        {
            0: GroupCoefficients(alpha=0.5, beta=-0.5, gamma=0.0, delta=1.0),
            1: GroupCoefficients(alpha=3.0, beta=2.0, gamma=-1.0, delta=1.0),
        }
    )


@dataclass(frozen=True)
class Instance:
    """A single observation: feature vector, group label, target."""

    features: tuple[float, ...]
    group: Group
    target: float


@dataclass(frozen=True)
class Dataset:
    """An immutable feature matrix with group labels and targets.

    ``mode`` is either ``"regression"`` (targets are normalized reals in
    [0, 1]) or ``"classification"`` (targets are exactly 0 or 1).  Group
    labels are opaque categorical values; any number of groups is
    allowed, but every group present is non-empty by construction.
    """

    X: np.ndarray
    y: np.ndarray
    groups: np.ndarray
    mode: str = "regression"
    group_indices: dict[Group, np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        y = np.ascontiguousarray(np.asarray(self.y, dtype=np.float64))
        groups = np.asarray(self.groups)
        if X.ndim != 2:
            raise ValueError("X must be a 2-D array")
        n = X.shape[0]
        if y.shape != (n,) or groups.shape != (n,):
            raise ValueError("X, y and groups must agree on the number of rows")
        if n == 0:
            raise ValueError("dataset must contain at least one instance")
        if self.mode not in ("regression", "classification"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "classification" and not np.all((y == 0.0) | (y == 1.0)):
            raise ValueError("classification targets must be exactly 0 or 1")
        index: dict[Group, np.ndarray] = {}
        for i, g in enumerate(groups.tolist()):
            index.setdefault(g, []).append(i)
        index = {g: np.asarray(ix, dtype=np.intp) for g, ix in index.items()}
        for arr in (X, y):
            arr.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "group_indices", index)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]

    @property
    def group_labels(self) -> list[Group]:
        return list(self.group_indices)

    @classmethod
    def from_instances(cls, instances: Sequence[Instance], mode: str = "regression") -> "Dataset":
        if not instances:
            raise ValueError("dataset must contain at least one instance")
        k = len(instances[0].features)
        if any(len(inst.features) != k for inst in instances):
            raise ValueError("all instances must have the same feature count")
        X = np.asarray([inst.features for inst in instances], dtype=np.float64)
        y = np.asarray([inst.target for inst in instances], dtype=np.float64)
        groups = np.asarray([inst.group for inst in instances])
        return cls(X=X, y=y, groups=groups, mode=mode)

    def instances(self) -> list[Instance]:
        return [
            Instance(tuple(self.X[i]), self.groups[i], float(self.y[i]))
            for i in range(self.n)
        ]

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.intp)
        return Dataset(
            X=self.X[indices], y=self.y[indices], groups=self.groups[indices], mode=self.mode
        )


@dataclass(frozen=True)
class LinearModel:
    """A deterministic linear predictor ``yhat = weights . x`` (no intercept)."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        if w.ndim != 1:
            raise ValueError("weights must be a 1-D vector")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def predict(self, x) -> float:
        return float(np.dot(self.weights, np.asarray(x, dtype=np.float64)))

    def predict_all(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights
