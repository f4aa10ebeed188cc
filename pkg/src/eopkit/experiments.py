"""Cross-validated sweep over loss bounds for the two trainers.

For every (method, loss bound, fold) cell the harness trains on the
fold's training split and evaluates on the held-out split: the positive
and negative residual differences, the minimum per-group average
utility, the training loss actually attained, and the held-out MSE.
Rows are ordered method, then loss bound ascending, then fold, and the
whole run is deterministic given the seed.

Fold splits are stratified by group so that every fold contains every
group; the group metrics are undefined otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, LinearModel, UtilitySpec
from .metrics import (
    min_group_average_utility,
    negative_residual_difference,
    positive_residual_difference,
)
from .solver import SolverConfig, solve_baseline, solve_eop_training

__all__ = ["SweepRow", "stratified_folds", "run_epsilon_sweep", "summarize"]

METHODS = ("eop", "baseline")


@dataclass(frozen=True)
class SweepRow:
    """One (method, loss bound, fold) cell of the sweep.

    Metric fields (prd, nrd, min_group_utility, mse) are held-out
    quantities; ``objective`` is the training-split objective the solve
    attained (the minimum group utility for the eop method, the average
    residual for the baseline) and ``loss`` the training loss it spent
    (the constrained quantity).  Infeasible cells keep their status and
    carry NaNs.
    """

    method: str
    loss_bound: float
    fold: int
    status: str
    objective: float
    prd: float
    nrd: float
    min_group_utility: float
    loss: float
    mse: float

    HEADER = ("method", "loss_bound", "fold", "status", "objective", "prd",
              "nrd", "min_group_utility", "loss", "mse")

    def as_line(self, delimiter: str = ",") -> str:
        return delimiter.join(
            [self.method, f"{self.loss_bound:.10g}", str(self.fold), self.status]
            + [f"{v:.10g}" for v in (self.objective, self.prd, self.nrd,
                                     self.min_group_utility, self.loss, self.mse)]
        )


def stratified_folds(
    dataset: Dataset, folds: int, seed: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic fold split keeping every group in every fold."""
    if folds < 2:
        raise ValueError("need at least two folds")
    rng = np.random.default_rng(seed)
    assignment = np.empty(dataset.n, dtype=np.intp)
    for g, idx in dataset.group_indices.items():
        if len(idx) < folds:
            raise ValueError(
                f"group {g!r} has {len(idx)} rows, fewer than {folds} folds"
            )
        shuffled = rng.permutation(idx)
        assignment[shuffled] = np.arange(len(shuffled)) % folds
    out = []
    everything = np.arange(dataset.n)
    for f in range(folds):
        test = everything[assignment == f]
        train = everything[assignment != f]
        out.append((train, test))
    return out


def run_epsilon_sweep(
    dataset: Dataset,
    spec: UtilitySpec,
    lam: float,
    loss_bounds,
    folds: int = 5,
    seed: int = 0,
    solver_defaults: SolverConfig | None = None,
) -> list[SweepRow]:
    """Train and evaluate both methods over the loss-bound grid.

    A bound below a fold's attainable loss produces a row flagged
    ``infeasible`` rather than being dropped.
    """
    bounds = sorted(float(b) for b in loss_bounds)
    splits = stratified_folds(dataset, folds, seed)
    rows = []
    for method in METHODS:
        for eps in bounds:
            for fold, (train_idx, test_idx) in enumerate(splits):
                train = dataset.subset(train_idx)
                test = dataset.subset(test_idx)
                config = SolverConfig(
                    loss_bound=eps,
                    lam=lam,
                    **(
                        {
                            "tol_feasibility": solver_defaults.tol_feasibility,
                            "tol_optimality": solver_defaults.tol_optimality,
                            "max_iterations": solver_defaults.max_iterations,
                            "multiplier_bracket": solver_defaults.multiplier_bracket,
                        }
                        if solver_defaults
                        else {}
                    ),
                )
                if method == "eop":
                    result = solve_eop_training(train, spec, config)
                else:
                    result = solve_baseline(train, config)
                if result.status == "infeasible":
                    rows.append(SweepRow(method, eps, fold, "infeasible",
                                         math.nan, math.nan, math.nan,
                                         math.nan, math.nan, math.nan))
                    continue
                model = LinearModel(result.weights)
                yhat = model.predict_all(test.X)
                rows.append(SweepRow(
                    method=method,
                    loss_bound=eps,
                    fold=fold,
                    status=result.status,
                    objective=result.objective,
                    prd=float(positive_residual_difference(test.y, yhat, test.groups).gap),
                    nrd=float(negative_residual_difference(test.y, yhat, test.groups).gap),
                    min_group_utility=min_group_average_utility(test, model, spec),
                    loss=result.loss,
                    mse=float(np.mean((yhat - test.y) ** 2)),
                ))
    return rows


def summarize(rows: list[SweepRow]) -> list[dict]:
    """Per-(method, loss bound) means and standard deviations over folds.

    Aggregates feasible folds only and reports the infeasible count;
    deviations are population deviations (a single fold has sd 0).
    """
    cells: dict[tuple[str, float], list[SweepRow]] = {}
    for row in rows:
        cells.setdefault((row.method, row.loss_bound), []).append(row)
    out = []
    for (method, eps) in sorted(cells, key=lambda key: (key[0], key[1])):
        group = cells[(method, eps)]
        feasible = [r for r in group if r.status != "infeasible"]
        entry = {
            "method": method,
            "loss_bound": eps,
            "folds": len(group),
            "infeasible": len(group) - len(feasible),
        }
        for name in ("objective", "prd", "nrd", "min_group_utility", "loss", "mse"):
            values = [getattr(r, name) for r in feasible]
            entry[f"{name}_mean"] = float(np.mean(values)) if values else math.nan
            entry[f"{name}_sd"] = float(np.std(values)) if values else math.nan
        out.append(entry)
    return out
