"""Convex training engine for loss-bounded linear models.

Two trainers share one engine.  Both maximize a concave objective over
``q(theta) = mse(theta) + lam * ||theta||_1 <= loss_bound``:

* :func:`solve_eop_training` maximizes the smallest per-group average
  utility (each group's average utility is affine in the weights);
* :func:`solve_baseline` maximizes the average residual, an affine
  objective, under the same loss constraint.

The engine works on the partial Lagrangian of the loss constraint.  For
a multiplier ``mu >= 0`` the inner problem -- maximize
``min_z g_z(theta) - mu * (q(theta) - loss_bound)`` -- is concave and is
ascended by a proximal subgradient kernel (active-group slope plus loss
gradient, soft-threshold step for the l1 part); an outer bisection on
``mu`` drives the achieved loss to the bound.

The subgradient phase is then certified and polished through the dual:
for simplex weights ``w`` over groups, the weighted problem
``max { sum_z w_z g_z(theta) : q(theta) <= loss_bound }`` upper-bounds
the max-min optimum, is solved essentially exactly by coordinate
descent on an equivalent l1 problem plus a multiplier bisection, and is
convex in ``w``; minimizing it over ``w`` closes the duality gap.  Every
reported solution is restored to exact feasibility by a line search
toward the penalized least-squares anchor, and the objective is
recomputed from the group terms at the returned weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import Dataset, Group, LinearModel, UtilitySpec
from . import _backend

__all__ = [
    "SolverConfig",
    "SolverResult",
    "group_affine_terms",
    "fit_l1_regularized",
    "select_lambda",
    "solve_eop_training",
    "solve_baseline",
    "default_loss_bound_grid",
]

_CD_TOL = 1e-14
_CD_MAX_SWEEPS = 100_000


@dataclass(frozen=True)
class SolverConfig:
    """Configuration for the loss-bounded trainers.

    ``loss_bound`` caps ``mse + lam * ||theta||_1`` (squared-target
    units).  The multiplier bracket bounds the outer search for the loss
    constraint's Lagrange multiplier.
    """

    loss_bound: float
    lam: float = 0.0
    tol_feasibility: float = 1e-8
    tol_optimality: float = 1e-6
    max_iterations: int = 50_000
    multiplier_bracket: tuple[float, float] = (1e-9, 1e9)

    def __post_init__(self):
        if self.loss_bound < 0:
            raise ValueError("loss_bound must be non-negative")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if self.tol_feasibility <= 0 or self.tol_optimality <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")
        lo, hi = self.multiplier_bracket
        if not (0 < lo < hi):
            raise ValueError("multiplier bracket must satisfy 0 < lo < hi")


@dataclass(frozen=True)
class SolverResult:
    """Outcome of one constrained solve.

    ``objective`` is the achieved value of the trainer's objective: the
    minimum per-group average utility for the max-min trainer, the
    average residual for the baseline, recomputed from the data at the
    returned weights.  ``dual_bound`` upper-bounds the attainable
    objective; ``dual_bound - objective`` is the certified optimality
    gap when ``status == "optimal"``.
    """

    weights: np.ndarray
    objective: float
    loss: float
    mse: float
    feasibility_residual: float
    dual_bound: float
    iterations: int
    status: str  # "optimal" | "infeasible" | "max_iterations"
    loss_bound: float
    lam: float

    @property
    def model(self) -> LinearModel:
        return LinearModel(self.weights)

    def to_record(self) -> dict:
        return {
            "loss_bound": self.loss_bound,
            "lam": self.lam,
            "objective": self.objective,
            "loss": self.loss,
            "mse": self.mse,
            "status": self.status,
            "iterations": self.iterations,
        }


def group_affine_terms(
    dataset: Dataset, spec: UtilitySpec
) -> tuple[np.ndarray, np.ndarray, list[Group]]:
    """Slopes and offsets of the per-group average utilities.

    A group's average utility under weights ``theta`` is
    ``slope . theta + offset`` with
    ``slope = mean((alpha*y + beta) * x)`` and
    ``offset = mean(gamma*y + delta)`` over the group's rows.
    """
    labels = dataset.group_labels
    slopes = np.empty((len(labels), dataset.k))
    offsets = np.empty(len(labels))
    for row, g in enumerate(labels):
        c = spec.coefficients(g)
        idx = dataset.group_indices[g]
        yg = dataset.y[idx]
        slopes[row] = ((c.alpha * yg + c.beta)[:, None] * dataset.X[idx]).mean(axis=0)
        offsets[row] = (c.gamma * yg + c.delta).mean()
    return slopes, offsets, labels


class _Quadratic:
    """Gram form of the penalized loss of one training split."""

    def __init__(self, dataset: Dataset, lam: float):
        n = dataset.n
        self.gram = np.ascontiguousarray(dataset.X.T @ dataset.X / n)
        self.linear = dataset.X.T @ dataset.y / n
        self.const = float(dataset.y @ dataset.y / n)
        self.lam = float(lam)

    def mse(self, theta: np.ndarray) -> float:
        return max(
            float(theta @ self.gram @ theta - 2.0 * self.linear @ theta + self.const),
            0.0,
        )

    def loss(self, theta: np.ndarray) -> float:
        return self.mse(theta) + self.lam * float(np.abs(theta).sum())

    def minimize(self, theta0=None, tol=_CD_TOL) -> tuple[np.ndarray, int]:
        theta0 = np.zeros(self.gram.shape[0]) if theta0 is None else theta0
        return _backend.lasso_cd_gram(
            self.gram, self.linear, self.lam,
            np.ascontiguousarray(theta0, dtype=np.float64), _CD_MAX_SWEEPS, tol,
        )


def fit_l1_regularized(
    dataset: Dataset, lam: float, tol: float = _CD_TOL
) -> tuple[np.ndarray, float]:
    """Minimize ``mse(theta) + lam * ||theta||_1`` by coordinate descent.

    Returns the minimizer and the attained value, which is the smallest
    loss bound feasible for the constrained trainers at this ``lam``.
    """
    if lam < 0:
        raise ValueError("lam must be non-negative")
    quad = _Quadratic(dataset, lam)
    theta, _ = quad.minimize(tol=tol)
    return theta, quad.loss(theta)


def select_lambda(
    dataset: Dataset, grid: Sequence[float], folds: int = 10, seed: int = 0
) -> float:
    """Pick the l1 weight minimizing mean held-out MSE over a fold split.

    Deterministic given the seed; ties go to the smaller value.
    """
    if not len(grid):
        raise ValueError("lambda grid must be non-empty")
    if dataset.n < folds:
        raise ValueError("need at least as many rows as folds")
    rng = np.random.default_rng(seed)
    order = rng.permutation(dataset.n)
    chunks = np.array_split(order, folds)
    best_lam, best_score = None, math.inf
    for lam in sorted(float(v) for v in grid):
        scores = []
        for held_out in chunks:
            train = np.setdiff1d(order, held_out, assume_unique=True)
            theta, _ = fit_l1_regularized(dataset.subset(train), lam)
            held = dataset.subset(held_out)
            scores.append(float(np.mean((held.X @ theta - held.y) ** 2)))
        score = float(np.mean(scores))
        if score < best_score:
            best_lam, best_score = lam, score
    return best_lam


def default_loss_bound_grid(
    eps_min: float, points: int = 12, lo: float = 1.02, hi: float = 3.0
) -> np.ndarray:
    """Geometric grid of loss bounds between ``lo*eps_min`` and ``hi*eps_min``."""
    if eps_min <= 0:
        raise ValueError("eps_min must be positive to span a geometric grid")
    return eps_min * np.geomspace(lo, hi, points)


class _ConstrainedProblem:
    """State shared by the subgradient phase and the dual polish."""

    def __init__(self, dataset: Dataset, slopes, offsets, config: SolverConfig):
        self.quad = _Quadratic(dataset, config.lam)
        self.slopes = np.ascontiguousarray(slopes, dtype=np.float64)
        self.offsets = np.ascontiguousarray(offsets, dtype=np.float64)
        self.config = config
        self.eps = float(config.loss_bound)
        self.iterations = 0
        if config.lam == 0.0:
            eigs = np.linalg.eigvalsh(self.quad.gram)
            if eigs[0] <= 1e-12 * max(1.0, eigs[-1]):
                raise ValueError(
                    "loss constraint cannot bound the weights: "
                    "need lam > 0 or a full-rank design"
                )
        self.anchor, _ = self.quad.minimize()
        self.eps_min = self.quad.loss(self.anchor)
        self.gram_norm = float(np.linalg.norm(self.quad.gram, ord=2))

    def objective_at(self, theta: np.ndarray) -> float:
        return float(np.min(self.slopes @ theta + self.offsets))

    def restore_feasibility(self, theta: np.ndarray) -> np.ndarray:
        """Pull ``theta`` toward the anchor until the loss bound holds.

        The loss is convex and strictly below the bound at the anchor,
        so bisection on the segment finds a feasible point; the returned
        point satisfies the bound exactly as evaluated.
        """
        if self.quad.loss(theta) <= self.eps:
            return theta
        lo, hi = 0.0, 1.0  # fraction moved toward the anchor
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            cand = (1.0 - mid) * theta + mid * self.anchor
            if self.quad.loss(cand) > self.eps:
                lo = mid
            else:
                hi = mid
        out = (1.0 - hi) * theta + hi * self.anchor
        if self.quad.loss(out) > self.eps:  # paranoid fallback
            return self.anchor.copy()
        return out

    # -- inner maximization for a fixed multiplier (subgradient phase) --

    def _subgradient_inner(self, mu: float, theta0: np.ndarray, iters: int):
        slope_scale = float(np.max(np.linalg.norm(self.slopes, axis=1))) or 1.0
        step_scale = 1.0 / (slope_scale + 2.0 * mu * self.gram_norm + 1e-12)
        best, value, last = _backend.prox_subgradient_maxmin(
            self.slopes, self.offsets, self.quad.gram, self.quad.linear,
            self.quad.const, mu, self.quad.lam, self.eps,
            np.ascontiguousarray(theta0, dtype=np.float64), iters, step_scale,
        )
        self.iterations += iters
        return best, value, last

    def subgradient_phase(self) -> tuple[float, np.ndarray]:
        """Bisection on the multiplier around the subgradient kernel.

        Returns the bracketed multiplier and the best iterate seen.
        """
        budget = min(self.config.max_iterations, 4000 + 2000 * self.quad.gram.shape[0])
        inner = max(150, budget // 48)
        lo, hi = self.config.multiplier_bracket
        mu = min(max(1.0, 2.0 * lo), hi)
        theta = self.anchor.copy()
        best_theta = theta
        # grow the multiplier until the loss constraint holds at the inner max
        for _ in range(40):
            best_theta, _, theta = self._subgradient_inner(mu, theta, inner)
            if self.quad.loss(best_theta) <= self.eps or mu >= hi:
                break
            mu = min(mu * 4.0, hi)
        mu_hi, mu_lo = mu, self.config.multiplier_bracket[0]
        for _ in range(26):
            if mu_hi / mu_lo < 1.0 + 1e-6:
                break
            mid = math.sqrt(mu_lo * mu_hi)
            cand, _, theta = self._subgradient_inner(mid, theta, inner)
            if self.quad.loss(cand) <= self.eps:
                mu_hi = mid
                best_theta = cand
            else:
                mu_lo = mid
        return mu_hi, best_theta

    def polyak_refine(
        self, theta0: np.ndarray, target: float, mu: float, rounds: int
    ) -> np.ndarray:
        """Polyak-step subgradient ascent toward a known objective level.

        With the dual bound available, the step ``(target - value) /
        ||grad||^2`` homes in on the max-min optimum much faster than a
        diminishing schedule; this is what closes the gap when the loss
        constraint is slack at the optimum and the optimum sits on a tie
        of group utilities rather than on the constraint boundary.
        Returns the best feasible iterate by objective value.
        """
        theta = theta0.copy()
        best = self.restore_feasibility(theta)
        best_value = self.objective_at(best)
        tol = self.config.tol_optimality
        for _ in range(rounds):
            group_values = self.slopes @ theta + self.offsets
            z = int(np.argmin(group_values))
            loss = self.quad.loss(theta)
            value = float(group_values[z]) - mu * (loss - self.eps)
            if loss <= self.eps and group_values[z] > best_value:
                best_value = float(group_values[z])
                best = theta.copy()
                if best_value >= target - tol / 4:
                    break
            grad = self.slopes[z] - mu * (
                2.0 * (self.quad.gram @ theta - self.quad.linear)
                + self.quad.lam * np.sign(theta)
            )
            norm_sq = float(grad @ grad)
            if norm_sq <= 1e-30:
                break
            step = max(target - value, tol / 4) / norm_sq
            theta = theta + step * grad
            self.iterations += 1
        return best

    # -- exact weighted solves for the dual polish --

    def _weighted_argmax(self, weights, mu, theta0):
        """Exact inner argmax of the weighted Lagrangian via coordinate
        descent on the equivalent l1-penalized quadratic."""
        pooled_slope = weights @ self.slopes
        linear = self.quad.linear + pooled_slope / (2.0 * mu)
        theta, sweeps = _backend.lasso_cd_gram(
            self.quad.gram, np.ascontiguousarray(linear), self.quad.lam,
            np.ascontiguousarray(theta0, dtype=np.float64), _CD_MAX_SWEEPS, _CD_TOL,
        )
        self.iterations += sweeps
        return theta

    def weighted_value(self, weights: np.ndarray, theta0=None, mu_hint=None):
        """``max { w-weighted group utility : loss <= bound }`` and its argmax.

        Solved by bisecting the multiplier until the achieved loss sits
        on the bound (or the bracket floor when the weighted slope
        vanishes); the Lagrangian value at the matched multiplier equals
        the constrained optimum and upper-bounds the max-min objective.
        The loss is flat in the multiplier at the match point, so the
        value tolerates a loose match; a hint from a neighboring call
        collapses the bracket to a few steps.  Returns (value, argmax,
        matched multiplier).
        """
        floor, ceiling = self.config.multiplier_bracket
        theta = self.anchor.copy() if theta0 is None else theta0
        match_tol = 0.01 * self.config.tol_feasibility * max(1.0, self.eps)
        if mu_hint is not None:
            lo = max(mu_hint / 16.0, floor)
            hi = min(mu_hint * 16.0, ceiling)
        else:
            lo, hi = floor, ceiling
        # the achieved loss is non-increasing in the multiplier: grow the
        # bracket until it straddles the bound
        while hi < ceiling:
            theta = self._weighted_argmax(weights, hi, theta)
            if self.quad.loss(theta) <= self.eps:
                break
            lo, hi = hi, min(hi * 256.0, ceiling)
        while lo > floor:
            theta = self._weighted_argmax(weights, lo, theta)
            if self.quad.loss(theta) > self.eps:
                break
            lo, hi = max(lo / 256.0, floor), lo
        mu = hi
        theta = self._weighted_argmax(weights, mu, theta)
        for _ in range(60):
            loss = self.quad.loss(theta)
            if abs(loss - self.eps) <= match_tol or hi / lo < 1.0 + 1e-12:
                break
            if loss > self.eps:
                lo = mu
            else:
                hi = mu
            mu = math.sqrt(lo * hi)
            theta = self._weighted_argmax(weights, mu, theta)
        if self.quad.loss(theta) > self.eps:
            mu = hi
            theta = self._weighted_argmax(weights, mu, theta)
        value = float(
            weights @ (self.slopes @ theta + self.offsets)
            - mu * (self.quad.loss(theta) - self.eps)
        )
        return value, theta, mu

    def minimize_dual(self) -> tuple[float, list[np.ndarray]]:
        """Minimize the weighted bound over the group simplex.

        The bound is convex in the weights (a maximum of linear
        functions), so two groups need only a ternary search; more
        groups use projected subgradient steps on the simplex.  Every
        evaluation also yields a primal candidate.
        """
        m = len(self.offsets)
        candidates: list[np.ndarray] = []
        if m == 1:
            value, theta, _ = self.weighted_value(np.ones(1))
            return value, [theta]
        if m == 2:
            lo, hi = 0.0, 1.0
            theta = self.anchor.copy()
            mu = None
            best = math.inf
            for _ in range(44):
                s1, s2 = lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0
                v1, t1, mu = self.weighted_value(np.array([1.0 - s1, s1]), theta, mu)
                v2, t2, mu = self.weighted_value(np.array([1.0 - s2, s2]), t1, mu)
                theta = t2
                if v1 < v2:
                    hi = s2
                else:
                    lo = s1
                best = min(best, v1, v2)
                candidates.append(t1 if v1 <= v2 else t2)
            return best, candidates[-6:]
        weights = np.full(m, 1.0 / m)
        theta = self.anchor.copy()
        mu = None
        best = math.inf
        for t in range(1, 121):
            value, theta, mu = self.weighted_value(weights, theta, mu)
            if value < best:
                best = value
                candidates.append(theta)
            grad = self.slopes @ theta + self.offsets
            scale = float(np.linalg.norm(grad)) or 1.0
            weights = _project_simplex(weights - 0.2 / (scale * math.sqrt(t)) * grad)
        return best, candidates[-6:]


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, len(v) + 1) > cumulative)[0][-1]
    return np.maximum(v - cumulative[rho] / (rho + 1.0), 0.0)


def _solve_constrained(
    dataset: Dataset, slopes, offsets, config: SolverConfig
) -> SolverResult:
    problem = _ConstrainedProblem(dataset, slopes, offsets, config)
    eps, tol_f = problem.eps, config.tol_feasibility

    def finalize(theta: np.ndarray, dual_bound: float, status: str) -> SolverResult:
        loss = problem.quad.loss(theta)
        return SolverResult(
            weights=theta,
            objective=problem.objective_at(theta),
            loss=loss,
            mse=problem.quad.mse(theta),
            feasibility_residual=max(loss - eps, 0.0),
            dual_bound=dual_bound,
            iterations=problem.iterations,
            status=status,
            loss_bound=eps,
            lam=config.lam,
        )

    if eps < problem.eps_min - tol_f:
        return finalize(problem.anchor, -math.inf, "infeasible")
    if eps <= problem.eps_min + tol_f:
        # the feasible set collapses to the anchor
        return finalize(problem.anchor, problem.objective_at(problem.anchor), "optimal")

    mu, subgrad_theta = problem.subgradient_phase()
    candidates = [problem.restore_feasibility(subgrad_theta)]
    dual_bound, polish = problem.minimize_dual()
    candidates.extend(problem.restore_feasibility(t) for t in polish)
    theta = max(candidates, key=problem.objective_at)
    if dual_bound - problem.objective_at(theta) > config.tol_optimality:
        refined = problem.polyak_refine(theta, dual_bound, mu, rounds=6000)
        theta = max(theta, refined, key=problem.objective_at)
    gap = dual_bound - problem.objective_at(theta)
    status = "optimal" if gap <= config.tol_optimality else "max_iterations"
    return finalize(theta, dual_bound, status)


def solve_eop_training(
    dataset: Dataset, spec: UtilitySpec, config: SolverConfig
) -> SolverResult:
    """Maximize the worst group's average utility under the loss bound."""
    if not spec.covers(dataset.group_labels):
        raise KeyError("utility spec does not cover every group in the dataset")
    slopes, offsets, _ = group_affine_terms(dataset, spec)
    return _solve_constrained(dataset, slopes, offsets, config)


def solve_baseline(dataset: Dataset, config: SolverConfig) -> SolverResult:
    """Maximize the average residual under the loss bound.

    ``objective`` carries the achieved average residual."""
    slopes = dataset.X.mean(axis=0)[None, :]
    offsets = np.array([-float(dataset.y.mean())])
    return _solve_constrained(dataset, slopes, offsets, config)
