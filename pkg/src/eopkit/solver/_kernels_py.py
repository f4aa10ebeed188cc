"""Pure numpy implementations of the solver's hot loops.

Semantically identical to the compiled kernels in ``_kernels.pyx``;
selected automatically when the extension is unavailable or when
``EOPKIT_PURE_PYTHON`` is set.  Both kernels operate on the Gram form of
the squared loss, ``q(theta) = theta'G theta - 2 b'theta + const``, so
one iteration costs O(k^2) regardless of the sample size.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def soft_threshold(x: np.ndarray, t: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def lasso_cd_gram(
    gram: np.ndarray,
    linear: np.ndarray,
    l1: float,
    theta0: np.ndarray,
    max_sweeps: int,
    tol: float,
) -> tuple[np.ndarray, int]:
    """Coordinate descent for ``min theta'G theta - 2 linear'theta + l1*||theta||_1``.

    Each coordinate minimizer is a soft threshold; a maintained ``G theta``
    vector keeps updates O(k).  Stops when no coordinate moves more than
    ``tol`` in one sweep.  Returns the minimizer and the sweeps used.
    """
    k = gram.shape[0]
    theta = np.array(theta0, dtype=np.float64)
    g_theta = gram @ theta
    diag = np.diag(gram)
    half_l1 = 0.5 * l1
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        delta_max = 0.0
        for j in range(k):
            old = theta[j]
            if diag[j] <= 0.0:
                # identically-zero column: the coordinate is unconstrained
                # by the quadratic and the penalty keeps it at zero
                if old != 0.0:
                    g_theta -= old * gram[:, j]
                    theta[j] = 0.0
                continue
            resid = linear[j] - (g_theta[j] - diag[j] * old)
            new = np.sign(resid) * max(abs(resid) - half_l1, 0.0) / diag[j]
            if new != old:
                g_theta += (new - old) * gram[:, j]
                theta[j] = new
                delta_max = max(delta_max, abs(new - old))
        if delta_max <= tol:
            break
    return theta, sweeps


def prox_subgradient_maxmin(
    slopes: np.ndarray,
    offsets: np.ndarray,
    gram: np.ndarray,
    linear: np.ndarray,
    loss_const: float,
    multiplier: float,
    l1: float,
    loss_bound: float,
    theta0: np.ndarray,
    iterations: int,
    step_scale: float,
) -> tuple[np.ndarray, float, np.ndarray]:
    """Proximal subgradient ascent on the penalized max-min objective.

    Maximizes ``min_z (slopes[z]'theta + offsets[z])
    - multiplier * (q(theta) - loss_bound)`` where
    ``q(theta) = theta'G theta - 2 linear'theta + loss_const + l1*||theta||_1``.
    The smooth part is ascended with the active group's slope and the
    loss gradient; the l1 part is handled by a soft-threshold step.  The
    step size decays as ``step_scale / sqrt(t)``; the best iterate by
    objective value is tracked and returned along with the last iterate
    (useful for warm starts).
    """
    theta = np.array(theta0, dtype=np.float64)
    best = theta.copy()
    best_value = -np.inf
    for t in range(1, iterations + 1):
        g_theta = gram @ theta
        group_values = slopes @ theta + offsets
        z = int(np.argmin(group_values))
        q = float(theta @ g_theta - 2.0 * (linear @ theta) + loss_const
                  + l1 * np.abs(theta).sum())
        value = float(group_values[z]) - multiplier * (q - loss_bound)
        if value > best_value:
            best_value = value
            best[:] = theta
        step = step_scale / np.sqrt(t)
        grad = slopes[z] - 2.0 * multiplier * (g_theta - linear)
        theta = soft_threshold(theta + step * grad, step * multiplier * l1)
    return best, best_value, theta
