import numpy as np

from eopkit.core import Dataset


def surrogate_regression_dataset(seed: int = 0, n: int = 80, k: int = 3) -> Dataset:
    """A crime-shaped synthetic dataset: normalized targets, two groups.

    Used where the experiment harness needs realistic end-to-end input
    without the real survey data.
    """
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, k))
    groups = (rng.uniform(size=n) < 0.4).astype(int)
    true_weights = np.array([0.5, -0.3, 0.2])[:k]
    y = X @ true_weights + 0.15 * rng.normal(size=n) + 0.05 * groups
    y = (y - y.min()) / (y.max() - y.min())
    return Dataset(X=X, y=y, groups=groups)
