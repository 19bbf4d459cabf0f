"""Grid search for the hyperparameter pair maximizing the log marginal likelihood."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from relugp.errors import AllCellsFailed, DegenerateKernel, FactorizationFailure
from relugp.gp import log_ml_from_gram
from relugp.kernel import HyperPair, gram_from_inner

MNIST_GRID = ((0.4, 1.2, 2.0, 2.8, 3.6), (0.0, 1.0, 2.0))
SIM_GRID = ((0.4, 1.2, 2.0, 2.8, 3.6), (0.0001, 0.01, 0.02))


@dataclass(frozen=True)
class HyperGrid:
    sigma_w_sq_values: tuple
    sigma_b_sq_values: tuple

    def __post_init__(self):
        for name in ("sigma_w_sq_values", "sigma_b_sq_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ValueError(f"{name} is empty")
            if not all(math.isfinite(v) and v >= 0 for v in vals):
                raise ValueError(f"{name} must be finite and nonnegative")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be strictly ascending")
            object.__setattr__(self, name, vals)

    @property
    def shape(self):
        return (len(self.sigma_w_sq_values), len(self.sigma_b_sq_values))

    def pair(self, i, j):
        return HyperPair(self.sigma_w_sq_values[i], self.sigma_b_sq_values[j])

    def cells(self):
        """Row-major ``(i, j, pair)`` with the weight variance outermost."""
        for i in range(self.shape[0]):
            for j in range(self.shape[1]):
                yield i, j, self.pair(i, j)

    @classmethod
    def mnist(cls):
        return cls(*MNIST_GRID)

    @classmethod
    def simulation(cls):
        return cls(*SIM_GRID)


@dataclass
class LikelihoodSurface:
    """Log marginal likelihood per grid cell; failed cells hold NaN."""

    grid: HyperGrid
    values: np.ndarray
    failures: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")
        if np.all(np.isnan(self.values)):
            raise AllCellsFailed(f"all {self.values.size} grid cells failed")

    @property
    def argmax_index(self):
        # nanargmax returns the first maximum in C order: lowest row-major index
        return np.unravel_index(int(np.nanargmax(self.values)), self.values.shape)

    @property
    def argmin_index(self):
        return np.unravel_index(int(np.nanargmin(self.values)), self.values.shape)

    @property
    def argmax(self):
        return self.grid.pair(*self.argmax_index)

    @property
    def argmin(self):
        return self.grid.pair(*self.argmin_index)

    def to_dict(self):
        return {
            "sigma_w_sq_values": list(self.grid.sigma_w_sq_values),
            "sigma_b_sq_values": list(self.grid.sigma_b_sq_values),
            "log_ml": [[None if math.isnan(v) else float(v) for v in row] for row in self.values],
            "failed_cells": [
                {"index": [int(i), int(j)], "error": msg}
                for (i, j), msg in sorted(self.failures.items())
            ],
            "argmax": list(self.argmax.as_tuple()),
            "argmin": list(self.argmin.as_tuple()),
        }

    @classmethod
    def from_dict(cls, d):
        grid = HyperGrid(d["sigma_w_sq_values"], d["sigma_b_sq_values"])
        values = [[math.nan if v is None else v for v in row] for row in d["log_ml"]]
        failures = {tuple(c["index"]): c["error"] for c in d.get("failed_cells", [])}
        return cls(grid, values, failures)


def evaluate_surface(train_inputs, train_targets, grid, noise_var, fan_in=None, workers=1):
    """Log marginal likelihood at every grid cell.

    Inner products are computed once and shared by all cells. Cells that
    fail (degenerate kernel, exhausted jitter) are recorded and skipped.
    """
    X = np.asarray(train_inputs, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    Y = np.asarray(train_targets, dtype=np.float64)
    if Y.shape[0] != X.shape[0]:
        raise ValueError(f"{X.shape[0]} inputs but {Y.shape[0]} targets")
    d = X.shape[1] if fan_in is None else fan_in
    inner = X @ X.T
    sq = np.einsum("ij,ij->i", X, X)

    values = np.full(grid.shape, np.nan)
    failures = {}

    def run(cell):
        i, j, hp = cell
        try:
            K = gram_from_inner(inner, sq, hp, d)
            values[i, j] = log_ml_from_gram(K, Y, noise_var)
        except (DegenerateKernel, FactorizationFailure) as exc:
            failures[(i, j)] = f"{type(exc).__name__}: {exc}"

    cells = list(grid.cells())
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, cells))
    else:
        for cell in cells:
            run(cell)
    return LikelihoodSurface(grid, values, failures)


def recommend(surface):
    """The recommended initialization: the surface's argmax pair."""
    return surface.argmax
