"""Zero-mean Gaussian-process regression with the ReLU kernel.

Multi-output targets of shape ``(N, C)`` are treated as ``C`` independent
regressions sharing one kernel matrix; their log marginal likelihoods add.
"""
from dataclasses import dataclass, field
from functools import cached_property
import math
from typing import NamedTuple

import numpy as np

from relugp import linalg
from relugp.errors import DegenerateKernel, FactorizationFailure, KernelFailure, NotPositiveDefinite
from relugp.kernel import HyperPair, cross_gram, gram_matrix, kernel_diag

LOG_2PI = math.log(2.0 * math.pi)


class LmlTerms(NamedTuple):
    data_fit: float
    complexity: float
    constant: float

    @property
    def total(self):
        return self.data_fit + self.complexity + self.constant


class Factorization(NamedTuple):
    chol: np.ndarray
    noise_var: float
    jitter: float

    @property
    def effective_noise(self):
        return self.noise_var + self.jitter


def factor_gram(K, noise_var):
    """Cholesky of ``K + noise_var * I`` under the jitter policy.

    A zero ``noise_var`` starts from the base jitter so that the effective
    observation noise is always positive.
    """
    n = K.shape[0]
    start = 0.0 if noise_var > 0 else linalg.jitter_base(K)
    a = K + noise_var * np.eye(n) if noise_var > 0 else K
    try:
        L, jitter = linalg.cholesky_with_jitter(a, min_jitter=start)
    except NotPositiveDefinite as exc:
        raise FactorizationFailure(f"jitter exhausted: {exc}") from exc
    return Factorization(L, float(noise_var), float(jitter))


def lml_terms_from_factor(fac, targets):
    Y = np.asarray(targets, dtype=np.float64)
    Y2 = Y.reshape(Y.shape[0], -1)
    n, c = Y2.shape
    alpha = linalg.solve_spd(fac.chol, Y2)
    return LmlTerms(
        data_fit=-0.5 * float(np.sum(Y2 * alpha)),
        complexity=-0.5 * c * linalg.log_det(fac.chol),
        constant=-0.5 * c * n * LOG_2PI,
    )


def log_ml_from_gram(K, targets, noise_var):
    """Log marginal likelihood for a precomputed kernel matrix."""
    return lml_terms_from_factor(factor_gram(K, noise_var), targets).total


@dataclass(frozen=True)
class GpModel:
    train_inputs: np.ndarray
    train_targets: np.ndarray
    hp: HyperPair
    noise_var: float = 0.0
    fan_in: float | None = None

    def __post_init__(self):
        X = np.asarray(self.train_inputs, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.train_targets, dtype=np.float64)
        if X.shape[0] < 1 or y.shape[0] != X.shape[0]:
            raise ValueError(f"{X.shape[0]} inputs but {y.shape[0]} targets")
        if not self.noise_var >= 0:
            raise ValueError("noise_var must be >= 0")
        object.__setattr__(self, "train_inputs", X)
        object.__setattr__(self, "train_targets", y)

    @cached_property
    def gram(self):
        try:
            return gram_matrix(self.train_inputs, self.hp, self.fan_in)
        except DegenerateKernel as exc:
            raise KernelFailure(str(exc)) from exc

    @cached_property
    def factorization(self):
        return factor_gram(self.gram, self.noise_var)

    @cached_property
    def alpha(self):
        return linalg.solve_spd(self.factorization.chol, self.train_targets)


def lml_terms(m):
    return lml_terms_from_factor(m.factorization, m.train_targets)


def log_marginal_likelihood(m):
    """``-1/2 y^T A^{-1} y - 1/2 log|A| - N/2 log 2 pi`` with ``A = K + noise I``."""
    return lml_terms(m).total


@dataclass
class GpPosterior:
    mean: np.ndarray
    cov: np.ndarray = field(repr=False)

    @property
    def std(self):
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))


def posterior(m, test_inputs):
    """Predictive mean and covariance at ``test_inputs``."""
    Xs = np.asarray(test_inputs, dtype=np.float64)
    if Xs.ndim == 1:
        Xs = Xs[:, None]
    try:
        K_xs = cross_gram(m.train_inputs, Xs, m.hp, m.fan_in)
        K_ss = gram_matrix(Xs, m.hp, m.fan_in)
    except DegenerateKernel as exc:
        raise KernelFailure(str(exc)) from exc
    mean = K_xs.T @ m.alpha
    V = linalg.solve_lower(m.factorization.chol, K_xs)
    cov = K_ss - V.T @ V
    cov = 0.5 * (cov + cov.T)
    return GpPosterior(mean=mean, cov=cov)


def sample_paths(xs, hp, n_paths, seed, fan_in=None):
    """``n_paths`` independent prior draws at ``xs``, one per row."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    try:
        K = gram_matrix(xs, hp, fan_in)
    except DegenerateKernel as exc:
        raise KernelFailure(str(exc)) from exc
    try:
        L, _ = linalg.cholesky_with_jitter(K, min_jitter=linalg.jitter_base(K))
    except NotPositiveDefinite as exc:
        raise FactorizationFailure(str(exc)) from exc
    return linalg.sample_mvn(np.zeros(K.shape[0]), L, seed, size=n_paths)


def prior_variance(xs, hp, fan_in=None):
    return kernel_diag(xs, hp, fan_in)


def rmse(predicted, actual):
    p = np.asarray(predicted, dtype=np.float64).ravel()
    a = np.asarray(actual, dtype=np.float64).ravel()
    if p.size != a.size or p.size == 0:
        raise ValueError(f"length mismatch: {p.size} vs {a.size}")
    return float(np.sqrt(np.mean((p - a) ** 2)))
