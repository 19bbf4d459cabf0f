r"""Closed-form covariance of a single-hidden-layer ReLU network.

For a network with first-layer weights :math:`W_{jk} \sim N(0, \sigma_w^2/d)`,
biases :math:`b \sim N(0, \sigma_b^2)` and the same variance scales on the
output layer, the pre-activations at two inputs are jointly Gaussian with

.. math::

    \Sigma = \begin{pmatrix} \sigma_b^2 + s\|x\|^2 & \sigma_b^2 + s\,x\cdot y \\
             \sigma_b^2 + s\,x\cdot y & \sigma_b^2 + s\|y\|^2 \end{pmatrix},
    \qquad s = \sigma_w^2 / d.

The expected product of post-activations is

.. math::

    h(x, y) = \frac{\sqrt{\Sigma_{11}\Sigma_{22}}}{2\pi}
              \left(\sin\phi + (\pi - \phi)\cos\phi\right),
    \qquad \cos\phi = \Sigma_{12} / \sqrt{\Sigma_{11}\Sigma_{22}},

and the output covariance is :math:`k(x, y) = \sigma_b^2 + \sigma_w^2 h(x, y)`.

``fan_in`` is the divisor ``d`` of the weight variance. It defaults to the
input dimension so that the kernel matches a network initialized with
:func:`relugp.net.init_net`; pass ``fan_in=1`` for the unscaled form in which
:math:`\sigma_w^2` multiplies :math:`\|x\|^2` directly.
"""
from dataclasses import dataclass
import math

import numpy as np

from relugp._backend import core
from relugp.errors import DegenerateKernel


@dataclass(frozen=True)
class HyperPair:
    """Weight-variance scale and bias variance shared by kernel and network."""

    sigma_w_sq: float
    sigma_b_sq: float

    def __post_init__(self):
        for name in ("sigma_w_sq", "sigma_b_sq"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
        object.__setattr__(self, "sigma_w_sq", float(self.sigma_w_sq))
        object.__setattr__(self, "sigma_b_sq", float(self.sigma_b_sq))

    def as_tuple(self):
        return (self.sigma_w_sq, self.sigma_b_sq)

    def __str__(self):
        return f"({self.sigma_w_sq:g}, {self.sigma_b_sq:g})"


def _pair(x, y):
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"input dimensions differ: {x.size} vs {y.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("inputs must be finite")
    return x, y


def _moments(x, y, hp, fan_in):
    """Pre-activation variances and covariance for the input pair."""
    d = x.size if fan_in is None else fan_in
    if d <= 0:
        raise ValueError("fan_in must be positive")
    scale = hp.sigma_w_sq / d
    sb = hp.sigma_b_sq
    var_x = sb + scale * float(x @ x)
    var_y = sb + scale * float(y @ y)
    cross = sb + scale * float(x @ y)
    if var_x == 0.0 or var_y == 0.0:
        raise DegenerateKernel(
            "kernel angle undefined: zero bias variance with a zero input "
            "(or zero weight variance)"
        )
    return var_x, var_y, cross


def _angle(var_x, var_y, cross):
    norm = math.sqrt(var_x * var_y)
    c = min(1.0, max(-1.0, cross / norm))
    return math.acos(c), c, norm


def relu_angle(x, y, hp, fan_in=None):
    """Angle between the pre-activations, clamped into [0, pi]."""
    x, y = _pair(x, y)
    return _angle(*_moments(x, y, hp, fan_in))[0]


def hidden_cov(x, y, hp, fan_in=None):
    """Expected product of the hidden post-activations at ``x`` and ``y``."""
    x, y = _pair(x, y)
    phi, c, norm = _angle(*_moments(x, y, hp, fan_in))
    return norm / (2.0 * math.pi) * (math.sin(phi) + (math.pi - phi) * c)


def relu_cov(x, y, hp, fan_in=None):
    """Covariance of the network output at ``x`` and ``y``."""
    return hp.sigma_b_sq + hp.sigma_w_sq * hidden_cov(x, y, hp, fan_in)


def mc_cov_stats(x, y, hp, n_samples, seed, fan_in=None):
    """Monte-Carlo estimate of :func:`hidden_cov` and its standard error.

    Samples the pre-activation pair directly from its 2x2 Gaussian law,
    so cost does not depend on the input dimension.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    x, y = _pair(x, y)
    d = x.size if fan_in is None else fan_in
    scale = hp.sigma_w_sq / d
    sb = hp.sigma_b_sq
    cov = np.array(
        [
            [sb + scale * (x @ x), sb + scale * (x @ y)],
            [sb + scale * (x @ y), sb + scale * (y @ y)],
        ]
    )
    # eigen-factor instead of Cholesky: Sigma is singular for parallel inputs
    evals, evecs = np.linalg.eigh(cov)
    root = evecs * np.sqrt(np.clip(evals, 0.0, None))
    rng = np.random.default_rng(seed)
    uv = rng.standard_normal((n_samples, 2)) @ root.T
    prod = np.maximum(uv[:, 0], 0.0) * np.maximum(uv[:, 1], 0.0)
    mean = float(prod.mean())
    stderr = float(prod.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else math.inf
    return mean, stderr


def mc_cov_oracle(x, y, hp, n_samples, seed, fan_in=None):
    """Unbiased Monte-Carlo estimate of the post-activation product moment."""
    return mc_cov_stats(x, y, hp, n_samples, seed, fan_in)[0]


def _as_matrix(xs):
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[:, None]
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise ValueError("expected a nonempty (n, d) array of inputs")
    if not np.all(np.isfinite(xs)):
        raise ValueError("inputs must be finite")
    return np.ascontiguousarray(xs)


def _check_degenerate(sq, hp, offset=0):
    if hp.sigma_b_sq > 0:
        return
    zero = np.flatnonzero(sq == 0.0) if hp.sigma_w_sq > 0 else np.arange(sq.size)
    if zero.size:
        z = int(zero[0]) + offset
        raise DegenerateKernel(f"degenerate kernel at input {z}", pair=(0, z))


def gram_from_inner(inner, sq_norms, hp, fan_in):
    """Symmetric Gram matrix from precomputed inner products.

    Only the upper triangle of ``inner`` is read; the result is mirrored so
    that it is exactly symmetric.
    """
    sq_norms = np.ascontiguousarray(sq_norms, dtype=np.float64)
    _check_degenerate(sq_norms, hp)
    return core.relu_gram_sym(
        np.ascontiguousarray(inner, dtype=np.float64),
        sq_norms,
        hp.sigma_w_sq,
        hp.sigma_b_sq,
        float(fan_in),
    )


def gram_matrix(xs, hp, fan_in=None):
    """Dense kernel matrix ``K[i, j] = relu_cov(xs[i], xs[j])``."""
    xs = _as_matrix(xs)
    d = xs.shape[1] if fan_in is None else fan_in
    inner = xs @ xs.T
    return gram_from_inner(inner, np.einsum("ij,ij->i", xs, xs), hp, d)


def cross_gram(xs_a, xs_b, hp, fan_in=None):
    """Rectangular kernel matrix between two input sets."""
    xs_a = _as_matrix(xs_a)
    xs_b = _as_matrix(xs_b)
    if xs_a.shape[1] != xs_b.shape[1]:
        raise ValueError("input dimensions differ")
    d = xs_a.shape[1] if fan_in is None else fan_in
    sq_a = np.einsum("ij,ij->i", xs_a, xs_a)
    sq_b = np.einsum("ij,ij->i", xs_b, xs_b)
    _check_degenerate(sq_a, hp)
    _check_degenerate(sq_b, hp)
    return core.relu_gram_cross(
        np.ascontiguousarray(xs_a @ xs_b.T), sq_a, sq_b,
        hp.sigma_w_sq, hp.sigma_b_sq, float(d),
    )


def kernel_diag(xs, hp, fan_in=None):
    """Prior variances ``k(x, x)`` without forming the full matrix."""
    xs = _as_matrix(xs)
    d = xs.shape[1] if fan_in is None else fan_in
    sq = np.einsum("ij,ij->i", xs, xs)
    _check_degenerate(sq, hp)
    var = hp.sigma_b_sq + hp.sigma_w_sq / d * sq
    # phi = 0 on the diagonal
    return hp.sigma_b_sq + hp.sigma_w_sq * var / 2.0
