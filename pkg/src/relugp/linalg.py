"""Dense symmetric linear algebra on top of the selected core backend.

Factors are plain lower-triangular ``ndarray`` objects, as returned by
:func:`cholesky`.
"""
import numpy as np

from relugp._backend import core
from relugp.errors import NotPositiveDefinite


def _square(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"expected a nonempty square matrix, got shape {a.shape}")
    return a


def cholesky(a, backend=None):
    """Lower-triangular ``L`` with ``L @ L.T == a``.

    Only the lower triangle of ``a`` is read. Raises
    :class:`NotPositiveDefinite` carrying the failing row.
    """
    a = _square(a)
    L, bad = (backend or core).cholesky(a)
    if bad >= 0:
        raise NotPositiveDefinite(int(bad))
    return L


def _rhs(f, b):
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != f.shape[0]:
        raise ValueError(f"right-hand side has {b.shape[0]} rows, factor has order {f.shape[0]}")
    return np.ascontiguousarray(b.reshape(b.shape[0], -1)), b.ndim == 1


def solve_lower(f, b, backend=None):
    """Solve ``L x = b`` by forward substitution."""
    rhs, vec = _rhs(f, b)
    x = (backend or core).solve_lower(f, rhs)
    return x[:, 0] if vec else x


def solve_upper_t(f, b, backend=None):
    """Solve ``L^T x = b`` by back substitution."""
    rhs, vec = _rhs(f, b)
    x = (backend or core).solve_upper_t(f, rhs)
    return x[:, 0] if vec else x


def solve_spd(f, b, backend=None):
    """Solve ``(L L^T) x = b``; ``b`` may be a vector or an (n, m) matrix."""
    return solve_upper_t(f, solve_lower(f, b, backend), backend)


def log_det(f):
    """Log-determinant of ``L L^T``."""
    return 2.0 * float(np.sum(np.log(np.diag(f))))


def sample_mvn(mean, f, seed, size=None):
    """Draw ``mean + L z`` with ``z`` standard normal from a seeded generator.

    With ``size`` given, returns ``size`` independent draws as rows.
    """
    mean = np.asarray(mean, dtype=np.float64)
    n = f.shape[0]
    if mean.shape != (n,):
        raise ValueError(f"mean has shape {mean.shape}, factor has order {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if size is None:
        return mean + f @ rng.standard_normal(n)
    z = rng.standard_normal((size, n))
    return mean + z @ f.T


def jitter_base(a):
    """Initial diagonal jitter: ``1e-8 * trace(a) / n``."""
    n = a.shape[0]
    base = 1e-8 * float(np.trace(a)) / n
    return base if base > 0 else 1e-8


def cholesky_with_jitter(a, min_jitter=0.0, max_doublings=6, backend=None):
    """Factor ``a + jitter * I``, growing the jitter on failure.

    The first attempt uses ``min_jitter``. Each failure retries with
    ``jitter_base(a)`` (or at least ``min_jitter``) doubled up to
    ``max_doublings`` times. Returns ``(L, jitter)``.
    """
    a = _square(a)
    base = jitter_base(a)
    jitter = float(min_jitter)
    eye = np.eye(a.shape[0])
    attempts = [jitter] + [max(base, jitter) * 2.0**k for k in range(max_doublings + 1)]
    last = None
    for jitter in attempts:
        try:
            return cholesky(a + jitter * eye if jitter else a, backend), jitter
        except NotPositiveDefinite as exc:
            last = exc
    raise last

