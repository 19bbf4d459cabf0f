"""Pure NumPy implementations of the routines in the compiled core.

Selected automatically when ``relugp._core`` cannot be imported, or forced
with ``RELUGP_PURE_PYTHON=1``. Signatures and return conventions match the
extension exactly.
"""
import numpy as np


def _relu_entries(sq_x, sq_y, inner, sw, sb, scale):
    var_x = sb + scale * sq_x
    var_y = sb + scale * sq_y
    norm = np.sqrt(var_x * var_y)
    c = np.clip((sb + scale * inner) / norm, -1.0, 1.0)
    phi = np.arccos(c)
    return sb + sw * norm / (2.0 * np.pi) * (np.sin(phi) + (np.pi - phi) * c)


def relu_gram_sym(inner, sq, sw, sb, fan_in):
    n = inner.shape[0]
    iu, ju = np.triu_indices(n)
    vals = _relu_entries(sq[iu], sq[ju], inner[iu, ju], sw, sb, sw / fan_in)
    out = np.empty((n, n))
    out[iu, ju] = vals
    out[ju, iu] = vals
    return out


def relu_gram_cross(inner, sq_a, sq_b, sw, sb, fan_in):
    return _relu_entries(sq_a[:, None], sq_b[None, :], inner, sw, sb, sw / fan_in)


def cholesky(a):
    """Column-oriented Cholesky; returns ``(L, bad_row)`` with -1 on success."""
    n = a.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        row = L[j, :j]
        d = a[j, j] - row @ row
        if not d > 0.0:
            return L, j
        L[j, j] = np.sqrt(d)
        if j + 1 < n:
            L[j + 1 :, j] = (a[j + 1 :, j] - L[j + 1 :, :j] @ row) / L[j, j]
    return L, -1


def solve_lower(L, b):
    x = np.array(b, dtype=np.float64, copy=True)
    for i in range(x.shape[0]):
        if i:
            x[i] -= L[i, :i] @ x[:i]
        x[i] /= L[i, i]
    return x


def solve_upper_t(L, b):
    x = np.array(b, dtype=np.float64, copy=True)
    n = x.shape[0]
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            x[i] -= L[i + 1 :, i] @ x[i + 1 :]
        x[i] /= L[i, i]
    return x
