"""Reference implementations used only by the tests.

None of these share code with the package: dense algebra is done by
elimination and Jacobi rotations, and the kernel moment is computed by
conditioning plus 1-D quadrature or by sampling full weight vectors.
"""
import math

import numpy as np


def gauss_jordan_inverse(a):
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    aug = np.hstack([a, np.eye(n)])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(aug[col:, col])))
        aug[[col, piv]] = aug[[piv, col]]
        aug[col] /= aug[col, col]
        for r in range(n):
            if r != col:
                aug[r] -= aug[r, col] * aug[col]
    return aug[:, n:]


def det_by_elimination(a):
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    det = 1.0
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if a[piv, col] == 0.0:
            return 0.0
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            det = -det
        det *= a[col, col]
        a[col + 1 :] -= np.outer(a[col + 1 :, col] / a[col, col], a[col])
    return det


def logdet_direct(a):
    return math.log(det_by_elimination(a))


def jacobi_eigenvalues(a, sweeps=100, tol=1e-14):
    """Cyclic Jacobi rotations on a small symmetric matrix."""
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * max(np.max(np.abs(np.diag(a))), 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q], rot[q, p] = s, -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


def lml_naive(K, y, noise_var):
    A = np.asarray(K) + noise_var * np.eye(len(K))
    y = np.asarray(y, dtype=np.float64)
    inv = gauss_jordan_inverse(A)
    return -0.5 * y @ inv @ y - 0.5 * logdet_direct(A) - 0.5 * len(y) * math.log(2 * math.pi)


def posterior_naive(K, K_xs, K_ss, y, noise_var):
    inv = gauss_jordan_inverse(np.asarray(K) + noise_var * np.eye(len(K)))
    return K_xs.T @ inv @ y, K_ss - K_xs.T @ inv @ K_xs


def _phi(z):
    return math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)


def _Phi(z):
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def relu_moment_quadrature(var_u, var_v, cov, n_grid=20001, width=12.0):
    """E[relu(U) relu(V)] for a zero-mean 2-D Gaussian.

    Conditions on U, uses the closed-form rectified mean of V | U, and
    integrates over u > 0 with Simpson's rule.
    """
    su = math.sqrt(var_u)
    beta = cov / var_u
    s = math.sqrt(max(var_v - beta * cov, 0.0))
    u = np.linspace(0.0, width * su, n_grid)
    vals = np.empty_like(u)
    for k, uk in enumerate(u):
        m = beta * uk
        cond = max(m, 0.0) if s == 0.0 else m * _Phi(m / s) + s * _phi(m / s)
        vals[k] = uk * cond * _phi(uk / su) / su
    h = u[1] - u[0]
    return h / 3.0 * (vals[0] + vals[-1] + 4 * vals[1:-1:2].sum() + 2 * vals[2:-1:2].sum())


def hidden_cov_quadrature(x, y, sw, sb, fan_in):
    x, y = np.asarray(x, float), np.asarray(y, float)
    s = sw / fan_in
    return relu_moment_quadrature(sb + s * x @ x, sb + s * y @ y, sb + s * x @ y)


def hidden_cov_full_weights(x, y, sw, sb, fan_in, n_samples, seed):
    """Sample whole weight vectors and biases; returns (mean, stderr)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, math.sqrt(sw / fan_in), (n_samples, x.size))
    b = rng.normal(0.0, math.sqrt(sb), n_samples)
    prod = np.maximum(w @ x + b, 0.0) * np.maximum(w @ y + b, 0.0)
    return float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(n_samples))


def random_spd(rng, n, cond_floor=1e-2):
    q = rng.standard_normal((n, n))
    return q @ q.T / n + cond_floor * np.eye(n)
