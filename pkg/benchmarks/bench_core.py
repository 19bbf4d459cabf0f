"""Compare the compiled core against the NumPy fallback.

    python benchmarks/bench_core.py [--sizes 500 1000 2000] [--repeat 3]

Times Gram assembly, Cholesky and a 10-column triangular solve on MNIST-like
inputs (784 features in [0, 1]) and checks that both backends agree.
"""
import argparse
import time

import numpy as np

from relugp import _backend


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench(n, repeat, backends, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 1.0, (n, 784)) * (rng.uniform(size=(n, 784)) < 0.2)
    inner = np.ascontiguousarray(X @ X.T)
    sq = np.ascontiguousarray(np.diag(inner).copy())
    sw, sb = 2.0, 0.0
    Y = rng.standard_normal((n, 10))
    rows, ref = [], {}
    for name, mod in backends.items():
        t_gram, K = best_of(lambda: mod.relu_gram_sym(inner, sq, sw, sb, 784.0), repeat)
        A = K + 1e-2 * np.eye(n)
        t_chol, (L, bad) = best_of(lambda: mod.cholesky(A), repeat)
        assert bad == -1
        t_solve, Z = best_of(lambda: mod.solve_lower(L, Y), repeat)
        ref[name] = (K, L, Z)
        rows.append((name, n, t_gram, t_chol, t_solve))
    names = list(ref)
    if len(names) == 2:
        a, b = ref[names[0]], ref[names[1]]
        diffs = [float(np.max(np.abs(x - y)) / max(np.max(np.abs(y)), 1e-300)) for x, y in zip(a, b)]
        worst = max(diffs)
        assert worst < 1e-10, f"backends disagree: relative difference {worst:.3g}"
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 1000, 2000])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = _backend.available_backends()
    if "cython" not in backends:
        print("compiled core not built; timing the NumPy fallback only")
    print(f"{'backend':8s} {'n':>6s} {'gram s':>9s} {'chol s':>9s} {'solve s':>9s}")
    for n in args.sizes:
        for name, n_, tg, tc, ts in bench(n, args.repeat, backends):
            print(f"{name:8s} {n_:6d} {tg:9.4f} {tc:9.4f} {ts:9.4f}")


if __name__ == "__main__":
    main()
