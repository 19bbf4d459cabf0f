"""Statistical agreement checks between the closed-form kernel and sampling.

Two suites:

* oracle agreement: closed-form post-activation moment versus a Monte-Carlo
  average over the 2-D pre-activation law;
* wide-network agreement: closed-form output covariance versus the empirical
  covariance of outputs of independently initialized finite-width networks.
"""
from dataclasses import asdict, dataclass

import numpy as np

from relugp.kernel import HyperPair, hidden_cov, mc_cov_stats, relu_cov
from relugp.net import InitScheme, NetConfig, init_net

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

# below this many samples a 4-sigma band has too little power to fail on
MIN_POWER_SAMPLES = 10_000
WIDENED_SIGMAS = 8.0


@dataclass
class CaseResult:
    case: int
    x: list
    y: list
    hp: list
    expected: float
    observed: float
    tolerance: float
    status: str

    def as_dict(self):
        return asdict(self)


def random_case(rng, d, norm_range=None, coord_range=(-2.0, 2.0), var_range=(0.1, 4.0)):
    if norm_range is None:
        x = rng.uniform(*coord_range, d)
        y = rng.uniform(*coord_range, d)
    else:
        x, y = (
            v / np.linalg.norm(v) * rng.uniform(*norm_range)
            for v in (rng.standard_normal(d), rng.standard_normal(d))
        )
    hp = HyperPair(rng.uniform(*var_range), rng.uniform(*var_range))
    return x, y, hp


def oracle_agreement(n_cases=50, n_samples=10**6, seed=0, d=3, n_sigmas=4.0):
    """Closed-form ``hidden_cov`` against the Monte-Carlo oracle."""
    rng = np.random.default_rng(seed)
    low_power = n_samples < MIN_POWER_SAMPLES
    results = []
    for case in range(n_cases):
        x, y, hp = random_case(rng, d)
        exact = hidden_cov(x, y, hp)
        est, se = mc_cov_stats(x, y, hp, n_samples, seed=[seed, case])
        err = abs(exact - est)
        if err <= n_sigmas * se:
            status = INCONCLUSIVE if low_power else PASS
        elif low_power and err <= WIDENED_SIGMAS * se:
            status = INCONCLUSIVE
        else:
            status = FAIL
        results.append(CaseResult(case, x.tolist(), y.tolist(), list(hp.as_tuple()),
                                  exact, est, n_sigmas * se, status))
    return results


def empirical_output_cov(xs, ys, hp, width=2000, draws=200, d_out=50, seed=0):
    """Mean of ``z_i(x) z_i(y)`` over network draws and output units.

    Output units of one network are independent given the hidden layer, so
    each draw contributes ``d_out`` samples per input pair.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
    d = xs.shape[1]
    inputs = np.vstack([xs, ys])
    n = len(xs)
    acc = np.zeros(n)
    seeds = np.random.SeedSequence(seed).generate_state(draws)
    for s in seeds:
        net = init_net(NetConfig(d, width, d_out, InitScheme.pair(hp), int(s)))
        z = np.maximum(inputs @ net.w0.T + net.b0, 0.0) @ net.w1.T + net.b1
        acc += np.mean(z[:n] * z[n:], axis=1)
    return acc / draws


def wide_net_agreement(n_pairs=10, width=2000, draws=200, d_out=50, seed=0, d=4, rel_tol=0.10):
    """Closed-form ``relu_cov`` against finite-width network output covariance."""
    rng = np.random.default_rng(seed)
    results = []
    for case in range(n_pairs):
        x, y, hp = random_case(rng, d, norm_range=(0.5, 2.0), var_range=(0.5, 4.0))
        exact = relu_cov(x, y, hp)
        est = float(empirical_output_cov(x, y, hp, width, draws, d_out, seed=[seed, case])[0])
        ok = abs(est - exact) <= rel_tol * abs(exact)
        results.append(CaseResult(case, x.tolist(), y.tolist(), list(hp.as_tuple()),
                                  exact, est, rel_tol * abs(exact), PASS if ok else FAIL))
    return results


def summarize(results):
    statuses = {r.status for r in results}
    if FAIL in statuses:
        return FAIL
    if INCONCLUSIVE in statuses:
        return INCONCLUSIVE
    return PASS
