import math

import numpy as np
import pytest

from relugp.checks import empirical_output_cov
from relugp.data import LabeledDataset, one_hot
from relugp.errors import NonFiniteLoss
from relugp.kernel import HyperPair, relu_cov
from relugp.net import (
    AdamState, InitScheme, NetConfig, ShallowNet, accuracy, adam_step, forward, grad_check, init_net,
    loss_and_grads, mse_loss, train_epochs,
)


def small_net(seed, d_in=3, hidden=5, d_out=2):
    return init_net(NetConfig(d_in, hidden, d_out, InitScheme.pair(HyperPair(2.0, 0.5)), seed))


def test_init_scheme_parse():
    assert InitScheme.parse("he") == InitScheme.he()
    assert InitScheme.parse("pair:3.6,0").hp == HyperPair(3.6, 0.0)
    assert InitScheme.parse(" PAIR:1,2 ").label == "pair:1,2"
    for bad in ("xavier", "pair:1", "pair:-1,0"):
        with pytest.raises(ValueError):
            InitScheme.parse(bad)


def test_zero_pair_gives_zero_parameters():
    net = init_net(NetConfig(784, 64, 10, InitScheme.pair(HyperPair(0.0, 0.0)), 1))
    assert all(np.all(p == 0.0) for p in net.params())


def test_pair_init_moments():
    net = init_net(NetConfig(784, 1000, 10, InitScheme.pair(HyperPair(3.6, 0.5)), 2))
    assert net.w0.var() == pytest.approx(3.6 / 784, rel=0.02)
    assert net.w1.var() == pytest.approx(3.6 / 1000, rel=0.02)
    for block, target in ((net.w0, 3.6 / 784), (net.b0, 0.5), (net.w1, 3.6 / 1000), (net.b1, 0.5)):
        assert abs(block.mean()) <= 3 * math.sqrt(target / block.size)
    # bias blocks are small; a 5-sigma band on the sample variance
    assert abs(net.b0.var() / 0.5 - 1) <= 5 * math.sqrt(2 / net.b0.size)


def test_he_init_moments_and_zero_biases():
    net = init_net(NetConfig(784, 1000, 10, InitScheme.he(), 3))
    assert net.w0.var() == pytest.approx(2 / 784, rel=0.02)
    assert net.w1.var() == pytest.approx(2 / 1000, rel=0.02)
    assert np.all(net.b0 == 0.0) and np.all(net.b1 == 0.0)


def test_init_deterministic():
    a, b = small_net(7), small_net(7)
    assert all(np.array_equal(p, q) for p, q in zip(a.params(), b.params()))


def test_config_validation():
    with pytest.raises(ValueError):
        NetConfig(0, 4, 2, InitScheme.he())


def test_forward_examples():
    zero = ShallowNet(np.zeros((3, 2)), np.zeros(3), np.zeros((4, 3)), np.zeros(4))
    assert np.all(forward(zero, [1.0, -1.0]) == 0.0)
    dead = ShallowNet(-np.ones((3, 2)), -np.ones(3), np.ones((2, 3)), np.array([0.25, -0.5]))
    np.testing.assert_array_equal(forward(dead, [1.0, 2.0]), [0.25, -0.5])
    hand = ShallowNet(np.eye(2), np.zeros(2), np.array([[1.0, -1.0]]), np.array([0.5]))
    np.testing.assert_allclose(forward(hand, [2.0, -3.0]), [2.5])


def test_mse_examples():
    t = one_hot(3)
    assert mse_loss(t, t) == 0.0
    assert mse_loss(np.zeros(10), t) == pytest.approx(0.09)
    with pytest.raises(ValueError):
        mse_loss(np.zeros(9), t)


def test_output_gradient_formula():
    net = small_net(1)
    x, t = np.array([[0.3, -0.2, 0.9]]), np.array([[0.9, -0.1]])
    _, grads = loss_and_grads(net, x, t)
    p = forward(net, x)
    np.testing.assert_allclose(grads[3], (2 * (p - t) / 2).ravel(), rtol=1e-14)


def _away_from_kinks(net, x, margin=1e-3):
    return np.min(np.abs(x @ net.w0.T + net.b0)) > margin


def test_gradient_check_100_random_nets():
    rng = np.random.default_rng(0)
    worst, checked, seed = 0.0, 0, 0
    while checked < 100:
        seed += 1
        net = small_net(seed)
        x, t = rng.uniform(-1, 1, (1, 3)), one_hot(int(rng.integers(2)), 2)[None, :]
        if not _away_from_kinks(net, x):
            continue
        worst = max(worst, grad_check(net, x, t))
        checked += 1
    assert worst <= 1e-4


def test_gradient_check_linear_regime():
    # positive weights, biases and inputs keep every ReLU active
    rng = np.random.default_rng(1)
    net = ShallowNet(rng.uniform(0.1, 1, (4, 3)), rng.uniform(0.1, 1, 4),
                     rng.standard_normal((2, 4)), rng.standard_normal(2))
    assert grad_check(net, rng.uniform(0.1, 1, (1, 3)), [[0.9, -0.1]]) <= 1e-7


def test_adam_zero_gradient_leaves_parameters():
    net = small_net(2)
    before = net.copy()
    opt = AdamState.for_net(net)
    adam_step(net, [np.zeros_like(p) for p in net.params()], opt)
    assert opt.step == 1
    assert all(np.array_equal(p, q) for p, q in zip(net.params(), before.params()))


def test_adam_first_step_moves_by_lr():
    net = small_net(3)
    before = net.copy()
    opt = AdamState.for_net(net, lr=0.01)
    grads = [np.ones_like(p) for p in net.params()]
    adam_step(net, grads, opt)
    for p, q in zip(net.params(), before.params()):
        np.testing.assert_allclose(q - p, 0.01, rtol=1e-6)


def separable_toy(seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, (20, 2))
    X[:, 0] += np.where(np.arange(20) < 10, -1.5, 1.5)
    return LabeledDataset(X, (np.arange(20) >= 10).astype(int), n_classes=2)


def test_trains_separable_toy_to_full_accuracy():
    data = separable_toy()
    net = init_net(NetConfig(2, 16, 2, InitScheme.he(), 0))
    trace = train_epochs(net, data, AdamState.for_net(net, lr=0.01), 50, 5, seed=0, test_data=data)
    assert trace.final_test_accuracy == 1.0
    assert len(trace) == 50


def test_zero_epochs_is_a_no_op():
    data = separable_toy()
    net = small_net(4, d_in=2)
    before = net.copy()
    trace = train_epochs(net, data, AdamState.for_net(net), 0, 5, seed=0)
    assert len(trace) == 0
    assert all(np.array_equal(p, q) for p, q in zip(net.params(), before.params()))


def test_training_deterministic():
    data = separable_toy(1)
    traces = []
    for _ in range(2):
        net = small_net(5, d_in=2)
        traces.append(train_epochs(net, data, AdamState.for_net(net), 5, 4, seed=9, test_data=data))
    assert traces[0].to_csv(include_timing=False) == traces[1].to_csv(include_timing=False)


def test_batch_size_validation():
    data = separable_toy()
    net = small_net(6, d_in=2)
    with pytest.raises(ValueError):
        train_epochs(net, data, AdamState.for_net(net), 1, 21, seed=0)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_loss_aborts_with_epoch():
    data = separable_toy()
    net = small_net(6, d_in=2)
    net.w1[:] = np.inf
    with pytest.raises(NonFiniteLoss) as info:
        train_epochs(net, data, AdamState.for_net(net), 3, 5, seed=0)
    assert info.value.epoch == 1


def test_accuracy_examples():
    data = LabeledDataset(np.eye(3), [0, 1, 2], n_classes=3)
    perfect = ShallowNet(np.eye(3), np.zeros(3), np.eye(3), np.zeros(3))
    assert accuracy(perfect, data) == 1.0
    zero = ShallowNet(np.zeros((3, 3)), np.zeros(3), np.zeros((3, 3)), np.zeros(3))
    assert accuracy(zero, data) == pytest.approx(1 / 3)  # ties go to class 0
    half = LabeledDataset(np.eye(3)[:2], [0, 2], n_classes=3)
    assert accuracy(perfect, half) == 0.5


def test_trace_csv_columns():
    data = separable_toy()
    net = small_net(8, d_in=2)
    trace = train_epochs(net, data, AdamState.for_net(net), 2, 10, seed=0, test_data=data)
    header = trace.to_csv().splitlines()[0].split(",")
    assert header[:4] == ["epoch", "train_loss", "test_accuracy", "wall_seconds"]


def test_output_variance_matches_kernel():
    x = np.array([0.6, -0.9, 1.1, 0.2])
    hp = HyperPair(2.5, 0.3)
    # 200 re-initializations; each draw pools 10 independent output units
    var = empirical_output_cov(x, x, hp, width=1000, draws=200, d_out=10, seed=4)[0]
    assert var == pytest.approx(relu_cov(x, x, hp), rel=0.10)
