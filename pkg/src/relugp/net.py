"""Single-hidden-layer ReLU network trained on one-hot regression targets.

The network computes ``z = b1 + W1 relu(b0 + W0 x)`` with a linear output
stage, is trained with mean squared error and Adam, and is evaluated by
argmax accuracy. Everything is plain NumPy; batched matrix products go
through BLAS.
"""
import csv
from dataclasses import dataclass, field
import io
import math
import time

import numpy as np

from relugp.errors import NonFiniteLoss
from relugp.kernel import HyperPair

PARAM_NAMES = ("w0", "b0", "w1", "b1")


@dataclass(frozen=True)
class InitScheme:
    """``pair``: N(0, s_w/fan_in) weights and N(0, s_b) biases. ``he``: N(0, 2/fan_in), zero biases."""

    kind: str
    hp: HyperPair | None = None

    def __post_init__(self):
        if self.kind not in ("pair", "he"):
            raise ValueError(f"unknown init kind {self.kind!r}")
        if self.kind == "pair" and self.hp is None:
            raise ValueError("pair init requires a HyperPair")

    @classmethod
    def pair(cls, hp):
        return cls("pair", hp)

    @classmethod
    def he(cls):
        return cls("he")

    @classmethod
    def parse(cls, text):
        """Parse ``he`` or ``pair:W,B``."""
        text = text.strip().lower()
        if text == "he":
            return cls.he()
        if text.startswith("pair:"):
            w, b = text[5:].split(",")
            return cls.pair(HyperPair(float(w), float(b)))
        raise ValueError(f"init must be 'he' or 'pair:W,B', got {text!r}")

    @property
    def label(self):
        return "he" if self.kind == "he" else f"pair:{self.hp.sigma_w_sq:g},{self.hp.sigma_b_sq:g}"


@dataclass(frozen=True)
class NetConfig:
    d_in: int
    hidden_width: int
    d_out: int
    init: InitScheme
    seed: int = 0

    def __post_init__(self):
        if min(self.d_in, self.hidden_width, self.d_out) < 1:
            raise ValueError("all layer sizes must be >= 1")


@dataclass
class ShallowNet:
    w0: np.ndarray  # (hidden, d_in)
    b0: np.ndarray  # (hidden,)
    w1: np.ndarray  # (d_out, hidden)
    b1: np.ndarray  # (d_out,)

    def params(self):
        return [self.w0, self.b0, self.w1, self.b1]

    def copy(self):
        return ShallowNet(*(p.copy() for p in self.params()))

    def is_finite(self):
        return all(np.all(np.isfinite(p)) for p in self.params())

    @property
    def n_params(self):
        return sum(p.size for p in self.params())


def init_net(cfg):
    rng = np.random.default_rng(cfg.seed)
    h, d, o = cfg.hidden_width, cfg.d_in, cfg.d_out
    if cfg.init.kind == "he":
        w0 = rng.normal(0.0, math.sqrt(2.0 / d), (h, d))
        w1 = rng.normal(0.0, math.sqrt(2.0 / h), (o, h))
        return ShallowNet(w0, np.zeros(h), w1, np.zeros(o))
    sw, sb = cfg.init.hp.sigma_w_sq, cfg.init.hp.sigma_b_sq
    w0 = rng.normal(0.0, math.sqrt(sw / d), (h, d))
    b0 = rng.normal(0.0, math.sqrt(sb), h)
    w1 = rng.normal(0.0, math.sqrt(sw / h), (o, h))
    b1 = rng.normal(0.0, math.sqrt(sb), o)
    return ShallowNet(w0, b0, w1, b1)


def forward(net, x):
    """Network output for one input ``(d_in,)`` or a batch ``(n, d_in)``."""
    x = np.asarray(x, dtype=np.float64)
    hidden = np.maximum(x @ net.w0.T + net.b0, 0.0)
    return hidden @ net.w1.T + net.b1


def mse_loss(pred, target):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    return float(np.mean((pred - target) ** 2))


def loss_and_grads(net, X, T):
    """Batch MSE and its gradient with respect to each parameter block."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    T = np.atleast_2d(np.asarray(T, dtype=np.float64))
    z0 = X @ net.w0.T + net.b0
    h = np.maximum(z0, 0.0)
    pred = h @ net.w1.T + net.b1
    diff = pred - T
    loss = float(np.mean(diff**2))
    d_pred = 2.0 * diff / diff.size
    d_h = d_pred @ net.w1
    # subgradient 0 at the kink
    d_z0 = d_h * (z0 > 0.0)
    grads = [d_z0.T @ X, d_z0.sum(axis=0), d_pred.T @ h, d_pred.sum(axis=0)]
    return loss, grads


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first_moment: list = field(default_factory=list)
    second_moment: list = field(default_factory=list)

    @classmethod
    def for_net(cls, net, **hyper):
        state = cls(**hyper)
        state.first_moment = [np.zeros_like(p) for p in net.params()]
        state.second_moment = [np.zeros_like(p) for p in net.params()]
        return state


def adam_step(net, grads, opt):
    """One in-place Adam update of ``net``."""
    if not opt.first_moment:
        opt.first_moment = [np.zeros_like(p) for p in net.params()]
        opt.second_moment = [np.zeros_like(p) for p in net.params()]
    opt.step += 1
    c1 = 1.0 - opt.beta1**opt.step
    c2 = 1.0 - opt.beta2**opt.step
    for p, g, m, v in zip(net.params(), grads, opt.first_moment, opt.second_moment):
        m *= opt.beta1
        m += (1.0 - opt.beta1) * g
        v *= opt.beta2
        v += (1.0 - opt.beta2) * g * g
        p -= opt.lr * (m / c1) / (np.sqrt(v / c2) + opt.eps)


def predict_classes(net, inputs, chunk=4096):
    out = np.empty(len(inputs), dtype=np.int64)
    for start in range(0, len(inputs), chunk):
        out[start : start + chunk] = np.argmax(forward(net, inputs[start : start + chunk]), axis=1)
    return out


def accuracy(net, data):
    """Fraction of records whose output argmax (lowest index on ties) is the label."""
    if len(data) == 0:
        raise ValueError("empty dataset")
    return float(np.mean(predict_classes(net, data.inputs) == data.labels))


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    test_accuracy: float
    wall_seconds: float
    train_accuracy: float


@dataclass
class TrainingTrace:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    @property
    def final_test_accuracy(self):
        return self.records[-1].test_accuracy if self.records else math.nan

    def to_csv(self, include_timing=True):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = ["epoch", "train_loss", "test_accuracy", "wall_seconds", "train_accuracy"]
        if not include_timing:
            cols.remove("wall_seconds")
        writer.writerow(cols)
        for r in self.records:
            row = {
                "epoch": r.epoch,
                "train_loss": f"{r.train_loss:.17g}",
                "test_accuracy": f"{r.test_accuracy:.17g}",
                "wall_seconds": f"{r.wall_seconds:.3f}",
                "train_accuracy": f"{r.train_accuracy:.17g}",
            }
            writer.writerow([row[c] for c in cols])
        return buf.getvalue()


def train_epochs(net, data, opt, epochs, batch_size, seed, test_data=None, callback=None):
    """Mini-batch Adam on MSE; mutates ``net`` and ``opt``.

    Records the mean training loss, training accuracy and (when
    ``test_data`` is given) test accuracy after every epoch.
    """
    if len(data) == 0:
        raise ValueError("empty training set")
    if not 1 <= batch_size <= len(data):
        raise ValueError(f"batch_size must be in [1, {len(data)}]")
    rng = np.random.default_rng(seed)
    targets = data.targets()
    trace = TrainingTrace()
    start = time.perf_counter()
    n = len(data)
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for b, lo in enumerate(range(0, n, batch_size)):
            idx = order[lo : lo + batch_size]
            loss, grads = loss_and_grads(net, data.inputs[idx], targets[idx])
            if not math.isfinite(loss):
                raise NonFiniteLoss(epoch, b)
            adam_step(net, grads, opt)
            total += loss * len(idx)
        if not net.is_finite():
            raise NonFiniteLoss(epoch)
        rec = EpochRecord(
            epoch=epoch,
            train_loss=total / n,
            test_accuracy=accuracy(net, test_data) if test_data is not None else math.nan,
            wall_seconds=time.perf_counter() - start,
            train_accuracy=accuracy(net, data),
        )
        trace.records.append(rec)
        if callback is not None:
            callback(rec)
    return trace


def grad_check(net, x, target, h=1e-5, floor=1e-6):
    """Max relative error between backprop and central finite differences.

    Relative error is ``|a - n| / max(|a|, |n|, floor)``. Inputs whose hidden
    pre-activations sit within ``h`` of zero give meaningless results.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    target = np.atleast_2d(np.asarray(target, dtype=np.float64))
    _, grads = loss_and_grads(net, x, target)
    worst = 0.0
    for p, g in zip(net.params(), grads):
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + h
            up = loss_and_grads(net, x, target)[0]
            flat[k] = orig - h
            down = loss_and_grads(net, x, target)[0]
            flat[k] = orig
            num = (up - down) / (2.0 * h)
            err = abs(gflat[k] - num) / max(abs(gflat[k]), abs(num), floor)
            worst = max(worst, err)
    return worst

