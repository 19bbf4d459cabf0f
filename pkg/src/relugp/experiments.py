"""Experiment pipelines behind the command-line interface.

Each ``run_*`` function returns plain data (dicts, dataclasses) and never
touches the filesystem; :mod:`relugp.cli` handles artifacts and exit codes.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from relugp.data import make_sim_dataset, subsample
from relugp.gp import GpModel, posterior, rmse
from relugp.errors import NonFiniteLoss
from relugp.kernel import HyperPair
from relugp.net import AdamState, InitScheme, NetConfig, TrainingTrace, init_net, train_epochs
from relugp.report import derive_seed
from relugp.search import HyperGrid, evaluate_surface, recommend

DESIGN_PAIR = HyperPair(3.6, 0.02)
# fixed nugget shared by every grid cell; the simulated targets themselves are noiseless
SIM_NOISE_VAR = 1e-8


@dataclass
class SimulationResult:
    seed: int
    surface: object
    dataset: object
    predictions: dict  # "argmax"/"argmin" -> GpPosterior
    rmse: dict

    @property
    def rmse_ratio(self):
        return self.rmse["argmin"] / self.rmse["argmax"] if self.rmse["argmax"] > 0 else math.inf


def run_simulation(seed=0, design=DESIGN_PAIR, grid=None, n_paths=10, noise_var=SIM_NOISE_VAR,
                   fit_targets="paths", n_locations=100, n_train=70):
    """Recover the design pair from sample paths of the design GP.

    ``fit_targets="paths"`` scores every grid cell on all sample paths as
    independent replicates; ``"mean"`` scores it on their pointwise mean
    only. Posterior predictions always regress the path mean.
    """
    grid = grid or HyperGrid.simulation()
    ds = make_sim_dataset(design, n_paths, derive_seed(seed, "simulate"), n_locations, n_train)
    X = ds.train_locations[:, None]
    if fit_targets == "paths":
        Y = ds.train_paths
    elif fit_targets == "mean":
        Y = ds.train_targets
    else:
        raise ValueError(f"fit_targets must be 'paths' or 'mean', got {fit_targets!r}")
    surface = evaluate_surface(X, Y, grid, noise_var)
    preds, errs = {}, {}
    for tag, hp in (("argmax", surface.argmax), ("argmin", surface.argmin)):
        model = GpModel(X, ds.train_targets, hp, noise_var)
        post = posterior(model, ds.test_locations[:, None])
        preds[tag] = post
        errs[tag] = rmse(post.mean, ds.test_targets)
    return SimulationResult(seed, surface, ds, preds, errs)


def run_recommend(train_pool, train_size, seed, grid=None, noise_var=1e-2, workers=1):
    grid = grid or HyperGrid.mnist()
    subset = subsample(train_pool, train_size, derive_seed(seed, "subset"))
    surface = evaluate_surface(subset.inputs, subset.targets(), grid, noise_var, workers=workers)
    return surface, subset


@dataclass
class TrainSettings:
    hidden_width: int = 256
    epochs: int = 30
    batch_size: int = 128
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def as_dict(self):
        return dict(self.__dict__)


@dataclass
class TrainResult:
    init: InitScheme
    trace: object
    initial_net: object = field(repr=False)
    net: object = field(repr=False)

    @property
    def final_test_accuracy(self):
        return self.trace.final_test_accuracy


def run_train(subset, test, init, seed, settings=None, callback=None):
    """Initialize with ``init``, train on ``subset``, evaluate on ``test``.

    Seeds depend on the global seed and the init label only, so a given
    pair trains identically whether run alone or inside a sweep.
    """
    settings = settings or TrainSettings()
    cfg = NetConfig(subset.d_in, settings.hidden_width, subset.n_classes, init,
                    derive_seed(seed, "init", init.label))
    net = init_net(cfg)
    initial = net.copy()
    opt = AdamState.for_net(net, lr=settings.lr, beta1=settings.beta1,
                            beta2=settings.beta2, eps=settings.eps)
    batch = min(settings.batch_size, len(subset))
    if settings.epochs == 0:
        return TrainResult(init, TrainingTrace(), initial, net)
    trace = train_epochs(net, subset, opt, settings.epochs, batch,
                         derive_seed(seed, "shuffle", init.label), test_data=test, callback=callback)
    return TrainResult(init, trace, initial, net)


def _row(label, pair, acc):
    return {"label": label, "pair": None if pair is None else list(pair.as_tuple()), "test_accuracy": acc}


def run_sweep(train_pool, test, train_size, seed, grid=None, noise_var=1e-2, settings=None,
              include_he=True, callback=None):
    """Likelihood surface plus a trained network for every grid pair (and He init)."""
    grid = grid or HyperGrid.mnist()
    surface, subset = run_recommend(train_pool, train_size, seed, grid, noise_var)
    rec = recommend(surface)
    results, failures = [], []
    inits = [InitScheme.pair(hp) for _, _, hp in grid.cells()]
    if include_he:
        inits.append(InitScheme.he())
    he = None
    for init in inits:
        try:
            res = run_train(subset, test, init, seed, settings)
        except NonFiniteLoss as exc:
            failures.append({"init": init.label, "error": str(exc)})
            res = None
        if res is not None:
            if init.kind == "he":
                he = res
            else:
                results.append(res)
        if callback:
            callback(init, res)
    return SweepResult(surface, rec, results, he, failures, subset)


@dataclass
class SweepResult:
    surface: object
    recommended: HyperPair
    pair_results: list
    he_result: object
    failures: list
    subset: object

    def accuracy_of(self, hp):
        for r in self.pair_results:
            if r.init.hp == hp:
                return r.final_test_accuracy
        return math.nan

    def summary(self):
        """Best, worst, He-init and recommended rows."""
        ok = [r for r in self.pair_results if not math.isnan(r.final_test_accuracy)]
        best = max(ok, key=lambda r: r.final_test_accuracy) if ok else None
        worst = min(ok, key=lambda r: r.final_test_accuracy) if ok else None
        rows = {
            "best": _row("best", best.init.hp, best.final_test_accuracy) if best else None,
            "worst": _row("worst", worst.init.hp, worst.final_test_accuracy) if worst else None,
            "he_init": _row("he_init", None, self.he_result.final_test_accuracy) if self.he_result else None,
            "ours": _row("ours", self.recommended, self.accuracy_of(self.recommended)),
        }
        return rows


def summarize_rmse(results):
    ratios = [r.rmse_ratio for r in results]
    return {"median_ratio": float(np.median(ratios)), "ratios": ratios}
