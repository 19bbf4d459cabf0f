"""``relugp`` command-line driver.

Exit codes: 0 success, 2 input or data error, 3 numerical failure,
4 property-check failure.
"""
import argparse
import json
from pathlib import Path
import re
import sys
import time

import numpy as np

from relugp import __version__, _backend
from relugp import checks
from relugp.data import load_csv_dataset, load_idx_dataset, load_mnist, subsample
from relugp.errors import AllCellsFailed, DataError, FactorizationFailure, KernelFailure, NonFiniteLoss
from relugp.experiments import (
    DESIGN_PAIR, SIM_NOISE_VAR, TrainSettings, run_recommend, run_simulation, run_sweep, run_train,
)
from relugp.net import InitScheme
from relugp.report import derive_seed, write_csv, write_json
from relugp.search import MNIST_GRID, SIM_GRID, HyperGrid

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_PROPERTY = 0, 2, 3, 4


class InputError(Exception):
    pass


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _init_scheme(text):
    try:
        return InitScheme.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grid(args, default):
    w = args.grid_w if args.grid_w is not None else default[0]
    b = args.grid_b if args.grid_b is not None else default[1]
    try:
        return HyperGrid(w, b)
    except ValueError as exc:
        raise InputError(f"bad grid: {exc}") from None


def _config(args, **extra):
    """Echo of every parsed flag plus resolved values; embedded in all artifacts."""
    cfg = {"command": args.command, "seed": args.seed}
    for key, value in sorted(vars(args).items()):
        # the output directory is where the artifact lives, not part of its content
        if key in ("command", "seed", "func", "out", "grid_w", "grid_b") or key in extra:
            continue
        if isinstance(value, InitScheme):
            value = value.label
        elif isinstance(value, Path):
            value = str(value)
        cfg[key] = value
    cfg.update(extra)
    cfg["backend"] = _backend.NAME
    cfg["version"] = __version__
    return cfg


def _grid_cfg(grid):
    return {"sigma_w_sq": list(grid.sigma_w_sq_values), "sigma_b_sq": list(grid.sigma_b_sq_values)}


def _slug(label):
    return re.sub(r"[^A-Za-z0-9.]+", "_", label).strip("_")


def _write_timing(out, timings):
    # wall-clock numbers live apart from the deterministic reports
    (Path(out) / "timing.json").write_text(json.dumps(timings, indent=2) + "\n")


def _settings(args):
    return TrainSettings(hidden_width=args.hidden_width, epochs=args.epochs,
                         batch_size=args.batch_size, lr=args.lr)


def _load_split(args, split):
    """``--csv``/``--images``+``--labels`` (or their ``--test-`` forms) override ``--data-dir``."""
    pre = "" if split == "train" else "test_"
    csv_path = getattr(args, pre + "csv")
    images, labels = getattr(args, pre + "images"), getattr(args, pre + "labels")
    if csv_path is not None:
        return load_csv_dataset(csv_path)
    if images is not None or labels is not None:
        if images is None or labels is None:
            flag = "--" + pre.replace("_", "-")
            raise InputError(f"{flag}images and {flag}labels must be given together")
        return load_idx_dataset(images, labels)
    return load_mnist(args.data_dir, split)


def _load_train(args):
    train = _load_split(args, "train")
    if not 1 <= args.train_size <= len(train):
        raise InputError(f"--train-size must be in [1, {len(train)}], got {args.train_size}")
    return train


def _load_splits(args):
    train = _load_train(args)
    test = _load_split(args, "test")
    if test.d_in != train.d_in:
        raise InputError(f"train inputs have {train.d_in} features, test inputs {test.d_in}")
    return train, test


def _trace_rows(trace):
    return [(r.epoch, r.train_loss, r.test_accuracy, r.train_accuracy) for r in trace.records]


TRACE_HEADER = ("epoch", "train_loss", "test_accuracy", "train_accuracy")


def cmd_simulate(args):
    t0 = time.perf_counter()
    grid = _grid(args, SIM_GRID)
    res = run_simulation(args.seed, DESIGN_PAIR, grid, args.n_paths, args.noise_var, args.fit_targets)
    cfg = _config(args, grid=_grid_cfg(grid), design_pair=list(DESIGN_PAIR.as_tuple()))
    out = Path(args.out)
    ds = res.dataset
    pred_files = {}
    for tag, post in res.predictions.items():
        rows = zip(ds.test_locations, ds.test_targets, post.mean, post.std)
        pred_files[tag] = write_csv(out / f"predictions_{tag}.csv",
                                    ("location", "truth", "mean", "stddev"), rows, cfg).name
    report = {
        "config": cfg,
        "surface": res.surface.to_dict(),
        "argmax": list(res.surface.argmax.as_tuple()),
        "argmin": list(res.surface.argmin.as_tuple()),
        "design_recovered": res.surface.argmax == DESIGN_PAIR,
        "rmse": {"argmax": res.rmse["argmax"], "argmin": res.rmse["argmin"]},
        "rmse_ratio": res.rmse_ratio,
        "predictions": pred_files,
    }
    write_json(out / "simulation.json", report)
    _write_timing(out, {"total_seconds": time.perf_counter() - t0})
    print(f"argmax {res.surface.argmax}  argmin {res.surface.argmin}")
    print(f"rmse argmax {res.rmse['argmax']:.3g}  argmin {res.rmse['argmin']:.3g}  ratio {res.rmse_ratio:.2f}")
    return EXIT_OK


def cmd_recommend(args):
    t0 = time.perf_counter()
    grid = _grid(args, MNIST_GRID)
    train = _load_train(args)
    surface, _ = run_recommend(train, args.train_size, args.seed, grid, args.noise_var, args.workers)
    cfg = _config(args, grid=_grid_cfg(grid))
    out = Path(args.out)
    write_json(out / "recommendation.json", {
        "config": cfg,
        "recommended": list(surface.argmax.as_tuple()),
        "surface": surface.to_dict(),
    })
    _write_timing(out, {"total_seconds": time.perf_counter() - t0})
    print(f"recommended {surface.argmax}")
    return EXIT_OK


def _train_summary(res, trace_name):
    return {
        "init": res.init.label,
        "pair": None if res.init.hp is None else list(res.init.hp.as_tuple()),
        "final_test_accuracy": res.final_test_accuracy,
        "epochs_completed": len(res.trace),
        "trace": trace_name,
    }


def cmd_train(args):
    t0 = time.perf_counter()
    train, test = _load_splits(args)
    subset = subsample(train, args.train_size, derive_seed(args.seed, "subset"))
    res = run_train(subset, test, args.init, args.seed, _settings(args))
    cfg = _config(args)
    out = Path(args.out)
    trace_name = f"trace_{_slug(res.init.label)}.csv"
    write_csv(out / trace_name, TRACE_HEADER, _trace_rows(res.trace), cfg)
    summary = {"config": cfg, **_train_summary(res, trace_name)}
    if args.dump_params:
        dump = out / f"params_{_slug(res.init.label)}.npz"
        np.savez(dump, **{f"initial_{k}": v for k, v in zip(("w0", "b0", "w1", "b1"), res.initial_net.params())},
                 **{f"final_{k}": v for k, v in zip(("w0", "b0", "w1", "b1"), res.net.params())})
        summary["params"] = dump.name
    write_json(out / "train.json", summary)
    _write_timing(out, {"total_seconds": time.perf_counter() - t0,
                        "epoch_seconds": [r.wall_seconds for r in res.trace.records]})
    print(f"{res.init.label}: final test accuracy {res.final_test_accuracy:.4f}")
    return EXIT_OK


def cmd_sweep(args):
    t0 = time.perf_counter()
    grid = _grid(args, MNIST_GRID)
    train, test = _load_splits(args)
    out = Path(args.out)
    cfg = _config(args, grid=_grid_cfg(grid))
    timings = {}
    last = [time.perf_counter()]

    def progress(init, res):
        now = time.perf_counter()
        timings[init.label] = now - last[0]
        last[0] = now
        acc = "failed" if res is None else f"{res.final_test_accuracy:.4f}"
        print(f"  {init.label}: {acc}", flush=True)

    sweep = run_sweep(train, test, args.train_size, args.seed, grid, args.noise_var,
                      _settings(args), include_he=not args.no_he, callback=progress)

    def entry(res):
        name = f"traces/trace_{_slug(res.init.label)}.csv"
        write_csv(out / name, TRACE_HEADER, _trace_rows(res.trace), cfg)
        return _train_summary(res, name)

    report = {
        "config": cfg,
        "surface": sweep.surface.to_dict(),
        "recommended": list(sweep.recommended.as_tuple()),
        "per_pair_results": [entry(r) for r in sweep.pair_results],
        "he_init_result": entry(sweep.he_result) if sweep.he_result else None,
        "failures": sweep.failures,
        "summary": sweep.summary(),
    }
    write_json(out / "report.json", report)
    _write_timing(out, {"total_seconds": time.perf_counter() - t0, "per_init_seconds": timings})
    for key, row in report["summary"].items():
        if row is not None:
            print(f"{key:8s} {row['pair']}  {row['test_accuracy']:.4f}")
    return EXIT_OK


def cmd_kernel_check(args):
    t0 = time.perf_counter()
    oracle = checks.oracle_agreement(args.cases, args.samples, args.seed)
    wide = [] if args.skip_wide else checks.wide_net_agreement(
        args.pairs, args.width, args.draws, seed=args.seed)
    suites = {"oracle_agreement": oracle}
    if not args.skip_wide:
        suites["wide_net_agreement"] = wide
    status = {name: checks.summarize(res) for name, res in suites.items()}
    out = Path(args.out)
    write_json(out / "kernel_check.json", {
        "config": _config(args),
        "status": status,
        "cases": {name: [r.as_dict() for r in res] for name, res in suites.items()},
    })
    _write_timing(out, {"total_seconds": time.perf_counter() - t0})
    for name, res in suites.items():
        print(f"{name}: {status[name]}")
        for r in res:
            if r.status != checks.PASS:
                print(f"  case {r.case} {r.status}: expected {r.expected:.6g} observed {r.observed:.6g} "
                      f"tol {r.tolerance:.3g}")
    return EXIT_PROPERTY if checks.FAIL in status.values() else EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=Path, default=None, help="output directory (default runs/<command>)")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--grid-w", type=_float_list, default=None, help="comma-separated sigma_w^2 values")
    grid.add_argument("--grid-b", type=_float_list, default=None, help="comma-separated sigma_b^2 values")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data-dir", type=Path, default=Path("data/mnist"))
    data.add_argument("--train-size", type=int, default=1000)
    for pre, what in (("", "training"), ("test-", "test")):
        data.add_argument(f"--{pre}images", type=Path, default=None, help=f"{what} IDX image file")
        data.add_argument(f"--{pre}labels", type=Path, default=None, help=f"{what} IDX label file")
        data.add_argument(f"--{pre}csv", type=Path, default=None, help=f"{what} CSV rows 'label,pixel0,...'")

    net = argparse.ArgumentParser(add_help=False)
    net.add_argument("--hidden-width", type=int, default=256)
    net.add_argument("--epochs", type=int, default=30)
    net.add_argument("--batch-size", type=int, default=128)
    net.add_argument("--lr", type=float, default=1e-3)

    parser = argparse.ArgumentParser(prog="relugp", description="ReLU-network GP kernel experiments")
    parser.add_argument("--version", action="version", version=f"relugp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common, grid], help="recover a design pair from GP sample paths")
    p.add_argument("--noise-var", type=float, default=SIM_NOISE_VAR)
    p.add_argument("--n-paths", type=int, default=10)
    p.add_argument("--fit-targets", choices=("paths", "mean"), default="paths")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("recommend", parents=[common, grid, data], help="grid-search the likelihood surface")
    p.add_argument("--noise-var", type=float, default=1e-2)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("train", parents=[common, data, net], help="train one network")
    p.add_argument("--init", type=_init_scheme, required=True, help="'he' or 'pair:W,B'")
    p.add_argument("--dump-params", action="store_true", help="save initial and final parameters (.npz)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", parents=[common, grid, data, net], help="train at every grid pair plus He init")
    p.add_argument("--noise-var", type=float, default=1e-2)
    p.add_argument("--no-he", action="store_true", help="skip the He-init baseline")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("kernel-check", parents=[common], help="statistical checks of the closed-form kernel")
    p.add_argument("--samples", type=int, default=10**6, help="Monte-Carlo samples per oracle case")
    p.add_argument("--cases", type=int, default=50)
    p.add_argument("--pairs", type=int, default=10, help="input pairs for the wide-network check")
    p.add_argument("--width", type=int, default=2000)
    p.add_argument("--draws", type=int, default=200)
    p.add_argument("--skip-wide", action="store_true")
    p.set_defaults(func=cmd_kernel_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.out is None:
        args.out = Path("runs") / args.command
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename or exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DataError, InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NonFiniteLoss, FactorizationFailure, KernelFailure, AllCellsFailed) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
