"""Convert the 10,000 MNIST digits bundled in the npm ``mnist`` package to IDX.

The official MNIST archives cannot be downloaded in offline environments, but
the npm package ``mnist`` (``npm pack mnist``) ships 10,000 real digits as
JSON arrays of grey levels rounded to three decimals. Multiplying by 255 and
rounding recovers the original bytes exactly.

The digits are shuffled with a fixed seed and split into an 8000-image
training file and a 2000-image test file, written with the conventional
MNIST file names (gzip-compressed).

Usage::

    npm pack mnist && tar xzf mnist-1.1.0.tgz
    python scripts/build_mnist_subset.py package data/mnist
"""
import argparse
import gzip
import json
from pathlib import Path

import numpy as np

from relugp.data import write_idx_images, write_idx_labels


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("package_dir", type=Path, help="extracted npm package root")
    parser.add_argument("out_dir", type=Path)
    parser.add_argument("--n-test", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    images, labels = [], []
    for digit in range(10):
        path = args.package_dir / "src" / "digits" / f"{digit}.json"
        grey = np.asarray(json.loads(path.read_text())["data"], dtype=np.float64)
        raw = np.rint(grey * 255.0)
        if np.abs(raw / 255.0 - grey).max() > 1e-3:
            raise SystemExit(f"{path}: values are not byte-quantized")
        raw = raw.astype(np.uint8).reshape(-1, 28, 28)
        images.append(raw)
        labels.append(np.full(len(raw), digit, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)

    order = np.random.default_rng(args.seed).permutation(len(labels))
    images, labels = images[order], labels[order]
    n_train = len(labels) - args.n_test

    args.out_dir.mkdir(parents=True, exist_ok=True)
    parts = {
        "train": (images[:n_train], labels[:n_train]),
        "t10k": (images[n_train:], labels[n_train:]),
    }
    for prefix, (imgs, labs) in parts.items():
        for suffix, writer, payload in (
            ("images-idx3-ubyte", write_idx_images, imgs),
            ("labels-idx1-ubyte", write_idx_labels, labs),
        ):
            target = args.out_dir / f"{prefix}-{suffix}.gz"
            # mtime=0 keeps the archives byte-reproducible
            with open(target, "wb") as raw_fh, gzip.GzipFile(
                filename="", fileobj=raw_fh, mode="wb", mtime=0
            ) as fh:
                writer(fh, payload)
            print(f"wrote {target} ({len(labs)} records)")


if __name__ == "__main__":
    main()
