"""MNIST IDX ingestion, training-subset sampling, one-hot targets, and the
synthetic 1-D dataset drawn from a ReLU-kernel Gaussian process."""
from dataclasses import dataclass
import gzip
from pathlib import Path
import struct

import numpy as np

from relugp.errors import BadMagic, DataError, DimensionMismatch, LabelOutOfRange, TruncatedFile
from relugp.gp import sample_paths
from relugp.kernel import HyperPair

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049
CORRECT, INCORRECT = 0.9, -0.1

_SPLIT_PREFIX = {"train": "train", "test": "t10k"}


@dataclass
class LabeledDataset:
    inputs: np.ndarray
    labels: np.ndarray
    n_classes: int = 10

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.inputs.ndim != 2:
            raise DimensionMismatch(f"inputs must be 2-D, got shape {self.inputs.shape}")
        if len(self.inputs) != len(self.labels):
            raise DimensionMismatch(f"{len(self.inputs)} inputs but {len(self.labels)} labels")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise LabelOutOfRange(f"labels must lie in [0, {self.n_classes})")

    @property
    def d_in(self):
        return self.inputs.shape[1]

    def __len__(self):
        return len(self.labels)

    def targets(self):
        return one_hot_matrix(self.labels, self.n_classes)


def _open(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_header(fh, path, magic, n_dims):
    raw = fh.read(4 + 4 * n_dims)
    if len(raw) < 4:
        raise TruncatedFile(f"{path}: missing header")
    (found,) = struct.unpack(">i", raw[:4])
    if found != magic:
        raise BadMagic(f"{path}: magic {found}, expected {magic}")
    if len(raw) < 4 + 4 * n_dims:
        raise TruncatedFile(f"{path}: truncated header")
    return struct.unpack(f">{n_dims}i", raw[4:])


def read_idx_images_raw(path):
    """Images as a ``uint8`` array of shape ``(count, rows, cols)``."""
    with _open(path) as fh:
        count, rows, cols = _read_header(fh, path, IMAGE_MAGIC, 3)
        payload = fh.read()
    need = count * rows * cols
    if len(payload) < need:
        raise TruncatedFile(f"{path}: {len(payload)} pixel bytes, header promises {need}")
    return np.frombuffer(payload[:need], dtype=np.uint8).reshape(count, rows, cols)


def load_idx_images(path, expected_dim=None):
    """Flatten each image row-major and scale into [0, 1]."""
    raw = read_idx_images_raw(path)
    flat = raw.reshape(raw.shape[0], -1).astype(np.float64) / 255.0
    if expected_dim is not None and flat.shape[1] != expected_dim:
        raise DimensionMismatch(f"{path}: images have {flat.shape[1]} pixels, expected {expected_dim}")
    return flat


def load_idx_labels(path, n_classes=10):
    with _open(path) as fh:
        (count,) = _read_header(fh, path, LABEL_MAGIC, 1)
        payload = fh.read()
    if len(payload) < count:
        raise TruncatedFile(f"{path}: {len(payload)} label bytes, header promises {count}")
    labels = np.frombuffer(payload[:count], dtype=np.uint8).astype(np.int64)
    if labels.size and labels.max() >= n_classes:
        bad = int(np.flatnonzero(labels >= n_classes)[0])
        raise LabelOutOfRange(f"{path}: label {labels[bad]} at record {bad}")
    return labels


def write_idx_images(fh, images):
    images = np.asarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ValueError("images must have shape (count, rows, cols)")
    fh.write(struct.pack(">4i", IMAGE_MAGIC, *images.shape))
    fh.write(images.tobytes())


def write_idx_labels(fh, labels):
    labels = np.asarray(labels, dtype=np.uint8)
    fh.write(struct.pack(">2i", LABEL_MAGIC, labels.size))
    fh.write(labels.tobytes())


def _find(data_dir, prefix, kind):
    stems = [f"{prefix}-{kind}-ubyte", f"{prefix}-{kind.replace('-', '.')}-ubyte"]
    for stem in stems:
        for name in (stem, stem + ".gz"):
            p = Path(data_dir) / name
            if p.exists():
                return p
    raise FileNotFoundError(str(Path(data_dir) / (stems[0] + "[.gz]")))


def mnist_paths(data_dir, split):
    prefix = _SPLIT_PREFIX[split]
    return _find(data_dir, prefix, "images-idx3"), _find(data_dir, prefix, "labels-idx1")


def load_idx_dataset(images_path, labels_path):
    x = load_idx_images(images_path)
    y = load_idx_labels(labels_path)
    if len(x) != len(y):
        raise DimensionMismatch(f"{images_path} has {len(x)} images, {labels_path} has {len(y)} labels")
    return LabeledDataset(x, y)


def load_mnist(data_dir, split="train"):
    """Load a split (``train`` or ``test``) using the conventional file names."""
    return load_idx_dataset(*mnist_paths(data_dir, split))


def load_csv_dataset(path):
    """Rows of ``label,pixel0,...``; pixels are bytes scaled by 1/255."""
    rows = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
    if rows.shape[1] < 2:
        raise DataError(f"{path}: need a label column and at least one pixel column")
    labels = rows[:, 0]
    if np.any(labels != np.round(labels)):
        raise DataError(f"{path}: non-integer labels")
    return LabeledDataset(rows[:, 1:] / 255.0, labels.astype(np.int64))


def subsample(ds, n, seed):
    """``n`` records drawn uniformly without replacement, in original order."""
    if not 1 <= n <= len(ds):
        raise ValueError(f"cannot draw {n} records from a dataset of {len(ds)}")
    idx = np.sort(np.random.default_rng(seed).choice(len(ds), size=n, replace=False))
    return LabeledDataset(ds.inputs[idx], ds.labels[idx], ds.n_classes)


def one_hot(label, d_out=10):
    if not 0 <= label < d_out:
        raise ValueError(f"label {label} outside [0, {d_out})")
    out = np.full(d_out, INCORRECT)
    out[label] = CORRECT
    return out


def one_hot_matrix(labels, d_out=10):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= d_out):
        raise ValueError(f"labels outside [0, {d_out})")
    out = np.full((labels.size, d_out), INCORRECT)
    out[np.arange(labels.size), labels] = CORRECT
    return out


@dataclass
class SimDataset:
    locations: np.ndarray
    train_index: np.ndarray
    test_index: np.ndarray
    paths: np.ndarray
    design_hp: HyperPair

    @property
    def train_locations(self):
        return self.locations[self.train_index]

    @property
    def test_locations(self):
        return self.locations[self.test_index]

    @property
    def targets(self):
        """Pointwise mean of the sample paths."""
        return self.paths.mean(axis=0)

    @property
    def train_targets(self):
        return self.targets[self.train_index]

    @property
    def test_targets(self):
        return self.targets[self.test_index]

    @property
    def train_paths(self):
        """Training-location values of every path, shape ``(n_train, n_paths)``."""
        return self.paths[:, self.train_index].T


def make_sim_dataset(design_hp, n_paths=10, seed=0, n_locations=100, n_train=70, fan_in=None):
    """Sample paths of the design GP on an even grid over [0, 1], split train/test."""
    if not 1 <= n_train < n_locations:
        raise ValueError("need 1 <= n_train < n_locations")
    split_seed, path_seed = np.random.SeedSequence(seed).spawn(2)
    locations = np.linspace(0.0, 1.0, n_locations)
    perm = np.random.default_rng(split_seed).permutation(n_locations)
    train_index = np.sort(perm[:n_train])
    test_index = np.sort(perm[n_train:])
    paths = sample_paths(locations[:, None], design_hp, n_paths, np.random.default_rng(path_seed), fan_in)
    return SimDataset(locations, train_index, test_index, paths, design_hp)
