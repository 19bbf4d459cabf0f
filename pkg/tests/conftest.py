from pathlib import Path
import sys

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from relugp import _backend  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
MNIST_DIR = ROOT / "data" / "mnist"

BACKENDS = _backend.available_backends()


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return BACKENDS[request.param]


@pytest.fixture(scope="session")
def mnist_dir():
    if not (MNIST_DIR / "train-images-idx3-ubyte.gz").exists():
        pytest.skip("MNIST subset not built (scripts/build_mnist_subset.py)")
    return MNIST_DIR
