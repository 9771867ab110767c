import os
from pathlib import Path

import numpy as np
import pytest

from scalardl.objectives import DatasetHandle, Quadratic, ScaledSqNorm
from scalardl.scalarization import CompositeObjective

MNIST_FILES = (
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
)


def mnist_dir():
    root = os.getenv("MNIST_DIR")
    if not root or not all((Path(root) / f).exists() for f in MNIST_FILES):
        return None
    return Path(root)


requires_mnist = pytest.mark.skipif(
    mnist_dir() is None, reason="set MNIST_DIR to the uncompressed MNIST IDX files"
)


def two_quadratics(lam: float = 0.5) -> CompositeObjective:
    """
    C_1 = ½θ², C_2 = ½(θ − 2)², S = ½θ²; at λ = 0.5, α = 1 and θ* = 0.5.
    """
    return CompositeObjective([Quadratic([0.0]), Quadratic([2.0])], [ScaledSqNorm(0.5)], lam)


def five_quadratics(lam: float = 0.5, seed: int = 7) -> CompositeObjective:
    centers = np.random.default_rng(seed).standard_normal((5, 5))
    return CompositeObjective([Quadratic(c) for c in centers], [ScaledSqNorm(0.5)], lam)


@pytest.fixture
def two_quad():
    return two_quadratics()


@pytest.fixture
def five_quad():
    return five_quadratics()


@pytest.fixture
def label_bytes() -> bytes:
    return bytes([0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x03, 7, 2, 9])


@pytest.fixture
def image_bytes() -> bytes:
    header = bytes([0x00, 0x00, 0x08, 0x03]) + (2).to_bytes(4, "big") + (28).to_bytes(4, "big") * 2
    payload = bytes(i % 256 for i in range(2 * 28 * 28))
    return header + payload


@pytest.fixture
def tiny_dataset() -> DatasetHandle:
    gen = np.random.default_rng(3)
    x = np.hstack([gen.standard_normal((40, 2)), np.ones((40, 1))])
    y = gen.integers(0, 3, size=40)
    return DatasetHandle(x, y, n_classes=3)
