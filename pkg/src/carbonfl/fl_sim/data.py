"""Synthetic and MNIST-format datasets, and non-IID client partitioning."""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import BadShape, PartitionFailure, SchemaError
from .models import make_model

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    num_classes: int

    def __len__(self) -> int:
        return self.y.size

    @property
    def feature_dim(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], self.num_classes)


def make_synthetic_task(
    num_classes: int,
    feature_dim: int,
    samples_per_class: int,
    seed: int,
    separation: float = 3.0,
    test_fraction: float = 0.2,
    feature_scale: float = 1.0,
) -> tuple[Dataset, Dataset]:
    """Gaussian mixture with spherical clusters, one per class.

    Class means sit ``separation`` standard deviations apart pairwise when
    ``num_classes <= feature_dim`` (orthogonal directions); otherwise they are
    random unit directions at the same radius. Every feature is finally
    multiplied by ``feature_scale`` (the cluster standard deviation), which
    slows SGD without changing the Bayes error. Returns ``(train, test)``.
    """
    if num_classes < 2 or feature_dim < 1 or samples_per_class < 1:
        raise BadShape(
            f"need num_classes >= 2, feature_dim >= 1, samples_per_class >= 1 "
            f"(got {num_classes}, {feature_dim}, {samples_per_class})"
        )
    if not 0 < test_fraction < 1:
        raise BadShape("test_fraction must lie in (0, 1)")
    if not feature_scale > 0:
        raise BadShape("feature_scale must be > 0")
    rng = np.random.default_rng(seed)
    if num_classes <= feature_dim:
        q, _ = np.linalg.qr(rng.standard_normal((feature_dim, num_classes)))
        dirs = q.T
    else:
        dirs = rng.standard_normal((num_classes, feature_dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    means = dirs * separation / np.sqrt(2.0)
    y = np.repeat(np.arange(num_classes), samples_per_class)
    X = feature_scale * (means[y] + rng.standard_normal((y.size, feature_dim)))
    order = rng.permutation(y.size)
    X, y = X[order], y[order]
    n_test = max(1, int(round(test_fraction * y.size)))
    return Dataset(X[n_test:], y[n_test:], num_classes), Dataset(X[:n_test], y[:n_test], num_classes)


def _largest_remainder(n: int, p: np.ndarray) -> np.ndarray:
    raw = n * p
    counts = np.floor(raw).astype(np.int64)
    short = n - int(counts.sum())
    if short:
        counts[np.argsort(-(raw - counts), kind="stable")[:short]] += 1
    return counts


def dirichlet_partition(labels, K: int, beta: float, seed: int, max_attempts: int = 100) -> list[np.ndarray]:
    """Split sample indices across ``K`` clients with Dirichlet(beta) class mixes.

    Every client must end up non-empty; the draw is repeated up to
    ``max_attempts`` times before giving up.
    """
    y = np.asarray(labels.y if isinstance(labels, Dataset) else labels)
    if beta <= 0:
        raise ValueError("beta must be > 0")
    if K < 1:
        raise ValueError("K must be >= 1")
    if K == 1:
        return [np.arange(y.size)]
    rng = np.random.default_rng(seed)
    classes = np.unique(y)
    for _ in range(max_attempts):
        parts: list[list[np.ndarray]] = [[] for _ in range(K)]
        for k in classes:
            idx = rng.permutation(np.flatnonzero(y == k))
            counts = _largest_remainder(idx.size, rng.dirichlet(np.full(K, beta)))
            for c, chunk in enumerate(np.split(idx, np.cumsum(counts)[:-1])):
                parts[c].append(chunk)
        out = [np.sort(np.concatenate(p)) for p in parts]
        if all(p.size for p in out):
            return out
    raise PartitionFailure(f"could not give all {K} clients data in {max_attempts} draws (beta={beta})")


@dataclass(frozen=True)
class FlTask:
    model: object
    partitions: tuple[Dataset, ...]
    test: Dataset

    @property
    def num_clients(self) -> int:
        return len(self.partitions)


def build_task(
    train: Dataset, test: Dataset, K: int, beta: float, seed: int, arch: str = "softmax_regression"
) -> FlTask:
    parts = dirichlet_partition(train, K, beta, seed)
    model = make_model(arch, train.feature_dim, train.num_classes)
    return FlTask(model, tuple(train.subset(p) for p in parts), test)


def read_idx(path: str | Path, expected_magic: int | None = None) -> np.ndarray:
    """Read an IDX (MNIST) file of unsigned bytes; ``.gz`` is decompressed transparently."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"IDX file not found: {path}")
    raw = gzip.decompress(path.read_bytes()) if path.suffix == ".gz" else path.read_bytes()
    if len(raw) < 4:
        raise SchemaError(f"{path}: truncated header")
    (magic,) = struct.unpack(">I", raw[:4])
    if expected_magic is not None and magic != expected_magic:
        raise SchemaError(f"{path}: magic {magic:#010x}, expected {expected_magic:#010x}")
    if magic >> 8 != 0x08:
        raise SchemaError(f"{path}: only unsigned-byte IDX data is supported (magic {magic:#010x})")
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    body = np.frombuffer(raw, dtype=np.uint8, offset=header)
    if body.size != int(np.prod(dims)):
        raise SchemaError(f"{path}: expected {int(np.prod(dims))} values, found {body.size}")
    return body.reshape(dims)


def write_idx(array: np.ndarray, path: str | Path) -> None:
    array = np.asarray(array, dtype=np.uint8)
    header = struct.pack(">I", 0x0800 | array.ndim) + struct.pack(f">{array.ndim}I", *array.shape)
    Path(path).write_bytes(header + array.tobytes())


def load_mnist(images_path: str | Path, labels_path: str | Path, num_classes: int = 10) -> Dataset:
    images = read_idx(images_path, IDX_IMAGES_MAGIC)
    labels = read_idx(labels_path, IDX_LABELS_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise SchemaError("image and label counts differ")
    X = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    return Dataset(X, labels.astype(np.int64), num_classes)
