"""
Dataset ingestion: the IDX container used by the MNIST distribution files,
agent partitions (IID blocks and exclusive label pairs) and synthetic
Gaussian blobs for desk-scale softmax instances.
"""

import logging
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np

from scalardl.core import DimensionError, DomainError, as_generator
from scalardl.objectives import NUM_CLASSES, DatasetHandle

logger = logging.getLogger(__name__)

IDX_LABELS = 0x00000801
IDX_IMAGES = 0x00000803

# type code -> big-endian element dtype
IDX_TYPES = {
    0x08: np.dtype(">u1"),
    0x09: np.dtype(">i1"),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}
_TYPE_CODES = {dt: code for code, dt in IDX_TYPES.items()}

# agent id -> the two digit classes it holds
DIGIT_PAIRS: Dict[int, Tuple[int, int]] = {
    1: (2, 8),
    2: (4, 9),
    3: (1, 6),
    4: (3, 7),
    5: (0, 5),
}


class IdxError(ValueError):
    pass


class BadMagicError(IdxError):
    pass


class UnsupportedTypeError(IdxError):
    pass


class TruncatedError(IdxError):
    pass


class TrailingDataError(IdxError):
    pass


class PartitionError(ValueError):
    pass


class InsufficientSamplesError(PartitionError):
    def __init__(self, message: str, label: Optional[int] = None):
        super().__init__(message)
        self.label = label


@dataclass(frozen=True)
class IdxFile:
    magic: int
    dims: Tuple[int, ...]
    payload: bytes

    @property
    def type_code(self) -> int:
        return (self.magic >> 8) & 0xFF

    @property
    def ndim(self) -> int:
        return self.magic & 0xFF

    @property
    def dtype(self) -> np.dtype:
        return IDX_TYPES[self.type_code]

    def array(self) -> np.ndarray:
        return np.frombuffer(self.payload, dtype=self.dtype).reshape(self.dims)

    def header(self) -> Dict:
        return {
            "magic": f"0x{self.magic:08x}",
            "type": f"0x{self.type_code:02x}",
            "dtype": self.dtype.str,
            "dims": list(self.dims),
            "payload_bytes": len(self.payload),
        }

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "IdxFile":
        arr = np.asarray(arr)
        code = _TYPE_CODES.get(arr.dtype.newbyteorder(">"))
        if code is None:
            raise UnsupportedTypeError(f"no IDX element type for {arr.dtype}")
        magic = (code << 8) | arr.ndim
        return cls(magic, tuple(arr.shape), arr.astype(IDX_TYPES[code]).tobytes())


def parse_idx(data: bytes) -> IdxFile:
    if len(data) < 4:
        raise TruncatedError(f"IDX header needs 4 bytes, got {len(data)}")
    (magic,) = struct.unpack(">I", data[:4])
    if magic >> 16 != 0:
        raise BadMagicError(f"bad IDX magic 0x{magic:08x}")
    code, ndim = (magic >> 8) & 0xFF, magic & 0xFF
    if code not in IDX_TYPES:
        raise UnsupportedTypeError(f"unsupported IDX element type 0x{code:02x}")
    if ndim == 0:
        raise BadMagicError("IDX file declares zero dimensions")
    header_len = 4 + 4 * ndim
    if len(data) < header_len:
        raise TruncatedError(f"IDX header declares {ndim} dims but the file ends early")
    dims = struct.unpack(f">{ndim}I", data[4:header_len])
    expected = math.prod(dims) * IDX_TYPES[code].itemsize
    payload = data[header_len:]
    if len(payload) < expected:
        raise TruncatedError(f"IDX payload has {len(payload)} bytes, dims need {expected}")
    if len(payload) > expected:
        raise TrailingDataError(f"{len(payload) - expected} bytes after the IDX payload")
    return IdxFile(magic, tuple(dims), bytes(payload))


def serialize_idx(idx: IdxFile) -> bytes:
    return struct.pack(f">I{len(idx.dims)}I", idx.magic, *idx.dims) + idx.payload


def read_idx(path) -> IdxFile:
    return parse_idx(Path(path).read_bytes())


def load_mnist(images_path, labels_path, split: str = "train") -> DatasetHandle:
    """
    Pixels scaled to [0, 1], one bias feature (1.0) appended.
    """
    images = read_idx(images_path)
    labels = read_idx(labels_path)
    if images.magic != IDX_IMAGES or labels.magic != IDX_LABELS:
        raise BadMagicError(
            f"expected image/label magics 0x{IDX_IMAGES:08x}/0x{IDX_LABELS:08x}, "
            f"got 0x{images.magic:08x}/0x{labels.magic:08x}"
        )
    x = images.array().reshape(images.dims[0], -1).astype(np.float64) / 255.0
    y = labels.array().astype(np.int64)
    if x.shape[0] != y.shape[0]:
        raise DimensionError(f"{x.shape[0]} images but {y.shape[0]} labels")
    x = np.hstack([x, np.ones((x.shape[0], 1))])
    logger.info(f"loaded {Path(images_path).name}: {x.shape[0]} samples, {x.shape[1]} features")
    return DatasetHandle(x, y, NUM_CLASSES, split, Path(images_path).stem)


@dataclass(frozen=True)
class Partition:
    """
    Per-agent (1-based ids) disjoint train and validation index arrays.
    """

    train: Dict[int, np.ndarray]
    val: Dict[int, np.ndarray]
    scheme: Literal["iid", "label_pairs"]
    pairs: Optional[Dict[int, Tuple[int, int]]] = field(default=None, compare=False)

    def __post_init__(self):
        if set(self.train) != set(self.val):
            raise PartitionError("train and validation agents differ")
        seen = np.concatenate(list(self.train.values()) + list(self.val.values()))
        if np.unique(seen).shape[0] != seen.shape[0]:
            raise PartitionError("index lists overlap")

    @property
    def agents(self) -> List[int]:
        return sorted(self.train)

    @property
    def assignments(self) -> Dict[int, np.ndarray]:
        return {a: np.concatenate([self.train[a], self.val[a]]) for a in self.agents}

    def train_set(self, data: DatasetHandle, agent: int) -> DatasetHandle:
        return data.subset(self.train[agent], "train")

    def val_set(self, data: DatasetHandle, agent: int) -> DatasetHandle:
        return data.subset(self.val[agent], "val")


def _check_sizes(m_agents: int, train_per_agent: int, val_per_agent: int):
    if m_agents < 1:
        raise DomainError("need at least one agent")
    if train_per_agent < 1 or val_per_agent < 0:
        raise DomainError("train_per_agent must be >= 1 and val_per_agent >= 0")


def partition_iid(
    n: int, m_agents: int, train_per_agent: int, val_per_agent: int, rng
) -> Partition:
    _check_sizes(m_agents, train_per_agent, val_per_agent)
    block = train_per_agent + val_per_agent
    if m_agents * block > n:
        raise InsufficientSamplesError(
            f"{m_agents} agents x {block} samples needs {m_agents * block}, dataset has {n}"
        )
    perm = as_generator(rng).permutation(n)
    train, val = {}, {}
    for a in range(m_agents):
        chunk = perm[a * block : (a + 1) * block]
        train[a + 1] = np.sort(chunk[:train_per_agent])
        val[a + 1] = np.sort(chunk[train_per_agent:])
    return Partition(train, val, "iid")


def _halves(total: int) -> Tuple[int, int]:
    return total // 2, total - total // 2


def partition_label_pairs(
    labels: Sequence[int],
    mapping: Mapping[int, Tuple[int, int]],
    train_per_agent: int,
    val_per_agent: int,
    rng,
) -> Partition:
    """
    Each agent draws half of its samples from each of its two labels.
    """
    _check_sizes(len(mapping), train_per_agent, val_per_agent)
    flat = [label for pair in mapping.values() for label in pair]
    if any(len(pair) != 2 for pair in mapping.values()):
        raise PartitionError("every agent needs exactly two labels")
    if len(set(flat)) != len(flat):
        raise PartitionError(f"label pairs overlap: {dict(mapping)}")
    labels = np.asarray(labels)
    gen = as_generator(rng)
    train_split, val_split = _halves(train_per_agent), _halves(val_per_agent)
    train, val = {}, {}
    for agent in sorted(mapping):
        t_parts, v_parts = [], []
        for pos, label in enumerate(mapping[agent]):
            pool = np.flatnonzero(labels == label)
            need = train_split[pos] + val_split[pos]
            if pool.shape[0] < need:
                raise InsufficientSamplesError(
                    f"label {label} has {pool.shape[0]} samples, agent {agent} needs {need}",
                    label,
                )
            picked = gen.choice(pool, size=need, replace=False)
            t_parts.append(picked[: train_split[pos]])
            v_parts.append(picked[train_split[pos] :])
        train[agent] = np.sort(np.concatenate(t_parts))
        val[agent] = np.sort(np.concatenate(v_parts))
    return Partition(train, val, "label_pairs", {a: tuple(p) for a, p in mapping.items()})


@dataclass(frozen=True)
class SyntheticData:
    agents: List[DatasetHandle]
    test: DatasetHandle


def synth_blobs(
    m_agents: int,
    d: int,
    separation: float,
    n_per_agent: int,
    rng,
    n_classes: int = 3,
    n_test_per_agent: int = 200,
    spread: float = 2.0,
) -> SyntheticData:
    """
    Class c of agent a is N(μ_c + separation·ν_{a,c}, I) in R^d, with shared
    class means μ_c and per-agent offsets ν_{a,c} ~ N(0, I). A bias column is
    appended. separation = 0 gives statistically identical agents.
    """
    if m_agents < 1 or d < 1 or n_classes < 2:
        raise DomainError("need m_agents >= 1, d >= 1 and at least two classes")
    if separation < 0:
        raise DomainError("separation must be >= 0")
    if n_per_agent < 1 or n_test_per_agent < 1:
        raise DomainError("n_per_agent must be >= 1")
    gen = as_generator(rng)
    means = spread * gen.standard_normal((n_classes, d))
    offsets = gen.standard_normal((m_agents, n_classes, d))

    def draw(a: int, n: int):
        y = gen.integers(0, n_classes, size=n)
        x = means[y] + separation * offsets[a, y] + gen.standard_normal((n, d))
        return np.hstack([x, np.ones((n, 1))]), y

    agents, test_x, test_y = [], [], []
    for a in range(m_agents):
        x, y = draw(a, n_per_agent)
        agents.append(DatasetHandle(x, y, n_classes, "train", f"blobs_agent{a + 1}"))
        tx, ty = draw(a, n_test_per_agent)
        test_x.append(tx)
        test_y.append(ty)
    test = DatasetHandle(np.vstack(test_x), np.concatenate(test_y), n_classes, "test", "blobs")
    return SyntheticData(agents, test)
