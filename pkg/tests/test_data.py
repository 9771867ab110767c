import numpy as np
import pytest
from numpy.testing import assert_array_equal

from scalardl import theory
from scalardl.core import DomainError, RngStream
from scalardl.data import (
    IDX_IMAGES,
    IDX_LABELS,
    DIGIT_PAIRS,
    BadMagicError,
    IdxFile,
    InsufficientSamplesError,
    PartitionError,
    TrailingDataError,
    TruncatedError,
    UnsupportedTypeError,
    load_mnist,
    parse_idx,
    partition_iid,
    partition_label_pairs,
    read_idx,
    serialize_idx,
    synth_blobs,
)
from scalardl.objectives import ScaledSqNorm, SoftmaxCE
from scalardl.scalarization import CompositeObjective


def test_label_file(label_bytes):
    idx = parse_idx(label_bytes)
    assert idx.magic == IDX_LABELS
    assert idx.dims == (3,)
    assert_array_equal(idx.array(), [7, 2, 9])
    assert serialize_idx(idx) == label_bytes


def test_image_file(image_bytes):
    idx = parse_idx(image_bytes)
    assert idx.magic == IDX_IMAGES
    assert idx.dims == (2, 28, 28)
    assert idx.array().shape == (2, 28, 28)
    assert idx.array()[0, 0, 5] == 5
    assert serialize_idx(idx) == image_bytes
    assert idx.header()["dims"] == [2, 28, 28]


def test_short_input_is_truncated():
    with pytest.raises(TruncatedError):
        parse_idx(bytes([0, 0, 8]))


def test_truncated_header_and_payload(label_bytes, image_bytes):
    with pytest.raises(TruncatedError):
        parse_idx(image_bytes[:10])
    with pytest.raises(TruncatedError):
        parse_idx(label_bytes[:-1])


def test_oversized_dims_are_truncated_not_wrapped():
    # 2³¹ · 2³¹ · 2³¹ bytes would wrap to zero in 64-bit arithmetic
    header = bytes([0, 0, 0x08, 0x03]) + (2**31).to_bytes(4, "big") * 3
    with pytest.raises(TruncatedError):
        parse_idx(header)
    with pytest.raises(TruncatedError):
        parse_idx(header + bytes(16))


def test_trailing_bytes(label_bytes):
    with pytest.raises(TrailingDataError):
        parse_idx(label_bytes + b"\x00")


def test_wrong_magic(label_bytes):
    with pytest.raises(BadMagicError):
        parse_idx(bytes([0x01]) + label_bytes[1:])
    with pytest.raises(BadMagicError):
        parse_idx(bytes([0, 0, 8, 0]))


def test_unsupported_type(label_bytes):
    with pytest.raises(UnsupportedTypeError):
        parse_idx(bytes([0, 0, 0x0A, 1]) + label_bytes[4:])


def test_wider_element_types():
    for arr in (
        np.array([[1, -2], [3, 4]], dtype=np.int16),
        np.array([1.5, -2.25], dtype=np.float64),
        np.array([7], dtype=np.int32),
    ):
        idx = parse_idx(serialize_idx(IdxFile.from_array(arr)))
        assert_array_equal(idx.array(), arr)


def test_read_idx(tmp_path, label_bytes):
    path = tmp_path / "labels-idx1-ubyte"
    path.write_bytes(label_bytes)
    assert read_idx(path).dims == (3,)
    with pytest.raises(FileNotFoundError):
        read_idx(tmp_path / "missing")


def test_load_mnist(tmp_path):
    images = (np.arange(3 * 28 * 28) % 256).astype(np.uint8).reshape(3, 28, 28)
    (tmp_path / "img").write_bytes(serialize_idx(IdxFile.from_array(images)))
    (tmp_path / "lbl").write_bytes(serialize_idx(IdxFile.from_array(np.array([1, 0, 9], np.uint8))))
    ds = load_mnist(tmp_path / "img", tmp_path / "lbl")
    assert (ds.n, ds.p) == (3, 785)
    assert ds.features.max() <= 1.0
    assert_array_equal(ds.features[:, -1], 1.0)
    assert_array_equal(ds.labels, [1, 0, 9])
    with pytest.raises(BadMagicError):
        load_mnist(tmp_path / "lbl", tmp_path / "img")


def check_disjoint(part):
    seen = np.concatenate([np.concatenate([part.train[a], part.val[a]]) for a in part.agents])
    assert np.unique(seen).shape == seen.shape


def test_partition_iid_protocol_sizes():
    part = partition_iid(50000, 5, 8000, 2000, RngStream(0))
    assert part.agents == [1, 2, 3, 4, 5]
    assert all(part.train[a].shape == (8000,) for a in part.agents)
    assert all(part.val[a].shape == (2000,) for a in part.agents)
    assert all(part.assignments[a].shape == (10000,) for a in part.agents)
    check_disjoint(part)
    assert max(x.max() for x in part.assignments.values()) < 50000


def test_partition_iid_single_agent_and_determinism():
    one = partition_iid(100, 1, 30, 10, RngStream(1))
    assert one.assignments[1].shape == (40,)
    a = partition_iid(1000, 4, 100, 20, RngStream(9))
    b = partition_iid(1000, 4, 100, 20, RngStream(9))
    assert all(np.array_equal(a.train[k], b.train[k]) for k in a.agents)


def test_partition_iid_insufficient():
    with pytest.raises(InsufficientSamplesError):
        partition_iid(100, 5, 20, 1, RngStream(0))
    with pytest.raises(DomainError):
        partition_iid(100, 0, 20, 1, RngStream(0))


@pytest.mark.parametrize("seed", range(5))
def test_label_pairs_purity(seed):
    gen = np.random.default_rng(seed)
    labels = gen.integers(0, 10, size=20000)
    part = partition_label_pairs(labels, DIGIT_PAIRS, 1000, 200, RngStream(seed))
    check_disjoint(part)
    for agent, pair in DIGIT_PAIRS.items():
        assert part.train[agent].shape == (1000,)
        assert part.val[agent].shape == (200,)
        assert set(labels[part.assignments[agent]]) == set(pair)


def test_label_pairs_rejects_overlap():
    with pytest.raises(PartitionError):
        partition_label_pairs(np.arange(10), {1: (0, 1), 2: (1, 2)}, 1, 0, RngStream(0))


def test_label_pairs_names_deficient_label():
    labels = np.random.default_rng(0).integers(0, 10, size=1000)
    with pytest.raises(InsufficientSamplesError) as info:
        partition_label_pairs(labels, {1: (0, 1)}, 1_000_000, 0, RngStream(0))
    assert info.value.label == 0
    assert "label 0" in str(info.value)


def blob_zeta(separation, n):
    blobs = synth_blobs(2, 2, separation, n, RngStream(0))
    agents = [SoftmaxCE(ds) for ds in blobs.agents]
    comp = CompositeObjective(agents, [ScaledSqNorm(0.5, agents[0].dim)], 0.0)
    return theory.compute_zeta(comp, np.zeros((1, agents[0].dim)))


def test_identical_blobs_have_small_heterogeneity():
    assert blob_zeta(0.0, 10_000) <= 0.1


def test_separated_blobs_are_heterogeneous():
    assert blob_zeta(10.0, 2_000) > 1.0


def test_blobs_shapes_and_checks():
    blobs = synth_blobs(3, 4, 1.0, 50, RngStream(0), n_classes=5, n_test_per_agent=10)
    assert len(blobs.agents) == 3
    assert blobs.agents[0].p == 5
    assert blobs.test.n == 30
    assert blobs.test.split == "test"
    with pytest.raises(DomainError):
        synth_blobs(2, 2, 1.0, 0, RngStream(0))
    with pytest.raises(DomainError):
        synth_blobs(2, 2, -1.0, 10, RngStream(0))
