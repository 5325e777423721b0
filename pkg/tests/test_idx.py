import gzip
import struct
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from saccade.idx import (
    DataError,
    Dataset,
    IdxFormatError,
    IdxLengthError,
    binarize,
    load_mnist,
    parse_idx_images,
    parse_idx_labels,
    parse_pbm,
    select_training_subset,
    synthetic_digits,
    write_idx_images,
    write_idx_labels,
)

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "saccade" / "data"


def idx3(count, rows, cols, payload):
    return struct.pack(">IIII", 0x803, count, rows, cols) + bytes(payload)


class TestParseImages:
    def test_zero_count(self):
        out = parse_idx_images(idx3(0, 28, 28, b""))
        assert out.shape == (0, 28, 28)

    def test_payload_byte_for_byte(self):
        payload = np.arange(784) % 256
        out = parse_idx_images(idx3(1, 28, 28, payload.astype(np.uint8)))
        assert out.shape == (1, 28, 28)
        assert out[0, 0, 0] == 0
        # byte 255 sits at row 9, col 3 in row-major order
        assert out[0, 255 // 28, 255 % 28] == 255
        np.testing.assert_array_equal(out.reshape(-1), payload)

    def test_bad_magic(self):
        with pytest.raises(IdxFormatError):
            parse_idx_images(struct.pack(">IIII", 0x801, 0, 28, 28))

    @pytest.mark.parametrize("cut", [1, 100, 784])
    def test_truncated(self, cut):
        data = idx3(1, 28, 28, bytes(784))
        with pytest.raises(IdxLengthError):
            parse_idx_images(data[:-cut])

    def test_truncated_header(self):
        with pytest.raises(IdxLengthError):
            parse_idx_images(struct.pack(">II", 0x803, 1))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 4), st.integers(1, 6), st.integers(1, 6), st.randoms())
    def test_round_trip(self, count, rows, cols, rnd):
        payload = bytes(rnd.randrange(256) for _ in range(count * rows * cols))
        stream = idx3(count, rows, cols, payload)
        assert write_idx_images(parse_idx_images(stream)) == stream


class TestParseLabels:
    def test_small_file(self):
        stream = struct.pack(">II", 0x801, 3) + bytes([7, 2, 1])
        assert parse_idx_labels(stream).tolist() == [7, 2, 1]
        assert write_idx_labels([7, 2, 1]) == stream

    def test_zero_count(self):
        assert parse_idx_labels(struct.pack(">II", 0x801, 0)).tolist() == []

    def test_bad_magic(self):
        with pytest.raises(IdxFormatError):
            parse_idx_labels(struct.pack(">II", 0x803, 0))

    def test_truncated(self):
        with pytest.raises(IdxLengthError):
            parse_idx_labels(struct.pack(">II", 0x801, 3) + bytes([1, 2]))

    def test_label_out_of_range(self):
        with pytest.raises(DataError):
            parse_idx_labels(struct.pack(">II", 0x801, 2) + bytes([3, 10]))


class TestBinarize:
    def test_threshold_edges(self):
        assert binarize(np.array([128, 127, 255, 0])).tolist() == [1, 0, 1, 0]

    def test_all_zero(self):
        assert not binarize(np.zeros((28, 28), np.uint8)).any()

    def test_random_count(self, rng):
        img = rng.integers(0, 256, (28, 28)).astype(np.uint8)
        expected = sum(1 for v in img.reshape(-1).tolist() if v > 127)
        assert int(binarize(img).sum()) == expected

    def test_two_level_image(self, rng):
        img = rng.choice([0, 255], (28, 28)).astype(np.uint8)
        np.testing.assert_array_equal(binarize(img), img // 255)

    def test_custom_threshold(self):
        assert binarize(np.array([10, 11]), threshold=10).tolist() == [0, 1]


class TestTrainingSubset:
    def test_tiny_split(self):
        imgs = np.zeros((5, 28, 28), np.uint8)
        ds = select_training_subset(imgs, [0, 1, 0, 1, 0], per_class=0)
        assert len(ds) == 0

    def test_per_class_order(self):
        labels = np.array([0, 1, 0, 1, 0] + list(range(2, 10)) * 2)
        imgs = np.zeros((len(labels), 28, 28), np.uint8)
        ds = select_training_subset(imgs, labels, per_class=2)
        assert ds.source_index[:4].tolist() == [0, 2, 1, 3]
        assert ds.labels.tolist() == sorted([c for c in range(10)] * 2)
        assert len(ds) == 20

    def test_too_few(self):
        with pytest.raises(DataError):
            select_training_subset(np.zeros((3, 28, 28), np.uint8), [0, 1, 2], per_class=1)

    def test_grayscale_is_binarized(self):
        labels = np.arange(10)
        imgs = np.full((10, 28, 28), 200, np.uint8)
        ds = select_training_subset(imgs, labels, per_class=1)
        assert ds.images.max() == 1


def test_load_mnist_from_gz(tmp_path, rng):
    labels = np.repeat(np.arange(10), 3).astype(np.uint8)
    images = rng.integers(0, 256, (30, 28, 28)).astype(np.uint8)
    (tmp_path / "train-images-idx3-ubyte.gz").write_bytes(gzip.compress(write_idx_images(images)))
    (tmp_path / "train-labels-idx1-ubyte").write_bytes(write_idx_labels(labels))
    ds = load_mnist(tmp_path, "train", per_class=2)
    assert len(ds) == 20
    np.testing.assert_array_equal(ds.images[0], binarize(images[0]))


def test_dataset_rejects_mismatch():
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 28, 28), np.uint8), [1])


class TestSyntheticDigits:
    def test_labels_and_shape(self):
        ds = synthetic_digits()
        assert ds.labels.tolist() == list(range(10))
        assert ds.images.shape == (10, 28, 28)

    def test_pixel_counts(self):
        counts = synthetic_digits().images.reshape(10, -1).sum(axis=1)
        assert counts.tolist() == [156, 87, 141, 141, 111, 141, 159, 87, 174, 156]
        assert all(50 <= c <= 300 for c in counts)

    def test_deterministic(self):
        np.testing.assert_array_equal(synthetic_digits().images, synthetic_digits().images)

    def test_all_distinct(self):
        flat = {img.tobytes() for img in synthetic_digits().images}
        assert len(flat) == 10

    def test_drawing_script_reproduces_golden_files(self, tmp_path):
        import runpy

        script = runpy.run_path(str(Path(__file__).resolve().parents[1] / "scripts" / "draw_synthetic_digits.py"))
        script["main"](tmp_path)
        for d in range(10):
            assert (tmp_path / f"digit_{d}.pbm").read_text() == (DATA_DIR / f"digit_{d}.pbm").read_text()


def test_pbm_parse_packed_and_comments():
    text = "P1\n# comment\n3 2\n010\n1 1 1\n"
    assert parse_pbm(text).tolist() == [[0, 1, 0], [1, 1, 1]]
    with pytest.raises(IdxFormatError):
        parse_pbm("P4\n1 1\n0")


def test_full_size_split(rng):
    # same shape as the official training file; labels cycle so every class has 6,000
    labels = np.arange(60_000) % 10
    images = rng.integers(0, 256, (60_000, 28, 28), dtype=np.uint8)
    parsed = parse_idx_images(write_idx_images(images))
    assert parsed.shape == (60_000, 28, 28)
    ds = select_training_subset(parsed, parse_idx_labels(write_idx_labels(labels)), 100)
    assert np.bincount(ds.labels).tolist() == [100] * 10
    assert ds.source_index[:3].tolist() == [0, 10, 20]
