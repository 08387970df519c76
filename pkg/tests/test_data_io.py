"""Netpbm round-trips, header validation, and toy dataset properties."""

import json
import os

import numpy as np
import pytest

from deidgan.data import ToyFaceSpec, generate_toy_faces, load_image_set, split_holdout, write_dataset
from deidgan.errors import ContractViolation, ImageFormatError
from deidgan.netpbm import read_image, write_image


# -- pixel mapping ------------------------------------------------------------


def test_read_endpoint_mapping(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n3 1\n255\n" + bytes([0, 128, 255]))
    img = read_image(p)
    assert img[0, 0] == pytest.approx(-1.0)
    assert img[0, 1] == pytest.approx(2 * 128 / 255 - 1)  # 0.00392...
    assert img[0, 2] == pytest.approx(1.0)


def test_write_read_roundtrip_bytes(tmp_path):
    rng = np.random.default_rng(0)
    src = tmp_path / "a.ppm"
    body = rng.integers(0, 256, size=4 * 5 * 3, dtype=np.uint8).tobytes()
    src.write_bytes(b"P6\n5 4\n255\n" + body)
    img = read_image(src)
    dst = tmp_path / "b.ppm"
    write_image(dst, img)
    assert dst.read_bytes() == src.read_bytes()


def test_pgm_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    src = tmp_path / "a.pgm"
    src.write_bytes(b"P5\n7 3\n255\n" + rng.integers(0, 256, 21, dtype=np.uint8).tobytes())
    img = read_image(src)
    assert img.shape == (3, 7)
    dst = tmp_path / "b.pgm"
    write_image(dst, img)
    assert dst.read_bytes() == src.read_bytes()


def test_header_with_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# a comment\n2 2 # trailing\n255\n" + bytes(4))
    assert read_image(p).shape == (2, 2)


# -- malformed inputs -----------------------------------------------------------


def test_bad_magic_offset_zero(tmp_path):
    p = tmp_path / "bad.ppm"
    p.write_bytes(b"P3\n1 1\n255\n0 0 0")
    with pytest.raises(ImageFormatError) as ei:
        read_image(p)
    assert ei.value.offset == 0


def test_bad_maxval_positioned(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
    with pytest.raises(ImageFormatError) as ei:
        read_image(p)
    assert ei.value.offset == 7
    assert "65535" in str(ei.value)


def test_missing_dimension(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P5\nxx\n255\n")
    with pytest.raises(ImageFormatError, match="width"):
        read_image(p)


def test_truncated_payload_positioned(tmp_path):
    p = tmp_path / "bad.ppm"
    p.write_bytes(b"P6\n2 2\n255\n" + bytes(5))  # needs 12
    with pytest.raises(ImageFormatError, match="truncated") as ei:
        read_image(p)
    assert ei.value.offset == len(b"P6\n2 2\n255\n") + 5


# -- toy dataset -------------------------------------------------------------------


def test_toygen_counts(tmp_path):
    spec = ToyFaceSpec(identities=12, per_identity=8, seed=7)
    images = write_dataset(spec, str(tmp_path / "d"))
    assert len(images) == 96
    files = [f for f in os.listdir(tmp_path / "d") if f.endswith(".ppm")]
    assert len(files) == 96


def test_toygen_deterministic(tmp_path):
    spec = ToyFaceSpec(identities=3, per_identity=4, seed=42)
    write_dataset(spec, str(tmp_path / "a"))
    write_dataset(spec, str(tmp_path / "b"))
    for name in sorted(os.listdir(tmp_path / "a")):
        a = (tmp_path / "a" / name).read_bytes()
        b = (tmp_path / "b" / name).read_bytes()
        assert a == b, name


def test_toygen_intra_vs_inter_identity_distance():
    spec = ToyFaceSpec(identities=12, per_identity=8, seed=0)
    images = generate_toy_faces(spec)
    by_id: dict[int, list[np.ndarray]] = {}
    for img in images:
        by_id.setdefault(img.identity, []).append(img.pixels.reshape(-1))
    intra, inter = [], []
    ids = sorted(by_id)
    for i in ids:
        group = by_id[i]
        for a in range(len(group)):
            for b in range(a + 1, len(group)):
                intra.append(np.linalg.norm(group[a] - group[b]))
    for i in ids:
        for j in ids:
            if i < j:
                inter.append(np.linalg.norm(by_id[i][0] - by_id[j][0]))
    assert np.mean(intra) < np.mean(inter)


def test_toygen_rejects_degenerate_spec():
    with pytest.raises(ContractViolation):
        generate_toy_faces(ToyFaceSpec(identities=1, per_identity=8))


def test_labels_roundtrip_through_loader(tmp_path):
    spec = ToyFaceSpec(identities=4, per_identity=4, seed=3)
    originals = write_dataset(spec, str(tmp_path / "d"))
    loaded = load_image_set(str(tmp_path / "d"))
    assert len(loaded) == len(originals)
    for a, b in zip(originals, loaded.images):
        assert (a.identity, a.expression, a.hair, a.file) == (
            b.identity,
            b.expression,
            b.hair,
            b.file,
        )
        # loader sees the PPM-quantized pixels
        assert np.max(np.abs(a.pixels - b.pixels)) <= 1.0 / 255.0
    assert loaded.attribute_cardinalities() == (4, 3)


def test_split_holdout_keeps_identities():
    spec = ToyFaceSpec(identities=12, per_identity=8, seed=0)
    from deidgan.data import ImageSet

    iset = ImageSet(generate_toy_faces(spec))
    train, hold = split_holdout(iset, 16, seed=5)
    assert len(hold) == 16
    assert len(train) == 80
    assert train.n_identities == 12
    per_id = {}
    for img in hold:
        per_id[img.identity] = per_id.get(img.identity, 0) + 1
    assert max(per_id.values()) <= 2
