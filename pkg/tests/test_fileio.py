"""Raster codecs: round-trip exactness guarantees."""

import numpy as np
import pytest

from corrbench import fileio
from corrbench.depthmetrics import DepthMap
from corrbench.errors import InvalidParameterError
from corrbench.imagecore import ImageBuffer


class TestImagePng:
    def test_uint8_roundtrip_exact(self, tmp_path):
        raw = np.random.default_rng(0).integers(0, 256, (24, 32, 3)).astype(np.uint8)
        img = ImageBuffer.from_uint8(raw)
        p = tmp_path / "img.png"
        fileio.save_image(p, img)
        back = fileio.load_image(p)
        assert np.array_equal(back.to_uint8(), raw)
        assert np.array_equal(back.data, img.data)

    def test_content_hash_tracks_pixels(self):
        a = ImageBuffer(np.full((8, 8, 3), 0.25))
        b = ImageBuffer(np.full((8, 8, 3), 0.25))
        assert fileio.image_content_hash(a) == fileio.image_content_hash(b)
        c = a.copy()
        c.data[0, 0, 0] = 0.3
        assert fileio.image_content_hash(ImageBuffer(c.data)) != fileio.image_content_hash(a)


class TestDepthPng16:
    def test_roundtrip_exact_for_quantized_depths(self, tmp_path):
        # depths that are multiples of 1/256 within the uint16 range
        rng = np.random.default_rng(1)
        raw = rng.integers(1, 256 * 80, (16, 16)).astype(np.float64)
        depth = DepthMap(raw / 256.0)
        p = tmp_path / "d.png"
        fileio.save_depth_png16(p, depth, scale_divisor=256.0)
        back = fileio.load_depth_png16(p, scale_divisor=256.0)
        assert np.array_equal(back.values, depth.values)
        assert back.valid.all()

    def test_zero_marks_invalid(self, tmp_path):
        vals = np.full((8, 8), 10.0)
        valid = np.ones((8, 8), dtype=bool)
        valid[2, 3] = False
        p = tmp_path / "sparse.png"
        fileio.save_depth_png16(p, DepthMap(vals, valid), 256.0)
        back = fileio.load_depth_png16(p, 256.0)
        assert not back.valid[2, 3]
        assert back.valid.sum() == 63

    def test_indoor_divisor(self, tmp_path):
        vals = np.arange(1, 65, dtype=np.float64).reshape(8, 8) / 1000.0 * 7 + 0.5
        vals = np.rint(vals * 1000.0) / 1000.0
        p = tmp_path / "nyu.png"
        fileio.save_depth_png16(p, DepthMap(vals), 1000.0)
        back = fileio.load_depth_png16(p, 1000.0)
        assert np.allclose(back.values, vals, atol=1e-12)

    def test_bad_divisor(self, tmp_path):
        with pytest.raises(InvalidParameterError):
            fileio.save_depth_png16(tmp_path / "x.png", DepthMap(np.full((4, 4), 1.0)), 0.0)


class TestPfm:
    def test_roundtrip_bit_exact(self, tmp_path):
        vals = np.random.default_rng(2).uniform(0.1, 90.0, (12, 20)).astype(np.float32)
        depth = DepthMap(vals.astype(np.float64))
        p = tmp_path / "pred.pfm"
        fileio.save_pfm(p, depth)
        back = fileio.load_pfm(p)
        assert np.array_equal(back.values.astype(np.float32), vals)

    def test_row_order_is_bottom_up(self, tmp_path):
        vals = np.outer(np.arange(1, 5, dtype=np.float64), np.ones(4))
        p = tmp_path / "rows.pfm"
        fileio.save_pfm(p, DepthMap(vals))
        payload = p.read_bytes()
        # header: Pf, dims, scale; first stored row is the image's bottom row
        body = payload.split(b"\n", 3)[3]
        first_row = np.frombuffer(body[:16], dtype="<f4")
        assert np.allclose(first_row, 4.0)

    def test_rejects_color_pfm(self, tmp_path):
        p = tmp_path / "bad.pfm"
        p.write_bytes(b"PF\n2 2\n-1.0\n" + b"\x00" * 48)
        with pytest.raises(InvalidParameterError):
            fileio.load_pfm(p)

    def test_load_depth_dispatch(self, tmp_path):
        vals = np.full((8, 8), 2.5)
        fileio.save_pfm(tmp_path / "a.pfm", DepthMap(vals))
        d = fileio.load_depth(tmp_path / "a.pfm", "pfm")
        assert np.allclose(d.values, 2.5)
        with pytest.raises(InvalidParameterError):
            fileio.load_depth(tmp_path / "a.pfm", "exr")
