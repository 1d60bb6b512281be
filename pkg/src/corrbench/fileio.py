"""Raster file I/O: 8-bit RGB images, 16-bit depth PNGs, and PFM floats.

Depth PNG convention: depth_m = stored_uint16 / scale_divisor, with zero
marking invalid pixels (the scale divisor is always declared by the caller,
never inferred). PFM is little-endian float32, single channel, bottom-up
rows. PFM round-trips are bit-exact; png16 round-trips are exact for depths
that are multiples of 1/scale within the uint16 range.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .depthmetrics import DepthMap
from .errors import InvalidParameterError, ShapeError
from .imagecore import ImageBuffer, fnv1a_64


def load_image(path: str | Path) -> ImageBuffer:
    """Load an 8-bit RGB PNG/JPEG as a float image in [0, 1]."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return ImageBuffer.from_uint8(arr)


def save_image(path: str | Path, img: ImageBuffer) -> None:
    """Write a float image as an 8-bit RGB PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(img.to_uint8(), "RGB").save(path, format="PNG")


def image_content_hash(img: ImageBuffer) -> int:
    """64-bit FNV-1a over the raw 8-bit pixel bytes (drift detection, not crypto)."""
    return fnv1a_64(img.to_uint8().tobytes())


def save_depth_png16(path: str | Path, depth: DepthMap, scale_divisor: float) -> None:
    if scale_divisor <= 0:
        raise InvalidParameterError("scale_divisor must be positive")
    raw = np.rint(depth.values * scale_divisor)
    raw = np.where(depth.valid, np.clip(raw, 1, 65535), 0).astype(np.uint16)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(raw).save(path, format="PNG")


def load_depth_png16(path: str | Path, scale_divisor: float) -> DepthMap:
    if scale_divisor <= 0:
        raise InvalidParameterError("scale_divisor must be positive")
    with Image.open(path) as im:
        raw = np.asarray(im, dtype=np.uint32)
    if raw.ndim != 2:
        raise ShapeError(f"expected single-channel 16-bit PNG, got shape {raw.shape}")
    valid = raw > 0
    values = raw.astype(np.float64) / scale_divisor
    values[~valid] = 1.0  # placeholder; masked out
    return DepthMap(values=values, valid=valid)


def save_pfm(path: str | Path, depth: DepthMap) -> None:
    """Little-endian single-channel PFM; invalid pixels are stored as 0."""
    vals = np.where(depth.valid, depth.values, 0.0).astype("<f4")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{vals.shape[1]} {vals.shape[0]}\n".encode("ascii"))
        fh.write(b"-1.0\n")
        fh.write(vals[::-1].tobytes())  # bottom-up row order


def load_pfm(path: str | Path) -> DepthMap:
    with open(path, "rb") as fh:
        header = fh.readline().strip()
        if header != b"Pf":
            raise InvalidParameterError(
                f"unsupported PFM header {header!r} (only single-channel 'Pf')")
        dims = fh.readline().split()
        width, height = int(dims[0]), int(dims[1])
        scale = float(fh.readline().strip())
        count = width * height
        payload = fh.read(4 * count)
        if len(payload) != 4 * count:
            raise InvalidParameterError(f"truncated PFM payload in {path}")
        dtype = "<f4" if scale < 0 else ">f4"
        vals = np.frombuffer(payload, dtype=dtype).reshape(height, width)[::-1]
    vals = vals.astype(np.float64)
    valid = vals > 0
    vals = np.where(valid, vals, 1.0)
    return DepthMap(values=vals, valid=valid)


def load_depth(path: str | Path, fmt: str, scale_divisor: float = 256.0) -> DepthMap:
    if fmt == "png16":
        return load_depth_png16(path, scale_divisor)
    if fmt == "pfm":
        return load_pfm(path)
    raise InvalidParameterError(f"unknown depth format {fmt!r}")
