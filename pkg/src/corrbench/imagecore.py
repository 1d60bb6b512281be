"""Pixel-level primitives underlying the corruption kernels.

Everything in this module is pure: outputs depend only on the arguments, and
the only randomness comes from an explicitly passed :class:`DeterministicRng`.
Images are float64 rasters in [0, 1], shaped (height, width, 3) in row-major
interleaved-RGB order. Kernels clamp back into [0, 1] as an explicit final
step, never implicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal

from .errors import InvalidKernelError, InvalidParameterError

MIN_DIM = 8

_U64 = np.uint64
_GAMMA = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

# Poisson sampling switches from exact inverse-transform to a normal
# approximation (with continuity correction) above this mean.
POISSON_NORMAL_CUTOFF = 10.0


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass
class ImageBuffer:
    """Float RGB raster in [0, 1]; the substrate of all corruption kernels."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise InvalidParameterError(
                f"image data must have shape (h, w, 3), got {arr.shape}")
        h, w = arr.shape[:2]
        if h < 1 or w < 1:
            raise InvalidParameterError(f"image must be non-empty, got {w}x{h}")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise InvalidParameterError("image samples must lie in [0, 1]")
        self.data = arr

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return 3

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ImageBuffer":
        return cls(np.asarray(arr, dtype=np.float64))

    @classmethod
    def from_uint8(cls, arr: np.ndarray) -> "ImageBuffer":
        """8-bit I/O convention: float = value / 255."""
        return cls(np.asarray(arr, dtype=np.float64) / 255.0)

    def to_uint8(self) -> np.ndarray:
        """8-bit I/O convention: value = round(float * 255)."""
        return np.rint(self.data * 255.0).astype(np.uint8)

    def copy(self) -> "ImageBuffer":
        return ImageBuffer(self.data.copy())


@dataclass
class Kernel2D:
    """Square convolution kernel with odd side length."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InvalidKernelError(f"kernel must be square, got {w.shape}")
        if w.shape[0] % 2 == 0:
            raise InvalidKernelError(f"kernel size must be odd, got {w.shape[0]}")
        self.weights = w

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def is_normalized(self) -> bool:
        return abs(float(self.weights.sum()) - 1.0) < 1e-6

    @classmethod
    def normalized(cls, weights: np.ndarray) -> "Kernel2D":
        w = np.asarray(weights, dtype=np.float64)
        total = float(w.sum())
        if total <= 0:
            raise InvalidKernelError("kernel weights must have positive sum")
        return cls(w / total)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U64(30))) * _MIX1
    z = (z ^ (z >> _U64(27))) * _MIX2
    return z ^ (z >> _U64(31))


class DeterministicRng:
    """Counter-based SplitMix64 stream.

    The k-th raw draw is ``mix64(seed + k * gamma)``, so a stream is fully
    determined by its 64-bit seed and how many values have been consumed;
    identical seeds yield identical streams on every platform. Gaussians come
    from Box-Muller on 53-bit uniforms, Poisson draws from inverse-transform
    sampling below a mean of 10 and a continuity-corrected normal
    approximation above it.
    """

    def __init__(self, seed: int):
        self._seed = _U64(int(seed) & _MASK64)
        self._counter = 0

    @property
    def state(self) -> tuple[int, int]:
        """Seed plus consumed-draw counter (diagnostic)."""
        return int(self._seed), self._counter

    def _raw(self, n: int) -> np.ndarray:
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        with np.errstate(over="ignore"):
            return _mix64(self._seed + idx * _GAMMA)

    def next_u64(self) -> int:
        return int(self._raw(1)[0])

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles in [0, 1) with 53 random bits each."""
        return (self._raw(n) >> _U64(11)).astype(np.float64) * 2.0 ** -53

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        return low + (high - low) * float(self.uniforms(1)[0])

    def gaussians(self, n: int) -> np.ndarray:
        """n standard normal draws via Box-Muller."""
        m = (n + 1) // 2
        raw = self._raw(2 * m)
        u1 = ((raw[:m] >> _U64(11)).astype(np.float64) + 1.0) * 2.0 ** -53  # (0, 1]
        u2 = (raw[m:] >> _U64(11)).astype(np.float64) * 2.0 ** -53          # [0, 1)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * m, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def integers(self, low: int, high: int, n: int) -> np.ndarray:
        """n integers uniform on the inclusive range [low, high]."""
        if high < low:
            raise InvalidParameterError("integers: high < low")
        span = high - low + 1
        vals = low + np.floor(self.uniforms(n) * span).astype(np.int64)
        return np.minimum(vals, high)

    def poisson(self, means: np.ndarray) -> np.ndarray:
        """Elementwise Poisson draws for an array of non-negative means.

        Consumes one uniform and one gaussian per element regardless of the
        regime each element falls in, so stream positions are independent of
        the data values.
        """
        means = np.asarray(means, dtype=np.float64)
        flat = means.reshape(-1)
        if flat.size == 0:
            return np.zeros_like(means)
        if np.any(flat < 0):
            raise InvalidParameterError("poisson means must be non-negative")
        u = self.uniforms(flat.size)
        g = self.gaussians(flat.size)
        out = np.zeros(flat.size, dtype=np.float64)

        small = flat < POISSON_NORMAL_CUTOFF
        if np.any(small):
            m = flat[small]
            us = u[small]
            k = np.zeros(m.size, dtype=np.float64)
            p = np.exp(-m)
            cdf = p.copy()
            pending = us >= cdf
            # mean < 10 makes tail mass beyond ~60 negligible; 200 is a hard cap
            for _ in range(200):
                if not np.any(pending):
                    break
                k[pending] += 1.0
                p[pending] *= m[pending] / k[pending]
                cdf[pending] += p[pending]
                pending = us >= cdf
            out[small] = k
        big = ~small
        if np.any(big):
            m = flat[big]
            draw = np.floor(m + np.sqrt(m) * g[big] + 0.5)
            out[big] = np.maximum(draw, 0.0)
        return out.reshape(means.shape)


def fnv1a_64(data: bytes, h: int = _FNV_OFFSET) -> int:
    """64-bit FNV-1a over a byte string."""
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def derive_seed(seed_root: int, relative_path: str, kind, severity: int) -> int:
    """Derive the per-image stream seed for one (path, kind, severity) task.

    FNV-1a 64 over seed_root (8 bytes little-endian) || path bytes || kind id
    byte || severity byte, then one SplitMix64 finalization step. Stable
    across platforms and releases; golden values are frozen in the tests.
    """
    payload = (
        int(seed_root & _MASK64).to_bytes(8, "little")
        + relative_path.encode("utf-8")
        + bytes([int(kind) & 0xFF, int(severity) & 0xFF])
    )
    h = fnv1a_64(payload)
    with np.errstate(over="ignore"):
        return int(_mix64(_U64(h) + _GAMMA))


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def _check_image(img: ImageBuffer) -> np.ndarray:
    if not isinstance(img, ImageBuffer):
        raise InvalidParameterError("expected an ImageBuffer")
    return img.data


def require_min_size(img: ImageBuffer) -> None:
    """Enforce the kernel-applicability floor (fractal/blur kernels need >= 8x8)."""
    if img.height < MIN_DIM or img.width < MIN_DIM:
        raise InvalidParameterError(
            f"image must be at least {MIN_DIM}x{MIN_DIM} for kernel operations, "
            f"got {img.width}x{img.height}")


def convolve(img: ImageBuffer, kernel: Kernel2D) -> ImageBuffer:
    """2-D convolution with reflect padding, output clamped to [0, 1].

    Reflect padding mirrors the interior without duplicating the edge row
    (`d c b | a b c d`), which avoids border darkening.
    """
    data = _check_image(img)
    k = kernel.weights
    if kernel.size > 2 * min(img.width, img.height):
        raise InvalidKernelError(
            f"kernel size {kernel.size} exceeds 2x the smaller image side "
            f"({min(img.width, img.height)})")
    pad = kernel.size // 2
    if pad == 0:
        out = data * float(k[0, 0])
        return ImageBuffer(np.clip(out, 0.0, 1.0))
    padded = np.pad(data, ((pad, pad), (pad, pad), (0, 0)), mode="reflect")
    out = np.empty_like(data)
    for c in range(3):
        out[:, :, c] = signal.fftconvolve(padded[:, :, c], k, mode="valid")
    return ImageBuffer(np.clip(out, 0.0, 1.0))


def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps with radius ceil(3*sigma)."""
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return taps / taps.sum()


def gaussian_blur(img: ImageBuffer, sigma: float) -> ImageBuffer:
    """Separable Gaussian blur; sigma = 0 is the identity."""
    data = _check_image(img)
    if sigma < 0:
        raise InvalidParameterError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img.copy()
    taps = gaussian_kernel_1d(sigma)
    out = np.empty_like(data)
    for c in range(3):
        tmp = ndimage.correlate1d(data[:, :, c], taps, axis=0, mode="mirror")
        out[:, :, c] = ndimage.correlate1d(tmp, taps, axis=1, mode="mirror")
    return ImageBuffer(np.clip(out, 0.0, 1.0))


def blur_plane(plane: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian blur of a single 2-D plane (no clamping)."""
    if sigma <= 0:
        return plane.copy()
    taps = gaussian_kernel_1d(sigma)
    tmp = ndimage.correlate1d(plane.astype(np.float64), taps, axis=0, mode="mirror")
    return ndimage.correlate1d(tmp, taps, axis=1, mode="mirror")


def _source_coords(n_out: int, n_in: int) -> np.ndarray:
    # pixel-center alignment: sample at (i + 0.5) * scale - 0.5
    scale = n_in / n_out
    return (np.arange(n_out, dtype=np.float64) + 0.5) * scale - 0.5


def resize(img_or_plane, width: int, height: int, mode: str = "bilinear"):
    """Deterministic resize with pixel-center alignment.

    Accepts an ImageBuffer (returns an ImageBuffer) or a bare 2-D plane
    (returns a plane). Modes: "nearest", "bilinear".
    """
    if width < 1 or height < 1:
        raise InvalidParameterError(f"resize target must be >= 1, got {width}x{height}")
    if mode not in ("nearest", "bilinear"):
        raise InvalidParameterError(f"unknown resize mode {mode!r}")

    is_buffer = isinstance(img_or_plane, ImageBuffer)
    data = img_or_plane.data if is_buffer else np.asarray(img_or_plane, dtype=np.float64)
    in_h, in_w = data.shape[:2]
    xs = _source_coords(width, in_w)
    ys = _source_coords(height, in_h)

    if mode == "nearest":
        xi = np.clip(np.floor(xs + 0.5).astype(np.int64), 0, in_w - 1)
        yi = np.clip(np.floor(ys + 0.5).astype(np.int64), 0, in_h - 1)
        out = data[yi][:, xi]
    else:
        x0 = np.clip(np.floor(xs).astype(np.int64), 0, in_w - 1)
        x1 = np.minimum(x0 + 1, in_w - 1)
        fx = np.clip(xs - x0, 0.0, 1.0)
        y0 = np.clip(np.floor(ys).astype(np.int64), 0, in_h - 1)
        y1 = np.minimum(y0 + 1, in_h - 1)
        fy = np.clip(ys - y0, 0.0, 1.0)
        if data.ndim == 3:
            fx_b = fx[None, :, None]
            fy_b = fy[:, None, None]
        else:
            fx_b = fx[None, :]
            fy_b = fy[:, None]
        top = data[y0][:, x0] * (1.0 - fx_b) + data[y0][:, x1] * fx_b
        bot = data[y1][:, x0] * (1.0 - fx_b) + data[y1][:, x1] * fx_b
        out = top * (1.0 - fy_b) + bot * fy_b

    if is_buffer:
        return ImageBuffer(np.clip(out, 0.0, 1.0))
    return out


def rgb_to_hsv(data: np.ndarray) -> np.ndarray:
    """Vectorized RGB -> HSV on an (h, w, 3) array in [0, 1]. H is in [0, 1)."""
    r, g, b = data[..., 0], data[..., 1], data[..., 2]
    maxc = np.max(data, axis=-1)
    minc = np.min(data, axis=-1)
    delta = maxc - minc
    v = maxc
    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)

    with np.errstate(invalid="ignore", divide="ignore"):
        safe = np.where(delta > 0, delta, 1.0)
        rc = (maxc - r) / safe
        gc = (maxc - g) / safe
        bc = (maxc - b) / safe
    # branch priority r > g > b resolves ties deterministically
    h = np.where(maxc == r, bc - gc,
                 np.where(maxc == g, 2.0 + rc - bc, 4.0 + gc - rc))
    h = np.where(delta > 0, (h / 6.0) % 1.0, 0.0)
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    """Vectorized HSV -> RGB inverse of :func:`rgb_to_hsv`."""
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    i = i.astype(np.int64) % 6

    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def rgb_hsv_roundtrip(img: ImageBuffer) -> ImageBuffer:
    """rgb -> hsv -> rgb; identity within 1e-6 per sample."""
    data = _check_image(img)
    return ImageBuffer(np.clip(hsv_to_rgb(rgb_to_hsv(data)), 0.0, 1.0))


def plasma_fractal(size: int, wibbledecay: float, rng: DeterministicRng) -> np.ndarray:
    """Diamond-square heightmap, min-max normalized to [0, 1].

    The perturbation amplitude is divided by ``wibbledecay`` at each
    recursion level, so larger decay values yield smoother fields.
    """
    if size < 8 or (size & (size - 1)) != 0:
        raise InvalidParameterError(f"plasma size must be a power of two >= 8, got {size}")
    if wibbledecay <= 1.0:
        raise InvalidParameterError(f"wibbledecay must be > 1, got {wibbledecay}")

    field = np.zeros((size, size), dtype=np.float64)
    stepsize = size
    wibble = 1.0

    def wibbled(mean_of_4: np.ndarray, amplitude: float) -> np.ndarray:
        noise = rng.uniforms(mean_of_4.size).reshape(mean_of_4.shape)
        return mean_of_4 / 4.0 + amplitude * (2.0 * noise - 1.0)

    while stepsize >= 2:
        half = stepsize // 2
        # squares: centers get the mean of their four corners plus noise
        corners = field[0:size:stepsize, 0:size:stepsize]
        acc = corners + np.roll(corners, -1, axis=0)
        acc = acc + np.roll(acc, -1, axis=1)
        field[half:size:stepsize, half:size:stepsize] = wibbled(acc, wibble)
        # diamonds: edge midpoints from their four diagonal neighbours
        centers = field[half:size:stepsize, half:size:stepsize]
        corners = field[0:size:stepsize, 0:size:stepsize]
        ld = centers + np.roll(centers, 1, axis=0)
        lu = corners + np.roll(corners, -1, axis=1)
        field[0:size:stepsize, half:size:stepsize] = wibbled(ld + lu, wibble)
        td = centers + np.roll(centers, 1, axis=1)
        tu = corners + np.roll(corners, -1, axis=0)
        field[half:size:stepsize, 0:size:stepsize] = wibbled(td + tu, wibble)

        stepsize //= 2
        wibble /= wibbledecay

    field -= field.min()
    peak = field.max()
    if peak > 0:
        field /= peak
    return field
