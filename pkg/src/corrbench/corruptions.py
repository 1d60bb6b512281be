"""The 18 severity-parameterized corruption generators.

Five families (noise, blur, weather, tone, digital) grouped into three
categories (weather & lighting, sensor & movement, data & processing), plus
the single dispatch entry point :func:`apply_corruption`. Every generator is
deterministic given (image, kind, severity, seed): all randomness flows
through the caller-supplied :class:`~corrbench.imagecore.DeterministicRng`.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import lru_cache
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import (
    InvalidParameterError,
    MissingAssetError,
    UnsupportedKindError,
)
from .imagecore import (
    DeterministicRng,
    ImageBuffer,
    Kernel2D,
    blur_plane,
    convolve,
    plasma_fractal,
    require_min_size,
    resize,
    rgb_to_hsv,
    hsv_to_rgb,
)
from .severity import SeverityTable


class Category(str, Enum):
    WEATHER_LIGHTING = "weather_lighting"
    SENSOR_MOVEMENT = "sensor_movement"
    DATA_PROCESSING = "data_processing"


class CorruptionKind(IntEnum):
    brightness = 0
    dark = 1
    fog = 2
    frost = 3
    snow = 4
    contrast = 5
    defocus_blur = 6
    glass_blur = 7
    motion_blur = 8
    zoom_blur = 9
    elastic_transform = 10
    color_quant = 11
    gaussian_noise = 12
    impulse_noise = 13
    shot_noise = 14
    iso_noise = 15
    pixelate = 16
    jpeg_compress = 17

    @property
    def category(self) -> Category:
        return KIND_CATEGORY[self]


KIND_CATEGORY = {
    CorruptionKind.brightness: Category.WEATHER_LIGHTING,
    CorruptionKind.dark: Category.WEATHER_LIGHTING,
    CorruptionKind.fog: Category.WEATHER_LIGHTING,
    CorruptionKind.frost: Category.WEATHER_LIGHTING,
    CorruptionKind.snow: Category.WEATHER_LIGHTING,
    CorruptionKind.contrast: Category.WEATHER_LIGHTING,
    CorruptionKind.defocus_blur: Category.SENSOR_MOVEMENT,
    CorruptionKind.glass_blur: Category.SENSOR_MOVEMENT,
    CorruptionKind.motion_blur: Category.SENSOR_MOVEMENT,
    CorruptionKind.zoom_blur: Category.SENSOR_MOVEMENT,
    CorruptionKind.elastic_transform: Category.SENSOR_MOVEMENT,
    CorruptionKind.color_quant: Category.SENSOR_MOVEMENT,
    CorruptionKind.gaussian_noise: Category.DATA_PROCESSING,
    CorruptionKind.impulse_noise: Category.DATA_PROCESSING,
    CorruptionKind.shot_noise: Category.DATA_PROCESSING,
    CorruptionKind.iso_noise: Category.DATA_PROCESSING,
    CorruptionKind.pixelate: Category.DATA_PROCESSING,
    CorruptionKind.jpeg_compress: Category.DATA_PROCESSING,
}

ALL_KINDS = tuple(CorruptionKind)

# benchmark profiles: indoor scenes drop the outdoor-weather trio and use
# the first four severity levels of the same tables
PROFILES = {
    "outdoor-5": {
        "levels": 5,
        "kinds": tuple(CorruptionKind),
    },
    "indoor-4": {
        "levels": 4,
        "kinds": tuple(
            k for k in CorruptionKind
            if k not in (CorruptionKind.fog, CorruptionKind.frost, CorruptionKind.snow)
        ),
    },
}


@dataclass(frozen=True)
class CorruptionSpec:
    """One corrupted rendering of one image: (kind, severity, seed)."""

    kind: CorruptionKind
    severity: int
    seed: int


def profile_levels(profile: str) -> int:
    if profile not in PROFILES:
        raise InvalidParameterError(
            f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}")
    return PROFILES[profile]["levels"]


def profile_kinds(profile: str) -> tuple[CorruptionKind, ...]:
    if profile not in PROFILES:
        raise InvalidParameterError(
            f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}")
    return PROFILES[profile]["kinds"]


def kind_from_name(name: str) -> CorruptionKind:
    try:
        return CorruptionKind[name]
    except KeyError:
        raise UnsupportedKindError(f"unknown corruption kind {name!r}") from None


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def _clip(data: np.ndarray) -> ImageBuffer:
    return ImageBuffer(np.clip(data, 0.0, 1.0))


def _luma(data: np.ndarray) -> np.ndarray:
    return 0.299 * data[..., 0] + 0.587 * data[..., 1] + 0.114 * data[..., 2]


def _next_pow2(n: int) -> int:
    p = 8
    while p < n:
        p *= 2
    return p


def _zoom_plane(plane: np.ndarray, factor: float) -> np.ndarray:
    """Scale a 2-D plane about its center and crop back to the original size."""
    h, w = plane.shape
    zh, zw = max(1, int(round(h * factor))), max(1, int(round(w * factor)))
    scaled = resize(plane, zw, zh, "bilinear")
    top = (zh - h) // 2
    left = (zw - w) // 2
    return scaled[top:top + h, left:left + w]


def _zoom_rgb(data: np.ndarray, factor: float) -> np.ndarray:
    h, w = data.shape[:2]
    zh, zw = max(1, int(round(h * factor))), max(1, int(round(w * factor)))
    scaled = resize(data, zw, zh, "bilinear")
    top = (zh - h) // 2
    left = (zw - w) // 2
    return scaled[top:top + h, left:left + w]


def _line_kernel(length: float, cross_sigma: float, angle_rad: float) -> Kernel2D:
    """Unit-mass line segment of the given length with a Gaussian cross profile."""
    size = int(length)
    if size % 2 == 0:
        size += 1
    size = max(size, 3)
    half = size // 2
    ys, xs = np.mgrid[-half:half + 1, -half:half + 1].astype(np.float64)
    ca, sa = math.cos(angle_rad), math.sin(angle_rad)
    along = ca * xs + sa * ys
    perp = -sa * xs + ca * ys
    weights = np.exp(-(perp ** 2) / (2.0 * cross_sigma ** 2))
    weights[np.abs(along) > length / 2.0] = 0.0
    if weights.sum() <= 0:
        weights[half, half] = 1.0
    return Kernel2D.normalized(weights)


def _blur_plane_with_kernel(plane: np.ndarray, kernel: Kernel2D) -> np.ndarray:
    return ndimage.convolve(plane, kernel.weights, mode="mirror")


def _disk_kernel(radius: int, alias_sigma: float) -> Kernel2D:
    span = np.arange(-radius, radius + 1, dtype=np.float64)
    xs, ys = np.meshgrid(span, span)
    disk = ((xs ** 2 + ys ** 2) <= radius ** 2).astype(np.float64)
    if alias_sigma > 0:
        disk = blur_plane(disk, alias_sigma)
    return Kernel2D.normalized(disk)


# ---------------------------------------------------------------------------
# noise family
# ---------------------------------------------------------------------------

_NOISE_KINDS = {
    "gaussian": CorruptionKind.gaussian_noise,
    "shot": CorruptionKind.shot_noise,
    "impulse": CorruptionKind.impulse_noise,
    "iso": CorruptionKind.iso_noise,
}


def apply_noise(img: ImageBuffer, model: str, severity: int,
                rng: DeterministicRng, table: SeverityTable | None = None) -> ImageBuffer:
    if model not in _NOISE_KINDS:
        raise UnsupportedKindError(f"unknown noise model {model!r}")
    table = table or SeverityTable.default()
    kind = _NOISE_KINDS[model]
    params = table.params(kind.name, severity)
    data = img.data

    if model == "gaussian":
        sigma = float(params["sigma"])
        if sigma == 0:
            return img.copy()
        noise = rng.gaussians(data.size).reshape(data.shape)
        return _clip(data + sigma * noise)

    if model == "shot":
        lam = float(params["lam"])
        counts = rng.poisson(data * lam)
        return _clip(counts / lam)

    if model == "impulse":
        amount = float(params["amount"])
        h, w = data.shape[:2]
        hit = rng.uniforms(h * w).reshape(h, w) < amount
        salt = rng.uniforms(h * w).reshape(h, w) < 0.5
        out = data.copy()
        out[hit] = np.where(salt[hit, None], 1.0, 0.0)
        return _clip(out)

    # iso: Poisson on luminance plus Gaussian chroma noise
    lam = float(params["luma_lambda"])
    chroma_sigma = float(params["chroma_sigma"])
    r, g, b = data[..., 0], data[..., 1], data[..., 2]
    y = _luma(data)
    cr = r - y
    cb = b - y
    y_noisy = rng.poisson(np.clip(y, 0.0, 1.0) * lam) / lam
    n = rng.gaussians(2 * y.size).reshape(2, *y.shape)
    cr = cr + chroma_sigma * n[0]
    cb = cb + chroma_sigma * n[1]
    r2 = cr + y_noisy
    b2 = cb + y_noisy
    g2 = (y_noisy - 0.299 * r2 - 0.114 * b2) / 0.587
    return _clip(np.stack([r2, g2, b2], axis=-1))


# ---------------------------------------------------------------------------
# blur family
# ---------------------------------------------------------------------------

_BLUR_KINDS = {
    "defocus": CorruptionKind.defocus_blur,
    "glass": CorruptionKind.glass_blur,
    "motion": CorruptionKind.motion_blur,
    "zoom": CorruptionKind.zoom_blur,
}


@lru_cache(maxsize=32)
def _glass_groups(h: int, w: int, d: int):
    """Interior pixel coordinates partitioned into (2d+1)-strided groups.

    Within one group all pixels are at least 2d+1 apart on both axes, so
    swaps with targets within +-d can never collide.
    """
    ii, jj = np.mgrid[d:h - d, d:w - d]
    ii = ii.ravel()
    jj = jj.ravel()
    stride = 2 * d + 1
    key = ((ii - d) % stride) * stride + ((jj - d) % stride)
    order = np.argsort(key, kind="stable")
    bounds = np.searchsorted(key[order], np.arange(stride * stride + 1))
    groups = tuple(
        (ii[order[a:b]], jj[order[a:b]], order[a:b])
        for a, b in zip(bounds[:-1], bounds[1:]) if b > a)
    return ii, jj, groups


def _glass_shuffle(data: np.ndarray, max_shift: int, iterations: int,
                   rng: DeterministicRng) -> np.ndarray:
    """Locally swap each interior pixel with a uniformly chosen neighbour.

    Swaps are scheduled over (2d+1)-strided groups so that no two swaps in a
    group touch the same pixel; the result is a genuine permutation of the
    pixel multiset and is independent of evaluation order within a group.
    """
    h, w = data.shape[:2]
    d = int(max_shift)
    out = data.copy()
    if d == 0 or h <= 2 * d or w <= 2 * d:
        return out
    ii, jj, groups = _glass_groups(h, w, d)
    for _ in range(int(iterations)):
        dy = rng.integers(-d, d, ii.size)
        dx = rng.integers(-d, d, jj.size)
        for si, sj, flat in groups:
            ti, tj = si + dy[flat], sj + dx[flat]
            tmp = out[si, sj].copy()
            out[si, sj] = out[ti, tj]
            out[ti, tj] = tmp
    return out


def apply_blur(img: ImageBuffer, model: str, severity: int,
               rng: DeterministicRng, table: SeverityTable | None = None) -> ImageBuffer:
    if model not in _BLUR_KINDS:
        raise UnsupportedKindError(f"unknown blur model {model!r}")
    table = table or SeverityTable.default()
    kind = _BLUR_KINDS[model]
    params = table.params(kind.name, severity)
    data = img.data

    if model == "defocus":
        radius = int(params["radius"])
        if radius < 1:
            return img.copy()
        kernel = _disk_kernel(radius, float(params["alias_sigma"]))
        return convolve(img, kernel)

    if model == "glass":
        sigma = float(params["sigma"])
        blurred = np.stack([blur_plane(data[..., c], sigma) for c in range(3)], axis=-1)
        shuffled = _glass_shuffle(blurred, int(params["max_shift"]),
                                  int(params["iterations"]), rng)
        final = np.stack([blur_plane(shuffled[..., c], sigma) for c in range(3)], axis=-1)
        return _clip(final)

    if model == "motion":
        angle = rng.uniform(-math.pi / 4.0, math.pi / 4.0)
        kernel = _line_kernel(float(params["length"]), float(params["cross_sigma"]), angle)
        return convolve(img, kernel)

    # zoom: average over a stack of center zooms, then mix with the original
    max_zoom = float(params["max_zoom"])
    steps = int(params["steps"])
    factors = np.linspace(1.0, max_zoom, steps)
    acc = np.zeros_like(data)
    for factor in factors:
        acc += _zoom_rgb(data, float(factor))
    stack_mean = acc / len(factors)
    return _clip((data + stack_mean) / 2.0)


# ---------------------------------------------------------------------------
# weather family
# ---------------------------------------------------------------------------

_WEATHER_KINDS = {
    "fog": CorruptionKind.fog,
    "frost": CorruptionKind.frost,
    "snow": CorruptionKind.snow,
}


def synthesize_frost_overlay(height: int, width: int, rng: DeterministicRng) -> np.ndarray:
    """Procedural frost texture: thresholded band-limited noise streaks.

    Returns an (h, w, 3) overlay in [0, 1] with a slight blue tint. Used when
    no photographic overlay assets are configured.
    """
    size = _next_pow2(max(height, width))
    patch = resize(plasma_fractal(size, 1.9, rng), width, height, "bilinear")
    grain = resize(plasma_fractal(size, 1.35, rng), width, height, "bilinear")
    angle = rng.uniform(0.0, math.pi)
    streak_len = max(7.0, min(height, width) / 12.0)
    streaks = _blur_plane_with_kernel(grain, _line_kernel(streak_len, 2.0, angle))

    lo, hi = np.quantile(patch, [0.40, 0.85])
    mask = np.clip((patch - lo) / max(hi - lo, 1e-9), 0.0, 1.0)
    texture = np.clip(0.45 + 0.9 * (streaks - 0.5) + 0.3 * (grain - 0.5), 0.0, 1.0)
    gray = mask * texture
    tint = np.array([0.95, 0.98, 1.0])
    return np.clip(gray[..., None] * tint[None, None, :], 0.0, 1.0)


def load_frost_assets(asset_dir: str | Path) -> list[np.ndarray]:
    """Load photographic frost overlays from a directory of PNG/JPEG files."""
    paths = sorted(
        p for p in Path(asset_dir).iterdir()
        if p.suffix.lower() in (".png", ".jpg", ".jpeg"))
    overlays = []
    for p in paths:
        with Image.open(p) as im:
            overlays.append(np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0)
    if not overlays:
        raise MissingAssetError(f"no frost overlay images found in {asset_dir}")
    return overlays


def _frost_overlay(height: int, width: int, rng: DeterministicRng,
                   assets: list[np.ndarray] | None) -> np.ndarray:
    if assets is not None:
        if not assets:
            raise MissingAssetError("frost asset set is empty")
        idx = int(rng.integers(0, len(assets) - 1, 1)[0])
        tex = assets[idx]
        th, tw = tex.shape[:2]
        if th < height or tw < width:
            scale = max(height / th, width / tw)
            tex = resize(tex, int(math.ceil(tw * scale)), int(math.ceil(th * scale)),
                         "bilinear")
            th, tw = tex.shape[:2]
        top = int(rng.integers(0, th - height, 1)[0]) if th > height else 0
        left = int(rng.integers(0, tw - width, 1)[0]) if tw > width else 0
        return tex[top:top + height, left:left + width]
    return synthesize_frost_overlay(height, width, rng)


def apply_weather(img: ImageBuffer, model: str, severity: int,
                  rng: DeterministicRng, table: SeverityTable | None = None,
                  frost_assets: list[np.ndarray] | None = None) -> ImageBuffer:
    if model not in _WEATHER_KINDS:
        raise UnsupportedKindError(f"unknown weather model {model!r}")
    table = table or SeverityTable.default()
    kind = _WEATHER_KINDS[model]
    params = table.params(kind.name, severity)
    data = img.data
    h, w = data.shape[:2]

    if model == "fog":
        t = float(params["intensity"])
        if t == 0:
            return img.copy()
        size = _next_pow2(max(h, w))
        field = plasma_fractal(size, float(params["wibbledecay"]), rng)
        # rank-normalize, then squash to the natural plasma spread about
        # mid-gray: pins the field histogram so fog density depends only on
        # intensity, not on the realization's luck, without inflating the
        # field's contrast
        order = np.argsort(field, axis=None)
        ranks = np.empty(field.size, dtype=np.float64)
        ranks[order] = np.arange(field.size, dtype=np.float64)
        field = (ranks / (field.size - 1)).reshape(field.shape)
        field = 0.5 + (field - 0.5) * 0.45
        field = resize(field, w, h, "bilinear")
        max_c = float(data.max())
        out = (data + t * field[..., None]) * max_c / (max_c + t)
        return _clip(out)

    if model == "frost":
        base = float(params["base"])
        overlay_weight = float(params["overlay"])
        overlay = _frost_overlay(h, w, rng, frost_assets)
        return _clip(base * data + overlay_weight * overlay)

    # snow
    flakes = (rng.gaussians(h * w).reshape(h, w) * float(params["flake_std"])
              + float(params["flake_mean"]))
    flakes = _zoom_plane(flakes, float(params["flake_zoom"]))
    flakes[flakes < float(params["threshold"])] = 0.0
    flakes = np.clip(flakes, 0.0, 1.0)
    angle = rng.uniform(math.radians(-135.0), math.radians(-45.0))
    kernel = _line_kernel(float(params["blur_len"]), float(params["blur_sigma"]), angle)
    flakes = np.clip(_blur_plane_with_kernel(flakes, kernel), 0.0, 1.0)

    whiten = float(params["whiten"])
    gray = _luma(data)
    lightened = np.maximum(data, (gray * 1.5 + 0.5)[..., None])
    base = whiten * data + (1.0 - whiten) * lightened
    layer = flakes[..., None]
    return _clip(base + layer + np.flipud(layer))


# ---------------------------------------------------------------------------
# tone family
# ---------------------------------------------------------------------------

_TONE_KINDS = {
    "brightness": CorruptionKind.brightness,
    "dark": CorruptionKind.dark,
    "contrast": CorruptionKind.contrast,
}


def apply_tone(img: ImageBuffer, model: str, severity: int,
               rng: DeterministicRng, table: SeverityTable | None = None) -> ImageBuffer:
    if model not in _TONE_KINDS:
        raise UnsupportedKindError(f"unknown tone model {model!r}")
    table = table or SeverityTable.default()
    kind = _TONE_KINDS[model]
    params = table.params(kind.name, severity)
    data = img.data

    if model == "brightness":
        hsv = rgb_to_hsv(data)
        hsv[..., 2] = np.clip(hsv[..., 2] + float(params["shift"]), 0.0, 1.0)
        return _clip(hsv_to_rgb(hsv))

    if model == "contrast":
        factor = float(params["factor"])
        if factor == 1.0:
            return img.copy()
        mean = data.mean(axis=(0, 1), keepdims=True)
        return _clip((data - mean) * factor + mean)

    # dark: exposure scaling with gamma lift, then Poisson-Gaussian sensor noise
    scale = float(params["scale"])
    gamma = float(params["gamma"])
    lam = float(params["shot_lambda"])
    read_sigma = float(params["read_sigma"])
    darkened = np.power(data * scale, gamma)
    shot = rng.poisson(darkened * lam) / lam
    read = rng.gaussians(data.size).reshape(data.shape) * read_sigma
    return _clip(shot + read)


# ---------------------------------------------------------------------------
# digital family
# ---------------------------------------------------------------------------

_DIGITAL_KINDS = {
    "elastic": CorruptionKind.elastic_transform,
    "color_quant": CorruptionKind.color_quant,
    "pixelate": CorruptionKind.pixelate,
    "jpeg": CorruptionKind.jpeg_compress,
}


def apply_digital(img: ImageBuffer, model: str, severity: int,
                  rng: DeterministicRng, table: SeverityTable | None = None) -> ImageBuffer:
    if model not in _DIGITAL_KINDS:
        raise UnsupportedKindError(f"unknown digital model {model!r}")
    table = table or SeverityTable.default()
    kind = _DIGITAL_KINDS[model]
    params = table.params(kind.name, severity)
    data = img.data
    h, w = data.shape[:2]

    if model == "elastic":
        min_dim = min(h, w)
        alpha = float(params["alpha_frac"]) * min_dim
        sigma = float(params["sigma_frac"]) * min_dim
        aff = float(params["affine_frac"])

        raw = rng.uniforms(2 * h * w).reshape(2, h, w) * 2.0 - 1.0
        disp_y = blur_plane(raw[0], sigma) * alpha
        disp_x = blur_plane(raw[1], sigma) * alpha
        jitter = rng.uniforms(6) * 2.0 - 1.0
        a00, a01, a10, a11 = 1.0 + aff * jitter[0], aff * jitter[1], \
            aff * jitter[2], 1.0 + aff * jitter[3]
        ty, tx = aff * min_dim * jitter[4], aff * min_dim * jitter[5]

        ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
        cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
        src_y = a10 * (xs - cx) + a11 * (ys - cy) + cy + ty + disp_y
        src_x = a00 * (xs - cx) + a01 * (ys - cy) + cx + tx + disp_x
        out = np.empty_like(data)
        for c in range(3):
            out[..., c] = ndimage.map_coordinates(
                data[..., c], [src_y, src_x], order=1, mode="mirror")
        return _clip(out)

    if model == "color_quant":
        bits = int(params["bits"])
        if not 1 <= bits <= 8:
            raise InvalidParameterError(f"color_quant bits must be in 1..8, got {bits}")
        levels = float(2 ** bits - 1)
        return _clip(np.rint(data * levels) / levels)

    if model == "pixelate":
        fraction = float(params["fraction"])
        down_w = max(1, int(round(w * fraction)))
        down_h = max(1, int(round(h * fraction)))
        # operate on the raw array: the intermediate may be smaller than the
        # minimum buffer size
        down = resize(data, down_w, down_h, "nearest")
        return _clip(resize(down, w, h, "nearest"))

    # jpeg round trip through a baseline DCT encoder
    quality = int(params["quality"])
    buf = io.BytesIO()
    Image.fromarray(img.to_uint8(), "RGB").save(buf, format="JPEG", quality=quality)
    buf.seek(0)
    with Image.open(buf) as decoded:
        arr = np.asarray(decoded.convert("RGB"), dtype=np.float64) / 255.0
    return _clip(arr)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_FAMILY_DISPATCH = {
    CorruptionKind.gaussian_noise: (apply_noise, "gaussian"),
    CorruptionKind.shot_noise: (apply_noise, "shot"),
    CorruptionKind.impulse_noise: (apply_noise, "impulse"),
    CorruptionKind.iso_noise: (apply_noise, "iso"),
    CorruptionKind.defocus_blur: (apply_blur, "defocus"),
    CorruptionKind.glass_blur: (apply_blur, "glass"),
    CorruptionKind.motion_blur: (apply_blur, "motion"),
    CorruptionKind.zoom_blur: (apply_blur, "zoom"),
    CorruptionKind.fog: (apply_weather, "fog"),
    CorruptionKind.frost: (apply_weather, "frost"),
    CorruptionKind.snow: (apply_weather, "snow"),
    CorruptionKind.brightness: (apply_tone, "brightness"),
    CorruptionKind.dark: (apply_tone, "dark"),
    CorruptionKind.contrast: (apply_tone, "contrast"),
    CorruptionKind.elastic_transform: (apply_digital, "elastic"),
    CorruptionKind.color_quant: (apply_digital, "color_quant"),
    CorruptionKind.pixelate: (apply_digital, "pixelate"),
    CorruptionKind.jpeg_compress: (apply_digital, "jpeg"),
}


def apply_corruption(img: ImageBuffer, spec: CorruptionSpec,
                     table: SeverityTable | None = None,
                     frost_assets: list[np.ndarray] | None = None) -> ImageBuffer:
    """Render one corruption: dispatches to the family operation for spec.kind.

    Output has the same dimensions as the input, is clamped to [0, 1], and is
    bit-identical across repeated calls with the same arguments.
    """
    if spec.kind not in _FAMILY_DISPATCH:
        raise UnsupportedKindError(f"unsupported corruption kind {spec.kind!r}")
    table = table or SeverityTable.default()
    require_min_size(img)
    # range-check before any work so bad severities fail fast
    table.params(spec.kind.name, spec.severity)
    rng = DeterministicRng(spec.seed)
    family, model = _FAMILY_DISPATCH[spec.kind]
    if family is apply_weather:
        out = family(img, model, spec.severity, rng, table, frost_assets)
    else:
        out = family(img, model, spec.severity, rng, table)
    if out.data.shape != img.data.shape:
        raise InvalidParameterError(
            f"{spec.kind.name} changed image dimensions "
            f"{img.data.shape} -> {out.data.shape}")
    return out
