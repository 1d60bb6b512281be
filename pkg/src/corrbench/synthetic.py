"""Deterministic synthetic test frames.

The benchmark itself is dataset-agnostic; these frames exist so that demos,
tests, and calibration runs can operate without shipping any real imagery.
Each frame mixes smooth gradients, a textured "ground", a horizon band, and a
few geometric occluders, which gives the corruption kernels realistic
structure (edges, texture, mid-range exposure) to act on.
"""

from __future__ import annotations

import numpy as np

from .imagecore import DeterministicRng, ImageBuffer, plasma_fractal, resize


def synthetic_frame(index: int, width: int = 160, height: int = 96) -> ImageBuffer:
    """Deterministic naturalistic frame number ``index`` at the given size."""
    rng = DeterministicRng(0xC0FFEE ^ (index * 0x9E37))
    h, w = height, width
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    ny, nx = yy / max(h - 1, 1), xx / max(w - 1, 1)

    # sky-to-ground vertical ramp with a per-frame hue cast
    cast = 0.08 * (rng.uniforms(3) - 0.5)
    sky = np.array([0.56, 0.64, 0.78]) + cast
    ground = np.array([0.16, 0.14, 0.13]) + cast
    base = sky[None, None, :] * (1 - ny[..., None]) + ground[None, None, :] * ny[..., None]

    # bright highlight (sun patch / specular) so frames span the full range
    u_h = rng.uniforms(2)
    hx, hy = (0.15 + 0.7 * u_h[0]) * w, (0.05 + 0.2 * u_h[1]) * h
    r2 = ((xx - hx) / (0.08 * w)) ** 2 + ((yy - hy) / (0.08 * h)) ** 2
    base += np.clip(1.0 - r2, 0.0, 1.0)[..., None] * 0.5

    # broad plasma texture modulating all channels
    size = 8
    while size < max(h, w):
        size *= 2
    tex = resize(plasma_fractal(size, 1.8, rng), w, h, "bilinear")
    base += 0.30 * (tex[..., None] - 0.5)

    # a handful of rectangular and elliptical occluders
    n_shapes = 3 + int(rng.integers(0, 3, 1)[0])
    for _ in range(n_shapes):
        u = rng.uniforms(7)
        cx, cy = u[0] * w, 0.3 * h + u[1] * 0.7 * h
        sx, sy = (0.05 + 0.2 * u[2]) * w, (0.05 + 0.25 * u[3]) * h
        color = 0.10 + 0.75 * u[4:7]
        if u[0] < 0.5:
            mask = (np.abs(xx - cx) < sx) & (np.abs(yy - cy) < sy)
        else:
            mask = ((xx - cx) / sx) ** 2 + ((yy - cy) / sy) ** 2 < 1.0
        base[mask] = 0.35 * base[mask] + 0.65 * color[None, :]

    # mild sensor grain so noise corruptions act on non-flat input
    grain = rng.gaussians(h * w * 3).reshape(h, w, 3) * 0.01
    return ImageBuffer(np.clip(base + grain, 0.0, 1.0))


def synthetic_corpus(count: int, width: int = 160, height: int = 96) -> list[ImageBuffer]:
    return [synthetic_frame(i, width, height) for i in range(count)]


def flat_frame(value: float = 0.5, width: int = 16, height: int = 16) -> ImageBuffer:
    """Constant placeholder frame (cardinality tests are content-independent)."""
    return ImageBuffer(np.full((height, width, 3), value, dtype=np.float64))
