"""corrbench: deterministic corruption-benchmark synthesis and depth-robustness evaluation."""

from .imagecore import (
    DeterministicRng,
    ImageBuffer,
    Kernel2D,
    convolve,
    derive_seed,
    fnv1a_64,
    gaussian_blur,
    plasma_fractal,
    resize,
    rgb_hsv_roundtrip,
)

__version__ = "0.1.0"

__all__ = [
    "DeterministicRng",
    "ImageBuffer",
    "Kernel2D",
    "convolve",
    "derive_seed",
    "fnv1a_64",
    "gaussian_blur",
    "plasma_fractal",
    "resize",
    "rgb_hsv_roundtrip",
    "__version__",
]
