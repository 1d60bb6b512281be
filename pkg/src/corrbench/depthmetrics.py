"""Per-image and per-set depth accuracy metrics, and the composite error score.

The composite score folds the absolute-relative error and the delta-1
accuracy into a single number, (abs_rel - d1 + 1) / 2, so that 0 is a perfect
prediction and values grow with error. Evaluation protocols (depth caps,
evaluation crop, median scaling) are explicit fields of
:class:`EvalProtocol`, never implicit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .errors import (
    EmptyEvaluationError,
    InvalidDepthError,
    InvalidParameterError,
    ShapeError,
)
from .imagecore import resize

# evaluation crop rectangles as (top, bottom, left, right) height/width fractions
GARG_CROP = (0.4081, 0.9919, 0.0352, 0.9648)
EIGEN_INDOOR_CROP = (0.09375, 0.98125, 0.0640625, 0.9390625)


@dataclass(frozen=True)
class EvalProtocol:
    """Knobs of a depth evaluation run."""

    min_depth: float = 1e-3
    max_depth: float = 80.0
    crop: tuple[float, float, float, float] | None = GARG_CROP
    median_scaling: bool = True

    def __post_init__(self):
        if not 0 < self.min_depth < self.max_depth:
            raise InvalidParameterError(
                f"need 0 < min_depth < max_depth, got {self.min_depth}, {self.max_depth}")

    @classmethod
    def kitti(cls) -> "EvalProtocol":
        """Outdoor default: 80 m cap, Garg-style crop, median scaling on."""
        return cls(1e-3, 80.0, GARG_CROP, True)

    @classmethod
    def nyu(cls) -> "EvalProtocol":
        """Indoor default: 10 m cap, Eigen center crop, median scaling off."""
        return cls(1e-3, 10.0, EIGEN_INDOOR_CROP, False)


@dataclass
class DepthMap:
    """Float depth raster in meters with a validity mask."""

    values: np.ndarray
    valid: np.ndarray | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise InvalidParameterError(f"depth map must be 2-D, got shape {vals.shape}")
        if self.valid is None:
            mask = np.ones(vals.shape, dtype=bool)
        else:
            mask = np.asarray(self.valid, dtype=bool)
            if mask.shape != vals.shape:
                raise ShapeError(
                    f"validity mask shape {mask.shape} != values shape {vals.shape}")
        if np.any(vals[mask] <= 0):
            raise InvalidDepthError("depth values must be > 0 wherever valid")
        self.values = vals
        self.valid = mask

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass
class DepthScores:
    """The standard error/accuracy bundle plus the composite score."""

    abs_rel: float
    sq_rel: float
    rmse: float
    rmse_log: float
    d1: float
    d2: float
    d3: float
    dee: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.dee is None:
            self.dee = dee(self.abs_rel, self.d1)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def dee(abs_rel: float, d1: float) -> float:
    """Composite depth estimation error: (abs_rel - d1 + 1) / 2."""
    if abs_rel < 0:
        raise InvalidParameterError(f"abs_rel must be >= 0, got {abs_rel}")
    if not 0 <= d1 <= 1:
        raise InvalidParameterError(f"d1 must be in [0, 1], got {d1}")
    return (abs_rel - d1 + 1.0) / 2.0


def _crop_mask(shape: tuple[int, int],
               crop: tuple[float, float, float, float] | None) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    if crop is None:
        mask[:] = True
        return mask
    h, w = shape
    top, bottom, left, right = crop
    mask[int(top * h):int(bottom * h), int(left * w):int(right * w)] = True
    return mask


def compute_scores(pred: DepthMap, gt: DepthMap, proto: EvalProtocol) -> DepthScores:
    """Score one prediction against ground truth under a protocol.

    Predictions whose resolution differs from the ground truth are resized
    bilinearly (dense predictions only); pixels outside the depth range or
    the evaluation crop are excluded; median scaling, when enabled, rescales
    the prediction by median(gt)/median(pred) over the evaluated pixels
    before the prediction is clamped into [min_depth, max_depth].
    """
    pred_vals = pred.values
    if pred_vals.shape != gt.values.shape:
        if not np.all(pred.valid):
            raise ShapeError(
                "cannot resize a prediction with masked-out pixels; "
                f"pred {pred_vals.shape} vs gt {gt.values.shape}")
        pred_vals = resize(pred_vals, gt.width, gt.height, "bilinear")

    mask = gt.valid & pred.valid if pred.values.shape == gt.values.shape else gt.valid
    mask = mask & (gt.values >= proto.min_depth) & (gt.values <= proto.max_depth)
    mask = mask & _crop_mask(gt.values.shape, proto.crop)
    if not np.any(mask):
        raise EmptyEvaluationError("no valid ground-truth pixels inside crop and range")

    g = gt.values[mask]
    p = pred_vals[mask]
    if np.any(p <= 0):
        raise InvalidDepthError("prediction contains non-positive depths on valid pixels")

    if proto.median_scaling:
        p = p * (np.median(g) / np.median(p))
    p = np.clip(p, proto.min_depth, proto.max_depth)

    diff = g - p
    abs_rel = float(np.mean(np.abs(diff) / g))
    sq_rel = float(np.mean(diff * diff / g))
    rmse = float(np.sqrt(np.mean(diff * diff)))
    rmse_log = float(np.sqrt(np.mean((np.log(g) - np.log(p)) ** 2)))
    ratio = np.maximum(p / g, g / p)
    d1 = float(np.mean(ratio < 1.25))
    d2 = float(np.mean(ratio < 1.25 ** 2))
    d3 = float(np.mean(ratio < 1.25 ** 3))
    return DepthScores(abs_rel, sq_rel, rmse, rmse_log, d1, d2, d3)


def aggregate_set(scores: list[DepthScores]) -> DepthScores:
    """Per-image arithmetic mean of every field; the composite score is
    recomputed from the averaged abs_rel and d1."""
    if not scores:
        raise EmptyEvaluationError("cannot aggregate an empty score list")
    mean = {
        name: float(np.mean([getattr(s, name) for s in scores]))
        for name in ("abs_rel", "sq_rel", "rmse", "rmse_log", "d1", "d2", "d3")
    }
    return DepthScores(**mean)
