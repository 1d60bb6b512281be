"""Severity parameter tables.

Each corruption kind has one parameter record per severity level. The table
is data, not code: it ships as ``data/severity_tables.json`` and any document
with the same schema can be loaded in its place. Parameter schemas declare
the direction in which each parameter moves as distortion increases
("increasing", "decreasing", or "constant"), and loading validates strict
monotonicity for every directed parameter.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .errors import InvalidParameterError, UnsupportedKindError
from .imagecore import fnv1a_64

# direction of each parameter as severity (distortion) increases
PARAM_DIRECTIONS: dict[str, dict[str, str]] = {
    "brightness": {"shift": "increasing"},
    "dark": {
        "scale": "decreasing",
        "gamma": "increasing",
        "shot_lambda": "decreasing",
        "read_sigma": "increasing",
    },
    "fog": {"intensity": "increasing", "wibbledecay": "increasing"},
    "frost": {"base": "decreasing", "overlay": "increasing"},
    "snow": {
        "flake_mean": "increasing",
        "flake_std": "constant",
        "flake_zoom": "increasing",
        "threshold": "decreasing",
        "blur_len": "increasing",
        "blur_sigma": "increasing",
        "whiten": "decreasing",
    },
    "contrast": {"factor": "decreasing"},
    "defocus_blur": {"radius": "increasing", "alias_sigma": "increasing"},
    "glass_blur": {
        "sigma": "increasing",
        "max_shift": "increasing",
        "iterations": "increasing",
    },
    "motion_blur": {"length": "increasing", "cross_sigma": "increasing"},
    "zoom_blur": {"max_zoom": "increasing", "steps": "increasing"},
    "elastic_transform": {
        "alpha_frac": "increasing",
        "sigma_frac": "decreasing",
        "affine_frac": "increasing",
    },
    "color_quant": {"bits": "decreasing"},
    "gaussian_noise": {"sigma": "increasing"},
    "impulse_noise": {"amount": "increasing"},
    "shot_noise": {"lam": "decreasing"},
    "iso_noise": {"luma_lambda": "decreasing", "chroma_sigma": "increasing"},
    "pixelate": {"fraction": "decreasing"},
    "jpeg_compress": {"quality": "decreasing"},
}


class SeverityTable:
    """Per-kind, per-level parameter records with monotonicity validation."""

    def __init__(self, levels: dict[str, list[dict]]):
        self._levels = {k: [dict(rec) for rec in recs] for k, recs in levels.items()}
        self._validate()

    def _validate(self):
        for kind, records in self._levels.items():
            schema = PARAM_DIRECTIONS.get(kind)
            if schema is None:
                raise UnsupportedKindError(f"unknown corruption kind in table: {kind!r}")
            if not records:
                raise InvalidParameterError(f"{kind}: table has no levels")
            for rec in records:
                if set(rec) != set(schema):
                    raise InvalidParameterError(
                        f"{kind}: level record keys {sorted(rec)} do not match "
                        f"schema {sorted(schema)}")
            for param, direction in schema.items():
                series = [rec[param] for rec in records]
                pairs = zip(series, series[1:])
                if direction == "increasing":
                    ok = all(a < b for a, b in pairs)
                elif direction == "decreasing":
                    ok = all(a > b for a, b in pairs)
                else:
                    ok = all(a == b for a, b in pairs)
                if not ok:
                    raise InvalidParameterError(
                        f"{kind}.{param}: values {series} are not strictly "
                        f"{direction} across severity levels")

    def kinds(self) -> list[str]:
        return sorted(self._levels)

    def num_levels(self, kind: str) -> int:
        if kind not in self._levels:
            raise UnsupportedKindError(f"no table entry for kind {kind!r}")
        return len(self._levels[kind])

    def params(self, kind: str, severity: int) -> dict:
        """Parameter record for one severity level (levels are 1-based)."""
        if kind not in self._levels:
            raise UnsupportedKindError(f"no table entry for kind {kind!r}")
        records = self._levels[kind]
        if not 1 <= severity <= len(records):
            raise InvalidParameterError(
                f"severity {severity} out of range 1..{len(records)} for {kind}")
        return dict(records[severity - 1])

    def to_document(self) -> dict:
        return {
            "schema_version": 1,
            "kinds": {
                kind: {
                    "params": dict(PARAM_DIRECTIONS[kind]),
                    "levels": [dict(rec) for rec in self._levels[kind]],
                }
                for kind in sorted(self._levels)
            },
        }

    def content_hash(self) -> int:
        """FNV-1a 64 over the canonical JSON serialization."""
        blob = json.dumps(self.to_document(), sort_keys=True,
                          separators=(",", ":")).encode("utf-8")
        return fnv1a_64(blob)

    @classmethod
    def from_document(cls, doc: dict) -> "SeverityTable":
        if doc.get("schema_version") != 1:
            raise InvalidParameterError(
                f"unsupported severity table schema_version {doc.get('schema_version')!r}")
        levels = {kind: entry["levels"] for kind, entry in doc["kinds"].items()}
        return cls(levels)

    @classmethod
    def from_file(cls, path: str | Path) -> "SeverityTable":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_document(json.load(fh))

    @classmethod
    def default(cls) -> "SeverityTable":
        ref = resources.files("corrbench.data").joinpath("severity_tables.json")
        return cls.from_document(json.loads(ref.read_text(encoding="utf-8")))
