"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import pytest

from corrbench.imagecore import ImageBuffer
from corrbench.synthetic import synthetic_corpus, synthetic_frame

DATA_DIR = Path(__file__).parent / "data"


def psnr(a: ImageBuffer, b: ImageBuffer) -> float:
    mse = float(np.mean((a.data - b.data) ** 2))
    if mse == 0:
        return float("inf")
    return 10.0 * np.log10(1.0 / mse)


def load_table_csv(name: str) -> dict[str, dict[str, float]]:
    """Paper-table fixture: model_id -> {column -> value}."""
    with open(DATA_DIR / name, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return {r["model_id"]: {k: float(v) for k, v in r.items() if k != "model_id"}
            for r in rows}


@pytest.fixture(scope="session")
def natural_frame() -> ImageBuffer:
    return synthetic_frame(0, 160, 96)


@pytest.fixture(scope="session")
def small_corpus() -> list[ImageBuffer]:
    return synthetic_corpus(5, 96, 64)
