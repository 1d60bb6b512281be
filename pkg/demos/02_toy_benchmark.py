"""End-to-end toy benchmark: corrupt -> predict -> evaluate -> report.

Builds a 5-image clean set with synthetic ground-truth depth, corrupts it
across two kinds, fakes a "model" whose predictions degrade with corruption
severity, evaluates everything through the file-based pipeline, and prints
the resulting robustness report.

Run:  python demos/02_toy_benchmark.py
"""

import json
import time
from pathlib import Path

import numpy as np

from corrbench import fileio, harness
from corrbench.corruptions import CorruptionKind
from corrbench.depthmetrics import DepthMap, EvalProtocol
from corrbench.synthetic import synthetic_corpus

OUT = Path(__file__).parent / "output" / "toy_benchmark"
KINDS = [CorruptionKind.gaussian_noise, CorruptionKind.fog]


def synth_depth(i, h, w):
    """Ground plane receding with distance plus a few boxes."""
    rng = np.random.default_rng(1000 + i)
    yy = np.linspace(1.0, 0.05, h)[:, None]
    depth = 4.0 + 60.0 * yy * np.ones((h, w))
    for _ in range(3):
        cy, cx = rng.integers(0, h - 8), rng.integers(0, w - 8)
        depth[cy:cy + 8, cx:cx + 8] = rng.uniform(5, 25)
    return np.rint(depth * 256) / 256  # quantize to the codec grid


def fake_predictions(gt, corrupted_rgb, clean_rgb):
    """A pretend model whose depth error tracks the image-space distortion."""
    distortion = float(np.abs(corrupted_rgb - clean_rgb).mean())
    rng = np.random.default_rng(int(gt.sum() * 1000) % 2**32)
    noise = rng.normal(0, 0.02 + 0.8 * distortion, gt.shape)
    return np.clip(gt * (1.0 + noise) + 0.05 + 2.0 * distortion, 0.05, None)


def main():
    t0 = time.time()
    clean_dir = OUT / "clean"
    gt_dir = OUT / "gt"
    pred_dir = OUT / "pred"
    h, w = 48, 64

    corpus = synthetic_corpus(5, w, h)
    for i, img in enumerate(corpus):
        fileio.save_image(clean_dir / f"{i:02d}.png", img)
        fileio.save_depth_png16(gt_dir / f"{i:02d}.png", DepthMap(synth_depth(i, h, w)), 256.0)

    print("1. corrupting the clean set ...")
    manifest, errors = harness.generate_dataset(
        clean_dir, OUT / "corrupted", kinds=KINDS, profile="outdoor-5", seed_root=7)
    print(f"   {len(manifest.entries)} corrupted images, "
          f"manifest hash {manifest.content_hash():#x}")

    print("2. writing fake model predictions ...")
    proto = EvalProtocol(min_depth=1e-3, max_depth=80.0, crop=None, median_scaling=False)
    for i in range(5):
        gt = fileio.load_depth_png16(gt_dir / f"{i:02d}.png", 256.0)
        clean = fileio.load_image(clean_dir / f"{i:02d}.png")
        pred = fake_predictions(gt.values, clean.data, clean.data)
        fileio.save_depth_png16(pred_dir / f"{i:02d}.png", DepthMap(pred), 256.0)
    for entry in manifest.entries:
        gt = fileio.load_depth_png16(gt_dir / entry.relative_path, 256.0)
        clean = fileio.load_image(clean_dir / entry.relative_path)
        corrupted = fileio.load_image(OUT / "corrupted" / entry.output_path)
        pred = fake_predictions(gt.values, corrupted.data, clean.data)
        fileio.save_depth_png16(pred_dir / entry.output_path, DepthMap(pred), 256.0)

    print("3. evaluating clean and corrupted sets ...")
    pred_set = harness.PredictionSet("toy_model", str(pred_dir), "png16", 256.0)
    gt_set = harness.GroundTruthSet(str(gt_dir), 256.0)
    clean_scores = harness.evaluate_clean(
        pred_set, gt_set, [f"{i:02d}.png" for i in range(5)], proto)
    cells, detail = harness.evaluate_cells(pred_set, gt_set, manifest, proto, kinds=KINDS)
    print(f"   clean composite error {clean_scores.dee:.4f}")

    print("4. per-kind robustness scores against a flat toy baseline ...")
    from corrbench.robustness import DeeCell, corruption_error, resilience_rate
    print(f"   {'kind':16s} {'severity-mean e':>16s} {'CE%':>8s} {'RR%':>8s}")
    for kind in KINDS:
        kcells = [c for c in cells if c.kind is kind]
        base = [DeeCell("toy_baseline", kind, s, 0.25) for s in range(1, 6)]
        ce = corruption_error(kcells, base)
        rr = resilience_rate(kcells, clean_scores.dee)
        mean_dee = np.mean([c.dee for c in kcells])
        print(f"   {kind.name:16s} {mean_dee:16.4f} {ce:8.1f} {rr:8.1f}")
        curve = [c.dee for c in sorted(kcells, key=lambda c: c.severity)]
        print(f"   {'':16s} severity curve: " +
              " ".join(f"{v:.3f}" for v in curve))

    doc = {"clean_dee": clean_scores.dee,
           "cells": [{"kind": c.kind.name, "severity": c.severity, "dee": c.dee}
                     for c in cells]}
    (OUT / "cells.json").write_text(json.dumps(doc, indent=1, sort_keys=True))
    print(f"5. wrote {OUT / 'cells.json'}  ({time.time() - t0:.1f}s total)")


if __name__ == "__main__":
    main()
