"""Client parity: values pass through from documents, never recomputed."""

import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from corrbench_client import (
    ManifestView,
    ReportView,
    SetupError,
    ToolkitError,
    ToolkitHandle,
    VersionError,
    load_report,
)
from corrbench_client.client import build_report, corrupt_dataset

PRIMARY_TESTS_DATA = Path(__file__).resolve().parents[2] / "tests" / "data"


@pytest.fixture(scope="module")
def handle() -> ToolkitHandle:
    h = ToolkitHandle(binary=[sys.executable, "-m", "corrbench.cli"])
    h.probe()
    return h


@pytest.fixture(scope="module")
def toy_clean(tmp_path_factory) -> Path:
    # the client must not import the toolkit package; build the toy set via
    # plain 8-bit PNG writing
    import struct
    import zlib

    def write_png(path, width, height, seed):
        rows = b""
        for y in range(height):
            row = bytes(((x * 7 + y * 13 + seed * 29 + c * 3) % 256)
                        for x in range(width) for c in range(3))
            rows += b"\x00" + row
        raw = zlib.compress(rows)

        def chunk(tag, payload):
            data = tag + payload
            return (struct.pack(">I", len(payload)) + data
                    + struct.pack(">I", zlib.crc32(data) & 0xFFFFFFFF))

        header = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", header)
                         + chunk(b"IDAT", raw) + chunk(b"IEND", b""))

    root = tmp_path_factory.mktemp("clean")
    for i in range(2):
        write_png(root / f"{i:02d}.png", 48, 32, i)
    return root


class TestHandle:
    def test_version_probe(self, handle):
        assert handle.probe().startswith("corrbench")

    def test_missing_binary_is_setup_error(self):
        h = ToolkitHandle(binary="/nonexistent/corrbench-binary")
        with pytest.raises(SetupError):
            h.probe()


class TestCorruptDataset:
    def test_toy_cardinality_passthrough(self, handle, toy_clean, tmp_path):
        view = corrupt_dataset(handle, toy_clean, tmp_path / "c",
                               profile="outdoor-5", seed=17)
        assert len(view) == 2 * 18 * 5
        assert view.profile == "outdoor-5"
        assert view.seed_root == 17

    def test_repeated_call_identical_manifest_digest(self, handle, toy_clean, tmp_path):
        v1 = corrupt_dataset(handle, toy_clean, tmp_path / "a", seed=3,
                             kinds="gaussian_noise,contrast")
        v2 = corrupt_dataset(handle, toy_clean, tmp_path / "b", seed=3,
                             kinds="gaussian_noise,contrast")
        assert v1.file_digest == v2.file_digest
        assert len(v1) == 2 * 2 * 5

    def test_invalid_profile_is_toolkit_error_naming_profile(self, handle, toy_clean,
                                                             tmp_path):
        with pytest.raises(ToolkitError) as exc:
            corrupt_dataset(handle, toy_clean, tmp_path / "x", profile="alpine-9")
        assert "profile" in str(exc.value)

    def test_entry_lookup(self, handle, toy_clean, tmp_path):
        view = corrupt_dataset(handle, toy_clean, tmp_path / "c2", seed=5,
                               kinds="contrast")
        entry = view.entry("00.png", "contrast", 3)
        assert entry["output_path"] == "contrast/3/00.png"


def monovit_dee_csv(tmp_path) -> Path:
    rows = {}
    with open(PRIMARY_TESTS_DATA / "kitti_c_dee.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            if row["model_id"] == "MonoViT":
                rows = {k: v for k, v in row.items()
                        if k not in ("model_id", "clean_dee_col")}
    path = tmp_path / "monovit.csv"
    path.write_text("kind,dee\n" + "\n".join(f"{k},{v}" for k, v in rows.items()) + "\n")
    return path


class TestReports:
    def test_baseline_self_report_mce_100(self, handle, tmp_path):
        # a baseline scored against itself: per-kind errors equal the
        # shipped baseline row, so every CE is exactly 100
        baseline = json.loads(
            (Path(__file__).resolve().parents[2]
             / "src/corrbench/data/baseline_kitti_monodepth2.json").read_text())
        csv_path = tmp_path / "base.csv"
        csv_path.write_text("kind,dee\n" + "\n".join(
            f"{k},{v}" for k, v in baseline["severity_mean_dee"].items()) + "\n")
        view = build_report(handle, tmp_path / "rep", dee_csv=csv_path,
                            model_id=baseline["model_id"],
                            clean_dee=baseline["clean_dee"], baseline="kitti")
        assert view.mce == 100.0

    def test_fixture_report_parity(self, handle, tmp_path):
        csv_path = monovit_dee_csv(tmp_path)
        view = build_report(handle, tmp_path / "rep", dee_csv=csv_path,
                            model_id="MonoViT", clean_dee=0.0995, baseline="kitti")
        # values equal the document fields exactly (no recomputation)
        doc = json.loads((tmp_path / "rep" / "report.json").read_text())
        assert view.mce == doc["report"]["mce"]
        assert view.ce("dark") == doc["report"]["ce"]["dark"]
        for kind in view.kinds():
            assert view.ce(kind) == doc["report"]["ce"][kind]
            assert view.rr(kind) == doc["report"]["rr"][kind]
        # and they carry the expected benchmark numbers
        assert abs(view.ce("dark") - 86.8) <= 0.1
        assert abs(view.mce - 79.33) <= 0.05
        assert view.model_id == "MonoViT" and view.baseline_id == "MonoDepth2_R18"

    def test_mutated_field_changes_view(self, handle, tmp_path):
        csv_path = monovit_dee_csv(tmp_path)
        build_report(handle, tmp_path / "rep", dee_csv=csv_path,
                     model_id="MonoViT", clean_dee=0.0995, baseline="kitti")
        report_path = tmp_path / "rep" / "report.json"
        doc = json.loads(report_path.read_text())
        doc["report"]["ce"]["dark"] = 123.4
        report_path.write_text(json.dumps(doc))
        view = load_report(report_path)
        assert view.ce("dark") == 123.4  # traceable to the document field

    def test_roundtrip_equals_direct_parse(self, handle, tmp_path):
        csv_path = monovit_dee_csv(tmp_path)
        view = build_report(handle, tmp_path / "rep", dee_csv=csv_path,
                            model_id="MonoViT", clean_dee=0.0995, baseline="kitti")
        direct = json.loads((tmp_path / "rep" / "report.json").read_text())
        assert view.document == direct

    def test_schema_version_mismatch(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"schema_version": 99, "report": {}}))
        with pytest.raises(VersionError):
            load_report(bad)

    def test_categories_accessor(self, handle, tmp_path):
        csv_path = monovit_dee_csv(tmp_path)
        view = build_report(handle, tmp_path / "rep", dee_csv=csv_path,
                            model_id="MonoViT", clean_dee=0.0995, baseline="kitti")
        weather = view.category("weather_lighting")
        assert abs(weather["mce"] - 72.92) <= 0.05
