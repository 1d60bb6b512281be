"""Subprocess driver and document views.

One subprocess per call; a handle is not thread-safe, so create one handle
per worker. The wire protocol is exactly the CLI's flags and the JSON/CSV
documents it writes; nothing is recomputed client-side.
"""

from __future__ import annotations

import hashlib
import json
import shutil
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path

SUPPORTED_SCHEMA_VERSION = 1


class ToolkitError(RuntimeError):
    """The toolkit subprocess exited nonzero; carries its stderr text."""

    def __init__(self, argv, returncode, stderr):
        self.argv = list(argv)
        self.returncode = returncode
        self.stderr = stderr
        super().__init__(
            f"corrbench exited {returncode} for {' '.join(self.argv)}: {stderr.strip()}")


class SetupError(RuntimeError):
    """The toolkit binary is missing or fails its version probe."""


class VersionError(RuntimeError):
    """A document carries an unsupported schema version."""


def default_binary() -> list[str]:
    """Prefer an installed console script; fall back to module execution."""
    exe = shutil.which("corrbench")
    if exe:
        return [exe]
    return [sys.executable, "-m", "corrbench.cli"]


@dataclass
class ToolkitHandle:
    """How to invoke the toolkit: argv prefix, working directory, config."""

    binary: list[str] | str | None = None
    workdir: str | None = None
    config: str | None = None
    _probed: str | None = field(default=None, repr=False)

    def argv_prefix(self) -> list[str]:
        if self.binary is None:
            return default_binary()
        if isinstance(self.binary, str):
            return [self.binary]
        return list(self.binary)

    def probe(self) -> str:
        """Check the binary exists and answers a version query; cached."""
        if self._probed is None:
            try:
                proc = subprocess.run(
                    self.argv_prefix() + ["--version"],
                    capture_output=True, text=True, cwd=self.workdir, timeout=60)
            except (FileNotFoundError, OSError) as exc:
                raise SetupError(f"toolkit binary not runnable: {exc}") from exc
            if proc.returncode != 0:
                raise SetupError(
                    f"version probe failed (exit {proc.returncode}): {proc.stderr.strip()}")
            self._probed = proc.stdout.strip() or proc.stderr.strip()
        return self._probed

    def run(self, *args: str) -> subprocess.CompletedProcess:
        self.probe()
        argv = self.argv_prefix()
        if self.config:
            argv += ["--config", self.config]
        argv += list(args)
        proc = subprocess.run(argv, capture_output=True, text=True, cwd=self.workdir)
        if proc.returncode != 0:
            raise ToolkitError(argv, proc.returncode, proc.stderr)
        return proc


def _check_schema(doc: dict, what: str) -> None:
    version = doc.get("schema_version")
    if version != SUPPORTED_SCHEMA_VERSION:
        raise VersionError(
            f"{what} schema_version {version!r} is not supported "
            f"(expected {SUPPORTED_SCHEMA_VERSION})")


class ManifestView:
    """Read-only view over a dataset manifest document."""

    def __init__(self, document: dict, raw_bytes: bytes):
        _check_schema(document, "manifest")
        self.document = document
        self.file_digest = hashlib.sha256(raw_bytes).hexdigest()

    @classmethod
    def from_file(cls, path: str | Path) -> "ManifestView":
        raw = Path(path).read_bytes()
        return cls(json.loads(raw.decode("utf-8")), raw)

    @property
    def profile(self) -> str:
        return self.document["profile"]

    @property
    def seed_root(self) -> int:
        return self.document["seed_root"]

    @property
    def entries(self) -> list[dict]:
        return self.document["entries"]

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, relative_path: str, kind: str, severity: int) -> dict:
        for e in self.entries:
            if (e["relative_path"], e["kind"], e["severity"]) == (
                    relative_path, kind, severity):
                return e
        raise KeyError((relative_path, kind, severity))


class ReportView:
    """Read-only view over a robustness report document.

    Accessors return the document's full-precision values verbatim.
    """

    def __init__(self, document: dict):
        _check_schema(document, "report")
        self.document = document
        self._report = document["report"]

    @classmethod
    def from_file(cls, path: str | Path) -> "ReportView":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(json.load(fh))

    @property
    def model_id(self) -> str:
        return self._report["model_id"]

    @property
    def baseline_id(self) -> str:
        return self._report["baseline_id"]

    @property
    def mce(self) -> float:
        return self._report["mce"]

    @property
    def mrr(self) -> float:
        return self._report["mrr"]

    @property
    def mdee(self) -> float:
        return self._report["mdee"]

    @property
    def clean_dee(self) -> float:
        return self._report["clean_dee"]

    def ce(self, kind: str) -> float:
        return self._report["ce"][kind]

    def rr(self, kind: str) -> float:
        return self._report["rr"][kind]

    def dee(self, kind: str, severity: int) -> float:
        return self._report["severity_curves"][kind][severity - 1]

    def kinds(self) -> list[str]:
        return sorted(self._report["ce"])

    def category(self, name: str) -> dict:
        return {
            "mce": self._report["category_mce"][name],
            "mrr": self._report["category_mrr"][name],
            "mdee": self._report["category_mdee"][name],
        }


def corrupt_dataset(handle: ToolkitHandle, clean_dir: str | Path,
                    out_dir: str | Path, profile: str = "outdoor-5",
                    seed: int = 0, jobs: int = 1,
                    kinds: str | None = None) -> ManifestView:
    """Run `corrupt` and return the parsed manifest."""
    args = ["corrupt", "--in", str(clean_dir), "--out", str(out_dir),
            "--profile", profile, "--seed", str(seed), "--jobs", str(jobs)]
    if kinds:
        args += ["--kinds", kinds]
    handle.run(*args)
    return ManifestView.from_file(Path(out_dir) / "manifest.json")


def evaluate(handle: ToolkitHandle, pred_root: str | Path, gt_root: str | Path,
             model_id: str, out_path: str | Path,
             manifest: str | Path | None = None,
             clean_list: str | Path | None = None,
             fmt: str = "png16", scale_divisor: float = 256.0,
             protocol: str | None = None) -> dict:
    """Run `evaluate` and return the parsed cells document."""
    args = ["evaluate", "--pred-root", str(pred_root), "--gt-root", str(gt_root),
            "--model-id", model_id, "--format", fmt,
            "--scale-divisor", str(scale_divisor), "--out", str(out_path)]
    if manifest:
        args += ["--manifest", str(manifest)]
    if clean_list:
        args += ["--clean-list", str(clean_list)]
    if protocol:
        args += ["--protocol", protocol]
    handle.run(*args)
    with open(out_path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def build_report(handle: ToolkitHandle, out_dir: str | Path,
                 cells: str | Path | None = None,
                 dee_csv: str | Path | None = None,
                 model_id: str | None = None,
                 clean_dee: float | None = None,
                 baseline: str | None = None) -> ReportView:
    """Run `report` and return the view over the written document."""
    args = ["report", "--out", str(out_dir)]
    if cells:
        args += ["--cells", str(cells)]
    if dee_csv:
        args += ["--dee-csv", str(dee_csv)]
    if model_id:
        args += ["--model-id", model_id]
    if clean_dee is not None:
        args += ["--clean-dee", str(clean_dee)]
    if baseline:
        args += ["--baseline", baseline]
    handle.run(*args)
    return ReportView.from_file(Path(out_dir) / "report.json")


def load_report(path: str | Path) -> ReportView:
    return ReportView.from_file(path)
