"""Dataset I/O and orchestration.

Walks a clean image tree, emits the corrupted dataset under
``out_dir/<kind>/<severity>/<relative_path>`` with a JSON manifest recording
the derived seed and content hash of every file; ingests ground-truth and
prediction rasters to produce per-(kind, severity) score cells; serializes
robustness reports (JSON + CSV side tables); and accumulates pixel
histograms.

Generation and evaluation are parallel over independent entries: every
random decision is derived from (seed_root, relative_path, kind, severity),
so results are identical under any worker count, and all outputs are
canonically ordered.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .corruptions import (
    CorruptionKind,
    CorruptionSpec,
    apply_corruption,
    kind_from_name,
    load_frost_assets,
    profile_kinds,
    profile_levels,
)
from .depthmetrics import DepthScores, EvalProtocol, aggregate_set, compute_scores
from .errors import (
    EmptyEvaluationError,
    InvalidRequestError,
    MissingPredictionError,
    ProfileError,
    SchemaVersionError,
)
import corrbench.fileio as fileio
from .imagecore import derive_seed, fnv1a_64
from .robustness import BaselineTable, DeeCell, RobustnessReport, summarize
from .severity import SeverityTable

SCHEMA_VERSION = 1
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    relative_path: str
    kind: str
    severity: int
    derived_seed: int
    output_path: str
    content_hash: int

    def key(self):
        return (self.relative_path, self.kind, self.severity)


@dataclass
class DatasetManifest:
    base_dataset: str
    profile: str
    seed_root: int
    severity_table_hash: int
    frost_asset_hash: int
    entries: list[ManifestEntry] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_document(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "base_dataset": self.base_dataset,
            "profile": self.profile,
            "seed_root": self.seed_root,
            "severity_table_hash": self.severity_table_hash,
            "frost_asset_hash": self.frost_asset_hash,
            "entries": [
                {
                    "relative_path": e.relative_path,
                    "kind": e.kind,
                    "severity": e.severity,
                    "derived_seed": e.derived_seed,
                    "output_path": e.output_path,
                    "content_hash": e.content_hash,
                }
                for e in self.entries
            ],
        }

    def to_json_bytes(self) -> bytes:
        return (json.dumps(self.to_document(), sort_keys=True, indent=1) + "\n").encode()

    def content_hash(self) -> int:
        return fnv1a_64(self.to_json_bytes())

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_json_bytes())

    @classmethod
    def from_document(cls, doc: dict) -> "DatasetManifest":
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise SchemaVersionError(
                f"manifest schema_version {doc.get('schema_version')!r} unsupported")
        entries = [ManifestEntry(**e) for e in doc["entries"]]
        return cls(
            base_dataset=doc["base_dataset"],
            profile=doc["profile"],
            seed_root=doc["seed_root"],
            severity_table_hash=doc["severity_table_hash"],
            frost_asset_hash=doc["frost_asset_hash"],
            entries=entries,
        )

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_document(json.load(fh))


def list_clean_images(clean_dir: str | Path) -> list[str]:
    root = Path(clean_dir)
    rels = sorted(
        p.relative_to(root).as_posix()
        for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
    return rels


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4)
def _table_from_json(table_json: str) -> SeverityTable:
    return SeverityTable.from_document(json.loads(table_json))


@lru_cache(maxsize=2)
def _assets_from_dir(frost_dir: str):
    return load_frost_assets(frost_dir)


def _render_entry(task) -> tuple:
    """Worker: render one (image, kind, severity) cell; returns an entry tuple.

    Module-level and argument-pure so it can run in a process pool.
    """
    (clean_dir, out_dir, rel, kind_name, severity, seed_root,
     table_json, frost_dir) = task
    try:
        kind = CorruptionKind[kind_name]
        table = _table_from_json(table_json)
        assets = _assets_from_dir(frost_dir) if frost_dir else None
        img = fileio.load_image(Path(clean_dir) / rel)
        seed = derive_seed(seed_root, rel, kind, severity)
        out = apply_corruption(img, CorruptionSpec(kind, severity, seed), table, assets)
        out_rel = Path(kind_name) / str(severity) / Path(rel).with_suffix(".png")
        fileio.save_image(Path(out_dir) / out_rel, out)
        return ("ok", rel, kind_name, severity, seed,
                out_rel.as_posix(), fileio.image_content_hash(out))
    except Exception as exc:  # per-file failures must not kill the run
        return ("error", rel, kind_name, severity, f"{type(exc).__name__}: {exc}")


def generate_dataset(clean_dir: str | Path, out_dir: str | Path,
                     kinds: list[CorruptionKind] | None = None,
                     profile: str = "outdoor-5",
                     seed_root: int = 0,
                     table: SeverityTable | None = None,
                     jobs: int = 1,
                     frost_asset_dir: str | None = None,
                     base_dataset: str | None = None,
                     severities: list[int] | None = None,
                     ) -> tuple[DatasetManifest, list[dict]]:
    """Corrupt every clean image for every kind and severity of the profile.

    Idempotent: when out_dir already holds a manifest, entries whose output
    file still matches its recorded content hash are verified and kept
    instead of re-rendered. Returns (manifest, per-file errors).
    """
    clean_dir = Path(clean_dir)
    out_dir = Path(out_dir)
    table = table or SeverityTable.default()
    kinds = list(kinds) if kinds is not None else list(profile_kinds(profile))
    if not kinds:
        raise InvalidRequestError("empty corruption kind list")
    bad = [k for k in kinds if k not in profile_kinds(profile)]
    if bad:
        raise ProfileError(
            f"kinds {[k.name for k in bad]} are not part of profile {profile!r}")
    levels = severities or list(range(1, profile_levels(profile) + 1))
    if any(not 1 <= s <= profile_levels(profile) for s in levels):
        raise InvalidRequestError(f"severities {levels} invalid for {profile!r}")

    rels = list_clean_images(clean_dir)
    if not rels:
        raise InvalidRequestError(f"no images found under {clean_dir}")

    frost_hash = 0
    if frost_asset_dir:
        names = sorted(p.name for p in Path(frost_asset_dir).iterdir())
        frost_hash = fnv1a_64(("assets:" + ",".join(names)).encode())
    else:
        frost_hash = fnv1a_64(b"procedural:v1")

    table_json = json.dumps(table.to_document(), sort_keys=True)

    # reuse verified outputs from a previous manifest when present
    prior: dict[tuple, ManifestEntry] = {}
    manifest_path = out_dir / "manifest.json"
    if manifest_path.exists():
        try:
            old = DatasetManifest.load(manifest_path)
            if (old.seed_root == seed_root and old.profile == profile
                    and old.severity_table_hash == table.content_hash()):
                prior = {e.key(): e for e in old.entries}
        except SchemaVersionError:
            prior = {}

    tasks = []
    kept: list[ManifestEntry] = []
    for rel in rels:
        for kind in kinds:
            for severity in levels:
                key = (rel, kind.name, severity)
                if key in prior:
                    entry = prior[key]
                    out_file = out_dir / entry.output_path
                    if out_file.exists():
                        try:
                            on_disk = fileio.image_content_hash(fileio.load_image(out_file))
                        except Exception:
                            on_disk = None
                        if on_disk == entry.content_hash:
                            kept.append(entry)
                            continue
                tasks.append((str(clean_dir), str(out_dir), rel, kind.name,
                              severity, seed_root, table_json, frost_asset_dir))

    results = []
    if tasks:
        if jobs <= 1:
            results = [_render_entry(t) for t in tasks]
        else:
            chunk = max(1, len(tasks) // (jobs * 8))
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_render_entry, tasks, chunksize=chunk))

    errors = []
    entries = kept
    for res in results:
        if res[0] == "ok":
            _, rel, kind_name, severity, seed, out_rel, chash = res
            entries.append(ManifestEntry(rel, kind_name, severity, seed, out_rel, chash))
        else:
            _, rel, kind_name, severity, msg = res
            errors.append({"relative_path": rel, "kind": kind_name,
                           "severity": severity, "error": msg})

    entries.sort(key=lambda e: e.key())
    manifest = DatasetManifest(
        base_dataset=base_dataset or clean_dir.name,
        profile=profile,
        seed_root=seed_root,
        severity_table_hash=table.content_hash(),
        frost_asset_hash=frost_hash,
        entries=entries,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest.save(manifest_path)
    return manifest, errors


def verify_manifest(manifest: DatasetManifest, clean_dir: str | Path,
                    out_dir: str | Path, sample: int,
                    table: SeverityTable | None = None,
                    frost_asset_dir: str | None = None) -> list[dict]:
    """Re-render a deterministic sample of manifest entries and compare hashes.

    The sample is seeded by the manifest's own content hash so audits are
    reproducible. Returns a list of mismatch records (empty = audit passed).
    """
    from .imagecore import DeterministicRng

    table = table or SeverityTable.default()
    entries = sorted(manifest.entries, key=lambda e: e.key())
    if sample >= len(entries):
        chosen = entries
    else:
        rng = DeterministicRng(manifest.content_hash())
        order = np.argsort(rng.uniforms(len(entries)), kind="stable")
        chosen = [entries[int(i)] for i in sorted(order[:sample])]

    assets = _assets_from_dir(frost_asset_dir) if frost_asset_dir else None
    mismatches = []
    for entry in chosen:
        kind = kind_from_name(entry.kind)
        seed = derive_seed(manifest.seed_root, entry.relative_path, kind, entry.severity)
        record = None
        if seed != entry.derived_seed:
            record = "derived seed mismatch"
        else:
            img = fileio.load_image(Path(clean_dir) / entry.relative_path)
            out = apply_corruption(img, CorruptionSpec(kind, entry.severity, seed),
                                   table, assets)
            if fileio.image_content_hash(out) != entry.content_hash:
                record = "content hash mismatch"
            else:
                disk = Path(out_dir) / entry.output_path
                if not disk.exists():
                    record = "output file missing"
                elif fileio.image_content_hash(fileio.load_image(disk)) != entry.content_hash:
                    record = "on-disk file diverges from manifest"
        if record:
            mismatches.append({"relative_path": entry.relative_path,
                               "kind": entry.kind, "severity": entry.severity,
                               "problem": record})
    return mismatches


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PredictionSet:
    """Where a model's predictions live and how they are encoded."""

    model_id: str
    root: str
    fmt: str = "png16"  # "png16" or "pfm"
    scale_divisor: float = 256.0

    def path_for(self, relative_path: str, kind: str | None = None,
                 severity: int | None = None) -> Path:
        suffix = ".png" if self.fmt == "png16" else ".pfm"
        rel = Path(relative_path).with_suffix(suffix)
        if kind is None:
            return Path(self.root) / rel
        return Path(self.root) / kind / str(severity) / rel


@dataclass(frozen=True)
class GroundTruthSet:
    root: str
    scale_divisor: float = 256.0

    def path_for(self, relative_path: str) -> Path:
        return Path(self.root) / Path(relative_path).with_suffix(".png")


def _score_one(pred_path: Path, gt_path: Path, pred_set: PredictionSet,
               gt_set: GroundTruthSet, proto: EvalProtocol) -> DepthScores:
    pred = fileio.load_depth(pred_path, pred_set.fmt, pred_set.scale_divisor)
    gt = fileio.load_depth_png16(gt_path, gt_set.scale_divisor)
    return compute_scores(pred, gt, proto)


def evaluate_clean(pred_set: PredictionSet, gt_set: GroundTruthSet,
                   relative_paths: list[str], proto: EvalProtocol) -> DepthScores:
    """Aggregate clean-set scores over a list of images."""
    if not relative_paths:
        raise EmptyEvaluationError("no images to evaluate")
    paths = [(pred_set.path_for(rel), gt_set.path_for(rel)) for rel in sorted(relative_paths)]
    missing = [str(p) for p, _ in paths if not p.exists()]
    if missing:
        raise MissingPredictionError(f"missing prediction files: {missing[:5]}")
    scores = [_score_one(p, g, pred_set, gt_set, proto) for p, g in paths]
    return aggregate_set(scores)


def evaluate_cells(pred_set: PredictionSet, gt_set: GroundTruthSet,
                   manifest: DatasetManifest, proto: EvalProtocol,
                   kinds: list[CorruptionKind] | None = None,
                   severities: list[int] | None = None,
                   ) -> tuple[list[DeeCell], dict]:
    """Score every requested (kind, severity) cell of a corrupted benchmark.

    Completeness is checked up front: one missing prediction aborts the whole
    evaluation rather than producing a partial report.
    """
    wanted_kinds = {k.name for k in (kinds or profile_kinds(manifest.profile))}
    wanted_levels = set(severities or range(1, profile_levels(manifest.profile) + 1))

    groups: dict[tuple[str, int], list[str]] = {}
    for e in manifest.entries:
        if e.kind in wanted_kinds and e.severity in wanted_levels:
            groups.setdefault((e.kind, e.severity), []).append(e.relative_path)
    if not groups:
        raise EmptyEvaluationError("manifest holds no entries for the requested cells")

    missing = []
    for (kind, severity), rels in sorted(groups.items()):
        for rel in rels:
            p = pred_set.path_for(rel, kind, severity)
            if not p.exists():
                missing.append(str(p))
    if missing:
        raise MissingPredictionError(
            f"{len(missing)} prediction files missing, first: {missing[0]}")

    cells: list[DeeCell] = []
    detail: dict[tuple[str, int], DepthScores] = {}
    for (kind, severity), rels in sorted(groups.items()):
        scores = [
            _score_one(pred_set.path_for(rel, kind, severity),
                       gt_set.path_for(rel), pred_set, gt_set, proto)
            for rel in sorted(rels)
        ]
        agg = aggregate_set(scores)
        detail[(kind, severity)] = agg
        cells.append(DeeCell(pred_set.model_id, kind_from_name(kind), severity, agg.dee))
    return cells, detail


def evaluate_external_kinds(pred_set: PredictionSet, gt_set: GroundTruthSet,
                            external_root: str | Path, proto: EvalProtocol,
                            prefix: str = "style",
                            ) -> dict[str, DepthScores]:
    """Score externally produced corruption sets (e.g. stylized renderings).

    ``external_root/<name>/<relative_path>`` trees are ingested as corruption
    kinds "<prefix>:<name>" with a single severity level; predictions follow
    the same layout under the prediction root. Returns per-kind aggregated
    scores (the composite-error machinery applies; error ratios against a
    baseline do not, since external kinds have no severity table). Synthesis
    of such sets is out of scope; only ingestion is supported.
    """
    root = Path(external_root)
    names = sorted(p.name for p in root.iterdir() if p.is_dir())
    if not names:
        raise EmptyEvaluationError(f"no external kind directories under {root}")
    suffix = ".png" if pred_set.fmt == "png16" else ".pfm"
    results: dict[str, DepthScores] = {}
    for name in names:
        rels = list_clean_images(root / name)
        if not rels:
            raise EmptyEvaluationError(f"external kind {name!r} holds no images")
        pred_paths = {rel: Path(pred_set.root) / name / Path(rel).with_suffix(suffix)
                      for rel in rels}
        missing = [str(p) for p in pred_paths.values() if not p.exists()]
        if missing:
            raise MissingPredictionError(
                f"{len(missing)} prediction files missing for {prefix}:{name}, "
                f"first: {missing[0]}")
        scores = [
            _score_one(pred_paths[rel], gt_set.path_for(rel), pred_set, gt_set, proto)
            for rel in sorted(rels)
        ]
        results[f"{prefix}:{name}"] = aggregate_set(scores)
    return results


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class ReportDocument:
    """Serializable wrapper for a robustness report plus provenance."""

    document: dict

    @classmethod
    def build(cls, report: RobustnessReport, provenance: dict | None = None) -> "ReportDocument":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "report": {
                "model_id": report.model_id,
                "baseline_id": report.baseline_id,
                "profile": report.profile,
                "clean_dee": report.clean_dee,
                "mce": report.mce,
                "mrr": report.mrr,
                "mdee": report.mdee,
                "ce": {k.name: v for k, v in report.ce.items()},
                "rr": {k.name: v for k, v in report.rr.items()},
                "kind_mean_dee": {k.name: v for k, v in report.kind_mean_dee.items()},
                "severity_curves": {k.name: v for k, v in report.severity_curves.items()},
                "category_mce": {c.value: v for c, v in report.category_mce.items()},
                "category_mrr": {c.value: v for c, v in report.category_mrr.items()},
                "category_mdee": {c.value: v for c, v in report.category_mdee.items()},
            },
            "presentation": {
                "mce": round(report.mce, 1),
                "mrr": round(report.mrr, 1),
                "mdee": round(report.mdee, 3),
                "ce": {k.name: round(v, 1) for k, v in report.ce.items()},
                "rr": {k.name: round(v, 1) for k, v in report.rr.items()},
            },
            "provenance": provenance or {},
        }
        return cls(doc)

    def to_json_bytes(self) -> bytes:
        return (json.dumps(self.document, sort_keys=True, indent=1) + "\n").encode()

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_json_bytes())

    @classmethod
    def load(cls, path: str | Path) -> "ReportDocument":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise SchemaVersionError(
                f"report schema_version {doc.get('schema_version')!r} unsupported")
        return cls(doc)


def build_report(cells: list[DeeCell], clean_dee: float, baseline: BaselineTable,
                 provenance: dict | None = None) -> ReportDocument:
    report = summarize(cells, baseline, clean_dee)
    return ReportDocument.build(report, provenance)


def write_report_csvs(doc: ReportDocument, out_dir: str | Path) -> list[Path]:
    """Emit the CSV side tables: the kinds x severities matrix (which is also
    the per-severity curve table), per-kind CE/RR, and category rollups."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rep = doc.document["report"]
    written = []

    curves = rep["severity_curves"]
    levels = max(len(v) for v in curves.values())
    path = out_dir / "dee_matrix.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("kind," + ",".join(f"severity_{i}" for i in range(1, levels + 1)) + "\n")
        for kind in sorted(curves, key=lambda n: CorruptionKind[n].value):
            fh.write(kind + "," + ",".join(repr(v) for v in curves[kind]) + "\n")
    written.append(path)

    path = out_dir / "ce_rr.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("kind,ce_percent,rr_percent,mean_dee\n")
        for kind in sorted(rep["ce"], key=lambda n: CorruptionKind[n].value):
            fh.write(f"{kind},{rep['ce'][kind]!r},{rep['rr'][kind]!r},"
                     f"{rep['kind_mean_dee'][kind]!r}\n")
    written.append(path)

    path = out_dir / "categories.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("category,mce,mrr,mdee\n")
        for cat in rep["category_mce"]:
            fh.write(f"{cat},{rep['category_mce'][cat]!r},"
                     f"{rep['category_mrr'][cat]!r},{rep['category_mdee'][cat]!r}\n")
        fh.write(f"overall,{rep['mce']!r},{rep['mrr']!r},{rep['mdee']!r}\n")
    written.append(path)
    return written


# ---------------------------------------------------------------------------
# histogram utility
# ---------------------------------------------------------------------------

def pixel_histogram(image_dir: str | Path, bins: int = 256) -> np.ndarray:
    """Accumulate per-channel pixel-value histograms over a directory tree.

    Returns an array of shape (3, bins) of counts over [0, 1].
    """
    if bins < 1:
        raise InvalidRequestError("bins must be >= 1")
    rels = list_clean_images(image_dir)
    if not rels:
        raise EmptyEvaluationError(f"no decodable images under {image_dir}")
    counts = np.zeros((3, bins), dtype=np.int64)
    for rel in rels:
        img = fileio.load_image(Path(image_dir) / rel)
        idx = np.minimum((img.data * bins).astype(np.int64), bins - 1)
        for c in range(3):
            counts[c] += np.bincount(idx[:, :, c].ravel(), minlength=bins)
    return counts


def save_histogram_csv(counts: np.ndarray, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    bins = counts.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("bin_low,bin_high,red,green,blue\n")
        for i in range(bins):
            fh.write(f"{i / bins!r},{(i + 1) / bins!r},"
                     f"{counts[0, i]},{counts[1, i]},{counts[2, i]}\n")
