"""Command-line entry point: corrupt, evaluate, report, histogram, verify.

Progress and diagnostics go to stderr; data requested on stdout (``--out -``)
stays clean for pipelines. Exit codes: 0 success, 1 validation error,
2 partial-failure run (some files failed but the run completed).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import harness
from .corruptions import CorruptionKind, kind_from_name, profile_kinds, profile_levels
from .depthmetrics import EvalProtocol
from .errors import CorrbenchError, InvalidRequestError
from .robustness import BaselineTable, DeeCell
from .severity import SeverityTable

CONFIG_ENV = "CORRBENCH_CONFIG"


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrbench",
        description="Deterministic corruption-benchmark synthesis and "
                    "depth-robustness evaluation.")
    from . import __version__
    parser.add_argument("--version", action="version",
                        version=f"corrbench {__version__}")
    parser.add_argument("--config", default=os.environ.get(CONFIG_ENV),
                        help=f"JSON config file (default: ${CONFIG_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corrupt", help="generate a corrupted dataset with manifest")
    p.add_argument("--in", dest="clean_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--profile", default=None, choices=["outdoor-5", "indoor-4"])
    p.add_argument("--seed", type=int, default=None, help="seed root (default 0)")
    p.add_argument("--kinds", default=None,
                   help="comma-separated corruption kinds (default: all in profile)")
    p.add_argument("--severities", default=None,
                   help="comma-separated severity levels (default: all in profile)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--table", default=None, help="severity table JSON path")
    p.add_argument("--frost-assets", default=None)
    p.add_argument("--dataset-id", default=None)

    p = sub.add_parser("evaluate", help="score predictions into measurement cells")
    p.add_argument("--manifest", default=None, help="manifest of the corrupted set")
    p.add_argument("--clean-list", default=None,
                   help="text file of relative paths (clean-set evaluation)")
    p.add_argument("--pred-root", required=True)
    p.add_argument("--model-id", required=True)
    p.add_argument("--format", dest="fmt", default="png16", choices=["png16", "pfm"])
    p.add_argument("--scale-divisor", type=float, default=256.0)
    p.add_argument("--gt-root", required=True)
    p.add_argument("--gt-scale-divisor", type=float, default=None,
                   help="ground-truth png16 divisor (default 256 outdoor / 1000 indoor)")
    p.add_argument("--protocol", default=None, choices=["kitti", "nyu"])
    p.add_argument("--kinds", default=None)
    p.add_argument("--severities", default=None)
    p.add_argument("--out", default="-", help="cells JSON path, - for stdout")

    p = sub.add_parser("report", help="aggregate cells into a robustness report")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--cells", default=None, help="cells JSON from `evaluate`")
    src.add_argument("--dee-csv", default=None,
                     help="CSV of kind,dee (severity means) or kind,severity,dee")
    p.add_argument("--model-id", default=None)
    p.add_argument("--clean-dee", type=float, default=None)
    p.add_argument("--baseline", default=None,
                   help="'kitti', 'nyu', or a baseline JSON path")
    p.add_argument("--out", default=None, help="output directory for JSON + CSVs")

    p = sub.add_parser("histogram", help="per-channel pixel histogram of a directory")
    p.add_argument("--in", dest="image_dir", required=True)
    p.add_argument("--bins", type=int, default=256)
    p.add_argument("--out", default="-", help="CSV path, - for stdout")

    p = sub.add_parser("verify", help="re-render a sample of a manifest and audit hashes")
    p.add_argument("--manifest", required=True)
    p.add_argument("--clean", default=None,
                   help="clean dataset root (default: manifest base_dataset as a path)")
    p.add_argument("--out", default=None,
                   help="corrupted tree root (default: manifest directory)")
    p.add_argument("--sample", type=int, default=50)
    p.add_argument("--table", default=None)
    p.add_argument("--frost-assets", default=None)
    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _pick(cli_value, config: dict, key: str, default):
    if cli_value is not None:
        return cli_value
    if key in config:
        return config[key]
    return default


def _parse_kinds(text: str | None):
    if text is None:
        return None
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise InvalidRequestError("empty kind list")
    return [kind_from_name(n) for n in names]


def _parse_levels(text: str | None):
    if text is None:
        return None
    return [int(t) for t in text.split(",") if t.strip()]


def _severity_table(path: str | None, config: dict) -> SeverityTable:
    path = path or config.get("severity_table")
    return SeverityTable.from_file(path) if path else SeverityTable.default()


def _protocol(name: str | None, config: dict) -> EvalProtocol:
    name = name or config.get("protocol", "kitti")
    if isinstance(name, dict):
        crop = name.get("crop")
        return EvalProtocol(
            min_depth=name.get("min_depth", 1e-3),
            max_depth=name.get("max_depth", 80.0),
            crop=tuple(crop) if crop else None,
            median_scaling=name.get("median_scaling", True))
    return EvalProtocol.kitti() if name == "kitti" else EvalProtocol.nyu()


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8"), True


def cmd_corrupt(args, config) -> int:
    table = _severity_table(args.table, config)
    profile = _pick(args.profile, config, "profile", "outdoor-5")
    seed = _pick(args.seed, config, "seed_root", 0)
    manifest, errors = harness.generate_dataset(
        args.clean_dir, args.out_dir,
        kinds=_parse_kinds(args.kinds),
        profile=profile,
        seed_root=seed,
        table=table,
        jobs=args.jobs,
        frost_asset_dir=args.frost_assets or config.get("frost_asset_dir"),
        base_dataset=args.dataset_id,
        severities=_parse_levels(args.severities),
    )
    _log(f"wrote {len(manifest.entries)} entries to {args.out_dir} "
         f"(manifest hash {manifest.content_hash():#018x})")
    for err in errors[:10]:
        _log(f"error: {err['relative_path']} [{err['kind']}/{err['severity']}]: {err['error']}")
    if errors:
        _log(f"{len(errors)} file(s) failed")
        return 2
    return 0


def cmd_evaluate(args, config) -> int:
    if args.manifest and args.clean_list:
        raise InvalidRequestError(
            "--manifest and --clean-list are mutually exclusive")
    pred = harness.PredictionSet(args.model_id, args.pred_root, args.fmt,
                                 args.scale_divisor)
    proto = _protocol(args.protocol, config)
    gt_scale = args.gt_scale_divisor
    if gt_scale is None:
        gt_scale = config.get(
            "gt_scale_divisor", 1000.0 if args.protocol == "nyu" else 256.0)
    gt = harness.GroundTruthSet(args.gt_root, gt_scale)

    doc = {"schema_version": harness.SCHEMA_VERSION, "model_id": args.model_id,
           "clean_dee": None, "cells": []}
    if args.manifest:
        manifest = harness.DatasetManifest.load(args.manifest)
        doc["profile"] = manifest.profile
        cells, detail = harness.evaluate_cells(
            pred, gt, manifest, proto,
            kinds=_parse_kinds(args.kinds),
            severities=_parse_levels(args.severities))
        for cell in cells:
            scores = detail[(cell.kind.name, cell.severity)]
            doc["cells"].append({"kind": cell.kind.name, "severity": cell.severity,
                                 "dee": cell.dee, "scores": scores.as_dict()})
    elif args.clean_list:
        rels = [line.strip() for line in Path(args.clean_list).read_text().splitlines()
                if line.strip()]
        agg = harness.evaluate_clean(pred, gt, rels, proto)
        doc["clean_dee"] = agg.dee
        doc["clean_scores"] = agg.as_dict()
    else:
        raise InvalidRequestError("evaluate needs --manifest or --clean-list")

    out, close = _open_out(args.out)
    json.dump(doc, out, sort_keys=True, indent=1)
    out.write("\n")
    if close:
        out.close()
        _log(f"wrote {args.out}")
    return 0


def _cells_from_csv(path: str, model_id: str, profile: str) -> list[DeeCell]:
    levels = profile_levels(profile)
    cells = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InvalidRequestError(f"{path}: empty CSV")
        fields = set(reader.fieldnames)
        for row in reader:
            kind = kind_from_name(row["kind"])
            if "severity" in fields:
                cells.append(DeeCell(model_id, kind, int(row["severity"]),
                                     float(row["dee"])))
            else:
                # severity-mean row: replicate across levels (ratio-safe)
                for s in range(1, levels + 1):
                    cells.append(DeeCell(model_id, kind, s, float(row["dee"])))
    return cells


def cmd_report(args, config) -> int:
    baseline_name = _pick(args.baseline, config, "baseline", "kitti")
    if baseline_name in ("kitti", "nyu"):
        baseline = BaselineTable.shipped(baseline_name)
    else:
        baseline = BaselineTable.from_file(baseline_name)

    provenance = {"baseline_id": baseline.model_id}
    if args.cells:
        with open(args.cells, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        model_id = args.model_id or doc.get("model_id", "model")
        clean_dee = args.clean_dee if args.clean_dee is not None else doc.get("clean_dee")
        cells = [DeeCell(model_id, kind_from_name(c["kind"]), c["severity"], c["dee"])
                 for c in doc["cells"]]
        provenance["cells_source"] = args.cells
    else:
        model_id = args.model_id or Path(args.dee_csv).stem
        clean_dee = args.clean_dee
        cells = _cells_from_csv(args.dee_csv, model_id, baseline.profile)
        provenance["cells_source"] = args.dee_csv
    if clean_dee is None:
        raise InvalidRequestError("a clean-set score is required (--clean-dee)")

    report_doc = harness.build_report(cells, clean_dee, baseline, provenance)
    rep = report_doc.document["report"]
    print(f"mCE {rep['mce']:.1f}  mRR {rep['mrr']:.1f}  mDEE {rep['mdee']:.3f}")
    if args.out:
        out_dir = Path(args.out)
        report_doc.save(out_dir / "report.json")
        harness.write_report_csvs(report_doc, out_dir)
        _log(f"wrote report.json and CSV tables to {out_dir}")
    return 0


def cmd_histogram(args, config) -> int:
    counts = harness.pixel_histogram(args.image_dir, args.bins)
    if args.out == "-":
        bins = counts.shape[1]
        sys.stdout.write("bin_low,bin_high,red,green,blue\n")
        for i in range(bins):
            sys.stdout.write(f"{i / bins!r},{(i + 1) / bins!r},"
                             f"{counts[0, i]},{counts[1, i]},{counts[2, i]}\n")
    else:
        harness.save_histogram_csv(counts, args.out)
        _log(f"wrote {args.out}")
    return 0


def cmd_verify(args, config) -> int:
    manifest = harness.DatasetManifest.load(args.manifest)
    clean_dir = args.clean or manifest.base_dataset
    out_dir = args.out or str(Path(args.manifest).parent)
    if not Path(clean_dir).is_dir():
        raise InvalidRequestError(
            f"clean dataset directory {clean_dir!r} not found; pass --clean")
    table = _severity_table(args.table, config)
    mismatches = harness.verify_manifest(
        manifest, clean_dir, out_dir, args.sample, table,
        args.frost_assets or config.get("frost_asset_dir"))
    checked = min(args.sample, len(manifest.entries))
    if mismatches:
        for m in mismatches[:10]:
            _log(f"mismatch: {m['relative_path']} [{m['kind']}/{m['severity']}]: "
                 f"{m['problem']}")
        _log(f"verify FAILED: {len(mismatches)}/{checked} sampled entries diverged")
        return 1
    _log(f"verify OK: {checked} sampled entries match the manifest")
    return 0


COMMANDS = {
    "corrupt": cmd_corrupt,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
    "histogram": cmd_histogram,
    "verify": cmd_verify,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        config = _load_config(args.config)
        return COMMANDS[args.command](args, config)
    except CorrbenchError as exc:
        _log(f"error: {exc}")
        return 1
    except FileNotFoundError as exc:
        _log(f"error: {exc}")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
