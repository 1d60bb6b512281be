"""Corruption Error, Resilience Rate, and their aggregation into reports.

Per corruption kind i with severity levels l = 1..L, against a baseline
model b and a clean-set score:

    CE_i = 100 * sum_l DEE_il / sum_l DEE_il^b
    RR_i = 100 * sum_l (1 - DEE_il) / (L * (1 - DEE_clean))

mCE / mRR are arithmetic means over the kinds; a baseline evaluated against
itself scores 100 everywhere. Reports retain the full per-severity cells;
severity-averaged tables are derived views.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .corruptions import Category, CorruptionKind, profile_kinds, profile_levels
from .errors import (
    DegenerateBaselineError,
    DegenerateCleanError,
    InvalidParameterError,
    MisalignedCellsError,
    MissingCellsError,
    ProfileError,
)


@dataclass(frozen=True)
class DeeCell:
    """One (model, kind, severity) -> composite-error measurement."""

    model_id: str
    kind: CorruptionKind
    severity: int
    dee: float

    def __post_init__(self):
        if self.dee < 0:
            raise InvalidParameterError(f"dee must be >= 0, got {self.dee}")


class BaselineTable:
    """Complete per-(kind, severity) error table of the reference model."""

    def __init__(self, model_id: str, profile: str,
                 cells: dict[CorruptionKind, dict[int, float]], clean_dee: float):
        self.model_id = model_id
        self.profile = profile
        self.clean_dee = float(clean_dee)
        self.cells = {k: dict(v) for k, v in cells.items()}
        levels = profile_levels(profile)
        for kind in profile_kinds(profile):
            got = self.cells.get(kind, {})
            missing = [(kind.name, s) for s in range(1, levels + 1) if s not in got]
            if missing:
                raise MissingCellsError(missing)
            if any(v <= 0 for v in got.values()):
                raise DegenerateBaselineError(
                    f"baseline {model_id} has a non-positive error for {kind.name}")

    def severity_sum(self, kind: CorruptionKind) -> float:
        return float(sum(self.cells[kind].values()))

    @classmethod
    def from_severity_means(cls, model_id: str, profile: str,
                            mean_dee: dict[str, float], clean_dee: float) -> "BaselineTable":
        """Expand per-kind severity-mean errors by replicating across levels.

        Valid for error ratios: with equal per-level values the ratio of sums
        reduces to the ratio of means.
        """
        levels = profile_levels(profile)
        cells = {
            CorruptionKind[name]: {s: float(v) for s in range(1, levels + 1)}
            for name, v in mean_dee.items()
        }
        return cls(model_id, profile, cells, clean_dee)

    @classmethod
    def from_document(cls, doc: dict) -> "BaselineTable":
        return cls.from_severity_means(
            doc["model_id"], doc["profile"], doc["severity_mean_dee"], doc["clean_dee"])

    @classmethod
    def from_file(cls, path: str | Path) -> "BaselineTable":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_document(json.load(fh))

    @classmethod
    def shipped(cls, name: str) -> "BaselineTable":
        """Load one of the packaged baselines: "kitti" or "nyu"."""
        fname = {"kitti": "baseline_kitti_monodepth2.json",
                 "nyu": "baseline_nyu_adabins.json"}.get(name)
        if fname is None:
            raise InvalidParameterError(f"unknown shipped baseline {name!r}")
        ref = resources.files("corrbench.data").joinpath(fname)
        return cls.from_document(json.loads(ref.read_text(encoding="utf-8")))


@dataclass
class RobustnessReport:
    """Per-kind and rolled-up robustness scores, all at full precision."""

    model_id: str
    baseline_id: str
    profile: str
    clean_dee: float
    ce: dict[CorruptionKind, float]
    rr: dict[CorruptionKind, float]
    kind_mean_dee: dict[CorruptionKind, float]
    severity_curves: dict[CorruptionKind, list[float]]
    mce: float = field(init=False)
    mrr: float = field(init=False)
    mdee: float = field(init=False)
    category_mce: dict[Category, float] = field(init=False)
    category_mrr: dict[Category, float] = field(init=False)
    category_mdee: dict[Category, float] = field(init=False)

    def __post_init__(self):
        kinds = sorted(self.ce, key=int)
        self.mce = _mean([self.ce[k] for k in kinds])
        self.mrr = _mean([self.rr[k] for k in kinds])
        self.mdee = _mean([self.kind_mean_dee[k] for k in kinds])
        self.category_mce = {}
        self.category_mrr = {}
        self.category_mdee = {}
        for cat in Category:
            members = [k for k in kinds if k.category is cat]
            if not members:
                continue
            self.category_mce[cat] = _mean([self.ce[k] for k in members])
            self.category_mrr[cat] = _mean([self.rr[k] for k in members])
            self.category_mdee[cat] = _mean([self.kind_mean_dee[k] for k in members])


def _mean(vals) -> float:
    return float(sum(vals) / len(vals))


def _sorted_cells(cells: list[DeeCell]) -> list[DeeCell]:
    return sorted(cells, key=lambda c: (int(c.kind), c.severity))


def corruption_error(model_cells: list[DeeCell], baseline_cells: list[DeeCell]) -> float:
    """CE as a percentage for one corruption kind."""
    m = _sorted_cells(model_cells)
    b = _sorted_cells(baseline_cells)
    if not m or len(m) != len(b):
        raise MisalignedCellsError(
            f"model has {len(m)} cells, baseline has {len(b)}")
    for mc, bc in zip(m, b):
        if mc.kind != bc.kind or mc.severity != bc.severity:
            raise MisalignedCellsError(
                f"cells disagree at ({mc.kind.name}, {mc.severity}) vs "
                f"({bc.kind.name}, {bc.severity})")
    kinds = {c.kind for c in m}
    if len(kinds) != 1:
        raise MisalignedCellsError(f"cells span multiple kinds: {sorted(k.name for k in kinds)}")
    denom = sum(c.dee for c in b)
    if denom <= 0:
        raise DegenerateBaselineError("baseline error sum is zero")
    return 100.0 * sum(c.dee for c in m) / denom


def resilience_rate(model_cells: list[DeeCell], clean_dee: float) -> float:
    """RR as a percentage for one corruption kind."""
    if not model_cells:
        raise MisalignedCellsError("no cells supplied")
    if clean_dee >= 1.0:
        raise DegenerateCleanError(f"clean dee {clean_dee} >= 1")
    kinds = {c.kind for c in model_cells}
    if len(kinds) != 1:
        raise MisalignedCellsError(f"cells span multiple kinds: {sorted(k.name for k in kinds)}")
    L = len(model_cells)
    return 100.0 * sum(1.0 - c.dee for c in model_cells) / (L * (1.0 - clean_dee))


def summarize(model_cells: list[DeeCell], baseline: BaselineTable,
              clean_dee: float, profile: str | None = None) -> RobustnessReport:
    """Build the full robustness report for one model against a baseline."""
    profile = profile or baseline.profile
    if profile != baseline.profile:
        raise ProfileError(
            f"requested profile {profile!r} != baseline profile {baseline.profile!r}")
    levels = profile_levels(profile)
    kinds = profile_kinds(profile)

    by_cell: dict[tuple[CorruptionKind, int], DeeCell] = {}
    model_ids = set()
    for cell in model_cells:
        key = (cell.kind, cell.severity)
        if key in by_cell:
            raise InvalidParameterError(
                f"duplicate cell for ({cell.kind.name}, {cell.severity})")
        by_cell[key] = cell
        model_ids.add(cell.model_id)
    if len(model_ids) > 1:
        raise InvalidParameterError(f"cells mix multiple models: {sorted(model_ids)}")
    missing = [(k.name, s) for k in kinds for s in range(1, levels + 1)
               if (k, s) not in by_cell]
    if missing:
        raise MissingCellsError(missing)

    ce, rr, kind_mean, curves = {}, {}, {}, {}
    for kind in kinds:
        cells = [by_cell[(kind, s)] for s in range(1, levels + 1)]
        base_cells = [DeeCell(baseline.model_id, kind, s, baseline.cells[kind][s])
                      for s in range(1, levels + 1)]
        ce[kind] = corruption_error(cells, base_cells)
        rr[kind] = resilience_rate(cells, clean_dee)
        kind_mean[kind] = _mean([c.dee for c in cells])
        curves[kind] = [c.dee for c in cells]

    return RobustnessReport(
        model_id=next(iter(model_ids)) if model_ids else "model",
        baseline_id=baseline.model_id,
        profile=profile,
        clean_dee=float(clean_dee),
        ce=ce,
        rr=rr,
        kind_mean_dee=kind_mean,
        severity_curves=curves,
    )
