"""Management indicators and the what-if engine.

Time allocation buckets every paid hour of the allotted workforce into paid-
for-no-work, curfew loss, rounding loss, location/craft assignment loss, or
productive maintenance; utilization splits maintenance hours across the three
workload categories; staffing stress compares required positions with payroll;
the closure scenario reruns the whole pipeline with a base's work transferred
to its neighbours and reports the differences.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path

from .base_workload import AuditRow, compute_base_workload
from .config import EngineConfig
from .coverage import AllotmentTable, PipelineResult, StageLedger, run_coverage_pipeline
from .errors import DanglingReferenceError, LedgerGapError, StaffPlanError
from .model import Category, Craft, Dataset, GangHours, PayrollSnapshot
from .nbntt import compute_nbntt_workload
from .trouble import compute_trouble_workload, derive_shift_stats

RESPONSE_TIME_CAVEAT = (
    "Closing a base transfers its workload to adjacent bases; expect longer "
    "response times during rush periods and emergencies, when road access to "
    "the territory is also at its worst."
)


# ---------------------------------------------------------------------------
# time allocation
# ---------------------------------------------------------------------------

@dataclass
class TimeAllocationRow:
    scope_kind: str  # "division" | "craft" | "system"
    scope: str
    paid_hours: float = 0.0
    pfnw_hours: float = 0.0
    curfew_loss_hours: float = 0.0
    rounding_loss_hours: float = 0.0
    assignment_loss_hours: float = 0.0
    productive_hours: float = 0.0

    def components_sum(self) -> float:
        return (
            self.pfnw_hours + self.curfew_loss_hours + self.rounding_loss_hours
            + self.assignment_loss_hours + self.productive_hours
        )

    def pct(self, value: float) -> float:
        return 100.0 * value / self.paid_hours if self.paid_hours else 0.0


@dataclass
class TimeAllocationReport:
    rows: list[TimeAllocationRow]

    def row(self, scope_kind: str, scope: str) -> TimeAllocationRow:
        for r in self.rows:
            if r.scope_kind == scope_kind and r.scope == scope:
                return r
        raise KeyError((scope_kind, scope))


def time_allocation_report(ledger: StageLedger, allotment: AllotmentTable | None = None) -> TimeAllocationReport:
    """Bucket every paid hour of the allotted workforce by the constraint consuming it.

    Raises LedgerGapError when the allotment holds positions the ledger cannot
    account for, or when a row's buckets fail to add back up to its paid hours;
    either would let hours leak out of the report unnoticed.
    """
    if allotment is not None:
        covered = {(r.base_id, r.craft) for r in ledger.rows}
        missing = sorted(
            f"{base}/{int(craft)}" for (base, craft), n in allotment.by_base_craft().items()
            if n and (base, craft) not in covered
        )
        if missing:
            raise LedgerGapError(f"stage ledger is missing allotted cells: {', '.join(missing)}")

    buckets: dict[tuple[str, str], TimeAllocationRow] = {}

    def bucket(kind: str, scope: str) -> TimeAllocationRow:
        return buckets.setdefault((kind, scope), TimeAllocationRow(kind, scope))

    for row in ledger.rows:
        paid = row.final_positions * row.weekdays_per_year * row.day_hours
        pfnw = row.final_positions * row.pfnw_days * row.day_hours
        available = paid - pfnw
        curfew = available * (1.0 - row.non_rush_pct)
        rounding = (row.policy_positions - row.fte) * row.productive_per_fte
        assignment = (row.final_positions - row.policy_positions) * row.productive_per_fte
        productive = row.man_hours

        total = pfnw + curfew + rounding + assignment + productive
        if abs(total - paid) > 1e-6 * max(paid, 1.0):
            raise LedgerGapError(
                f"time accounting for base {row.base_id} craft {int(row.craft)} does not "
                f"balance: components {total:.6f} vs paid {paid:.6f}"
            )

        for target in (
            bucket("division", row.division),
            bucket("craft", str(int(row.craft))),
            bucket("system", "system"),
        ):
            target.paid_hours += paid
            target.pfnw_hours += pfnw
            target.curfew_loss_hours += curfew
            target.rounding_loss_hours += rounding
            target.assignment_loss_hours += assignment
            target.productive_hours += productive

    order = {"division": 0, "craft": 1, "system": 2}
    rows = sorted(buckets.values(), key=lambda r: (order[r.scope_kind], r.scope))
    return TimeAllocationReport(rows=rows)


# ---------------------------------------------------------------------------
# utilization
# ---------------------------------------------------------------------------

@dataclass
class UtilizationRow:
    scope_kind: str  # "base" | "division" | "system"
    scope: str
    man_hours: dict[Category, float]
    # None marks a scope with no maintenance hours at all (never NaN shares)
    shares: dict[Category, float] | None

    def total(self) -> float:
        return sum(self.man_hours.values())


@dataclass
class UtilizationReport:
    rows: list[UtilizationRow]

    def row(self, scope_kind: str, scope: str) -> UtilizationRow:
        for r in self.rows:
            if r.scope_kind == scope_kind and r.scope == scope:
                return r
        raise KeyError((scope_kind, scope))


def utilization_report(streams: list[GangHours], crew, ds: Dataset) -> UtilizationReport:
    """Share of maintenance man-hours by category, per base, division and system.

    Uses the full trouble burden (not just its off-peak share): utilization
    describes where maintenance time goes, not what competes for work windows.
    """
    per_base: dict[str, dict[Category, float]] = {}
    for row in streams:
        per_base.setdefault(row.base_id, {cat: 0.0 for cat in Category})
        per_base[row.base_id][row.category] += row.hours * crew.size(row.category, row.craft)

    def build(kind: str, scope: str, hours: dict[Category, float]) -> UtilizationRow:
        total = sum(hours.values())
        shares = {cat: hours[cat] / total for cat in Category} if total > 0 else None
        return UtilizationRow(kind, scope, hours, shares)

    rows = []
    division_hours: dict[str, dict[Category, float]] = {}
    system_hours = {cat: 0.0 for cat in Category}
    for base_id in sorted(per_base):
        hours = per_base[base_id]
        rows.append(build("base", base_id, hours))
        division = ds.bases[base_id].division if base_id in ds.bases else "?"
        dh = division_hours.setdefault(division, {cat: 0.0 for cat in Category})
        for cat in Category:
            dh[cat] += hours[cat]
            system_hours[cat] += hours[cat]
    for division in sorted(division_hours):
        rows.append(build("division", division, division_hours[division]))
    rows.append(build("system", "system", system_hours))
    return UtilizationReport(rows=rows)


# ---------------------------------------------------------------------------
# staffing stress
# ---------------------------------------------------------------------------

@dataclass
class StressRow:
    base_id: str
    craft: Craft
    required: int
    payroll: int

    @property
    def delta(self) -> int:
        return self.payroll - self.required


@dataclass
class StressReport:
    rows: list[StressRow]
    stressed: bool
    note: str = ""

    def system_by_craft(self) -> dict[Craft, tuple[int, int, int]]:
        out: dict[Craft, list[int]] = {}
        for r in self.rows:
            acc = out.setdefault(r.craft, [0, 0, 0])
            acc[0] += r.required
            acc[1] += r.payroll
            acc[2] += r.delta
        return {c: tuple(v) for c, v in sorted(out.items())}


def staffing_stress(allot: AllotmentTable, payroll: PayrollSnapshot, bases: dict) -> StressReport:
    """Required minus filled positions per (base, craft); negative deltas mean stress."""
    orphans = sorted({base for (base, _c) in payroll.counts if base not in bases})
    if orphans:
        raise DanglingReferenceError(f"payroll names bases absent from the registry: {orphans}")
    required = allot.by_base_craft()
    keys = sorted(set(required) | set(payroll.counts))
    rows = [
        StressRow(base, craft, required.get((base, craft), 0), payroll.counts.get((base, craft), 0))
        for base, craft in keys
    ]
    report = StressReport(rows=rows, stressed=False)
    stressed = any(delta < 0 for (_req, _pay, delta) in report.system_by_craft().values())
    report.stressed = stressed
    if stressed:
        report.note = (
            "payroll is below the workload-required level for at least one craft; "
            "keeping up implies a baseline of overtime or inspection-quota pressure"
        )
    return report


# ---------------------------------------------------------------------------
# full run and closure scenario
# ---------------------------------------------------------------------------

@dataclass
class RunOutputs:
    streams: list[GangHours]
    fra_audit: list[AuditRow]
    nbntt_man_hours: dict[tuple[str, Craft], float]
    pipeline: PipelineResult
    time_allocation: TimeAllocationReport
    utilization: UtilizationReport
    stress: StressReport | None

    @property
    def allotment(self) -> AllotmentTable:
        return self.pipeline.allotment


def run_full(ds: Dataset, config: EngineConfig) -> RunOutputs:
    """Compute all three workload streams, the coverage pipeline, and every report."""
    fra_rows, fra_audit = compute_base_workload(ds)

    stats = None
    if ds.tickets:
        stats = derive_shift_stats(ds.tickets, config.calendar, set(ds.locations))
    ds_eff = ds
    if config.adjacency_overrides:
        ds_eff = copy.deepcopy(ds)
        for base_id, adjacency in config.adjacency_overrides.items():
            if base_id in ds_eff.bases:
                ds_eff.bases[base_id].adjacent_bases = list(adjacency)
    trouble_rows = compute_trouble_workload(
        ds_eff.fault_counts, ds_eff.repair_profiles, stats, ds_eff,
        travel_surcharge_pct=config.travel_surcharge_pct,
    ) if ds_eff.fault_counts.counts else []

    nbntt_rows, nbntt_man = compute_nbntt_workload(ds_eff.tasks, ds_eff, config.division_anchors)

    streams = fra_rows + trouble_rows + nbntt_rows
    pipeline = run_coverage_pipeline(ds_eff, streams, config)
    allocation = time_allocation_report(pipeline.ledger, pipeline.allotment)
    utilization = utilization_report(streams, config.crew, ds_eff)
    stress = None
    if ds.payroll is not None:
        stress = staffing_stress(pipeline.allotment, ds.payroll, ds_eff.bases)
    return RunOutputs(
        streams=streams,
        fra_audit=fra_audit,
        nbntt_man_hours=nbntt_man,
        pipeline=pipeline,
        time_allocation=allocation,
        utilization=utilization,
        stress=stress,
    )


@dataclass
class ScenarioResult:
    closed_base: str
    adopting_base: str
    before: RunOutputs
    after: RunOutputs
    dataset_after: Dataset
    config_after: EngineConfig
    caveat: str = RESPONSE_TIME_CAVEAT


def scenario_close_location(ds: Dataset, base_id: str, config: EngineConfig) -> ScenarioResult:
    """Close a maintenance base, transfer its work to the first adjacent base, rerun.

    Workload is conserved: locations, per-base task units, yards and payroll
    move to the adopting base; only the attribution changes. Closing a base
    that does not exist (e.g. closing twice) or has no adjacency is an error.
    """
    base = ds.bases.get(base_id)
    if base is None:
        raise StaffPlanError(f"base {base_id!r} not found (already closed?)")
    adjacency = config.adjacency_overrides.get(base_id, base.adjacent_bases)
    if not adjacency:
        raise StaffPlanError(f"base {base_id} has no adjacent bases to absorb its workload")
    target_id = next((b for b in adjacency if b in ds.bases and b != base_id), None)
    if target_id is None:
        raise StaffPlanError(f"no adjacent base of {base_id} remains open")

    before = run_full(ds, config)

    after_ds = copy.deepcopy(ds)
    closed = after_ds.bases.pop(base_id)
    target = after_ds.bases[target_id]
    target.merged_bases = sorted(set(target.merged_bases) | {base_id} | set(closed.merged_bases))
    target.yards = target.yards + [y for y in closed.yards if y not in target.yards]
    for loc in after_ds.locations_of_base(base_id):
        loc.maintenance_base = target_id
    for other in after_ds.bases.values():
        other.adjacent_bases = [b for b in other.adjacent_bases if b != base_id]
    if after_ds.payroll is not None:
        moved: dict[tuple[str, Craft], int] = {}
        for (b, craft), n in after_ds.payroll.counts.items():
            key = (target_id if b == base_id else b, craft)
            moved[key] = moved.get(key, 0) + n
        after_ds.payroll = PayrollSnapshot(counts=moved)

    config_after = replace(
        config,
        division_anchors={
            d: (target_id if b == base_id else b) for d, b in config.division_anchors.items()
        },
        adjacency_overrides={
            b: [x for x in adj if x != base_id]
            for b, adj in config.adjacency_overrides.items() if b != base_id
        },
    )

    after = run_full(after_ds, config_after)
    return ScenarioResult(
        closed_base=base_id,
        adopting_base=target_id,
        before=before,
        after=after,
        dataset_after=after_ds,
        config_after=config_after,
    )


def scenario_deltas(result: ScenarioResult) -> list[tuple[str, str, float, float]]:
    """(table, key, before, after) rows for every changed figure."""
    rows: list[tuple[str, str, float, float]] = []

    def diff(table: str, before: dict, after: dict, fmt=lambda k: k) -> None:
        for key in sorted(set(before) | set(after), key=str):
            b, a = before.get(key, 0), after.get(key, 0)
            if b != a:
                rows.append((table, fmt(key), float(b), float(a)))

    diff(
        "positions",
        {f"{b}/{int(c)}": n for (b, c), n in result.before.allotment.by_base_craft().items()},
        {f"{b}/{int(c)}": n for (b, c), n in result.after.allotment.by_base_craft().items()},
    )
    diff(
        "man_hours",
        {f"{b}/{int(c)}": v for (b, c), v in result.before.pipeline.demand.items()},
        {f"{b}/{int(c)}": v for (b, c), v in result.after.pipeline.demand.items()},
    )
    diff(
        "relief",
        {f"{d}/{s}": n for (d, s), n in result.before.allotment.relief.items()},
        {f"{d}/{s}": n for (d, s), n in result.after.allotment.relief.items()},
    )
    rows.append((
        "totals", "positions",
        float(result.before.allotment.total_positions()),
        float(result.after.allotment.total_positions()),
    ))
    rows.append((
        "totals", "man_hours",
        sum(result.before.pipeline.demand.values()),
        sum(result.after.pipeline.demand.values()),
    ))
    return rows


# ---------------------------------------------------------------------------
# file emission
# ---------------------------------------------------------------------------

def _fmt_hours(v: float) -> str:
    return f"{v:.3f}"


def _fmt_pct(v: float) -> str:
    return f"{v:.1f}"


def write_allotment_csv(path: Path, run: RunOutputs, ds: Dataset) -> None:
    gang: dict[tuple[str, Category], float] = {}
    for row in run.streams:
        key = (row.base_id, row.category)
        gang[key] = gang.get(key, 0.0) + row.hours
    demand = run.pipeline.demand
    fte = run.allotment.fte
    positions = run.allotment.by_base_craft()
    ph = {(r.base_id, r.craft): r.productive_per_fte for r in run.pipeline.ledger.rows}
    nr = {b.base_id: b.non_rush_pct for b in ds.bases.values()}

    header = (
        ["division", "base", "gh_fra", "gh_trouble", "gh_nbntt"]
        + [f"mh_{c}" for c in range(1, 5)] + ["non_rush_pct"]
        + [f"ph_{c}" for c in range(1, 5)]
        + [f"fte_{c}" for c in range(1, 5)]
        + [f"pos_{c}" for c in range(1, 5)]
    )

    def row_cells(scope_name: str, base_ids: list[str], label: str) -> list[str]:
        cells = [scope_name, label]
        for cat in (Category.FRA, Category.TROUBLE, Category.NBNTT):
            cells.append(_fmt_hours(sum(gang.get((b, cat), 0.0) for b in base_ids)))
        for c in Craft:
            cells.append(_fmt_hours(sum(demand.get((b, c), 0.0) for b in base_ids)))
        if len(base_ids) == 1:
            cells.append(_fmt_pct(100 * nr.get(base_ids[0], 0.0)))
            for c in Craft:
                value = ph.get((base_ids[0], c))
                cells.append(_fmt_hours(value) if value is not None else "")
        else:
            cells.append("")
            cells.extend([""] * len(Craft))
        for c in Craft:
            cells.append(f"{sum(fte.get((b, c), 0.0) for b in base_ids):.2f}")
        for c in Craft:
            cells.append(str(sum(positions.get((b, c), 0) for b in base_ids)))
        return cells

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        all_bases: list[str] = []
        for division in ds.divisions():
            members = sorted(b.base_id for b in ds.bases.values() if b.division == division)
            for base_id in members:
                writer.writerow(row_cells(division, [base_id], base_id))
            writer.writerow(row_cells(division, members, f"{division} total"))
            all_bases.extend(members)
        writer.writerow(row_cells("system", all_bases, "total"))
        for (division, shift), n in sorted(run.allotment.relief.items()):
            writer.writerow([division, f"relief shift {shift}", "", "", "", "", "", "", "",
                             "", "", "", "", "", "", "", "", "", n, "", "", ""])
        for division, n in sorted(run.allotment.heavy_gangs.items()):
            writer.writerow([division, "heavy gang (shift 1)", "", "", "", "", "", "", "",
                             "", "", "", "", "", "", "", "", "", n, "", "", ""])


def write_time_allocation_csv(path: Path, report: TimeAllocationReport) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "scope_kind", "scope", "paid_hours", "pfnw_hours", "curfew_loss_hours",
            "rounding_loss_hours", "assignment_loss_hours", "productive_hours",
            "pfnw_pct", "curfew_pct", "rounding_pct", "assignment_pct", "productive_pct",
        ])
        for r in report.rows:
            writer.writerow([
                r.scope_kind, r.scope,
                _fmt_hours(r.paid_hours), _fmt_hours(r.pfnw_hours),
                _fmt_hours(r.curfew_loss_hours), _fmt_hours(r.rounding_loss_hours),
                _fmt_hours(r.assignment_loss_hours), _fmt_hours(r.productive_hours),
                _fmt_pct(r.pct(r.pfnw_hours)), _fmt_pct(r.pct(r.curfew_loss_hours)),
                _fmt_pct(r.pct(r.rounding_loss_hours)), _fmt_pct(r.pct(r.assignment_loss_hours)),
                _fmt_pct(r.pct(r.productive_hours)),
            ])


def write_utilization_csv(path: Path, report: UtilizationReport) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "scope_kind", "scope", "man_hours_total",
            "fra_pct", "nbntt_pct", "trouble_pct",
        ])
        for r in report.rows:
            if r.shares is None:
                writer.writerow([r.scope_kind, r.scope, _fmt_hours(0.0), "", "", ""])
            else:
                writer.writerow([
                    r.scope_kind, r.scope, _fmt_hours(r.total()),
                    _fmt_pct(100 * r.shares[Category.FRA]),
                    _fmt_pct(100 * r.shares[Category.NBNTT]),
                    _fmt_pct(100 * r.shares[Category.TROUBLE]),
                ])


def write_stress_csv(path: Path, report: StressReport) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scope", "base", "craft", "required", "payroll", "delta"])
        for r in report.rows:
            writer.writerow(["base", r.base_id, int(r.craft), r.required, r.payroll, r.delta])
        for craft, (req, pay, delta) in report.system_by_craft().items():
            writer.writerow(["system", "", int(craft), req, pay, delta])
        writer.writerow(["summary", "", "", "", "", "stressed" if report.stressed else "ok"])


def write_scenario_csv(path: Path, result: ScenarioResult) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["table", "key", "before", "after", "delta"])
        writer.writerow(["scenario", "closed_base", result.closed_base, result.closed_base, ""])
        writer.writerow(["scenario", "adopting_base", result.adopting_base, result.adopting_base, ""])
        for table, key, before, after in scenario_deltas(result):
            writer.writerow([table, key, _fmt_hours(before), _fmt_hours(after), _fmt_hours(after - before)])
        writer.writerow(["note", "response_time", "", "", result.caveat])


def write_run_manifest(path: Path, *, manifest_path: Path, config: EngineConfig, extra_inputs: dict | None = None) -> None:
    """Reproducibility record: hashes of the config and every dataset member file."""
    inputs: dict[str, str] = {}

    def hash_file(p: Path) -> str:
        return hashlib.sha256(p.read_bytes()).hexdigest()

    inputs[manifest_path.name] = hash_file(manifest_path)
    members = json.loads(manifest_path.read_text(encoding="utf-8"))
    for member in sorted(members.values()):
        member_path = manifest_path.parent / member
        if member_path.exists():
            inputs[member] = hash_file(member_path)
    record = {
        "config_sha256": config.source_sha256 or "",
        "inputs": inputs,
    }
    if extra_inputs:
        record["extra"] = dict(sorted(extra_inputs.items()))
    path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# plain-text tables
# ---------------------------------------------------------------------------

def format_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(header))),
    ]
    for row in rows:
        lines.append("  ".join(cell.rjust(widths[i]) if i else cell.ljust(widths[i])
                               for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines)


def format_allotment_text(run: RunOutputs, ds: Dataset) -> str:
    positions = run.allotment.by_base_craft()
    fte = run.allotment.fte
    header = ["base", "division"] + [f"fte{c}" for c in Craft] + [f"pos{c}" for c in Craft]
    rows = []
    for base_id in sorted(ds.bases):
        division = ds.bases[base_id].division
        cells = [base_id, division]
        cells += [f"{fte.get((base_id, c), 0.0):.2f}" for c in Craft]
        cells += [str(positions.get((base_id, c), 0)) for c in Craft]
        rows.append(cells)
    totals = ["total", ""]
    totals += [f"{sum(v for (_b, c2), v in fte.items() if c2 == c):.2f}" for c in Craft]
    totals += [str(sum(v for (_b, c2), v in positions.items() if c2 == c)) for c in Craft]
    rows.append(totals)
    return format_table(header, rows)


def format_utilization_text(report: UtilizationReport) -> str:
    header = ["scope", "kind", "man-hours", "fra%", "nbntt%", "trouble%"]
    rows = []
    for r in report.rows:
        if r.shares is None:
            rows.append([r.scope, r.scope_kind, "0", "-", "-", "-"])
        else:
            rows.append([
                r.scope, r.scope_kind, f"{r.total():.0f}",
                _fmt_pct(100 * r.shares[Category.FRA]),
                _fmt_pct(100 * r.shares[Category.NBNTT]),
                _fmt_pct(100 * r.shares[Category.TROUBLE]),
            ])
    return format_table(header, rows)


def format_time_allocation_text(report: TimeAllocationReport) -> str:
    header = ["scope", "kind", "paid", "pfnw%", "curfew%", "rounding%", "assign%", "productive%"]
    rows = []
    for r in report.rows:
        rows.append([
            r.scope, r.scope_kind, f"{r.paid_hours:.0f}",
            _fmt_pct(r.pct(r.pfnw_hours)), _fmt_pct(r.pct(r.curfew_loss_hours)),
            _fmt_pct(r.pct(r.rounding_loss_hours)), _fmt_pct(r.pct(r.assignment_loss_hours)),
            _fmt_pct(r.pct(r.productive_hours)),
        ])
    return format_table(header, rows)
