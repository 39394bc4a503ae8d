"""Coverage model: gang-hours to man-hours, FTEs, and integer allotted positions.

Pipeline per maintenance base: sum the three workload streams (trouble scaled
to its off-peak share), multiply by minimum gang size per craft, divide by the
productive hours one employee can apply per year, round to positions under the
configured policy, then spread positions over shifts by filling the smallest
coverage template that holds them. Vacation relief and division heavy repair
gangs are added on top.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field

from .config import CoverageTemplate, EngineConfig
from .errors import ConfigError, LedgerGapError, StaffPlanError
from .model import Category, Craft, Dataset, GangHours, MaintenanceBase, PfnwProfile

MIN_CREW = 2  # employees never work alone: teams of two, possibly mixed craft


def aggregate_demand(
    streams: list[GangHours], crew, offpeak_only: bool = True
) -> dict[tuple[str, Craft], float]:
    """Man-hours by (base, craft): gang-hours x minimum gang size per category.

    Trouble rows are scaled by their off-peak commitment when offpeak_only is
    set, since rush-period repair work is covered by standby staff and does not
    compete for preventative-maintenance windows.
    """
    demand: dict[tuple[str, Craft], float] = {}
    for row in streams:
        hours = row.hours
        if offpeak_only and row.category is Category.TROUBLE and row.offpeak_share is not None:
            hours *= row.offpeak_share
        factor = crew.size(row.category, row.craft)
        key = (row.base_id, row.craft)
        demand[key] = demand.get(key, 0.0) + hours * factor
    return dict(sorted(demand.items()))


def productive_hours(pfnw: PfnwProfile, base: MaintenanceBase, day_hours: float) -> float:
    """Hours/year one employee at this base can apply to off-peak maintenance."""
    value = (pfnw.weekdays_per_year - pfnw.total_days()) * day_hours * base.non_rush_pct
    if value <= 0:
        raise ConfigError(
            f"productive hours at base {base.base_id} came out non-positive "
            f"({value:.1f}); check PFNW days and non-rush percentage"
        )
    return value


def compute_fte(man_hours: float, productive: float) -> float:
    """Exact unrounded quotient of demanded man-hours over productive hours per FTE."""
    if productive <= 0:
        raise ConfigError(f"productive hours must be positive, got {productive}")
    return man_hours / productive


@dataclass
class AllotmentTable:
    positions: dict[tuple[str, Craft, str], int] = field(default_factory=dict)
    relief: dict[tuple[str, str], int] = field(default_factory=dict)
    heavy_gangs: dict[str, int] = field(default_factory=dict)
    fte: dict[tuple[str, Craft], float] = field(default_factory=dict)
    exemptions_applied: set[str] = field(default_factory=set)
    findings: list[str] = field(default_factory=list)

    def by_base_craft(self) -> dict[tuple[str, Craft], int]:
        out: dict[tuple[str, Craft], int] = {}
        for (base, craft, _shift), n in self.positions.items():
            out[(base, craft)] = out.get((base, craft), 0) + n
        return dict(sorted(out.items()))

    def craft_totals(self) -> dict[Craft, int]:
        out: dict[Craft, int] = {}
        for (_base, craft, _shift), n in self.positions.items():
            out[craft] = out.get(craft, 0) + n
        return dict(sorted(out.items()))

    def base_shift_totals(self) -> dict[tuple[str, str], int]:
        out: dict[tuple[str, str], int] = {}
        for (base, _craft, shift), n in self.positions.items():
            out[(base, shift)] = out.get((base, shift), 0) + n
        return dict(sorted(out.items()))

    def total_positions(self) -> int:
        return sum(self.positions.values())


def allot_positions(
    fte: dict[tuple[str, Craft], float],
    bases: dict[str, MaintenanceBase],
    config: EngineConfig,
) -> AllotmentTable:
    """Integer positions per (base, craft, shift) from fractional FTEs.

    Per cell the rounding policy applies first (per-cell overrides from config
    win over the policy); the base's combined positions then fill the smallest
    coverage template that holds them, most preferred shifts first and never
    leaving a staffed shift below two people. A lone position at a staffed,
    non-exempt base is raised to two; exempt bases keep it and are recorded.
    Demand beyond the largest template is flagged as a finding, not an error.
    """
    table = AllotmentTable(fte=dict(sorted(fte.items())))
    ladder = config.template_ladder()

    per_base: dict[str, dict[Craft, int]] = {}
    for (base_id, craft), value in sorted(fte.items()):
        if base_id not in bases:
            raise ConfigError(f"FTE table names unknown base {base_id!r}")
        n = config.allotment_overrides.get((base_id, craft))
        if n is None:
            n = config.rounding.positions(value)
        if n:
            per_base.setdefault(base_id, {})[craft] = n

    for base_id, by_craft in sorted(per_base.items()):
        base = bases[base_id]
        total = sum(by_craft.values())

        if total == 1:
            if base_id in config.min_crew_exemptions or not base.staffed():
                table.exemptions_applied.add(base_id)
            else:
                # nobody works alone: bring the lone craft up to a pair
                craft = next(iter(by_craft))
                by_craft[craft] = 2
                total = 2

        template = _pick_template(ladder, total)
        if template is None:
            template = ladder[-1]
            table.findings.append(
                f"base {base_id}: {total} positions exceed the largest coverage template "
                f"({ladder[-1].name}, {ladder[-1].positions_required}); surplus is a candidate "
                "for transfer to adjacent bases"
            )
        shift_order = template.shift_ids(config.preference_for(base_id))
        shift_totals = _spread_over_shifts(total, shift_order)

        remaining = dict(shift_totals)
        for craft in sorted(by_craft):
            left = by_craft[craft]
            for shift_id in shift_order:
                if left == 0:
                    break
                take = min(left, remaining.get(shift_id, 0))
                if take:
                    table.positions[(base_id, craft, shift_id)] = take
                    remaining[shift_id] -= take
                    left -= take

    table.positions = dict(sorted(table.positions.items()))
    return table


def _pick_template(ladder: list[CoverageTemplate], total: int) -> CoverageTemplate | None:
    for t in ladder:
        if t.positions_required >= total:
            return t
    return None


def _spread_over_shifts(total: int, shift_order: list[str]) -> dict[str, int]:
    """Per-shift position counts: pairs on the most preferred shifts, extras round-robin."""
    if total <= 0:
        return {}
    if total == 1:
        return {shift_order[0]: 1}
    staffed = max(1, min(len(shift_order), total // MIN_CREW))
    counts = {shift_order[i]: MIN_CREW for i in range(staffed)}
    left = total - MIN_CREW * staffed
    i = 0
    while left > 0:
        counts[shift_order[i % staffed]] += 1
        left -= 1
        i += 1
    return counts


def vacation_relief(
    table: AllotmentTable,
    pfnw: dict[Craft, PfnwProfile],
    bases: dict[str, MaintenanceBase],
) -> dict[tuple[str, str], int]:
    """Relief positions per (division, shift) covering PFNW absence of the allotment."""
    need: dict[tuple[str, str], float] = {}
    for (base_id, craft, shift), n in table.positions.items():
        profile = pfnw.get(craft)
        if profile is None:
            raise ConfigError(f"no PFNW profile for craft {int(craft)} when sizing relief")
        division = bases[base_id].division
        frac = profile.total_days() / profile.weekdays_per_year
        key = (division, shift)
        need[key] = need.get(key, 0.0) + n * frac
    return {key: math.ceil(v - 1e-9) for key, v in sorted(need.items()) if v > 1e-9}


def heavy_gangs(divisions: list[str], gang_size: int) -> dict[str, int]:
    """One heavy repair gang per division, always first shift."""
    if gang_size < 0:
        raise ConfigError(f"heavy gang size must be non-negative, got {gang_size}")
    return {d: gang_size for d in sorted(divisions)}


@dataclass(frozen=True)
class LedgerRow:
    """Everything the time-allocation report needs about one (base, craft) cell."""

    base_id: str
    division: str
    craft: Craft
    man_hours: float
    productive_per_fte: float
    fte: float
    policy_positions: int
    final_positions: int
    pfnw_days: float
    weekdays_per_year: int
    day_hours: float
    non_rush_pct: float


@dataclass
class StageLedger:
    rows: list[LedgerRow] = field(default_factory=list)
    relief: dict[tuple[str, str], int] = field(default_factory=dict)
    heavy_gangs: dict[str, int] = field(default_factory=dict)
    findings: list[str] = field(default_factory=list)

    def row_for(self, base_id: str, craft: Craft) -> LedgerRow:
        for row in self.rows:
            if row.base_id == base_id and row.craft == craft:
                return row
        raise LedgerGapError(f"stage ledger has no row for base {base_id} craft {int(craft)}")


@dataclass
class PipelineResult:
    demand: dict[tuple[str, Craft], float]
    allotment: AllotmentTable
    ledger: StageLedger


@contextmanager
def _stage(name: str):
    """Re-raise pipeline errors naming the stage they came from."""
    try:
        yield
    except StaffPlanError as exc:
        raise type(exc)(f"{name} stage: {exc}") from exc


def run_coverage_pipeline(ds: Dataset, streams: list[GangHours], config: EngineConfig) -> PipelineResult:
    """Compose the full coverage model and keep a ledger of every stage's hours."""
    pfnw = dict(config.pfnw_profiles)
    for craft, profile in ds.pfnw_profiles.items():
        pfnw.setdefault(craft, profile)  # config wins over dataset on conflicts
    if not pfnw:
        raise ConfigError("no PFNW profiles available from config or dataset")

    with _stage("demand aggregation"):
        demand = aggregate_demand(streams, config.crew)

    fte: dict[tuple[str, Craft], float] = {}
    per_fte: dict[tuple[str, Craft], float] = {}
    with _stage("productive hours"):
        for (base_id, craft), man_hours in demand.items():
            base = ds.bases.get(base_id)
            if base is None:
                raise ConfigError(f"workload names unknown base {base_id!r}")
            profile = pfnw.get(craft)
            if profile is None:
                raise ConfigError(f"no PFNW profile for craft {int(craft)}")
            ph = productive_hours(profile, base, config.day_hours)
            per_fte[(base_id, craft)] = ph
            fte[(base_id, craft)] = compute_fte(man_hours, ph)

    with _stage("position allotment"):
        table = allot_positions(fte, ds.bases, config)
    with _stage("vacation relief"):
        table.relief = vacation_relief(table, pfnw, ds.bases)
    with _stage("heavy repair gangs"):
        table.heavy_gangs = heavy_gangs(ds.divisions(), config.heavy_gang_size)

    by_base_craft = table.by_base_craft()
    ledger = StageLedger(relief=dict(table.relief), heavy_gangs=dict(table.heavy_gangs))
    ledger.findings = list(table.findings)
    for (base_id, craft), man_hours in demand.items():
        base = ds.bases[base_id]
        profile = pfnw[craft]
        ledger.rows.append(LedgerRow(
            base_id=base_id,
            division=base.division,
            craft=craft,
            man_hours=man_hours,
            productive_per_fte=per_fte[(base_id, craft)],
            fte=fte[(base_id, craft)],
            # pure policy rounding; overrides and crew forcing show up as the
            # gap between this and final_positions (assignment loss)
            policy_positions=config.rounding.positions(fte[(base_id, craft)]),
            final_positions=by_base_craft.get((base_id, craft), 0),
            pfnw_days=profile.total_days(),
            weekdays_per_year=profile.weekdays_per_year,
            day_hours=config.day_hours,
            non_rush_pct=base.non_rush_pct,
        ))
    return PipelineResult(demand=demand, allotment=table, ledger=ledger)
