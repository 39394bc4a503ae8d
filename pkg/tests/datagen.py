"""Seeded synthetic datasets for property, oracle and stress tests."""

from __future__ import annotations

import random
import string
from datetime import datetime, timedelta

from staffplan.config import EngineConfig, config_from_dict
from staffplan.model import (
    Craft,
    Dataset,
    DayClass,
    FaultCountTable,
    FieldLocation,
    Frequency,
    FreqUnit,
    MaintenanceBase,
    NbnttTaskSpec,
    PerEach,
    PfnwProfile,
    RepairProfile,
    TestCatalogEntry,
    TicketRecord,
    UnitTimeMatrix,
    WorkScheduleEntry,
)
from staffplan.registry import classify_location

APPARATUS_CHOICES = [
    {"switch_machine": 3, "signal": 4, "relay": 10},
    {"switch_machine": 7, "signal": 9, "relay": 22},
    {"grade_crossing_warning": 1, "overlay": 2},
    {"hand_operated_switch": 1, "track_circuit": 2},
    {"code_point": 1, "relay": 6, "track_circuit": 4},
    {"movable_bridge": 1, "switch_machine": 2, "relay": 8},
]

FREQ_CHOICES = [
    Frequency(1, FreqUnit.MONTH), Frequency(3, FreqUnit.MONTH), Frequency(6, FreqUnit.MONTH),
    Frequency(1, FreqUnit.YEAR), Frequency(2, FreqUnit.YEAR), Frequency(4, FreqUnit.YEAR),
    Frequency(5, FreqUnit.YEAR), Frequency(10, FreqUnit.YEAR),
]


def random_calendar_dict(rng: random.Random) -> dict:
    n_shifts = rng.choice([2, 3])
    cuts = sorted(rng.sample(range(0, 24 * 60, 30), n_shifts))
    shifts = []
    for i in range(n_shifts):
        start, end = cuts[i], cuts[(i + 1) % n_shifts]
        shifts.append({
            "shift_id": str(i + 1),
            "start": f"{start // 60:02d}:{start % 60:02d}",
            "end": f"{end // 60:02d}:{end % 60:02d}",
        })

    def windows() -> list[list[str]]:
        out = []
        for _ in range(rng.randrange(3)):
            a = rng.randrange(0, 23 * 60, 15)
            b = a + rng.choice([30, 60, 90, 180])
            b = min(b, 24 * 60 - 1)
            if a < b:
                out.append([f"{a // 60:02d}:{a % 60:02d}", f"{b // 60:02d}:{b % 60:02d}"])
        return out

    return {
        "shifts": shifts,
        "rush_windows": {
            "default": {"weekday": windows(), "weekend": windows()},
        },
    }


def random_dataset(seed: int, *, all_shifts_open: bool = False) -> tuple[Dataset, EngineConfig, dict]:
    """A small consistent dataset plus config; returns the raw calendar dict too."""
    rng = random.Random(seed)

    catalog: dict[str, TestCatalogEntry] = {}
    n_tests = rng.randint(4, 10)
    for i in range(n_tests):
        tid = f"T{i:02d}"
        catalog[tid] = TestCatalogEntry(
            test_id=tid,
            name=f"Test {tid}",
            default_frequency=rng.choice(FREQ_CHOICES),
            craft=Craft(rng.choice([1, 1, 1, 2, 3, 4])),
        )
    # one add-on pair when there is room
    if n_tests >= 2 and rng.random() < 0.6:
        parent, child = "T00", "T01"
        catalog[child] = TestCatalogEntry(
            test_id=child, name=catalog[child].name,
            default_frequency=catalog[child].default_frequency,
            craft=catalog[child].craft, addon_of=parent,
        )

    from staffplan.model import LocationType
    entries = {}
    for tid in catalog:
        cells = {}
        for lt in LocationType:
            cells[lt] = None if rng.random() < 0.2 else rng.choice([0.125, 0.25, 0.33, 0.5, 1.0, 1.5, 3.0])
        if all(v is None for v in cells.values()):
            cells[LocationType.CODE_POINT] = 0.5
        entries[tid] = cells
    matrix = UnitTimeMatrix(entries=entries, day_hours=8.0)

    calendar_dict = random_calendar_dict(rng)
    shift_ids = [s["shift_id"] for s in calendar_dict["shifts"]]

    n_divisions = rng.randint(1, 3)
    divisions = [f"Div{string.ascii_uppercase[i]}" for i in range(n_divisions)]
    n_bases = rng.randint(max(2, n_divisions), 10)
    bases: dict[str, MaintenanceBase] = {}
    base_ids = [f"B{string.ascii_uppercase[i]}" for i in range(n_bases)]
    for i, bid in enumerate(base_ids):
        if all_shifts_open:
            open_shifts = {(s, dc) for s in shift_ids for dc in DayClass}
        else:
            open_shifts = {("1" if "1" in shift_ids else shift_ids[0], DayClass.WEEKDAY)}
            for s in shift_ids:
                for dc in DayClass:
                    if rng.random() < 0.5:
                        open_shifts.add((s, dc))
        if i == 0:
            # the hub base is always fully staffed so off-hours transfers resolve
            open_shifts = {(s, dc) for s in shift_ids for dc in DayClass}
        bases[bid] = MaintenanceBase(
            base_id=bid,
            division=divisions[i % n_divisions],
            open_shifts=open_shifts,
            non_rush_pct=rng.choice([0.5, 0.56, 0.6, 0.64, 0.75, 1.0]),
            adjacent_bases=[b for b in base_ids if b != bid][:3],
            yards=["Yard"] if rng.random() < 0.3 else [],
        )

    locations: dict[str, FieldLocation] = {}
    n_locations = rng.randint(n_bases, 20)
    for i in range(n_locations):
        lid = f"L{i:03d}"
        apparatus = dict(rng.choice(APPARATUS_CHOICES))
        base = rng.choice(base_ids)
        locations[lid] = FieldLocation(
            location_id=lid,
            line="Line",
            milepost=round(rng.uniform(0, 300), 1),
            apparatus=apparatus,
            maintenance_base=base,
            division=bases[base].division,
            location_type=classify_location(apparatus),
        )

    schedules: list[WorkScheduleEntry] = []
    seen = set()
    for _ in range(rng.randint(5, 50)):
        lid = rng.choice(sorted(locations))
        applicable = [
            tid for tid in catalog
            if matrix.entries[tid][locations[lid].location_type] is not None
        ]
        if not applicable:
            continue
        tid = rng.choice(applicable)
        if (lid, tid) in seen:
            continue
        seen.add((lid, tid))
        spec = catalog[tid]
        schedules.append(WorkScheduleEntry(
            location_id=lid,
            test_id=tid,
            frequency=rng.choice(FREQ_CHOICES) if rng.random() < 0.4 else spec.default_frequency,
            performer=f"Gang #{rng.randint(1, 9)}",
            craft=spec.craft,
        ))
    schedules.sort(key=lambda e: (e.location_id, e.test_id))

    profiles = {
        ft: RepairProfile(
            fault_type=ft,
            hours_per_ticket=rng.choice([0.5, 1.0, 1.5, 2.0, 3.0, 4.0]),
            craft=Craft(rng.choice([1, 1, 1, 3])),
            crew_size=rng.choice([1, 2, 3]),
        )
        for ft in range(1, 16)
    }
    counts = {}
    for lid in locations:
        for _ in range(rng.randrange(4)):
            counts[(lid, rng.randint(1, 15))] = rng.randint(0, 40)
    faults = FaultCountTable(counts={k: v for k, v in counts.items() if v})

    monday = datetime(2026, 3, 2)
    tickets = []
    for i in range(rng.randint(0, 30)):
        lid = rng.choice(sorted(locations))
        start = monday + timedelta(days=rng.randrange(7), minutes=rng.randrange(24 * 60))
        duration = rng.choice([0, 15, 30, 45, 60, 120, 240, 480])
        tickets.append(TicketRecord(
            ticket_id=f"T{i:04d}", location_id=lid, fault_type=rng.randint(1, 15),
            opened_at=start, closed_at=start + timedelta(minutes=duration),
        ))
    tickets.sort(key=lambda t: (t.opened_at, t.ticket_id))

    tasks = []
    for i in range(rng.randrange(8)):
        tasks.append(NbnttTaskSpec(
            description=f"Task {i}",
            per_each=rng.choice(list(PerEach)),
            annual_occurrences=rng.choice([1, 2, 4, 12, 52]),
            work_hours=rng.choice([0.5, 1.0, 2.0, 4.0, 8.0]),
            crew=rng.choice([1, 2, 3]),
            craft=Craft(rng.choice([1, 1, 2, 3])),
        ))
    tasks.sort(key=lambda t: (t.description, t.per_each.value))

    pfnw = {
        craft: PfnwProfile(days={"vacation": 10.0, "holidays": 11.0, "sick": float(rng.randint(2, 8))})
        for craft in Craft
    }

    ds = Dataset(
        catalog=catalog, locations=locations, bases=bases, schedules=schedules,
        unit_times=matrix, tasks=tasks, fault_counts=faults, tickets=tickets,
        repair_profiles=profiles, pfnw_profiles=pfnw, payroll=None,
    )
    config = config_from_dict({
        "day_hours": 8,
        "weekdays_per_year": 261,
        "calendar": calendar_dict,
        "division_anchors": {d: sorted(b.base_id for b in bases.values() if b.division == d)[0]
                             for d in divisions},
    })
    return ds, config, calendar_dict


def stress_dataset(n_locations: int = 100, seed: int = 7) -> tuple[Dataset, EngineConfig, dict]:
    """A larger dataset for the determinism / runtime gate."""
    rng = random.Random(seed)
    ds, config, calendar_dict = random_dataset(seed, all_shifts_open=True)
    base_ids = sorted(ds.bases)
    next_idx = len(ds.locations)
    while len(ds.locations) < n_locations:
        lid = f"L{next_idx:03d}"
        apparatus = dict(rng.choice(APPARATUS_CHOICES))
        base = rng.choice(base_ids)
        ds.locations[lid] = FieldLocation(
            location_id=lid, line="Line", milepost=round(rng.uniform(0, 300), 1),
            apparatus=apparatus, maintenance_base=base,
            division=ds.bases[base].division, location_type=classify_location(apparatus),
        )
        for tid in sorted(ds.catalog):
            if ds.unit_times.entries[tid][ds.locations[lid].location_type] is not None:
                ds.schedules.append(WorkScheduleEntry(
                    location_id=lid, test_id=tid,
                    frequency=ds.catalog[tid].default_frequency,
                    performer="Gang #1", craft=ds.catalog[tid].craft,
                ))
        ds.fault_counts.counts[(lid, rng.randint(1, 15))] = rng.randint(1, 25)
        next_idx += 1
    ds.schedules.sort(key=lambda e: (e.location_id, e.test_id))
    return ds, config, calendar_dict
