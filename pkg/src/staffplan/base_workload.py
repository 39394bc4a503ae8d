"""Federally mandated test workload: schedule rows multiplied by unit times.

Annual gang-hours for a schedule entry are
    occurrences/year x gang-days for (test, location type) x hours per day,
except that add-on tests are charged nothing for occurrences performed in
tandem with their parent test at the same location.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import MissingUnitTimeError, WorkloadError
from .model import Category, Craft, Dataset, GangHours, LocationType, UnitTimeMatrix, WorkScheduleEntry
from .registry import annualize


def unit_time_lookup(matrix: UnitTimeMatrix, test_id: str, loc_type: LocationType) -> float | None:
    """Gang-days for a test at a location type; None when the cell is marked not applicable."""
    try:
        row = matrix.entries[test_id]
    except KeyError:
        raise MissingUnitTimeError(f"test {test_id!r} has no row in the unit-time matrix") from None
    return row[loc_type]


@dataclass(frozen=True)
class AuditRow:
    """One schedule entry's contribution, for the audit trail."""

    base_id: str
    craft: Craft
    location_id: str
    test_id: str
    frequency: str
    unit_days: float | None
    annual_occurrences: float
    suppressed_occurrences: float
    hours: float

    @property
    def suppressed(self) -> bool:
        return self.suppressed_occurrences > 0


def compute_base_workload(ds: Dataset) -> tuple[list[GangHours], list[AuditRow]]:
    """Annual FRA gang-hours summed by (maintenance base, craft), with a per-entry audit trail.

    Raises WorkloadError when a scheduled entry has no applicable unit time and
    is not fully suppressed as an add-on; a silent zero would undercount.
    """
    parents: dict[tuple[str, str], WorkScheduleEntry] = {
        (e.location_id, e.test_id): e for e in ds.schedules
    }
    audit: list[AuditRow] = []
    totals: dict[tuple[str, Craft], float] = {}

    for entry in ds.schedules:
        loc = ds.locations[entry.location_id]
        cell = unit_time_lookup(ds.unit_times, entry.test_id, loc.location_type)
        occurrences = annualize(entry.frequency)

        suppressed = 0.0
        spec = ds.catalog[entry.test_id]
        if spec.addon_of is not None:
            parent = parents.get((entry.location_id, spec.addon_of))
            if parent is not None:
                # co-performed occurrences travel free with the parent visit
                suppressed = min(occurrences, annualize(parent.frequency))
        charged = occurrences - suppressed

        if cell is None and charged > 1e-12:
            raise WorkloadError(
                f"schedule entry ({entry.location_id}, {entry.test_id}) has no applicable "
                f"unit time for location type {int(loc.location_type)}"
            )
        hours = charged * (cell or 0.0) * ds.unit_times.day_hours

        audit.append(AuditRow(
            base_id=loc.maintenance_base,
            craft=entry.craft,
            location_id=entry.location_id,
            test_id=entry.test_id,
            frequency=str(entry.frequency),
            unit_days=cell,
            annual_occurrences=occurrences,
            suppressed_occurrences=suppressed,
            hours=hours,
        ))

    audit.sort(key=lambda r: (r.base_id, r.craft, r.location_id, r.test_id))
    for row in audit:
        key = (row.base_id, row.craft)
        totals[key] = totals.get(key, 0.0) + row.hours

    gang_hours = [
        GangHours(base_id=base, craft=craft, category=Category.FRA, hours=hours)
        for (base, craft), hours in sorted(totals.items())
        if hours > 0  # groups holding only suppressed add-ons carry no demand
    ]
    return gang_hours, audit


def write_audit_csv(audit: list[AuditRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "base_id", "craft", "location_id", "test_id", "frequency",
            "unit_days", "annual_occurrences", "suppressed_occurrences",
            "annual_hours", "suppressed",
        ])
        for r in audit:
            writer.writerow([
                r.base_id, int(r.craft), r.location_id, r.test_id, r.frequency,
                "" if r.unit_days is None else f"{r.unit_days:g}",
                f"{r.annual_occurrences:g}", f"{r.suppressed_occurrences:g}",
                f"{r.hours:.6f}", "yes" if r.suppressed else "no",
            ])
