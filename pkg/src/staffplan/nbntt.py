"""Non-base, non-trouble-ticket workload: the task inventory priced out.

Each task is "per each" of some unit kind (location, interlocking, division,
yard, maintenance base, bridge); its annual gang-hours at a base are
    unit count x occurrences/year x hours per occurrence,
and man-hours multiply that by the task's crew requirement.
"""

from __future__ import annotations

import logging

from .model import Category, Craft, Dataset, GangHours, LocationType, NbnttTaskSpec, PerEach, TaskScope

log = logging.getLogger(__name__)


def count_units(
    ds: Dataset,
    unit: PerEach,
    scope: TaskScope | None = None,
    division_anchors: dict[str, str] | None = None,
) -> dict[str, int]:
    """Unit counts by responsible maintenance base.

    Division units land on the configured anchor base for the division (first
    base id in the division otherwise). A unit kind absent from the registry
    yields an empty result with a logged warning, not an error. Bases absorbed
    through closure scenarios still contribute their per-base unit.
    """
    in_scope = {
        b.base_id: b for b in ds.bases.values() if scope is None or scope.admits_base(b)
    }
    counts: dict[str, int] = {}

    def add(base_id: str, n: int = 1) -> None:
        if n and base_id in in_scope:
            counts[base_id] = counts.get(base_id, 0) + n

    if unit is PerEach.LOCATION:
        for loc in ds.locations.values():
            add(loc.maintenance_base)
    elif unit is PerEach.INTERLOCKING:
        for loc in ds.locations.values():
            if loc.location_type in (LocationType.SMALL_INTERLOCKING, LocationType.LARGE_INTERLOCKING):
                add(loc.maintenance_base)
    elif unit is PerEach.BRIDGE:
        for loc in ds.locations.values():
            add(loc.maintenance_base, loc.apparatus.get("movable_bridge", 0))
    elif unit is PerEach.MAINT_BASE:
        for base in ds.bases.values():
            if scope is None or scope.admits_base(base):
                # the base itself, plus one unit per base it absorbed through a
                # closure scenario: that per-base work is now done from here
                add(base.base_id, 1 + len(base.merged_bases))
    elif unit is PerEach.YARD:
        for base in ds.bases.values():
            add(base.base_id, len(base.yards))
    elif unit is PerEach.DIVISION:
        anchors = division_anchors or {}
        for division in ds.divisions():
            members = sorted(b.base_id for b in ds.bases.values() if b.division == division)
            anchor = anchors.get(division) or members[0]
            if anchor not in ds.bases:
                anchor = members[0]
            add(anchor)
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unhandled unit kind {unit}")

    if not counts:
        log.warning("no %s units found in scope; task contributes zero hours", unit.value)
    return counts


def compute_nbntt_workload(
    tasks: list[NbnttTaskSpec],
    ds: Dataset,
    division_anchors: dict[str, str] | None = None,
) -> tuple[list[GangHours], dict[tuple[str, Craft], float]]:
    """Gang-hours by (base, craft) plus the task-level man-hours (gang x crew)."""
    gang: dict[tuple[str, Craft], float] = {}
    man: dict[tuple[str, Craft], float] = {}
    for task in tasks:
        counts = count_units(ds, task.per_each, task.scope, division_anchors)
        for base_id, n in sorted(counts.items()):
            hours = n * task.annual_occurrences * task.work_hours
            key = (base_id, task.craft)
            gang[key] = gang.get(key, 0.0) + hours
            man[key] = man.get(key, 0.0) + hours * task.crew
    rows = [
        GangHours(base_id=base, craft=craft, category=Category.NBNTT, hours=hours)
        for (base, craft), hours in sorted(gang.items())
    ]
    return rows, dict(sorted(man.items()))
