"""Repair-maintenance workload from failure counts and ticket timestamps.

Failure counts by (location, fault type) convert to gang-hours through repair
profiles; ticket open/close timestamps yield the shift-share and rush/off-peak
statistics that decide how much of that burden competes with preventative work.
"""

from __future__ import annotations

from .errors import DanglingReferenceError, WorkloadError
from .model import (
    Category,
    Craft,
    Dataset,
    FaultCountTable,
    GangHours,
    RepairProfile,
    ShiftStats,
    TicketRecord,
)
from .shifts import ShiftCalendar


def derive_shift_stats(
    tickets: list[TicketRecord],
    calendar: ShiftCalendar,
    known_locations: set[str] | None = None,
) -> ShiftStats:
    """Shift impact counts and rush/off-peak open-hour fractions from tickets.

    A ticket is counted once for every shift its open interval intersects;
    zero-duration tickets count for the shift containing their instant and add
    no open hours. Results are independent of input order.
    """
    if not tickets:
        raise WorkloadError("cannot derive shift statistics from an empty ticket list")

    impacted: dict[str, int] = {}
    open_seconds: dict[tuple[str, str], float] = {}
    total_seconds = 0.0

    for t in sorted(tickets, key=lambda t: (t.ticket_id, t.opened_at)):
        if known_locations is not None and t.location_id not in known_locations:
            raise DanglingReferenceError(
                f"ticket {t.ticket_id} references unknown location {t.location_id!r}"
            )
        segments = calendar.partition(t.opened_at, t.closed_at, t.location_id)
        if not segments:
            shift = calendar.shift_at(t.opened_at)
            impacted[shift] = impacted.get(shift, 0) + 1
            continue
        for shift in {s.shift_id for s in segments}:
            impacted[shift] = impacted.get(shift, 0) + 1
        for seg in segments:
            key = (seg.shift_id, "rush" if seg.rush else "offpeak")
            open_seconds[key] = open_seconds.get(key, 0.0) + seg.seconds
            total_seconds += seg.seconds

    n = len(tickets)
    shift_share = {s: count / n for s, count in sorted(impacted.items())}
    open_fraction = (
        {k: v / total_seconds for k, v in sorted(open_seconds.items())}
        if total_seconds > 0 else {}
    )
    return ShiftStats(
        shift_share=shift_share,
        open_fraction=open_fraction,
        total_open_seconds=total_seconds,
        ticket_count=n,
    )


def compute_trouble_workload(
    faults: FaultCountTable,
    profiles: dict[int, RepairProfile],
    stats: ShiftStats | None,
    ds: Dataset,
    *,
    travel_surcharge_pct: float = 0.0,
) -> list[GangHours]:
    """Gang-hours of repair maintenance by (base, craft), with shift attribution.

    Hours for a location land on its home base for shifts the base is staffed;
    shares for unstaffed shifts move to the first adjacent base staffed for
    that shift, optionally marked up by a travel surcharge for the larger
    off-hours district. Without ticket statistics all hours stay home and are
    treated as fully off-peak.
    """
    offpeak = stats.offpeak_commitment() if stats is not None else 1.0
    shares = _normalized_shares(stats)

    buckets: dict[tuple[str, Craft], float] = {}
    shift_hours: dict[tuple[str, Craft], dict[str, float]] = {}

    for (loc_id, fault_type), count in sorted(faults.counts.items()):
        if count == 0:
            continue
        profile = profiles.get(fault_type)
        if profile is None:
            raise WorkloadError(f"no repair profile for fault type {fault_type}")
        loc = ds.locations.get(loc_id)
        if loc is None:
            raise DanglingReferenceError(f"fault counts reference unknown location {loc_id!r}")
        home = ds.bases.get(loc.maintenance_base)
        if home is None:
            raise WorkloadError(f"location {loc_id} maps to unknown base {loc.maintenance_base!r}")
        hours = count * profile.hours_per_ticket

        if shares is None:
            target = home if home.staffed() else _first_staffed_adjacent(ds, home, None, loc_id)
            surcharged = hours if target is home else hours * (1.0 + travel_surcharge_pct)
            buckets[(target.base_id, profile.craft)] = (
                buckets.get((target.base_id, profile.craft), 0.0) + surcharged
            )
            continue

        for shift_id, fraction in shares.items():
            if fraction == 0.0:
                continue
            if home.staffed_for_shift(shift_id):
                target, part = home, hours * fraction
            else:
                target = _first_staffed_adjacent(ds, home, shift_id, loc_id)
                part = hours * fraction * (1.0 + travel_surcharge_pct)
            key = (target.base_id, profile.craft)
            buckets[key] = buckets.get(key, 0.0) + part
            per_shift = shift_hours.setdefault(key, {})
            per_shift[shift_id] = per_shift.get(shift_id, 0.0) + part

    out: list[GangHours] = []
    for (base_id, craft), hours in sorted(buckets.items()):
        attribution = None
        per_shift = shift_hours.get((base_id, craft))
        if per_shift and hours > 0:
            attribution = {s: h / hours for s, h in sorted(per_shift.items())}
        out.append(GangHours(
            base_id=base_id,
            craft=craft,
            category=Category.TROUBLE,
            hours=hours,
            shift_attribution=attribution,
            offpeak_share=offpeak,
        ))
    return out


def _normalized_shares(stats: ShiftStats | None) -> dict[str, float] | None:
    if stats is None:
        return None
    total = sum(stats.shift_share.values())
    if total <= 0:
        return None
    return {s: v / total for s, v in sorted(stats.shift_share.items())}


def _first_staffed_adjacent(ds: Dataset, home, shift_id: str | None, loc_id: str):
    for adj_id in home.adjacent_bases:
        adj = ds.bases.get(adj_id)
        if adj is None:
            continue
        if shift_id is None and adj.staffed():
            return adj
        if shift_id is not None and adj.staffed_for_shift(shift_id):
            return adj
    detail = f"shift {shift_id}" if shift_id is not None else "any shift"
    raise WorkloadError(
        f"no staffed base covers {detail} for location {loc_id} "
        f"(home base {home.base_id}, adjacency {home.adjacent_bases})"
    )
