"""Shift and rush-curfew calendar: classifies instants and partitions intervals.

Shifts are defined by time-of-day and must tile the full 24 hours; a shift
whose end is at or before its start wraps past midnight. Rush (work-curfew)
windows are per day-class, with per-location overrides for territories whose
peaks run earlier or later than the system default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta

from .errors import ConfigError
from .model import DayClass

MINUTES_PER_DAY = 24 * 60


def _parse_hhmm(text: str) -> int:
    try:
        hh, mm = text.strip().split(":")
        minute = int(hh) * 60 + int(mm)
    except (ValueError, AttributeError):
        raise ConfigError(f"bad time of day {text!r}, expected HH:MM") from None
    if not 0 <= minute <= MINUTES_PER_DAY:
        raise ConfigError(f"time of day {text!r} out of range")
    return minute % MINUTES_PER_DAY


@dataclass(frozen=True)
class ShiftDef:
    shift_id: str
    start: int  # minutes from midnight, inclusive
    end: int    # minutes from midnight, exclusive; <= start means wrap

    def covers(self, minute: int) -> bool:
        if self.start < self.end:
            return self.start <= minute < self.end
        return minute >= self.start or minute < self.end


@dataclass(frozen=True)
class Segment:
    """One homogeneous slice of a ticket's open interval."""

    shift_id: str
    day_class: DayClass
    rush: bool
    seconds: float


@dataclass
class ShiftCalendar:
    shifts: list[ShiftDef]
    # rush windows as (start_minute, end_minute) half-open, start < end
    default_rush: dict[DayClass, list[tuple[int, int]]] = field(default_factory=dict)
    location_rush: dict[str, dict[DayClass, list[tuple[int, int]]]] = field(default_factory=dict)

    def __post_init__(self):
        self._validate_tiling()

    def _validate_tiling(self) -> None:
        if not self.shifts:
            raise ConfigError("calendar defines no shifts")
        seen = [s.shift_id for s in self.shifts]
        if len(set(seen)) != len(seen):
            raise ConfigError(f"duplicate shift ids in calendar: {seen}")
        covered = [0] * MINUTES_PER_DAY
        for s in self.shifts:
            for m in range(MINUTES_PER_DAY):
                if s.covers(m):
                    covered[m] += 1
        bad = [m for m, n in enumerate(covered) if n != 1]
        if bad:
            raise ConfigError(
                f"shifts must tile the day exactly once; first bad minute {bad[0] // 60:02d}:{bad[0] % 60:02d}"
            )

    @classmethod
    def from_dict(cls, obj: dict) -> "ShiftCalendar":
        unknown = set(obj) - {"shifts", "rush_windows"}
        if unknown:
            raise ConfigError(f"unknown calendar keys {sorted(unknown)}")
        rush = obj.get("rush_windows", {})
        unknown = set(rush) - {"default", "by_location"}
        if unknown:
            raise ConfigError(f"unknown rush_windows keys {sorted(unknown)}")
        shifts = [
            ShiftDef(str(s["shift_id"]), _parse_hhmm(s["start"]), _parse_hhmm(s["end"]))
            for s in obj.get("shifts", [])
        ]

        def windows(raw: dict) -> dict[DayClass, list[tuple[int, int]]]:
            out: dict[DayClass, list[tuple[int, int]]] = {}
            for dc_name, pairs in raw.items():
                dc = DayClass(dc_name)
                ws = []
                for a, b in pairs:
                    lo, hi = _parse_hhmm(a), _parse_hhmm(b)
                    if lo >= hi:
                        raise ConfigError(f"rush window {a}-{b} must not wrap midnight; split it")
                    ws.append((lo, hi))
                out[dc] = sorted(ws)
            return out

        return cls(
            shifts=shifts,
            default_rush=windows(rush.get("default", {})),
            location_rush={
                loc: windows(raw) for loc, raw in sorted(rush.get("by_location", {}).items())
            },
        )

    # ------------------------------------------------------------------
    # classification
    # ------------------------------------------------------------------

    def shift_at(self, dt: datetime) -> str:
        minute = dt.hour * 60 + dt.minute
        for s in self.shifts:
            if s.covers(minute):
                return s.shift_id
        raise ConfigError(f"no shift covers {dt}")  # unreachable after tiling check

    def rush_windows_for(self, location_id: str | None, day_class: DayClass) -> list[tuple[int, int]]:
        if location_id is not None and location_id in self.location_rush:
            return self.location_rush[location_id].get(day_class, [])
        return self.default_rush.get(day_class, [])

    def is_rush(self, dt: datetime, location_id: str | None) -> bool:
        # sub-minute precision: windows are stored in minutes, compared in seconds
        frac = dt.hour * 3600 + dt.minute * 60 + dt.second + dt.microsecond / 1e6
        dc = day_class_of(dt)
        return any(lo * 60 <= frac < hi * 60 for lo, hi in self.rush_windows_for(location_id, dc))

    # ------------------------------------------------------------------
    # interval partitioning
    # ------------------------------------------------------------------

    def partition(self, opened: datetime, closed: datetime, location_id: str | None) -> list[Segment]:
        """Split [opened, closed) into segments homogeneous in shift, day class and rush state.

        Zero-length intervals produce no segments; callers that need the
        containing shift of an instant should use shift_at().
        """
        if closed < opened:
            raise ValueError("interval ends before it starts")
        if closed == opened:
            return []

        cuts = {opened, closed}
        day = datetime(opened.year, opened.month, opened.day)
        while day < closed:
            nxt = day + timedelta(days=1)
            cuts.add(nxt)  # midnight: day-class may flip
            dc = day_class_of(day)
            bounds = set()
            for s in self.shifts:
                bounds.add(s.start)
                bounds.add(s.end)
            for lo, hi in self.rush_windows_for(location_id, dc):
                bounds.add(lo)
                bounds.add(hi)
            for minute in bounds:
                cuts.add(day + timedelta(minutes=minute))
            day = nxt

        marks = sorted(t for t in cuts if opened <= t <= closed)
        segments: list[Segment] = []
        for a, b in zip(marks, marks[1:]):
            if a == b:
                continue
            mid = a + (b - a) / 2
            segments.append(
                Segment(
                    shift_id=self.shift_at(mid),
                    day_class=day_class_of(mid),
                    rush=self.is_rush(mid, location_id),
                    seconds=(b - a).total_seconds(),
                )
            )
        return segments


def day_class_of(dt: datetime) -> DayClass:
    return DayClass.WEEKEND if dt.weekday() >= 5 else DayClass.WEEKDAY
