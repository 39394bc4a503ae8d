"""Domain types: catalog, locations, bases, schedules, workloads.

Everything here is plain data. The loading, validation and computation live in
the registry and workload modules; a loaded Dataset is immutable by convention
and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum, IntEnum


class Craft(IntEnum):
    """Employee specialization classes, numbered as used throughout the data files."""

    MAINTAINER = 1        # maintainer or assistant inspector
    INSPECTOR = 2
    ELECTRONIC_TECH = 3
    TEST_MAINTAINER = 4


class LocationType(IntEnum):
    """Field-location classes that drive unit-time selection."""

    CODE_POINT = 1        # code change point / cut section / master location
    GRADE_CROSSING = 2
    HAND_SWITCH = 3       # hand operated switch
    SMALL_INTERLOCKING = 4  # five switches or fewer
    LARGE_INTERLOCKING = 5  # six switches or more


class Category(str, Enum):
    """Workload streams feeding the coverage model."""

    FRA = "FRA"
    TROUBLE = "Trouble"
    NBNTT = "NbnTT"


class FreqUnit(str, Enum):
    MONTH = "Mo"
    YEAR = "Yr"


class DayClass(str, Enum):
    WEEKDAY = "weekday"
    WEEKEND = "weekend"


class PerEach(str, Enum):
    """Unit kinds a non-FRA task is counted against."""

    LOCATION = "Location"
    INTERLOCKING = "Interlocking"
    DIVISION = "Division"
    YARD = "Yard"
    MAINT_BASE = "Maint. Base"
    BRIDGE = "Bridge"


#: Fault-type legend for failure-occurrence tables (codes are 1-based).
FAULT_TYPE_NAMES = {
    1: "Switch", 2: "Signal", 3: "Cab Signal", 4: "Track Circuit",
    5: "Track Block", 6: "Switch Block", 7: "Fleeting", 8: "Traffic",
    9: "Bridge Span", 10: "Grade Crossing", 11: "CTC", 12: "Communications",
    13: "Detector", 14: "Signal Power", 15: "Other",
}

#: Paid-for-no-work day categories an annual profile itemizes.
PFNW_CATEGORIES = (
    "vacation", "holidays", "sick", "personal",
    "training", "admin_overhead", "uncontrollable",
)


@dataclass(frozen=True)
class Frequency:
    """A test interval such as '1 Mo' or '10 Yr'."""

    count: int
    unit: FreqUnit

    def __post_init__(self):
        if self.count <= 0:
            raise ValueError(f"frequency count must be positive, got {self.count}")

    def __str__(self) -> str:
        return f"{self.count} {self.unit.value}"


@dataclass(frozen=True)
class TestCatalogEntry:
    test_id: str
    name: str
    default_frequency: Frequency
    craft: Craft
    # Tests always performed in tandem with another test carry the parent id
    # here and are charged no additional unit time when co-performed.
    addon_of: str | None = None


@dataclass
class FieldLocation:
    location_id: str
    line: str
    milepost: float
    apparatus: dict[str, int]
    maintenance_base: str
    division: str
    location_type: LocationType  # always derived from apparatus at load time


@dataclass
class MaintenanceBase:
    base_id: str
    division: str
    open_shifts: set[tuple[str, DayClass]]
    non_rush_pct: float  # fraction of a shift assignable outside work curfews
    adjacent_bases: list[str] = field(default_factory=list)
    yards: list[str] = field(default_factory=list)
    # Bases absorbed by this one in a closure scenario; each still counts as a
    # per-base unit for task inventories so workload is conserved.
    merged_bases: list[str] = field(default_factory=list)

    def staffed(self) -> bool:
        return bool(self.open_shifts)

    def staffed_for_shift(self, shift_id: str) -> bool:
        return any(s == shift_id for s, _ in self.open_shifts)


@dataclass
class WorkScheduleEntry:
    location_id: str
    test_id: str
    frequency: Frequency  # effective frequency (entry override or catalog default)
    performer: str
    craft: Craft
    shift_preference: str | None = None


@dataclass
class UnitTimeMatrix:
    """All-inclusive gang-days per (test, location type); None means not applicable."""

    entries: dict[str, dict[LocationType, float | None]]
    day_hours: float = 8.0


@dataclass(frozen=True)
class PfnwProfile:
    """Paid-for-no-work days per year, itemized, for one craft."""

    days: dict[str, float]
    weekdays_per_year: int = 261

    def total_days(self) -> float:
        return sum(self.days.values())


@dataclass
class PayrollSnapshot:
    counts: dict[tuple[str, Craft], int]


@dataclass(frozen=True)
class TaskScope:
    divisions: frozenset[str] | None = None
    bases: frozenset[str] | None = None

    def admits_base(self, base: MaintenanceBase) -> bool:
        if self.bases is not None and base.base_id not in self.bases:
            return False
        if self.divisions is not None and base.division not in self.divisions:
            return False
        return True


@dataclass
class NbnttTaskSpec:
    description: str
    per_each: PerEach
    annual_occurrences: float
    work_hours: float
    crew: int
    craft: Craft = Craft.MAINTAINER
    scope: TaskScope | None = None


@dataclass(frozen=True)
class RepairProfile:
    """Crew and hours needed to close one ticket of a fault type."""

    fault_type: int
    hours_per_ticket: float
    craft: Craft = Craft.MAINTAINER
    crew_size: int = 2


@dataclass
class FaultCountTable:
    """Failures per year by (location, fault type)."""

    counts: dict[tuple[str, int], int]

    def by_location(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for (loc, _ft), n in self.counts.items():
            out[loc] = out.get(loc, 0) + n
        return out


@dataclass(frozen=True)
class TicketRecord:
    ticket_id: str
    location_id: str
    fault_type: int
    opened_at: datetime
    closed_at: datetime

    def __post_init__(self):
        if self.closed_at < self.opened_at:
            raise ValueError(f"ticket {self.ticket_id} closed before it opened")


@dataclass
class ShiftStats:
    """Shift impact and open-hour statistics derived from ticket timestamps."""

    # fraction of tickets whose open interval touched each shift (a ticket can
    # touch several shifts, so values need not sum to 1)
    shift_share: dict[str, float]
    # fraction of total open ticket-hours by (shift, "rush"|"offpeak")
    open_fraction: dict[tuple[str, str], float]
    total_open_seconds: float
    ticket_count: int

    def offpeak_commitment(self) -> float:
        """Share of open ticket-hours that fall outside rush curfews.

        With no observed open time (e.g. only instantaneous tickets) there is
        no evidence either way, so the conservative answer is fully off-peak;
        anything else would silently erase repair demand from the coverage
        model.
        """
        if not self.open_fraction:
            return 1.0
        return sum(v for (_s, kind), v in self.open_fraction.items() if kind == "offpeak")


@dataclass
class GangHours:
    """Annual gang-hours of one workload category attributed to a base and craft."""

    base_id: str
    craft: Craft
    category: Category
    hours: float
    # per-shift split of the hours; fractions sum to 1 when present
    shift_attribution: dict[str, float] | None = None
    # trouble stream only: share of these hours competing with preventative
    # work (off-peak); None is treated as fully off-peak
    offpeak_share: float | None = None


@dataclass
class Finding:
    code: str       # e.g. "missing-location", "not-applicable", "missing-test", "decommissioned"
    severity: str   # "info" | "warning" | "error"
    message: str
    subject: str


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    def has_errors(self) -> bool:
        return any(f.severity == "error" for f in self.findings)

    def by_code(self, code: str) -> list[Finding]:
        return [f for f in self.findings if f.code == code]


@dataclass
class Dataset:
    """Fully cross-linked input data for one planning run."""

    catalog: dict[str, TestCatalogEntry]
    locations: dict[str, FieldLocation]
    bases: dict[str, MaintenanceBase]
    schedules: list[WorkScheduleEntry]
    unit_times: UnitTimeMatrix
    tasks: list[NbnttTaskSpec] = field(default_factory=list)
    fault_counts: FaultCountTable = field(default_factory=lambda: FaultCountTable({}))
    tickets: list[TicketRecord] = field(default_factory=list)
    repair_profiles: dict[int, RepairProfile] = field(default_factory=dict)
    pfnw_profiles: dict[Craft, PfnwProfile] = field(default_factory=dict)
    payroll: PayrollSnapshot | None = None
    apparatus_requirements: dict[str, list[str]] | None = None
    # schedule rows naming locations absent from the registry (lenient loads
    # only); surfaced by validate_dataset as decommissioned-asset suspects
    orphan_schedules: list[dict] = field(default_factory=list, compare=False)
    warnings: list[str] = field(default_factory=list, compare=False)

    def divisions(self) -> list[str]:
        return sorted({b.division for b in self.bases.values()})

    def locations_of_base(self, base_id: str) -> list[FieldLocation]:
        return sorted(
            (loc for loc in self.locations.values() if loc.maintenance_base == base_id),
            key=lambda loc: loc.location_id,
        )
