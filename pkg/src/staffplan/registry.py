"""Dataset loading, validation, location classification and frequency math.

A dataset is a manifest file naming its member files: JSON for structured
inputs (catalog, unit times, bases, locations, profiles) and CSV for tabular
ones (schedules, fault counts, tickets, tasks, payroll). Column and key sets
are fixed; unknown names are rejected so typos fail loudly.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from datetime import datetime
from pathlib import Path

from .errors import (
    DanglingReferenceError,
    DuplicateKeyError,
    MissingUnitTimeError,
    ParseError,
    UnclassifiableApparatusError,
)
from .model import (
    Craft,
    Dataset,
    DayClass,
    FaultCountTable,
    FieldLocation,
    Finding,
    Frequency,
    FreqUnit,
    LocationType,
    MaintenanceBase,
    NbnttTaskSpec,
    PayrollSnapshot,
    PerEach,
    PfnwProfile,
    RepairProfile,
    TaskScope,
    TestCatalogEntry,
    TicketRecord,
    UnitTimeMatrix,
    ValidationReport,
    WorkScheduleEntry,
    PFNW_CATEGORIES,
)

log = logging.getLogger(__name__)

MANIFEST_REQUIRED = ("catalog", "unit_times", "bases", "locations", "schedules")
MANIFEST_OPTIONAL = (
    "tasks", "fault_counts", "tickets", "repair_profiles",
    "pfnw_profiles", "payroll", "apparatus_requirements",
)

SCHEDULE_COLUMNS = ("location_id", "test_id", "frequency", "performer", "craft", "shift_preference")
TASK_COLUMNS = ("description", "per_each", "annual_occurrences", "work_hours", "crew", "craft", "scope")
TICKET_COLUMNS = ("ticket_id", "location_id", "fault_type", "opened_at", "closed_at")
PAYROLL_COLUMNS = ("base_id", "craft", "count")
FAULT_COLUMNS = ("location_id",) + tuple(f"ft{i}" for i in range(1, 16))

# Apparatus kinds with classification weight. Anything else present alongside
# one of these is carried in the data but does not influence the class.
SWITCH_KIND = "switch_machine"
BRIDGE_KIND = "movable_bridge"
CROSSING_KIND = "grade_crossing_warning"
HAND_SWITCH_KIND = "hand_operated_switch"
WAYSIDE_KINDS = frozenset({
    "code_point", "relay", "overlay", "track_circuit", "signal",
    "hot_box_detector", "battery", "cab_signal", "ctc", "communications",
    "detector", "signal_power", "cable",
})
KNOWN_APPARATUS = WAYSIDE_KINDS | {SWITCH_KIND, BRIDGE_KIND, CROSSING_KIND, HAND_SWITCH_KIND}

_FREQ_RE = re.compile(r"^\s*(\d+)\s*(mo|yr)\s*$", re.IGNORECASE)


# ---------------------------------------------------------------------------
# small operations
# ---------------------------------------------------------------------------

def parse_frequency(text: str, *, path: Path | None = None, line: int | None = None) -> Frequency:
    """Parse '<int> Mo|Yr', case-insensitively and tolerant of extra spaces."""
    m = _FREQ_RE.match(text or "")
    if not m or int(m.group(1)) == 0:
        raise ParseError(
            f"bad frequency {text!r}, expected e.g. '3 Mo' or '2 Yr'",
            path=str(path) if path else None, line=line,
        )
    unit = FreqUnit.MONTH if m.group(2).lower() == "mo" else FreqUnit.YEAR
    return Frequency(int(m.group(1)), unit)


def annualize(freq: Frequency) -> float:
    """Occurrences per year for a frequency: n Mo -> 12/n, n Yr -> 1/n."""
    if freq.unit is FreqUnit.MONTH:
        return 12.0 / freq.count
    return 1.0 / freq.count


def classify_location(apparatus: dict[str, int]) -> LocationType:
    """Classify a location from its installed apparatus.

    Precedence (dominant installation wins): interlocked switches or a movable
    bridge make an interlocking, sized by switch count; then grade crossings;
    then hand-operated switches; any other known wayside kind is a code point /
    cut section / master location. Never silently defaults: an apparatus set
    with no known kind raises.
    """
    if not apparatus:
        raise UnclassifiableApparatusError("location has no apparatus")
    for kind, count in apparatus.items():
        if count < 0:
            raise UnclassifiableApparatusError(f"negative apparatus count {kind}={count}")
    present = {k for k, n in apparatus.items() if n > 0}
    if SWITCH_KIND in present or BRIDGE_KIND in present:
        switches = apparatus.get(SWITCH_KIND, 0)
        return LocationType.LARGE_INTERLOCKING if switches >= 6 else LocationType.SMALL_INTERLOCKING
    if CROSSING_KIND in present:
        return LocationType.GRADE_CROSSING
    if HAND_SWITCH_KIND in present:
        return LocationType.HAND_SWITCH
    if present & WAYSIDE_KINDS:
        return LocationType.CODE_POINT
    raise UnclassifiableApparatusError(
        "no known apparatus kind in " + ", ".join(f"{k} x{n}" for k, n in sorted(apparatus.items()))
    )


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def _read_json(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ParseError("file not found", path=str(path)) from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=str(path), line=exc.lineno) from None


def _expect_keys(obj: dict, required: tuple, optional: tuple, path: Path, ctx: str = "") -> None:
    where = f"{ctx}: " if ctx else ""
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ParseError(f"{where}unknown keys {sorted(unknown)}", path=str(path))
    missing = set(required) - set(obj)
    if missing:
        raise ParseError(f"{where}missing keys {sorted(missing)}", path=str(path))


def _read_csv(path: Path, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> list[tuple[int, dict]]:
    try:
        fh = open(path, encoding="utf-8", newline="")
    except FileNotFoundError:
        raise ParseError("file not found", path=str(path)) from None
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("empty file, expected a header row", path=str(path))
        names = [n.strip() for n in reader.fieldnames]
        unknown = set(names) - set(required) - set(optional)
        if unknown:
            raise ParseError(f"unknown columns {sorted(unknown)}", path=str(path), line=1)
        missing = set(required) - set(names)
        if missing:
            raise ParseError(f"missing columns {sorted(missing)}", path=str(path), line=1)
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if raw.get(None):
                raise ParseError("row has more cells than the header", path=str(path), line=lineno)
            rows.append((lineno, {k.strip(): (v or "").strip() for k, v in raw.items() if k is not None}))
        return rows


def _parse_craft(text: str, path: Path, lineno: int | None = None) -> Craft:
    try:
        return Craft(int(text))
    except (ValueError, KeyError):
        raise ParseError(f"bad craft {text!r}, expected 1-4", path=str(path), line=lineno) from None


def _parse_number(text: str, path: Path, lineno: int | None, column: str, *, minimum: float | None = None) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"bad number {text!r} in column {column}", path=str(path), line=lineno) from None
    if minimum is not None and value < minimum:
        raise ParseError(f"{column} must be >= {minimum}, got {value}", path=str(path), line=lineno)
    return value


_PER_EACH_ALIASES = {
    "location": PerEach.LOCATION,
    "interlocking": PerEach.INTERLOCKING,
    "division": PerEach.DIVISION,
    "yard": PerEach.YARD,
    "maintbase": PerEach.MAINT_BASE,
    "bridge": PerEach.BRIDGE,
}


def parse_per_each(text: str) -> PerEach:
    key = re.sub(r"[^a-z]", "", text.lower())
    if key not in _PER_EACH_ALIASES:
        raise ParseError(f"bad per-each unit {text!r}")
    return _PER_EACH_ALIASES[key]


def _parse_scope(text: str, path: Path, lineno: int) -> TaskScope | None:
    if not text:
        return None
    divisions, bases = set(), set()
    for token in text.split(";"):
        token = token.strip()
        if not token:
            continue
        kind, _, name = token.partition(":")
        if kind == "division" and name:
            divisions.add(name)
        elif kind == "base" and name:
            bases.add(name)
        else:
            raise ParseError(
                f"bad scope token {token!r}, expected division:<name> or base:<id>",
                path=str(path), line=lineno,
            )
    return TaskScope(
        divisions=frozenset(divisions) or None,
        bases=frozenset(bases) or None,
    )


# ---------------------------------------------------------------------------
# member loaders
# ---------------------------------------------------------------------------

def _load_catalog(path: Path) -> dict[str, TestCatalogEntry]:
    obj = _read_json(path)
    _expect_keys(obj, ("tests",), (), path)
    catalog: dict[str, TestCatalogEntry] = {}
    for row in obj["tests"]:
        _expect_keys(row, ("test_id", "name", "frequency", "craft"), ("addon_of",), path, ctx="test")
        test_id = str(row["test_id"])
        if test_id in catalog:
            raise DuplicateKeyError(f"duplicate test_id {test_id!r}", path=str(path))
        catalog[test_id] = TestCatalogEntry(
            test_id=test_id,
            name=str(row["name"]),
            default_frequency=parse_frequency(str(row["frequency"]), path=path),
            craft=Craft(int(row["craft"])),
            addon_of=str(row["addon_of"]) if row.get("addon_of") else None,
        )
    for entry in catalog.values():
        if entry.addon_of is not None:
            if entry.addon_of == entry.test_id:
                raise DanglingReferenceError(f"test {entry.test_id} is an add-on of itself")
            if entry.addon_of not in catalog:
                raise DanglingReferenceError(
                    f"test {entry.test_id} is an add-on of unknown test {entry.addon_of!r}"
                )
    return catalog


def _load_unit_times(path: Path) -> UnitTimeMatrix:
    obj = _read_json(path)
    _expect_keys(obj, ("entries",), ("day_hours",), path)
    entries: dict[str, dict[LocationType, float | None]] = {}
    for row in obj["entries"]:
        _expect_keys(row, ("test_id", "gang_days"), (), path, ctx="entry")
        test_id = str(row["test_id"])
        if test_id in entries:
            raise DuplicateKeyError(f"duplicate unit-time row for test {test_id!r}", path=str(path))
        cells: dict[LocationType, float | None] = {}
        for lt in LocationType:
            raw = row["gang_days"].get(str(lt.value))
            if raw is None:
                cells[lt] = None
                continue
            value = float(raw)
            if value <= 0:
                raise ParseError(
                    f"unit time for test {test_id} type {lt.value} must be positive, got {value}",
                    path=str(path),
                )
            cells[lt] = value
        unknown = set(row["gang_days"]) - {str(lt.value) for lt in LocationType}
        if unknown:
            raise ParseError(f"test {test_id}: unknown location types {sorted(unknown)}", path=str(path))
        entries[test_id] = cells
    return UnitTimeMatrix(entries=entries, day_hours=float(obj.get("day_hours", 8.0)))


def _load_bases(path: Path) -> dict[str, MaintenanceBase]:
    obj = _read_json(path)
    _expect_keys(obj, ("bases",), (), path)
    bases: dict[str, MaintenanceBase] = {}
    for row in obj["bases"]:
        _expect_keys(
            row, ("base_id", "division", "open_shifts", "non_rush_pct"),
            ("adjacent_bases", "yards", "merged_bases"), path, ctx="base",
        )
        base_id = str(row["base_id"])
        if base_id in bases:
            raise DuplicateKeyError(f"duplicate base_id {base_id!r}", path=str(path))
        pct = float(row["non_rush_pct"])
        if not 0 < pct <= 1:
            raise ParseError(f"base {base_id}: non_rush_pct must be in (0, 1], got {pct}", path=str(path))
        open_shifts = {(str(s), DayClass(dc)) for s, dc in row["open_shifts"]}
        bases[base_id] = MaintenanceBase(
            base_id=base_id,
            division=str(row["division"]),
            open_shifts=open_shifts,
            non_rush_pct=pct,
            adjacent_bases=[str(b) for b in row.get("adjacent_bases", [])],
            yards=[str(y) for y in row.get("yards", [])],
            merged_bases=[str(b) for b in row.get("merged_bases", [])],
        )
    for base in bases.values():
        for adj in base.adjacent_bases:
            if adj not in bases:
                raise DanglingReferenceError(f"base {base.base_id} adjacent to unknown base {adj!r}")
    return bases


def _load_locations(path: Path, bases: dict[str, MaintenanceBase]) -> dict[str, FieldLocation]:
    obj = _read_json(path)
    _expect_keys(obj, ("locations",), (), path)
    locations: dict[str, FieldLocation] = {}
    for row in obj["locations"]:
        _expect_keys(
            row, ("location_id", "line", "milepost", "apparatus", "maintenance_base", "division"),
            (), path, ctx="location",
        )
        loc_id = str(row["location_id"])
        if loc_id in locations:
            raise DuplicateKeyError(f"duplicate location_id {loc_id!r}", path=str(path))
        base_id = str(row["maintenance_base"])
        if base_id not in bases:
            raise DanglingReferenceError(f"location {loc_id} assigned to unknown base {base_id!r}")
        apparatus = {str(k): int(v) for k, v in row["apparatus"].items()}
        locations[loc_id] = FieldLocation(
            location_id=loc_id,
            line=str(row["line"]),
            milepost=float(row["milepost"]),
            apparatus=apparatus,
            maintenance_base=base_id,
            division=str(row["division"]),
            location_type=classify_location(apparatus),
        )
    return locations


def _load_schedules(
    path: Path,
    catalog: dict[str, TestCatalogEntry],
    locations: dict[str, FieldLocation],
    strict: bool,
    warnings: list[str],
) -> tuple[list[WorkScheduleEntry], list[dict]]:
    rows = _read_csv(path, ("location_id", "test_id", "performer"), ("frequency", "craft", "shift_preference"))
    entries: list[WorkScheduleEntry] = []
    orphans: list[dict] = []
    seen: set[tuple[str, str]] = set()
    for lineno, row in rows:
        loc_id, test_id = row["location_id"], row["test_id"]
        if test_id not in catalog:
            raise DanglingReferenceError(f"{path}:{lineno}: schedule references unknown test {test_id!r}")
        key = (loc_id, test_id)
        if key in seen:
            raise DuplicateKeyError(f"duplicate schedule entry {key}", path=str(path), line=lineno)
        seen.add(key)
        if loc_id not in locations:
            if strict:
                raise DanglingReferenceError(
                    f"{path}:{lineno}: schedule references unknown location {loc_id!r}"
                )
            orphans.append(dict(row))
            continue
        spec = catalog[test_id]
        entries.append(
            WorkScheduleEntry(
                location_id=loc_id,
                test_id=test_id,
                frequency=(parse_frequency(row["frequency"], path=path, line=lineno)
                           if row.get("frequency") else spec.default_frequency),
                performer=row["performer"],
                craft=_parse_craft(row["craft"], path, lineno) if row.get("craft") else spec.craft,
                shift_preference=row.get("shift_preference") or None,
            )
        )
    if not rows:
        warnings.append(f"{path.name}: schedule file has no rows")
        log.warning("%s: schedule file has no rows", path.name)
    entries.sort(key=lambda e: (e.location_id, e.test_id))
    return entries, orphans


def _load_tasks(path: Path, bases: dict[str, MaintenanceBase]) -> list[NbnttTaskSpec]:
    rows = _read_csv(path, ("description", "per_each", "annual_occurrences", "work_hours", "crew"), ("craft", "scope"))
    tasks = []
    divisions = {b.division for b in bases.values()}
    for lineno, row in rows:
        scope = _parse_scope(row.get("scope", ""), path, lineno)
        if scope is not None:
            for d in scope.divisions or ():
                if d not in divisions:
                    raise DanglingReferenceError(f"{path}:{lineno}: scope names unknown division {d!r}")
            for b in scope.bases or ():
                if b not in bases:
                    raise DanglingReferenceError(f"{path}:{lineno}: scope names unknown base {b!r}")
        tasks.append(
            NbnttTaskSpec(
                description=row["description"],
                per_each=parse_per_each(row["per_each"]),
                annual_occurrences=_parse_number(row["annual_occurrences"], path, lineno, "annual_occurrences", minimum=1e-9),
                work_hours=_parse_number(row["work_hours"], path, lineno, "work_hours", minimum=1e-9),
                crew=int(_parse_number(row["crew"], path, lineno, "crew", minimum=1)),
                craft=_parse_craft(row["craft"], path, lineno) if row.get("craft") else Craft.MAINTAINER,
                scope=scope,
            )
        )
    tasks.sort(key=lambda t: (t.description, t.per_each.value))
    return tasks


def _load_fault_counts(path: Path, locations: dict[str, FieldLocation], strict: bool, warnings: list[str]) -> FaultCountTable:
    rows = _read_csv(path, FAULT_COLUMNS)
    counts: dict[tuple[str, int], int] = {}
    for lineno, row in rows:
        loc_id = row["location_id"]
        if loc_id not in locations:
            if strict:
                raise DanglingReferenceError(f"{path}:{lineno}: fault counts for unknown location {loc_id!r}")
            warnings.append(f"{path.name}:{lineno}: fault counts for unknown location {loc_id!r} dropped")
            continue
        for ft in range(1, 16):
            n = int(_parse_number(row[f"ft{ft}"] or "0", path, lineno, f"ft{ft}", minimum=0))
            if n:
                counts[(loc_id, ft)] = counts.get((loc_id, ft), 0) + n
    return FaultCountTable(counts=counts)


def _load_tickets(path: Path, locations: dict[str, FieldLocation], strict: bool, warnings: list[str]) -> list[TicketRecord]:
    rows = _read_csv(path, TICKET_COLUMNS)
    tickets = []
    seen: set[str] = set()
    for lineno, row in rows:
        tid = row["ticket_id"]
        if tid in seen:
            raise DuplicateKeyError(f"duplicate ticket_id {tid!r}", path=str(path), line=lineno)
        seen.add(tid)
        if row["location_id"] not in locations:
            if strict:
                raise DanglingReferenceError(f"{path}:{lineno}: ticket {tid} at unknown location {row['location_id']!r}")
            warnings.append(f"{path.name}:{lineno}: ticket {tid} at unknown location dropped")
            continue
        try:
            opened = datetime.fromisoformat(row["opened_at"])
            closed = datetime.fromisoformat(row["closed_at"])
        except ValueError as exc:
            raise ParseError(f"bad timestamp: {exc}", path=str(path), line=lineno) from None
        ft = int(_parse_number(row["fault_type"], path, lineno, "fault_type", minimum=1))
        if ft > 15:
            raise ParseError(f"fault_type must be 1-15, got {ft}", path=str(path), line=lineno)
        if closed < opened:
            raise ParseError(f"ticket {tid} closes before it opens", path=str(path), line=lineno)
        tickets.append(TicketRecord(tid, row["location_id"], ft, opened, closed))
    tickets.sort(key=lambda t: (t.opened_at, t.ticket_id))
    return tickets


def _load_repair_profiles(path: Path) -> dict[int, RepairProfile]:
    obj = _read_json(path)
    _expect_keys(obj, ("profiles",), (), path)
    profiles: dict[int, RepairProfile] = {}
    for row in obj["profiles"]:
        _expect_keys(row, ("fault_type", "hours_per_ticket"), ("craft", "crew_size"), path, ctx="profile")
        ft = int(row["fault_type"])
        if ft in profiles:
            raise DuplicateKeyError(f"duplicate repair profile for fault type {ft}", path=str(path))
        if not 1 <= ft <= 15:
            raise ParseError(f"fault_type must be 1-15, got {ft}", path=str(path))
        hours = float(row["hours_per_ticket"])
        crew = int(row.get("crew_size", 2))
        if hours <= 0 or crew < 1:
            raise ParseError(f"profile for fault type {ft} has non-positive hours or crew", path=str(path))
        profiles[ft] = RepairProfile(
            fault_type=ft,
            hours_per_ticket=hours,
            craft=Craft(int(row.get("craft", 1))),
            crew_size=crew,
        )
    return profiles


def _load_pfnw(path: Path) -> dict[Craft, PfnwProfile]:
    obj = _read_json(path)
    _expect_keys(obj, ("profiles",), ("weekdays_per_year",), path)
    default_weekdays = int(obj.get("weekdays_per_year", 261))
    out: dict[Craft, PfnwProfile] = {}
    for row in obj["profiles"]:
        _expect_keys(row, ("craft", "days"), ("weekdays_per_year",), path, ctx="pfnw profile")
        craft = Craft(int(row["craft"]))
        if craft in out:
            raise DuplicateKeyError(f"duplicate PFNW profile for craft {craft}", path=str(path))
        unknown = set(row["days"]) - set(PFNW_CATEGORIES)
        if unknown:
            raise ParseError(f"unknown PFNW categories {sorted(unknown)}", path=str(path))
        days = {k: float(v) for k, v in row["days"].items()}
        if any(v < 0 for v in days.values()):
            raise ParseError(f"negative PFNW days for craft {craft}", path=str(path))
        weekdays = int(row.get("weekdays_per_year", default_weekdays))
        if sum(days.values()) >= weekdays:
            raise ParseError(
                f"craft {craft}: PFNW days {sum(days.values())} must be below weekdays/year {weekdays}",
                path=str(path),
            )
        out[craft] = PfnwProfile(days=days, weekdays_per_year=weekdays)
    return out


def _load_payroll(path: Path, bases: dict[str, MaintenanceBase]) -> PayrollSnapshot | None:
    rows = _read_csv(path, PAYROLL_COLUMNS)
    if not rows:
        return None
    counts: dict[tuple[str, Craft], int] = {}
    for lineno, row in rows:
        base_id = row["base_id"]
        if base_id not in bases:
            raise DanglingReferenceError(f"{path}:{lineno}: payroll names unknown base {base_id!r}")
        craft = _parse_craft(row["craft"], path, lineno)
        key = (base_id, craft)
        if key in counts:
            raise DuplicateKeyError(f"duplicate payroll row for {key}", path=str(path), line=lineno)
        counts[key] = int(_parse_number(row["count"], path, lineno, "count", minimum=0))
    return PayrollSnapshot(counts=counts)


def _load_apparatus_requirements(path: Path, catalog: dict[str, TestCatalogEntry]) -> dict[str, list[str]]:
    obj = _read_json(path)
    _expect_keys(obj, ("requirements",), (), path)
    out: dict[str, list[str]] = {}
    for kind, tests in obj["requirements"].items():
        for t in tests:
            if str(t) not in catalog:
                raise DanglingReferenceError(f"apparatus map requires unknown test {t!r}")
        out[str(kind)] = sorted(str(t) for t in tests)
    return out


# ---------------------------------------------------------------------------
# load / save / validate
# ---------------------------------------------------------------------------

def load_dataset(manifest_path: str | Path, *, strict: bool = True) -> Dataset:
    """Load and cross-link a dataset from its manifest.

    With strict=True (default) any reference to a missing identifier raises.
    With strict=False, schedule/fault/ticket rows naming unknown locations are
    quarantined so validate_dataset can report them as decommissioned-asset
    suspects instead of aborting the run.
    """
    manifest_path = Path(manifest_path)
    manifest = _read_json(manifest_path)
    _expect_keys(manifest, MANIFEST_REQUIRED, MANIFEST_OPTIONAL, manifest_path)
    root = manifest_path.parent

    def member(name: str) -> Path | None:
        if name not in manifest:
            return None
        return root / manifest[name]

    warnings: list[str] = []
    catalog = _load_catalog(member("catalog"))
    unit_times = _load_unit_times(member("unit_times"))
    bases = _load_bases(member("bases"))
    locations = _load_locations(member("locations"), bases)
    schedules, orphans = _load_schedules(member("schedules"), catalog, locations, strict, warnings)

    for entry in schedules:
        if entry.test_id not in unit_times.entries:
            raise MissingUnitTimeError(
                f"scheduled test {entry.test_id!r} has no row in the unit-time matrix"
            )

    tasks = _load_tasks(member("tasks"), bases) if member("tasks") else []
    fault_counts = (
        _load_fault_counts(member("fault_counts"), locations, strict, warnings)
        if member("fault_counts") else FaultCountTable({})
    )
    tickets = _load_tickets(member("tickets"), locations, strict, warnings) if member("tickets") else []
    repair_profiles = _load_repair_profiles(member("repair_profiles")) if member("repair_profiles") else {}
    pfnw_profiles = _load_pfnw(member("pfnw_profiles")) if member("pfnw_profiles") else {}
    payroll = _load_payroll(member("payroll"), bases) if member("payroll") else None
    apparatus_requirements = (
        _load_apparatus_requirements(member("apparatus_requirements"), catalog)
        if member("apparatus_requirements") else None
    )

    return Dataset(
        catalog=catalog,
        locations=locations,
        bases=bases,
        schedules=schedules,
        unit_times=unit_times,
        tasks=tasks,
        fault_counts=fault_counts,
        tickets=tickets,
        repair_profiles=repair_profiles,
        pfnw_profiles=pfnw_profiles,
        payroll=payroll,
        apparatus_requirements=apparatus_requirements,
        orphan_schedules=orphans,
        warnings=warnings,
    )


def save_dataset(ds: Dataset, directory: str | Path) -> Path:
    """Write a dataset back to disk in canonical member files; returns the manifest path.

    Round-trips: load_dataset(save_dataset(ds)) compares equal to ds.
    """
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    manifest: dict[str, str] = {}

    def dump(name: str, obj: dict) -> None:
        manifest[name] = f"{name}.json"
        with open(root / manifest[name], "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def dump_csv(name: str, header: tuple[str, ...], rows: list[list]) -> None:
        manifest[name] = f"{name}.csv"
        with open(root / manifest[name], "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)

    dump("catalog", {
        "tests": [
            {
                "test_id": t.test_id, "name": t.name,
                "frequency": str(t.default_frequency), "craft": int(t.craft),
                **({"addon_of": t.addon_of} if t.addon_of else {}),
            }
            for t in sorted(ds.catalog.values(), key=lambda t: t.test_id)
        ]
    })
    dump("unit_times", {
        "day_hours": ds.unit_times.day_hours,
        "entries": [
            {
                "test_id": tid,
                "gang_days": {
                    str(lt.value): cells[lt] for lt in LocationType if cells[lt] is not None
                },
            }
            for tid, cells in sorted(ds.unit_times.entries.items())
        ],
    })
    dump("bases", {
        "bases": [
            {
                "base_id": b.base_id, "division": b.division,
                "open_shifts": sorted([s, dc.value] for s, dc in b.open_shifts),
                "non_rush_pct": b.non_rush_pct,
                **({"adjacent_bases": b.adjacent_bases} if b.adjacent_bases else {}),
                **({"yards": b.yards} if b.yards else {}),
                **({"merged_bases": b.merged_bases} if b.merged_bases else {}),
            }
            for b in sorted(ds.bases.values(), key=lambda b: b.base_id)
        ]
    })
    dump("locations", {
        "locations": [
            {
                "location_id": loc.location_id, "line": loc.line, "milepost": loc.milepost,
                "apparatus": dict(sorted(loc.apparatus.items())),
                "maintenance_base": loc.maintenance_base, "division": loc.division,
            }
            for loc in sorted(ds.locations.values(), key=lambda l: l.location_id)
        ]
    })
    dump_csv("schedules", SCHEDULE_COLUMNS, [
        [e.location_id, e.test_id, str(e.frequency), e.performer, int(e.craft), e.shift_preference or ""]
        for e in ds.schedules
    ])
    if ds.tasks:
        dump_csv("tasks", TASK_COLUMNS, [
            [
                t.description, t.per_each.value, t.annual_occurrences, t.work_hours, t.crew,
                int(t.craft),
                ";".join(
                    [f"division:{d}" for d in sorted(t.scope.divisions or ())]
                    + [f"base:{b}" for b in sorted(t.scope.bases or ())]
                ) if t.scope else "",
            ]
            for t in ds.tasks
        ])
    if ds.fault_counts.counts:
        by_loc: dict[str, dict[int, int]] = {}
        for (loc, ft), n in ds.fault_counts.counts.items():
            by_loc.setdefault(loc, {})[ft] = n
        dump_csv("fault_counts", FAULT_COLUMNS, [
            [loc] + [by_loc[loc].get(ft, 0) for ft in range(1, 16)] for loc in sorted(by_loc)
        ])
    if ds.tickets:
        dump_csv("tickets", TICKET_COLUMNS, [
            [t.ticket_id, t.location_id, t.fault_type, t.opened_at.isoformat(), t.closed_at.isoformat()]
            for t in ds.tickets
        ])
    if ds.repair_profiles:
        dump("repair_profiles", {
            "profiles": [
                {
                    "fault_type": p.fault_type, "hours_per_ticket": p.hours_per_ticket,
                    "craft": int(p.craft), "crew_size": p.crew_size,
                }
                for p in sorted(ds.repair_profiles.values(), key=lambda p: p.fault_type)
            ]
        })
    if ds.pfnw_profiles:
        dump("pfnw_profiles", {
            "profiles": [
                {
                    "craft": int(craft), "days": dict(sorted(profile.days.items())),
                    "weekdays_per_year": profile.weekdays_per_year,
                }
                for craft, profile in sorted(ds.pfnw_profiles.items())
            ]
        })
    if ds.payroll and ds.payroll.counts:
        dump_csv("payroll", PAYROLL_COLUMNS, [
            [base, int(craft), n] for (base, craft), n in sorted(ds.payroll.counts.items())
        ])
    if ds.apparatus_requirements:
        dump("apparatus_requirements", {"requirements": ds.apparatus_requirements})

    manifest_path = root / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(dict(sorted(manifest.items())), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path


def validate_dataset(ds: Dataset, *, check_required_tests: bool = False) -> ValidationReport:
    """Coverage and consistency checks that are findings, not errors.

    Reports: (a) registry locations absent from the schedule, (b) scheduled
    tests not applicable to the location's type, (c) optionally, locations
    missing tests their apparatus requires, (d) schedule rows that name
    locations absent from the registry (decommissioned-asset suspects, only
    present after a lenient load).
    """
    report = ValidationReport()
    scheduled: dict[str, set[str]] = {}
    for entry in ds.schedules:
        scheduled.setdefault(entry.location_id, set()).add(entry.test_id)

    for loc_id in sorted(ds.locations):
        if loc_id not in scheduled:
            report.findings.append(Finding(
                code="unscheduled-location", severity="warning",
                message=f"location {loc_id} receives no scheduled tests", subject=loc_id,
            ))

    for entry in ds.schedules:
        loc = ds.locations[entry.location_id]
        cell = ds.unit_times.entries.get(entry.test_id, {}).get(loc.location_type)
        if cell is not None:
            continue
        if _fully_addon_suppressed(ds, entry, scheduled):
            continue
        report.findings.append(Finding(
            code="not-applicable", severity="error",
            message=(
                f"test {entry.test_id} is not applicable at {entry.location_id} "
                f"(type {int(loc.location_type)})"
            ),
            subject=f"{entry.location_id}/{entry.test_id}",
        ))

    if check_required_tests and ds.apparatus_requirements:
        for loc_id in sorted(scheduled):
            loc = ds.locations.get(loc_id)
            if loc is None:
                continue
            required: set[str] = set()
            for kind, count in loc.apparatus.items():
                if count > 0:
                    required.update(ds.apparatus_requirements.get(kind, ()))
            for test_id in sorted(required - scheduled[loc_id]):
                report.findings.append(Finding(
                    code="missing-test", severity="warning",
                    message=f"location {loc_id} apparatus requires test {test_id} but it is not scheduled",
                    subject=f"{loc_id}/{test_id}",
                ))

    for row in ds.orphan_schedules:
        report.findings.append(Finding(
            code="decommissioned", severity="error",
            message=(
                f"schedule row for {row.get('location_id')!r} names a location absent from the "
                "registry (decommissioned asset?)"
            ),
            subject=str(row.get("location_id")),
        ))

    return report


def _fully_addon_suppressed(ds: Dataset, entry: WorkScheduleEntry, scheduled: dict[str, set[str]]) -> bool:
    spec = ds.catalog.get(entry.test_id)
    if spec is None or spec.addon_of is None:
        return False
    if spec.addon_of not in scheduled.get(entry.location_id, ()):
        return False
    parent = next(
        e for e in ds.schedules
        if e.location_id == entry.location_id and e.test_id == spec.addon_of
    )
    return annualize(parent.frequency) >= annualize(entry.frequency) - 1e-12
