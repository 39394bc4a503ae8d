"""Engine configuration: policy knobs and the shift/curfew calendar.

Everything the coverage model needs beyond the dataset lives here: day length,
crew matrix, rounding policy, coverage templates, shift preferences, per-cell
allotment overrides, exemptions from the two-person minimum, heavy-gang sizing,
division anchor bases and the calendar.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .model import Category, Craft, DayClass, PfnwProfile, PFNW_CATEGORIES
from .shifts import ShiftCalendar


@dataclass(frozen=True)
class RoundingPolicy:
    """How fractional FTEs become integer positions.

    kind "nearest" rounds half up, "ceil" always rounds up, "threshold" rounds
    up when the fractional part reaches the given threshold.
    """

    kind: str = "nearest"
    threshold: float = 0.5

    def __post_init__(self):
        if self.kind not in ("nearest", "ceil", "threshold"):
            raise ConfigError(f"unknown rounding policy {self.kind!r}")
        if self.kind == "threshold" and not 0 < self.threshold <= 1:
            raise ConfigError(f"rounding threshold must be in (0, 1], got {self.threshold}")

    def positions(self, fte: float) -> int:
        if fte < 0:
            raise ConfigError(f"cannot allot a negative FTE {fte}")
        if self.kind == "ceil":
            return math.ceil(fte)
        cut = 0.5 if self.kind == "nearest" else self.threshold
        whole = math.floor(fte)
        # tolerance keeps quotient-derived values like 4.3 from falling a ULP
        # short of their intended threshold
        return whole + (1 if fte - whole >= cut - 1e-9 else 0)


@dataclass
class CrewMatrix:
    """Minimum gang size by (workload category, craft).

    With no default, a lookup outside the explicit entries is a hard error so
    an incomplete matrix cannot silently understate man-hours.
    """

    default: int | None = 2
    overrides: dict[tuple[Category, Craft], int] = field(default_factory=dict)

    def size(self, category: Category, craft: Craft) -> int:
        try:
            return self.overrides[(category, craft)]
        except KeyError:
            if self.default is None:
                raise ConfigError(
                    f"crew matrix has no entry for ({category.value}, craft {int(craft)}) and no default"
                ) from None
            return self.default


@dataclass(frozen=True)
class CoverageTemplate:
    """A named staffing pattern: how many positions cover which shift/day pairs."""

    name: str
    positions_required: int
    shifts_covered: frozenset[tuple[str, DayClass]]

    def shift_ids(self, preference: list[str]) -> list[str]:
        ids = {s for s, _dc in self.shifts_covered}
        ordered = [s for s in preference if s in ids]
        ordered += sorted(ids - set(ordered))
        return ordered


DEFAULT_TEMPLATES = (
    CoverageTemplate(
        "weekday-two-shift", 4,
        frozenset({("1", DayClass.WEEKDAY), ("2", DayClass.WEEKDAY)}),
    ),
    CoverageTemplate(
        "continuous", 9,
        frozenset({(s, dc) for s in ("1", "2", "3") for dc in DayClass}),
    ),
)

DEFAULT_CALENDAR = {
    "shifts": [
        {"shift_id": "1", "start": "07:00", "end": "15:00"},
        {"shift_id": "2", "start": "15:00", "end": "23:00"},
        {"shift_id": "3", "start": "23:00", "end": "07:00"},
    ],
    "rush_windows": {
        "default": {
            "weekday": [["06:30", "09:30"], ["16:00", "19:30"]],
            "weekend": [],
        }
    },
}

_CONFIG_KEYS_REQUIRED = ()
_CONFIG_KEYS_OPTIONAL = (
    "day_hours", "weekdays_per_year", "rounding", "crew", "templates",
    "shift_preference", "shift_preference_by_base", "min_crew_exemptions",
    "allotment_overrides", "heavy_gang_size", "division_anchors",
    "adjacency_overrides", "travel_surcharge_pct", "pfnw_profiles",
    "calendar", "check_required_tests",
)


@dataclass
class EngineConfig:
    day_hours: float = 8.0
    weekdays_per_year: int = 261
    rounding: RoundingPolicy = field(default_factory=RoundingPolicy)
    crew: CrewMatrix = field(default_factory=CrewMatrix)
    templates: list[CoverageTemplate] = field(default_factory=lambda: list(DEFAULT_TEMPLATES))
    shift_preference: list[str] = field(default_factory=lambda: ["1", "2", "3"])
    shift_preference_by_base: dict[str, list[str]] = field(default_factory=dict)
    min_crew_exemptions: set[str] = field(default_factory=set)
    allotment_overrides: dict[tuple[str, Craft], int] = field(default_factory=dict)
    heavy_gang_size: int = 4
    division_anchors: dict[str, str] = field(default_factory=dict)
    adjacency_overrides: dict[str, list[str]] = field(default_factory=dict)
    travel_surcharge_pct: float = 0.0
    pfnw_profiles: dict[Craft, PfnwProfile] = field(default_factory=dict)
    calendar: ShiftCalendar = field(default_factory=lambda: ShiftCalendar.from_dict(DEFAULT_CALENDAR))
    check_required_tests: bool = False
    source_sha256: str | None = None

    def preference_for(self, base_id: str) -> list[str]:
        return self.shift_preference_by_base.get(base_id, self.shift_preference)

    def template_ladder(self) -> list[CoverageTemplate]:
        return sorted(self.templates, key=lambda t: (t.positions_required, t.name))


def load_config(path: str | Path) -> EngineConfig:
    path = Path(path)
    try:
        raw_bytes = path.read_bytes()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    try:
        obj = json.loads(raw_bytes)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc.msg} (line {exc.lineno})") from None
    cfg = config_from_dict(obj, context=str(path))
    cfg.source_sha256 = hashlib.sha256(raw_bytes).hexdigest()
    return cfg


def config_from_dict(obj: dict, context: str = "config") -> EngineConfig:
    unknown = set(obj) - set(_CONFIG_KEYS_REQUIRED) - set(_CONFIG_KEYS_OPTIONAL)
    if unknown:
        raise ConfigError(f"{context}: unknown config keys {sorted(unknown)}")

    rounding = RoundingPolicy()
    if "rounding" in obj:
        r = obj["rounding"]
        rounding = RoundingPolicy(kind=r.get("policy", "nearest"), threshold=float(r.get("threshold", 0.5)))

    crew = CrewMatrix()
    if "crew" in obj:
        c = obj["crew"]
        default = c.get("default", 2)
        overrides: dict[tuple[Category, Craft], int] = {}
        for cat_name, per_craft in c.get("overrides", {}).items():
            cat = Category(cat_name)
            for craft_code, size in per_craft.items():
                if int(size) < 1:
                    raise ConfigError(f"{context}: crew sizes must be >= 1")
                overrides[(cat, Craft(int(craft_code)))] = int(size)
        crew = CrewMatrix(default=None if default is None else int(default), overrides=overrides)

    templates = list(DEFAULT_TEMPLATES)
    if "templates" in obj:
        templates = []
        for t in obj["templates"]:
            covered = frozenset((str(s), DayClass(dc)) for s, dc in t["covers"])
            if int(t["positions"]) < 1:
                raise ConfigError(f"{context}: template {t.get('name')!r} needs >= 1 position")
            templates.append(CoverageTemplate(str(t["name"]), int(t["positions"]), covered))
        if not templates:
            raise ConfigError(f"{context}: template list may not be empty")

    overrides_map: dict[tuple[str, Craft], int] = {}
    for key, value in obj.get("allotment_overrides", {}).items():
        base_id, _, craft_code = key.partition(":")
        if not base_id or not craft_code:
            raise ConfigError(f"{context}: allotment override keys look like 'BASE:craft', got {key!r}")
        overrides_map[(base_id, Craft(int(craft_code)))] = int(value)

    pfnw: dict[Craft, PfnwProfile] = {}
    for craft_code, profile in obj.get("pfnw_profiles", {}).items():
        unknown_days = set(profile.get("days", {})) - set(PFNW_CATEGORIES)
        if unknown_days:
            raise ConfigError(f"{context}: unknown PFNW categories {sorted(unknown_days)}")
        days = {k: float(v) for k, v in profile.get("days", {}).items()}
        weekdays_for_craft = int(profile.get("weekdays_per_year", obj.get("weekdays_per_year", 261)))
        if sum(days.values()) >= weekdays_for_craft:
            raise ConfigError(
                f"{context}: craft {craft_code} PFNW days {sum(days.values())} leave no working days"
            )
        pfnw[Craft(int(craft_code))] = PfnwProfile(days=days, weekdays_per_year=weekdays_for_craft)

    day_hours = float(obj.get("day_hours", 8.0))
    if day_hours <= 0:
        raise ConfigError(f"{context}: day_hours must be positive")
    weekdays = int(obj.get("weekdays_per_year", 261))
    if weekdays <= 0:
        raise ConfigError(f"{context}: weekdays_per_year must be positive")

    return EngineConfig(
        day_hours=day_hours,
        weekdays_per_year=weekdays,
        rounding=rounding,
        crew=crew,
        templates=templates,
        shift_preference=[str(s) for s in obj.get("shift_preference", ["1", "2", "3"])],
        shift_preference_by_base={
            b: [str(s) for s in pref] for b, pref in obj.get("shift_preference_by_base", {}).items()
        },
        min_crew_exemptions=set(obj.get("min_crew_exemptions", [])),
        allotment_overrides=overrides_map,
        heavy_gang_size=int(obj.get("heavy_gang_size", 4)),
        division_anchors={str(d): str(b) for d, b in obj.get("division_anchors", {}).items()},
        adjacency_overrides={
            b: [str(a) for a in adj] for b, adj in obj.get("adjacency_overrides", {}).items()
        },
        travel_surcharge_pct=float(obj.get("travel_surcharge_pct", 0.0)),
        pfnw_profiles=pfnw,
        calendar=ShiftCalendar.from_dict(obj.get("calendar", DEFAULT_CALENDAR)),
        check_required_tests=bool(obj.get("check_required_tests", False)),
    )
