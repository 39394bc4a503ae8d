"""Exception hierarchy for the staffing engine.

Hard errors derive from StaffPlanError so the CLI can map them to a single
exit code; validation findings are *not* exceptions (see registry.validate_dataset).
"""

from __future__ import annotations


class StaffPlanError(Exception):
    """Base class for all engine errors."""


class ParseError(StaffPlanError):
    """A file could not be parsed. Carries file and, where known, line number."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)


class DuplicateKeyError(ParseError):
    """Two records share an identifier that must be unique."""


class DanglingReferenceError(StaffPlanError):
    """A record references an identifier that does not exist."""


class UnclassifiableApparatusError(StaffPlanError):
    """No classification rule matches the apparatus at a location."""


class MissingUnitTimeError(StaffPlanError):
    """A scheduled test has no row in the unit-time matrix."""


class WorkloadError(StaffPlanError):
    """A workload computation cannot proceed (bad entry, missing profile...)."""


class ConfigError(StaffPlanError):
    """Engine configuration is missing, inconsistent, or produces nonsense."""


class LedgerGapError(StaffPlanError):
    """The coverage stage ledger is missing entries a report needs."""
