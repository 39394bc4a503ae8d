"""staffplan: workload-based staffing for railway signal maintenance.

Converts test schedules, failure history and task inventories into annual
gang-hours, man-hours by craft, FTE requirements and integer allotted
positions per maintenance base and shift, plus productivity-loss, utilization
and staffing-stress reports.
"""

from .base_workload import compute_base_workload, unit_time_lookup
from .config import EngineConfig, load_config
from .coverage import (
    aggregate_demand,
    allot_positions,
    compute_fte,
    heavy_gangs,
    productive_hours,
    run_coverage_pipeline,
    vacation_relief,
)
from .model import Category, Craft, Dataset, Frequency, GangHours, LocationType
from .nbntt import compute_nbntt_workload, count_units
from .registry import annualize, classify_location, load_dataset, save_dataset, validate_dataset
from .reports import (
    run_full,
    scenario_close_location,
    staffing_stress,
    time_allocation_report,
    utilization_report,
)
from .trouble import compute_trouble_workload, derive_shift_stats

__version__ = "0.1.0"

__all__ = [
    "Category", "Craft", "Dataset", "EngineConfig", "Frequency", "GangHours",
    "LocationType", "aggregate_demand", "allot_positions", "annualize",
    "classify_location", "compute_base_workload", "compute_fte",
    "compute_nbntt_workload", "compute_trouble_workload", "count_units",
    "derive_shift_stats", "heavy_gangs", "load_config", "load_dataset",
    "productive_hours", "run_coverage_pipeline", "run_full", "save_dataset",
    "scenario_close_location", "staffing_stress", "time_allocation_report",
    "unit_time_lookup", "utilization_report", "vacation_relief", "validate_dataset",
    "__version__",
]
