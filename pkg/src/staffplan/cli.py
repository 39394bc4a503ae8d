"""Command-line interface.

Verbs: validate, base, trouble, nbntt, coverage, report, and
scenario close-location <base>. Every verb takes --manifest and --config;
output files land in --out with stable names. Exit codes: 0 success,
1 validation findings at error severity, 2 hard errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import reports
from .base_workload import compute_base_workload, write_audit_csv
from .config import EngineConfig, load_config
from .errors import StaffPlanError
from .nbntt import compute_nbntt_workload
from .registry import load_dataset, validate_dataset
from .trouble import compute_trouble_workload, derive_shift_stats

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="staffplan",
        description="Workload-based staffing engine for signal maintenance departments.",
    )
    parser.add_argument("--verbose", action="store_true", help="log at debug level")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--manifest", required=True, help="dataset manifest JSON")
        p.add_argument("--config", help="engine config JSON (defaults apply when omitted)")
        p.add_argument("--out", default="out", help="output directory (default: ./out)")

    common(sub.add_parser("validate", help="check dataset coverage and consistency"))
    common(sub.add_parser("base", help="federally mandated test workload"))
    common(sub.add_parser("trouble", help="repair maintenance workload from failure history"))
    common(sub.add_parser("nbntt", help="non-base, non-trouble-ticket workload"))
    common(sub.add_parser("coverage", help="man-hours, FTEs and allotted positions"))
    common(sub.add_parser("report", help="full pipeline plus every report"))

    scenario = sub.add_parser("scenario", help="what-if analyses")
    scenario_sub = scenario.add_subparsers(dest="scenario_command", required=True)
    close = scenario_sub.add_parser("close-location", help="close a base, transfer its work")
    close.add_argument("base", help="two-letter base id to close")
    common(close)

    return parser


def _load(args) -> tuple:
    strict = args.command != "validate"
    ds = load_dataset(args.manifest, strict=strict)
    config = load_config(args.config) if args.config else EngineConfig()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return ds, config, out_dir


def _write_manifest(out_dir: Path, args, config: EngineConfig) -> None:
    reports.write_run_manifest(
        out_dir / "run_manifest.json",
        manifest_path=Path(args.manifest),
        config=config,
    )


def cmd_validate(args) -> int:
    ds, config, out_dir = _load(args)
    report = validate_dataset(ds, check_required_tests=config.check_required_tests)
    for warning in ds.warnings:
        print(f"warning: {warning}")
    for finding in report.findings:
        print(f"{finding.severity}: [{finding.code}] {finding.message}")
    print(f"{len(report.findings)} finding(s), "
          f"{sum(1 for f in report.findings if f.severity == 'error')} error(s)")
    return EXIT_FINDINGS if report.has_errors() else EXIT_OK


def cmd_base(args) -> int:
    ds, config, out_dir = _load(args)
    rows, audit = compute_base_workload(ds)
    write_audit_csv(audit, out_dir / "base_audit.csv")
    _write_manifest(out_dir, args, config)
    total = sum(r.hours for r in rows)
    print(f"FRA test workload: {total:.1f} gang-hours/year over {len(audit)} schedule entries")
    for r in rows:
        print(f"  {r.base_id} craft {int(r.craft)}: {r.hours:.1f}")
    return EXIT_OK


def cmd_trouble(args) -> int:
    ds, config, out_dir = _load(args)
    stats = None
    if ds.tickets:
        stats = derive_shift_stats(ds.tickets, config.calendar, set(ds.locations))
        print("shift share of tickets: "
              + ", ".join(f"{s}: {v:.2f}" for s, v in stats.shift_share.items()))
        print(f"off-peak commitment: {stats.offpeak_commitment():.3f}")
    rows = compute_trouble_workload(
        ds.fault_counts, ds.repair_profiles, stats, ds,
        travel_surcharge_pct=config.travel_surcharge_pct,
    )
    _write_manifest(out_dir, args, config)
    print(f"trouble workload: {sum(r.hours for r in rows):.1f} gang-hours/year")
    for r in rows:
        print(f"  {r.base_id} craft {int(r.craft)}: {r.hours:.1f}")
    return EXIT_OK


def cmd_nbntt(args) -> int:
    ds, config, out_dir = _load(args)
    rows, man = compute_nbntt_workload(ds.tasks, ds, config.division_anchors)
    _write_manifest(out_dir, args, config)
    print(f"non-base non-trouble-ticket workload: {sum(r.hours for r in rows):.1f} gang-hours/year, "
          f"{sum(man.values()):.1f} man-hours/year")
    for r in rows:
        print(f"  {r.base_id} craft {int(r.craft)}: {r.hours:.1f}")
    return EXIT_OK


def cmd_coverage(args) -> int:
    ds, config, out_dir = _load(args)
    run = reports.run_full(ds, config)
    reports.write_allotment_csv(out_dir / "allotment.csv", run, ds)
    _write_manifest(out_dir, args, config)
    print(reports.format_allotment_text(run, ds))
    for finding in run.allotment.findings:
        print(f"note: {finding}")
    return EXIT_OK


def cmd_report(args) -> int:
    ds, config, out_dir = _load(args)
    run = reports.run_full(ds, config)
    reports.write_allotment_csv(out_dir / "allotment.csv", run, ds)
    reports.write_time_allocation_csv(out_dir / "time_allocation.csv", run.time_allocation)
    reports.write_utilization_csv(out_dir / "utilization.csv", run.utilization)
    if run.stress is not None:
        reports.write_stress_csv(out_dir / "stress.csv", run.stress)
    write_audit_csv(run.fra_audit, out_dir / "base_audit.csv")
    _write_manifest(out_dir, args, config)
    print(reports.format_allotment_text(run, ds))
    print()
    print(reports.format_utilization_text(run.utilization))
    print()
    print(reports.format_time_allocation_text(run.time_allocation))
    if run.stress is not None and run.stress.stressed:
        print()
        print(f"staffing stress: {run.stress.note}")
    return EXIT_OK


def cmd_scenario_close(args) -> int:
    ds, config, out_dir = _load(args)
    result = reports.scenario_close_location(ds, args.base, config)
    reports.write_scenario_csv(out_dir / "scenario_delta.csv", result)
    _write_manifest(out_dir, args, config)
    before = result.before.allotment.total_positions()
    after = result.after.allotment.total_positions()
    print(f"close {result.closed_base}: workload moves to {result.adopting_base}; "
          f"allotted positions {before} -> {after}")
    print(result.caveat)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    handlers = {
        "validate": cmd_validate,
        "base": cmd_base,
        "trouble": cmd_trouble,
        "nbntt": cmd_nbntt,
        "coverage": cmd_coverage,
        "report": cmd_report,
    }
    try:
        if args.command == "scenario":
            return cmd_scenario_close(args)
        return handlers[args.command](args)
    except StaffPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entry() -> None:  # console-script shim
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
