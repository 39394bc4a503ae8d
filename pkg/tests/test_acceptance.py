"""Acceptance suite: one test per release criterion, one printed line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS/FAIL lines.
"""

import json
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from datagen import random_dataset, stress_dataset
from oracles import check_oracle_equivalence, oracle_trouble_system_total
from staffplan.base_workload import unit_time_lookup
from staffplan.cli import main as cli_main
from staffplan.config import config_from_dict
from staffplan.coverage import allot_positions, compute_fte
from staffplan.model import Category, Craft, DayClass, Frequency, FreqUnit, LocationType, MaintenanceBase
from staffplan.registry import annualize, load_dataset, save_dataset
from staffplan.reports import run_full, scenario_close_location, utilization_report
from staffplan.trouble import compute_trouble_workload, derive_shift_stats

FIXTURES = Path(__file__).parent / "fixtures"


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {name}: FAIL")
        raise
    print(f"ACCEPTANCE {name}: PASS")


def _replay() -> dict:
    with open(FIXTURES / "replay" / "workloads.json", encoding="utf-8") as fh:
        return json.load(fh)


def _replay_config(fixture: dict):
    allot = fixture["allotment"]
    return config_from_dict({
        "rounding": {"policy": allot["rounding"]},
        "allotment_overrides": allot["overrides"],
        "min_crew_exemptions": allot["exempt"],
    })


def _replay_bases(fixture: dict) -> dict[str, MaintenanceBase]:
    return {
        row["base"]: MaintenanceBase(
            base_id=row["base"],
            division=row["division"],
            open_shifts={("1", DayClass.WEEKDAY), ("2", DayClass.WEEKDAY)},
            non_rush_pct=row["non_rush_pct"],
        )
        for row in fixture["rows"]
    }


class TestCriterion1FteReplay:
    def test_every_reference_fte_cell(self):
        with criterion("1 FTE replay"):
            fixture = _replay()
            started = time.perf_counter()
            checked = 0
            for row in fixture["rows"]:
                for craft_code, expected in row["expected_fte"].items():
                    got = compute_fte(
                        row["man_hours"][craft_code],
                        row["productive_hours"][craft_code],
                    )
                    assert got == pytest.approx(expected, abs=0.01), (
                        f"{row['base']} craft {craft_code}: {got:.4f} vs {expected}"
                    )
                    checked += 1
            elapsed = time.perf_counter() - started
            assert checked == 33
            assert elapsed < 0.100, f"replay took {elapsed * 1000:.1f} ms"


class TestCriterion2Totals:
    def test_column_totals_and_allotment(self):
        with criterion("2 staffing-table totals"):
            fixture = _replay()
            rows = fixture["rows"]
            expected = fixture["expected_totals"]

            for column in ("fra", "trouble", "nbntt"):
                total = sum(r["gang_hours"][column] for r in rows)
                assert total == expected["gang_hours"][column], column

            for craft_code, want in expected["man_hours"].items():
                total = sum(r["man_hours"][craft_code] for r in rows)
                assert total == want, f"man-hours craft {craft_code}"

            fte1 = sum(
                compute_fte(r["man_hours"]["1"], r["productive_hours"]["1"])
                for r in rows if r["man_hours"]["1"]
            )
            assert fte1 == pytest.approx(expected["fte_craft1"], abs=0.02)

            fte_map = {}
            for r in rows:
                for craft_code in "1234":
                    mh = r["man_hours"][craft_code]
                    if mh:
                        fte_map[(r["base"], Craft(int(craft_code)))] = compute_fte(
                            mh, r["productive_hours"][craft_code]
                        )
            table = allot_positions(fte_map, _replay_bases(fixture), _replay_config(fixture))
            totals = {str(int(c)): n for c, n in table.craft_totals().items()}
            assert totals == expected["allotted"]


# the 22-row reference unit-time matrix; None marks a not-applicable cell
REFERENCE_MATRIX = [
    (("10", "11"), (0.5, None, 0.5, 0.5, 1)),
    (("16",), (0.33, None, 0.33, None, None)),
    (("18",), (0.5, None, 0.5, 0.5, 1)),
    (("26A", "26B"), (0.5, 0.5, None, 0.5, None)),
    (("31A",), (0.5, None, None, 0.5, 1)),
    (("31C1",), (0.5, 0.5, 0.5, 0.5, 1)),
    (("31C2",), (0.25, None, None, 0.5, 1)),
    (("31D",), (0.5, 1, 0.5, 1, 3)),
    (("32",), (0.5, 0.5, 0.5, 1, 1.5)),
    (("41",), (0.25, 0.5, 0.5, 0.5, 1)),
    (("44",), (None, None, 0.5, 0.5, 1)),
    (("50",), (None, None, None, 0.5, 1)),
    (("500",), (None, None, None, 0.5, 1)),
    (("52A",), (0.5, 0.5, 0.5, 0.5, 1)),
    (("52B",), (None, None, 0.5, 0.5, 1)),
    (("53",), (None, None, None, 0.5, 1.5)),
    (("54",), (None, None, None, 0.5, 1)),
    (("55",), (0.5, 0.5, 0.5, 0.5, 0.5)),
    (("65A",), (0.5, 0.5, 0.5, 0.5, 0.5)),
    (("65B",), (0.5, 0.5, 0.5, 0.5, 0.5)),
    (("76",), (0.5, 0.5, 0.5, 0.5, 1)),
    (("77",), (0.125, 0.125, 0.125, 0.125, 0.125)),
]


class TestCriterion3UnitTimeMatrix:
    def test_all_110_cells(self):
        with criterion("3 unit-time matrix lookup"):
            ds = load_dataset(FIXTURES / "sample" / "manifest.json")
            cells = 0
            for test_ids, values in REFERENCE_MATRIX:
                for loc_type, want in zip(LocationType, values):
                    for tid in test_ids:
                        got = unit_time_lookup(ds.unit_times, tid, loc_type)
                        assert got == want, (tid, loc_type, got, want)
                    cells += 1
            assert cells == 110


class TestCriterion4Annualization:
    def test_all_eight_frequencies(self):
        with criterion("4 annualization"):
            cases = [
                ((1, FreqUnit.MONTH), 12.0), ((3, FreqUnit.MONTH), 4.0),
                ((6, FreqUnit.MONTH), 2.0), ((1, FreqUnit.YEAR), 1.0),
                ((2, FreqUnit.YEAR), 0.5), ((4, FreqUnit.YEAR), 0.25),
                ((5, FreqUnit.YEAR), 0.2), ((10, FreqUnit.YEAR), 0.1),
            ]
            for (count, unit), want in cases:
                assert annualize(Frequency(count, unit)) == want


class TestCriterion5OracleEquivalence:
    def test_two_hundred_randomized_datasets(self):
        with criterion("5 oracle equivalence (200 datasets)"):
            for seed in range(100):
                check_oracle_equivalence(seed, all_shifts_open=True)
            for seed in range(100, 200):
                check_oracle_equivalence(seed, all_shifts_open=False)


class TestCriterion6Conservation:
    def test_conservation_suite(self, sample_manifest, sample_config_path):
        with criterion("6 conservation suite"):
            from staffplan.config import load_config
            ds = load_dataset(sample_manifest)
            config = load_config(sample_config_path)

            run = run_full(ds, config)
            for row in run.time_allocation.rows:
                assert row.components_sum() == pytest.approx(
                    row.paid_hours, rel=1e-9, abs=1e-6
                ), (row.scope_kind, row.scope)

            stats = derive_shift_stats(ds.tickets, config.calendar, set(ds.locations))
            trouble_rows = compute_trouble_workload(
                ds.fault_counts, ds.repair_profiles, stats, ds
            )
            want = oracle_trouble_system_total(ds)
            assert sum(r.hours for r in trouble_rows) == pytest.approx(want, rel=1e-9)

            scenario = scenario_close_location(ds, "DL", config)
            assert sum(scenario.after.pipeline.demand.values()) == pytest.approx(
                sum(scenario.before.pipeline.demand.values()), rel=1e-9
            )

            # and on randomized fixtures
            for seed in (7, 21, 55):
                rds, rconfig, _cal = random_dataset(seed, all_shifts_open=True)
                rrun = run_full(rds, rconfig)
                for row in rrun.time_allocation.rows:
                    assert row.components_sum() == pytest.approx(
                        row.paid_hours, rel=1e-9, abs=1e-6
                    )


class TestCriterion7Determinism:
    def test_byte_identical_and_fast(self, tmp_path):
        with criterion("7 determinism and runtime"):
            ds, config, calendar_dict = stress_dataset(n_locations=100)
            assert len(ds.locations) == 100
            root = tmp_path / "stress"
            manifest = save_dataset(ds, root)
            config_path = root / "config.json"
            config_path.write_text(json.dumps({
                "day_hours": 8,
                "weekdays_per_year": 261,
                "calendar": calendar_dict,
                "division_anchors": config.division_anchors,
            }), encoding="utf-8")

            started = time.perf_counter()
            run_full(load_dataset(manifest), config)
            elapsed = time.perf_counter() - started
            assert elapsed < 1.0, f"pipeline took {elapsed:.2f} s"

            import contextlib
            import io

            out1, out2 = tmp_path / "run1", tmp_path / "run2"
            for out in (out1, out2):
                with contextlib.redirect_stdout(io.StringIO()):
                    code = cli_main([
                        "report", "--manifest", str(manifest),
                        "--config", str(config_path), "--out", str(out),
                    ])
                assert code == 0
            names = sorted(p.name for p in out1.iterdir())
            assert names == sorted(p.name for p in out2.iterdir())
            for name in names:
                assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


class TestCriterion8HeadlineShares:
    def test_share_reproduction(self):
        with criterion("8 utilization shares"):
            from staffplan.config import CrewMatrix
            from staffplan.model import (
                Dataset, GangHours, TestCatalogEntry, UnitTimeMatrix,
            )
            base = MaintenanceBase(
                "XX", "Div", {("1", DayClass.WEEKDAY)}, 0.6
            )
            ds = Dataset(
                catalog={"77": TestCatalogEntry(
                    "77", "Surge", Frequency(1, FreqUnit.YEAR), Craft.MAINTAINER)},
                locations={}, bases={"XX": base}, schedules=[],
                unit_times=UnitTimeMatrix(entries={"77": {lt: 0.125 for lt in LocationType}}),
            )
            streams = [
                GangHours("XX", Craft.MAINTAINER, Category.FRA, 520.0),
                GangHours("XX", Craft.MAINTAINER, Category.NBNTT, 260.0),
                GangHours("XX", Craft.MAINTAINER, Category.TROUBLE, 220.0),
            ]
            report = utilization_report(streams, CrewMatrix(default=2), ds)
            system = report.row("system", "system")
            assert 100 * system.shares[Category.FRA] == pytest.approx(52.0, abs=0.1)
            assert 100 * system.shares[Category.NBNTT] == pytest.approx(26.0, abs=0.1)
            assert 100 * system.shares[Category.TROUBLE] == pytest.approx(22.0, abs=0.1)
