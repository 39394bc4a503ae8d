import shutil

from staffplan.cli import main


def run_cli(*args) -> int:
    return main(list(args))


class TestValidateVerb:
    def test_clean_dataset_exits_zero(self, sample_manifest, sample_config_path, tmp_path, capsys):
        code = run_cli("validate", "--manifest", str(sample_manifest),
                       "--config", str(sample_config_path), "--out", str(tmp_path))
        assert code == 0
        assert "0 error(s)" in capsys.readouterr().out

    def test_orphan_schedule_exits_one(self, minimal_manifest, tmp_path, capsys):
        root = tmp_path / "ds"
        shutil.copytree(minimal_manifest.parent, root)
        with open(root / "schedules.csv", "a", encoding="utf-8") as fh:
            fh.write("GHOST,77,,Gang #1,,\n")
        code = run_cli("validate", "--manifest", str(root / "manifest.json"),
                       "--out", str(tmp_path / "out"))
        assert code == 1
        assert "decommissioned" in capsys.readouterr().out

    def test_hard_error_exits_two(self, tmp_path, capsys):
        missing = tmp_path / "nope" / "manifest.json"
        code = run_cli("validate", "--manifest", str(missing), "--out", str(tmp_path / "out"))
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestWorkloadVerbs:
    def test_base_writes_audit(self, sample_manifest, sample_config_path, tmp_path, capsys):
        code = run_cli("base", "--manifest", str(sample_manifest),
                       "--config", str(sample_config_path), "--out", str(tmp_path))
        assert code == 0
        assert (tmp_path / "base_audit.csv").exists()
        assert "gang-hours/year" in capsys.readouterr().out

    def test_trouble_prints_offpeak(self, sample_manifest, sample_config_path, tmp_path, capsys):
        code = run_cli("trouble", "--manifest", str(sample_manifest),
                       "--config", str(sample_config_path), "--out", str(tmp_path))
        assert code == 0
        assert "off-peak commitment" in capsys.readouterr().out

    def test_nbntt_totals(self, sample_manifest, sample_config_path, tmp_path, capsys):
        code = run_cli("nbntt", "--manifest", str(sample_manifest),
                       "--config", str(sample_config_path), "--out", str(tmp_path))
        assert code == 0
        assert "man-hours/year" in capsys.readouterr().out

    def test_coverage_writes_allotment(self, sample_manifest, sample_config_path, tmp_path, capsys):
        code = run_cli("coverage", "--manifest", str(sample_manifest),
                       "--config", str(sample_config_path), "--out", str(tmp_path))
        assert code == 0
        assert (tmp_path / "allotment.csv").exists()
        out = capsys.readouterr().out
        assert "pos1" in out and "total" in out


class TestReportVerb:
    def test_report_writes_all_outputs(self, sample_manifest, sample_config_path, tmp_path):
        code = run_cli("report", "--manifest", str(sample_manifest),
                       "--config", str(sample_config_path), "--out", str(tmp_path))
        assert code == 0
        for name in ("allotment.csv", "time_allocation.csv", "utilization.csv",
                     "stress.csv", "base_audit.csv", "run_manifest.json"):
            assert (tmp_path / name).exists(), name

    def test_run_manifest_records_hashes(self, sample_manifest, sample_config_path, tmp_path):
        import json
        run_cli("report", "--manifest", str(sample_manifest),
                "--config", str(sample_config_path), "--out", str(tmp_path))
        record = json.loads((tmp_path / "run_manifest.json").read_text(encoding="utf-8"))
        assert record["config_sha256"]
        assert "manifest.json" in record["inputs"]
        assert all(len(h) == 64 for h in record["inputs"].values())

    def test_allotment_subtotals_are_exact_sums(self, sample_manifest, sample_config_path, tmp_path):
        import csv
        run_cli("report", "--manifest", str(sample_manifest),
                "--config", str(sample_config_path), "--out", str(tmp_path))
        with open(tmp_path / "allotment.csv", encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        base_rows = [r for r in rows if r["base"] and "total" not in r["base"]
                     and "relief" not in r["base"] and "gang" not in r["base"]]
        subtotal_rows = {r["division"]: r for r in rows if r["base"].endswith(" total")}
        grand = next(r for r in rows if r["base"] == "total")
        for craft in range(1, 5):
            col = f"pos_{craft}"
            for division, sub in subtotal_rows.items():
                members = [int(r[col]) for r in base_rows if r["division"] == division]
                assert int(sub[col]) == sum(members), (division, col)
            assert int(grand[col]) == sum(int(r[col]) for r in base_rows), col

    def test_byte_identical_reruns(self, sample_manifest, sample_config_path, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        run_cli("report", "--manifest", str(sample_manifest),
                "--config", str(sample_config_path), "--out", str(out1))
        run_cli("report", "--manifest", str(sample_manifest),
                "--config", str(sample_config_path), "--out", str(out2))
        names = sorted(p.name for p in out1.iterdir())
        assert names == sorted(p.name for p in out2.iterdir())
        for name in names:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


class TestScenarioVerb:
    def test_close_location(self, sample_manifest, sample_config_path, tmp_path, capsys):
        code = run_cli("scenario", "close-location", "DL",
                       "--manifest", str(sample_manifest),
                       "--config", str(sample_config_path), "--out", str(tmp_path))
        assert code == 0
        assert (tmp_path / "scenario_delta.csv").exists()
        out = capsys.readouterr().out
        assert "workload moves to" in out
        assert "response" in out.lower()

    def test_close_unknown_base_exits_two(self, sample_manifest, sample_config_path, tmp_path, capsys):
        code = run_cli("scenario", "close-location", "QQ",
                       "--manifest", str(sample_manifest),
                       "--config", str(sample_config_path), "--out", str(tmp_path))
        assert code == 2
        assert "QQ" in capsys.readouterr().err
