"""Command-line behavior: exit codes, output shape, reproducibility."""

import csv
import json
import math

import pytest

from cccd import multianchor
from cccd.cli import main
from cccd.densities import Uniform
from cccd.exact import p_uniform_fraction


def run_cli(capsys, argv):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def parse_json_lines(text):
    records = [json.loads(line) for line in text.strip().splitlines()]
    config = records[0]["config"]
    rows = [r["row"] for r in records if "row" in r]
    summaries = [r["summary"] for r in records if "summary" in r]
    return config, rows, (summaries[0] if summaries else None)


def parse_csv(text):
    lines = text.strip().splitlines()
    assert lines[0].startswith("# ")
    config = json.loads(lines[0][2:])
    tail = [ln for ln in lines[1:] if not ln.startswith("# ")]
    comments = [json.loads(ln[2:]) for ln in lines[1:] if ln.startswith("# ")]
    rows = list(csv.DictReader(tail))
    return config, rows, (comments[0] if comments else None)


class TestArgumentHandling:
    def test_missing_subcommand_is_usage_error(self, capsys):
        assert run_cli(capsys, [])[0] == 2

    def test_unknown_subcommand(self, capsys):
        assert run_cli(capsys, ["frobnicate"])[0] == 2

    def test_missing_required_flag(self, capsys):
        assert run_cli(capsys, ["simulate"])[0] == 2

    def test_bad_density_json(self, capsys):
        rc, _, err = run_cli(capsys, ["exact", "--density", "{oops", "--n", "3"])
        assert rc == 2
        assert "JSON" in err

    def test_unknown_family(self, capsys):
        rc, _, err = run_cli(capsys, ["exact", "--density", '{"family": "cauchy"}', "--n", "3"])
        assert rc == 2
        assert "unknown family" in err

    def test_bad_sizes(self, capsys):
        assert run_cli(capsys, ["exact", "--n", "0"])[0] == 2
        assert run_cli(capsys, ["simulate", "--n", "3", "--reps", "0"])[0] == 2
        assert run_cli(capsys, ["quadrature", "--n", "3", "--rel-tol", "-1"])[0] == 2

    def test_help_exits_zero(self, capsys):
        assert run_cli(capsys, ["--help"])[0] == 0

    def test_computation_failure_maps_to_one(self, capsys):
        rc, _, err = run_cli(capsys, ["multi", "--n", "30", "--m", "4"])
        assert rc == 1
        assert "Monte Carlo" in err

    def test_curves_requires_out(self, capsys):
        assert run_cli(capsys, ["table", "--curves"])[0] == 2


class TestConfigEcho:
    def test_json_header_carries_defaults(self, capsys):
        rc, out, _ = run_cli(capsys, ["simulate", "--n", "4"])
        assert rc == 0
        config, _, _ = parse_json_lines(out)
        assert config["subcommand"] == "simulate"
        assert config["reps"] == 10000
        assert config["seed"] == 0
        assert config["format"] == "json"
        assert config["density"]["family"] == "uniform"
        assert config["density"]["support"] == [0.0, 1.0]

    def test_csv_header_carries_defaults(self, capsys):
        rc, out, _ = run_cli(capsys, ["exact", "--n", "3", "--format", "csv"])
        assert rc == 0
        config, _, _ = parse_csv(out)
        assert config["rel_tol"] == 1e-8
        assert config["subcommand"] == "exact"


class TestSimulate:
    def test_endpoint_anchor_run_grades_against_exact_law(self, capsys):
        rc, out, _ = run_cli(capsys, ["simulate", "--n", "5", "--reps", "20000", "--seed", "9"])
        assert rc == 0
        config, rows, summary = parse_json_lines(out)
        assert [row["k"] for row in rows] == [1, 2]
        p5 = float(p_uniform_fraction(5))
        assert rows[1]["predicted"] == pytest.approx(p5, abs=1e-12)
        assert sum(row["count"] for row in rows) == 20000
        assert all(abs(row["z"]) <= 4.0 for row in rows)
        assert summary["verdict"] == "pass"

    def test_csv_columns_match_contract(self, capsys):
        rc, out, _ = run_cli(
            capsys, ["simulate", "--n", "5", "--reps", "5000", "--format", "csv"])
        assert rc == 0
        lines = out.strip().splitlines()
        assert lines[1] == "k,count,fraction,predicted,z"

    def test_random_anchor_prediction_matches_pmf_table(self, capsys):
        rc, out, _ = run_cli(
            capsys, ["simulate", "--n", "4", "--m", "2", "--reps", "5000", "--seed", "9"])
        assert rc == 0
        _, rows, summary = parse_json_lines(out)
        table = multianchor.pmf_random_anchors_table(Uniform(), Uniform(), 4, 2)
        for row in rows:
            assert row["predicted"] == pytest.approx(float(table[row["k"]]), abs=1e-12)
        assert summary["verdict"] == "pass"

    def test_many_anchor_run_has_no_prediction(self, capsys):
        rc, out, _ = run_cli(
            capsys, ["simulate", "--n", "3", "--m", "50", "--reps", "2000", "--format", "csv"])
        assert rc == 0
        _, rows, summary = parse_csv(out)
        assert all(row["predicted"] == "" and row["z"] == "" for row in rows)
        assert summary["verdict"] is None
        assert max(int(row["k"]) for row in rows) <= 3

    def test_reruns_are_byte_identical(self, tmp_path):
        path = tmp_path / "run.csv"
        argv = ["simulate", "--n", "6", "--m", "2", "--reps", "8000",
                "--seed", "31", "--format", "csv", "--out", str(path)]
        assert main(argv) == 0
        first = path.read_bytes()
        assert main(argv) == 0
        assert path.read_bytes() == first

    def test_thread_env_does_not_change_output(self, tmp_path, monkeypatch):
        path = tmp_path / "run.csv"
        argv = ["simulate", "--n", "6", "--m", "2", "--reps", "30000",
                "--seed", "31", "--format", "csv", "--out", str(path)]
        assert main(argv) == 0
        serial_text = path.read_text()
        monkeypatch.setenv("CCCD_THREADS", "8")
        assert main(argv) == 0
        threaded_text = path.read_text()
        assert serial_text == threaded_text.replace('"threads": 8', '"threads": 1')


class TestExactAndQuadrature:
    def test_exact_uniform_reports_fraction(self, capsys):
        rc, out, _ = run_cli(capsys, ["exact", "--n", "5"])
        assert rc == 0
        _, rows, _ = parse_json_lines(out)
        assert rows[0]["p"] == pytest.approx(float(p_uniform_fraction(5)), abs=1e-15)
        assert rows[0]["exact_fraction"] is not None

    def test_quadrature_agrees_with_closed_form(self, capsys):
        rc, out, _ = run_cli(
            capsys, ["quadrature", "--n", "5", "--rel-tol", "1e-10"])
        assert rc == 0
        config, rows, _ = parse_json_lines(out)
        assert config["rel_tol"] == 1e-10
        assert rows[0]["p"] == pytest.approx(float(p_uniform_fraction(5)), abs=1e-9)
        assert rows[0]["panels"] >= 1


class TestAsymptotic:
    def test_linear_limit_row(self, capsys):
        rc, out, _ = run_cli(
            capsys, ["asymptotic", "--density", '{"family": "linear", "params": {"a": 1.0}}'])
        assert rc == 0
        _, rows, _ = parse_json_lines(out)
        row = rows[0]
        assert (row["k"], row["ell"]) == (0, 0)
        assert row["p_limit"] == pytest.approx(0.375, abs=1e-12)
        assert row["method"] == "derivative-profile"

    def test_divergent_density_uses_margin_route(self, capsys):
        rc, out, _ = run_cli(capsys, ["asymptotic", "--density", '{"family": "arc_sine"}'])
        assert rc == 0
        _, rows, _ = parse_json_lines(out)
        assert rows[0]["method"] == "vanishing-margin"
        assert rows[0]["p_limit"] == pytest.approx(1.0, abs=1e-6)


class TestMulti:
    def test_pmf_rows_normalize_and_match_expected_value(self, capsys):
        rc, out, _ = run_cli(capsys, ["multi", "--n", "4", "--m", "2"])
        assert rc == 0
        _, rows, summary = parse_json_lines(out)
        total = sum(row["probability"] for row in rows)
        assert total == pytest.approx(1.0, abs=1e-9)
        mean = sum(row["k"] * row["probability"] for row in rows)
        assert summary["expected_gamma"] == pytest.approx(mean, abs=1e-6)


class TestTable:
    def test_paper_flag_reports_single_known_failure(self, capsys):
        rc, out, _ = run_cli(capsys, ["table", "--paper", "--format", "csv"])
        assert rc == 3
        _, rows, summary = parse_csv(out)
        failing = [row["label"] for row in rows if row["pass"] == "false"]
        assert failing == ["beta(2,2) p_1000"]
        assert summary == {"failures": 1, "rows": len(rows)}
        by_label = {row["label"]: row for row in rows}
        assert float(by_label["uniform limit"]["computed_value"]) == pytest.approx(4 / 9)
        assert float(by_label["abs-sine p_1000"]["abs_diff"]) <= 5e-4

    def test_without_paper_flag_exit_is_zero(self, capsys):
        assert run_cli(capsys, ["table"])[0] == 0

    def test_mutated_limit_computation_trips_exit_three(self, capsys, monkeypatch):
        import types

        import cccd.asymptotics as asym

        monkeypatch.setattr(
            asym, "asymptotic_profile",
            lambda model: types.SimpleNamespace(p_limit=0.123))
        rc, out, _ = run_cli(capsys, ["table", "--paper"])
        assert rc == 3
        _, rows, _ = parse_json_lines(out)
        assert sum(1 for row in rows if not row["pass"]) > 10

    def test_reruns_are_byte_identical(self, tmp_path):
        path = tmp_path / "table.jsonl"
        argv = ["table", "--paper", "--out", str(path)]
        assert main(argv) == 3
        first = path.read_bytes()
        assert main(argv) == 3
        assert path.read_bytes() == first


class TestCurves:
    def test_curve_files_written_and_deterministic(self, tmp_path):
        first = tmp_path / "one"
        second = tmp_path / "two"
        for target in (first, second):
            assert main(["table", "--curves", "--out", str(target)]) == 0
        names = sorted(p.name for p in first.iterdir())
        assert names == sorted(
            f"{kind}-{label}.csv"
            for kind in ("density", "law")
            for label in ("q-power-2", "piece-quadratic-2-3", "arc-sine", "abs-sine"))
        density = (first / "density-abs-sine.csv").read_text().splitlines()
        assert density[0] == "x,density"
        assert len(density) == 512
        law = (first / "law-abs-sine.csv").read_text().splitlines()
        assert law[0] == "n,p_n"
        assert float(law[-1].split(",")[1]) == pytest.approx(0.64, abs=5e-3)
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes()


class TestSelftest:
    def test_clean_build_passes(self, capsys):
        rc, out, _ = run_cli(capsys, ["selftest"])
        assert rc == 0
        lines = out.strip().splitlines()[1:]
        assert len(lines) == 7
        assert all(line.startswith("ok ") for line in lines)

    def test_corrupted_closed_form_fails(self, capsys, monkeypatch):
        from fractions import Fraction

        import cccd.exact as exact_module

        monkeypatch.setattr(exact_module, "p_uniform_fraction", lambda n: Fraction(1, 2))
        rc, out, _ = run_cli(capsys, ["selftest"])
        assert rc == 1
        assert "FAIL uniform-closed-vs-quadrature" in out
