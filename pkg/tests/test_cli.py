import csv
import math

import pytest

from mindc import cli
from mindc.engine import Settings
from mindc.instances import build_kissing, build_pack_in_sphere, load_instance


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _write_runs(path, runs):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cli.CSV_HEADER)
        for inst, setting, status, time_s, gap in runs:
            w.writerow([inst, setting, status, "1.0", "1.0", gap, 1, time_s, 0, 0, 0, 0, 0])


def _curve(rows, setting):
    return [(tau, frac) for s, tau, frac in rows if s == setting]


class TestSuite:
    def test_two_by_two(self, tmp_path):
        out = tmp_path / "runs.csv"
        insts = [build_pack_in_sphere(2, 2), build_kissing(4, 2)]
        settings = [Settings.from_name(n, rotsym=True, time_limit=30) for n in ("heur_1_pair_0", "heur_0_pair_0")]
        assert cli.run_suite(insts, settings, out)
        rows = _rows(out)
        assert len(rows) == 4
        assert list(rows[0]) == cli.CSV_HEADER
        assert {(r["instance"], r["setting"]) for r in rows} == {
            (i.name, s.name) for i in insts for s in settings}
        assert all(r["status"] in cli.SOLVED for r in rows)

    def test_time_limit_recorded(self, tmp_path):
        out = tmp_path / "runs.csv"
        cli.run_suite([build_kissing(7, 2)], [Settings(time_limit=0.0)], out)
        (row,) = _rows(out)
        assert row["status"] == "TimeLimit"
        assert float(row["gap"]) > 0

    def test_rotsym_labels(self, tmp_path):
        out = tmp_path / "runs.csv"
        settings = [Settings(rotsym=flag, node_limit=3) for flag in (False, True)]
        cli.run_suite([build_kissing(4, 2)], settings, out, label_rotsym=True)
        assert [r["setting"] for r in _rows(out)] == ["heur_1_pair_0_rotsym_0", "heur_1_pair_0_rotsym_1"]


class TestProfile:
    def test_fastest_everywhere(self, tmp_path):
        runs = tmp_path / "runs.csv"
        _write_runs(runs, [("a", "fast", "Optimal", 1.0, 0), ("a", "slow", "Optimal", 3.0, 0),
                           ("b", "fast", "Optimal", 2.0, 0), ("b", "slow", "TimeLimit", 9.0, 0.5)])
        rows = cli.profile_data(runs, "time", tmp_path / "prof.csv")
        fast = _curve(rows, "fast")
        assert fast[0] == (1.0, 1.0)
        slow = _curve(rows, "slow")
        assert slow[-1][1] == 0.5
        for curve in (fast, slow):
            assert all(a[1] <= b[1] for a, b in zip(curve, curve[1:]))
        assert len(_rows(tmp_path / "prof.csv")) == len(rows)

    def test_identical_settings(self, tmp_path):
        runs = tmp_path / "runs.csv"
        _write_runs(runs, [(i, s, "Optimal", t, 0) for i, t in (("a", 1.0), ("b", 4.0))
                           for s in ("x", "y")])
        rows = cli.profile_data(runs, "time", tmp_path / "prof.csv")
        assert _curve(rows, "x") == _curve(rows, "y")

    def test_gap_uses_unsolved_only(self, tmp_path):
        runs = tmp_path / "runs.csv"
        _write_runs(runs, [("solved", "x", "Optimal", 1.0, 0), ("solved", "y", "TimeLimit", 9.0, 0.2),
                           ("open", "x", "TimeLimit", 9.0, 0.1), ("open", "y", "TimeLimit", 9.0, 0.3)])
        rows = cli.profile_data(runs, "gap", tmp_path / "prof.csv")
        # only "open" counts: x has gap 0.1 (best), y has 0.3 (ratio 3)
        assert sum(_curve(rows, "x"), ()) == pytest.approx((1.0, 1.0, 3.0, 1.0))
        assert sum(_curve(rows, "y"), ()) == pytest.approx((1.0, 0.0, 3.0, 1.0))

    def test_empty_filter(self, tmp_path, caplog):
        runs = tmp_path / "runs.csv"
        _write_runs(runs, [("a", "x", "Optimal", 1.0, 0)])
        assert cli.profile_data(runs, "gap", tmp_path / "prof.csv") == []
        assert "empty" in caplog.text
        assert _rows(tmp_path / "prof.csv") == []

    def test_bad_metric(self, tmp_path):
        with pytest.raises(ValueError):
            cli.profile_data(tmp_path / "x.csv", "nodes", tmp_path / "y.csv")


def test_shifted_geometric_mean():
    assert cli.shifted_geometric_mean([1.0, 1.0]) == pytest.approx(1.0)
    assert cli.shifted_geometric_mean([0.0, 3.0]) == pytest.approx(1.0)
    assert math.isnan(cli.shifted_geometric_mean([math.inf]))


class TestMain:
    def test_build_and_solve_file(self, tmp_path, capsys):
        inst_path = tmp_path / "k.json"
        assert cli.main(["build", "--problem", "kissing", "--n", "4", "--out", str(inst_path)]) == 0
        assert load_instance(inst_path).name == "kissing_n4_d2"
        out = tmp_path / "one.csv"
        code = cli.main(["solve", "--instance", str(inst_path), "--heur", "0", "--rotsym", "1",
                         "--out", str(out)])
        assert code == 0
        assert "setting=heur_0_pair_0" in capsys.readouterr().out
        cli.main(["solve", "--problem", "pack-sphere", "--n", "2", "--heur", "none",
                  "--node-limit", "2", "--out", str(out)])
        rows = _rows(out)
        assert [r["setting"] for r in rows] == ["heur_0_pair_0", "default"]

    def test_suite_and_profile(self, tmp_path):
        runs = tmp_path / "runs.csv"
        code = cli.main(["suite", "--problem", "kissing", "--n", "3", "4", "--settings", "heur_1_pair_0",
                         "default", "--rotsym", "0", "1", "--node-limit", "50", "--out", str(runs)])
        assert code == 0
        rows = _rows(runs)
        assert len(rows) == 8
        assert {r["setting"] for r in rows} == {"heur_1_pair_0_rotsym_0", "heur_1_pair_0_rotsym_1",
                                                "default_rotsym_0", "default_rotsym_1"}
        assert cli.main(["profile", str(runs), "--out", str(tmp_path / "p.csv")]) == 0

    def test_missing_problem(self):
        with pytest.raises(SystemExit):
            cli.main(["solve", "--heur", "1"])
