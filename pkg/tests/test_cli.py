import csv
import io
import json

import numpy as np
import pytest

from innoreg.cli import load_correlation_csv, main
from innoreg.panel import PanelError

EMP = ("region,year,industry,parent,employment\n"
       "north,2001,food,manuf,40\n"
       "north,2001,textile,manuf,10\n"
       "north,2001,retail,serv,30\n"
       "north,2001,finance,serv,20\n"
       "south,2001,food,manuf,25\n"
       "south,2001,textile,manuf,25\n"
       "south,2001,retail,serv,25\n"
       "south,2001,finance,serv,25\n")

STATS = ("name,count,mean,sd,min,max\n"
         "A,40,1.0,0.5,0.0,3.0\n"
         "B,40,10.0,2.0,4.0,18.0\n")

CORR = ("name,A,B\n"
        "A,1,0.4\n"
        "B,0.4,1\n")


@pytest.fixture()
def emp_file(tmp_path):
    f = tmp_path / "emp.csv"
    f.write_text(EMP)
    return str(f)


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def make_panel_file(tmp_path, capsys):
    stats = tmp_path / "stats.csv"
    stats.write_text(STATS)
    corr = tmp_path / "corr.csv"
    corr.write_text(CORR)
    panel = tmp_path / "panel.csv"
    rc, _, _ = run(capsys, "synth", "--stats", str(stats), "--corr", str(corr),
                   "--regions", "6", "--years", "5", "--out", str(panel))
    assert rc == 0
    return panel, stats, corr


def test_indices_csv_and_json_agree(emp_file, capsys):
    rc, out_csv, err = run(capsys, "indices", emp_file)
    assert rc == 0 and err == ""
    rows = list(csv.DictReader(io.StringIO(out_csv)))
    rc, out_json, _ = run(capsys, "indices", emp_file, "--format", "json")
    assert rc == 0
    jrows = json.loads(out_json)
    assert len(rows) == len(jrows) == 2
    for r, j in zip(rows, jrows):
        assert r["region"] == j["region"]
        assert float(r["theil"]) == j["theil"]  # both carry full precision
        assert float(r["hoover"]) == j["hoover"]


def test_indices_md_and_subset(emp_file, capsys):
    rc, out, _ = run(capsys, "indices", emp_file, "--format", "md",
                     "--precision", "2")
    assert rc == 0
    assert out.splitlines()[0].startswith("| region | year | theil |")
    assert "1.28" in out
    rc, out, _ = run(capsys, "indices", emp_file,
                     "--industries", "food,textile", "--scale", "1")
    assert rc == 0
    assert "north" in out


def test_indices_missing_file_exits_2(capsys):
    rc, out, err = run(capsys, "indices", "/nonexistent/emp.csv")
    assert rc == 2
    assert out == ""
    assert "error:" in err


def test_synth_deterministic_and_atomic(tmp_path, capsys):
    panel, stats, corr = make_panel_file(tmp_path, capsys)
    first = panel.read_bytes()
    rc, _, err = run(capsys, "synth", "--stats", str(stats), "--corr", str(corr),
                     "--regions", "6", "--years", "5", "--out", str(panel))
    assert rc == 0
    assert panel.read_bytes() == first
    assert json.loads(err)["seed"] == 42  # diagnostics on stderr
    assert not (tmp_path / "panel.csv.tmp").exists()
    # a different seed changes the bytes
    rc, _, _ = run(capsys, "synth", "--stats", str(stats), "--corr", str(corr),
                   "--regions", "6", "--years", "5", "--seed", "7",
                   "--out", str(panel))
    assert rc == 0
    assert panel.read_bytes() != first


def test_describe_roundtrip(tmp_path, capsys):
    panel, *_ = make_panel_file(tmp_path, capsys)
    rc, out, _ = run(capsys, "describe", str(panel))
    assert rc == 0
    rows = {r["name"]: r for r in csv.DictReader(io.StringIO(out))}
    assert set(rows) == {"A", "B"}
    assert float(rows["A"]["mean"]) == pytest.approx(1.0, rel=0.02)
    rc, out, _ = run(capsys, "describe", str(panel), "--variables", "B")
    assert {r["name"] for r in csv.DictReader(io.StringIO(out))} == {"B"}


def test_regress_grid_and_json_companion(tmp_path, capsys):
    panel, *_ = make_panel_file(tmp_path, capsys)
    specs = tmp_path / "specs.json"
    specs.write_text(json.dumps([
        {"label": "1", "dependent": "A", "regressors": [{"name": "B"}]},
        {"label": "bad", "dependent": "A", "regressors": [{"name": "ZZZ"}]},
    ]))
    out_md = tmp_path / "grid.md"
    rc, _, err = run(capsys, "regress", str(panel), "--specs", str(specs),
                     "--format", "md", "--out", str(out_md))
    assert rc == 0  # one spec succeeded
    assert "ZZZ" in err  # per-spec diagnostics land on stderr
    text = out_md.read_text()
    assert text.startswith("| Variables | 1 | bad |")
    assert "failed" in text
    side = json.loads((tmp_path / "grid.md.json").read_text())
    assert any(r.get("variable") == "B" for r in side)
    assert any("error" in r for r in side)


def test_regress_all_specs_failing_exits_3(tmp_path, capsys):
    panel, *_ = make_panel_file(tmp_path, capsys)
    specs = tmp_path / "specs.json"
    specs.write_text(json.dumps([
        {"label": "bad", "dependent": "A", "regressors": [{"name": "ZZZ"}]}]))
    rc, _, err = run(capsys, "regress", str(panel), "--specs", str(specs))
    assert rc == 3
    assert "ZZZ" in err


def test_decompose_formats(tmp_path, capsys):
    panel, *_ = make_panel_file(tmp_path, capsys)
    rc, out, _ = run(capsys, "decompose", str(panel), "--format", "md")
    assert rc == 0
    assert "BETWEEN-REGIONS/s2" in out.splitlines()[0]
    rc, out, _ = run(capsys, "decompose", str(panel), "--variables", "A")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1
    shares = sum(float(rows[0][k]) for k in
                 ("share_region", "share_time", "share_residual"))
    assert shares == pytest.approx(1.0, abs=1e-9)


def test_elasticities_with_and_without_stats(tmp_path, capsys):
    prov = tmp_path / "prov.csv"
    prov.write_text("variable,beta,source_column,x_mean,y_mean,expected\n"
                    "B,2.0,1,10.0,4.0,5.0\n")
    rc, out, _ = run(capsys, "elasticities", str(prov))
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rc == 0
    assert float(rows[0]["elasticity"]) == pytest.approx(5.0)
    assert rows[0]["within_tol"] == "1"
    # --stats recomputes the means (here: mean(B)=10 -> same x, dependent A)
    stats = tmp_path / "stats.csv"
    stats.write_text(STATS)
    rc, out, _ = run(capsys, "elasticities", str(prov), "--stats", str(stats),
                     "--dependent", "A")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rc == 0
    assert float(rows[0]["y_mean"]) == 1.0
    assert float(rows[0]["elasticity"]) == pytest.approx(20.0)
    assert rows[0]["within_tol"] == "0"


def test_game_solve_and_verify(capsys):
    rc, out, _ = run(capsys, "game", "solve", "--a", "10", "--c", "1",
                     "--r", "1", "--format", "json")
    assert rc == 0
    row = json.loads(out)[0]
    assert row["q1"] == 6.0 and row["q2"] == 1.0 and row["leader_profit"] == 18.0
    rc, out, _ = run(capsys, "game", "solve", "--a", "10", "--c", "1")
    assert rc == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["r_real"] == "0"  # SPNE royalty is not real for a > c
    assert float(row["q1"]) == 0.0
    rc, out, _ = run(capsys, "game", "verify", "--a", "10", "--c", "1",
                     "--r", "1", "--format", "json")
    assert rc == 0
    row = json.loads(out)[0]
    assert row["all_ok"] == 1
    assert row["foc_leader_gap"] <= 1e-6


def test_game_region_grid(capsys):
    rc, out, _ = run(capsys, "game", "region", "--a-min", "1", "--a-max", "4",
                     "--a-steps", "2", "--c-min", "1", "--c-max", "4",
                     "--c-steps", "2")
    assert rc == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4
    assert {r["r_real"] for r in rows} == {"0", "1"}
    rc2, out2, _ = run(capsys, "game", "region", "--a-min", "1", "--a-max", "4",
                       "--a-steps", "2", "--c-min", "1", "--c-max", "4",
                       "--c-steps", "2", "--jobs", "3")
    assert rc2 == 0 and out2 == out  # parallel sweep keeps row order


def test_load_correlation_csv_validates():
    with pytest.raises(PanelError):
        load_correlation_csv(io.StringIO("name,A,B\nA,1,0\nX,0,1\n"))


def test_unknown_command_exits_nonzero(capsys):
    with pytest.raises(SystemExit):
        main(["frobnicate"])
