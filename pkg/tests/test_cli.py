import json
import subprocess
import sys
from pathlib import Path

import pytest

from edf.cli import main

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return _write


def test_estimate_single_survivor(capsys, write):
    path = write("c.csv", "s2,df\n1.0,1\n0.0,1\n")
    code, out, _ = run(capsys, "estimate", "--input", path, "--estimator", "satterthwaite")
    assert code == 0
    assert out.splitlines() == ["estimator,value,k,total_df", "satterthwaite,1,2,2"]


def test_estimate_improved_json(capsys, write):
    path = write("c.json", '[{"s2": 4.2, "df": 1}, {"s2": 4.2, "df": 1}]')
    code, out, _ = run(capsys, "estimate", "-i", path, "-e", "improved", "-f", "json")
    assert code == 0
    assert json.loads(out)["estimates"] == {"improved": pytest.approx(2.0, rel=1e-12)}


def test_estimate_all(capsys, write):
    path = write("c.csv", "s2,df\n1.0,2\n2.0,3\n")
    code, out, _ = run(capsys, "estimate", "-i", path, "-e", "all")
    assert code == 0
    rows = [line.split(",") for line in out.splitlines()[1:]]
    assert [r[0] for r in rows] == ["satterthwaite", "naep", "proposed_v1", "improved"]
    assert all(r[2:] == ["2", "5"] for r in rows)
    assert rows[0][1] == "4.90909"


def test_estimate_proposed_alias_and_pretty(capsys, write):
    path = write("c.csv", "s2,df\n1,1\n1,1\n")
    code, out, _ = run(capsys, "estimate", "-i", path, "-e", "proposed", "-f", "pretty")
    assert code == 0 and "proposed_v1" in out and " 3 " in out


def test_estimate_degenerate(capsys, write):
    path = write("z.csv", "s2,df\n0,1\n0,2\n")
    code, out, err = run(capsys, "estimate", "-i", path)
    assert code != 0 and out == ""
    assert err.strip() == "edf: error: AllZeroComponents: degenerate: all components zero"


@pytest.mark.parametrize(
    "text, code_name",
    [("s2,df\n-1,2\n", "InvalidComponent"), ("[]", "EmptyInput"), ("s2,df\nx,1\n", "ParseError")],
)
def test_estimate_input_errors(capsys, write, text, code_name):
    code, _, err = run(capsys, "estimate", "-i", write("bad.txt", text))
    assert code == 1
    assert err.startswith(f"edf: error: {code_name}: ")
    assert len(err.strip().splitlines()) == 1


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "estimate", "-i", str(tmp_path / "nope.csv"))
    assert code == 1 and "cannot read" in err


def test_usage_error_exits_nonzero(capsys):
    with pytest.raises(SystemExit) as info:
        main(["table", "--reps", "0"])
    assert info.value.code != 0


def test_table_matches_golden(capsys):
    code, out, _ = run(capsys, "table", "--k-list", "5,10", "--nu-list", "1", "2",
                       "--reps", "1000", "--seed", "42")
    assert code == 0
    assert out == (DATA / "golden_table_seed42.csv").read_text()


def test_table_seed_from_environment(capsys, monkeypatch):
    args = ["table", "--k-list", "5", "--nu-list", "1", "--reps", "200"]
    _, explicit, _ = run(capsys, *args, "--seed", "42")
    monkeypatch.setenv("EDF_SEED", "42")
    _, from_env, _ = run(capsys, *args)
    _, overridden, _ = run(capsys, *args, "--seed", "43")
    assert from_env == explicit != overridden


def test_table_invalid_grid(capsys):
    code, _, err = run(capsys, "table", "--k-list", "1", "--nu-list", "1", "--reps", "5")
    assert code == 1 and "InvalidGrid" in err
    code, _, err = run(capsys, "table", "--k-list", ",", "--nu-list", "1", "--reps", "5")
    assert code == 1 and "InvalidGrid" in err


def test_table_json_full_precision(capsys):
    code, out, _ = run(capsys, "table", "--k-list", "5", "--nu-list", "1", "--reps", "300",
                       "--seed", "1", "-f", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc) == 1 and doc[0]["K"] == 5
    assert len(repr(doc[0]["mean_ratio"])) > 6


def test_simulate_single_rep(capsys):
    code, out, _ = run(capsys, "simulate", "--k", "5", "--nu", "1", "--reps", "1", "--seed", "3",
                       "-f", "json")
    assert code == 0
    for stats in json.loads(out)["estimators"].values():
        assert stats["mean"] == stats["median"] == stats["q1"] == stats["q3"]


def test_simulate_quartiles(capsys, paper_table):
    code, out, _ = run(capsys, "simulate", "--k", "5", "--nu", "1", "--reps", "50000",
                       "--seed", "11", "-f", "json")
    classic = json.loads(out)["estimators"]["satterthwaite"]
    assert classic["q1"] == pytest.approx(paper_table[5, 1]["lower_q"], abs=0.02)
    assert classic["q3"] == pytest.approx(paper_table[5, 1]["upper_q"], abs=0.02)


def test_simulate_dump_ratios(capsys, tmp_path):
    dump = tmp_path / "ratios.csv"
    code, _, _ = run(capsys, "simulate", "--k", "5", "--nu", "2", "--reps", "20", "--seed", "1",
                     "--dump-ratios", str(dump))
    lines = dump.read_text().splitlines()
    assert code == 0 and lines[0] == "satterthwaite,naep,proposed_v1,improved"
    assert len(lines) == 21


def test_simulate_sigma2_invalid(capsys):
    code, _, err = run(capsys, "simulate", "--k", "5", "--nu", "1", "--reps", "5",
                       "--sigma2", "-1")
    assert code == 1 and "InvalidGrid" in err


def test_console_entry_point(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("s2,df\n3.0,4\n")
    proc = subprocess.run([sys.executable, "-m", "edf", "estimate", "-i", str(path),
                           "-e", "satterthwaite"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1] == "satterthwaite,4,1,4"
