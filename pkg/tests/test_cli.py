import csv
import io
import json
import subprocess
import sys

import pytest

from tentfarey.cli import EXIT_ACCEPTANCE, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, _grid, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    body = "\n".join(l for l in text.splitlines() if not l.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


def test_negative_grid_values(capsys):
    code, out, _ = run(["thermo", "--r", "0.5", "--beta-grid", "-3:-2:0.5", "--n", "3", "--no-timestamp"], capsys)
    assert code == EXIT_OK
    assert sorted({float(r["beta"]) for r in rows_of(out) if r["f_n"] != "nan"}) == [-3.0, -2.5, -2.0]


def test_grid_parsing():
    assert _grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert _grid("0.1,0.3") == [0.1, 0.3]
    assert _grid("0:0.3:0.1") == [0.0, 0.1, 0.2, 0.3]


@pytest.mark.parametrize(
    "argv",
    [
        ["map", "--r", "1.5"],
        ["map", "--r-grid", "0:1"],
        ["map", "--r-grid", "1:0:0.1"],
        ["thermo", "--r", "0.5", "--beta-grid", "3"],
        ["thermo", "--r", "1"],
        ["measure", "--r", "1", "--mode", "F", "--iters", "100"],
        ["bogus"],
        ["map", "--format", "xml"],
    ],
)
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == EXIT_USAGE


def test_numeric_failure_exit(capsys):
    # z sits on the pole rho^1 of the resolvent
    code, _, err = run(["zeta", "--r", "0.5", "--z", "1.5", "--no-timestamp"], capsys)
    assert code == EXIT_NUMERIC
    assert "numeric failure" in err


def test_map_csv(capsys):
    code, out, _ = run(["map", "--r-grid", "0:0.5:0.5", "--n", "4", "--samples", "2000", "--no-timestamp"], capsys)
    assert code == EXIT_OK
    rows = rows_of(out)
    assert [float(r["r"]) for r in rows] == [0.0, 0.5]
    assert float(rows[0]["Z_n"]) == pytest.approx(1.0, abs=1e-14)
    assert float(rows[0]["tau_kac"]) == 2.0
    assert int(rows[1]["periodic_points"]) == 16
    assert "# config:" in out and "generated" not in out


def test_deterministic_without_timestamp(capsys):
    argv = ["measure", "--r", "0.3", "--mode", "G", "--iters", "2000", "--seed", "5", "--no-timestamp"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b
    _, c, _ = run(argv[:-1], capsys)
    assert "# generated:" in c


def test_measure_density_json(capsys):
    code, out, _ = run(["measure", "--r", "0.5", "--mode", "density", "--points", "5", "--format", "json",
                        "--no-timestamp"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["meta"]["config"]["r"] == 0.5
    assert len(doc["rows"]) == 5
    assert doc["rows"][-1]["x"] == 1.0


def test_thermo_rows(capsys):
    code, out, _ = run(["thermo", "--r", "0", "--beta-grid", "-1,1", "--n", "4", "--no-timestamp"], capsys)
    assert code == EXIT_OK
    rows = rows_of(out)
    f = {float(r["beta"]): float(r["f_n"]) for r in rows if r["f_n"] != "nan"}
    assert f[-1.0] == pytest.approx(-0.6931471805599453, abs=1e-14)
    assert f[1.0] == pytest.approx(0.6931471805599453, abs=1e-14)


def test_spectrum_tent(capsys):
    code, out, _ = run(["spectrum", "--r", "0", "--N", "20", "--mode", "M", "--format", "json", "--no-timestamp"],
                       capsys)
    assert code == EXIT_OK
    rows = json.loads(out)["rows"]
    assert rows[0]["eigenvalue"] == pytest.approx(0.5, abs=1e-12)
    assert rows[0]["closed_form"] == 0.5


def test_zeta_command(tmp_path, capsys):
    target = tmp_path / "z.csv"
    code, out, _ = run(["zeta", "--r", "0", "--z", "0.5", "--s-grid", "1", "--n", "1", "--out", str(target),
                        "--no-timestamp"], capsys)
    assert code == EXIT_OK and out == ""
    rows = rows_of(target.read_text())
    assert float(rows[0]["value"]) == pytest.approx(1.5 / 1.0, abs=1e-10)
    tf = rows[1]
    assert abs(float(tf["det1_or_diff"])) <= 1e-10 + float(tf["tail"])


def test_reproduce_pass_and_fail(capsys):
    code, out, err = run(["reproduce", "--only", "1", "--no-timestamp"], capsys)
    assert code == EXIT_OK
    assert "[PASS]  1" in err
    assert rows_of(out)[0]["status"] == "pass"
    code, out, err = run(["reproduce", "--only", "4,12", "--no-timestamp"], capsys)
    assert code == EXIT_ACCEPTANCE
    assert "[FAIL]  4" in err and "[PASS] 12" in err
    assert [r["status"] for r in rows_of(out)] == ["fail", "pass"]


def test_csv_floats_round_trip(capsys):
    _, out, _ = run(["measure", "--r", "0.5", "--mode", "density", "--points", "3", "--no-timestamp"], capsys)
    from tentfarey.maps import Params
    from tentfarey.measures import density_e

    assert float(rows_of(out)[1]["e_r"]) == float(density_e(Params(0.5))(0.5))


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tentfarey.cli", "map", "--r", "0", "--n", "2", "--samples", "100",
                           "--no-timestamp", "--format", "json"], capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    assert json.loads(proc.stdout)["rows"][0]["periodic_points"] == 4


def test_acceptance_exit_code_constant():
    assert EXIT_ACCEPTANCE == 3
