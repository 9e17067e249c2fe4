import csv
import io
import json
import subprocess
import sys

import pytest

from sparsescale import rates
from sparsescale.cli import SWEEP_HEADER, main
from sparsescale.problem import ProblemConfig

SMALL = ["--p", "1024", "--s", "16"]


def run(argv, capsys, environ=None):
    code = main(argv, environ={} if environ is None else environ)
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_rates_at_t_star(capsys):
    ts = rates.t_star(ProblemConfig(1024, 16))
    code, out, _ = run(["rates", *SMALL, "--a-grid", repr(ts)], capsys)
    assert code == 0
    (row,) = table(out)
    assert abs(float(row["t_of_a"]) - ts) < 1e-12
    assert float(row["psi_plus"]) <= 32
    assert row["regime"] == "HardRecovery"


def test_rates_out_of_domain(capsys):
    code, out, _ = run(["rates", "--p", "100", "--s", "30", "--a-grid", "2"], capsys)
    assert code == 0
    (row,) = table(out)
    assert row["phi_o"] == row["phi_ad"] == row["regime"] == "out-of-domain"
    assert float(row["phi"]) > 0


def test_default_grid(capsys):
    code, out, _ = run(["rates", *SMALL], capsys)
    rows = table(out)
    cfg = ProblemConfig(1024, 16)
    assert code == 0 and len(rows) == 12
    assert float(rows[0]["a"]) == pytest.approx(0.5 * rates.t_star(cfg))
    assert float(rows[-1]["a"]) == pytest.approx(3 * rates.a_eps(1.0, cfg))


@pytest.mark.parametrize(
    "extra",
    [["--a-steps", "0"], ["--a-grid", ","], ["--a-min", "3", "--a-max", "2"], ["--reps", "1"],
     ["--estimator", "lasso"], ["--p", "10", "--s", "5"]],
)
def test_usage_errors(extra, capsys):
    code, _, err = run(["sweep", *SMALL, *extra], capsys)
    assert code == 1 and "error" in err


def test_bogus_flag_exits_one():
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--bogus"], environ={})
    assert info.value.code == 1


def test_sweep_header_rows_and_json(capsys, tmp_path):
    base = ["sweep", *SMALL, "--a-grid", "2,4,6", "--reps", "20", "--seed", "3", "--jobs", "1"]
    code, out, _ = run(base, capsys)
    assert code == 0
    assert out.splitlines()[0] == ",".join(SWEEP_HEADER)
    rows = table(out)
    assert len(rows) == 9
    code, js, _ = run([*base, "--format", "json"], capsys)
    doc = json.loads(js)
    assert doc["version"] == 1 and len(doc["rows"]) == 9
    for c, j in zip(rows, doc["rows"]):
        for key, value in c.items():
            jv = j[key]
            if jv is None:
                assert value == "out-of-domain"
            elif isinstance(jv, float):
                assert float(value) == jv
            else:
                assert value == str(jv)


def test_sweep_rerun_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path, jobs in zip(paths, ("1", "4")):
        code, _, _ = run(["sweep", *SMALL, "--a-steps", "4", "--reps", "70", "--jobs", jobs, "--out", str(path)], capsys)
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_bayes_check(capsys):
    code, out, _ = run(["bayes-check", *SMALL, "--a-grid", "2,5,1e3"], capsys)
    assert code == 0
    rows = table(out)
    assert [r["ok"] for r in rows] == ["true"] * 3
    assert float(rows[-1]["bound"]) == 0.0
    assert rows[0]["s_prime"] == "8"


def test_config_file_and_precedence(tmp_path, capsys):
    conf = tmp_path / "exp.conf"
    conf.write_text("# experiment\np = 2048\ns = 8   # sparsity\na_grid = 3\n")
    code, out, _ = run(["rates", "--config", str(conf)], capsys)
    ts_file = rates.t_star(ProblemConfig(2048, 8))
    assert code == 0 and float(table(out)[0]["t_star"]) == pytest.approx(ts_file)

    code, out, _ = run(["rates", "--config", str(conf)], capsys, {"SPARSESCALE_S": "4"})
    assert float(table(out)[0]["t_star"]) == pytest.approx(rates.t_star(ProblemConfig(2048, 4)))

    code, out, _ = run(["rates", "--config", str(conf), "--s", "2"], capsys, {"SPARSESCALE_S": "4"})
    assert float(table(out)[0]["t_star"]) == pytest.approx(rates.t_star(ProblemConfig(2048, 2)))


@pytest.mark.parametrize("text", ["p 2048\n", "colour = red\n", "p = many\n"])
def test_malformed_config(tmp_path, capsys, text):
    conf = tmp_path / "bad.conf"
    conf.write_text(text)
    code, _, err = run(["rates", "--config", str(conf)], capsys)
    assert code == 1 and err


def test_missing_config(tmp_path, capsys):
    code, _, _ = run(["rates", "--config", str(tmp_path / "nope.conf")], capsys)
    assert code == 1


def test_unwritable_output(tmp_path, capsys):
    code, _, err = run(["rates", *SMALL, "--out", str(tmp_path / "missing" / "x.csv")], capsys)
    assert code == 3 and "I/O" in err


def test_selftest(capsys):
    code, out, _ = run(["selftest"], capsys)
    assert code == 0
    assert "FAIL" not in out


def test_selftest_detects_corruption(capsys):
    code, out, _ = run(["selftest", "--corrupt-moment"], capsys)
    assert code == 2
    assert "abs-moments" in out


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sparsescale", "rates", *SMALL, "--a-grid", "4"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("a,")
