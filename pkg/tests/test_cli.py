import csv
import io
import json

import pytest

from weyl_lab import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_plancherel_table(capsys):
    code, out, _ = run(capsys, "plancherel", "--n", "2", "--u-max", "5", "--step", "0.1")
    assert code == 0
    r = rows(out)
    assert len(r) == 51
    for row in r:
        b, c = float(row["beta"]), float(row["closed_form"])
        assert abs(b - c) <= 1e-10 * (1 + float(row["u"]) ** 2)


@pytest.mark.parametrize("argv", [
    ["plancherel", "--n", "1", "--u-max", "1"],
    ["plancherel", "--n", "2", "--u-max", "-1"],
    ["plancherel", "--n", "2", "--u-max", "1", "--step", "0"],
    ["plancherel", "--n", "two", "--u-max", "1"],
    ["main-term", "--n", "2", "--t", ""],
    ["main-term", "--n", "2", "--t", "1,abc"],
    ["sl2", "--level", "2", "--t-max", "1"],
    ["verify", "--suite", "nonsense"],
    ["frobnicate"],
])
def test_bad_flags_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_main_term_slope_and_constant(capsys):
    code, out, _ = run(capsys, "main-term", "--n", "2", "--domain", "ball", "--t", "10,20,40", "--volume", "4pi")
    assert code == 0
    r = rows(out)
    assert len(r) == 3
    assert abs(float(r[0]["slope"]) - 2.0) < 0.01
    assert float(r[0]["constant"]) == 1.0


def test_parse_real():
    assert cli.parse_real("4pi") == pytest.approx(4 * 3.141592653589793)
    assert cli.parse_real("pi") == pytest.approx(3.141592653589793)
    assert cli.parse_real("2.5") == 2.5
    with pytest.raises(cli.UsageError):
        cli.parse_real("four")


def test_sl2_support_guard_exit_4(capsys):
    code, _, err = run(capsys, "sl2", "--level", "3", "--h-radius", "10", "--t-max", "1")
    assert code == 4
    assert "exceeds" in err


def test_sl2_tables_written_atomically(tmp_path, capsys):
    out = tmp_path / "run.csv"
    code, _, _ = run(capsys, "sl2", "--level", "3", "--h-radius", "3.8", "--t-max", "2",
                     "--lambda-max", "20", "--lambda-step", "10", "--out", str(out))
    assert code == 0
    terms = rows((tmp_path / "run.terms.csv").read_text())
    count = rows((tmp_path / "run.count.csv").read_text())
    assert list(terms[0]) == ["t", "identity", "hyperbolic", "scatter_int", "scatter_half",
                              "digamma_int", "m_half", "log2", "total"]
    assert len(terms) == 5 and len(count) == 2
    assert sorted(p.name for p in tmp_path.iterdir()) == ["run.count.csv", "run.terms.csv"]


def test_json_output_has_schema_version(capsys):
    code, out, _ = run(capsys, "testfn", "--xi-max", "2", "--step", "1", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["schema_version"] == 1
    assert payload["testfn"]["columns"] == ["xi", "hhat"]


def test_thread_count_does_not_change_output(capsys):
    _, a, _ = run(capsys, "main-term", "--n", "3", "--t", "5,10,20", "--threads", "1")
    _, b, _ = run(capsys, "main-term", "--n", "3", "--t", "5,10,20", "--threads", "4")
    assert a == b


def test_spherical_command(capsys):
    code, out, _ = run(capsys, "spherical", "--n", "3", "--nu", "1,0,-1", "--x", "0,0,0", "--samples", "200")
    assert code == 0
    assert float(rows(out)[0]["re"]) == pytest.approx(1.0)


def test_morse_command(capsys):
    code, out, _ = run(capsys, "morse", "--n", "3", "--Q", "2,1")
    assert code == 0
    assert len(rows(out)) == 6


def test_verify_plancherel_census(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "plancherel")
    lines = out.strip().splitlines()
    assert code == 0
    assert len(lines) >= 5
    assert all(line.startswith("PASS ") for line in lines)


def test_verify_is_deterministic(capsys):
    a = run(capsys, "verify", "--suite", "morse", "--seed", "7")
    b = run(capsys, "verify", "--suite", "morse", "--seed", "7")
    assert a == b


def test_verify_failure_exit_1(capsys, monkeypatch):
    monkeypatch.setitem(cli.SUITES, "morse", lambda cfg: [{"check": "forced", "pass": False}])
    code, out, _ = run(capsys, "verify", "--suite", "morse")
    assert code == 1
    assert out.startswith("FAIL morse:forced")
