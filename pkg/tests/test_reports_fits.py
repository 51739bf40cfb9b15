import json
import math

import numpy as np
import pytest

from weyl_lab import fits, reports


def test_fmt_seventeen_digits():
    assert float(reports.fmt(math.pi)) == math.pi
    assert reports.fmt(1.0) == "1"
    assert reports.fmt(True) in ("true", "True", "1")


def test_csv_text_header_and_rows():
    text = reports.csv_text(["a", "b"], [[1, 0.1], [2, 1 / 3]])
    lines = text.splitlines()
    assert lines[0] == "a,b"
    assert float(lines[2].split(",")[1]) == 1 / 3


def test_json_text_is_sorted_and_versioned():
    text = reports.json_text({"z": np.float64(1.5), "a": np.arange(2)})
    d = json.loads(text)
    assert d["schema_version"] == reports.SCHEMA_VERSION
    assert d["a"] == [0, 1]
    assert text.index('"a"') < text.index('"z"')


def test_atomic_write_text_and_bytes(tmp_path):
    p = reports.atomic_write(tmp_path / "sub" / "x.txt", "hello")
    assert p.read_text() == "hello"
    reports.atomic_write(p, b"\x00\x01")
    assert p.read_bytes() == b"\x00\x01"
    assert [q.name for q in p.parent.iterdir()] == ["x.txt"]


def test_loglog_fit_exact_power():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    slope, icpt = fits.loglog_fit(x, 3.0 * x ** 2.5)
    assert slope == pytest.approx(2.5)
    assert icpt == pytest.approx(math.log(3.0))


def test_running_sup_monotone():
    np.testing.assert_array_equal(fits.running_sup([1, 3, 2, 5, 4]), [1, 3, 3, 5, 5])


def test_tail_slope_flat_for_bounded_noise():
    rng = np.random.default_rng(0)
    r = np.geomspace(1, 1e4, 200)
    assert abs(fits.tail_slope(r, rng.uniform(0.5, 1.0, r.size))) < 0.02
    assert fits.tail_slope(r, r ** 0.3) == pytest.approx(0.3, rel=1e-6)
