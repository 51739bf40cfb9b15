import math

import numpy as np
import pytest

from weyl_lab.sl2tf import groups, lengths


@pytest.mark.parametrize("N", [3, 4, 5, 6])
def test_index_by_enumeration(N):
    assert groups.sl2_index(N) == groups.sl2_order_by_enumeration(N)


@pytest.mark.parametrize("N", [3, 4, 5])
def test_cusp_count_by_representatives(N):
    assert groups.group_data(N).cusps == groups.cusp_count_by_representatives(N)


def test_gamma3_data():
    g = groups.group_data(3)
    assert g.sl2_index == 24 and g.psl2_index == 12 and g.cusps == 4
    assert g.area == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("N", [0, 1, 2, -3])
def test_level_guard(N):
    with pytest.raises(groups.LevelError):
        groups.group_data(N)


def test_congruence_bound_gamma3():
    assert groups.trace_congruence_bound(3) == pytest.approx(2 * math.acosh(3.5))
    t, g = groups.brute_force_min_trace(3, 30)
    assert t == 7
    assert groups.group_data(3).contains(g)


@pytest.mark.parametrize("t", range(3, 11))
def test_form_classes_vs_brute_force(t):
    assert len(lengths.sl2z_classes(t)) == lengths.brute_force_class_count(t, 30)


def test_form_cycles_partition_reduced_forms():
    for D in (5, 12, 21, 32, 45):
        cyc = lengths.form_cycles(D)
        flat = [f for c in cyc for f in c]
        assert sorted(flat) == sorted(lengths.reduced_forms(D))


def test_classes_have_the_right_trace():
    for t in (5, 9, 12):
        for g in lengths.sl2z_classes(t):
            (a, b), (c, d) = g.tolist()
            assert a + d == t and a * d - b * c == 1


def test_gamma3_spectrum_starts_at_trace_7(tmp_path):
    spec = lengths.length_spectrum(3, 6.0, cache_dir=tmp_path)
    # -I is not in Gamma(3), so both signs of the trace occur
    assert abs(spec.entries[0].trace) == 7
    assert spec.entries[0].length == pytest.approx(2 * math.acosh(3.5))
    assert all(e.class_count > 0 for e in spec.entries)
    # second call is served from the content-addressed cache
    again = lengths.length_spectrum(3, 6.0, cache_dir=tmp_path)
    assert again.to_json() == spec.to_json()
    assert list(tmp_path.iterdir())


def test_spectrum_json_check_rejects_bad_lengths():
    bad = {"N": 3, "L": 5.0, "validity_radius": 5.0, "truncated": False, "entries": [[7, 1.0, 1.0, 1]]}
    with pytest.raises(ValueError):
        lengths.LengthSpectrum.from_json(bad)


def test_sl2z_spectrum_counts_primitive_roots():
    spec = lengths.length_spectrum(1, 2 * math.acosh(4.5))
    traces = sorted({abs(e.trace) for e in spec.entries})
    assert traces[0] == 3
    assert all(e.primitive_length <= e.length + 1e-12 for e in spec.entries)
