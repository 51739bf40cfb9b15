import math

import numpy as np
import pytest
from scipy.integrate import simpson, trapezoid

from weyl_lab.sl2tf import groups, lengths, scattering, trace


@pytest.fixture(scope="module")
def gamma3():
    return groups.group_data(3), scattering.load_constants(3)


def test_coordinate_conversion_roundtrip():
    for form in ("killing", "trace"):
        y, xi = trace.selberg_to_orthonormal(3.0, 1.7, form)
        ell, r = trace.orthonormal_to_selberg(y, xi, form)
        assert ell == pytest.approx(3.0) and r == pytest.approx(1.7)
        assert float(y * xi) == pytest.approx(3.0 * 1.7)


def test_selberg_function_is_even_and_supported():
    h = trace.selberg_autocorrelation(3.0)
    assert h.support_radius == pytest.approx(3.0)
    assert h.is_even
    assert h.at_zero() == pytest.approx(1.0)
    assert h.h(np.array([3.05, 4.0])) == pytest.approx([0.0, 0.0])
    r = np.linspace(0, 20, 41)
    np.testing.assert_allclose(h.hhat(r), h.hhat(-r))


def test_spectral_mass_is_fourier_inversion():
    h = trace.selberg_autocorrelation(3.0)
    r = np.linspace(-h.reach, h.reach, 200_001)
    assert trapezoid(h.hhat(r), r) == pytest.approx(h.spectral_mass(), rel=1e-8)


def test_support_error_past_validity(gamma3):
    grp, scat = gamma3
    spec = lengths.length_spectrum(3, 3.8)
    with pytest.raises(trace.SupportError):
        trace.geometric_side(trace.selberg_autocorrelation(4.0), 0.0, grp, spec, scat)


def test_no_hyperbolic_term_below_first_length(gamma3):
    grp, scat = gamma3
    spec = lengths.length_spectrum(3, 3.8)
    ev = trace.geometric_side(trace.selberg_autocorrelation(3.8), 1.0, grp, spec, scat)
    assert ev.hyperbolic_term == 0.0


def test_hyperbolic_term_appears_past_first_length(gamma3):
    grp, scat = gamma3
    spec = lengths.length_spectrum(3, 5.0)
    ev = trace.geometric_side(trace.selberg_autocorrelation(5.0), 0.0, grp, spec, scat)
    assert ev.hyperbolic_term != 0.0


def test_grid_and_pointwise_agree(gamma3):
    grp, scat = gamma3
    spec = lengths.length_spectrum(3, 3.8)
    h = trace.selberg_autocorrelation(3.8)
    ts = np.array([0.0, 0.5, 3.0, 17.5])
    grid = trace.geometric_side_grid(h, ts, grp, spec, scat)
    for t, g in zip(ts, grid):
        p = trace.geometric_side(h, float(t) + 1e-3, grp, spec, scat)
        assert abs(p.total - g.total) <= 5e-3 * g.scale()


def test_terms_sum_to_total(gamma3):
    grp, scat = gamma3
    spec = lengths.length_spectrum(3, 3.8)
    ev = trace.geometric_side(trace.selberg_autocorrelation(3.8), 2.25, grp, spec, scat)
    assert sum(ev.terms()) == pytest.approx(ev.total, rel=1e-14, abs=1e-12)


def test_positivity_short_grid(gamma3):
    grp, scat = gamma3
    spec = lengths.length_spectrum(3, 3.8)
    rec = trace.check_positivity(trace.selberg_autocorrelation(3.8), np.arange(0, 30.5, 0.5), grp, spec, scat)
    assert rec["pass"], {k: v for k, v in rec.items() if k != "evaluations"}


def test_identity_term_dominates_at_large_t(gamma3):
    grp, scat = gamma3
    spec = lengths.length_spectrum(3, 3.8)
    ev = trace.geometric_side(trace.selberg_autocorrelation(3.8), 150.0, grp, spec, scat)
    # (Area / 2 pi) * t * int h^ dr to leading order, with int h^ dr = 2 pi h(0)
    h = trace.selberg_autocorrelation(3.8)
    lead = grp.area / (2 * math.pi) * 150.0 * h.spectral_mass()
    assert ev.identity_term == pytest.approx(lead, rel=1e-3)


def test_smoothed_count_nonpositive_lambda(gamma3):
    grp, scat = gamma3
    spec = lengths.length_spectrum(3, 3.8)
    rec = trace.smoothed_count(trace.selberg_autocorrelation(3.8), 0.0, grp, spec, scat)
    assert rec["integral"] == 0.0 and rec["weyl_prediction"] == 0.0


def test_smoothed_count_matches_direct_integral(gamma3):
    grp, scat = gamma3
    spec = lengths.length_spectrum(3, 3.8)
    h = trace.selberg_autocorrelation(3.8)
    lam = 12.0
    ts = np.linspace(0, lam, 241)
    tot = np.array([e.total for e in trace.geometric_side_grid(h, ts, grp, spec, scat)])
    from scipy.integrate import simpson
    # the count is reported per unit of spectral mass
    direct = 2 * simpson(tot, x=ts) / h.spectral_mass()
    got = trace.smoothed_count(h, lam, grp, spec, scat)["integral"]
    assert got == pytest.approx(direct, rel=1e-4)
