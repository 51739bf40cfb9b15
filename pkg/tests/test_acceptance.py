"""Headline checks. Each test carries an ``acceptance`` marker; conftest prints
one PASS/FAIL line per marker at the end of the run."""

import math
import time

import numpy as np
import pytest

from weyl_lab import morselab, plancherel, rootsys, spherical, testfn, weyl_main
from weyl_lab.sl2tf import groups, lengths, scattering, trace

acceptance = pytest.mark.acceptance


@pytest.fixture(scope="module")
def gamma3():
    grp = groups.group_data(3)
    return grp, lengths.length_spectrum(3, 3.8), scattering.load_constants(3)


@acceptance(1, "n=2 Plancherel density equals pi u tanh(pi u) on [0, 50]")
def test_sl2_plancherel_closed_form():
    start = time.perf_counter()
    u = np.round(np.arange(0, 5001) * 0.01, 12)
    lam = 1j * np.stack([u, -u], axis=1)
    err = np.abs(plancherel.beta(lam) - plancherel.beta_sl2_closed_form(u))
    elapsed = time.perf_counter() - start
    assert np.all(err <= 1e-10 * (1 + u * u)), float((err / (1 + u * u)).max())
    assert elapsed < 5.0


@acceptance(2, "main-term exponent is d = 2 (n=2) and d = 5 (n=3) within 0.5%")
@pytest.mark.parametrize("n", [2, 3])
def test_weyl_exponent(n):
    start = time.perf_counter()
    rec = weyl_main.exponent_fit(n, [50, 75, 100, 125, 150, 175, 200])
    assert rec["d"] == {2: 2, 3: 5}[n]
    assert rec["rel_error"] <= 0.005, rec
    assert time.perf_counter() - start < 600


@acceptance(3, "weyl_constant(2, V) = V / (4 pi)")
@pytest.mark.parametrize("V", [1.0, 4 * math.pi, 2 * math.pi / 3, 1e3])
def test_weyl_constant(V):
    assert weyl_main.weyl_constant(2, V) == pytest.approx(V / (4 * math.pi), rel=1e-15)


@acceptance(4, "Gamma(3) geometric side is nonnegative and even on t in [0, 200]")
def test_trace_formula_positivity(gamma3):
    grp, spec, scat = gamma3
    start = time.perf_counter()
    h = trace.selberg_autocorrelation(3.8)
    ts = np.round(np.arange(0, 401) * 0.5, 12)
    rec = trace.check_positivity(h, ts, grp, spec, scat)
    summary = {k: v for k, v in rec.items() if k != "evaluations"}
    assert rec["t_points"] == 401
    assert rec["min_total"] >= -1e-6 * rec["scale"], summary
    assert rec["evenness"] <= 1e-9 * max(1.0, rec["scale"]), summary
    assert time.perf_counter() - start < 1200


@acceptance(5, "smoothed count / lambda^2 within 5% of Area/2pi at 200, residual exponent <= 1.15")
def test_smoothed_weyl_count(gamma3):
    grp, spec, scat = gamma3
    h = trace.selberg_autocorrelation(3.8)
    lams = [50.0, 75.0, 100.0, 150.0, 200.0, 300.0, 400.0]
    rec = trace.smoothed_count_experiment(h, lams, grp, spec, scat)
    at200 = rec["rows"][lams.index(200.0)]
    ratio = at200["integral"] / 200.0 ** 2
    target = grp.area / (2 * math.pi)
    detail = {"ratio": ratio, "target": target, "residual_exponent": rec["residual_exponent"]}
    assert abs(ratio / target - 1) <= 0.05 and rec["residual_exponent"] <= 1.15, detail


@acceptance(6, "Gamma(3) scattering log-derivative grows like log r up to r = 1000")
def test_scattering_log_bound():
    rec = scattering.verify_philog(3, r_max=1e3)
    assert rec["pass"], rec


@acceptance(7, "Abel transform inverts spherical synthesis for three even test functions")
def test_abel_roundtrip():
    start = time.perf_counter()
    for radius in (1.0, 2.0, 3.5):
        h = testfn.make_autocorrelation(radius, grid_size=256, r=1, normalize="h0")
        rec = testfn.abel_roundtrip_sl2(h)
        assert rec["sup_deviation"] <= 1e-6, (radius, rec)
    assert time.perf_counter() - start < 60


@acceptance(8, "|phi_lam(g)| <= 1 and W-invariance at 100 random points, n=3")
def test_spherical_bounds():
    start = time.perf_counter()
    rec = spherical.verify_bounds(3, points=100, samples=100_000)
    assert rec["bound_pass"], rec
    assert rec["w_pass"], rec
    assert time.perf_counter() - start < 600


@acceptance(9, "scr and smp ratios have flat running sup (slope <= 0.02)")
def test_scr_and_smp():
    for n in (2, 3, 4):
        for rec in plancherel.verify_scr(n):
            assert rec["pass"], rec
    smp2 = testfn.verify_smp(2)
    assert smp2["pass"], smp2
    smp3 = testfn.verify_smp(3, ts=[1, 2, 3, 5, 8, 13, 20, 30, 50, 75, 100], mu_per_t=3)
    assert smp3["pass"], smp3


@acceptance(10, "phase critical points, Hessian, and sublevel exponent windows")
def test_morse_phase_and_sublevel_fits():
    for Q in ((2, 1), (1, 2)):
        cfg = morselab.PhaseConfiguration(3, Q)
        for w in rootsys.weyl_group(3):
            assert morselab.critical_residual(cfg, w) <= 1e-8 * cfg.xi.norm()
            hp = morselab.hessian_pairing(cfg, w)
            assert hp.fd_relative_error <= 1e-6
            assert hp.singular_values.min() > 0
    for case in morselab.MODEL_CASES:
        rep = morselab.model_case_report(case)
        assert rep["pass"], (case, rep["volume"]["slope"], rep["reciprocal"]["slope"])


@acceptance(11, "form-class enumeration equals brute force; Gamma(3) has no length below 3.8497")
def test_length_spectrum_oracles():
    for t in range(3, 13):
        assert len(lengths.sl2z_classes(t)) == lengths.brute_force_class_count(t, 60), t
    tmin, g = groups.brute_force_min_trace(3, 50)
    assert tmin == 7
    assert groups.group_data(3).contains(g)
    ell = lengths.hyperbolic_length(tmin)
    assert ell == pytest.approx(groups.trace_congruence_bound(3), rel=1e-15)
    assert 3.8 < ell < 3.85
