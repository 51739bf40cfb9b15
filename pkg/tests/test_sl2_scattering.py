import numpy as np
import pytest

from weyl_lab.sl2tf import characters, scattering


@pytest.mark.parametrize("q", [3, 4, 5, 8, 9, 12])
def test_character_orthogonality(q):
    assert characters.orthogonality_defect(q) < 1e-12


def test_dirichlet_L_at_one_mod4():
    chi = [c for c in characters.characters(4) if not c.is_principal][0]
    assert abs(characters.dirichlet_L(1.0, chi) - np.pi / 4) < 1e-12


@pytest.mark.parametrize("N", [3, 4, 5])
def test_shipped_constants_validate(N):
    data = scattering.load_constants(N)
    assert data.complete
    rec = scattering.validate_constants(data)
    assert rec["pass"], rec


@pytest.mark.parametrize("N", [3, 4, 5])
def test_constants_match_direct_scattering_matrix(N):
    data = scattering.load_constants(N)
    for r in (0.8, 3.3):
        direct = scattering.log_det_derivative_direct(N, r)
        got = float(scattering.scattering_phase(N, np.array([r]), data).value[0])
        assert got == pytest.approx(direct, rel=1e-5, abs=1e-6)


def test_trace_phi_half_gamma3():
    data = scattering.load_constants(3)
    assert data.trace_phi_half == pytest.approx(-4.0, abs=1e-9)
    assert scattering.trace_phi_half_direct(3) == pytest.approx(-4.0, abs=1e-5)


def test_missing_constants_file(tmp_path):
    with pytest.raises((scattering.ConstantsError, FileNotFoundError, OSError)):
        scattering.load_constants(3, tmp_path / "nope.json")


def test_log_growth_short_sweep():
    rec = scattering.verify_philog(3, r_max=200.0, points=600)
    assert rec["pass"], rec
