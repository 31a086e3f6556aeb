import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optoamp.errors import EmptyGrid, Kappa2NotZero, NearSingular, ParamError
from optoamp.model import SystemParams, build_drift_matrix, build_noise_matrix
from optoamp.scattering import (
    added_noise,
    closed_form_gain,
    closed_form_terms,
    coefficient_spectrum,
    coefficients,
    gain_spectrum,
    power_gain,
    scattering_matrix,
    symplectic_defect,
)
from optoamp.stability import boundary_g1, is_stable

# peak of the resolved reference point, from a converged bounded search
RESOLVED_PEAK = -1.2247395736627986


def test_resonant_lossless_reflection(p_decoupled):
    assert coefficients(p_decoupled, -1.0).a == pytest.approx(-1.0, abs=1e-14)


@pytest.mark.parametrize("j", [0.0, 0.3, 1.0, 2.5])
@pytest.mark.parametrize("omega", [-2.0, -1.0, -0.3, 0.0, 1.7])
def test_passive_reflection_unit_modulus(p_passive, j, omega):
    p = p_passive.replace(coupling_j=j)
    assert abs(coefficients(p, omega).a) == pytest.approx(1.0, abs=1e-12)
    assert power_gain(p, omega) == pytest.approx(1.0, abs=1e-12)


def test_decoupled_scatters_only_own_port(p_decoupled):
    co = coefficients(p_decoupled, -0.7)
    assert np.allclose([co.b, co.c, co.d, co.e, co.f], 0, atol=1e-15)


def test_matrix_identity_by_multiplying_back(p_unresolved_lossy):
    M = build_drift_matrix(p_unresolved_lossy)
    L = build_noise_matrix(p_unresolved_lossy)
    w = -0.9
    U = scattering_matrix(p_unresolved_lossy, w).entries
    # (i w + M)(U - 1) = L (i w + M)^-1 L  =>  (i w + M) X = L with L X = U - 1
    X = np.linalg.solve(1j * w * np.eye(6) + M, L)
    assert np.allclose(U, np.eye(6) + L @ X, atol=1e-13)


def test_peak_gain_level(p_resolved):
    assert power_gain(p_resolved, -1.2247) == pytest.approx(6.5e5, rel=0.05)


def test_resolved_peak_ratios(p_resolved):
    r = coefficients(p_resolved, RESOLVED_PEAK).ratios()
    assert r["f"] == pytest.approx(1.0, abs=1e-3)
    assert max(r["b"], r["c"], r["d"], r["e"]) < 0.2


def test_unresolved_peak_is_spectrum_maximum(p_unresolved):
    grid = np.linspace(-1.5, -1.3, 20001)
    spec = gain_spectrum(p_unresolved, grid)
    assert spec.peak()[0] == pytest.approx(-1.39, abs=5e-3)


def test_near_singular_raises_at_boundary():
    b = boundary_g1(1.0, 0.1, 0.1)
    p = SystemParams(1.0, -1.0, 1.0, b.g_crit, 0.1, 0.0, 0.1)
    with pytest.raises(NearSingular):
        coefficients(p, -b.omega_crit)


def test_commutator_sum(p_resolved_lossy):
    for w in (-2.0, -1.22, 0.0, 0.8):
        assert coefficients(p_resolved_lossy, w).commutator_sum() == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize(
    "omega, expected", [(-1.0, 1e-9), (RESOLVED_PEAK, 1e-9)]
)
def test_symplectic_resolved(p_resolved, omega, expected):
    assert symplectic_defect(p_resolved, omega) < expected


def test_symplectic_decoupled(p_decoupled):
    for w in (-3.0, -1.0, 0.0, 2.0):
        assert symplectic_defect(p_decoupled, w) < 1e-12


def test_symplectic_all_baths_open(p_unresolved_lossy):
    assert symplectic_defect(p_unresolved_lossy, -1.08) < 1e-9


def test_closed_form_passive(p_passive):
    for w in (-2.0, -1.0, 0.5):
        assert closed_form_gain(p_passive, w) == pytest.approx(1.0, abs=1e-12)


def test_closed_form_rejects_lossy_aux(p_resolved_lossy):
    with pytest.raises(Kappa2NotZero):
        closed_form_gain(p_resolved_lossy, -1.0)


def test_closed_form_terms_definitions():
    p = SystemParams(0.7, -1.3, 0.9, 0.2, 0.4, 0.0, 0.3)
    w = -0.8
    t = closed_form_terms(p, w)
    assert t.alpha == 4 + (0.3 - 2j * w) ** 2
    assert t.beta == 0.7 * (1.3**2 - w**2) + 1.3 * 0.9**2


# J is kept away from 0: there the auxiliary cavity factors out of both the
# numerator and the denominator of the closed form, which cancel badly
@settings(max_examples=60, deadline=None)
@given(
    d1=st.floats(-2, 2), d2=st.floats(-2, 2), j=st.floats(0.05, 3), g=st.floats(0, 0.5),
    k1=st.floats(0.01, 3), gm=st.floats(0.01, 1), w=st.floats(-3, 3),
)
def test_closed_form_matches_matrix_for_any_detuning(d1, d2, j, g, k1, gm, w):
    p = SystemParams(d1, d2, j, g, k1, 0.0, gm)
    try:
        numeric = power_gain(p, w)
    except NearSingular:
        return
    assert closed_form_gain(p, w) == pytest.approx(numeric, rel=1e-7, abs=1e-10)


def test_spectrum_flags_singular_point():
    b = boundary_g1(1.0, 0.1, 0.1)
    p = SystemParams(1.0, -1.0, 1.0, b.g_crit, 0.1, 0.0, 0.1)
    spec = gain_spectrum(p, [-2.0, -b.omega_crit, 0.0])
    assert spec.flagged.tolist() == [False, True, False]
    assert np.isnan(spec.gain[1]) and np.isfinite(spec.gain[[0, 2]]).all()


def test_spectrum_single_dominant_peak(p_resolved):
    spec = gain_spectrum(p_resolved, np.linspace(-2, 0, 200001))
    w, g = spec.peak()
    assert w == pytest.approx(-1.2247, abs=1e-4)
    away = np.abs(spec.omega - w) > 0.01
    assert spec.gain[away].max() < 1e-3 * g


def test_spectrum_lossy_peak(p_resolved_lossy):
    spec = gain_spectrum(p_resolved_lossy, np.linspace(-2, 0, 200001))
    assert spec.peak()[0] == pytest.approx(-1.22, abs=5e-3)


def test_passive_spectrum_flat(p_passive):
    assert np.allclose(gain_spectrum(p_passive, np.linspace(-3, 3, 301)).gain, 1.0, atol=1e-12)


@pytest.mark.parametrize("grid, exc", [([], EmptyGrid), ([0.0, np.nan], ParamError), ([1.0, 0.0], ParamError)])
def test_spectrum_grid_errors(p_resolved, grid, exc):
    with pytest.raises(exc):
        gain_spectrum(p_resolved, grid)


def test_ratio_spectrum_decoupled_zero(p_decoupled):
    assert np.all(coefficient_spectrum(p_decoupled, np.linspace(-2, 2, 41)).ratios() == 0)


def test_added_noise(p_resolved, p_unresolved):
    assert added_noise(p_resolved, RESOLVED_PEAK) == pytest.approx(0.5, abs=1e-3)
    assert added_noise(p_resolved, RESOLVED_PEAK, n_eff=2.0) == pytest.approx(2.5, abs=5e-3)
    assert added_noise(p_unresolved, -1.39) == pytest.approx(0.5, abs=1e-3)
    with pytest.raises(ParamError):
        added_noise(p_resolved, -1.0, n_eff=-1.0)


@settings(max_examples=40, deadline=None)
@given(
    j=st.floats(0, 3), k1=st.floats(0.01, 3), k2=st.floats(0, 1), gm=st.floats(0.01, 1),
    frac=st.floats(0, 0.99), w=st.floats(-3, 3),
)
def test_symplectic_property(j, k1, k2, gm, frac, w):
    p = SystemParams(1.0, -1.0, j, frac * boundary_g1(j, k1, gm).g_crit, k1, k2, gm)
    if not is_stable(p):
        return
    assert symplectic_defect(p, w) < 1e-9
