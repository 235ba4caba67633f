import math

import numpy as np
import pytest

from faraday_squeezing import (
    CouplingParams,
    ExtendedPulseModel,
    SingularMatrix,
    StepTooLarge,
    build_single_cell,
    build_two_cell,
    covariance_propagate,
    derive_rates,
    freq_response,
    output_spectra,
    pulse_rates,
    pulse_variances,
    spectrum_from_response,
    twocell_spectrum,
    vp_spectrum_numeric,
    vx_spectrum,
)
from faraday_squeezing.linear_io import (
    propagate_covariance,
    pulse_variances_numeric,
    steady_state_covariance,
)
from faraday_squeezing.verify import random_parameter_sets

from conftest import van_loan_covariance


def test_single_cell_structure(ref_params):
    p, d = ref_params
    m = build_single_cell(p, d)
    assert m.state_dim == 2
    assert m.channel_names == ("x_in", "p_in", "F_x", "F_p", "G_x", "G_p")
    np.testing.assert_array_equal(m.drift, np.diag([-0.2, -1.2]))
    # lossless: no F-channel coupling anywhere
    assert not np.any(m.noise_input[:, 2:4]) and not np.any(m.output_feedthrough[:, 2:4])


def test_decoupled_limit():
    p = CouplingParams(0.0, 0.6, 0.1, 0.2)
    m = build_single_cell(p)
    np.testing.assert_allclose(m.drift, np.diag([-0.3, -0.3]), rtol=1e-15)
    T = freq_response(m, 0.7)
    np.testing.assert_allclose(T, m.output_feedthrough, atol=1e-16)
    np.testing.assert_allclose(m.output_feedthrough[0, :4], [0.6, 0, 0.8, 0])


def test_xout_row_matches_transfer_function():
    rng = np.random.default_rng(5)
    for p in random_parameter_sets(30, seed=11):
        d = derive_rates(p)
        w = rng.uniform(-10, 10)
        row = freq_response(build_single_cell(p, d), w)[0]
        g1, kt2 = d.gamma1, d.kappa_tilde2
        den = g1 + 1j * w + kt2
        expect = np.zeros(6, complex)
        expect[0] = (g1 + 1j * w) * p.tau / den
        expect[2] = (g1 + 1j * w) * d.rho / den
        expect[5] = p.tau * math.sqrt(2 * d.gamma2) * p.kappa / den
        np.testing.assert_allclose(row, expect, rtol=1e-12, atol=1e-15)


def test_high_frequency_transparency(ref_params):
    p, d = ref_params
    m = build_single_cell(p, d)
    np.testing.assert_allclose(freq_response(m, 1e9), m.output_feedthrough, atol=1e-8)


def test_spectrum_from_response_reference(ref_params):
    p, d = ref_params
    m = build_single_cell(p, d)
    T = freq_response(m, 0.0)
    assert spectrum_from_response(T[0], m.channels) == pytest.approx(7 / 24, rel=1e-13)


def test_vacuum_in_vacuum_out():
    w = np.linspace(-30, 30, 61)
    for p in (CouplingParams(0.0, 0.4, 0.2, 0.3), CouplingParams(0.0, 1.0, 0.2, 0.3, 4.0)):
        for build in (build_single_cell, build_two_cell):
            vx, vp = output_spectra(build(p), w)
            np.testing.assert_allclose(vx, 0.5, rtol=1e-15)
            np.testing.assert_allclose(vp, 0.5, rtol=1e-15)


def test_random_single_cell_agreement():
    rng = np.random.default_rng(8)
    for p in random_parameter_sets(100, seed=3):
        d = derive_rates(p)
        w = rng.uniform(-50, 50, 20) * (d.gamma1 + d.kappa_tilde2)
        vx, _ = output_spectra(build_single_cell(p, d), w)
        np.testing.assert_allclose(vx, vx_spectrum(d, w).v_x, rtol=1e-10)


def test_vp_numeric_reference(ref_params):
    p, _ = ref_params
    # 1/2 [tau^2 (1 - k/g1)^2 + rho^2 + 2 g2 k tau^2 / g1^2] with k = 1, g1 = 0.2, g2 = 0.4
    assert vp_spectrum_numeric(p, 0.0) == pytest.approx(18.0, rel=1e-12)
    assert vp_spectrum_numeric(p, 1e8) == pytest.approx(0.5, rel=1e-9)
    assert vp_spectrum_numeric(CouplingParams(0.0, 0.5, 0.1, 0.1), 2.0) == pytest.approx(0.5)


def test_vp_never_below_vacuum():
    for p in random_parameter_sets(50, seed=21):
        w = np.linspace(-20, 20, 41)
        assert np.all(vp_spectrum_numeric(p, w) >= 0.5 * (1 - 1e-12))


# -- two cells ----------------------------------------------------------------------

def test_two_cell_reproduces_closed_form(larmor_params):
    p, d = larmor_params
    m = build_two_cell(p, d)
    w = np.linspace(-20, 20, 401)
    vx, _ = output_spectra(m, w)
    np.testing.assert_allclose(vx, twocell_spectrum(d, w).v_x, rtol=1e-12)
    assert output_spectra(m, 10.0)[0] == pytest.approx(0.16941441905809823, rel=1e-12)


def test_two_cell_undamped():
    p = CouplingParams(1.0, 1.0, 0.0, 1.0, 2.5)
    d = derive_rates(p, gamma1=0.0, gamma2=0.0)
    w = np.array([0.3, 1.0, 4.0, 7.5])
    vx, _ = output_spectra(build_two_cell(p, d), w)
    W2 = 2.5**2
    np.testing.assert_allclose(vx, 0.5 * (w**2 - W2) ** 2 / ((w**2 - W2) ** 2 + 4 * w**2),
                               rtol=1e-12)


def test_two_cell_zero_field_is_doubled_single_cell():
    for p in random_parameter_sets(20, seed=4):
        d = derive_rates(p)
        d2 = derive_rates(CouplingParams(2 * p.kappa2, p.tau, p.gamma, p.gamma_p))
        w = np.linspace(-5, 5, 11) * (d.gamma1 + d.kappa_tilde2)
        vx, _ = output_spectra(build_two_cell(p, d), w)
        np.testing.assert_allclose(vx, vx_spectrum(d2, w).v_x, rtol=1e-10)


def test_drift_spectra():
    for p in random_parameter_sets(20, seed=9, larmor=True):
        d = derive_rates(p)
        ev1 = np.sort(np.linalg.eigvals(build_single_cell(p, d).drift).real)
        np.testing.assert_allclose(ev1, [-(d.gamma1 + d.kappa_tilde2), -d.gamma1], rtol=1e-14)
        ev2 = np.linalg.eigvals(build_two_cell(p, d).drift)
        assert np.all(ev2.real <= -d.gamma1 + 1e-9 * (1 + abs(p.omega_larmor)))


def test_singular_at_undamped_resonance():
    p = CouplingParams(0.0, 1.0, 0.0, 1.0, 3.0)
    m = build_two_cell(p, derive_rates(p, gamma1=0.0, gamma2=0.0))
    with pytest.raises(SingularMatrix):
        freq_response(m, 3.0)
    freq_response(m, 2.0)


# -- moment equations ----------------------------------------------------------------

def _extended(p, T):
    return ExtendedPulseModel(build_single_cell(p, pulse_rates(p))).matrices(T)


@pytest.mark.parametrize("k2, tau, g", [(1, 1, 0), (1, 1, 0.1), (10, 0.8, 0.1), (3, 0.5, 2.0)])
def test_covariance_ode_vs_matrix_exponential(k2, tau, g):
    p = CouplingParams(k2, tau, g)
    A, Q, S0 = _extended(p, 1.0)
    exact = van_loan_covariance(A, Q, S0, 1.0)
    num = covariance_propagate(ExtendedPulseModel(build_single_cell(p, pulse_rates(p))), 1.0)
    assert num.var_x == pytest.approx(exact[2, 2], rel=1e-9)
    assert num.var_p == pytest.approx(exact[3, 3], rel=1e-9)
    ref = pulse_variances(k2, tau, g, 1.0)
    assert num.var_x == pytest.approx(ref.var_x, rel=1e-8)
    assert num.var_p == pytest.approx(ref.var_p, rel=1e-8)


def test_reference_pulse_points():
    r = pulse_variances_numeric(1.0, 1.0, 0.0, 1.0)
    assert (r.var_x, r.var_p) == pytest.approx((0.415954, 2 / 3), rel=1e-6)
    r = pulse_variances_numeric(1.0, 1.0, 0.1, 1.0)
    assert (r.var_x, r.var_p) == pytest.approx((0.420984, 0.654730), rel=1e-6)


def test_cross_terms_are_required():
    p = CouplingParams(1.0, 1.0, 0.0)
    A, Q, S0 = _extended(p, 1.0)
    n = 2
    naive = Q.copy()
    naive[:n, n:] = 0
    naive[n:, :n] = 0
    wrong = propagate_covariance(A, naive, S0, 1.0, 1000)
    assert abs(wrong[2, 2] - pulse_variances(1.0, 1.0, 0.0, 1.0).var_x) > 1e-2


def test_short_pulse_samples_vacuum():
    r = pulse_variances_numeric(2.0, 0.9, 0.3, 1e-8)
    assert r.var_x == pytest.approx(0.5, rel=1e-7) and r.var_p == pytest.approx(0.5, rel=1e-7)


def test_step_size_guard():
    model = ExtendedPulseModel(build_single_cell(CouplingParams(1.0, 1.0, 0.1),
                                                 pulse_rates(CouplingParams(1.0, 1.0, 0.1))))
    with pytest.raises(StepTooLarge):
        covariance_propagate(model, 1.0, dt=2e-3)


def test_halving_dt_is_invisible():
    p = CouplingParams(10.0, 0.8, 0.1)
    model = ExtendedPulseModel(build_single_cell(p, pulse_rates(p)))
    a = covariance_propagate(model, 1.0, 1e-4)
    b = covariance_propagate(model, 1.0, 5e-5)
    assert a.var_x == pytest.approx(b.var_x, rel=1e-9)
    assert a.var_p == pytest.approx(b.var_p, rel=1e-9)


@pytest.mark.parametrize("g1, g2, kt2", [(0.2, 0.4, 1.0), (0.05, 0.3, 4.0), (1.0, 1.0, 0.5)])
def test_atomic_steady_state(g1, g2, kt2):
    p = CouplingParams(kt2, 1.0, 0.1, 0.1)
    d = derive_rates(p, gamma1=g1, gamma2=g2)
    m = build_single_cell(p, d)
    expect = (kt2 / 2 + g2) / (2 * (g1 + kt2))
    assert steady_state_covariance(m)[1, 1] == pytest.approx(expect, rel=1e-12)
    S = propagate_covariance(m.drift, m.diffusion(), 0.5 * np.eye(2), 60 / g1, 20000)
    assert S[1, 1] == pytest.approx(expect, rel=1e-9)


def test_atomic_steady_state_without_decay():
    # gamma1 = gamma2 = 0: Var(p_at) relaxes to 1/4 through the light alone
    p = CouplingParams(1.0, 1.0, 0.1, 0.1)
    m = build_single_cell(p, derive_rates(p, gamma1=0.0, gamma2=0.0))
    S = propagate_covariance(m.drift, m.diffusion(), 0.5 * np.eye(2), 40.0, 20000)
    assert S[1, 1] == pytest.approx(0.25, rel=1e-12)
