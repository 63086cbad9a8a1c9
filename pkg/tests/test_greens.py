import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from polariton_vg.greens import (
    ConfigurationError,
    SelfEnergyConfig,
    TastParams,
    ThermalState,
    bose_einstein,
    dark_polarizability_lp,
    fit_tast_g,
    polarizability,
    polarizability_imag,
    renormalized_band,
    renormalized_vg,
    renormalized_vg_at,
    tast_vg,
)
from polariton_vg.model import (
    KB,
    BathSpec,
    DiscretizedBath,
    ModelParams,
    bare_group_velocity,
    dense_grid,
    discretize_bath,
    k_at_lp_energy,
    mode_grid,
    polariton_point,
)

P = ModelParams()
T300 = ThermalState(300.0)
ETA = 1e-3


def _bath(lam=0.006, nb=10_000, wf=0.006):
    return discretize_bath(BathSpec(lam=lam, omega_f=wf, n_modes=nb))


def _thermal_for(x, omega=0.01):
    # temperature at which beta * omega = x
    return ThermalState(omega / (KB * x))


# -- kernels -----------------------------------------------------------------

def test_bose_einstein_limits():
    assert bose_einstein(0.01, _thermal_for(np.log(2))) == pytest.approx(1.0, rel=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        n = bose_einstein(0.01, _thermal_for(700.0))
    assert 0 <= n < 1e-300
    assert bose_einstein(0.01, _thermal_for(0.01)) == pytest.approx(100.0, rel=1e-2)
    for bad in (0.0, -1e-3):
        with pytest.raises(ValueError):
            bose_einstein(bad, T300)


def test_thermal_state():
    assert T300.beta == pytest.approx(1 / (KB * 300), rel=1e-15)
    with pytest.raises(ValueError):
        ThermalState(0.0)


def test_polarizability_zero_temperature():
    cold = ThermalState(1e-2)
    x, w = -0.1, 0.006
    a = x - w
    assert polarizability(x, 0.0, w, cold, ETA) == pytest.approx(a / (a * a + ETA**2), rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-4, 0.2), st.floats(10.0, 1000.0))
def test_polarizability_equal_energies(w, temp):
    th = ThermalState(temp)
    n = bose_einstein(w, th)
    expect = -(1 + n) * w / (w * w + ETA**2) + n * w / (w * w + ETA**2)
    val = polarizability(1.9, 1.9, w, th, ETA)
    assert val == pytest.approx(expect, rel=1e-10)
    assert val < 0


def test_lp_to_dark_polarizability_is_negative():
    bp = polariton_point(k_at_lp_energy(1.86, P), P)
    w = _bath().omega
    w = w[w < 0.03]
    assert np.all(polarizability(bp.energy_lp, P.omega0, w, T300, ETA) < 0)
    assert np.all(dark_polarizability_lp(bp, w, T300, ETA) < 0)


def test_dark_kernel_form():
    gap, w = 0.1, np.geomspace(1e-4, 1.0, 200)
    n = bose_einstein(w, T300)
    a = w - gap
    hand = n * a / (a * a + ETA**2) - (1 + n) / (w + gap)
    np.testing.assert_allclose(dark_polarizability_lp(gap, w, T300, ETA), hand, rtol=1e-14)
    # agrees with the symmetric kernel up to O(eta^2) on the unregularized denominator
    # differs from the symmetric kernel only by eta on the (w + gap) denominator
    full = polarizability(-gap, 0.0, w, T300, ETA)
    bound = (1 + n) * ETA**2 / (w + gap) ** 3 * 1.001
    assert np.all(np.abs(dark_polarizability_lp(gap, w, T300, ETA) - full) <= bound)
    cold = ThermalState(0.1)
    assert dark_polarizability_lp(gap, 1e-3, cold, ETA) == pytest.approx(-1 / (1e-3 + gap), rel=1e-12)
    assert abs(dark_polarizability_lp(gap, 1e8, T300, ETA)) < 1e-7


def test_imag_kernel_is_lorentzian():
    x, w = np.linspace(-0.05, 0.05, 5001), 0.01
    n = bose_einstein(w, T300)
    im = polarizability_imag(x, 0.0, w, T300, ETA)
    assert np.all(im <= 0)
    # each Lorentzian integrates to -pi * weight
    area = np.trapezoid(im, x)
    assert area == pytest.approx(-np.pi * (1 + 2 * n), rel=3e-2)


# -- band corrections ----------------------------------------------------------

def test_zero_coupling_gives_bare_band():
    grid = dense_grid(P, n_points=401)
    band = renormalized_band(grid, P, _bath(lam=0.0, nb=100), T300)
    assert np.all(band.correction_lp == 0) and np.all(band.correction_up == 0)
    assert np.all(band.linewidth_lp == 0) and np.all(band.linewidth_up == 0)
    renormalized_vg(band, P)
    np.testing.assert_array_equal(band.vg_lp, band.vg_bare_lp)
    np.testing.assert_array_equal(band.vg_up, band.vg_bare_up)
    k = band.k_parallel[1:4]
    np.testing.assert_array_equal(renormalized_vg_at(k, P, _bath(lam=0.0, nb=10), T300),
                                  bare_group_velocity(k, "LP", P))


def test_grid_derivative_converges():
    # central differences: halving the spacing cuts the error about fourfold
    bath = _bath(nb=2000)
    k0 = k_at_lp_energy(1.86, P)
    ref = renormalized_vg_at(k0, P, bath, T300)[0]
    errs = []
    for h in (2e-5, 1e-5):
        k = k0 + h * np.arange(-2, 3)
        band = renormalized_vg(renormalized_band(k, P, bath, T300), P)
        errs.append(abs(band.vg_lp[2] - ref))
    assert errs[1] < errs[0] / 3


def test_exact_linearity_in_lambda():
    k = np.linspace(0, 2 * P.k_perp, 101)
    b1 = renormalized_band(k, P, _bath(0.006), T300)
    b2 = renormalized_band(k, P, _bath(0.012), T300)
    np.testing.assert_allclose(b2.correction_lp, 2 * b1.correction_lp, rtol=1e-12)
    np.testing.assert_allclose(b2.correction_up, 2 * b1.correction_up, rtol=1e-12)
    band = {lam: renormalized_vg(renormalized_band(k, P, _bath(lam), T300), P) for lam in (0.006, 0.012)}
    dv = {lam: b.vg_lp - b.vg_bare_lp for lam, b in band.items()}
    inner = slice(1, None)
    np.testing.assert_allclose(dv[0.012][inner] / dv[0.006][inner], 2.0, atol=1e-10)
    k0 = k_at_lp_energy(1.86, P)
    vb = bare_group_velocity(k0, "LP", P)
    d1 = renormalized_vg_at(k0, P, _bath(0.006), T300) - vb
    d2 = renormalized_vg_at(k0, P, _bath(0.012), T300) - vb
    assert d2[0] / d1[0] == pytest.approx(2.0, abs=1e-10)


def test_sign_structure_and_velocity_reduction():
    k = np.linspace(0, 2.5 * P.k_perp, 501)
    band = renormalized_vg(renormalized_band(k, P, _bath(), T300), P)
    gap = band.base.dark_gap
    sel = gap >= 0.060
    assert sel.sum() > 50
    assert np.all(band.correction_lp[sel] <= 0)
    assert np.all(band.correction_up[sel] >= 0)
    inner = sel & (k > 0)
    assert np.all(band.vg_lp[inner] < band.vg_bare_lp[inner])


def test_dark_only_factorization():
    """Correction / |C_k|^2 depends on k only through the dark gap."""
    bath = _bath(nb=2000)
    k = np.linspace(0, 2 * P.k_perp, 41)
    band = renormalized_band(k, P, bath, T300)
    gap = band.base.dark_gap
    th = T300
    # independent transcription of the dark-only LP sum
    n = 1.0 / np.expm1(th.beta * bath.omega)
    expect = []
    for d in gap:
        a = bath.omega - d
        xi = n * a / (a * a + ETA**2) - (1 + n) / (bath.omega + d)
        expect.append(np.sum(2 * bath.c**2 * xi))
    np.testing.assert_allclose(band.correction_lp / band.base.hopfield_lp, expect, rtol=1e-11)


def test_full_sum_against_brute_force():
    params = ModelParams(N=60, M=7, L=None)
    bath = _bath(nb=50)
    k = np.array([0.0, 0.3 * params.k_perp, 0.9 * params.k_perp])
    cfg = SelfEnergyConfig(dark_only=False)
    band = renormalized_band(k, params, bath, T300, cfg)

    mg = polariton_point(mode_grid(params).k_parallel, params)
    n = 1.0 / np.expm1(T300.beta * bath.omega)

    def xi(x):
        a, b = x - bath.omega, x + bath.omega
        return np.sum(2 * bath.c**2 * ((1 + n) * a / (a * a + ETA**2) + n * b / (b * b + ETA**2)))

    base = polariton_point(k, params)
    for i in range(k.size):
        for e, z2, corr in ((base.energy_lp[i], base.hopfield_lp[i], band.correction_lp[i]),
                            (base.energy_up[i], base.zeta_up[i], band.correction_up[i])):
            s = (params.N - params.M) * xi(e - params.omega0)
            for j in range(params.M):
                s += mg.zeta_up[j] * xi(e - mg.energy_up[j]) + mg.hopfield_lp[j] * xi(e - mg.energy_lp[j])
            assert corr == pytest.approx(z2 * s / params.N, rel=1e-11)


def test_branch_selection_full_sum():
    params = ModelParams(N=200, M=11, L=None)
    bath = _bath(nb=200)
    k = [0.2 * params.k_perp]
    full = renormalized_band(k, params, bath, T300, SelfEnergyConfig(dark_only=False)).correction_lp
    dark = renormalized_band(k, params, bath, T300,
                             SelfEnergyConfig(dark_only=False, include_branches={"dark"})).correction_lp
    pol = renormalized_band(k, params, bath, T300,
                            SelfEnergyConfig(dark_only=False, include_branches={"UP", "LP"})).correction_lp
    assert full[0] == pytest.approx(dark[0] + pol[0], rel=1e-12)
    with pytest.raises(ConfigurationError):
        SelfEnergyConfig(include_branches={"XP"})


def test_configuration_errors():
    empty = DiscretizedBath(np.array([]), np.array([]))
    with pytest.raises(ConfigurationError):
        renormalized_band([0.0], P, empty, T300)
    with pytest.raises(ConfigurationError):
        renormalized_band([], P, _bath(nb=10), T300)
    with pytest.raises(ConfigurationError):
        renormalized_band([0.0], ModelParams(N=5, M=5, L=1.0), _bath(nb=10), T300,
                          SelfEnergyConfig(dark_only=False))
    for kw in (dict(eta=0.0), dict(derivative_step=0.0)):
        with pytest.raises(ConfigurationError):
            SelfEnergyConfig(**kw)
    band = renormalized_band([0.0, 1e-4, 3e-4], P, _bath(nb=10), T300)
    with pytest.raises(ValueError):
        renormalized_vg(band, P)
    with pytest.raises(ValueError):
        renormalized_vg(renormalized_band([0.0], P, _bath(nb=10), T300), P)


def test_self_consistent_close_to_on_shell():
    # large dark gap: the off-shell shift barely moves the kernel
    k = np.linspace(0, 0.3 * P.k_perp, 11)
    on = renormalized_band(k, P, _bath(nb=2000), T300)
    sc = renormalized_band(k, P, _bath(nb=2000), T300, SelfEnergyConfig(self_consistent=True))
    assert sc.meta["sc_iterations"][0] > 0
    np.testing.assert_allclose(sc.correction_lp, on.correction_lp, rtol=0.05)


def test_grid_and_pointwise_velocities_agree():
    k = np.linspace(0, 2 * P.k_perp, 2001)
    band = renormalized_vg(renormalized_band(k, P, _bath(), T300), P)
    idx = [200, 700, 1300]
    pt = renormalized_vg_at(k[idx], P, _bath(), T300)
    np.testing.assert_allclose(band.vg_lp[idx], pt, rtol=1e-4)


# -- reference values, convergence and temperature dependence ------------------

K186 = 0.0031158491668
VB186 = 41.6163463259
VR186 = 38.9303169613  # frozen output: dark-only, N_b = 1e4, eta = 1 meV, 300 K


def test_reference_values_186():
    k0 = k_at_lp_energy(1.86, P)
    assert k0 == pytest.approx(K186, rel=1e-10)
    assert bare_group_velocity(k0, "LP", P) == pytest.approx(VB186, rel=1e-10)
    assert renormalized_vg_at(k0, P, _bath(), T300)[0] == pytest.approx(VR186, rel=1e-8)


def test_convergence_in_bath_modes():
    k0 = k_at_lp_energy(1.86, P)
    c1 = renormalized_band([k0], P, _bath(nb=10_000), T300).correction_lp[0]
    c3 = renormalized_band([k0], P, _bath(nb=30_000), T300).correction_lp[0]
    assert abs(c3 / c1 - 1) < 1e-3


def test_eta_robustness():
    k0 = k_at_lp_energy(1.86, P)
    v1 = renormalized_vg_at(k0, P, _bath(nb=10_000), T300, SelfEnergyConfig(eta=1e-3))[0]
    v2 = renormalized_vg_at(k0, P, _bath(nb=40_000), T300, SelfEnergyConfig(eta=5e-4))[0]
    assert abs(v2 / v1 - 1) < 1e-2


def test_temperature_trend():
    k0 = k_at_lp_energy(1.86, P)
    bath = _bath()
    v = [renormalized_vg_at(k0, P, bath, ThermalState(t))[0] for t in (100, 200, 300, 400)]
    assert np.all(np.diff(v) < 0)
    temps = np.linspace(250, 400, 7)
    dv = [renormalized_vg_at(k0, P, bath, ThermalState(t))[0] - VB186 for t in temps]
    assert stats.linregress(temps, dv).rvalue ** 2 >= 0.999


# -- TAST ---------------------------------------------------------------------

def test_tast_limits():
    vb, gap = np.array([10.0, 40.0]), np.array([0.1, 0.1])
    np.testing.assert_array_equal(tast_vg(vb, gap, T300, TastParams(0.0)), vb)
    np.testing.assert_allclose(tast_vg(vb, gap, ThermalState(1.0), TastParams(3.0)), vb, rtol=1e-300)
    with pytest.raises(ValueError):
        TastParams(-1.0)
    with pytest.raises(ValueError):
        tast_vg(vb, [0.0, 0.1], T300, TastParams(3.0))


def test_tast_fit_roundtrip_and_default_g():
    k0 = k_at_lp_energy(1.86, P)
    gap = float(polariton_point(k0, P).dark_gap)
    g = fit_tast_g(VB186, VR186, gap, T300)
    assert tast_vg(VB186, gap, T300, TastParams(g)) == pytest.approx(VR186, rel=1e-12)
    assert tast_vg(VB186, gap, T300, TastParams(3.0)) == pytest.approx(VR186, rel=1e-2)
