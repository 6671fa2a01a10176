import math

import numpy as np
import pytest

from fanocqed.discretize import build_photon_grid
from fanocqed.eigensolve import eigensolve_structured
from fanocqed.hamiltonian import assemble
from fanocqed.model import CavityModel, ValidationError
from fanocqed.observables import (
    Spectrum,
    absorption_spectrum,
    default_omega_grid,
    dip_depth,
    find_peaks,
    normalize,
    peak_fwhm,
    resolvent_spectrum,
    spectrum_to_csv,
    weight_spectrum,
    weight_table_csv,
)
from fanocqed.presets import BENZENE_LEVELS, TOLUENE_LEVELS, get_preset

from conftest import make_system


@pytest.fixture(scope="module")
def toluene_narrow():
    preset = get_preset("fig3-iii")
    grid = build_photon_grid(preset.cavity)
    system = assemble(TOLUENE_LEVELS, grid)
    modes = eigensolve_structured(system)
    return preset, system, modes


def test_free_space_single_peak():
    cav = CavityModel(omega_c=6.93, lambda_c=(0.0, 0.0, 0.0), kappa=0.001,
                      window=(6.68005, 7.17995), spacing=1e-4)
    system = assemble(BENZENE_LEVELS, build_photon_grid(cav))
    modes = eigensolve_structured(system)
    omega = default_omega_grid(6.68, 7.18, 2000)
    spec = absorption_spectrum(modes, BENZENE_LEVELS, 0.001, omega)
    positions, _ = find_peaks(spec)
    assert positions.size == 1
    assert positions[0] == pytest.approx(6.93, abs=1e-3)
    fine = absorption_spectrum(modes, BENZENE_LEVELS, 0.001, default_omega_grid(6.90, 6.96, 3000))
    assert peak_fwhm(fine) == pytest.approx(0.001, rel=0.02)


def test_spectrum_mirror_symmetry():
    # resonant toy with couplings exactly even in detuning: the polariton
    # structure is mirror symmetric, and the weight curve (no frequency
    # prefactor) reflects it to solver precision
    w0, kappa, dw = 6.93, 0.001, 1e-4
    delta = (np.arange(500) + 0.5) * dw
    ph = np.concatenate([w0 - delta[::-1], w0 + delta])
    g = 0.008 * 0.096 * np.sqrt(w0 / 2.0) * np.sqrt(
        dw * (kappa / (2 * np.pi)) / (np.square(ph - w0) + (kappa / 2) ** 2)
    )
    system = make_system([w0], ph, g[None, :])
    modes = eigensolve_structured(system)
    ev = modes.eigenvalues - w0
    assert np.max(np.abs(ev + ev[::-1])) < 1e-12
    assert np.max(np.abs(modes.el_weight - modes.el_weight[::-1])) < 1e-10
    x = np.linspace(0.0, 0.04, 400)
    left = weight_spectrum(modes, 0, 1e-3, w0 - x)
    right = weight_spectrum(modes, 0, 1e-3, w0 + x)
    num = np.abs(left.raw() - right.raw())
    assert np.max(num / np.max(left.raw())) < 1e-9
    # the absorption curve picks up the linear frequency prefactor, which
    # bounds its residual asymmetry at the 2*delta/omega scale
    al = absorption_spectrum(modes, BENZENE_LEVELS, 1e-3, w0 - x)
    ar = absorption_spectrum(modes, BENZENE_LEVELS, 1e-3, w0 + x)
    rel = np.max(np.abs(al.raw() - ar.raw()) / np.max(al.raw()))
    assert rel < 2.0 * 0.002 / w0


def test_weight_spectrum_decoupled_is_lorentzian():
    system = make_system([2.0], [1.0, 3.0], [[0.0, 0.0]])
    modes = eigensolve_structured(system)
    omega = np.linspace(1.9, 2.1, 801)
    spec = weight_spectrum(modes, 0, 0.001, omega)
    gamma = 0.001
    analytic = gamma / (2 * math.pi) / ((omega - 2.0) ** 2 + (gamma / 2) ** 2)
    assert np.allclose(spec.raw(), analytic, rtol=1e-10)
    assert spec.channel == "weight:e1"


def test_weight_curves_weak_vs_strong(toluene_narrow):
    preset, system, _ = toluene_narrow
    omega = default_omega_grid(6.35, 6.95, 2400)

    weak = get_preset("fig3-ii")
    modes2 = eigensolve_structured(assemble(TOLUENE_LEVELS, build_photon_grid(weak.cavity)))
    e1 = weight_spectrum(modes2, "e1", weak.gamma, omega)
    e2 = weight_spectrum(modes2, "e2", weak.gamma, omega)
    pos1, _ = find_peaks(e1, min_height=0.1, min_prominence=0.2)
    pos2, _ = find_peaks(e2, min_height=0.1, min_prominence=0.2)
    # e1 splits into a polariton doublet; e2 stays a single unshifted line
    assert pos1.size == 2
    assert pos2.size == 1
    assert pos2[0] == pytest.approx(6.71, abs=2e-3)
    at_polaritons = np.interp(pos1, omega, e2.raw())
    assert np.all(at_polaritons < 0.02 * np.max(e2.raw()))


def test_weight_curves_share_character_when_mixed(toluene_narrow):
    preset, system, modes = toluene_narrow
    omega = default_omega_grid(6.60, 6.80, 2001)
    e1 = weight_spectrum(modes, "e1", preset.gamma, omega)
    e2 = weight_spectrum(modes, "e2", preset.gamma, omega)
    # the polariton pair formed with e2: both branches carry e2 weight and
    # both sit on top of substantial e1 weight
    pos2, _ = find_peaks(e2, min_height=0.05, min_prominence=0.05)
    assert pos2.size >= 2
    assert pos2.max() - pos2.min() > 5e-3
    e1_at = np.interp(pos2, omega, e1.raw())
    assert np.all(e1_at > 0.05 * np.max(e1.raw()))
    e2_at_e1_main = np.interp([omega[np.argmax(e1.intensity)]], omega, e2.raw())[0]
    assert e2_at_e1_main > 0.02 * np.max(e2.raw())


def test_resolvent_two_level_doublet():
    # single resonant mode: two Lorentzian lines at omega0 +/- g
    g = math.sqrt(6.93 / 2.0) * 0.008 * 0.096
    system = make_system([6.93], [6.93], [[-g]])
    spec = resolvent_spectrum(system, BENZENE_LEVELS, 0.0005, np.linspace(6.90, 6.96, 4001))
    positions, _ = find_peaks(spec)
    assert positions.size == 2
    assert np.allclose(positions, [6.93 - g, 6.93 + g], atol=2e-4)


def test_resolvent_matches_eigen_spectrum(toluene_narrow):
    preset, system, modes = toluene_narrow
    omega = default_omega_grid(6.35, 6.95, 2400)
    eig = absorption_spectrum(modes, TOLUENE_LEVELS, preset.gamma, omega)
    res = resolvent_spectrum(system, TOLUENE_LEVELS, preset.gamma, omega)
    assert np.max(np.abs(eig.intensity - res.intensity)) <= 0.01


def test_normalize_idempotent_and_round_trip():
    omega = np.linspace(0.0, 1.0, 11)
    raw = Spectrum(omega=omega, intensity=np.linspace(0.0, 4.0, 11),
                   scale_factor=1.0, channel="total_absorption", gamma=0.1,
                   normalized=False)
    once = normalize(raw)
    twice = normalize(once)
    assert np.max(once.intensity) == 1.0
    assert np.array_equal(once.intensity, twice.intensity)
    assert once.scale_factor == twice.scale_factor
    assert np.allclose(once.raw(), raw.intensity, rtol=1e-12)
    zero = Spectrum(omega=omega, intensity=np.zeros(11), scale_factor=1.0,
                    channel="total_absorption", gamma=0.1, normalized=False)
    with pytest.raises(ValidationError):
        normalize(zero)


def test_gamma_limit_peaks_converge_to_eigenvalues():
    system = make_system([2.0], [1.99, 2.0, 2.01], [[0.004, 0.004, 0.004]])
    modes = eigensolve_structured(system)
    bright = modes.eigenvalues[modes.el_weight > 0.05]
    omega = np.linspace(1.96, 2.04, 8001)
    for gamma in (2e-3, 5e-4, 2e-4):
        spec = absorption_spectrum(modes, BENZENE_LEVELS, gamma, omega)
        positions, _ = find_peaks(spec, min_height=0.05, min_prominence=0.05)
        for p in positions:
            assert np.min(np.abs(bright - p)) <= (omega[1] - omega[0]) + gamma / 10


def test_oscillator_strength_conserved_across_coupling():
    integrals = []
    for lam, kappa in ((0.0, 0.001), (0.001, 0.001), (0.008, 0.001), (0.008, 0.008)):
        cav = CavityModel(omega_c=6.93, lambda_c=(lam, 0.0, 0.0), kappa=kappa,
                          window=(6.68005, 7.17995), spacing=1e-4)
        system = assemble(BENZENE_LEVELS, build_photon_grid(cav))
        modes = eigensolve_structured(system)
        omega = default_omega_grid(6.68005, 7.17995, 6000)
        spec = absorption_spectrum(modes, BENZENE_LEVELS, 1e-3, omega)
        integrals.append(np.trapezoid(spec.raw() / omega, omega))
    ref = integrals[0]
    for value in integrals[1:]:
        assert value == pytest.approx(ref, rel=1e-3)


def test_fano_dip_deepens_at_small_broadening(toluene_narrow):
    preset, system, modes = toluene_narrow
    omega = np.linspace(6.45, 6.70, 5001)
    depths = []
    for gamma in (0.001, 0.0005, 0.0002):
        spec = absorption_spectrum(modes, TOLUENE_LEVELS, gamma, omega)
        depths.append(dip_depth(spec, 6.58, 0.004))
    assert depths[0] < depths[1] < depths[2]
    assert depths[2] > 0.5


def test_spectrum_csv_format():
    omega = np.linspace(1.0, 2.0, 3)
    spec = Spectrum(omega=omega, intensity=np.array([0.5, 1.0, 0.25]),
                    scale_factor=2.0, channel="total_absorption", gamma=0.01)
    text = spectrum_to_csv(spec)
    lines = text.splitlines()
    assert lines[0] == "# channel=total_absorption"
    assert lines[2] == "omega_eV,intensity_norm,scale_factor"
    assert lines[3] == "1.00000000e+00,5.00000000e-01,2.00000000e+00"


def test_weight_table_csv_format(toluene_narrow):
    preset, system, modes = toluene_narrow
    omega = default_omega_grid(6.35, 6.95, 50)
    curves = [weight_spectrum(modes, lb, preset.gamma, omega) for lb in TOLUENE_LEVELS.labels]
    text = weight_table_csv(curves)
    lines = text.splitlines()
    assert lines[1] == "omega_eV,w_e0,w_e1,w_e2,w_e3"
    assert len(lines) == 52


def test_dip_depth_window_check():
    omega = np.linspace(1.0, 2.0, 100)
    spec = Spectrum(omega=omega, intensity=np.ones(100), scale_factor=1.0,
                    channel="total_absorption", gamma=0.1)
    with pytest.raises(ValidationError):
        dip_depth(spec, 5.0, 0.01)
    assert dip_depth(spec, 1.5, 0.05) == 0.0


def test_empty_grid_and_bad_gamma_rejected(toluene_narrow):
    preset, system, modes = toluene_narrow
    with pytest.raises(ValidationError):
        absorption_spectrum(modes, TOLUENE_LEVELS, 0.0, np.linspace(6.4, 6.9, 10))
    with pytest.raises(ValidationError):
        absorption_spectrum(modes, TOLUENE_LEVELS, 1e-3, np.array([]))
    with pytest.raises(ValidationError):
        resolvent_spectrum(system, TOLUENE_LEVELS, 1e-3, np.linspace(6.4, 6.9, 10),
                           polarization=(0.0, 0.0, 0.0))