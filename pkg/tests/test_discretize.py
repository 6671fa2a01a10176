import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fanocqed.discretize import (
    arctan_stretch_mapping,
    build_photon_grid,
    check_sum_rule,
    grid_from_csv,
    grid_to_csv,
    identity_mapping,
    linear_mapping,
    lorentzian_weight,
    stretched_mode_spacing,
    tabulated_mapping,
    transform_grid,
)
from fanocqed.eigensolve import eigensolve_structured
from fanocqed.hamiltonian import assemble
from fanocqed.model import CavityModel, ValidationError
from fanocqed.observables import absorption_spectrum, default_omega_grid
from fanocqed.presets import TOLUENE_LEVELS, get_preset


def cavity(lam=0.01, kappa=0.001, wc=6.93, window=None, spacing=1e-4):
    window = window or (wc - 0.25, wc + 0.25)
    return CavityModel(omega_c=wc, lambda_c=(lam, 0.0, 0.0), kappa=kappa,
                       window=window, spacing=spacing)


def test_lorentzian_weight_peak_value():
    # direct arithmetic: 1e-4 * 2 / (pi * 1e-3)
    val = lorentzian_weight(1e-4, 1e-3, 0.0)
    assert val == pytest.approx(1e-4 * 2.0 / (math.pi * 1e-3), rel=1e-14)
    assert val == pytest.approx(0.0636620, abs=1e-7)


def test_lorentzian_weight_half_maximum():
    peak = lorentzian_weight(1e-4, 1e-3, 0.0)
    assert lorentzian_weight(1e-4, 1e-3, 0.5e-3) == pytest.approx(peak / 2.0, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-8, max_value=10.0, allow_nan=False))
def test_lorentzian_weight_even_and_positive(x):
    left = lorentzian_weight(1e-4, 1e-3, -x)
    right = lorentzian_weight(1e-4, 1e-3, x)
    assert left == right
    assert right > 0.0


def test_lorentzian_weight_rejects_nonpositive():
    with pytest.raises(ValidationError):
        lorentzian_weight(0.0, 1e-3, 0.0)
    with pytest.raises(ValidationError):
        lorentzian_weight(1e-4, -1e-3, 0.0)


def test_benzene_grid_has_5000_modes():
    cav = cavity(lam=0.008, window=(6.93 - 0.24995, 6.93 + 0.24995))
    grid = build_photon_grid(cav)
    assert grid.n == 5000
    assert np.all(np.diff(grid.omega) > 0)
    assert np.allclose(grid.weight, 1e-4)
    assert grid.provenance == "uniform"


def test_toluene_narrow_grid_has_601_modes():
    grid = build_photon_grid(get_preset("fig3-iii").cavity)
    assert grid.n == 601
    assert grid.omega[0] == pytest.approx(6.35, abs=1e-12)
    assert grid.omega[-1] == pytest.approx(6.95, abs=1e-12)


def test_symmetric_window_profile_exactly_mirrored():
    cav = cavity(lam=0.008, window=(6.93 - 0.24995, 6.93 + 0.24995))
    grid = build_photon_grid(cav)
    lam_sq = grid.lam_sq()
    assert np.array_equal(lam_sq, lam_sq[::-1])


def test_zero_coupling_grid():
    grid = build_photon_grid(cavity(lam=0.0))
    assert np.all(grid.lam == 0.0)
    assert check_sum_rule(grid, cavity(lam=0.0)) is None


def test_truncated_sum_never_exceeds_total():
    cav = cavity(lam=0.3, kappa=0.01, spacing=1e-3)
    grid = build_photon_grid(cav)
    assert np.sum(grid.lam_sq()) <= cav.lambda_norm() ** 2 + 1e-12


def test_mode_cap_enforced():
    with pytest.raises(ValidationError) as err:
        build_photon_grid(cavity(), mode_cap=100)
    assert "cap" in str(err.value)


def test_sum_rule_matches_closed_form():
    # cells tile [-W, W] exactly when the window is inset by half a spacing
    kappa, w, dw = 1e-3, 0.25, 1e-4
    cav = cavity(kappa=kappa, window=(6.93 - w + dw / 2, 6.93 + w - dw / 2), spacing=dw)
    coverage = check_sum_rule(build_photon_grid(cav), cav)
    oracle = (2.0 / math.pi) * math.atan(2.0 * w / kappa)
    assert oracle == pytest.approx(0.99873, abs=2e-5)
    assert coverage == pytest.approx(oracle, abs=1e-4)


def test_sum_rule_riemann_convergence():
    kappa, w = 1e-3, 0.25
    values = []
    for dw in (1e-4, 5e-5):
        cav = cavity(kappa=kappa, window=(6.93 - w + dw / 2, 6.93 + w - dw / 2), spacing=dw)
        values.append(check_sum_rule(build_photon_grid(cav), cav))
    assert abs(values[1] - values[0]) < 1e-6


def test_sum_rule_monotone_in_window():
    coverages = []
    for w in (0.05, 0.1, 0.2):
        cav = cavity(window=(6.93 - w, 6.93 + w))
        coverages.append(check_sum_rule(build_photon_grid(cav), cav))
    assert coverages[0] < coverages[1] < coverages[2] < 1.0


def test_identity_transform_is_identity():
    grid = build_photon_grid(cavity(spacing=1e-4))
    out = transform_grid(grid, identity_mapping(), 1e-4)
    assert out.n == grid.n
    assert np.allclose(out.omega, grid.omega, rtol=0, atol=1e-12)
    assert np.allclose(out.lam_sq(), grid.lam_sq(), rtol=1e-9, atol=0)
    assert out.provenance == "transformed:identity"


def test_linear_mapping_preserves_couplings():
    # omega = a * Omega with d_Omega = spacing / a keeps discrete couplings fixed
    grid = build_photon_grid(cavity(spacing=1e-4))
    a = 2.5
    out = transform_grid(grid, linear_mapping(a), 1e-4 / a)
    assert out.n == grid.n
    assert np.allclose(out.omega, grid.omega, rtol=1e-13)
    assert np.allclose(out.lam_sq(), grid.lam_sq(), rtol=1e-9)


def test_arctan_transform_weights_follow_density():
    grid = build_photon_grid(cavity(kappa=0.01, spacing=1e-3, window=(6.43, 7.43)))
    mapping = arctan_stretch_mapping(6.93, 0.05)
    d_big = stretched_mode_spacing(grid, mapping, 401)
    out = transform_grid(grid, mapping, d_big)
    assert out.provenance.startswith("transformed:arctan")
    # densest sampling at the focus center
    spacings = np.diff(out.omega)
    center = np.argmin(np.abs(out.omega - 6.93))
    assert np.argmin(spacings) in range(center - 2, center + 2)
    # away from the strongly curved edges the stored weight is the local spacing
    central = 0.5 * (out.omega[2:] - out.omega[:-2])
    rel = np.abs(out.weight[1:-1] - central) / central
    assert np.max(rel[5:-5]) < 5e-3


def test_tabulated_mapping_requires_monotone():
    with pytest.raises(ValidationError):
        tabulated_mapping(np.array([0.0, 1.0, 2.0]), np.array([1.0, 0.5, 2.0]))


def test_transform_rejects_nonpositive_image():
    from fanocqed.discretize import GridMapping

    grid = build_photon_grid(cavity())
    shift = tabulated_mapping(
        np.array([0.0, 1.0]), np.array([grid.omega[0], grid.omega[-1]])
    )
    transform_grid(grid, shift, 0.01)  # sane tabulated mapping passes
    # user mappings with an inconsistent inverse can push nodes negative
    lying = GridMapping(
        name="lying",
        forward=lambda x: np.asarray(x, dtype=float) - 10.0,
        derivative=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        inverse=lambda w: float(w),
    )
    with pytest.raises(ValidationError):
        transform_grid(grid, lying, 0.05)
    decreasing = GridMapping(
        name="decreasing",
        forward=lambda x: -np.asarray(x, dtype=float),
        derivative=lambda x: -np.ones_like(np.asarray(x, dtype=float)),
        inverse=lambda w: -float(w),
    )
    with pytest.raises(ValidationError):
        transform_grid(grid, decreasing, 0.05)


def test_transform_eigen_invariance_richardson():
    # coarse arctan grids approach the uniform-grid spectrum as the spacing shrinks
    preset = get_preset("fig3-iii")
    grid = build_photon_grid(preset.cavity)
    system = assemble(TOLUENE_LEVELS, grid)
    modes = eigensolve_structured(system)
    omega = default_omega_grid(*preset.cavity.window, 1500)
    ref = absorption_spectrum(modes, TOLUENE_LEVELS, preset.gamma, omega)
    mapping = arctan_stretch_mapping(preset.cavity.omega_c, 5 * preset.cavity.kappa)
    errors = []
    for n in (151, 301):
        sub = transform_grid(grid, mapping, stretched_mode_spacing(grid, mapping, n))
        sub_modes = eigensolve_structured(assemble(TOLUENE_LEVELS, sub))
        spec = absorption_spectrum(sub_modes, TOLUENE_LEVELS, preset.gamma, omega)
        errors.append(np.max(np.abs(spec.intensity - ref.intensity)))
    assert errors[1] < 0.5 * errors[0]


def test_grid_csv_round_trip():
    grid = build_photon_grid(cavity(spacing=1e-3, kappa=0.01, window=(6.8, 7.1)))
    text = grid_to_csv(grid)
    assert text.splitlines()[0] == "omega_eV,lambda_x,lambda_y,lambda_z,weight_eV"
    back = grid_from_csv(text)
    assert grid_to_csv(back) == text
    with pytest.raises(ValidationError):
        grid_from_csv("bad_header\n1,2,3,4,5\n")
