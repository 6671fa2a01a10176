"""Few-level emitters coupled to a lossy optical cavity.

The cavity is modeled as a Lorentzian-weighted discretized photon continuum
in the rotating-wave, single-excitation subspace. The package computes
polariton eigenstates at large mode counts through a structured
(bordered-diagonal) eigensolver, absorption and weight spectra, a
resolvent-based fast spectrum, and exact time-domain population dynamics.
"""

__version__ = "0.1.0"

from ._kernels import NUMBA_DEFAULT, backend_name
from .discretize import (
    PhotonGrid,
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
from .dynamics import (
    AmplitudeTrajectory,
    DecayFit,
    RabiFit,
    extract_rabi_frequency,
    fit_decay_rate,
    propagate,
    propagate_state,
    recurrence_time,
    trajectory_to_csv,
)
from .eigensolve import (
    PolaritonModes,
    WeightTable,
    eigen_table_csv,
    eigensolve_dense,
    eigensolve_structured,
    weights,
)
from .hamiltonian import (
    CoupledSystem,
    assemble,
    coupling_rate,
    dump_system,
    load_system,
    self_energy,
)
from .model import (
    CavityModel,
    Constants,
    ElectronicLevels,
    HBAR_EV_FS,
    Level,
    SolverError,
    ValidationError,
    validate_inputs,
)
from .observables import (
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
from .presets import BENZENE_LEVELS, TOLUENE_LEVELS, Preset, get_preset, list_presets

__all__ = [
    "AmplitudeTrajectory",
    "BENZENE_LEVELS",
    "CavityModel",
    "Constants",
    "CoupledSystem",
    "DecayFit",
    "ElectronicLevels",
    "HBAR_EV_FS",
    "Level",
    "NUMBA_DEFAULT",
    "PhotonGrid",
    "PolaritonModes",
    "Preset",
    "RabiFit",
    "SolverError",
    "Spectrum",
    "TOLUENE_LEVELS",
    "ValidationError",
    "WeightTable",
    "absorption_spectrum",
    "arctan_stretch_mapping",
    "assemble",
    "backend_name",
    "build_photon_grid",
    "check_sum_rule",
    "coupling_rate",
    "default_omega_grid",
    "dip_depth",
    "dump_system",
    "eigen_table_csv",
    "eigensolve_dense",
    "eigensolve_structured",
    "extract_rabi_frequency",
    "find_peaks",
    "fit_decay_rate",
    "get_preset",
    "grid_from_csv",
    "grid_to_csv",
    "identity_mapping",
    "linear_mapping",
    "list_presets",
    "load_system",
    "lorentzian_weight",
    "normalize",
    "peak_fwhm",
    "propagate",
    "propagate_state",
    "recurrence_time",
    "resolvent_spectrum",
    "self_energy",
    "spectrum_to_csv",
    "stretched_mode_spacing",
    "tabulated_mapping",
    "trajectory_to_csv",
    "transform_grid",
    "validate_inputs",
    "weight_spectrum",
    "weight_table_csv",
    "weights",
]
