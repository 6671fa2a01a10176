"""Domain types, unit conventions, and input validation.

Units are fixed globally: energies and hbar-rates in eV, time in fs,
transition dipoles in e*Angstrom, cavity strength in eV^(1/2)/nm. With the
dipole converted to e*nm, the coupling rate hbar*g = sqrt(omega/2) * |lambda|
* |d| comes out directly in eV with no further constants.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

#: Reduced Planck constant in eV * fs.
HBAR_EV_FS = 0.6582119569


class ValidationError(ValueError):
    """One or more domain invariants are violated.

    ``errors`` holds one human-readable message per violation, each prefixed
    with the path of the offending field (e.g. ``levels[0].energy``).
    """

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class SolverError(RuntimeError):
    """A numerical routine failed (root bracketing, singular solve, pole hit)."""


@dataclass(frozen=True)
class Constants:
    """Physical constants and the convention for absorption prefactors.

    The absolute absorption prefactor is never evaluated numerically; spectra
    are emitted normalized (peak 1) together with a scale factor, or in
    arbitrary units.
    """

    hbar: float = HBAR_EV_FS
    prefactor_mode: str = "normalized"  # or "arbitrary-units"

    def __post_init__(self):
        if self.hbar != HBAR_EV_FS:
            raise ValidationError(["constants.hbar: value is fixed and immutable"])
        if self.prefactor_mode not in ("normalized", "arbitrary-units"):
            raise ValidationError(["constants.prefactor_mode: unknown mode"])


@dataclass(frozen=True)
class Level:
    """A single electronic excitation: energy in eV, dipole in e*Angstrom."""

    label: str
    energy: float
    dipole: tuple[float, float, float]


@dataclass(frozen=True)
class ElectronicLevels:
    """Ordered set of electronic excitations (ascending energy, unique labels)."""

    levels: tuple[Level, ...]

    @property
    def n(self) -> int:
        return len(self.levels)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lv.label for lv in self.levels)

    def energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels], dtype=float)

    def dipoles(self) -> np.ndarray:
        """Dipole vectors as an (M, 3) array in e*Angstrom."""
        return np.array([lv.dipole for lv in self.levels], dtype=float)

    def index_of(self, label: str) -> int:
        for i, lv in enumerate(self.levels):
            if lv.label == label:
                return i
        raise KeyError(f"unknown level label {label!r}")

    def to_dict(self) -> dict:
        return {
            "levels": [
                {"label": lv.label, "energy": lv.energy, "dipole": list(lv.dipole)}
                for lv in self.levels
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ElectronicLevels":
        levels = tuple(
            Level(str(d["label"]), float(d["energy"]), tuple(float(x) for x in d["dipole"]))
            for d in data["levels"]
        )
        return cls(levels)


@dataclass(frozen=True)
class CavityModel:
    """Lossy cavity: central mode, total strength, loss width, and mode grid.

    ``window`` is the photon frequency range that the discretized continuum
    covers and ``spacing`` the uniform grid step. The guard
    ``spacing <= kappa/10`` keeps at least ~10 modes across the Lorentzian
    FWHM so the discretized continuum mimics a lossy mode instead of
    producing spurious recurrences inside simulated time windows.
    """

    omega_c: float                       # eV
    lambda_c: tuple[float, float, float]  # eV^(1/2)/nm
    kappa: float                         # eV
    window: tuple[float, float]          # (omega_min, omega_max), eV
    spacing: float                       # eV

    def lambda_vec(self) -> np.ndarray:
        return np.array(self.lambda_c, dtype=float)

    def lambda_norm(self) -> float:
        return float(np.linalg.norm(self.lambda_c))

    def to_dict(self) -> dict:
        return {
            "omega_c": self.omega_c,
            "lambda_c": list(self.lambda_c),
            "kappa": self.kappa,
            "window": list(self.window),
            "spacing": self.spacing,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CavityModel":
        return cls(
            omega_c=float(data["omega_c"]),
            lambda_c=tuple(float(x) for x in data["lambda_c"]),
            kappa=float(data["kappa"]),
            window=(float(data["window"][0]), float(data["window"][1])),
            spacing=float(data["spacing"]),
        )


def _check_finite(value, path: str, errors: list[str]) -> None:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        errors.append(f"{path}: value must be finite")


def _validate_levels(levels: ElectronicLevels, errors: list[str]) -> None:
    if levels.n == 0:
        errors.append("levels: at least one electronic level is required")
        return
    seen = set()
    prev = -math.inf
    for i, lv in enumerate(levels.levels):
        _check_finite(lv.energy, f"levels[{i}].energy", errors)
        if not (lv.energy > 0.0):
            errors.append(f"levels[{i}].energy: energy must be positive")
        if len(lv.dipole) != 3:
            errors.append(f"levels[{i}].dipole: must be a 3-vector")
        else:
            _check_finite(lv.dipole, f"levels[{i}].dipole", errors)
        if lv.label in seen:
            errors.append(f"levels[{i}].label: duplicate label {lv.label!r}")
        seen.add(lv.label)
        if lv.energy < prev:
            errors.append(f"levels[{i}].energy: levels must be sorted ascending by energy")
        prev = lv.energy


def _validate_cavity(cavity: CavityModel, errors: list[str]) -> None:
    _check_finite(cavity.omega_c, "cavity.omega_c", errors)
    _check_finite(cavity.kappa, "cavity.kappa", errors)
    _check_finite(cavity.spacing, "cavity.spacing", errors)
    _check_finite(cavity.window, "cavity.window", errors)
    if len(cavity.lambda_c) != 3:
        errors.append("cavity.lambda_c: must be a 3-vector")
    else:
        _check_finite(cavity.lambda_c, "cavity.lambda_c", errors)
    if not (cavity.kappa > 0.0):
        errors.append("cavity.kappa: loss rate must be positive")
    if not (cavity.spacing > 0.0):
        errors.append("cavity.spacing: grid spacing must be positive")
    lo, hi = cavity.window
    if not (lo > 0.0):
        errors.append("cavity.window: all window frequencies must be positive")
    if not (lo < cavity.omega_c < hi):
        errors.append("cavity.window: window must contain omega_c strictly inside")
    if cavity.kappa > 0.0 and cavity.spacing > 0.0 and cavity.spacing > cavity.kappa / 10.0:
        errors.append("cavity.spacing: grid too coarse for loss width (requires spacing <= kappa/10)")


def validate_inputs(
    levels: ElectronicLevels, cavity: CavityModel
) -> tuple[ElectronicLevels, CavityModel]:
    """Check all model invariants; return the inputs unchanged if they hold.

    Raises ValidationError listing every violated invariant with its field
    path. Idempotent: validated inputs validate again unchanged.
    """
    errors: list[str] = []
    _validate_levels(levels, errors)
    _validate_cavity(cavity, errors)
    if errors:
        raise ValidationError(errors)
    return levels, cavity


def to_json(levels: ElectronicLevels, cavity: CavityModel) -> str:
    return json.dumps(
        {"levels": levels.to_dict()["levels"], "cavity": cavity.to_dict()},
        indent=2,
        sort_keys=True,
    )


def from_json(text: str) -> tuple[ElectronicLevels, CavityModel]:
    data = json.loads(text)
    return (
        ElectronicLevels.from_dict({"levels": data["levels"]}),
        CavityModel.from_dict(data["cavity"]),
    )
