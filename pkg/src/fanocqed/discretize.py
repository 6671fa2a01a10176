"""Lorentzian-weighted photon mode grids and grid transformations.

A lossy cavity mode of total strength ``lambda_c``, center ``omega_c`` and
loss width ``kappa`` is represented as many discrete modes whose strengths
follow a unit-mass Lorentzian, ``|lambda_k|^2 = |lambda_c|^2 * L``. Grids may
be re-sampled onto a nonuniform frequency axis through a monotone mapping
``omega(Omega)``; the per-mode quadrature weight then carries the local mode
density so the discrete couplings stay equivalent to the continuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import CavityModel, ValidationError

#: Refuse to build grids with more modes than this unless overridden.
DEFAULT_MODE_CAP = 1_000_000


@dataclass(frozen=True)
class PhotonGrid:
    """Discrete photon modes: frequencies, strength vectors, quadrature weights.

    ``weight`` is the effective frequency spacing owned by each mode; for a
    uniform grid it is the constant spacing, for transformed grids it is the
    local density times the new spacing.
    """

    omega: np.ndarray        # (N,) eV, strictly increasing
    lam: np.ndarray          # (N, 3) eV^(1/2)/nm
    weight: np.ndarray       # (N,) eV
    provenance: str          # "uniform" or "transformed:<mapping>"

    def __post_init__(self):
        for arr in (self.omega, self.lam, self.weight):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.omega.size

    def lam_sq(self) -> np.ndarray:
        return np.einsum("kj,kj->k", self.lam, self.lam)


def lorentzian_weight(delta_omega, kappa, omega_kc):
    """Discrete Lorentzian mass of one mode at detuning omega_kc from center.

    Returns delta_omega * (1/2pi) * kappa / (omega_kc^2 + (kappa/2)^2);
    strictly positive and even in omega_kc.
    """
    delta_omega = np.asarray(delta_omega, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    if np.any(delta_omega <= 0.0):
        raise ValidationError(["lorentzian_weight.delta_omega: must be positive"])
    if np.any(kappa <= 0.0):
        raise ValidationError(["lorentzian_weight.kappa: must be positive"])
    omega_kc = np.asarray(omega_kc, dtype=float)
    out = delta_omega * (1.0 / (2.0 * math.pi)) * kappa / (omega_kc**2 + (kappa / 2.0) ** 2)
    if out.ndim == 0:
        return float(out)
    return out


def build_photon_grid(cavity: CavityModel, mode_cap: int = DEFAULT_MODE_CAP) -> PhotonGrid:
    """Uniform grid over the cavity window with Lorentzian-distributed strengths.

    The mode count is N = round((omega_max - omega_min)/spacing) + 1. For a
    window symmetric about omega_c the detunings are generated pairwise so the
    strength profile is exactly mirror-symmetric.
    """
    lo, hi = cavity.window
    if not (lo < cavity.omega_c < hi):
        raise ValidationError(["cavity.window: window excludes omega_c"])
    n = int(round((hi - lo) / cavity.spacing)) + 1
    if n > mode_cap:
        raise ValidationError(
            [f"cavity.window: grid needs {n} modes, exceeding the cap of {mode_cap}"]
        )
    if n < 2:
        raise ValidationError(["cavity.window: window narrower than one grid spacing"])

    # Symmetric windows get index-based detunings so that opposite-side modes
    # carry bit-identical strengths.
    if abs((cavity.omega_c - lo) - (hi - cavity.omega_c)) <= 1e-12 * max(abs(lo), abs(hi)):
        m = np.arange(n, dtype=float) - (n - 1) / 2.0
        detuning = m * cavity.spacing
        omega = cavity.omega_c + detuning
    else:
        omega = lo + np.arange(n, dtype=float) * cavity.spacing
        detuning = omega - cavity.omega_c

    lam_norm = cavity.lambda_norm()
    lam_sq = lam_norm**2 * lorentzian_weight(cavity.spacing, cavity.kappa, detuning)
    if lam_norm > 0.0:
        direction = cavity.lambda_vec() / lam_norm
        lam = np.sqrt(lam_sq)[:, None] * direction[None, :]
    else:
        lam = np.zeros((n, 3))
    weight = np.full(n, cavity.spacing)
    return PhotonGrid(omega=omega, lam=lam, weight=weight, provenance="uniform")


def check_sum_rule(grid: PhotonGrid, cavity: CavityModel) -> float | None:
    """Fraction of the total cavity strength captured by the grid.

    For a window symmetric about omega_c with half-width W the coverage tends
    to (2/pi)*arctan(2W/kappa) as the spacing shrinks. Returns None when
    lambda_c is zero (coverage undefined).
    """
    total = cavity.lambda_norm() ** 2
    if total == 0.0:
        return None
    return float(np.sum(grid.lam_sq()) / total)


@dataclass(frozen=True)
class GridMapping:
    """Monotone change of frequency variable omega(Omega) with its derivative."""

    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[float], float]


def identity_mapping() -> GridMapping:
    return GridMapping(
        name="identity",
        forward=lambda x: np.asarray(x, dtype=float),
        derivative=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        inverse=lambda w: float(w),
    )


def linear_mapping(a: float) -> GridMapping:
    if a <= 0.0:
        raise ValidationError(["mapping.linear: slope must be positive"])
    return GridMapping(
        name=f"linear:{a!r}",
        forward=lambda x: a * np.asarray(x, dtype=float),
        derivative=lambda x: np.full_like(np.asarray(x, dtype=float), a),
        inverse=lambda w: float(w) / a,
    )


def arctan_stretch_mapping(center: float, focus: float) -> GridMapping:
    """Concentrate modes near ``center``: omega = center + focus * tan(Omega).

    The sampling density of a uniform Omega grid under this map is a
    Lorentzian of half-width ``focus`` around ``center``.
    """
    if focus <= 0.0:
        raise ValidationError(["mapping.arctan_stretch: focus must be positive"])

    def forward(x):
        return center + focus * np.tan(np.asarray(x, dtype=float))

    def derivative(x):
        return focus / np.cos(np.asarray(x, dtype=float)) ** 2

    def inverse(w):
        return float(np.arctan((float(w) - center) / focus))

    return GridMapping(
        name=f"arctan:{center!r}:{focus!r}",
        forward=forward,
        derivative=derivative,
        inverse=inverse,
    )


def tabulated_mapping(omega_big: np.ndarray, omega_small: np.ndarray) -> GridMapping:
    """Piecewise-linear mapping from tabulated (Omega, omega) pairs.

    The derivative is the per-segment slope (piecewise constant). Both tables
    must be strictly increasing.
    """
    x = np.asarray(omega_big, dtype=float)
    y = np.asarray(omega_small, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 2:
        raise ValidationError(["mapping.tabulated: need two equal-length 1-d tables"])
    if np.any(np.diff(x) <= 0.0) or np.any(np.diff(y) <= 0.0):
        raise ValidationError(["mapping.tabulated: tables must be strictly increasing"])
    slopes = np.diff(y) / np.diff(x)

    def forward(q):
        return np.interp(np.asarray(q, dtype=float), x, y)

    def derivative(q):
        q = np.atleast_1d(np.asarray(q, dtype=float))
        idx = np.clip(np.searchsorted(x, q, side="right") - 1, 0, slopes.size - 1)
        return slopes[idx]

    def inverse(w):
        return float(np.interp(float(w), y, x))

    return GridMapping(name="tabulated", forward=forward, derivative=derivative, inverse=inverse)


def transform_grid(grid: PhotonGrid, mapping: GridMapping, d_big: float) -> PhotonGrid:
    """Re-sample a grid onto omega(Omega) nodes with uniform Omega spacing d_big.

    The squared strength per unit frequency of the source grid is interpolated
    piecewise-linearly onto the new nodes, and each new mode takes the weight
    D(Omega)*d_big so discrete couplings rescale as sqrt(D*d_big) times the
    continuum coupling density.
    """
    if d_big <= 0.0:
        raise ValidationError(["transform_grid.d_big: spacing must be positive"])
    lo = mapping.inverse(float(grid.omega[0]))
    hi = mapping.inverse(float(grid.omega[-1]))
    if not (hi > lo):
        raise ValidationError(["transform_grid.mapping: mapping must be increasing on the window"])
    n = int(math.floor((hi - lo) / d_big + 1e-9)) + 1
    big = lo + np.arange(n, dtype=float) * d_big
    omega_new = np.asarray(mapping.forward(big), dtype=float)
    if np.any(np.diff(omega_new) <= 0.0):
        raise ValidationError(["transform_grid.mapping: mapped frequencies are not strictly increasing"])
    if np.any(omega_new <= 0.0):
        raise ValidationError(["transform_grid.mapping: image leaves the positive-frequency domain"])
    # Clamp endpoint rounding noise into the source span before interpolating.
    omega_new = np.clip(omega_new, grid.omega[0], grid.omega[-1])

    density_src = grid.lam_sq() / grid.weight
    dens = np.interp(omega_new, grid.omega, density_src)
    weight_new = np.asarray(mapping.derivative(big), dtype=float) * d_big
    lam_sq_new = dens * weight_new

    src_sq = grid.lam_sq()
    k_ref = int(np.argmax(src_sq))
    if src_sq[k_ref] > 0.0:
        direction = grid.lam[k_ref] / math.sqrt(src_sq[k_ref])
        lam_new = np.sqrt(lam_sq_new)[:, None] * direction[None, :]
    else:
        lam_new = np.zeros((n, 3))
    return PhotonGrid(
        omega=omega_new,
        lam=lam_new,
        weight=weight_new,
        provenance=f"transformed:{mapping.name}",
    )


def stretched_mode_spacing(grid: PhotonGrid, mapping: GridMapping, n_modes: int) -> float:
    """Omega spacing that yields ``n_modes`` nodes across the grid's window."""
    if n_modes < 2:
        raise ValidationError(["transform_grid.n_modes: need at least two modes"])
    lo = mapping.inverse(float(grid.omega[0]))
    hi = mapping.inverse(float(grid.omega[-1]))
    return (hi - lo) / (n_modes - 1)


GRID_CSV_HEADER = "omega_eV,lambda_x,lambda_y,lambda_z,weight_eV"


def grid_to_csv(grid: PhotonGrid) -> str:
    lines = [GRID_CSV_HEADER]
    for k in range(grid.n):
        row = (grid.omega[k], grid.lam[k, 0], grid.lam[k, 1], grid.lam[k, 2], grid.weight[k])
        lines.append(",".join(f"{v + 0.0:.8e}" for v in row))
    return "\n".join(lines) + "\n"


def grid_from_csv(text: str, provenance: str = "uniform") -> PhotonGrid:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0].strip() != GRID_CSV_HEADER:
        raise ValidationError([f"grid csv: expected header {GRID_CSV_HEADER!r}"])
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    if data.ndim != 2 or data.shape[1] != 5:
        raise ValidationError(["grid csv: expected 5 columns"])
    return PhotonGrid(
        omega=data[:, 0].copy(),
        lam=data[:, 1:4].copy(),
        weight=data[:, 4].copy(),
        provenance=provenance,
    )
