"""Absorption and weight spectra, plus the resolvent fast path.

Eigen-based spectra broaden each polariton line with a unit-area Lorentzian
of FWHM gamma; the resolvent path evaluates the self-energy-dressed
electronic Green function at omega + i*gamma/2 and never diagonalizes, which
is the practical route at very large mode counts. Spectra are reported
normalized to unit peak with the restoring scale factor attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .eigensolve import PolaritonModes
from .hamiltonian import ANGSTROM_TO_NM, CoupledSystem
from .model import ElectronicLevels, SolverError, ValidationError


@dataclass(frozen=True)
class Spectrum:
    omega: np.ndarray        # (R,) eV
    intensity: np.ndarray    # (R,) nonnegative
    scale_factor: float      # raw intensity = intensity * scale_factor
    channel: str             # "total_absorption" or "weight:<label>"
    gamma: float             # eV
    normalized: bool = True

    def __post_init__(self):
        self.omega.setflags(write=False)
        self.intensity.setflags(write=False)

    def raw(self) -> np.ndarray:
        return self.intensity * self.scale_factor


def default_omega_grid(lo: float, hi: float, n: int = 3000) -> np.ndarray:
    if not (hi > lo) or n < 2:
        raise ValidationError(["omega_grid: need hi > lo and at least two points"])
    return np.linspace(lo, hi, n)


def normalize(spectrum: Spectrum) -> Spectrum:
    """Scale the peak to one, folding the factor into scale_factor (idempotent)."""
    peak = float(np.max(spectrum.intensity))
    if not peak > 0.0:
        raise ValidationError(["spectrum: cannot normalize an all-zero spectrum"])
    return replace(
        spectrum,
        intensity=spectrum.intensity / peak,
        scale_factor=spectrum.scale_factor * peak,
        normalized=True,
    )


def _polarization_unit(polarization) -> np.ndarray:
    pol = np.asarray(polarization, dtype=float)
    norm = np.linalg.norm(pol)
    if pol.shape != (3,) or not norm > 0.0:
        raise ValidationError(["polarization: must be a nonzero 3-vector"])
    return pol / norm


def absorption_spectrum(
    modes: PolaritonModes,
    levels: ElectronicLevels,
    gamma: float,
    omega_grid,
    polarization=(1.0, 0.0, 0.0),
    use_numba: bool | None = None,
) -> Spectrum:
    """Lorentzian-broadened polariton absorption along a polarization axis.

    Line strength of polariton l is omega_l * |sum_i C_il (d_i . pol)|^2; the
    frequency prefactor is applied at the eigenvalue.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    if omega_grid.size == 0:
        raise ValidationError(["omega_grid: must not be empty"])
    if not gamma > 0.0:
        raise ValidationError(["gamma: spectral broadening must be positive"])
    pol = _polarization_unit(polarization)
    d_proj = levels.dipoles() @ pol
    amp = modes.el_components @ d_proj
    strengths = modes.eigenvalues * amp**2
    raw = _kernels.lorentz_accumulate(
        omega_grid, modes.eigenvalues, strengths, gamma, use_numba=use_numba
    )
    spec = Spectrum(
        omega=omega_grid,
        intensity=raw,
        scale_factor=1.0,
        channel="total_absorption",
        gamma=gamma,
        normalized=False,
    )
    return normalize(spec)


def weight_spectrum(
    modes: PolaritonModes,
    state,
    gamma: float,
    omega_grid,
    use_numba: bool | None = None,
) -> Spectrum:
    """Broadened weight curve of one bare electronic state across the polaritons."""
    omega_grid = np.asarray(omega_grid, dtype=float)
    if not gamma > 0.0:
        raise ValidationError(["gamma: spectral broadening must be positive"])
    if isinstance(state, str):
        if state not in modes.labels:
            raise ValidationError([f"state: unknown label {state!r}"])
        idx = modes.labels.index(state)
    else:
        idx = int(state)
        if not 0 <= idx < modes.n_el:
            raise ValidationError([f"state: index {idx} out of range"])
    w_il = modes.el_components[:, idx] ** 2
    raw = _kernels.lorentz_accumulate(
        omega_grid, modes.eigenvalues, w_il, gamma, use_numba=use_numba
    )
    spec = Spectrum(
        omega=omega_grid,
        intensity=raw,
        scale_factor=1.0,
        channel=f"weight:{modes.labels[idx]}",
        gamma=gamma,
        normalized=False,
    )
    return normalize(spec)


def resolvent_spectrum(
    system: CoupledSystem,
    levels: ElectronicLevels,
    gamma: float,
    omega_grid,
    polarization=(1.0, 0.0, 0.0),
    chunk: int = 128,
) -> Spectrum:
    """Absorption from the dressed electronic resolvent at omega + i*gamma/2.

    intensity(omega) = -(omega/pi) * Im[d^T (omega + i*gamma/2 - diag(el)
    - Sigma)^{-1} d], evaluated in frequency chunks with one M x M solve per
    probe point. Matches the eigen-based spectrum up to the O(gamma/omega)
    difference in where the frequency prefactor is applied.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    if omega_grid.size == 0:
        raise ValidationError(["omega_grid: must not be empty"])
    if not gamma > 0.0:
        raise ValidationError(["gamma: spectral broadening must be positive"])
    pol = _polarization_unit(polarization)
    d_proj = (levels.dipoles() @ pol) * ANGSTROM_TO_NM
    m = system.n_el
    g = system.coupling
    ph = system.ph_energies
    p_flat = (g[:, None, :] * g[None, :, :]).reshape(m * m, ph.size)
    idx = np.arange(m)
    out = np.empty(omega_grid.size)
    half = 0.5j * gamma
    for start in range(0, omega_grid.size, chunk):
        sl = slice(start, min(start + chunk, omega_grid.size))
        z = omega_grid[sl] + half
        rec = 1.0 / (z[:, None] - ph[None, :])
        a = (rec @ p_flat.T).reshape(z.size, m, m)
        mat = -a
        mat[:, idx, idx] += z[:, None] - system.el_energies[None, :]
        rhs = np.broadcast_to(d_proj.astype(complex)[None, :, None], (z.size, m, 1))
        try:
            x = np.linalg.solve(mat, rhs)[..., 0]
        except np.linalg.LinAlgError as exc:
            raise SolverError(
                f"resolvent solve singular near omega={omega_grid[sl][0]!r} eV"
            ) from exc
        out[sl] = -(omega_grid[sl] / math.pi) * np.imag(np.einsum("ri,i->r", x, d_proj))
    spec = Spectrum(
        omega=omega_grid,
        intensity=np.maximum(out, 0.0),
        scale_factor=1.0,
        channel="total_absorption",
        gamma=gamma,
        normalized=False,
    )
    return normalize(spec)


def spectrum_to_csv(spectrum: Spectrum) -> str:
    """CSV with '#' metadata lines, then omega_eV,intensity_norm,scale_factor rows."""
    lines = [
        f"# channel={spectrum.channel}",
        f"# gamma_eV={spectrum.gamma!r}",
        "omega_eV,intensity_norm,scale_factor",
    ]
    sf = spectrum.scale_factor
    for w, v in zip(spectrum.omega, spectrum.intensity):
        lines.append(f"{w + 0.0:.8e},{v + 0.0:.8e},{sf + 0.0:.8e}")
    return "\n".join(lines) + "\n"


def weight_table_csv(spectra: list[Spectrum]) -> str:
    """Weight curves side by side, one column per electronic state."""
    if not spectra:
        raise ValidationError(["weight table: need at least one curve"])
    omega = spectra[0].omega
    for s in spectra[1:]:
        if s.omega.shape != omega.shape or not np.array_equal(s.omega, omega):
            raise ValidationError(["weight table: curves must share the frequency grid"])
    names = [s.channel.split(":", 1)[1] for s in spectra]
    lines = [
        "# " + ",".join(f"scale_{n}={s.scale_factor!r}" for n, s in zip(names, spectra)),
        "omega_eV," + ",".join(f"w_{n}" for n in names),
    ]
    for r in range(omega.size):
        vals = [omega[r]] + [s.intensity[r] for s in spectra]
        lines.append(",".join(f"{v + 0.0:.8e}" for v in vals))
    return "\n".join(lines) + "\n"


def find_peaks(spectrum: Spectrum, min_height: float = 0.02, min_prominence: float = 0.02):
    """Peak positions/heights above fractional thresholds, parabolically refined."""
    from scipy.signal import find_peaks as _sp_find_peaks

    y = spectrum.intensity
    top = float(np.max(y))
    idx, _ = _sp_find_peaks(y, height=min_height * top, prominence=min_prominence * top)
    positions = []
    heights = []
    x = spectrum.omega
    for i in idx:
        if 0 < i < y.size - 1:
            denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
            shift = 0.5 * (y[i - 1] - y[i + 1]) / denom if denom != 0.0 else 0.0
            positions.append(x[i] + shift * (x[min(i + 1, x.size - 1)] - x[i]))
        else:
            positions.append(x[i])
        heights.append(y[i])
    return np.asarray(positions), np.asarray(heights)


def peak_fwhm(spectrum: Spectrum) -> float:
    """Full width at half maximum of the global peak, by linear interpolation."""
    y = spectrum.intensity
    x = spectrum.omega
    i0 = int(np.argmax(y))
    half = y[i0] / 2.0
    lo = x[0]
    for i in range(i0, 0, -1):
        if y[i - 1] <= half:
            frac = (y[i] - half) / (y[i] - y[i - 1])
            lo = x[i] - frac * (x[i] - x[i - 1])
            break
    hi = x[-1]
    for i in range(i0, y.size - 1):
        if y[i + 1] <= half:
            frac = (y[i] - half) / (y[i] - y[i + 1])
            hi = x[i] + frac * (x[i + 1] - x[i])
            break
    return float(hi - lo)


def dip_depth(spectrum: Spectrum, omega0: float, halfwidth: float, shoulder: float = 3.0) -> float:
    """Depth of a spectral dip near omega0.

    Considers interior local minima within omega0 +/- halfwidth and measures
    how far each sits below the lower of the two shoulder maxima taken over
    ``shoulder * halfwidth`` wide windows on either side; returns the largest
    such drop, or 0 when the region carries no local minimum at all.
    """
    x = spectrum.omega
    y = spectrum.intensity
    sel = np.nonzero((x >= omega0 - halfwidth) & (x <= omega0 + halfwidth))[0]
    if sel.size == 0:
        raise ValidationError(["dip_depth: window outside the spectrum grid"])
    sel = sel[(sel > 0) & (sel < y.size - 1)]
    is_min = (y[sel] < y[sel - 1]) & (y[sel] <= y[sel + 1])
    span = shoulder * halfwidth
    depth = 0.0
    for i in sel[is_min]:
        left = (x >= x[i] - span) & (x <= x[i])
        right = (x >= x[i]) & (x <= x[i] + span)
        ref = min(float(np.max(y[left])), float(np.max(y[right])))
        depth = max(depth, ref - float(y[i]))
    return depth
