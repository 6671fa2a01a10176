"""Time propagation in the single-excitation subspace and rate extraction.

Propagation is by spectral decomposition: c(t) = V exp(-i*Lambda*t/hbar) V^T
c(0) evaluated through the stored electronic eigencomponents, with photon
amplitudes reconstructed on the fly. There is no time-step error; accuracy is
set entirely by the eigensolver. The ground-state amplitude is conserved by
the rotating-wave Hamiltonian and drops out of the equations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .eigensolve import PolaritonModes, eigensolve_structured
from .hamiltonian import CoupledSystem
from .model import HBAR_EV_FS, ValidationError


@dataclass(frozen=True)
class AmplitudeTrajectory:
    """Populations over time; photon population is the explicit mode sum.

    ``norm`` is el_total + ph_total computed from the reconstructed
    amplitudes, so it genuinely measures eigenbasis quality instead of being
    one by construction. Trajectories built with ``photon_population=False``
    leave the photon and norm columns as None.
    """

    times: np.ndarray                 # (T,) fs
    el_amplitudes: np.ndarray         # (T, M) complex
    el_populations: np.ndarray        # (T, M)
    ph_population_total: np.ndarray | None
    norm: np.ndarray | None
    labels: tuple[str, ...]

    def population(self, label: str) -> np.ndarray:
        return self.el_populations[:, self.labels.index(label)]


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential fit of one population curve."""

    hbar_gamma: float        # eV
    exponential: bool        # False when the window is visibly oscillatory
    decayed: bool            # population dropped by >= 1/e inside the window


@dataclass(frozen=True)
class RabiFit:
    """Dominant oscillation of one population curve."""

    hbar_omega: float        # eV, nan when overdamped
    overdamped: bool
    periods: float           # oscillation periods covered by the trajectory


def recurrence_time(spacing: float, hbar: float = HBAR_EV_FS) -> float:
    """Artificial revival time 2*pi*hbar/spacing of a uniform discretization, fs."""
    return 2.0 * np.pi * hbar / spacing


def _initial_vector(system: CoupledSystem, initial) -> tuple[np.ndarray, np.ndarray | None]:
    m = system.n_el
    if isinstance(initial, str):
        vec = np.zeros(m, dtype=np.complex128)
        try:
            vec[system.labels.index(initial)] = 1.0
        except ValueError:
            raise ValidationError([f"initial: unknown state label {initial!r}"]) from None
        return vec, None
    arr = np.asarray(initial, dtype=np.complex128)
    if arr.shape == (m,):
        c_el, c_ph = arr, None
    elif arr.shape == (m + system.n_ph,):
        c_el, c_ph = arr[:m], arr[m:]
    else:
        raise ValidationError(
            [f"initial: expected length {m} or {m + system.n_ph}, got {arr.size}"]
        )
    total = np.sum(np.abs(c_el) ** 2) + (0.0 if c_ph is None else np.sum(np.abs(c_ph) ** 2))
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(["initial: amplitude vector must be normalized"])
    return c_el, c_ph


def _eigen_overlaps(system, modes, c_el, c_ph):
    a = (modes.el_components @ c_el).astype(np.complex128)
    if c_ph is not None:
        live = modes.passthrough < 0
        a[live] += _kernels.project_photon_initial(
            c_ph, modes.eigenvalues[live], modes.el_components[live],
            system.coupling, system.ph_energies,
        )
        bare = ~live
        a[bare] += c_ph[modes.passthrough[bare]]
    return a


def propagate(
    system: CoupledSystem,
    initial,
    t_grid,
    modes: PolaritonModes | None = None,
    photon_population: bool = True,
    hbar: float = HBAR_EV_FS,
    use_numba: bool | None = None,
) -> AmplitudeTrajectory:
    """Evolve an initial state over ``t_grid`` (fs) and record populations.

    ``initial`` is an electronic state label, an M-length electronic
    amplitude vector, or a full (M+N)-length amplitude vector. The explicit
    photon-population reconstruction costs O(N * (M+N)) per time point; pass
    ``photon_population=False`` to skip it when only electronic populations
    are needed.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0 or t[0] < 0.0 or (t.size > 1 and np.any(np.diff(t) <= 0.0)):
        raise ValidationError(["t_grid: times must ascend from t >= 0"])
    c_el0, c_ph0 = _initial_vector(system, initial)
    if modes is None:
        modes = eigensolve_structured(system, use_numba=use_numba)
    a = _eigen_overlaps(system, modes, c_el0, c_ph0)

    m = system.n_el
    lam = modes.eigenvalues
    el_amp = np.empty((t.size, m), dtype=np.complex128)
    weighted = modes.el_components * a[:, None]          # (L, M)
    for start in range(0, t.size, 256):
        sl = slice(start, min(start + 256, t.size))
        phases = np.exp(-1j * np.outer(t[sl], lam) / hbar)
        el_amp[sl] = phases @ weighted
    el_pop = np.abs(el_amp) ** 2

    ph_tot = None
    norm = None
    if photon_population:
        live = (modes.passthrough < 0) & (a != 0.0)
        ph_tot = _kernels.photon_population(
            t, hbar, lam[live], modes.el_components[live], a[live],
            system.coupling, system.ph_energies,
        )
        bare = modes.passthrough >= 0
        if np.any(bare):
            ph_tot = ph_tot + float(np.sum(np.abs(a[bare]) ** 2))
        norm = np.sum(el_pop, axis=1) + ph_tot

    return AmplitudeTrajectory(
        times=t,
        el_amplitudes=el_amp,
        el_populations=el_pop,
        ph_population_total=ph_tot,
        norm=norm,
        labels=system.labels,
    )


def propagate_state(
    system: CoupledSystem,
    initial,
    t: float,
    modes: PolaritonModes | None = None,
    hbar: float = HBAR_EV_FS,
) -> np.ndarray:
    """Full (M+N) complex amplitude vector at a single time, for reversal checks."""
    c_el0, c_ph0 = _initial_vector(system, initial)
    if modes is None:
        modes = eigensolve_structured(system)
    a = _eigen_overlaps(system, modes, c_el0, c_ph0)
    phase = a * np.exp(-1j * modes.eigenvalues * t / hbar)
    c_el = modes.el_components.T @ phase
    live = modes.passthrough < 0
    c_ph = _kernels.photon_amplitudes(
        np.array([t]), hbar, modes.eigenvalues[live], modes.el_components[live],
        a[live], system.coupling, system.ph_energies,
    )[0]
    bare_states = np.nonzero(~live)[0]
    for l in bare_states:
        c_ph[modes.passthrough[l]] += phase[l]
    return np.concatenate([c_el, c_ph])


def fit_decay_rate(
    traj: AmplitudeTrajectory,
    state_index: int | str,
    window: tuple[float, float] | None = None,
) -> DecayFit:
    """hbar * (decay rate of one population) from a log-linear least squares fit.

    The fit runs over ``window`` (fs) or the whole trajectory. Populations
    that rise along the window beyond a small ripple are flagged
    non-exponential; windows that do not span an e-fold of decay are flagged
    via ``decayed=False``.
    """
    idx = traj.labels.index(state_index) if isinstance(state_index, str) else int(state_index)
    pop = traj.el_populations[:, idx]
    t = traj.times
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        if np.count_nonzero(sel) < 3:
            raise ValidationError(["fit window: fewer than three samples inside window"])
        t = t[sel]
        pop = pop[sel]
    floor = 1e-300
    logp = np.log(np.maximum(pop, floor))
    slope = np.polyfit(t, logp, 1)[0]
    rises = np.diff(pop)
    span = float(np.max(pop) - np.min(pop))
    monotone = span == 0.0 or float(np.max(rises, initial=0.0)) <= 1e-3 * span
    decayed = pop[0] > 0.0 and float(np.min(pop)) <= pop[0] / np.e
    return DecayFit(hbar_gamma=float(-slope * HBAR_EV_FS), exponential=monotone, decayed=decayed)


def _dft_peak_frequency(y: np.ndarray, dt: float, f_weight: bool) -> float | None:
    """Frequency (cycles/fs) of the dominant non-DC local spectral peak, or None."""
    padded = np.zeros(8 * y.size)
    padded[: y.size] = y - np.mean(y)
    mag = np.abs(np.fft.rfft(padded))
    freqs = np.arange(mag.size) / (padded.size * dt)
    score = mag * freqs if f_weight else mag
    interior = score[1:-1]
    cand = np.nonzero((interior > score[:-2]) & (interior >= score[2:]))[0] + 1
    cand = cand[cand >= 2]
    if cand.size == 0:
        return None
    best = int(cand[np.argmax(score[cand])])
    ym, y0, yp = np.log(score[best - 1 : best + 2] + 1e-300)
    denom = ym - 2.0 * y0 + yp
    shift = 0.5 * (ym - yp) / denom if denom != 0.0 else 0.0
    return (best + shift) / (padded.size * dt)


def extract_rabi_frequency(traj: AmplitudeTrajectory, state_index: int | str) -> RabiFit:
    """Dominant oscillation energy hbar*omega_R of one population, via the DFT.

    Decaying populations carry a broad zero-centered spectral lobe that can
    bury or bias the oscillation line, so the extraction runs in two passes: a
    frequency-weighted peak search locates the line coarsely, then the slow
    envelope is removed with a one-period moving average (an exact comb filter
    for the oscillation) and the peak is refined on the filtered signal. Flags
    overdamped when the window contains no repeated oscillation extrema, and
    rejects trajectories covering fewer than three periods.
    """
    idx = traj.labels.index(state_index) if isinstance(state_index, str) else int(state_index)
    pop = traj.el_populations[:, idx]
    t = traj.times
    if t.size < 16:
        raise ValidationError(["trajectory: too few samples for spectral analysis"])
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise ValidationError(["trajectory: rabi extraction needs a uniform time grid"])
    dt = float(dt[0])

    span = float(np.max(pop) - np.min(pop))
    interior = pop[1:-1]
    is_max = (interior > pop[:-2]) & (interior >= pop[2:])
    ripple = np.maximum(interior - pop[:-2], interior - pop[2:])
    n_maxima = int(np.count_nonzero(is_max & (ripple > 1e-6 * max(span, 1e-300))))
    if span <= 0.0 or n_maxima < 2:
        return RabiFit(hbar_omega=float("nan"), overdamped=True, periods=0.0)

    f0 = _dft_peak_frequency(pop, dt, f_weight=True)
    if f0 is None or f0 <= 0.0:
        return RabiFit(hbar_omega=float("nan"), overdamped=True, periods=0.0)
    window = int(round(1.0 / (f0 * dt)))
    freq = f0
    if 4 <= window <= pop.size // 3:
        kernel = np.full(window, 1.0 / window)
        envelope = np.convolve(pop, kernel, mode="valid")
        half = window // 2
        filtered = pop[half : half + envelope.size] - envelope
        refined = _dft_peak_frequency(filtered, dt, f_weight=False)
        if refined is not None and refined > 0.0:
            freq = refined
    hbar_omega = float(2.0 * np.pi * HBAR_EV_FS * freq)
    periods = float(freq * (t[-1] - t[0]))
    if periods < 3.0:
        raise ValidationError(["trajectory: covers fewer than three oscillation periods"])
    return RabiFit(hbar_omega=hbar_omega, overdamped=False, periods=periods)


def trajectory_to_csv(traj: AmplitudeTrajectory) -> str:
    """CSV export: t_fs,pop_e1,...,pop_eM,pop_photon_total,norm."""
    if traj.ph_population_total is None or traj.norm is None:
        raise ValidationError(["trajectory: photon population required for CSV export"])
    header = "t_fs," + ",".join(f"pop_{lb}" for lb in traj.labels) + ",pop_photon_total,norm"
    lines = [header]
    for r in range(traj.times.size):
        vals = [traj.times[r], *traj.el_populations[r], traj.ph_population_total[r], traj.norm[r]]
        lines.append(",".join(f"{v + 0.0:.8e}" for v in vals))
    return "\n".join(lines) + "\n"
