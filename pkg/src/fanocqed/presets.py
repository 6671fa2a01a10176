"""Built-in parameter sets covering the weak-to-strong coupling ladder.

Two molecular systems are bundled: a single bright x-polarized level
("benzene"-style two-level system) and a clustered four-level set
("toluene"-style) whose weakest member sits just below the bright line and
shows up as a Fano dip at small spectral broadening.

Preset families:
  fig1d-i..v   benzene spectra; strength ladder (i)-(iii), then loss ladder
               (iii)-(v) at fixed strength.
  fig2d-i..v   toluene spectra on the wide 4.85-8.45 eV grid; strength ladder
               then loss ladder. fig2d-iv-alt carries the alternate 0.10 eV
               loss reading.
  fig3-i..v    toluene on the truncated 6.35-6.95 eV grid, for weights and
               time-domain runs (same strength/loss ladder as fig2d).
  benzene-free / toluene-free   zero coupling, bare absorption lines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CavityModel, ElectronicLevels, HBAR_EV_FS, Level

BENZENE_LEVELS = ElectronicLevels(
    (Level("e1", 6.93, (0.96, 0.0, 0.0)),)
)

TOLUENE_LEVELS = ElectronicLevels(
    (
        Level("e0", 6.58, (0.01, 0.0, 0.0)),
        Level("e1", 6.64, (0.76, 0.0, 0.0)),
        Level("e2", 6.71, (0.11, 0.0, 0.0)),
        Level("e3", 6.78, (0.08, 0.0, 0.0)),
    )
)

# Window half-width chosen so the 1e-4 eV grid carries exactly 5000 modes,
# symmetric about the bright line.
_BENZENE_HALF = 0.24995
_BENZENE_WINDOW = (6.93 - _BENZENE_HALF, 6.93 + _BENZENE_HALF)
_TOLUENE_WINDOW_WIDE = (4.85, 8.45)
_TOLUENE_WINDOW_NARROW = (6.35, 6.95)


@dataclass(frozen=True)
class Preset:
    id: str
    description: str
    levels: ElectronicLevels
    cavity: CavityModel
    gamma: float
    kind: str            # "spectrum" | "weights" | "dynamics"
    solver: str          # default solver for this preset
    initial: str         # starting state for dynamics runs
    omega_points: int = 3000


def _benzene_cavity(lambda_c: float, kappa: float) -> CavityModel:
    return CavityModel(
        omega_c=6.93,
        lambda_c=(lambda_c, 0.0, 0.0),
        kappa=kappa,
        window=_BENZENE_WINDOW,
        spacing=1e-4,
    )


def _toluene_cavity(lambda_c: float, kappa: float, window, spacing: float) -> CavityModel:
    return CavityModel(
        omega_c=6.64,
        lambda_c=(lambda_c, 0.0, 0.0),
        kappa=kappa,
        window=window,
        spacing=spacing,
    )


_BENZENE_LADDER = {
    "i": (0.001, 0.001),
    "ii": (0.002, 0.001),
    "iii": (0.008, 0.001),
    "iv": (0.008, 0.004),
    "v": (0.008, 0.008),
}

_TOLUENE_LADDER = {
    "i": (0.01, 0.01),
    "ii": (0.10, 0.01),
    "iii": (0.43, 0.01),
    "iv": (0.43, 0.08),
    "v": (0.43, 0.32),
}


def _build_table() -> dict[str, Preset]:
    table: dict[str, Preset] = {}
    for tag, (lam, kap) in _BENZENE_LADDER.items():
        pid = f"fig1d-{tag}"
        table[pid] = Preset(
            id=pid,
            description=f"benzene spectrum, lambda_c={lam} eV^(1/2)/nm, kappa={kap} eV",
            levels=BENZENE_LEVELS,
            cavity=_benzene_cavity(lam, kap),
            gamma=0.001,
            kind="spectrum",
            solver="structured",
            initial="e1",
        )
    for tag, (lam, kap) in _TOLUENE_LADDER.items():
        pid = f"fig2d-{tag}"
        table[pid] = Preset(
            id=pid,
            description=f"toluene spectrum (wide grid), lambda_c={lam}, kappa={kap} eV",
            levels=TOLUENE_LEVELS,
            cavity=_toluene_cavity(lam, kap, _TOLUENE_WINDOW_WIDE, 1e-4),
            gamma=0.001,
            kind="spectrum",
            solver="resolvent",
            initial="e1",
        )
    table["fig2d-iv-alt"] = Preset(
        id="fig2d-iv-alt",
        description="toluene spectrum (wide grid), lambda_c=0.43, alternate kappa=0.10 eV",
        levels=TOLUENE_LEVELS,
        cavity=_toluene_cavity(0.43, 0.10, _TOLUENE_WINDOW_WIDE, 1e-4),
        gamma=0.001,
        kind="spectrum",
        solver="resolvent",
        initial="e1",
    )
    for tag, (lam, kap) in _TOLUENE_LADDER.items():
        pid = f"fig3-{tag}"
        table[pid] = Preset(
            id=pid,
            description=f"toluene dynamics/weights (truncated grid), lambda_c={lam}, kappa={kap} eV",
            levels=TOLUENE_LEVELS,
            cavity=_toluene_cavity(lam, kap, _TOLUENE_WINDOW_NARROW, 1e-3),
            gamma=0.001,
            kind="dynamics",
            solver="structured",
            initial="e1",
        )
    table["benzene-free"] = Preset(
        id="benzene-free",
        description="benzene without light-matter coupling",
        levels=BENZENE_LEVELS,
        cavity=_benzene_cavity(0.0, 0.001),
        gamma=0.001,
        kind="spectrum",
        solver="structured",
        initial="e1",
    )
    table["toluene-free"] = Preset(
        id="toluene-free",
        description="toluene without light-matter coupling",
        levels=TOLUENE_LEVELS,
        cavity=_toluene_cavity(0.0, 0.01, _TOLUENE_WINDOW_WIDE, 1e-4),
        gamma=0.001,
        kind="spectrum",
        solver="structured",
        initial="e1",
    )
    return table


PRESETS = _build_table()


def list_presets() -> list[Preset]:
    return [PRESETS[k] for k in sorted(PRESETS)]


def get_preset(preset_id: str) -> Preset:
    try:
        return PRESETS[preset_id]
    except KeyError:
        raise KeyError(f"unknown preset id {preset_id!r}") from None


def brightest_coupling(preset_levels: ElectronicLevels, cavity: CavityModel) -> float:
    """hbar*g of the strongest transition against the total cavity strength."""
    lam = cavity.lambda_vec()
    d_nm = preset_levels.dipoles() * 0.1
    proj = np.abs(d_nm @ lam)
    energies = preset_levels.energies()
    return float(np.max(np.sqrt(energies / 2.0) * proj))


def default_t_max(preset_levels: ElectronicLevels, cavity: CavityModel) -> float:
    """min(5 decay times, 0.4 * recurrence time) with a regime-aware rate estimate."""
    t_rec = 2.0 * np.pi * HBAR_EV_FS / cavity.spacing
    g = brightest_coupling(preset_levels, cavity)
    if g <= 0.0:
        return 0.4 * t_rec
    rate = min(4.0 * g * g / cavity.kappa, cavity.kappa / 2.0)
    return float(min(5.0 * HBAR_EV_FS / rate, 0.4 * t_rec))
