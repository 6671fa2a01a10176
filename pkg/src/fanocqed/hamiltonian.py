"""Coupling rates and the single-excitation coupled system.

The rotating-wave, single-excitation Hamiltonian is a bordered diagonal
matrix: M electronic energies and N photon energies on the diagonal, coupled
only through the dense M x N border of rates hbar*g_{i,k}. The photon block
can be eliminated exactly, giving the frequency-dependent electronic
self-energy used by the structured eigensolver and the resolvent spectrum.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .discretize import PhotonGrid
from .model import ElectronicLevels, SolverError, ValidationError

#: Dipole input unit is e*Angstrom; the coupling formula wants e*nm.
ANGSTROM_TO_NM = 0.1


@dataclass(frozen=True)
class CoupledSystem:
    """Bordered-diagonal system: energies plus the electronic-photon coupling block."""

    el_energies: np.ndarray   # (M,) eV
    ph_energies: np.ndarray   # (N,) eV
    coupling: np.ndarray      # (M, N) eV, hbar * g_{i,k}
    labels: tuple[str, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.el_energies, self.ph_energies, self.coupling):
            arr.setflags(write=False)

    @property
    def n_el(self) -> int:
        return self.el_energies.size

    @property
    def n_ph(self) -> int:
        return self.ph_energies.size

    @property
    def size(self) -> int:
        return self.n_el + self.n_ph

    def dense_matrix(self) -> np.ndarray:
        """Materialize the full (M+N) x (M+N) real symmetric Hamiltonian."""
        m, n = self.n_el, self.n_ph
        h = np.zeros((m + n, m + n))
        h[:m, :m] = np.diag(self.el_energies)
        h[m:, m:] = np.diag(self.ph_energies)
        h[:m, m:] = self.coupling
        h[m:, :m] = self.coupling.T
        return h


def coupling_rate(omega_k: float, lambda_k, dipole) -> float:
    """hbar*g for one mode and one transition, in eV.

    Numerically hbar*g = -sqrt(omega_k/2) * (lambda_k . d) with omega_k in eV,
    lambda_k in eV^(1/2)/nm and the dipole supplied in e*Angstrom (converted
    to e*nm here). The overall sign is unobservable; magnitudes set the
    coupling regime through g/kappa.
    """
    if not omega_k > 0.0:
        raise ValidationError(["coupling_rate.omega_k: mode frequency must be positive"])
    lam = np.asarray(lambda_k, dtype=float)
    d = np.asarray(dipole, dtype=float) * ANGSTROM_TO_NM
    return float(-np.sqrt(omega_k / 2.0) * np.dot(lam, d))


def assemble(levels: ElectronicLevels, grid: PhotonGrid) -> CoupledSystem:
    """Couple every electronic level to every grid mode (Jaynes-Cummings border)."""
    if levels.n == 0:
        raise ValidationError(["levels: cannot assemble a system with zero levels"])
    if grid.n == 0:
        raise ValidationError(["grid: cannot assemble a system with zero photon modes"])
    d_nm = levels.dipoles() * ANGSTROM_TO_NM            # (M, 3)
    proj = d_nm @ grid.lam.T                            # (M, N)
    g = -np.sqrt(grid.omega / 2.0)[None, :] * proj
    if not np.all(np.isfinite(g)):
        raise ValidationError(["coupling: non-finite coupling entries"])
    return CoupledSystem(
        el_energies=levels.energies(),
        ph_energies=grid.omega.copy(),
        coupling=g,
        labels=levels.labels,
        meta={"grid_provenance": grid.provenance},
    )


def self_energy(system: CoupledSystem, z: complex) -> np.ndarray:
    """Photon-eliminated electronic self-energy Sigma_ij(z) = sum_k g_ik g_jk / (z - w_k).

    Exact Schur complement of the photon block: eigenvalues of the full system
    are the roots of det(diag(el) + Sigma(z) - z) away from grid poles.
    Raises SolverError when a real z hits a grid frequency exactly.
    """
    z = complex(z)
    diff = z - system.ph_energies
    if z.imag == 0.0 and np.any(diff.real == 0.0):
        k = int(np.argmin(np.abs(diff.real)))
        raise SolverError(
            f"self-energy pole hit: z={z.real!r} equals photon mode {k} exactly"
        )
    weighted = system.coupling / diff[None, :]
    return weighted @ system.coupling.T.astype(complex)


_DUMP_MAGIC = b"FCQS0001"


def dump_system(system: CoupledSystem, path) -> None:
    """Binary dump: magic, little-endian int64 M and N, then float64 arrays.

    Layout after the 8-byte magic: M (int64 LE), N (int64 LE),
    el_energies (M float64 LE), ph_energies (N float64 LE), coupling
    (M*N float64 LE, row-major).
    """
    with open(path, "wb") as fh:
        fh.write(_DUMP_MAGIC)
        fh.write(struct.pack("<qq", system.n_el, system.n_ph))
        fh.write(system.el_energies.astype("<f8").tobytes())
        fh.write(system.ph_energies.astype("<f8").tobytes())
        fh.write(np.ascontiguousarray(system.coupling).astype("<f8").tobytes())


def load_system(path) -> CoupledSystem:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _DUMP_MAGIC:
            raise ValidationError(["system dump: bad magic bytes"])
        m, n = struct.unpack("<qq", fh.read(16))
        el = np.frombuffer(fh.read(8 * m), dtype="<f8").astype(float)
        ph = np.frombuffer(fh.read(8 * n), dtype="<f8").astype(float)
        g = np.frombuffer(fh.read(8 * m * n), dtype="<f8").astype(float).reshape(m, n)
    labels = tuple(f"e{i + 1}" for i in range(m))
    return CoupledSystem(el_energies=el, ph_energies=ph, coupling=g, labels=labels)
