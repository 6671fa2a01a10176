"""Eigensolvers for the bordered-diagonal single-excitation Hamiltonian.

Two routes with identical output contracts: a structured solver that runs
counting bisection on the photon-eliminated secular problem (scales to very
large mode counts without ever materializing the full matrix), and a dense
LAPACK reference solver for cross-checking at moderate sizes.

Photon modes whose coupling column is exactly zero pass through as bare
eigenpairs without root finding; the remaining coupled problem is solved and
the results are merged in ascending eigenvalue order. Weights are computed
from M electronic components plus one scalar per eigenvalue; the full
(M+N) x (M+N) eigenvector matrix is never stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .hamiltonian import CoupledSystem
from .model import SolverError, ValidationError

#: Largest full matrix the dense solver will materialize by default.
DEFAULT_DENSE_CAP = 4000


@dataclass(frozen=True)
class PolaritonModes:
    """Spectral data of the coupled system, ascending in energy.

    ``el_components[l, i]`` is the projection of polariton l onto bare
    electronic state i. ``passthrough[l]`` holds the photon-mode index for
    bare uncoupled modes and -1 otherwise.
    """

    eigenvalues: np.ndarray    # (M+N,) eV
    el_components: np.ndarray  # (M+N, M)
    el_weight: np.ndarray      # (M+N,)
    ph_weight: np.ndarray      # (M+N,)
    labels: tuple[str, ...]
    passthrough: np.ndarray    # (M+N,) int64
    n_photon: int
    solver: str = "structured"

    def __post_init__(self):
        for arr in (self.eigenvalues, self.el_components, self.el_weight,
                    self.ph_weight, self.passthrough):
            arr.setflags(write=False)

    @property
    def n_el(self) -> int:
        return self.el_components.shape[1]

    @property
    def size(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class WeightTable:
    """Per-state weights W_il = |C_il|^2 with the aggregate split per polariton."""

    labels: tuple[str, ...]
    eigenvalues: np.ndarray
    w: np.ndarray            # (M+N, M)
    w_el: np.ndarray
    w_ph: np.ndarray


def _fix_signs(comp: np.ndarray) -> np.ndarray:
    """Deterministic eigenvector gauge: largest electronic component >= 0."""
    if comp.size == 0:
        return comp
    idx = np.argmax(np.abs(comp), axis=1)
    picked = comp[np.arange(comp.shape[0]), idx]
    flip = picked < 0.0
    comp[flip] *= -1.0
    return comp


def _split_decoupled(system: CoupledSystem):
    col_zero = np.all(system.coupling == 0.0, axis=0)
    coupled = ~col_zero
    return np.nonzero(coupled)[0], np.nonzero(col_zero)[0]


def _merge(system, roots, comp, wel, bare_idx, solver_name):
    m = system.n_el
    n = system.n_ph
    total = m + n
    vals = np.concatenate([roots, system.ph_energies[bare_idx]])
    comps = np.vstack([comp, np.zeros((bare_idx.size, m))])
    wels = np.concatenate([wel, np.zeros(bare_idx.size)])
    passidx = np.concatenate(
        [np.full(roots.size, -1, dtype=np.int64), bare_idx.astype(np.int64)]
    )
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    comps = _fix_signs(comps[order])
    wels = wels[order]
    passidx = passidx[order]
    if vals.size != total:
        raise SolverError(f"eigensolve produced {vals.size} modes, expected {total}")
    return PolaritonModes(
        eigenvalues=vals,
        el_components=comps,
        el_weight=wels,
        ph_weight=1.0 - wels,
        labels=system.labels,
        passthrough=passidx,
        n_photon=n,
        solver=solver_name,
    )


def _check_photon_grid(ph: np.ndarray) -> None:
    if ph.size > 1 and np.any(np.diff(ph) <= 0.0):
        raise ValidationError(["system.ph_energies: photon energies must be distinct ascending"])


def eigensolve_structured(system: CoupledSystem, use_numba: bool | None = None) -> PolaritonModes:
    """Counting-bisection eigensolver on the photon-eliminated secular problem.

    Each eigenvalue is localized independently by bisecting the exact
    inertia-counting function (photon energies below z plus negative
    eigenvalues of the M x M self-energy-dressed block) down to
    floating-point resolution, so clustered roots are resolved by index
    rather than by sign changes of a determinant. Near-degenerate clusters
    get orthonormal null vectors from a single local diagonalization.
    """
    _check_photon_grid(system.ph_energies)
    if not np.all(np.isfinite(system.coupling)):
        raise ValidationError(["system.coupling: coupling must be finite"])
    coupled_idx, bare_idx = _split_decoupled(system)
    ph = system.ph_energies[coupled_idx]
    g = system.coupling[:, coupled_idx]
    roots, comp, wel = _kernels.structured_eigenpairs(
        system.el_energies, ph, g, use_numba=use_numba
    )
    comp, wel = _kernels.refine_degenerate_clusters(
        roots, comp, wel, system.el_energies, ph, g
    )
    return _merge(system, roots, comp, wel, bare_idx, "structured")


def eigensolve_dense(system: CoupledSystem, dense_cap: int = DEFAULT_DENSE_CAP) -> PolaritonModes:
    """Reference solver: full symmetric diagonalization of the materialized matrix."""
    if system.size > dense_cap:
        raise SolverError(
            f"dense solver size cap exceeded: {system.size} > {dense_cap}"
        )
    _check_photon_grid(system.ph_energies)
    coupled_idx, bare_idx = _split_decoupled(system)
    m = system.n_el
    ph = system.ph_energies[coupled_idx]
    g = system.coupling[:, coupled_idx]
    size = m + ph.size
    h = np.zeros((size, size))
    h[:m, :m] = np.diag(system.el_energies)
    h[m:, m:] = np.diag(ph)
    h[:m, m:] = g
    h[m:, :m] = g.T
    vals, vecs = np.linalg.eigh(h)
    comp = vecs[:m, :].T.copy()
    wel = np.einsum("li,li->l", comp, comp)
    return _merge(system, vals, comp, wel, bare_idx, "dense")


def weights(modes: PolaritonModes) -> WeightTable:
    """Weight table W_il = |C_il|^2 plus electronic/photonic totals per state."""
    w = modes.el_components**2
    return WeightTable(
        labels=modes.labels,
        eigenvalues=modes.eigenvalues,
        w=w,
        w_el=modes.el_weight,
        w_ph=modes.ph_weight,
    )


def eigen_table_csv(modes: PolaritonModes) -> str:
    """CSV export: omega_l_eV,w_el,w_ph,C_1,...,C_M."""
    m = modes.n_el
    header = "omega_l_eV,w_el,w_ph," + ",".join(f"C_{i + 1}" for i in range(m))
    lines = [header]
    for l in range(modes.size):
        row = [modes.eigenvalues[l], modes.el_weight[l], modes.ph_weight[l]]
        row.extend(modes.el_components[l])
        lines.append(",".join(f"{v + 0.0:.8e}" for v in row))
    return "\n".join(lines) + "\n"
