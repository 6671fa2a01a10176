"""Shared test utilities, including the independent RK4 propagation oracle."""

from __future__ import annotations

import numpy as np

from fanocqed.hamiltonian import CoupledSystem
from fanocqed.model import HBAR_EV_FS


def rk4_propagate(system: CoupledSystem, c0, t_grid, step_factor: float = 0.001):
    """Fixed-step 4th-order integration of i*hbar*dc/dt = H c.

    Deliberately independent of the spectral propagator: dense matrix,
    explicit stepping with step <= step_factor * hbar / max|H|.
    Returns amplitudes at the requested times, shape (T, M+N).
    """
    h = system.dense_matrix()
    scale = float(np.max(np.abs(h)))
    dt_max = step_factor * HBAR_EV_FS / scale
    c = np.asarray(c0, dtype=np.complex128).copy()
    out = np.empty((len(t_grid), c.size), dtype=np.complex128)
    t_now = 0.0

    def deriv(vec):
        return (-1j / HBAR_EV_FS) * (h @ vec)

    for i, t_target in enumerate(t_grid):
        remaining = t_target - t_now
        if remaining < 0:
            raise ValueError("t_grid must ascend")
        n_steps = max(1, int(np.ceil(remaining / dt_max))) if remaining > 0 else 0
        dt = remaining / n_steps if n_steps else 0.0
        for _ in range(n_steps):
            k1 = deriv(c)
            k2 = deriv(c + 0.5 * dt * k1)
            k3 = deriv(c + 0.5 * dt * k2)
            k4 = deriv(c + dt * k3)
            c = c + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t_now = t_target
        out[i] = c
    return out


def full_eigenvectors(system: CoupledSystem, modes):
    """Reconstruct full (M+N, L) eigenvectors from structured components."""
    m, n = system.n_el, system.n_ph
    v = np.zeros((m + n, modes.size))
    v[:m, :] = modes.el_components.T
    for l in range(modes.size):
        k0 = modes.passthrough[l]
        if k0 >= 0:
            v[m + k0, l] = 1.0
            continue
        u = system.coupling.T @ modes.el_components[l]
        v[m:, l] = u / (modes.eigenvalues[l] - system.ph_energies)
    return v
