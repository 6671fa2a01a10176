import numpy as np
import pytest

from fanocqed.discretize import build_photon_grid
from fanocqed.hamiltonian import CoupledSystem, assemble
from fanocqed.model import CavityModel, ElectronicLevels, Level


def make_system(el, ph, coupling, labels=None):
    el = np.asarray(el, dtype=float)
    ph = np.asarray(ph, dtype=float)
    coupling = np.asarray(coupling, dtype=float)
    if labels is None:
        labels = tuple(f"e{i + 1}" for i in range(el.size))
    return CoupledSystem(el_energies=el, ph_energies=ph, coupling=coupling, labels=labels)


def random_system(seed, m_max=4, n_max=1000, n_min=50):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, m_max + 1))
    n = int(rng.integers(n_min, n_max + 1))
    el = np.sort(rng.uniform(1.0, 3.0, m))
    ph = np.sort(rng.uniform(0.5, 3.5, n)) + np.arange(n) * 1e-9
    g = rng.normal(0.0, 0.02, (m, n))
    return make_system(el, ph, g)


@pytest.fixture
def benzene_small():
    """Benzene-like single level on a reduced window, cheap but faithful."""
    levels = ElectronicLevels((Level("e1", 6.93, (0.96, 0.0, 0.0)),))
    cavity = CavityModel(
        omega_c=6.93, lambda_c=(0.008, 0.0, 0.0), kappa=0.001,
        window=(6.83, 7.03), spacing=1e-4,
    )
    return levels, cavity, assemble(levels, build_photon_grid(cavity))
