"""Hot numeric kernels, in two interchangeable backends.

The numba backend JIT-compiles explicit loops; the numpy backend runs the
same contracts through vectorized/chunked array code. The default backend is
numba when importable, unless the environment variable
``FANOCQED_DISABLE_NUMBA=1`` selects the pure-numpy path. Dual-backend
entries accept ``use_numba`` to override per call (used by tests and
benchmarks); BLAS-bound routines run the same code either way.

Eigensolver strategy: the single-excitation Hamiltonian is a bordered
diagonal matrix. By Haynsworth inertia additivity, the number of its
eigenvalues below z equals the number of photon energies below z plus the
number of negative eigenvalues of the M x M matrix

    A(z) = diag(el) - z + sum_k outer(g_k) / (z - omega_k),

so each eigenvalue is located by bisection on that exact counting function
down to floating-point resolution. Electronic eigenvector components are the
null vectors of A at the converged roots; photon components enter only
through the scalar sum s2 = sum_k (G^T v)_k^2 / (root - omega_k)^2.
"""

from __future__ import annotations

import math
import os

import numpy as np

# The default TBB on this image is too old for numba's TBB layer; pick OpenMP
# up front so parallel kernels do not fall back with a warning.
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore
        def deco(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return deco

    prange = range  # type: ignore


def _env_disabled() -> bool:
    return os.environ.get("FANOCQED_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")


NUMBA_DEFAULT = HAVE_NUMBA and not _env_disabled()

_BISECT_MAX_ITER = 120


def resolve_backend(use_numba: bool | None) -> bool:
    if use_numba is None:
        return NUMBA_DEFAULT
    if use_numba and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return bool(use_numba)


def backend_name(use_numba: bool | None = None) -> str:
    return "numba" if resolve_backend(use_numba) else "numpy"


# ----------------------------------------------------------------------------
# numba backend
# ----------------------------------------------------------------------------


@njit(cache=True)
def _nudge_off_pole(z, ph, hi):
    # Exact pole hits make 1/(z - omega_k) ill-defined; step one ulp toward hi.
    idx = np.searchsorted(ph, z)
    if idx < ph.size and ph[idx] == z:
        return np.nextafter(z, hi)
    return z


@njit(cache=True)
def _count_m1_nb(z, el0, ph, g2):
    s = el0 - z
    for k in range(ph.size):
        s += g2[k] / (z - ph[k])
    c = np.searchsorted(ph, z)
    if s < 0.0:
        c += 1
    return c


@njit(cache=True)
def _build_a_nb(z, el, ph, G, A):
    m = el.size
    for i in range(m):
        for j in range(m):
            A[i, j] = 0.0
        A[i, i] = el[i] - z
    for k in range(ph.size):
        r = 1.0 / (z - ph[k])
        for i in range(m):
            gi = G[i, k] * r
            for j in range(i + 1):
                A[i, j] += gi * G[j, k]
    for i in range(m):
        for j in range(i):
            A[j, i] = A[i, j]


@njit(cache=True)
def _count_mm_nb(z, el, ph, G, A):
    _build_a_nb(z, el, ph, G, A)
    w = np.linalg.eigvalsh(A)
    c = np.searchsorted(ph, z)
    for i in range(w.size):
        if w[i] < 0.0:
            c += 1
    return c


@njit(cache=True, parallel=True)
def _roots_m1_nb(el0, ph, g2, lo0, hi0):
    n_roots = ph.size + 1
    roots = np.empty(n_roots)
    for j in prange(n_roots):
        lo = lo0
        hi = hi0
        for _ in range(_BISECT_MAX_ITER):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            mid = _nudge_off_pole(mid, ph, hi)
            if mid >= hi:
                break
            if _count_m1_nb(mid, el0, ph, g2) >= j + 1:
                hi = mid
            else:
                lo = mid
        roots[j] = 0.5 * (lo + hi)
    return roots


@njit(cache=True, parallel=True)
def _roots_mm_nb(el, ph, G, lo0, hi0):
    m = el.size
    n_roots = m + ph.size
    roots = np.empty(n_roots)
    for j in prange(n_roots):
        A = np.empty((m, m))
        lo = lo0
        hi = hi0
        for _ in range(_BISECT_MAX_ITER):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            mid = _nudge_off_pole(mid, ph, hi)
            if mid >= hi:
                break
            if _count_mm_nb(mid, el, ph, G, A) >= j + 1:
                hi = mid
            else:
                lo = mid
        roots[j] = 0.5 * (lo + hi)
    return roots


@njit(cache=True, parallel=True)
def _components_m1_nb(roots, ph, g2):
    n_roots = roots.size
    wel = np.empty(n_roots)
    for j in prange(n_roots):
        z = roots[j]
        s2 = 0.0
        for k in range(ph.size):
            d = z - ph[k]
            if d == 0.0:
                s2 = np.inf
                break
            s2 += g2[k] / (d * d)
        if np.isfinite(s2):
            wel[j] = 1.0 / (1.0 + s2)
        else:
            wel[j] = 0.0
    return wel


@njit(cache=True, parallel=True)
def _components_mm_nb(roots, el, ph, G):
    m = el.size
    n_roots = roots.size
    comp = np.empty((n_roots, m))
    wel = np.empty(n_roots)
    for j in prange(n_roots):
        A = np.empty((m, m))
        _build_a_nb(roots[j], el, ph, G, A)
        w, v = np.linalg.eigh(A)
        best = 0
        for i in range(1, m):
            if abs(w[i]) < abs(w[best]):
                best = i
        s2 = 0.0
        for k in range(ph.size):
            d = roots[j] - ph[k]
            u = 0.0
            for i in range(m):
                u += G[i, k] * v[i, best]
            if d == 0.0:
                if u != 0.0:
                    s2 = np.inf
                    break
            else:
                s2 += (u / d) ** 2
        if np.isfinite(s2):
            norm = 1.0 / math.sqrt(1.0 + s2)
            wel[j] = 1.0 / (1.0 + s2)
        else:
            norm = 0.0
            wel[j] = 0.0
        for i in range(m):
            comp[j, i] = v[i, best] * norm
    return comp, wel


@njit(cache=True, parallel=True)
def _lorentz_accumulate_nb(omega, centers, strengths, gamma):
    pref = gamma / (2.0 * math.pi)
    hg2 = (gamma / 2.0) ** 2
    out = np.empty(omega.size)
    for r in prange(omega.size):
        w = omega[r]
        acc = 0.0
        for l in range(centers.size):
            d = w - centers[l]
            acc += strengths[l] * pref / (d * d + hg2)
        out[r] = acc
    return out


# ----------------------------------------------------------------------------
# numpy backend
# ----------------------------------------------------------------------------

_ROOT_CHUNK = 512


def _counts_np(z, el, ph, G, g2):
    """Eigenvalue-counting function for a batch of probe points z."""
    below = np.searchsorted(ph, z, side="left")
    if el.size == 1:
        s = el[0] - z
        for start in range(0, ph.size, 16384):
            sl = slice(start, start + 16384)
            s = s + np.sum(g2[sl][None, :] / (z[:, None] - ph[sl][None, :]), axis=1)
        return below + (s < 0.0)
    m = el.size
    p_flat = (G[:, None, :] * G[None, :, :]).reshape(m * m, ph.size)
    rec = 1.0 / (z[:, None] - ph[None, :])
    a = (rec @ p_flat.T).reshape(z.size, m, m)
    idx = np.arange(m)
    a[:, idx, idx] += el[None, :] - z[:, None]
    w = np.linalg.eigvalsh(a)
    return below + np.sum(w < 0.0, axis=1)


def _roots_np(el, ph, G, g2, lo0, hi0):
    n_roots = el.size + ph.size
    roots = np.empty(n_roots)
    target = np.arange(n_roots) + 1
    for start in range(0, n_roots, _ROOT_CHUNK):
        sl = slice(start, min(start + _ROOT_CHUNK, n_roots))
        lo = np.full(target[sl].size, lo0)
        hi = np.full(target[sl].size, hi0)
        for _ in range(_BISECT_MAX_ITER):
            mid = 0.5 * (lo + hi)
            active = (mid > lo) & (mid < hi)
            if not np.any(active):
                break
            mid_a = mid[active]
            if ph.size:
                pos = np.searchsorted(ph, mid_a)
                hit = (pos < ph.size) & (ph[np.minimum(pos, ph.size - 1)] == mid_a)
                if np.any(hit):
                    mid_a[hit] = np.nextafter(mid_a[hit], hi[active][hit])
            counts = _counts_np(mid_a, el, ph, G, g2)
            go_left = counts >= target[sl][active]
            hi_a = hi[active]
            lo_a = lo[active]
            hi_a[go_left] = mid_a[go_left]
            lo_a[~go_left] = mid_a[~go_left]
            hi[active] = hi_a
            lo[active] = lo_a
        roots[sl] = 0.5 * (lo + hi)
    return roots


def _components_np(roots, el, ph, G, g2):
    m = el.size
    n_roots = roots.size
    if m == 1:
        wel = np.empty(n_roots)
        for start in range(0, n_roots, _ROOT_CHUNK):
            sl = slice(start, min(start + _ROOT_CHUNK, n_roots))
            d = roots[sl][:, None] - ph[None, :]
            with np.errstate(divide="ignore"):
                s2 = np.sum(g2[None, :] / (d * d), axis=1)
            wel[sl] = np.where(np.isfinite(s2), 1.0 / (1.0 + s2), 0.0)
        return np.sqrt(wel)[:, None], wel
    comp = np.empty((n_roots, m))
    wel = np.empty(n_roots)
    p_flat = (G[:, None, :] * G[None, :, :]).reshape(m * m, ph.size)
    idx = np.arange(m)
    for start in range(0, n_roots, _ROOT_CHUNK):
        sl = slice(start, min(start + _ROOT_CHUNK, n_roots))
        z = roots[sl]
        rec = 1.0 / (z[:, None] - ph[None, :])
        a = (rec @ p_flat.T).reshape(z.size, m, m)
        a[:, idx, idx] += el[None, :] - z[:, None]
        w, v = np.linalg.eigh(a)
        pick = np.argmin(np.abs(w), axis=1)
        vec = v[np.arange(z.size), :, pick]
        u = vec @ G
        d = z[:, None] - ph[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = (u / d) ** 2
            terms[(d == 0.0) & (u == 0.0)] = 0.0
            s2 = np.sum(terms, axis=1)
        good = np.isfinite(s2)
        norm = np.where(good, 1.0 / np.sqrt(1.0 + np.where(good, s2, 0.0)), 0.0)
        comp[sl] = vec * norm[:, None]
        wel[sl] = np.where(good, 1.0 / (1.0 + np.where(good, s2, 0.0)), 0.0)
    return comp, wel


def _lorentz_accumulate_np(omega, centers, strengths, gamma):
    pref = gamma / (2.0 * math.pi)
    hg2 = (gamma / 2.0) ** 2
    out = np.zeros(omega.size)
    for start in range(0, centers.size, 4096):
        sl = slice(start, start + 4096)
        d = omega[:, None] - centers[sl][None, :]
        out += np.sum(strengths[sl][None, :] / (d * d + hg2), axis=1)
    return pref * out


# ----------------------------------------------------------------------------
# public dispatchers
# ----------------------------------------------------------------------------


def structured_eigenpairs(el, ph, G, use_numba: bool | None = None):
    """All M+N eigenvalues, electronic components, and electronic weights.

    ``ph`` must be strictly increasing and every photon column of ``G`` must
    carry some coupling (decoupled modes are handled by the caller).
    Components are normalized against the full (electronic + photonic)
    eigenvector norm.
    """
    el = np.ascontiguousarray(el, dtype=float)
    ph = np.ascontiguousarray(ph, dtype=float)
    G = np.ascontiguousarray(G, dtype=float)
    g2 = np.einsum("ik,ik->k", G, G)
    span = max(np.max(np.abs(el)), np.max(np.abs(ph)) if ph.size else 0.0, 1.0)
    border = float(np.sum(np.abs(G)))
    lo0 = min(np.min(el), np.min(ph) if ph.size else np.min(el)) - border - 1e-9 * span
    hi0 = max(np.max(el), np.max(ph) if ph.size else np.max(el)) + border + 1e-9 * span
    if resolve_backend(use_numba):
        if el.size == 1:
            roots = _roots_m1_nb(el[0], ph, g2, lo0, hi0)
            wel = _components_m1_nb(roots, ph, g2)
            comp = np.sqrt(wel)[:, None]
        else:
            roots = _roots_mm_nb(el, ph, G, lo0, hi0)
            comp, wel = _components_mm_nb(roots, el, ph, G)
    else:
        roots = _roots_np(el, ph, G, g2, lo0, hi0)
        comp, wel = _components_np(roots, el, ph, G, g2)
    return roots, comp, wel


def refine_degenerate_clusters(roots, comp, wel, el, ph, G, tol=1e-11):
    """Replace nearly-parallel null vectors of clustered roots.

    Roots closer than ``tol`` share essentially the same A(z); assigning each
    cluster member a distinct orthonormal null vector restores row
    orthogonality of the electronic components.
    """
    m = el.size
    if m == 1 or roots.size < 2:
        return comp, wel
    gaps = np.diff(roots)
    if not np.any(gaps < tol):
        return comp, wel
    comp = comp.copy()
    wel = wel.copy()
    start = 0
    while start < roots.size:
        end = start
        while end + 1 < roots.size and roots[end + 1] - roots[end] < tol:
            end += 1
        size = end - start + 1
        if size > 1 and size <= m:
            z = float(np.mean(roots[start : end + 1]))
            a = np.diag(el - z).astype(float)
            with np.errstate(divide="ignore"):
                rec = 1.0 / (z - ph)
            a += (G * rec[None, :]) @ G.T
            if np.all(np.isfinite(a)):
                w, v = np.linalg.eigh(a)
                order = np.argsort(np.abs(w))[:size]
                for c, j in enumerate(range(start, end + 1)):
                    vec = v[:, order[c]]
                    u = vec @ G
                    d = roots[j] - ph
                    with np.errstate(divide="ignore", invalid="ignore"):
                        terms = (u / d) ** 2
                        terms[(d == 0.0) & (u == 0.0)] = 0.0
                        s2 = float(np.sum(terms))
                    if np.isfinite(s2):
                        comp[j] = vec / math.sqrt(1.0 + s2)
                        wel[j] = 1.0 / (1.0 + s2)
                    else:
                        comp[j] = 0.0
                        wel[j] = 0.0
        start = end + 1
    return comp, wel


def lorentz_accumulate(omega, centers, strengths, gamma, use_numba: bool | None = None):
    """Sum of unit-area Lorentzians of FWHM gamma, scaled by strengths."""
    omega = np.ascontiguousarray(omega, dtype=float)
    centers = np.ascontiguousarray(centers, dtype=float)
    strengths = np.ascontiguousarray(strengths, dtype=float)
    if resolve_backend(use_numba):
        return _lorentz_accumulate_nb(omega, centers, strengths, float(gamma))
    return _lorentz_accumulate_np(omega, centers, strengths, float(gamma))


def photon_population(t_fs, hbar, lam, E, a, G, ph):
    """Total photon population sum_k |c_k(t)|^2 reconstructed on the fly.

    The reconstruction c_k(t) = sum_l C_kl p_l(t) is a Cauchy-structured
    matrix product; chunked BLAS beats an explicit loop kernel here (the
    divisions hoist out of the time loop), so both backends share this path.
    Pass only eigenstates with nonzero initial amplitude; the (N, L) component
    matrix is never materialized whole.
    """
    t_over_hbar = np.ascontiguousarray(t_fs, dtype=float) / hbar
    lam = np.ascontiguousarray(lam, dtype=float)
    E = np.ascontiguousarray(E, dtype=float)
    a = np.ascontiguousarray(a, dtype=np.complex128)
    G = np.ascontiguousarray(G, dtype=float)
    ph = np.ascontiguousarray(ph, dtype=float)
    if lam.size == 0 or ph.size == 0:
        return np.zeros(t_over_hbar.size)
    c_ph = np.zeros((ph.size, t_over_hbar.size), dtype=np.complex128)
    for start in range(0, lam.size, 1024):
        sl = slice(start, min(start + 1024, lam.size))
        u = G.T @ E[sl].T                          # (N, chunk)
        b = u / (lam[sl][None, :] - ph[:, None])
        p = a[sl][:, None] * np.exp(-1j * np.outer(lam[sl], t_over_hbar))
        c_ph += b @ p
    return np.sum(np.abs(c_ph) ** 2, axis=0)


def photon_amplitudes(t_fs, hbar, lam, E, a, G, ph):
    """Photon amplitudes c_k(t) as a (T, N) complex array (small problems)."""
    t_over_hbar = np.asarray(t_fs, dtype=float) / hbar
    lam = np.asarray(lam, dtype=float)
    out = np.zeros((t_over_hbar.size, ph.size), dtype=np.complex128)
    if lam.size == 0:
        return out
    for start in range(0, lam.size, 1024):
        sl = slice(start, min(start + 1024, lam.size))
        u = G.T @ E[sl].T
        b = u / (lam[sl][None, :] - ph[:, None])
        p = a[sl][:, None] * np.exp(-1j * np.outer(lam[sl], t_over_hbar))
        out += (b @ p).T
    return out


def project_photon_initial(c_ph, lam, E, G, ph):
    """Overlaps a_l += sum_k C_kl c_ph_k for a photon-sector initial state."""
    out = np.zeros(lam.size, dtype=np.complex128)
    c_ph = np.asarray(c_ph, dtype=np.complex128)
    for start in range(0, lam.size, 1024):
        sl = slice(start, min(start + 1024, lam.size))
        u = G.T @ E[sl].T
        b = u / (lam[sl][None, :] - ph[:, None])
        out[sl] = b.T @ c_ph
    return out
