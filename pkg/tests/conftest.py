"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's vectorized kernels: the
naive Wigner transforms are plain Python loops over the defining sums, the
Bessel oracle is quadrature of the integral representation, and the walk
oracle pushes amplitude vectors around by hand.  They are slow and obviously
correct, which is the point.
"""

import math

import numpy as np
import pytest

from lattice_wigner import DensityOperator, KGrid, LatticeWindow, PureState


def naive_wigner_values(matrix, window, kgrid):
    """Triple-loop evaluation of the defining transform sum.

    matrix: (2W, 2W) composite-space operator, site-major spin-minor.
    Returns (2W-1, n_k, 2, 2) complex values.
    """
    w = window.width
    n_m = 2 * w - 1
    out = np.zeros((n_m, kgrid.n_k, 2, 2), dtype=complex)
    for i in range(n_m):
        m = 2 * window.n_min + i
        for j, k in enumerate(kgrid.points):
            for a in range(2):
                for b in range(2):
                    total = 0.0 + 0.0j
                    for n in range(window.n_min, window.n_max + 1):
                        np_ = m - n
                        if np_ < window.n_min or np_ > window.n_max:
                            continue
                        row = 2 * (n - window.n_min) + a
                        col = 2 * (np_ - window.n_min) + b
                        total += matrix[row, col] * np.exp(-1j * (2 * n - m) * k)
                    out[i, j, a, b] = total / (2 * np.pi)
    return out


def naive_scalar_wigner_values(matrix, window, kgrid):
    """Spinless version of the naive transform: matrix is (W, W)."""
    w = window.width
    n_m = 2 * w - 1
    out = np.zeros((n_m, kgrid.n_k), dtype=complex)
    for i in range(n_m):
        m = 2 * window.n_min + i
        for j, k in enumerate(kgrid.points):
            total = 0.0 + 0.0j
            for n in range(window.n_min, window.n_max + 1):
                np_ = m - n
                if np_ < window.n_min or np_ > window.n_max:
                    continue
                total += matrix[n - window.n_min, np_ - window.n_min] * np.exp(
                    -1j * (2 * n - m) * k
                )
            out[i, j] = total / (2 * np.pi)
    return out


def bessel_quadrature_oracle(n, z, samples=4096):
    """J_n(z) via (1/2pi) int_{-pi}^{pi} e^{-i n q} e^{i z sin q} dq."""
    qs = -np.pi + 2.0 * np.pi * np.arange(samples) / samples
    return float(np.mean(np.exp(-1j * n * qs) * np.exp(1j * z * np.sin(qs))).real)


def theta_partial_sum_oracle(z, q, terms=200):
    """Direct partial sum of the theta series with `terms` terms per side."""
    z = complex(z)
    total = 1.0 + 0.0j
    for n in range(1, terms + 1):
        total += q ** (n * n) * (np.exp(2j * z * n) + np.exp(-2j * z * n))
    return total


def random_pure(window, rng):
    amps = rng.normal(size=(window.width, 2)) + 1j * rng.normal(size=(window.width, 2))
    amps /= math.sqrt(float(np.sum(np.abs(amps) ** 2)))
    return PureState(window, amps)


def random_density(window, rng, rank=None):
    """Random positive unit-trace mixture of gaussian-random kets."""
    d = window.dim
    rank = d if rank is None else rank
    mat = np.zeros((d, d), dtype=complex)
    weights = rng.random(rank)
    weights /= weights.sum()
    for wgt in weights:
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v /= np.linalg.norm(v)
        mat += wgt * np.outer(v, v.conj())
    mat = 0.5 * (mat + mat.conj().T)
    mat /= np.trace(mat).real
    return DensityOperator(window, mat)


def random_su2(rng):
    """Haar-ish random SU(2) matrix from a normalized quaternion."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [[w + 1j * z, y + 1j * x], [-y + 1j * x, w - 1j * z]], dtype=complex
    )


def amplitude_walk_oracle(window, psi0, theta, steps):
    """Site distribution of the coined walk from explicit amplitude pushing.

    psi0: dict (site, spin) -> amplitude.  Returns (W,) probabilities.
    """
    c, s = math.cos(theta), math.sin(theta)
    coin = {(0, 0): c, (0, 1): -s, (1, 0): -s, (1, 1): -c}
    amp = dict(psi0)
    for _ in range(steps):
        coined = {}
        for (site, spin), val in amp.items():
            for new_spin in (0, 1):
                key = (site, new_spin)
                coined[key] = coined.get(key, 0.0) + coin[(new_spin, spin)] * val
        shifted = {}
        for (site, spin), val in coined.items():
            target = site - 1 if spin == 0 else site + 1
            if target < window.n_min or target > window.n_max:
                raise AssertionError("oracle walk left the window")
            key = (target, spin)
            shifted[key] = shifted.get(key, 0.0) + val
        amp = shifted
    probs = np.zeros(window.width)
    for (site, spin), val in amp.items():
        probs[site - window.n_min] += abs(val) ** 2
    return probs


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def small_window():
    return LatticeWindow(-5, 5)


@pytest.fixture
def small_grid():
    return KGrid(32)
