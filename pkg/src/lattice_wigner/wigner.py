"""Forward and inverse Wigner transform for spin-1/2 states on a lattice.

The central object is the matrix-valued Wigner function

    W_ab(m, k) = (1/2pi) sum_n <n, a| rho |m - n, b> e^{-i (2n - m) k},

defined on phase-space points (m, k) with integer m and k in [-pi, pi).  For
a window of sites [n_min, n_max] the sum has support only for
m in [2 n_min, 2 n_max], and for fixed m the function is a trigonometric
polynomial in k of degree at most W-1 (W the window width).  A uniform k-grid
with n_k >= 2W+1 therefore represents W exactly and makes every k-integral
below exact; the tolerances in the test suite probe arithmetic, not
quadrature error.

Even m corresponds to a lattice site m/2; odd m are the interstitial grid
points, whose k-integral vanishes for any state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GridError, StateError
from .grids import TWO_PI, KGrid
from .states import (
    DensityOperator,
    LatticeDensity,
    LatticeWindow,
    PureState,
    UNITARITY_TOL,
    ID2,
)

INV_TWO_PI = 1.0 / TWO_PI


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class WignerMatrix:
    """2x2-Hermitian-matrix-valued field on the (m, k) grid.

    values[i, j] is the 2x2 spin block at m = m_min + i and k = kgrid.points[j].
    """

    m_min: int
    m_max: int
    kgrid: KGrid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if self.m_min > self.m_max:
            raise GridError(f"m_min={self.m_min} > m_max={self.m_max}")
        expected = (self.m_max - self.m_min + 1, self.kgrid.n_k, 2, 2)
        if vals.shape != expected:
            raise GridError(f"values must have shape {expected}, got {vals.shape}")
        if not np.all(np.isfinite(vals.view(float))):
            raise StateError("Wigner values contain non-finite entries")
        object.__setattr__(self, "values", vals)

    @property
    def n_m(self) -> int:
        return self.m_max - self.m_min + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.m_min, self.m_max + 1)

    def m_index(self, m: int) -> int:
        if not self.m_min <= m <= self.m_max:
            raise GridError(f"m={m} outside [{self.m_min}, {self.m_max}]")
        return m - self.m_min

    def with_values(self, values) -> "WignerMatrix":
        return WignerMatrix(self.m_min, self.m_max, self.kgrid, values)

    def same_grid(self, other: "WignerMatrix") -> bool:
        return (
            self.m_min == other.m_min
            and self.m_max == other.m_max
            and self.kgrid.n_k == other.kgrid.n_k
        )


@dataclass(frozen=True)
class ScalarWigner:
    """Spinless (or spin-traced) Wigner function on the same grid layout."""

    m_min: int
    m_max: int
    kgrid: KGrid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        expected = (self.m_max - self.m_min + 1, self.kgrid.n_k)
        if vals.shape != expected:
            raise GridError(f"values must have shape {expected}, got {vals.shape}")
        object.__setattr__(self, "values", vals)

    @property
    def n_m(self) -> int:
        return self.m_max - self.m_min + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.m_min, self.m_max + 1)


def _require_grid(window: LatticeWindow, kgrid: KGrid) -> None:
    need = 2 * window.width + 1
    if kgrid.n_k < need:
        raise GridError(
            f"n_k={kgrid.n_k} too coarse for window width {window.width}: "
            f"exactness requires n_k >= 2W+1 = {need}"
        )


def _transform_blocks(blocks: np.ndarray, window: LatticeWindow, kgrid: KGrid) -> np.ndarray:
    """Shared kernel: blocks[n, a, n', b] -> values[m, k, a, b].

    For each m the contributing pairs are (n, m-n) with both sites inside the
    window; their phases e^{-i(2n-m)k} span modes |2n-m| <= W-1.
    """
    n_min, n_max = window.n_min, window.n_max
    n_m = 2 * window.width - 1
    k = kgrid.points
    out = np.zeros((n_m, kgrid.n_k, 2, 2), dtype=complex)
    for i in range(n_m):
        m = 2 * n_min + i
        lo = max(n_min, m - n_max)
        hi = min(n_max, m - n_min)
        ns = np.arange(lo, hi + 1)
        phases = np.exp(-1j * np.outer(2 * ns - m, k))
        coeffs = blocks[ns - n_min, :, m - ns - n_min, :]
        out[i] = INV_TWO_PI * np.tensordot(phases, coeffs, axes=(0, 0))
    return out


def wigner_of_density(rho: DensityOperator, kgrid: KGrid) -> WignerMatrix:
    """Forward transform of a density operator."""
    _require_grid(rho.window, kgrid)
    vals = _transform_blocks(rho.blocks(), rho.window, kgrid)
    return WignerMatrix(2 * rho.window.n_min, 2 * rho.window.n_max, kgrid, vals)


def wigner_of_pure(psi: PureState, kgrid: KGrid) -> WignerMatrix:
    """Forward transform of a pure state from its spinor amplitudes.

    Agrees with wigner_of_density(density_from_pure(psi)) to rounding.
    """
    _require_grid(psi.window, kgrid)
    a = psi.amplitudes
    blocks = a[:, :, None, None] * a.conj()[None, None, :, :]  # [n, a, n', b]
    vals = _transform_blocks(blocks, psi.window, kgrid)
    return WignerMatrix(2 * psi.window.n_min, 2 * psi.window.n_max, kgrid, vals)


def wigner_of_operator(op, window: LatticeWindow, kgrid: KGrid) -> WignerMatrix:
    """Transform of an arbitrary operator on the composite space.

    Same kernel as the state transform, without state invariants: the result
    need not be normalized, have real diagonals, or be Hermitian as a field.
    """
    op = np.asarray(op, dtype=complex)
    d = window.dim
    if op.shape != (d, d):
        raise DomainError(f"operator must have shape ({d}, {d}), got {op.shape}")
    w = window.width
    vals = _transform_blocks(op.reshape(w, 2, w, 2), window, kgrid)
    return WignerMatrix(2 * window.n_min, 2 * window.n_max, kgrid, vals)


def scalar_wigner_of_lattice(rho_l: LatticeDensity, kgrid: KGrid) -> ScalarWigner:
    """Spinless transform of a lattice-only density operator."""
    _require_grid(rho_l.window, kgrid)
    w = rho_l.window.width
    blocks = np.zeros((w, 2, w, 2), dtype=complex)
    blocks[:, 0, :, 0] = rho_l.matrix
    vals = _transform_blocks(blocks, rho_l.window, kgrid)[:, :, 0, 0]
    return ScalarWigner(2 * rho_l.window.n_min, 2 * rho_l.window.n_max, kgrid, vals)


# ---------------------------------------------------------------------------
# Marginals, pairing, reconstruction
# ---------------------------------------------------------------------------

def marginal_position(w: WignerMatrix, odd_tol: float = 1e-10):
    """k-integral of W: spin-resolved site blocks.

    Returns (sites, blocks) where blocks[i] is the 2x2 spin matrix
    <n_i, a| rho |n_i, b> at site n_i = (m_min + 2 i)/2.  The integrals over
    odd m must vanish for any state-derived Wigner matrix; a violation means
    the input was not state-like and raises DomainError.
    """
    if w.m_min % 2 != 0:
        raise GridError("position marginal expects an even m_min")
    integrals = w.kgrid.weight * w.values.sum(axis=1)
    odd = np.max(np.abs(integrals[1::2])) if w.n_m > 1 else 0.0
    if odd > odd_tol:
        raise DomainError(f"odd-m k-integrals reach {odd:.3e}; input is not state-like")
    sites = w.m_values[::2] // 2
    return sites, integrals[::2]


def marginal_momentum(w: WignerMatrix) -> np.ndarray:
    """m-sum of W: spin-resolved quasi-momentum density on the k grid.

    Equals (1/a) <k/a, a| rho |k/a, b> with |q> the discrete Fourier vector
    over the window; the lattice spacing cancels.
    """
    return w.values.sum(axis=0)


def trace_product(wc: WignerMatrix, wd: WignerMatrix) -> complex:
    """Pairing 2pi sum_ab sum_m int dk W^C_ab W^D_ba = tr(C D)."""
    if not wc.same_grid(wd):
        raise GridError("trace_product requires matching (m, k) grids")
    s = np.einsum("mkab,mkba->", wc.values, wd.values)
    return complex(TWO_PI * wc.kgrid.weight * s)


def reconstruct_density(w: WignerMatrix, a: float = 1.0) -> DensityOperator:
    """Invert the transform back to a density operator.

    The double k-integral against the phase-point kernel collapses to
    <n, a| rho |n', b> = int dk W_ab(n + n', k) e^{i (n - n') k}, so the
    reconstruction costs O(W^2 n_k) and never materializes the kernel.
    Exact (to rounding) whenever the grid satisfies n_k >= 2W+1.
    """
    if w.m_min % 2 != 0 or w.m_max % 2 != 0:
        raise GridError("reconstruction expects an even-to-even m range")
    n_min, n_max = w.m_min // 2, w.m_max // 2
    window = LatticeWindow(n_min, n_max, a)
    _require_grid(window, w.kgrid)
    width = window.width
    k = w.kgrid.points
    blocks = np.zeros((width, 2, width, 2), dtype=complex)
    for i in range(w.n_m):
        m = w.m_min + i
        lo = max(n_min, m - n_max)
        hi = min(n_max, m - n_min)
        ns = np.arange(lo, hi + 1)
        quad = w.kgrid.weight * np.exp(1j * np.outer(2 * ns - m, k))
        res = np.tensordot(quad, w.values[i], axes=(1, 0))
        blocks[ns - n_min, :, m - ns - n_min, :] = res
    return DensityOperator(window, blocks.reshape(window.dim, window.dim))


def spin_trace_wigner(w: WignerMatrix) -> ScalarWigner:
    """Scalar Wigner function of the spin-traced state: sum_a W_aa."""
    return ScalarWigner(w.m_min, w.m_max, w.kgrid, np.einsum("mkaa->mk", w.values))


def apply_spin_rotation_wigner(w: WignerMatrix, u) -> WignerMatrix:
    """Rotate every 2x2 block as u W u+ (image of a spin-space rotation)."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise DomainError(f"spin rotation must be 2x2, got shape {u.shape}")
    defect = np.max(np.abs(u @ u.conj().T - ID2))
    if defect > UNITARITY_TOL:
        raise DomainError(f"matrix deviates from unitarity by {defect:.3e}")
    return w.with_values(np.einsum("ac,mkcd,bd->mkab", u, w.values, u.conj()))


# ---------------------------------------------------------------------------
# Invariant diagnostics (used by tests and the scenario runner)
# ---------------------------------------------------------------------------

def hermiticity_defect(w: WignerMatrix) -> float:
    """max |W_ab - conj(W_ba)| over the grid."""
    return float(np.max(np.abs(w.values - w.values.conj().transpose(0, 1, 3, 2))))


def normalization_total(w: WignerMatrix) -> complex:
    """sum_a sum_m int dk W_aa; equals 1 for a state."""
    return complex(w.kgrid.weight * np.einsum("mkaa->", w.values))


def diagonal_imag_max(w: WignerMatrix) -> float:
    return float(np.max(np.abs(np.einsum("mkaa->mka", w.values).imag)))


def phase_shift_defect(w: WignerMatrix) -> float:
    """Check W(m, k + pi) = (-1)^m W(m, k) by half-grid roll (even n_k only)."""
    n_k = w.kgrid.n_k
    if n_k % 2 != 0:
        raise GridError("phase relation check by grid roll needs an even n_k")
    shifted = np.roll(w.values, -(n_k // 2), axis=1)
    signs = np.where(w.m_values % 2 == 0, 1.0, -1.0)
    return float(np.max(np.abs(shifted - signs[:, None, None, None] * w.values)))
