"""Truncated lattice x spin Hilbert space: windows, pure states, densities.

The infinite lattice is represented by a finite window of sites with hard
walls.  Truncation error is made observable rather than hidden: dynamics
operations monitor the population of the outermost sites and refuse to
continue once it exceeds a tolerance (see the dynamics modules).

Composite indexing is site-major, spin-minor: basis vector (n, alpha) sits at
flat index 2*(n - n_min) + alpha, which keeps the 2x2 spin blocks contiguous.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StateError, WindowError

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
NORM_TOL = 1e-12
UNITARITY_TOL = 1e-12

ID2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
for _m in (ID2, PAULI_X, PAULI_Y, PAULI_Z):
    _m.setflags(write=False)

SPIN_MATRICES = {"identity": ID2, "sigma_x": PAULI_X, "sigma_y": PAULI_Y, "sigma_z": PAULI_Z}

SPIN_VECTORS = {
    "up": np.array([1.0, 0.0], dtype=complex),
    "down": np.array([0.0, 1.0], dtype=complex),
    "plus": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0),
    "minus": np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0),
}
for _v in SPIN_VECTORS.values():
    _v.setflags(write=False)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class LatticeWindow:
    """Integer site range [n_min, n_max] with lattice spacing a.

    The spacing only enters through potential evaluation V(n*a) and through
    couplings of the form lambda*a; kinematics are dimensionless.
    """

    n_min: int
    n_max: int
    a: float = 1.0

    def __post_init__(self):
        if self.n_min > self.n_max:
            raise WindowError(f"n_min={self.n_min} > n_max={self.n_max}")
        if not (self.a > 0.0) or not np.isfinite(self.a):
            raise WindowError(f"lattice spacing must be positive, got {self.a!r}")

    @property
    def width(self) -> int:
        return self.n_max - self.n_min + 1

    @property
    def dim(self) -> int:
        """Dimension of the composite (sites x spin) space."""
        return 2 * self.width

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def contains(self, n: int) -> bool:
        return self.n_min <= n <= self.n_max

    def index(self, n: int) -> int:
        if not self.contains(n):
            raise WindowError(f"site {n} outside window [{self.n_min}, {self.n_max}]")
        return n - self.n_min


@dataclass(frozen=True)
class PureState:
    """Normalized spinor wave function over a window.

    amplitudes[i, alpha] is the amplitude on site n_min + i with spin alpha.
    """

    window: LatticeWindow
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.shape != (self.window.width, 2):
            raise StateError(
                f"amplitudes must have shape ({self.window.width}, 2), got {amps.shape}"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise StateError("amplitudes contain non-finite entries")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > NORM_TOL:
            raise StateError(f"state norm^2 = {norm2!r} deviates from 1 beyond {NORM_TOL}")
        object.__setattr__(self, "amplitudes", amps)

    def to_vector(self) -> np.ndarray:
        """Flat composite vector, site-major spin-minor."""
        return self.amplitudes.reshape(-1).copy()

    def site_populations(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def boundary_population(self) -> float:
        pops = self.site_populations()
        return float(pops[0] + pops[-1]) if self.window.width > 1 else float(pops[0])


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, unit-trace operator on the composite (sites x spin) space.

    Positivity is an on-demand check (:meth:`min_eigenvalue`), not part of
    construction: the eigendecomposition costs O(W^3) and most call sites
    produce operators that are positive by construction.
    """

    window: LatticeWindow
    matrix: np.ndarray

    def __post_init__(self):
        mat = _frozen(self.matrix)
        d = self.window.dim
        if mat.shape != (d, d):
            raise StateError(f"matrix must have shape ({d}, {d}), got {mat.shape}")
        if not np.all(np.isfinite(mat.view(float))):
            raise StateError("matrix contains non-finite entries")
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > HERMITICITY_TOL:
            raise StateError(f"matrix deviates from Hermiticity by {herm:.3e}")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"trace {tr!r} deviates from 1 beyond {TRACE_TOL}")
        object.__setattr__(self, "matrix", mat)

    def blocks(self) -> np.ndarray:
        """View of the matrix as [site, spin, site', spin']."""
        w = self.window.width
        return self.matrix.reshape(w, 2, w, 2)

    def site_populations(self) -> np.ndarray:
        diag = np.real(np.diagonal(self.matrix))
        return diag.reshape(self.window.width, 2).sum(axis=1)

    def boundary_population(self) -> float:
        pops = self.site_populations()
        return float(pops[0] + pops[-1]) if self.window.width > 1 else float(pops[0])

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def assert_positive(self, tol: float = 1e-10) -> None:
        lo = self.min_eigenvalue()
        if lo < -tol:
            raise StateError(f"density operator has eigenvalue {lo:.3e} below -{tol}")


@dataclass(frozen=True)
class LatticeDensity:
    """Spin-traced density operator living on the lattice factor alone."""

    window: LatticeWindow
    matrix: np.ndarray

    def __post_init__(self):
        mat = _frozen(self.matrix)
        w = self.window.width
        if mat.shape != (w, w):
            raise StateError(f"matrix must have shape ({w}, {w}), got {mat.shape}")
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > HERMITICITY_TOL:
            raise StateError(f"matrix deviates from Hermiticity by {herm:.3e}")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"trace {tr!r} deviates from 1 beyond {TRACE_TOL}")
        object.__setattr__(self, "matrix", mat)


def density_from_pure(psi: PureState) -> DensityOperator:
    """Rank-1 projector |psi><psi|."""
    v = psi.amplitudes.reshape(-1)
    return DensityOperator(psi.window, np.outer(v, v.conj()))


def lattice_density_from_amplitudes(window: LatticeWindow, amplitudes) -> LatticeDensity:
    """|phi><phi| on the lattice factor from (unnormalized) site amplitudes."""
    v = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if v.shape != (window.width,):
        raise StateError(f"expected {window.width} site amplitudes, got {v.shape}")
    norm2 = float(np.sum(np.abs(v) ** 2))
    if norm2 <= 0.0:
        raise StateError("zero amplitude vector")
    return LatticeDensity(window, np.outer(v, v.conj()) / norm2)


def spin_trace(rho: DensityOperator) -> LatticeDensity:
    """Partial trace over the spin factor."""
    return LatticeDensity(rho.window, np.einsum("iaja->ij", rho.blocks()))


def apply_spin_rotation(rho: DensityOperator, u) -> DensityOperator:
    """Conjugate by I (x) u for a 2x2 unitary u acting on the spin factor."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise DomainError(f"spin rotation must be 2x2, got shape {u.shape}")
    defect = np.max(np.abs(u @ u.conj().T - ID2))
    if defect > UNITARITY_TOL:
        raise DomainError(f"matrix deviates from unitarity by {defect:.3e}")
    rotated = np.einsum("ac,icjd,bd->iajb", u, rho.blocks(), u.conj())
    return DensityOperator(rho.window, rotated.reshape(rho.window.dim, rho.window.dim))


# ---------------------------------------------------------------------------
# JSON serialization (golden-file format: flat [re, im] pair lists)
# ---------------------------------------------------------------------------

def _window_doc(window: LatticeWindow) -> dict:
    return {"n_min": window.n_min, "n_max": window.n_max, "a": window.a}


def _window_from_doc(doc: dict) -> LatticeWindow:
    return LatticeWindow(int(doc["n_min"]), int(doc["n_max"]), float(doc.get("a", 1.0)))


def _pairs(flat: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in flat]


def _from_pairs(pairs) -> np.ndarray:
    return np.array([complex(p[0], p[1]) for p in pairs], dtype=complex)


def pure_state_to_json(psi: PureState) -> dict:
    return {
        "type": "pure_state",
        "window": _window_doc(psi.window),
        "amplitudes": _pairs(psi.amplitudes.reshape(-1)),
    }


def pure_state_from_json(doc: dict) -> PureState:
    window = _window_from_doc(doc["window"])
    amps = _from_pairs(doc["amplitudes"]).reshape(window.width, 2)
    return PureState(window, amps)


def density_to_json(rho: DensityOperator) -> dict:
    return {
        "type": "density_operator",
        "window": _window_doc(rho.window),
        "matrix": _pairs(rho.matrix.reshape(-1)),
    }


def density_from_json(doc: dict) -> DensityOperator:
    window = _window_from_doc(doc["window"])
    mat = _from_pairs(doc["matrix"]).reshape(window.dim, window.dim)
    return DensityOperator(window, mat)
