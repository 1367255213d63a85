"""Trace-norm negativity of Wigner matrices and scalar Wigner functions.

For a Hermitian 2x2 block the two eigenvalues are h +- r with
h = (w00 + w11)/2 and r = sqrt(((w00 - w11)/2)^2 + |w01|^2), so the trace
norm |h+r| + |h-r| is closed-form; no eigensolver runs in the hot loop.
The negativity is the integrated trace norm minus one -- zero exactly when
every block is positive semidefinite, invariant under spin rotations because
the trace norm is unitarily invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .wigner import ScalarWigner, WignerMatrix

HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class NegativityReport:
    eta: float
    per_m_contributions: tuple
    metadata: dict = field(default_factory=dict)


def block_trace_norms(w: WignerMatrix, herm_tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Trace norm of every 2x2 block, shaped (n_m, n_k)."""
    v = w.values
    herm = np.max(np.abs(v - v.conj().transpose(0, 1, 3, 2)))
    if herm > herm_tol:
        raise DomainError(f"blocks deviate from Hermiticity by {herm:.3e} > {herm_tol}")
    h = 0.5 * (v[:, :, 0, 0] + v[:, :, 1, 1]).real
    half_diff = 0.5 * (v[:, :, 0, 0] - v[:, :, 1, 1]).real
    r = np.sqrt(half_diff**2 + np.abs(v[:, :, 0, 1]) ** 2)
    return np.abs(h + r) + np.abs(h - r)


def matrix_negativity(w: WignerMatrix, herm_tol: float = HERMITICITY_TOL) -> NegativityReport:
    """eta = sum_m int dk ||W(m,k)||_1 - 1 for a state-derived Wigner matrix."""
    norms = block_trace_norms(w, herm_tol)
    per_m = w.kgrid.weight * norms.sum(axis=1)
    eta = float(per_m.sum() - 1.0)
    contributions = tuple((int(m), float(c)) for m, c in zip(w.m_values, per_m))
    meta = {"m_min": w.m_min, "m_max": w.m_max, "n_k": w.kgrid.n_k}
    return NegativityReport(eta, contributions, meta)


def scalar_negativity(w: ScalarWigner, imag_tol: float = HERMITICITY_TOL) -> float:
    """sum_m int dk (|W| - W) for a real scalar Wigner function."""
    imag = float(np.max(np.abs(w.values.imag)))
    if imag > imag_tol:
        raise DomainError(f"scalar Wigner function has |Im| = {imag:.3e} > {imag_tol}")
    real = w.values.real
    return float(w.kgrid.weight * np.sum(np.abs(real) - real))


def negativity_timeseries(
    trajectory: Sequence[WignerMatrix], times: Optional[Sequence[float]] = None
):
    """(t, eta) pairs over a trajectory of Wigner snapshots."""
    if times is None:
        times = list(range(len(trajectory)))
    if len(times) != len(trajectory):
        raise DomainError("times and trajectory lengths differ")
    return [(t, matrix_negativity(w).eta) for t, w in zip(times, trajectory)]
