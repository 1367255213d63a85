"""Continuous-time dynamics: tight-binding evolution, closed-form Bessel
propagators, and Lindblad decoherence.

Two independent routes run through this module and are required to agree:

* the density-operator route: fixed-step RK4 on the von Neumann or Lindblad
  equation over the truncated window, followed by the Wigner transform;
* the phase-space route: the evolution equation for the Wigner field
  (hopping term plus a finite derivative series in k for polynomial
  potentials) and, for a linear potential, its exact solution as a band
  matrix of Bessel functions acting in m with a rigid shift in k.

The density route is the oracle: it knows nothing about phase space.  The
phase-space route is where the structure lives.  Their agreement at stated
tolerances is the module's master property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BoundaryLeakError,
    DomainError,
    StepSizeError,
    WindowError,
)
from .grids import KGrid, k_derivative, k_shift
from .special import bessel_jn_band, bessel_tail_order
from .states import DensityOperator, LatticeWindow
from .wigner import WignerMatrix

#: Highest supported polynomial potential degree.
MAX_POTENTIAL_DEGREE = 6

#: Default boundary-population tolerance for window-truncation monitoring.
DEFAULT_EPS_BOUNDARY = 1e-8

#: RK4 refuses to step once dt * (spectral norm estimate) exceeds this.
_STABILITY_CAP = 0.5

#: Default dt satisfies dt * (spectral norm estimate) <= this.
_DEFAULT_STEP_FRACTION = 0.05

#: Magnitude below which a Wigner m-row counts as unoccupied.
_SUPPORT_TOL = 1e-13


@dataclass(frozen=True)
class Potential:
    """Site potential V(x) = sum_p coeffs[p] x^p evaluated at x = n*a.

    kind is "linear" for V = slope*x (the case with a closed-form propagator)
    or "polynomial" for anything else up to degree MAX_POTENTIAL_DEGREE.
    """

    coeffs: tuple
    kind: str = "polynomial"

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) == 0:
            raise DomainError("potential needs at least one coefficient")
        if len(coeffs) - 1 > MAX_POTENTIAL_DEGREE:
            raise DomainError(
                f"potential degree {len(coeffs) - 1} exceeds {MAX_POTENTIAL_DEGREE}"
            )
        if self.kind not in ("linear", "polynomial"):
            raise DomainError(f"unknown potential kind {self.kind!r}")
        if self.kind == "linear":
            if len(coeffs) != 2 or coeffs[1] == 0.0:
                raise DomainError("linear potential requires a nonzero slope")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def linear(cls, slope: float) -> "Potential":
        return cls((0.0, float(slope)), kind="linear")

    @classmethod
    def polynomial(cls, coeffs) -> "Potential":
        return cls(tuple(coeffs), kind="polynomial")

    @property
    def slope(self) -> float:
        if self.kind != "linear":
            raise DomainError("slope is only defined for linear potentials")
        return self.coeffs[1]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def derivative_coeffs(self, order: int) -> tuple:
        coeffs = self.coeffs
        for _ in range(order):
            coeffs = tuple(p * coeffs[p] for p in range(1, len(coeffs)))
            if not coeffs:
                return (0.0,)
        return coeffs

    def derivative_values(self, order: int, x: np.ndarray) -> np.ndarray:
        return np.polynomial.polynomial.polyval(x, self.derivative_coeffs(order))

    def values(self, x: np.ndarray) -> np.ndarray:
        return self.derivative_values(0, x)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Nearest-neighbor hopping J plus an optional site potential.

    With spin_coupled=False the potential multiplies the identity in spin
    space; with spin_coupled=True it enters with opposite signs on the two
    spin components (sigma_z coupling), which is what splits the Wigner
    matrix entries into distinct evolution laws.
    """

    j_hop: float
    potential: Optional[Potential] = None
    spin_coupled: bool = False

    def site_potential(self, window: LatticeWindow) -> np.ndarray:
        if self.potential is None:
            return np.zeros(window.width)
        return np.asarray(self.potential.values(window.sites * window.a), dtype=float)

    def lambda_a(self, window: LatticeWindow) -> float:
        """Coupling lambda*a of a linear potential (slope times spacing)."""
        if self.potential is None or self.potential.kind != "linear":
            raise DomainError("lambda_a is only defined for linear potentials")
        return self.potential.slope * window.a

    def norm_estimate(self, window: LatticeWindow) -> float:
        v = self.site_potential(window)
        vmax = float(np.max(np.abs(v))) if v.size else 0.0
        return 2.0 * abs(self.j_hop) + vmax

    def dense_matrix(self, window: LatticeWindow) -> np.ndarray:
        """Dense composite-space Hamiltonian (tests, spectra); dynamics use
        the structured apply instead."""
        w = window.width
        lat = np.zeros((w, w), dtype=complex)
        idx = np.arange(w - 1)
        lat[idx + 1, idx] = self.j_hop
        lat[idx, idx + 1] = self.j_hop
        spin = np.diag([1.0, -1.0]) if self.spin_coupled else np.eye(2)
        h = np.kron(lat, np.eye(2)) + np.kron(np.diag(self.site_potential(window)), spin)
        return h.astype(complex)


@dataclass(frozen=True)
class NoiseSpec:
    """Spin-space Lindblad content: pairs (A_k, gamma_k) with gamma_k >= 0."""

    lindblad_ops: tuple

    def __post_init__(self):
        ops = []
        for entry in self.lindblad_ops:
            op, gamma = entry
            op = np.asarray(op, dtype=complex)
            if op.shape != (2, 2):
                raise DomainError("Lindblad operators must act on spin (2x2)")
            gamma = float(gamma)
            if gamma < 0.0:
                raise DomainError(f"coupling must be >= 0, got {gamma}")
            frozen = op.copy()
            frozen.setflags(write=False)
            ops.append((frozen, gamma))
        object.__setattr__(self, "lindblad_ops", tuple(ops))

    @property
    def gamma_total(self) -> float:
        return sum(g for _, g in self.lindblad_ops)


@dataclass(frozen=True)
class EvolutionResult:
    """Snapshot trajectory with the worst boundary population seen."""

    times: tuple
    snapshots: tuple
    boundary_leak: float
    method: str


# ---------------------------------------------------------------------------
# Density-operator route (the oracle)
# ---------------------------------------------------------------------------

def _make_rhs(h: HamiltonianSpec, noise: Optional[NoiseSpec], window: LatticeWindow):
    """RHS of the master equation as a closure over structured applies.

    H @ rho is a two-row block shift (hopping) plus a diagonal scale
    (potential), O(W^2) instead of a dense matmul; rho @ H follows from
    Hermiticity of the stage matrices.
    """
    w = window.width
    j = h.j_hop
    v = h.site_potential(window)
    if h.spin_coupled:
        vdiag = np.stack([v, -v], axis=1).reshape(-1)
    else:
        vdiag = np.repeat(v, 2)
    vcol = vdiag[:, None]

    channels = []
    if noise is not None:
        for op, gamma in noise.lindblad_ops:
            if gamma > 0.0:
                channels.append((op, op.conj().T @ op, gamma))

    def rhs(rho: np.ndarray) -> np.ndarray:
        m = vcol * rho
        if j != 0.0:
            m[2:, :] += j * rho[:-2, :]
            m[:-2, :] += j * rho[2:, :]
        out = -1j * (m - m.conj().T)
        if channels:
            blocks = rho.reshape(w, 2, w, 2)
            for op, gram, gamma in channels:
                jump = np.einsum("ab,ibjc,dc->iajd", op, blocks, op.conj())
                anti = np.einsum("ab,ibjc->iajc", gram, blocks)
                anti = anti + np.einsum("iajc,cb->iajb", blocks, gram)
                out += gamma * (jump - 0.5 * anti).reshape(rho.shape)
        return out

    return rhs


def _resolve_times(t_final: float, snapshot_times: Optional[Sequence[float]]):
    if snapshot_times is None:
        times = [float(t_final)]
    else:
        times = [float(t) for t in snapshot_times]
    if any(t < 0.0 for t in times):
        raise DomainError("snapshot times must be >= 0")
    if any(b < a for a, b in zip(times, times[1:])):
        raise DomainError("snapshot times must be ascending")
    return times


def lindblad_rk4(
    rho0: DensityOperator,
    h: HamiltonianSpec,
    noise: Optional[NoiseSpec],
    t_final: float,
    dt: Optional[float] = None,
    snapshot_times: Optional[Sequence[float]] = None,
    eps_boundary: float = DEFAULT_EPS_BOUNDARY,
) -> EvolutionResult:
    """Fixed-step RK4 integration of the Lindblad equation.

    Hermiticity is restored by symmetrization after every step; the trace is
    conserved by the equation itself and is not renormalized.  Each step the
    population of the outermost window sites is checked against eps_boundary:
    truncation error must stay observable, so the integrator fails loudly
    instead of letting the hard wall reflect.
    """
    window = rho0.window
    norm_est = h.norm_estimate(window)
    if noise is not None:
        norm_est += 2.0 * noise.gamma_total
    if dt is None:
        dt = _DEFAULT_STEP_FRACTION / norm_est if norm_est > 0.0 else float(t_final) or 1.0
    if dt <= 0.0:
        raise StepSizeError(f"dt must be positive, got {dt}")
    if norm_est > 0.0 and dt * norm_est > _STABILITY_CAP:
        raise StepSizeError(
            f"dt={dt} times norm estimate {norm_est:.3g} exceeds "
            f"stability cap {_STABILITY_CAP}"
        )
    times = _resolve_times(t_final, snapshot_times)

    rhs = _make_rhs(h, noise, window)
    mat = rho0.matrix.astype(complex).copy()
    leak = rho0.boundary_population()
    if leak > eps_boundary:
        raise BoundaryLeakError(
            f"initial boundary population {leak:.3e} exceeds {eps_boundary}"
        )
    snapshots = []
    t_prev = 0.0
    for t in times:
        span = t - t_prev
        if span > 0.0:
            n_steps = max(1, math.ceil(span / dt))
            hstep = span / n_steps
            for _ in range(n_steps):
                k1 = rhs(mat)
                k2 = rhs(mat + 0.5 * hstep * k1)
                k3 = rhs(mat + 0.5 * hstep * k2)
                k4 = rhs(mat + hstep * k3)
                mat = mat + (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                mat = 0.5 * (mat + mat.conj().T)
                pops = np.real(np.diagonal(mat)).reshape(window.width, 2).sum(axis=1)
                edge = float(pops[0] + pops[-1])
                if edge > eps_boundary:
                    raise BoundaryLeakError(
                        f"boundary population {edge:.3e} exceeded {eps_boundary} "
                        f"during step towards t={t}"
                    )
                leak = max(leak, edge)
        snapshots.append(DensityOperator(window, mat.copy()))
        t_prev = t
    return EvolutionResult(tuple(times), tuple(snapshots), leak, "rk4")


def von_neumann_rk4(
    rho0: DensityOperator,
    h: HamiltonianSpec,
    t_final: float,
    dt: Optional[float] = None,
    snapshot_times: Optional[Sequence[float]] = None,
    eps_boundary: float = DEFAULT_EPS_BOUNDARY,
) -> EvolutionResult:
    """Closed-system special case of :func:`lindblad_rk4`."""
    return lindblad_rk4(rho0, h, None, t_final, dt, snapshot_times, eps_boundary)


# ---------------------------------------------------------------------------
# Phase-space route
# ---------------------------------------------------------------------------

def wigner_evolution_rhs(w: WignerMatrix, h: HamiltonianSpec, a: float = 1.0) -> np.ndarray:
    """Time derivative of the Wigner field under the tight-binding generator.

    The hopping contributes 2 J sin k [W(m+1,k) - W(m-1,k)].  A polynomial
    potential contributes a *finite* derivative series in k, with the
    potential's derivatives evaluated at the midpoint x = m a / 2:

    * scalar potential: odd k-derivatives only, same for all spin entries;
    * sigma_z-coupled potential: the diagonal entries keep the odd series
      with a sign (-1)^alpha, while the off-diagonal entries pick up the even
      series (including a purely multiplicative s=0 term) times -2i(-1)^alpha.

    k-derivatives are spectral and exact on the band-limited grid.  Returns a
    plain array shaped like w.values.
    """
    vals = w.values
    grid = w.kgrid
    out = np.zeros_like(vals)

    if h.j_hop != 0.0:
        sin_k = np.sin(grid.points)[None, :, None, None]
        shift = np.zeros_like(vals)
        shift[:-1] += vals[1:]  # W(m+1, k)
        shift[1:] -= vals[:-1]  # -W(m-1, k)
        out += 2.0 * h.j_hop * sin_k * shift

    pot = h.potential
    if pot is None:
        return out

    x_mid = 0.5 * w.m_values * a

    if not h.spin_coupled:
        for s in range(0, (pot.degree + 1) // 2 + 1):
            p = 2 * s + 1
            if p > pot.degree:
                break
            coef = ((-1.0) ** s) * a**p / (2.0 ** (2 * s) * math.factorial(p))
            vp = pot.derivative_values(p, x_mid)
            if not np.any(vp):
                continue
            dw = k_derivative(vals, grid, order=p, axis=1)
            out += coef * vp[:, None, None, None] * dw
        return out

    # Diagonal entries: odd series with alternating sign.
    for s in range(0, pot.degree // 2 + 1):
        p = 2 * s + 1
        if p > pot.degree:
            break
        coef = ((-1.0) ** s) * a**p / (2.0 ** (2 * s) * math.factorial(p))
        vp = pot.derivative_values(p, x_mid)
        if not np.any(vp):
            continue
        for alpha in (0, 1):
            sign = 1.0 if alpha == 0 else -1.0
            dw = k_derivative(vals[:, :, alpha, alpha], grid, order=p, axis=1)
            out[:, :, alpha, alpha] += sign * coef * vp[:, None] * dw

    # Off-diagonal entries: even series, multiplicative at s=0.
    for s in range(0, pot.degree // 2 + 1):
        p = 2 * s
        if p > pot.degree:
            break
        coef = ((-1.0) ** s) * a**p / (2.0 ** (2 * s) * math.factorial(p))
        vp = pot.derivative_values(p, x_mid)
        if not np.any(vp):
            continue
        for alpha, beta in ((0, 1), (1, 0)):
            sign = 1.0 if alpha == 0 else -1.0
            dw = k_derivative(vals[:, :, alpha, beta], grid, order=p, axis=1)
            out[:, :, alpha, beta] += -2j * sign * coef * vp[:, None] * dw

    return out


def _m_support(values: np.ndarray) -> Optional[tuple]:
    mags = np.max(np.abs(values.reshape(values.shape[0], -1)), axis=1)
    scale = float(mags.max()) if mags.size else 0.0
    if scale == 0.0:
        return None
    occupied = np.nonzero(mags > _SUPPORT_TOL * max(1.0, scale))[0]
    if occupied.size == 0:
        return None
    return int(occupied[0]), int(occupied[-1])


def _kernel_half_width(j_hop: float, lambda_a: float) -> int:
    """Band truncation |m - l| <= L for the Bessel kernel.

    L = max(30, ceil(2 |8J/(lambda a)|)); the tail is controlled by the
    super-exponential decay of J_n beyond n = |argument|.
    """
    return max(30, math.ceil(2.0 * abs(8.0 * j_hop / lambda_a)))


def _check_slack(values: np.ndarray, needed: int, what: str) -> None:
    support = _m_support(values)
    if support is None:
        return
    lo, hi = support
    slack = min(lo, values.shape[0] - 1 - hi)
    if slack < needed:
        raise WindowError(
            f"{what}: kernel needs {needed} empty m-rows on each side, "
            f"but the occupied block leaves only {slack}"
        )


def _bessel_band_apply(values: np.ndarray, z_per_k: np.ndarray, half_width: int) -> np.ndarray:
    """out[m, k, ...] = sum_{|d| <= L} J_d(z_k) values[m - d, k, ...]."""
    n_m = values.shape[0]
    n_k = z_per_k.shape[0]
    bands = np.empty((2 * half_width + 1, n_k))
    for jdx in range(n_k):
        bands[:, jdx] = bessel_jn_band(half_width, float(z_per_k[jdx]))
    trailing = (1,) * (values.ndim - 2)
    out = np.zeros_like(values)
    for d in range(-half_width, half_width + 1):
        if abs(d) >= n_m:
            continue
        coef = bands[d + half_width].reshape((1, n_k) + trailing)
        if d >= 0:
            out[d:] += coef * values[: n_m - d]
        else:
            out[: n_m + d] += coef * values[-d:]
    return out


def linear_potential_propagate(
    w0: WignerMatrix, j_hop: float, lambda_a: float, t: float
) -> WignerMatrix:
    """Exact evolution of the Wigner field under hopping plus linear potential.

    W(m, k, t) = sum_l J_{m-l}(z) W(l, k + lambda_a t, 0) with the argument
    z = -8 (J / lambda_a) sin(k + lambda_a t / 2) sin(lambda_a t / 2).  The
    quasi-momentum shift is periodic, which makes the motion recur with the
    Bloch period 2 pi / |lambda_a|.  The k-shift is evaluated by exact
    trigonometric interpolation; the l-sum is truncated to the Bessel band.
    Raises WindowError when the band would push support off the m-grid.
    """
    if lambda_a == 0.0:
        raise DomainError("linear propagator requires lambda_a != 0")
    grid = w0.kgrid
    delta = lambda_a * float(t)
    half_width = _kernel_half_width(j_hop, lambda_a)
    z_max = abs(8.0 * j_hop / lambda_a * math.sin(0.5 * delta))
    needed = min(half_width, bessel_tail_order(z_max, 1e-15))
    _check_slack(w0.values, needed, "linear propagator")
    shifted = k_shift(w0.values, grid, delta, axis=1)
    z = -8.0 * (j_hop / lambda_a) * np.sin(grid.points + 0.5 * delta) * math.sin(0.5 * delta)
    out = _bessel_band_apply(shifted, z, half_width)
    return w0.with_values(out)


def spin_linear_propagate(
    w0: WignerMatrix, j_hop: float, lambda_a: float, t: float
) -> WignerMatrix:
    """Exact evolution under hopping plus a sigma_z-coupled linear potential.

    Each diagonal spin entry evolves like the scalar case with the potential
    sign flipped for spin 1 (lambda -> (-1)^alpha lambda), so the two ridges
    drift apart.  The off-diagonal entries see the mean potential only as a
    phase: a Bessel band with an unshifted-k argument, dressed by phases
    e^{(-1)^alpha i (m + l) lambda_a t / 2} on the in- and outgoing m indices.
    """
    if lambda_a == 0.0:
        raise DomainError("linear propagator requires lambda_a != 0")
    grid = w0.kgrid
    delta = lambda_a * float(t)
    half_width = _kernel_half_width(j_hop, lambda_a)
    z_max = abs(8.0 * j_hop / lambda_a * math.sin(0.5 * delta))
    needed = min(half_width, bessel_tail_order(z_max, 1e-15))
    _check_slack(w0.values, needed, "spin-coupled linear propagator")

    out = np.zeros_like(w0.values)
    sin_half = math.sin(0.5 * delta)
    for alpha in (0, 1):
        sign = 1.0 if alpha == 0 else -1.0
        entry = w0.values[:, :, alpha, alpha]
        shifted = k_shift(entry, grid, sign * delta, axis=1)
        z = -8.0 * (j_hop / lambda_a) * np.sin(grid.points + sign * 0.5 * delta) * sin_half
        out[:, :, alpha, alpha] = _bessel_band_apply(shifted, z, half_width)

    # Off-diagonal phases are e^{-i(-1)^alpha (m+l) lambda_a t/2}: the sign is
    # pinned by the J=0 limit, where <n,0|rho_t|m-n,1> = e^{-i lambda_a m t}
    # times the initial element, and by the RK4 oracle.
    z_off = -8.0 * (j_hop / lambda_a) * np.sin(grid.points) * sin_half
    for alpha, beta in ((0, 1), (1, 0)):
        sign = 1.0 if alpha == 0 else -1.0
        phase = np.exp(-0.5j * sign * delta * w0.m_values)[:, None]
        banded = _bessel_band_apply(phase * w0.values[:, :, alpha, beta], z_off, half_width)
        out[:, :, alpha, beta] = phase * banded
    return w0.with_values(out)


def lindblad_wigner_closed(
    w_h: WignerMatrix, channel: str, gamma: float, t: float
) -> WignerMatrix:
    """Dress a Hamiltonian-only Wigner snapshot with spin decoherence.

    For a spin-space channel the noise generator acts entrywise on the spin
    indices and factors out of the Hamiltonian flow:

    * sigma_z: diagonal entries untouched, off-diagonal damped by e^{-2 g t};
    * sigma_x: 00/11 (and 01/10) pairs mix with weights (1 +- e^{-2 g t})/2.

    The factorization is exact whenever the Hamiltonian acts identically on
    the entries the channel mixes (always for sigma_z; for sigma_x only with
    a spin-scalar Hamiltonian).  w_h must be the Hamiltonian-only field at
    the same time t.
    """
    if gamma < 0.0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    f = math.exp(-2.0 * gamma * float(t))
    v = w_h.values
    out = np.empty_like(v)
    if channel == "sigma_z":
        out[:, :, 0, 0] = v[:, :, 0, 0]
        out[:, :, 1, 1] = v[:, :, 1, 1]
        out[:, :, 0, 1] = f * v[:, :, 0, 1]
        out[:, :, 1, 0] = f * v[:, :, 1, 0]
    elif channel == "sigma_x":
        up, dn = 0.5 * (1.0 + f), 0.5 * (1.0 - f)
        out[:, :, 0, 0] = up * v[:, :, 0, 0] + dn * v[:, :, 1, 1]
        out[:, :, 1, 1] = dn * v[:, :, 0, 0] + up * v[:, :, 1, 1]
        out[:, :, 0, 1] = up * v[:, :, 0, 1] + dn * v[:, :, 1, 0]
        out[:, :, 1, 0] = dn * v[:, :, 0, 1] + up * v[:, :, 1, 0]
    else:
        raise DomainError(f"unsupported closed-form channel {channel!r}")
    return w_h.with_values(out)
