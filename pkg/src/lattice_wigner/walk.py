"""Discrete-time quantum walk and projective-measurement decoherence.

One walk step is U(theta) = {T_- (x) |L><L| + T_+ (x) |R><R|} . (I (x) C),
with the coin C(theta) = sigma_z e^{-i theta sigma_y} acting on spin and the
left/right labels identified with the spin basis (|L> = |0>, |R> = |1>).

The same step can be taken directly in phase space: conjugating the Wigner
blocks with M_L = |L><L| C and M_R = |R><R| C and shifting m by two units,

    W(m,k,t+1) = M_R W(m-2,k,t) M_R+ + e^{-2ik} M_R W(m,k,t) M_L+
               + e^{+2ik} M_L W(m,k,t) M_R+ + M_L W(m+2,k,t) M_L+.

State-space step plus transform and the phase-space recursion agree exactly;
the test suite enforces this per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BoundaryLeakError, DomainError, WindowError
from .grids import TWO_PI, KGrid
from .states import DensityOperator, LatticeWindow
from .wigner import WignerMatrix

#: Default tolerance for "the boundary sites must be empty" checks.  One walk
#: step moves population one site, so anything parked on the outermost sites
#: would be lost through the hard wall.
DEFAULT_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class CoinSpec:
    """Coin bias theta in [0, pi/2]; theta = pi/4 is the balanced coin."""

    theta: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= 0.5 * math.pi):
            raise DomainError(f"theta must lie in [0, pi/2], got {self.theta!r}")


@dataclass(frozen=True)
class ProjectiveNoiseSpec:
    """With probability p, project onto the spin or the site basis."""

    p: float
    basis: str = "spin"

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise DomainError(f"p must lie in [0, 1], got {self.p!r}")
        if self.basis not in ("spin", "site"):
            raise DomainError(f"basis must be 'spin' or 'site', got {self.basis!r}")


def coin_operator(theta: float) -> np.ndarray:
    """C(theta) = sigma_z e^{-i theta sigma_y}; exactly unitary."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [-s, -c]], dtype=complex)


def step_operators(theta: float):
    """Left/right conditional coin pieces M_L = |L><L| C, M_R = |R><R| C."""
    c = coin_operator(theta)
    m_l = np.zeros((2, 2), dtype=complex)
    m_r = np.zeros((2, 2), dtype=complex)
    m_l[0] = c[0]
    m_r[1] = c[1]
    return m_l, m_r


def walk_unitary(theta: float, window: LatticeWindow) -> np.ndarray:
    """Dense one-step operator on the composite space (hard-wall truncated)."""
    w = window.width
    coin_full = np.kron(np.eye(w), coin_operator(theta))
    shift = np.zeros((2 * w, 2 * w), dtype=complex)
    for i in range(w):
        if i - 1 >= 0:
            shift[2 * (i - 1), 2 * i] = 1.0  # |n-1, L> <n, L|
        if i + 1 < w:
            shift[2 * (i + 1) + 1, 2 * i + 1] = 1.0  # |n+1, R> <n, R|
    return shift @ coin_full


def _check_state_slack(rho: DensityOperator, tol: float) -> None:
    pops = rho.site_populations()
    edge = float(pops[0] + pops[-1])
    if edge > tol:
        raise BoundaryLeakError(
            f"boundary sites hold population {edge:.3e} > {tol}; "
            "a walk step needs one empty site at each wall"
        )


def qw_step_state(
    rho: DensityOperator, coin: CoinSpec, boundary_tol: float = DEFAULT_BOUNDARY_TOL
) -> DensityOperator:
    """One walk step rho -> U rho U+ in state space."""
    if rho.window.width < 3:
        raise WindowError("walk needs a window of at least three sites")
    _check_state_slack(rho, boundary_tol)
    u = walk_unitary(coin.theta, rho.window)
    return DensityOperator(rho.window, u @ rho.matrix @ u.conj().T)


def qw_step_wigner(
    w: WignerMatrix, coin: CoinSpec, boundary_tol: float = DEFAULT_BOUNDARY_TOL
) -> WignerMatrix:
    """One walk step taken directly on the Wigner field."""
    vals = w.values
    n_m = vals.shape[0]
    if n_m < 5:
        raise WindowError("walk recursion needs at least five m-rows")
    edges = np.concatenate([vals[:2].reshape(-1), vals[-2:].reshape(-1)])
    edge_mag = float(np.max(np.abs(edges)))
    if edge_mag > boundary_tol:
        raise BoundaryLeakError(
            f"outer m-rows hold weight {edge_mag:.3e} > {boundary_tol}; "
            "the recursion shifts m by two units"
        )
    m_l, m_r = step_operators(coin.theta)

    def sandwich(left, block, right):
        return np.einsum("ab,mkbc,dc->mkad", left, block, right.conj())

    up = np.zeros_like(vals)
    up[2:] = vals[:-2]  # W(m-2, k)
    down = np.zeros_like(vals)
    down[:-2] = vals[2:]  # W(m+2, k)
    phase = np.exp(-2j * w.kgrid.points)[None, :, None, None]
    out = (
        sandwich(m_r, up, m_r)
        + phase * sandwich(m_r, vals, m_l)
        + np.conj(phase) * sandwich(m_l, vals, m_r)
        + sandwich(m_l, down, m_l)
    )
    return w.with_values(out)


def projective_map(rho: DensityOperator, noise: ProjectiveNoiseSpec) -> DensityOperator:
    """rho -> (1-p) rho + p sum_i Pi_i rho Pi_i in the chosen basis."""
    if noise.p == 0.0:
        return rho
    blocks = rho.blocks().copy()
    projected = np.zeros_like(blocks)
    if noise.basis == "spin":
        projected[:, 0, :, 0] = blocks[:, 0, :, 0]
        projected[:, 1, :, 1] = blocks[:, 1, :, 1]
    else:
        idx = np.arange(rho.window.width)
        projected[idx, :, idx, :] = blocks[idx, :, idx, :]
    mixed = (1.0 - noise.p) * blocks + noise.p * projected
    d = rho.window.dim
    return DensityOperator(rho.window, mixed.reshape(d, d))


def iterated_cat_wigner(
    n1: int, n2: int, p: float, t: int, window: LatticeWindow, kgrid: KGrid
) -> WignerMatrix:
    """Wigner matrix of the equal-weight double delta after t projective kicks.

    Iterating the projective map leaves the two diagonal ridges untouched and
    damps the interference entries geometrically:

        W(m,k,t) = (1/4pi) [delta_{m,2n1};  (1-p)^t e^{-+ik(n1-n2)} delta_{m,n1+n2};
                            delta_{m,2n2}],

    identically for spin-basis and site-basis projections (the state is
    maximally entangled between the two factors).
    """
    if n1 == n2:
        raise DomainError("cat requires two distinct sites")
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    if t < 0 or int(t) != t:
        raise DomainError(f"t must be a non-negative integer, got {t!r}")
    for site in (n1, n2):
        if not window.contains(site):
            raise WindowError(f"site {site} outside window")
    k = kgrid.points
    vals = np.zeros((2 * window.width - 1, kgrid.n_k, 2, 2), dtype=complex)
    m_min = 2 * window.n_min
    pref = 1.0 / (2.0 * TWO_PI)
    damp = (1.0 - p) ** int(t)
    vals[2 * n1 - m_min, :, 0, 0] = pref
    vals[2 * n2 - m_min, :, 1, 1] = pref
    cross = n1 + n2 - m_min
    vals[cross, :, 0, 1] = pref * damp * np.exp(-1j * k * (n1 - n2))
    vals[cross, :, 1, 0] = pref * damp * np.exp(1j * k * (n1 - n2))
    return WignerMatrix(m_min, 2 * window.n_max, kgrid, vals)


def walk_trajectory(
    rho0: DensityOperator,
    coin: CoinSpec,
    steps: int,
    noise: Optional[ProjectiveNoiseSpec] = None,
    include_walk: bool = True,
    snapshot_steps: Optional[Sequence[int]] = None,
    boundary_tol: float = DEFAULT_BOUNDARY_TOL,
):
    """Iterate walk and/or noise steps, collecting snapshots.

    include_walk=False gives the pure measurement-decoherence process (no
    transport), the regime with a closed-form iterate.  Snapshot step 0 is
    the initial state.  Returns (steps_list, densities).
    """
    if steps < 0:
        raise DomainError("steps must be >= 0")
    if not include_walk and noise is None:
        raise DomainError("noise-only trajectory needs a noise spec")
    wanted = list(range(steps + 1)) if snapshot_steps is None else sorted(set(int(s) for s in snapshot_steps))
    if any(s < 0 or s > steps for s in wanted):
        raise DomainError(f"snapshot steps must lie in [0, {steps}]")
    rho = rho0
    out_steps, out_states = [], []
    if wanted and wanted[0] == 0:
        out_steps.append(0)
        out_states.append(rho)
        wanted = wanted[1:]
    for step in range(1, steps + 1):
        if include_walk:
            rho = qw_step_state(rho, coin, boundary_tol)
        if noise is not None:
            rho = projective_map(rho, noise)
        if wanted and wanted[0] == step:
            out_steps.append(step)
            out_states.append(rho)
            wanted = wanted[1:]
    return out_steps, out_states
