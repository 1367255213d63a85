import math

import numpy as np
import pytest

from lattice_wigner import (
    BoundaryLeakError,
    DomainError,
    HamiltonianSpec,
    KGrid,
    LatticeWindow,
    NoiseSpec,
    Potential,
    StepSizeError,
    WindowError,
    density_from_pure,
    gaussian_product_state,
    hermiticity_defect,
    lindblad_rk4,
    lindblad_wigner_closed,
    linear_potential_propagate,
    marginal_momentum,
    normalization_total,
    spin_linear_propagate,
    von_neumann_rk4,
    wigner_evolution_rhs,
    wigner_of_density,
)
from lattice_wigner.grids import k_derivative, k_shift
from lattice_wigner.states import PAULI_X, PAULI_Z

from conftest import random_density


def gaussian_setup(window=None, grid=None, center=0, sigma=1.5, spin="up"):
    window = window or LatticeWindow(-24, 24)
    grid = grid or KGrid(128)
    psi = gaussian_product_state(center, sigma, spin, window)
    rho0 = density_from_pure(psi)
    return window, grid, rho0, wigner_of_density(rho0, grid)


def negate_potential(pot):
    if pot is None:
        return None
    if pot.kind == "linear":
        return Potential.linear(-pot.slope)
    return Potential.polynomial(tuple(-c for c in pot.coeffs))


class TestHamiltonianSpec:
    def test_site_potential_linear(self):
        window = LatticeWindow(-2, 2, a=0.5)
        h = HamiltonianSpec(1.0, Potential.linear(2.0))
        assert np.allclose(h.site_potential(window), [-2.0, -1.0, 0.0, 1.0, 2.0])

    def test_dense_matrix_is_hermitian(self):
        window = LatticeWindow(-3, 3)
        h = HamiltonianSpec(0.7, Potential.polynomial([0.0, 0.1, 0.02]), spin_coupled=True)
        mat = h.dense_matrix(window)
        assert np.max(np.abs(mat - mat.conj().T)) == 0.0

    def test_structured_apply_matches_dense(self, rng):
        from lattice_wigner.continuous import _make_rhs

        window = LatticeWindow(-4, 4)
        h = HamiltonianSpec(0.9, Potential.polynomial([0.0, 0.3]), spin_coupled=True)
        noise = NoiseSpec(((PAULI_Z, 0.2), (PAULI_X, 0.1)))
        rho = random_density(window, rng)
        rhs = _make_rhs(h, noise, window)(rho.matrix.copy())
        hmat = h.dense_matrix(window)
        want = -1j * (hmat @ rho.matrix - rho.matrix @ hmat)
        for op, gamma in ((PAULI_Z, 0.2), (PAULI_X, 0.1)):
            full = np.kron(np.eye(window.width), op)
            gram = full.conj().T @ full
            want += gamma * (
                full @ rho.matrix @ full.conj().T
                - 0.5 * (gram @ rho.matrix + rho.matrix @ gram)
            )
        assert np.max(np.abs(rhs - want)) < 1e-13

    def test_degree_cap(self):
        with pytest.raises(DomainError):
            Potential.polynomial([0.0] * 8)

    def test_linear_needs_nonzero_slope(self):
        with pytest.raises(DomainError):
            Potential.linear(0.0)


class TestVonNeumannRK4:
    def test_free_static(self, rng):
        # Window-filling state: opt out of the boundary guard, nothing moves.
        window = LatticeWindow(-5, 5)
        rho0 = random_density(window, rng)
        res = von_neumann_rk4(rho0, HamiltonianSpec(0.0), 1.0, dt=0.1, eps_boundary=2.0)
        assert np.max(np.abs(res.snapshots[-1].matrix - rho0.matrix)) < 1e-14

    def test_trace_and_purity_conserved(self):
        window, grid, rho0, _ = gaussian_setup(
            LatticeWindow(-20, 20), KGrid(96), sigma=1.5
        )
        h = HamiltonianSpec(1.0, Potential.linear(0.5))
        res = von_neumann_rk4(rho0, h, 2.0)
        final = res.snapshots[-1]
        assert abs(np.trace(final.matrix) - 1.0) < 1e-10
        assert final.purity() == pytest.approx(1.0, abs=1e-8)

    def test_snapshot_schedule(self):
        window, grid, rho0, _ = gaussian_setup(LatticeWindow(-16, 16), KGrid(72))
        h = HamiltonianSpec(0.5)
        res = von_neumann_rk4(rho0, h, 1.0, snapshot_times=[0.0, 0.5, 1.0])
        assert res.times == (0.0, 0.5, 1.0)
        assert len(res.snapshots) == 3
        assert np.max(np.abs(res.snapshots[0].matrix - rho0.matrix)) == 0.0

    def test_step_size_guard(self):
        window, grid, rho0, _ = gaussian_setup(LatticeWindow(-16, 16), KGrid(72))
        h = HamiltonianSpec(1.0, Potential.linear(1.0))
        with pytest.raises(StepSizeError):
            von_neumann_rk4(rho0, h, 1.0, dt=1.0)

    def test_boundary_leak_detected(self):
        # Free spreading from a packet close to the wall must trip the guard.
        window = LatticeWindow(-8, 8)
        psi = gaussian_product_state(0, 1.3, "up", window)
        rho0 = density_from_pure(psi)
        with pytest.raises(BoundaryLeakError):
            von_neumann_rk4(rho0, HamiltonianSpec(1.0), 6.0)


class TestLinearPropagator:
    def test_time_zero_identity(self):
        _, _, _, w0 = gaussian_setup()
        out = linear_potential_propagate(w0, 1.0, 1.0, 0.0)
        assert np.max(np.abs(out.values - w0.values)) < 1e-14

    def test_bloch_period_returns_initial(self):
        _, _, _, w0 = gaussian_setup()
        period = 2.0 * math.pi / 1.0
        out = linear_potential_propagate(w0, 1.0, 1.0, period)
        assert np.max(np.abs(out.values - w0.values)) < 1e-8

    def test_matches_rk4_oracle(self):
        window, grid, rho0, w0 = gaussian_setup()
        h = HamiltonianSpec(1.0, Potential.linear(1.0))
        closed = linear_potential_propagate(w0, 1.0, 1.0, 2.0)
        res = von_neumann_rk4(rho0, h, 2.0, dt=5e-4)
        oracle = wigner_of_density(res.snapshots[-1], grid)
        assert np.max(np.abs(closed.values - oracle.values)) < 1e-6

    def test_rk4_bloch_period(self):
        window, grid, rho0, w0 = gaussian_setup()
        h = HamiltonianSpec(1.0, Potential.linear(1.0))
        res = von_neumann_rk4(rho0, h, 2.0 * math.pi, dt=1e-3)
        w_period = wigner_of_density(res.snapshots[-1], grid)
        assert np.max(np.abs(w_period.values - w0.values)) < 1e-5

    def test_normalization_and_hermiticity_preserved(self):
        _, _, _, w0 = gaussian_setup()
        out = linear_potential_propagate(w0, 1.0, 1.0, 1.7)
        assert abs(normalization_total(out) - 1.0) < 1e-10
        assert hermiticity_defect(out) < 1e-13

    def test_momentum_marginal_drifts_rigidly(self):
        _, grid, _, w0 = gaussian_setup()
        t = 1.3
        out = linear_potential_propagate(w0, 1.0, 1.0, t)
        drifted = k_shift(marginal_momentum(w0), grid, 1.0 * t, axis=0)
        assert np.max(np.abs(marginal_momentum(out) - drifted)) < 1e-8

    def test_zero_slope_rejected(self):
        _, _, _, w0 = gaussian_setup()
        with pytest.raises(DomainError):
            linear_potential_propagate(w0, 1.0, 0.0, 1.0)

    def test_window_slack_guard(self):
        # A wide kernel (tiny lambda_a) with a window-filling state must fail.
        window, grid, rho0, w0 = gaussian_setup(LatticeWindow(-16, 16), KGrid(72))
        with pytest.raises(WindowError):
            linear_potential_propagate(w0, 1.0, 0.05, 3.0)


class TestSpinPropagator:
    def test_time_zero_identity(self):
        _, _, _, w0 = gaussian_setup(spin="plus")
        out = spin_linear_propagate(w0, 1.0, 1.0, 0.0)
        assert np.max(np.abs(out.values - w0.values)) < 1e-14

    def test_matches_rk4_oracle_all_entries(self):
        window, grid, rho0, w0 = gaussian_setup(
            LatticeWindow(-30, 30), KGrid(128), center=3, sigma=2.0, spin="plus"
        )
        h = HamiltonianSpec(1.0, Potential.linear(1.0), spin_coupled=True)
        closed = spin_linear_propagate(w0, 1.0, 1.0, 2.0)
        res = von_neumann_rk4(rho0, h, 2.0, dt=5e-4)
        oracle = wigner_of_density(res.snapshots[-1], grid)
        assert np.max(np.abs(closed.values - oracle.values)) < 1e-6

    def test_j_zero_phase_law(self):
        _, _, _, w0 = gaussian_setup(spin="plus")
        t, lam_a = 0.7, 1.0
        out = spin_linear_propagate(w0, 0.0, lam_a, t)
        phases = np.exp(-1j * lam_a * t * w0.m_values)[:, None]
        assert np.max(np.abs(out.values[:, :, 0, 1] - phases * w0.values[:, :, 0, 1])) < 1e-13
        assert np.max(np.abs(out.values[:, :, 1, 0] - phases.conj() * w0.values[:, :, 1, 0])) < 1e-13

    def test_diagonal_mirror_symmetry(self):
        _, _, _, w0 = gaussian_setup(spin="plus")
        t = 1.1
        out_pos = spin_linear_propagate(w0, 1.0, 1.0, t)
        out_neg = spin_linear_propagate(w0, 1.0, -1.0, t)
        assert np.max(np.abs(out_pos.values[:, :, 1, 1] - out_neg.values[:, :, 0, 0])) < 1e-10

    def test_ridges_split(self):
        _, grid, _, w0 = gaussian_setup(
            LatticeWindow(-30, 30), KGrid(128), center=3, sigma=2.0, spin="plus"
        )
        out = spin_linear_propagate(w0, 1.0, 1.0, 1.0)

        def first_moment(w, a):
            marg = w.kgrid.weight * w.values[:, :, a, a].real.sum(axis=1)
            return float((w.m_values * marg).sum() / marg.sum())

        d0 = first_moment(w0, 0) - first_moment(w0, 1)
        d1 = first_moment(out, 0) - first_moment(out, 1)
        assert abs(d0) < 1e-10
        assert abs(d1) > 0.5

    def test_hermiticity_preserved(self):
        _, _, _, w0 = gaussian_setup(spin="plus")
        out = spin_linear_propagate(w0, 1.0, 1.0, 1.3)
        assert hermiticity_defect(out) < 1e-13


class TestWignerEvolutionRHS:
    def test_free_hopping_only(self):
        _, grid, _, w0 = gaussian_setup(LatticeWindow(-14, 14), KGrid(64))
        rhs = wigner_evolution_rhs(w0, HamiltonianSpec(0.7))
        sin_k = np.sin(grid.points)[None, :, None, None]
        shift = np.zeros_like(w0.values)
        shift[:-1] += w0.values[1:]
        shift[1:] -= w0.values[:-1]
        assert np.max(np.abs(rhs - 2 * 0.7 * sin_k * shift)) < 1e-15

    def test_free_momentum_marginal_invariant(self):
        _, _, _, w0 = gaussian_setup(LatticeWindow(-14, 14), KGrid(64))
        rhs = wigner_evolution_rhs(w0, HamiltonianSpec(0.7))
        assert np.max(np.abs(rhs.sum(axis=0))) < 1e-14

    def test_linear_rhs_is_hopping_plus_k_gradient(self):
        _, grid, _, w0 = gaussian_setup(LatticeWindow(-14, 14), KGrid(64))
        h = HamiltonianSpec(0.7, Potential.linear(0.9))
        rhs = wigner_evolution_rhs(w0, h)
        manual = wigner_evolution_rhs(w0, HamiltonianSpec(0.7)) + 0.9 * k_derivative(
            w0.values, grid, order=1, axis=1
        )
        assert np.max(np.abs(rhs - manual)) < 1e-15

    @pytest.mark.parametrize(
        "h",
        [
            HamiltonianSpec(0.7, Potential.linear(0.9)),
            HamiltonianSpec(0.7, Potential.polynomial([0.0, 0.2, 0.05])),
            HamiltonianSpec(0.7, Potential.linear(0.9), spin_coupled=True),
            HamiltonianSpec(
                0.5, Potential.polynomial([0.1, 0.2, 0.0, 0.004]), spin_coupled=True
            ),
        ],
    )
    def test_matches_finite_difference_oracle(self, h):
        window, grid, rho0, w0 = gaussian_setup(
            LatticeWindow(-14, 14), KGrid(64), spin="plus"
        )
        rhs = wigner_evolution_rhs(w0, h, a=window.a)
        eps = 1e-5
        plus = wigner_of_density(
            von_neumann_rk4(rho0, h, eps, dt=eps / 4).snapshots[-1], grid
        )
        h_neg = HamiltonianSpec(-h.j_hop, negate_potential(h.potential), h.spin_coupled)
        minus = wigner_of_density(
            von_neumann_rk4(rho0, h_neg, eps, dt=eps / 4).snapshots[-1], grid
        )
        fd = (plus.values - minus.values) / (2 * eps)
        assert np.max(np.abs(rhs - fd)) < 1e-9


class TestLindblad:
    def make_cat(self):
        from lattice_wigner import CatSpec, cat_state

        window = LatticeWindow(-14, 14)
        grid = KGrid(64)
        rho0 = density_from_pure(cat_state(CatSpec(0, 3, 1.0), window))
        return window, grid, rho0, wigner_of_density(rho0, grid)

    def test_gamma_zero_reduces_to_unitary(self, rng):
        window = LatticeWindow(-6, 6)
        rho0 = random_density(window, rng)
        h = HamiltonianSpec(0.4)
        a = lindblad_rk4(rho0, h, NoiseSpec(((PAULI_Z, 0.0),)), 0.5, dt=0.01, eps_boundary=2.0)
        b = von_neumann_rk4(rho0, h, 0.5, dt=0.01, eps_boundary=2.0)
        assert np.max(np.abs(a.snapshots[-1].matrix - b.snapshots[-1].matrix)) < 1e-12

    def test_sigma_z_damps_off_diagonals(self):
        window, grid, rho0, w0 = self.make_cat()
        gamma = 0.3
        res = lindblad_rk4(
            rho0, HamiltonianSpec(0.0), NoiseSpec(((PAULI_Z, gamma),)), 5.0,
            dt=0.01, snapshot_times=[1.0, 5.0],
        )
        for t, snap in zip(res.times, res.snapshots):
            wt = wigner_of_density(snap, grid)
            mask = np.abs(w0.values[:, :, 0, 1]) > 1e-3
            ratio = wt.values[:, :, 0, 1][mask] / w0.values[:, :, 0, 1][mask]
            assert np.max(np.abs(ratio - math.exp(-2 * gamma * t))) < 1e-8

    def test_sigma_x_mixes_diagonals(self):
        window, grid, rho0, w0 = self.make_cat()
        gamma, t = 0.4, 2.0
        res = lindblad_rk4(
            rho0, HamiltonianSpec(0.0), NoiseSpec(((PAULI_X, gamma),)), t, dt=0.01
        )
        wt = wigner_of_density(res.snapshots[-1], grid)
        f = math.exp(-2 * gamma * t)
        want00 = 0.5 * (1 + f) * w0.values[:, :, 0, 0] + 0.5 * (1 - f) * w0.values[:, :, 1, 1]
        want11 = 0.5 * (1 - f) * w0.values[:, :, 0, 0] + 0.5 * (1 + f) * w0.values[:, :, 1, 1]
        assert np.max(np.abs(wt.values[:, :, 0, 0] - want00)) < 1e-8
        assert np.max(np.abs(wt.values[:, :, 1, 1] - want11)) < 1e-8

    def test_purity_non_increasing(self):
        window, grid, rho0, _ = self.make_cat()
        res = lindblad_rk4(
            rho0, HamiltonianSpec(0.0), NoiseSpec(((PAULI_Z, 0.5),)), 3.0,
            dt=0.01, snapshot_times=[0.5, 1.0, 2.0, 3.0],
        )
        purities = [s.purity() for s in res.snapshots]
        assert all(b <= a + 1e-12 for a, b in zip(purities, purities[1:]))

    def test_closed_form_identity_at_gamma_zero(self):
        _, _, _, w0 = self.make_cat()
        out = lindblad_wigner_closed(w0, "sigma_z", 0.0, 5.0)
        assert np.array_equal(out.values, w0.values)

    def test_closed_form_sigma_x_late_time_mixture(self):
        _, _, _, w0 = self.make_cat()
        out = lindblad_wigner_closed(w0, "sigma_x", 1.0, 1e6)
        mean = 0.5 * (w0.values[:, :, 0, 0] + w0.values[:, :, 1, 1])
        assert np.max(np.abs(out.values[:, :, 0, 0] - mean)) < 1e-12
        assert np.max(np.abs(out.values[:, :, 1, 1] - mean)) < 1e-12

    def test_unsupported_channel(self):
        _, _, _, w0 = self.make_cat()
        with pytest.raises(DomainError):
            lindblad_wigner_closed(w0, "sigma_y", 0.1, 1.0)

    @pytest.mark.parametrize("channel,op", [("sigma_z", PAULI_Z), ("sigma_x", PAULI_X)])
    def test_closed_form_vs_rk4_with_hopping(self, channel, op):
        window, grid, rho0, _ = self.make_cat()
        gamma, t = 0.3, 2.0
        h = HamiltonianSpec(1.0)
        w_h = wigner_of_density(von_neumann_rk4(rho0, h, t, dt=0.005).snapshots[-1], grid)
        closed = lindblad_wigner_closed(w_h, channel, gamma, t)
        full = lindblad_rk4(rho0, h, NoiseSpec(((op, gamma),)), t, dt=0.005)
        oracle = wigner_of_density(full.snapshots[-1], grid)
        assert np.max(np.abs(closed.values - oracle.values)) < 1e-7

    def test_negative_gamma_rejected(self):
        with pytest.raises(DomainError):
            NoiseSpec(((PAULI_Z, -0.1),))
