"""Diagnostics: energies, bootstrap integrals, fits, transfer split, damping."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from couettelab.diagnostics import (
    BootstrapIntegrals,
    EnergySeries,
    FitResult,
    damping_norms,
    energy_boussinesq,
    fit_decay_rate,
    grid_weight_table,
    transfer_decomposition,
    weighted_norm_sq,
)
from couettelab.dynamics import ModelSpec, State
from couettelab.errors import (
    GridTooLarge,
    InsufficientData,
    InvalidRichardson,
    NonpositiveNorm,
    TimeMismatch,
)
from couettelab.spectral import SpectralField, SpectralGrid, random_real_field
from couettelab.weights import WeightParams


@pytest.fixture
def grid():
    return SpectralGrid(nx=8, ny=8, ly=2 * np.pi)


@pytest.fixture
def params():
    return WeightParams(mu=1e-3, beta=1.0, n_max=64)


class TestEnergy:
    def test_zero_second_component(self, grid, params):
        rng = np.random.default_rng(0)
        z1 = random_real_field(grid, rng, mean_zero=True)
        z2 = SpectralField.zeros(grid)
        tab = grid_weight_table(params, "boussinesq", 1.0, grid)
        e = energy_boussinesq(z1, z2, tab, beta=1.0)
        assert e == pytest.approx(0.5 * weighted_norm_sq([z1], tab, grid))

    def test_resonant_mode_has_no_cross_term(self, grid, params):
        t, k, m = 2.0, 1, 2
        # eta = k*t at this mode, so the cross symbol vanishes
        ly = 2 * np.pi * m / (k * t)
        g2 = SpectralGrid(nx=8, ny=8, ly=ly)
        z = SpectralField.from_modes(g2, {(0, k, m): 0.3 + 0.4j})
        tab = grid_weight_table(params, "boussinesq", t, g2)
        e = energy_boussinesq(z, z, tab, beta=1.0)
        assert e == pytest.approx(weighted_norm_sq([z], tab, g2), rel=1e-12)

    def test_cauchy_schwarz_bound(self, grid, params):
        rng = np.random.default_rng(1)
        beta = 0.8
        tab = grid_weight_table(params, "boussinesq", 0.7, grid)
        for _ in range(25):
            z1 = random_real_field(grid, rng, mean_zero=True)
            z2 = random_real_field(grid, rng, mean_zero=True)
            e = energy_boussinesq(z1, z2, tab, beta)
            half = 0.5 * weighted_norm_sq([z1, z2], tab, grid)
            n1 = math.sqrt(weighted_norm_sq([z1], tab, grid))
            n2 = math.sqrt(weighted_norm_sq([z2], tab, grid))
            assert abs(e - half) <= n1 * n2 / (2 * beta) + 1e-12

    def test_coercivity(self, grid, params):
        rng = np.random.default_rng(2)
        for beta in (0.75, 1.0, 2.0):
            tab = grid_weight_table(params, "boussinesq", 1.3, grid)
            for _ in range(10):
                z1 = random_real_field(grid, rng, mean_zero=True)
                z2 = random_real_field(grid, rng, mean_zero=True)
                e = energy_boussinesq(z1, z2, tab, beta)
                floor = (1.0 - 1.0 / (2 * beta)) * 0.5 * weighted_norm_sq(
                    [z1, z2], tab, grid
                )
                assert e >= floor - 1e-12 * abs(floor)

    def test_requires_beta_above_half(self, grid, params):
        z = SpectralField.zeros(grid)
        tab = grid_weight_table(params, "boussinesq", 0.0, grid)
        with pytest.raises(InvalidRichardson):
            energy_boussinesq(z, z, tab, beta=0.5)


class TestBootstrapIntegrals:
    def test_static_weights_zero_dissipation(self, grid):
        # mu = 0 and a time-frozen table: both integrals stay zero
        rng = np.random.default_rng(3)
        f = random_real_field(grid, rng, mean_zero=True)
        tab = grid_weight_table(None, "none", 0.0, grid)
        acc = BootstrapIntegrals(mu=0.0)
        for t in (0.0, 0.5, 1.0):
            tab.t = t
            d, w = acc.update([f], tab, grid, t)
        assert d == 0.0 and w == 0.0

    def test_exponential_decay_closed_form(self, grid):
        # single mode decaying as exp(-lam*t) with constant weight table:
        # integral of mu*||grad_t A f||^2 has a closed form
        lam_decay, mu, t_end = 0.35, 1e-2, 3.0
        k, m = 1, 1
        tab = grid_weight_table(None, "none", 0.0, grid)
        acc = BootstrapIntegrals(mu=mu)
        f0 = SpectralField.from_modes(grid, {(0, k, m): 1.0})
        ts = np.linspace(0.0, t_end, 4001)
        for t in ts:
            f = SpectralField(grid, f0.coeffs * np.exp(-lam_decay * t))
            tab.t = t
            diss, _ = acc.update([f], tab, grid, t)
        eta = 2 * np.pi / grid.ly * m
        a2 = (1.0 + k**2 + eta**2) ** 12
        # two conjugate modes carry |coeff|^2 = exp(-2 lam t) each
        def integrand(t):
            lam2_t = k**2 + (eta - k * t) ** 2
            return mu * grid.cell_area * 2 * a2 * lam2_t * np.exp(-2 * lam_decay * t)

        expected, _ = quad(integrand, 0.0, t_end, epsabs=1e-12)
        assert diss == pytest.approx(expected, rel=1e-6)

    def test_time_mismatch_guard(self, grid):
        f = SpectralField.zeros(grid)
        tab = grid_weight_table(None, "none", 0.0, grid)
        acc = BootstrapIntegrals(mu=0.0)
        with pytest.raises(TimeMismatch):
            acc.update([f], tab, grid, 1.0)

    def test_nondecreasing(self, grid):
        rng = np.random.default_rng(4)
        acc = BootstrapIntegrals(mu=1e-2)
        prev = (0.0, 0.0)
        tab = grid_weight_table(WeightParams(mu=1e-2), "ns", 0.0, grid)
        params = WeightParams(mu=1e-2)
        for t in np.linspace(0.0, 2.0, 21):
            f = random_real_field(grid, rng, mean_zero=True)
            tab = grid_weight_table(params, "ns", t, grid)
            d, w = acc.update([f], tab, grid, t)
            assert d >= prev[0] and w >= prev[1]
            prev = (d, w)


class TestFitDecayRate:
    def test_exact_exponential(self):
        ts = np.linspace(0.0, 10.0, 50)
        fit = fit_decay_rate(ts, np.exp(-0.3 * ts))
        assert fit.rate == pytest.approx(0.3, abs=1e-10)
        assert fit.stderr < 1e-10

    def test_constant_series(self):
        ts = np.linspace(0.0, 5.0, 20)
        fit = fit_decay_rate(ts, np.ones_like(ts))
        assert fit.rate == pytest.approx(0.0, abs=1e-14)

    def test_linearized_rate_against_closed_form(self):
        # mode (1,0): amplitude exp(-nu t^3/3); compare the fitted
        # window-average rate against the closed-form fit of the exponent
        nu = 1e-4
        ts = np.linspace(0.0, 50.0, 200)
        amps = np.exp(-nu * ts**3 / 3.0)
        window = (10.0, 50.0)
        fit = fit_decay_rate(ts, amps, *window)
        keep = (ts >= window[0]) & (ts <= window[1])
        tt, yy = ts[keep], -nu * ts[keep] ** 3 / 3.0
        slope = np.sum((tt - tt.mean()) * (yy - yy.mean())) / np.sum(
            (tt - tt.mean()) ** 2
        )
        assert fit.rate == pytest.approx(-slope, rel=1e-10)

    def test_insufficient_data(self):
        with pytest.raises(InsufficientData):
            fit_decay_rate([0, 1, 2], [1, 1, 1])

    def test_nonpositive_norm(self):
        ts = np.linspace(0, 1, 12)
        with pytest.raises(NonpositiveNorm):
            fit_decay_rate(ts, np.concatenate([[0.0], np.ones(11)]))


class TestTransferDecomposition:
    def test_zero_background(self, grid, params):
        rng = np.random.default_rng(5)
        f = random_real_field(grid, rng, mean_zero=True)
        q = SpectralField.zeros(grid)
        tab = grid_weight_table(params, "ns", 1.0, grid)
        dec = transfer_decomposition(f, f, q, 1.0, 0.0, tab, 1.0)
        assert dec.total == 0.0
        assert dec.reaction == dec.transport == dec.remainder == dec.average == 0.0

    def test_average_only_for_zero_frequency_background(self, grid, params):
        rng = np.random.default_rng(6)
        f1 = random_real_field(grid, rng, mean_zero=True)
        f2 = random_real_field(grid, rng, mean_zero=True)
        q = SpectralField.zeros(grid)
        for m in (1, 2):
            q.coeffs[0, 0, m] = 0.4
            q.coeffs[0, 0, -m % grid.ny] = 0.4
        tab = grid_weight_table(params, "ns", 0.8, grid)
        dec = transfer_decomposition(f1, f2, q, 1.0, 0.0, tab, 0.8)
        assert dec.reaction == 0.0 and dec.transport == 0.0 and dec.remainder == 0.0
        assert dec.average > 0.0
        assert dec.partition_defect < 1e-12

    @pytest.mark.parametrize("gamma,gamma_tilde", [(1.0, 0.0), (0.5, 0.5), (0.0, 0.0)])
    def test_partition_identity_random(self, grid, params, gamma, gamma_tilde):
        rng = np.random.default_rng(7)
        tab = grid_weight_table(params, "ns", 1.7, grid)
        for _ in range(10):
            f1 = random_real_field(grid, rng, mean_zero=True)
            f2 = random_real_field(grid, rng, mean_zero=True)
            q = random_real_field(grid, rng, mean_zero=True)
            dec = transfer_decomposition(f1, f2, q, gamma, gamma_tilde, tab, 1.7)
            assert dec.partition_defect < 1e-10
            assert dec.reaction_resonant + dec.reaction_nonresonant == pytest.approx(
                dec.reaction, rel=1e-12, abs=1e-300
            )
            assert dec.average_reaction + dec.average_transport == pytest.approx(
                dec.average, rel=1e-12, abs=1e-300
            )

    def test_pair_budget(self, params):
        big = SpectralGrid(nx=64, ny=64)
        f = SpectralField.zeros(big)
        tab = grid_weight_table(None, "none", 0.0, big)
        with pytest.raises(GridTooLarge):
            transfer_decomposition(f, f, f, 1.0, 0.0, tab, 0.0, pair_budget=1 << 20)


class TestDampingNorms:
    def test_zero_perturbation(self, grid):
        spec = ModelSpec(model="ns", nu=1e-3)
        state = State(3.0, {"w": SpectralField.zeros(grid)})
        out = damping_norms(state, spec)
        assert out["combined"] == 0.0

    def test_time_zero_reduces_to_plain_norms(self, grid):
        spec = ModelSpec(model="mhd_horizontal", nu=1e-3, kappa=1e-3, alpha=(1.0, 0.0))
        rng = np.random.default_rng(8)
        from couettelab.spectral import leray_project

        v = leray_project(random_real_field(grid, rng, 2, mean_zero=True), 0.0)
        b = leray_project(random_real_field(grid, rng, 2, mean_zero=True), 0.0)
        state = State(0.0, {"v": v, "b": b})
        out = damping_norms(state, spec)
        vx = SpectralField(grid, v.coeffs[0])
        bx = SpectralField(grid, b.coeffs[0])
        assert out["x_neq"] == pytest.approx(
            math.hypot(vx.l2_norm_nonzero_x(), bx.l2_norm_nonzero_x())
        )

    def test_linearized_vertical_velocity_uniformly_bounded(self):
        # inviscid single mode (1, eta): <t>^2 ||v^y|| stays bounded in t
        # because the velocity symbol decays like t^-2
        k, eta, amp = 1, 3.0, 1.0
        ts = np.linspace(0.0, 200.0, 2001)
        vy = amp * k / (k**2 + (eta - k * ts) ** 2)
        weighted = (1.0 + ts**2) * vy
        cap = amp * (1.0 + eta**2) * 1.1 + amp
        assert np.max(weighted) <= cap
        assert weighted[-1] <= weighted.max()


class TestEnergySeries:
    def test_strictly_increasing_times(self):
        s = EnergySeries(model="ns")
        s.append({"t": 0.0, "norm_total": 1.0})
        with pytest.raises(TimeMismatch):
            s.append({"t": 0.0, "norm_total": 1.0})

    def test_finite_entries(self):
        s = EnergySeries(model="ns")
        with pytest.raises(NonpositiveNorm):
            s.append({"t": 0.0, "norm_total": math.inf})
