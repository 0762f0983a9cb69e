import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from raterobust import quad
from raterobust.errors import InstabilityError, ValidationError
from raterobust.linsys import (
    AlgorithmSpec,
    QuadraticSpectrum,
    build_system,
    closed_loop_matrix,
    robustness_h2,
    spectral_radius,
)


def sample_inside(rng, mu, L, beta_max=2.0):
    while True:
        alpha, beta = rng.uniform(0, 2 / L), rng.uniform(0, beta_max)
        if quad.in_stability_region(alpha, beta, mu, L).margin > 1e-3:
            return alpha, beta


def ag_block_radius(alpha, beta, lam):
    h = 1 - alpha * lam
    return np.max(np.abs(np.roots([1.0, -(1 + beta) * h, beta * h])))


class TestGD:
    def test_fastest_stepsize_rate(self):
        assert quad.gd_rate(2 / 1.1, 0.1, 1.0) == pytest.approx(9 / 11, abs=1e-12)
        assert quad.gd_rate(2 / 1.1, 0.1, 1.0) == pytest.approx(0.8182, abs=1e-4)

    def test_rate_edge_values(self):
        assert quad.gd_rate(1.0, 1.0, 1.0) == 0.0
        assert quad.gd_rate(2.0, 0.5, 1.0) == 1.0

    def test_robustness_unit(self):
        s = QuadraticSpectrum((1.0,))
        assert quad.gd_robustness(1.0, s) == pytest.approx(0.5)
        assert quad.gd_robustness_iterates(1.0, s) == pytest.approx(1.0)

    def test_robustness_example_value(self):
        # Exact optimizer of the tau=2 problem for mu=0.1, L=1, d=2 lies near 1.5055.
        assert quad.gd_robustness(1.5055, QuadraticSpectrum((0.1, 1.0))) == pytest.approx(1.9294, abs=1e-3)

    def test_small_stepsize_limit(self):
        s = QuadraticSpectrum((0.1, 1.0))
        assert quad.gd_robustness(1e-12, s) < 1e-11
        assert quad.gd_robustness_iterates(1e-12, s) < 1e-10

    def test_single_eigenvalue_iterate_formula(self):
        for alpha in (0.1, 0.7, 1.9):
            assert quad.gd_robustness_iterates(alpha, QuadraticSpectrum((1.0,))) == pytest.approx(
                alpha / (2 - alpha))

    @pytest.mark.parametrize("alpha", [0.0, -0.1, 2.0, 2.5])
    def test_out_of_range(self, alpha):
        with pytest.raises(ValidationError) as info:
            quad.gd_robustness(alpha, QuadraticSpectrum((0.1, 1.0)))
        assert info.value.code == "OUT_OF_RANGE"

    def test_monotone_in_stepsize(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            s = QuadraticSpectrum(tuple(rng.uniform(0.05, 3.0, int(rng.integers(1, 9)))))
            grid = np.linspace(0, 2 / s.L, 2002)[1:-1]
            values = [quad.gd_robustness(a, s) for a in grid]
            assert np.all(np.diff(values) > 0)

    def test_lower_bound_examples(self):
        s = QuadraticSpectrum((1.0,))
        assert quad.gd_lower_bound(1.0, s) == pytest.approx(0.125)
        s = QuadraticSpectrum((0.1, 1.0))
        abar = 2 / 1.1
        expected = (1 - (9 / 11) ** 2) * (1 / 0.8 + 1 / 8)
        assert quad.gd_lower_bound(abar, s) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.4545, abs=1e-3)
        assert quad.gd_lower_bound(abar, s) < quad.gd_robustness(abar, s)
        assert quad.gd_lower_bound(2 / s.L - 1e-12, s) < 1e-10

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(0.01, 10.0), min_size=1, max_size=8), st.floats(1e-6, 1 - 1e-6))
    def test_lower_bound_property(self, lams, fraction):
        s = QuadraticSpectrum(tuple(lams))
        alpha = fraction * 2 / s.L
        assert quad.gd_robustness(alpha, s) >= quad.gd_lower_bound(alpha, s)

    def test_closed_form_matches_h2(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            s = QuadraticSpectrum(tuple(rng.uniform(0.05, 2.0, int(rng.integers(1, 9)))))
            alpha = rng.uniform(0.01, 0.99) * 2 / s.L
            spec = AlgorithmSpec.gd(alpha)
            assert quad.gd_robustness(alpha, s) == pytest.approx(robustness_h2(spec, s), rel=1e-9)
            assert quad.gd_robustness_iterates(alpha, s) == pytest.approx(
                robustness_h2(spec, s, "Jprime"), rel=1e-9)


class TestAGRate:
    def test_accelerated_parameters_on_quadratic(self):
        # alpha = 1/L with the classical momentum gives 1 - 1/sqrt(kappa) on quadratics,
        # which is faster than the sqrt(1 - 1/sqrt(kappa)) certificate rate.
        mu, L = 0.25, 1.0
        kappa = L / mu
        beta = (np.sqrt(kappa) - 1) / (np.sqrt(kappa) + 1)
        rate = quad.ag_rate(1 / L, beta, mu, L)
        radius = spectral_radius(closed_loop_matrix(build_system(AlgorithmSpec.ag(1 / L, beta), 2),
                                                    QuadraticSpectrum((mu, L))))
        assert rate == pytest.approx(radius, abs=1e-7)
        assert rate == pytest.approx(1 - 1 / np.sqrt(kappa), abs=1e-7)
        assert rate <= np.sqrt(1 - 1 / np.sqrt(kappa))

    def test_zero_momentum_is_gd(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            mu = rng.uniform(0.01, 1.0)
            L = mu * rng.uniform(1, 50)
            alpha = rng.uniform(0, 3 / L)
            assert quad.ag_rate(alpha, 0.0, mu, L) == pytest.approx(quad.gd_rate(alpha, mu, L), abs=1e-15)

    def test_cancelled_eigenvalue(self):
        assert quad.ag_rate_lambda(1.0, 0.7, 1.0) == 0.0
        assert quad.ag_delta(1.0, 0.7, 1.0) == 0.0

    def test_matches_block_roots(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            alpha, beta, lam = rng.uniform(0, 2.5), rng.uniform(0, 3), rng.uniform(0.05, 1)
            assert quad.ag_rate_lambda(alpha, beta, lam) == pytest.approx(
                ag_block_radius(alpha, beta, lam), rel=1e-7, abs=1e-7)

    def test_matches_spectral_radius_on_stable_points(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            d = int(rng.integers(2, 6))
            lam = np.sort(rng.uniform(0.1, 1.0, d))
            alpha, beta = sample_inside(rng, lam[0], lam[-1])
            M = closed_loop_matrix(build_system(AlgorithmSpec.ag(alpha, beta), d), QuadraticSpectrum(tuple(lam)))
            # Intermediate eigenvalues never exceed the endpoint rates.
            assert quad.ag_rate(alpha, beta, lam[0], lam[-1]) == pytest.approx(
                spectral_radius(M), abs=1e-10)


class TestStabilityRegion:
    def test_gd_point_in_s1(self):
        v = quad.in_stability_region(1.0, 0.0, 0.1, 1.0)
        assert v.inside and v.region_label is quad.Region.S1

    def test_s3_exists_for_well_conditioned(self):
        v = quad.in_stability_region(1.6, 0.05, 0.7, 1.0)
        assert v.inside and v.region_label is quad.Region.S3
        assert quad.ag_rate(1.6, 0.05, 0.7, 1.0) < 1

    def test_s2_label(self):
        v = quad.in_stability_region(1.2, 0.1, 0.1, 1.0)
        assert v.inside and v.region_label is quad.Region.S2

    @pytest.mark.parametrize("beta", [0.0, 0.3, 1.0, 5.0])
    def test_large_stepsize_always_outside(self, beta):
        for mu in (0.1, 0.7, 1.0):
            v = quad.in_stability_region(2.0 / 1.0 + 1e-3, beta, mu, 1.0)
            assert not v.inside and v.region_label is quad.Region.OUTSIDE

    def test_boundary_is_outside(self):
        v = quad.in_stability_region(2.0, 0.0, 0.1, 1.0)
        assert not v.inside and v.margin == pytest.approx(0.0, abs=1e-15)
        v = quad.in_stability_region(0.0, 0.5, 0.1, 1.0)
        assert not v.inside

    def test_membership_matches_spectral_radius(self):
        rng = np.random.default_rng(5)
        for mu, L in ((0.7, 1.0), (0.1, 1.0), (1.0, 1.0), (0.3, 2.0)):
            for _ in range(2000):
                alpha, beta = rng.uniform(0, 2.5 / L), rng.uniform(0, 3)
                v = quad.in_stability_region(alpha, beta, mu, L)
                if abs(v.margin) <= 1e-8:
                    continue
                radius = max(ag_block_radius(alpha, beta, mu), ag_block_radius(alpha, beta, L))
                assert v.inside == (radius < 1), (alpha, beta, mu, L, v, radius)


class TestAGRobustness:
    def test_zero_momentum_term(self):
        for lam in (0.1, 0.5, 1.0):
            assert quad.ag_u(0.7, 0.0, lam) == pytest.approx(0.7 / (2 * (2 - 0.7 * lam)), rel=1e-14)
            assert quad.ag_u_iterates(0.7, 0.0, lam) == pytest.approx(0.7 / (lam * (2 - 0.7 * lam)))

    def test_cancelled_eigenvalue_term(self):
        for beta in (0.0, 0.3, 0.9, 4.0):
            assert quad.ag_u(0.5, beta, 2.0) == pytest.approx(0.25, rel=1e-14)

    def test_term_matches_block_h2(self):
        spec = AlgorithmSpec.ag(0.1, 0.9)
        s = QuadraticSpectrum((1.0,))
        assert quad.ag_u(0.1, 0.9, 1.0) == pytest.approx(robustness_h2(spec, s), rel=1e-12)
        assert quad.ag_u_iterates(0.1, 0.9, 1.0) == pytest.approx(robustness_h2(spec, s, "Jprime"), rel=1e-12)

    def test_iterate_relation(self):
        rng = np.random.default_rng(6)
        for _ in range(500):
            alpha, beta = sample_inside(rng, 0.1, 1.0)
            lam = rng.uniform(0.1, 1.0)
            assert quad.ag_u(alpha, beta, lam) == pytest.approx(
                lam / 2 * quad.ag_u_iterates(alpha, beta, lam), rel=1e-12)

    def test_reduces_to_gd(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            s = QuadraticSpectrum(tuple(rng.uniform(0.1, 1.0, int(rng.integers(1, 9)))))
            alpha = rng.uniform(0.01, 0.99) * 2 / s.L
            assert quad.ag_robustness(alpha, 0.0, s) == pytest.approx(quad.gd_robustness(alpha, s), rel=1e-12)
            assert quad.ag_robustness_iterates(alpha, 0.0, s) == pytest.approx(
                quad.gd_robustness_iterates(alpha, s), rel=1e-12)
        assert quad.ag_robustness(1.0, 0.0, QuadraticSpectrum((1.0,))) == pytest.approx(0.5)
        assert quad.ag_robustness_iterates(1.0, 0.0, QuadraticSpectrum((1.0,))) == pytest.approx(1.0)

    def test_matches_h2(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            d = int(rng.integers(1, 9))
            s = QuadraticSpectrum(tuple(rng.uniform(0.1, 1.0, d)))
            alpha, beta = sample_inside(rng, s.mu, s.L)
            spec = AlgorithmSpec.ag(alpha, beta)
            assert quad.ag_robustness(alpha, beta, s) == pytest.approx(robustness_h2(spec, s), rel=1e-9)
            assert quad.ag_robustness_iterates(alpha, beta, s) == pytest.approx(
                robustness_h2(spec, s, "Jprime"), rel=1e-9)

    def test_outside_region_rejected(self):
        with pytest.raises(InstabilityError) as info:
            quad.ag_robustness(1.9, 2.0, QuadraticSpectrum((0.1, 1.0)))
        assert info.value.code == "NOT_STABLE"

    def test_divergent_guard(self):
        # beta (1 - alpha lam) = 1 exactly.
        with pytest.raises(InstabilityError) as info:
            quad.ag_u(0.5, 2.0, 1.0)
        assert info.value.code == "DIVERGENT"

    def test_upper_bounds(self):
        rng = np.random.default_rng(9)
        mu, L, d = 0.1, 1.0, 100
        for _ in range(20):
            alpha, beta = sample_inside(rng, mu, L)
            upper = quad.ag_robustness_upper(alpha, beta, mu, L, d)
            worst = quad.ag_robustness_worst_case(alpha, beta, mu, L, d)
            for _ in range(5):
                lam = np.concatenate([[mu, L], rng.uniform(mu, L, d - 2)])
                exact = quad.ag_robustness(alpha, beta, QuadraticSpectrum(tuple(lam)))
                assert exact <= worst * (1 + 1e-12) <= upper * (1 + 1e-12)

    def test_upper_bound_tight_for_single_point(self):
        assert quad.ag_robustness_upper(0.5, 0.3, 1.0, 1.0, 1) == pytest.approx(
            quad.ag_robustness(0.5, 0.3, QuadraticSpectrum((1.0,))))

    def test_convexity_in_eigenvalue(self):
        rng = np.random.default_rng(10)
        for mu, L in ((0.1, 1.0), (0.7, 1.0)):
            grid = np.linspace(mu, L, 100)
            for _ in range(200):
                alpha, beta = sample_inside(rng, mu, L)
                u = quad.ag_u_array(alpha, beta, grid)
                second = u[2:] - 2 * u[1:-1] + u[:-2]
                assert second.min() >= -1e-8
