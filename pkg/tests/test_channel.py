import math

import numpy as np
import pytest
from scipy import integrate, stats

from uavqkd.channel import (
    PLANCK_H,
    SPEED_OF_LIGHT,
    BackgroundModel,
    ChannelParams,
    FovModel,
    PointingModel,
    atm_transmittance,
    background_mean,
    fov_accept_prob,
    fov_geometry,
    gg_cdf,
    gg_cdf_interpolator,
    gg_pdf,
    gg_sample,
    rayleigh_pdf,
    solid_angle,
)

ALPHA, BETA = 2.1, 1.8


class TestAtmTransmittance:
    def test_lossless_limit(self):
        assert atm_transmittance(0.0, 1234.5) == 1.0

    def test_reference_transmittance(self):
        # exponent solved so that exp(-alpha_a * Lz) lands on 0.4
        alpha_a = math.log(2.5) / 1000.0
        assert atm_transmittance(alpha_a, 1000.0) == pytest.approx(0.4, rel=1e-14)

    def test_unit_exponent(self):
        assert atm_transmittance(1e-3, 1000.0) == pytest.approx(math.exp(-1.0), rel=1e-14)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            atm_transmittance(-1e-3, 1000.0)
        with pytest.raises(ValueError):
            atm_transmittance(1e-3, 0.0)


class TestGammaGammaPdf:
    def test_unit_mass(self):
        mass, _ = integrate.quad(gg_pdf, 0, np.inf, args=(ALPHA, BETA), limit=200)
        assert mass == pytest.approx(1.0, abs=1e-6)

    def test_unit_mean(self):
        mean, _ = integrate.quad(
            lambda e: e * gg_pdf(e, ALPHA, BETA), 0, np.inf, limit=200
        )
        assert mean == pytest.approx(1.0, abs=1e-4)

    def test_parameter_swap_symmetry(self):
        eta = np.geomspace(1e-3, 10.0, 30)
        np.testing.assert_allclose(gg_pdf(eta, ALPHA, BETA), gg_pdf(eta, BETA, ALPHA), rtol=1e-12)

    def test_valid_density_over_parameter_grid(self):
        for a in (1.1, 3.0, 8.0):
            for b in (1.1, 3.0, 8.0):
                eta = np.geomspace(1e-4, 20.0, 50)
                assert np.all(gg_pdf(eta, a, b) >= 0.0)
                mass, _ = integrate.quad(gg_pdf, 0, np.inf, args=(a, b), limit=200)
                assert mass == pytest.approx(1.0, abs=1e-6)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            gg_pdf(0.0, ALPHA, BETA)
        with pytest.raises(ValueError):
            gg_pdf(1.0, -1.0, BETA)

    def test_second_moment_matches_product_formula(self):
        m2, _ = integrate.quad(
            lambda e: e * e * gg_pdf(e, ALPHA, BETA), 0, np.inf, limit=200
        )
        expected = (1.0 + 1.0 / ALPHA) * (1.0 + 1.0 / BETA)
        assert m2 == pytest.approx(expected, abs=1e-4)


class TestGammaGammaCdf:
    def test_matches_pdf_integral(self):
        for eta in (0.2, 1.0, 3.0):
            ref, _ = integrate.quad(gg_pdf, 0, eta, args=(ALPHA, BETA), limit=200)
            assert gg_cdf(eta, ALPHA, BETA) == pytest.approx(ref, abs=1e-7)

    def test_limits_and_monotonicity(self):
        assert gg_cdf(0.0, ALPHA, BETA) == 0.0
        grid = np.geomspace(1e-3, 30.0, 25)
        vals = [gg_cdf(g, ALPHA, BETA) for g in grid]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert vals[-1] > 0.9999

    def test_interpolator_accuracy(self):
        interp = gg_cdf_interpolator(ALPHA, BETA, 1e-3, 30.0, n=400)
        for eta in (0.05, 0.5, 1.5, 8.0):
            assert float(interp(eta)) == pytest.approx(gg_cdf(eta, ALPHA, BETA), abs=1e-5)


class TestGammaGammaSampling:
    def test_moments_within_3se(self):
        rng = np.random.default_rng(99)
        n = 1_000_000
        draws = gg_sample(rng, ALPHA, BETA, n)
        var_expected = (1.0 + 1.0 / ALPHA) * (1.0 + 1.0 / BETA) - 1.0
        se_mean = draws.std(ddof=1) / math.sqrt(n)
        assert abs(draws.mean() - 1.0) < 3.0 * se_mean
        sample_var = draws.var(ddof=1)
        centered = (draws - draws.mean()) ** 2
        se_var = centered.std(ddof=1) / math.sqrt(n)
        assert abs(sample_var - var_expected) < 3.0 * se_var

    def test_ks_against_quadrature_cdf(self):
        rng = np.random.default_rng(7)
        draws = gg_sample(rng, ALPHA, BETA, 100_000)
        interp = gg_cdf_interpolator(ALPHA, BETA, draws.min() / 2.0, draws.max() * 1.1, n=600)
        res = stats.kstest(draws, lambda x: np.clip(interp(x), 0.0, 1.0))
        assert res.pvalue > 0.01

    def test_domain_errors(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            gg_sample(rng, 0.0, BETA)


class TestRayleigh:
    def test_unit_mass(self):
        mass, _ = integrate.quad(rayleigh_pdf, 0, np.inf, args=(0.05,), limit=200)
        assert mass == pytest.approx(1.0, abs=1e-9)

    def test_sigma_rd_product(self):
        assert PointingModel(sigma_theta_e=100e-6, Lz=1000.0).sigma_rd == pytest.approx(0.1)

    def test_two_axis_sampling_matches_pdf(self):
        pointing = PointingModel(sigma_theta_e=50e-6, Lz=1000.0)
        rng = np.random.default_rng(17)
        draws = pointing.sample_displacement(rng, 100_000)
        res = stats.kstest(draws, stats.rayleigh(scale=pointing.sigma_rd).cdf)
        assert res.pvalue > 0.01

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            rayleigh_pdf(0.1, 0.0)
        with pytest.raises(ValueError):
            rayleigh_pdf(-0.1, 1.0)


class TestFov:
    def test_matched_scales(self):
        assert fov_accept_prob(5e-5, 5e-5) == pytest.approx(1.0 - math.exp(-0.5), rel=1e-12)

    def test_wide_open_limit(self):
        assert fov_accept_prob(1.0, 5e-5) == pytest.approx(1.0)

    def test_monotone_in_both_arguments(self):
        thetas = np.linspace(1e-5, 3e-4, 20)
        accept = [fov_accept_prob(t, 5e-5) for t in thetas]
        assert all(b > a for a, b in zip(accept, accept[1:]))
        sigmas = np.linspace(1e-5, 3e-4, 20)
        accept = [fov_accept_prob(1e-4, s) for s in sigmas]
        assert all(b < a for a, b in zip(accept, accept[1:]))

    def test_geometry_from_optics(self):
        theta, omega = fov_geometry(5e-6, 0.15)
        assert theta == pytest.approx(33.333e-6, rel=1e-3)
        assert omega == pytest.approx(solid_angle(theta), rel=1e-12)

    def test_degenerate_core(self):
        theta, omega = fov_geometry(0.0, 0.15)
        assert theta == 0.0 and omega == 0.0

    def test_model_consistency(self):
        model = FovModel.from_optics(5e-6, 0.15, 50e-6)
        assert model.theta_fov == pytest.approx(math.atan2(5e-6, 0.15), rel=1e-12)
        assert model.omega_fov == pytest.approx(
            2.0 * math.pi * (1.0 - math.cos(model.theta_fov)), rel=1e-12
        )
        assert model.accept_prob == pytest.approx(
            fov_accept_prob(model.theta_fov, 50e-6), rel=1e-12
        )

    def test_acceptance_sampling_matches_closed_form(self):
        model = FovModel(theta_fov=1e-4, sigma_aoa=50e-6)
        rng = np.random.default_rng(5)
        hits = model.sample_accept(rng, 200_000).mean()
        se = math.sqrt(model.accept_prob * (1.0 - model.accept_prob) / 200_000)
        assert abs(hits - model.accept_prob) < 3.0 * se


class TestBackground:
    A_R = math.pi * 0.15**2

    def test_dark_limit(self):
        assert background_mean(0.0, self.A_R, 1e-8, 1.0, 1e-8, 1.55e-6) == 0.0

    def test_reference_photon_energy(self):
        assert PLANCK_H * SPEED_OF_LIGHT / 1.55e-6 == pytest.approx(1.2817e-19, rel=1e-4)

    def test_reference_mu_b(self):
        omega = solid_angle(100e-6)
        mu_b = background_mean(1e-6, self.A_R, omega, 1.0, 1e-8, 1.55e-6)
        # hand recomputation: 1e-6 * pi*0.0225 * 2pi(1-cos 1e-4) * 1 * 1e-8 / 1.28166e-19
        assert mu_b == pytest.approx(1.73e-4, rel=1e-2)
        assert mu_b == pytest.approx(1.7327552631619765e-4, rel=1e-12)

    def test_hbar_mode_is_2pi_larger(self):
        omega = solid_angle(100e-6)
        base = background_mean(1e-6, self.A_R, omega, 1.0, 1e-8, 1.55e-6, "planck_h")
        alt = background_mean(1e-6, self.A_R, omega, 1.0, 1e-8, 1.55e-6, "planck_hbar")
        assert alt == pytest.approx(2.0 * math.pi * base, rel=1e-12)

    def test_linearity_in_each_factor(self):
        args = dict(
            B_lambda=1e-6,
            A_r=self.A_R,
            omega_fov=solid_angle(1e-4),
            delta_lambda_nm=1.0,
            T_qs=1e-8,
            wavelength=1.55e-6,
        )
        base = background_mean(**args)
        for key in ("B_lambda", "A_r", "omega_fov", "delta_lambda_nm", "T_qs"):
            doubled = dict(args)
            doubled[key] = 2.0 * args[key]
            assert background_mean(**doubled) == pytest.approx(2.0 * base, rel=1e-12)

    def test_unknown_convention(self):
        with pytest.raises(ValueError):
            background_mean(1e-6, 1.0, 1e-8, 1.0, 1e-8, 1.55e-6, "joules")

    def test_model_wrapper(self):
        model = BackgroundModel(
            A_r=self.A_R,
            omega_fov=solid_angle(100e-6),
            delta_lambda_nm=1.0,
            T_qs=1e-8,
            wavelength=1.55e-6,
            B_lambda=1e-6,
        )
        assert model.mu_b == pytest.approx(1.7327552631619765e-4, rel=1e-12)


class TestChannelParams:
    def test_requires_one_transmittance_source(self):
        with pytest.raises(ValueError):
            ChannelParams(alpha=ALPHA, beta=BETA, B_lambda=1e-6)

    def test_direct_value_wins(self):
        params = ChannelParams(
            alpha=ALPHA, beta=BETA, B_lambda=1e-6, eta_atm=0.4, alpha_a=1e-2
        )
        assert params.transmittance(1000.0) == 0.4

    def test_derived_transmittance(self):
        params = ChannelParams(
            alpha=ALPHA, beta=BETA, B_lambda=1e-6, alpha_a=math.log(2.5) / 1000.0
        )
        assert params.transmittance(1000.0) == pytest.approx(0.4, rel=1e-12)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            ChannelParams(alpha=ALPHA, beta=BETA, B_lambda=1e-6, eta_atm=1.5)
        with pytest.raises(ValueError):
            ChannelParams(alpha=-1.0, beta=BETA, B_lambda=1e-6, eta_atm=0.4)
