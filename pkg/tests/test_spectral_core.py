"""Grid, field, multiplier-operator, norm, and filter behaviour."""

import math

import numpy as np
import pytest

import nonlocalwave as nlw
from nonlocalwave.errors import FilterValidationError, InvalidField, NormUndefined


def random_field(grid, rng, real=False):
    vals = rng.standard_normal(grid.n)
    if not real:
        vals = vals + 1j * rng.standard_normal(grid.n)
    return nlw.SpectralField(grid, vals)


class TestGridAndField:
    def test_grid_basics(self):
        g = nlw.Grid(16)
        assert g.spacing * g.n == pytest.approx(2 * np.pi, abs=1e-15)
        assert g.modes.min() == -7 and g.modes.max() == 8
        assert np.max(np.abs(g.xi)) == pytest.approx(np.pi)

    def test_unit_period_grid(self):
        g = nlw.Grid(8, 1.0)
        assert g.kappa[1] == pytest.approx(2 * np.pi)
        assert g.xi[1] == pytest.approx(np.pi / 4)

    def test_odd_count_rejected(self):
        with pytest.raises(ValueError):
            nlw.Grid(15)

    @pytest.mark.parametrize("n", [16, 64, 256])
    def test_roundtrip(self, n):
        rng = np.random.default_rng(n)
        g = nlw.Grid(n)
        f = random_field(g, rng)
        back = nlw.SpectralField.from_spectrum(g, f.spectrum)
        rel = np.linalg.norm(back.samples - f.samples) / np.linalg.norm(f.samples)
        assert rel <= 1e-12

    @pytest.mark.parametrize("n", [16, 64, 256])
    def test_parseval_100_random_pairs(self, n):
        rng = np.random.default_rng(n + 1)
        g = nlw.Grid(n)
        for _ in range(100):
            f, grid_g = random_field(g, rng), random_field(g, rng)
            lhs = nlw.inner(f, grid_g)
            rhs = g.length * np.sum(f.spectrum * np.conj(grid_g.spectrum))
            assert abs(lhs - rhs) <= 1e-12 * abs(lhs)

    def test_samples_immutable(self):
        g = nlw.Grid(8)
        f = nlw.SpectralField(g, np.ones(8))
        with pytest.raises(ValueError):
            f.samples[0] = 2.0


class TestMultipliers:
    def setup_method(self):
        self.g = nlw.Grid(32)
        self.theta = self.g.nodes

    def test_identity_symbol(self):
        f = nlw.SpectralField(self.g, np.sin(self.theta) + 2.0)
        out = nlw.apply_symbol(f, lambda k: np.ones(len(k)))
        assert np.allclose(out.samples, f.samples, atol=1e-14)

    def test_derivative_of_cos(self):
        f = nlw.SpectralField(self.g, np.cos(self.theta))
        assert np.allclose(nlw.derivative(f).samples, -np.sin(self.theta), atol=1e-13)

    def test_laplacian_eigenfunction(self):
        f = nlw.SpectralField(self.g, np.cos(3 * self.theta))
        out = nlw.fractional_laplacian(f)
        assert np.allclose(out.samples, 3 * np.cos(3 * self.theta), atol=1e-12)

    def test_hilbert_of_cos(self):
        f = nlw.SpectralField(self.g, np.cos(self.theta))
        assert np.allclose(nlw.hilbert(f).samples, np.sin(self.theta), atol=1e-13)

    def test_hilbert_of_constant(self):
        f = nlw.SpectralField(self.g, np.full(self.g.n, 5.0))
        assert np.max(np.abs(nlw.hilbert(f).samples)) == 0.0

    def test_hilbert_of_sin2(self):
        # both modes of sin(2 theta) by hand: -i sgn(k) flips it to -cos(2 theta)
        f = nlw.SpectralField(self.g, np.sin(2 * self.theta))
        assert np.allclose(nlw.hilbert(f).samples, -np.cos(2 * self.theta), atol=1e-13)

    def test_nonfinite_rejected(self):
        bad = np.ones(self.g.n)
        bad[3] = np.nan
        f = nlw.SpectralField(self.g, bad)
        with pytest.raises(InvalidField):
            nlw.derivative(f)

    def test_hilbert_squared_is_minus_identity_plus_mean(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            f = random_field(self.g, rng)
            hh = nlw.hilbert(nlw.hilbert(f))
            mean = np.mean(f.samples)
            assert np.allclose(hh.samples, -f.samples + mean, atol=1e-12)

    def test_laplacian_equals_derivative_of_hilbert(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            f = random_field(self.g, rng)
            a = nlw.fractional_laplacian(f).samples
            b = nlw.derivative(nlw.hilbert(f)).samples
            assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(a))

    def test_filtered_laplacian_kills_highest_mode(self):
        # coefficient at the top mode is n/2 * rho(pi) = n/2 * exp(-10)
        g = nlw.Grid(64)
        f = nlw.SpectralField(g, np.cos(g.n // 2 * g.nodes))
        filt = nlw.wave_filter()
        out = nlw.fractional_laplacian(f, filt)
        bound = (g.n / 2) * math.exp(-10.0) * (1 + 1e-12)
        assert np.max(np.abs(out.samples)) <= bound
        assert np.max(np.abs(out.samples)) <= 2.3e-5 * g.n

    def test_integration_by_parts_all_three(self):
        # filtered derivative and Hilbert antisymmetric, filtered Laplacian symmetric
        rng = np.random.default_rng(7)
        filt = nlw.wave_filter()
        for _ in range(10):
            f, g = random_field(self.g, rng), random_field(self.g, rng)
            lhs = nlw.inner(f, nlw.derivative(g, filt))
            rhs = -nlw.inner(nlw.derivative(f, filt), g)
            assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)
            lhs = nlw.inner(f, nlw.hilbert(g))
            rhs = -nlw.inner(nlw.hilbert(f), g)
            assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)
            lhs = nlw.inner(f, nlw.fractional_laplacian(g, filt))
            rhs = nlw.inner(nlw.fractional_laplacian(f, filt), g)
            assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


class TestNorms:
    def test_constant_field(self):
        g = nlw.Grid(32)
        one = nlw.SpectralField(g, np.ones(32))
        assert nlw.inner(one, one) == pytest.approx(2 * np.pi, rel=1e-14)
        assert nlw.l2_norm(one) == pytest.approx(math.sqrt(2 * np.pi), rel=1e-14)

    def test_h_half_of_cos(self):
        # two modes at +-1, each weight (1+1)*|1/2|^2, times the 2 pi factor
        g = nlw.Grid(32)
        f = nlw.SpectralField(g, np.cos(g.nodes))
        assert nlw.h_half_norm(f) ** 2 == pytest.approx(2 * np.pi, rel=1e-13)

    def test_h1_definition(self):
        g = nlw.Grid(32)
        rng = np.random.default_rng(8)
        f = random_field(g, rng)
        filt = nlw.sinc_filter()
        expected = math.sqrt(nlw.l2_norm(f) ** 2 + nlw.l2_norm(nlw.derivative(f, filt)) ** 2)
        assert nlw.h1_norm(f, filt) == pytest.approx(expected, rel=1e-14)

    def test_q_norm_of_single_mode(self):
        g = nlw.Grid(32)
        f = nlw.SpectralField(g, np.cos(2 * g.nodes))
        # modes +-2 with |coeff|^2 = 1/4 and weight 1/|k| = 1/2
        assert nlw.q_norm(f) ** 2 == pytest.approx(2 * np.pi * 2 * 0.25 * 0.5, rel=1e-13)

    def test_q_norm_rejects_mean(self):
        g = nlw.Grid(32)
        f = nlw.SpectralField(g, 1.0 + np.cos(g.nodes))
        with pytest.raises(NormUndefined):
            nlw.q_norm(f)

    def test_q_norm_rejects_filtered_out_mode(self):
        g = nlw.Grid(32)
        f = nlw.SpectralField(g, np.cos(g.n // 2 * g.nodes))
        filt = nlw.sinc_filter()  # rho(pi) = 0 kills the occupied top mode
        with pytest.raises(NormUndefined):
            nlw.q_norm(f, filt)

    def test_norms_and_inner_bundle(self):
        g = nlw.Grid(32)
        rng = np.random.default_rng(9)
        f, h = random_field(g, rng), random_field(g, rng)
        out = nlw.norms_and_inner(f, h)
        assert out["l2"] == pytest.approx(nlw.l2_norm(f))
        assert out["inner"] == nlw.inner(f, h)
        assert out["q_norm"] is None  # random field has a mean


class TestFilters:
    def test_shipped_filters_validate(self):
        for filt in (nlw.identity_filter(), nlw.wave_filter(), nlw.sinc_filter(),
                     nlw.sharp_filter()):
            filt.validate()

    def test_wave_filter_endpoint_values(self):
        filt = nlw.wave_filter()
        assert filt.endpoint_value() == pytest.approx(math.exp(-10.0), rel=1e-12)
        # small but not zero at the strict tolerance, so the flags are off
        assert not filt.endpoint_zero and not filt.endpoint_flat

    def test_sharp_filter_flags(self):
        filt = nlw.sharp_filter()
        assert filt.endpoint_zero and filt.endpoint_flat

    def test_sinc_filter_flags(self):
        filt = nlw.sinc_filter()
        assert filt.endpoint_zero and not filt.endpoint_flat

    def test_bad_declared_order_fails(self):
        filt = nlw.Filter.from_symbol(lambda xi: np.sinc(np.asarray(xi) / np.pi),
                                      order=6, name="overclaimed")
        with pytest.raises(FilterValidationError):
            filt.validate()

    def test_negative_symbol_fails(self):
        filt = nlw.Filter.from_symbol(lambda xi: np.cos(xi), order=2, name="cosine")
        with pytest.raises(FilterValidationError):
            filt.validate()

    @pytest.mark.parametrize("filt,expected_order", [
        (nlw.sinc_filter(), 2),
        (nlw.exponential_filter(10.0, 4), 4),
    ])
    def test_filtered_differentiation_order(self, filt, expected_order):
        # error of the filtered derivative on a smooth function decays like h^r
        errs, hs = [], []
        for n in (32, 64, 128, 256, 512):
            g = nlw.Grid(n)
            f = nlw.SpectralField(g, np.exp(np.sin(g.nodes)))
            exact = np.cos(g.nodes) * np.exp(np.sin(g.nodes))
            err = np.max(np.abs(nlw.derivative(f, filt).samples - exact))
            if 1e-12 < err < 1e-1:
                errs.append(err)
                hs.append(g.spacing)
        assert len(errs) >= 3
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert slope >= expected_order - 0.3


class TestCommutatorDiagnostic:
    def test_constant_multiplier_commutes(self):
        g = nlw.Grid(64)
        out = nlw.commutator_smoothing_diag(lambda th: np.full_like(th, 2.5),
                                            g, nlw.wave_filter(), trials=4)
        assert out <= 1e-12

    def test_bounded_with_endpoint_damped_filter(self):
        filt = nlw.wave_filter()
        vals = [nlw.commutator_smoothing_diag(lambda th: np.exp(np.cos(th)),
                                              nlw.Grid(n), filt, trials=6, seed=0)
                for n in (64, 128, 256, 512)]
        for prev, cur in zip(vals, vals[1:]):
            assert cur <= 1.5 * prev

    def test_unbounded_without_filter(self):
        # rough data near the top mode picks up a full factor of |kappa|;
        # growth across three doublings is ~sqrt(8)
        filt = nlw.identity_filter()
        vals = [nlw.commutator_smoothing_diag(np.cos, nlw.Grid(n), filt,
                                              trials=6, seed=0)
                for n in (64, 128, 256, 512)]
        assert vals[-1] >= 2.0 * vals[0]
