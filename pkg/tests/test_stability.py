"""Butcher tableaus and the growth-factor engine against its matrix oracle."""

import math
import warnings

import numpy as np
import pytest

import nonlocalwave as nlw
from nonlocalwave.errors import (
    NoImaginaryAxisStability,
    PoleOfStabilityFunction,
    TableauParseError,
    UnsupportedImplicit,
)
from nonlocalwave.stability import TraceClass


def random_explicit_tableau(rng, max_stages=6):
    s = int(rng.integers(1, max_stages + 1))
    g = np.tril(rng.standard_normal((s, s)), -1)
    w = rng.standard_normal(s)
    p = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, s - 1))])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return nlw.ButcherTableau(g, w, p, name="random")


class TestTableauParsing:
    def test_shipped_names(self):
        for name, stages, explicit in (
            ("forward-euler", 1, True),
            ("backward-euler", 1, False),
            ("crank-nicolson", 2, False),
            ("weighted-euler", 2, False),
            ("rk4", 4, True),
        ):
            t = nlw.load_tableau(name)
            assert t.stages == stages and t.explicit == explicit

    def test_rational_entries_exact(self):
        t = nlw.load_tableau("rk4")
        assert t.weights[0] == 1.0 / 6.0
        assert t.matrix[3, 2] == 1.0

    def test_parse_text(self):
        t = nlw.parse_tableau("2\n0 0 0\n1 0.5 0.5\n 1/2 1/2\n", name="cn-copy")
        cn = nlw.crank_nicolson()
        assert np.allclose(t.matrix, cn.matrix)
        assert np.allclose(t.weights, cn.weights)

    def test_parse_from_file(self, tmp_path):
        path = tmp_path / "euler.txt"
        path.write_text("# comment\n1\n0 0\n1\n")
        t = nlw.load_tableau(path)
        assert t.stages == 1 and t.explicit

    @pytest.mark.parametrize("text", [
        "", "x\n", "2\n0 0 0\n1 1/2 1/2\n", "1\n0 0 zz\n1\n", "1\n0 1/0\n1\n",
    ])
    def test_malformed_rejected(self, text):
        with pytest.raises(TableauParseError):
            nlw.parse_tableau(text)

    def test_inconsistent_weights_warn(self):
        with pytest.warns(UserWarning):
            nlw.ButcherTableau(np.zeros((1, 1)), np.array([0.9]), np.zeros(1))


class TestStabilityFunction:
    def test_forward_euler_is_one_plus_z(self):
        fe = nlw.forward_euler()
        for z in (0.2, -1.3 + 0.7j, 2j):
            assert nlw.stability_function(fe, z) == pytest.approx(1 + z, abs=1e-14)

    def test_rk4_is_quartic_truncation(self):
        rk4 = nlw.rk4()
        rng = np.random.default_rng(0)
        for _ in range(20):
            z = complex(rng.standard_normal(), rng.standard_normal())
            expected = 1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24
            assert abs(nlw.stability_function(rk4, z) - expected) <= 1e-12 * abs(expected)

    def test_crank_nicolson_rational(self):
        cn = nlw.crank_nicolson()
        for z in (0.5, 1.5j, -2.0 + 1.0j):
            expected = (1 + z / 2) / (1 - z / 2)
            assert abs(nlw.stability_function(cn, z) - expected) <= 1e-12

    def test_determinant_form_agrees(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            t = random_explicit_tableau(rng)
            for _ in range(100):
                z = complex(rng.standard_normal(), rng.standard_normal())
                a = nlw.stability_function(t, z)
                b = nlw.stability_function_det(t, z)
                assert abs(a - b) <= 1e-10 * max(1.0, abs(a))

    def test_pole_detected(self):
        be = nlw.backward_euler()
        with pytest.raises(PoleOfStabilityFunction):
            nlw.stability_function(be, 1.0)  # I - zG = 0 at z = 1


class TestGrowthFactor:
    def test_rk4_closed_form(self):
        rk4 = nlw.rk4()
        for z in np.linspace(0.0, 12.0, 49):
            expected = math.sqrt(z**4 / 576 - z**3 / 72 + 1)
            assert nlw.growth_factor_z(rk4, z) == pytest.approx(expected, abs=1e-12)
        assert nlw.growth_factor_z(rk4, 8.0) == pytest.approx(1.0, abs=1e-14)

    def test_weighted_euler_half_is_exactly_one(self):
        t = nlw.weighted_euler(0.5)
        for z in np.geomspace(1e-6, 1e6, 25):
            assert abs(nlw.growth_factor_z(t, z) - 1.0) <= 1e-14

    def test_weighted_euler_closed_form(self):
        for delta in (0.3, 0.7):
            t = nlw.weighted_euler(delta)
            for tau in (0.05, 0.4):
                for nu in (0.5, 20.0):
                    z = tau * tau * nu
                    expected = math.sqrt((1 + (1 - delta) ** 2 * z) / (1 + delta**2 * z))
                    q = nlw.GrowthQuery(tau, nu)
                    assert nlw.growth_factor(t, q) == pytest.approx(expected, rel=1e-13)

    def test_forward_euler_growth(self):
        fe = nlw.forward_euler()
        q = nlw.GrowthQuery(0.1, 4.0)
        assert nlw.growth_factor(fe, q) == pytest.approx(math.sqrt(1.04), rel=1e-14)

    def test_growth_equals_abs_f_on_imag_axis(self):
        rng = np.random.default_rng(2)
        for t in (nlw.rk4(), nlw.crank_nicolson(), nlw.weighted_euler(0.7),
                  random_explicit_tableau(rng)):
            for y in np.linspace(0.0, 3.0, 13):
                psi = nlw.growth_factor_z(t, y * y)
                assert psi == pytest.approx(abs(nlw.stability_function(t, 1j * y)),
                                            abs=1e-12)

    def test_psi_at_nu_zero_is_one(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            t = random_explicit_tableau(rng)
            assert nlw.growth_factor_z(t, 0.0) == 1.0


class TestBruteForceOracle:
    def test_forward_euler_matrix(self):
        m = nlw.brute_force_growth(nlw.forward_euler(), 0.1, 4.0)
        q = math.sqrt(4.0) * np.array([[0, 1.0], [-1.0, 0]])
        assert np.allclose(m, np.eye(2) + 0.1 * q, atol=1e-14)
        assert np.linalg.norm(m, 2) == pytest.approx(math.sqrt(1.04), rel=1e-13)

    def test_nu_zero_gives_identity(self):
        for t in (nlw.rk4(), nlw.crank_nicolson()):
            assert np.allclose(nlw.brute_force_growth(t, 0.3, 0.0), np.eye(2))

    def test_rk4_boundary_point(self):
        m = nlw.brute_force_growth(nlw.rk4(), 1.0, 8.0)
        assert np.linalg.norm(m, 2) == pytest.approx(1.0, abs=1e-13)

    def test_matrix_structure_and_norm_equality(self):
        # M = a I + b tau Q: skew off-diagonal, equal diagonal, and
        # spectral radius == l2 norm == growth factor
        rng = np.random.default_rng(4)
        for _ in range(50):
            t = random_explicit_tableau(rng)
            tau = float(rng.uniform(0.01, 1.0))
            nu = float(rng.uniform(0.0, 30.0))
            m = nlw.brute_force_growth(t, tau, nu)
            assert abs(m[0, 0] - m[1, 1]) <= 1e-12 * max(1, abs(m[0, 0]))
            assert abs(m[0, 1] + m[1, 0]) <= 1e-12 * max(1, abs(m[0, 1]))
            norm = np.linalg.norm(m, 2)
            radius = np.max(np.abs(np.linalg.eigvals(m)))
            psi = nlw.growth_factor(t, nlw.GrowthQuery(tau, nu))
            assert norm == pytest.approx(radius, rel=1e-10, abs=1e-12)
            assert norm == pytest.approx(psi, rel=1e-10, abs=1e-12)

    def test_implicit_tableaus_against_oracle(self):
        rng = np.random.default_rng(5)
        for t in (nlw.backward_euler(), nlw.crank_nicolson(),
                  nlw.weighted_euler(0.4), nlw.weighted_euler(0.8)):
            for _ in range(20):
                tau = float(rng.uniform(0.01, 0.8))
                nu = float(rng.uniform(0.0, 20.0))
                m = nlw.brute_force_growth(t, tau, nu)
                psi = nlw.growth_factor(t, nlw.GrowthQuery(tau, nu))
                assert np.linalg.norm(m, 2) == pytest.approx(psi, rel=1e-10)


class TestSmallStepExpansion:
    def test_leading_coefficient(self):
        # psi = 1 + (tr((G-ew^T)^2) - tr(G^2))/2 * tau^2 nu + O(tau^4 nu^2)
        rng = np.random.default_rng(6)
        for _ in range(10):
            t = random_explicit_tableau(rng)
            rep = nlw.classify(t)
            coeff = 0.5 * (rep.tr_gewt2 - rep.tr_g2)
            nu = 2.0
            est = []
            for tau in (1e-3, 5e-4):
                psi = nlw.growth_factor_z(t, tau * tau * nu)
                est.append((psi - 1.0) / (tau * tau * nu))
            # Richardson: the tau -> 0 limit of a + b tau^2 from two samples
            extrapolated = est[1] + (est[1] - est[0]) / 3.0
            assert extrapolated == pytest.approx(coeff, rel=1e-4, abs=1e-7)


class TestImagAxisExtent:
    def test_rk4_extent(self):
        assert nlw.imag_axis_extent(nlw.rk4()) == pytest.approx(math.sqrt(8.0), abs=1e-6)

    def test_forward_euler_extent_zero(self):
        assert nlw.imag_axis_extent(nlw.forward_euler()) == 0.0

    def test_crank_nicolson_unbounded(self):
        assert math.isinf(nlw.imag_axis_extent(nlw.crank_nicolson()))

    def test_weighted_euler_family(self):
        assert math.isinf(nlw.imag_axis_extent(nlw.weighted_euler(0.5)))
        assert math.isinf(nlw.imag_axis_extent(nlw.weighted_euler(0.7)))
        assert nlw.imag_axis_extent(nlw.weighted_euler(0.3)) == 0.0


class TestCflThreshold:
    def test_rk4_reference_value(self):
        h = 2 * math.pi / 128
        expected = math.sqrt(8 * h / (3 * math.pi))
        got = nlw.cfl_threshold(nlw.rk4(), 3.0, 1.0, h)
        assert got == pytest.approx(expected, rel=1e-6)
        assert got == pytest.approx(math.sqrt(1.0 / 24.0), rel=1e-6)

    def test_sqrt_scaling_in_h(self):
        t = nlw.rk4()
        a = nlw.cfl_threshold(t, 3.0, 1.0, 0.01)
        b = nlw.cfl_threshold(t, 3.0, 1.0, 0.04)
        assert b == pytest.approx(2 * a, rel=1e-12)

    def test_sqrt_scaling_in_epsilon(self):
        t = nlw.rk4()
        a = nlw.cfl_threshold(t, 3.0, 1.0, 0.01, epsilon=1.0)
        b = nlw.cfl_threshold(t, 3.0, 1.0, 0.01, epsilon=0.25)
        assert b == pytest.approx(a / 2, rel=1e-12)

    def test_no_axis_coverage_raises(self):
        with pytest.raises(NoImaginaryAxisStability):
            nlw.cfl_threshold(nlw.forward_euler(), 3.0, 1.0, 0.05)

    def test_unbounded_extent_gives_inf(self):
        assert math.isinf(nlw.cfl_threshold(nlw.crank_nicolson(), 3.0, 1.0, 0.05))


class TestClassify:
    def test_weighted_three_quarters_strong(self):
        rep = nlw.classify(nlw.weighted_euler(0.75))
        assert rep.classification is TraceClass.STRONG_AS_TAU_TO_0
        assert rep.tr_g2 == pytest.approx(9.0 / 16.0)
        assert rep.tr_gewt2 == pytest.approx(1.0 / 16.0)

    def test_forward_euler_weak(self):
        rep = nlw.classify(nlw.forward_euler())
        assert rep.classification is TraceClass.WEAK_AS_TAU_TO_0
        assert rep.tr_g2 == 0.0 and rep.tr_gewt2 == 1.0

    def test_rk4_weak_trace_but_axis_coverage(self):
        rep = nlw.classify(nlw.rk4())
        assert rep.classification is TraceClass.WEAK_AS_TAU_TO_0
        assert rep.imag_extent == pytest.approx(math.sqrt(8.0), abs=1e-6)
        assert rep.notes


class TestRkStep:
    def test_zero_rhs(self):
        y = np.array([1.0, -2.0])
        out = nlw.rk_step(nlw.rk4(), lambda t, yy: 0 * yy, y, 0.0, 0.3)
        assert np.array_equal(out, y)

    def test_scalar_euler(self):
        out = nlw.rk_step(nlw.forward_euler(), lambda t, yy: 0.7 * yy,
                          np.array([2.0]), 0.0, 0.1)
        assert out[0] == pytest.approx(2.0 * 1.07, rel=1e-15)

    def test_matches_growth_matrix_action(self):
        nu, tau = 5.0, 0.21
        q = math.sqrt(nu) * np.array([[0, 1.0], [-1.0, 0]])
        m = nlw.brute_force_growth(nlw.rk4(), tau, nu)
        y0 = np.array([0.3, -1.2])
        stepped = nlw.rk_step(nlw.rk4(), lambda t, yy: q @ yy, y0, 0.0, tau)
        assert np.max(np.abs(stepped - m @ y0)) <= 1e-13

    def test_implicit_needs_solver(self):
        with pytest.raises(UnsupportedImplicit):
            nlw.rk_step(nlw.backward_euler(), lambda t, yy: yy,
                        np.array([1.0]), 0.0, 0.1)

    def test_fixed_point_solver_backward_euler(self):
        solver = nlw.fixed_point_stage_solver()
        out = nlw.rk_step(nlw.backward_euler(), lambda t, yy: 0.3 * yy,
                          np.array([1.0 + 0j]), 0.0, 0.1, stage_solver=solver)
        assert out[0] == pytest.approx(1.0 / 0.97, rel=1e-12)
