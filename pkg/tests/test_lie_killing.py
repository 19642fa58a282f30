"""Lie derivatives, the three Killing characterisations, and the solver."""

import pytest
import sympy as sp

from supergeo import Chart
from supergeo.errors import UnsupportedMetric
from supergeo.geometry import BilinearForm, OneForm, VectorField, flat_metric
from supergeo.lie import (
    KillingChecker,
    killing_check,
    lie_derivative_bilinear,
    lie_derivative_function,
    lie_derivative_oneform,
    solve_killing,
)

from conftest import random_field, random_superfunction, seeded

x, y = sp.symbols("x y")


class TestLieDerivativeFunction:
    def test_classical(self, chart_classical):
        ch = chart_classical
        assert lie_derivative_function(
            ch.coordinate_field(0), ch.pool.scalar(x**2)
        ) == ch.pool.scalar(2 * x)

    def test_odd(self, chart_flat22):
        ch = chart_flat22
        assert lie_derivative_function(
            ch.coordinate_field(2), ch.pool.odd("th1")
        ) == ch.pool.one()

    def test_odd_coefficient(self, chart_flat22):
        ch = chart_flat22
        X = VectorField(ch, [ch.pool.odd("th1"), 0, 0, 0], 1)
        assert lie_derivative_function(X, ch.pool.even("x")) == ch.pool.odd("th1")


class TestLieDerivativeOneForm:
    def test_constant_form_constant_field(self, chart_classical):
        ch = chart_classical
        F = OneForm.differential(ch, ch.pool.even("x"))
        assert lie_derivative_oneform(ch.coordinate_field(0), F).is_zero()

    def test_euler_field_scales_dx(self, chart_classical):
        ch = chart_classical
        X = VectorField(ch, [ch.pool.even("x"), 0], 0)
        F = OneForm.differential(ch, ch.pool.even("x"))
        got = lie_derivative_oneform(X, F)
        assert got.components[0] == ch.pool.one()
        assert got.components[1].is_zero()

    def test_constant_odd_direction(self):
        ch = Chart([], ["th1", "th2"], box={})
        F = OneForm.differential(ch, ch.pool.odd("th1"))
        got = lie_derivative_oneform(ch.coordinate_field(0), F)
        assert got.is_zero()

    def test_reproduces_second_derivative_display(self, chart_deformed):
        """L_X df[Y] = (-1)^{|Y|(|f|+|X|)} Y(X(f)) on all coordinate fields."""
        ch = chart_deformed
        rng = seeded(401)
        for _ in range(12):
            fp, xp = rng.randint(0, 1), rng.randint(0, 1)
            f = random_superfunction(ch.pool, rng, fp)
            X = random_field(ch, rng, xp)
            LF = lie_derivative_oneform(X, OneForm.differential(ch, f))
            for j in range(ch.dim):
                sign = -1 if (ch.parity(j) * (fp + xp)) % 2 else 1
                want = ch.coordinate_field(j).apply(X.apply(f)) * sign
                assert (LF.components[j] - want).is_zero()


class TestLieDerivativeBilinear:
    def test_flat_translation(self, metric_flat22):
        ch = metric_flat22.chart
        assert lie_derivative_bilinear(ch.coordinate_field(0), metric_flat22).is_zero()

    def test_euler_conformal_factor(self, chart_classical):
        ch = chart_classical
        g = BilinearForm(ch, [[1, 0], [0, 0]])
        X = VectorField(ch, [ch.pool.even("x"), 0], 0)
        got = lie_derivative_bilinear(X, g)
        assert got.components[0][0] == ch.pool.scalar(2)

    def test_rotation_kills_euclidean(self, chart_classical):
        ch = chart_classical
        g = flat_metric(ch)
        rot = VectorField(ch, [-ch.pool.even("y"), ch.pool.even("x")], 0)
        assert lie_derivative_bilinear(rot, g).is_zero()

    def test_result_supersymmetric_and_even(self, metric_deformed):
        ch = metric_deformed.chart
        rng = seeded(402)
        for _ in range(6):
            X = random_field(ch, rng, 0)
            got = lie_derivative_bilinear(X, metric_deformed)
            assert got.is_supersymmetric()
            assert got.is_even_graded()

    def test_display_holds_on_noncoordinate_arguments(self, metric_deformed):
        """The component table must reproduce the defining display for
        arbitrary vector fields, not only coordinates."""
        ch = metric_deformed.chart
        B = metric_deformed
        rng = seeded(403)
        for _ in range(6):
            xp = rng.randint(0, 1)
            X = random_field(ch, rng, xp)
            Y = random_field(ch, rng, rng.randint(0, 1))
            Z = random_field(ch, rng, rng.randint(0, 1))
            table = lie_derivative_bilinear(X, B)
            lhs = table.evaluate(Y, Z)
            sign = -1 if (xp * Y.parity) % 2 else 1
            rhs = (
                X.apply(B.evaluate(Y, Z))
                - B.evaluate(X.bracket(Y), Z)
                - B.evaluate(Y, X.bracket(Z)) * sign
            )
            assert (lhs - rhs).is_zero()


class TestKillingCheck:
    def test_translations_pass_all_modes(self, metric_flat22):
        checker = KillingChecker(metric_flat22)
        for i in range(metric_flat22.chart.dim):
            X = metric_flat22.chart.coordinate_field(i)
            report = checker.check(X, "all")
            assert report.passed and report.agreement

    def test_euler_field_fails_with_residual(self, metric_flat22):
        ch = metric_flat22.chart
        X = VectorField(ch, [ch.pool.even("x"), 0, 0, 0], 0)
        report = killing_check(X, metric_flat22, "all")
        assert not report.passed
        assert report.agreement
        res = report.modes["i"].residuals
        assert any(r == ch.pool.scalar(2) for r in res)

    def test_rotation_passes(self, chart_classical):
        g = flat_metric(chart_classical)
        rot = VectorField(
            chart_classical, [-chart_classical.pool.even("y"),
                              chart_classical.pool.even("x")], 0
        )
        report = killing_check(rot, g, "all")
        assert report.passed and report.agreement

    def test_mode_agreement_random_fields(self, metric_flat22, metric_curved,
                                          metric_deformed):
        rng = seeded(404)
        for g in (metric_flat22, metric_curved, metric_deformed):
            checker = KillingChecker(g)
            for _ in range(6):
                X = random_field(g.chart, rng, rng.randint(0, 1),
                                 allow_flesh=False)
                report = checker.check(X, "all")
                assert report.agreement, (g, X)


class TestSolveKilling:
    def test_euclidean_plane(self, chart_classical):
        g = flat_metric(chart_classical)
        basis = solve_killing(g, 1)
        assert basis.dims == (3, 0)

    def test_purely_odd(self):
        ch = Chart([], ["th1", "th2"], box={})
        basis = solve_killing(flat_metric(ch), 1)
        assert basis.dims == (3, 2)

    def test_flat_22(self, metric_flat22):
        basis = solve_killing(metric_flat22, 1)
        assert basis.dims == (6, 6)

    def test_every_element_passes_mode_i(self, metric_flat22):
        basis = solve_killing(metric_flat22, 1)
        checker = KillingChecker(metric_flat22)
        for X in basis.fields:
            assert checker.check(X, "i").passed

    def test_closed_under_bracket(self, metric_flat22):
        basis = solve_killing(metric_flat22, 1)
        checker = KillingChecker(metric_flat22)
        for X in basis.fields:
            for Y in basis.fields:
                assert checker.check(X.bracket(Y), "i").passed

    def test_curved_metric_killing_algebra(self, metric_curved):
        # dx^2 + x^2 dy^2 admits d_y at degree <= 1 (plus no others)
        basis = solve_killing(metric_curved, 1)
        assert basis.dims == (1, 0)
        assert basis.fields[0] == metric_curved.chart.coordinate_field(1)

    def test_rational_metric_rejected(self, chart_classical):
        ch = chart_classical
        g = BilinearForm(ch, [[ch.pool.scalar(1 / x), 0], [0, 1]])
        with pytest.raises(UnsupportedMetric):
            solve_killing(g, 1)

    def test_deformed_metric_solver_consistent(self, metric_deformed):
        basis = solve_killing(metric_deformed, 1)
        checker = KillingChecker(metric_deformed)
        for X in basis.fields:
            rep = checker.check(X, "all")
            assert rep.passed and rep.agreement

    def test_negative_degree_rejected(self, metric_flat22):
        with pytest.raises(ValueError):
            solve_killing(metric_flat22, -1)


class TestIndefiniteSignature:
    @pytest.fixture
    def minkowski_super(self):
        ch = Chart(["x", "y"], ["th1", "th2"], box={"x": (0, 1), "y": (0, 1)})
        g = BilinearForm(
            ch, [[-1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]
        )
        return g

    def test_signature(self, minkowski_super):
        from supergeo.geometry import validate_metric

        assert validate_metric(minkowski_super).as_tuple() == (1, 1, 2)

    def test_boost_is_killing_all_modes(self, minkowski_super):
        ch = minkowski_super.chart
        p = ch.pool
        boost = VectorField(ch, [p.even("y"), p.even("x"), 0, 0], 0)
        rep = killing_check(boost, minkowski_super, "all")
        assert rep.passed and rep.agreement

    def test_solver_dims_match_osp_formula(self, minkowski_super):
        # even: (t+s)(t+s-1)/2 + m(2m+1) + translations = 1 + 3 + 2
        # odd:  (t+s)2m + odd translations = 4 + 2
        basis = solve_killing(minkowski_super, 1)
        assert basis.dims == (6, 6)
