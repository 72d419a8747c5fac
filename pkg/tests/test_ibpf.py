import math

import numpy as np
import pytest

from besselbridges import ibpf, laws, renorm, sampler
from besselbridges.measures import BumpH, FiniteMeasure, PolyH

POLY = PolyH()
BUMP = BumpH((0.2, 0.8))
ONE = laws.ExpFunctional.one()
HALF_LEB = laws.ExpFunctional.single(FiniteMeasure.lebesgue(0.5), label="halfleb")
ATOM = laws.ExpFunctional.single(FiniteMeasure.atom(0.5, 1.0), label="atom")
TWO_TERM = laws.ExpFunctional(
    [(0.75, FiniteMeasure.lebesgue(0.5)),
     (0.25, FiniteMeasure.atom(0.5, 1.0) + FiniteMeasure.indicator(0.25, 0.75, 1.0))],
    label="twoterm")

FUNCTIONALS = [ONE, HALF_LEB, ATOM, TWO_TERM]
STREAM = sampler.RngStream(77177)


class TestLhsClosed:
    def test_beta_integral_values(self):
        # int r^2(1-r)^2 (r(1-r))^{-3/2} dr = B(3/2, 3/2) = pi/8
        assert ibpf.lhs_closed(3.0, ONE, POLY) == pytest.approx(
            -(1.0 / math.sqrt(2.0 * math.pi)) * math.pi / 8.0, abs=1e-10)
        assert ibpf.lhs_closed(1.0, ONE, POLY) == pytest.approx(
            -(1.0 / (2.0 ** 1.5 * math.sqrt(math.pi))) * math.pi / 8.0,
            abs=1e-10)

    def test_matches_sigma_route_at_three(self):
        val = ibpf.lhs_closed(3.0, ONE, POLY)
        from besselbridges.quadrature import integrate_unit_interval
        direct = -0.5 * integrate_unit_interval(
            lambda r: POLY.value(r) * laws.sigma_eval(3.0, ONE, r, 0.0))
        assert val == pytest.approx(direct, abs=1e-12)


class TestDeterministicRoutes:
    @pytest.mark.parametrize("delta", [0.5, 1.1, 2.0, 2.9, 3.5, 5.0])
    def test_quadrature_route_smoke(self, delta):
        for phi in (ONE, TWO_TERM):
            base = ibpf.lhs_closed(delta, phi, BUMP)
            assert ibpf.rhs_quadrature(delta, phi, BUMP) == pytest.approx(
                base, abs=1e-9)

    @pytest.mark.parametrize("delta", [0.5, 0.9, 1.1, 2.5, 2.9, 3.1, 3.5, 5.0])
    def test_unified_route_smoke(self, delta):
        for phi in (HALF_LEB, ATOM):
            base = ibpf.lhs_closed(delta, phi, POLY)
            assert ibpf.rhs_unified(delta, phi, POLY) == pytest.approx(
                base, abs=1e-9)

    def test_special_values(self):
        assert ibpf.rhs_special(3.0, ONE, POLY) == pytest.approx(
            -0.15666426716424276, abs=1e-10)
        assert ibpf.rhs_special(1.0, ONE, POLY) == pytest.approx(
            -0.07833213358212138, abs=1e-10)

    def test_unified_reduces_to_special_at_critical(self):
        for delta in (1.0, 3.0):
            for phi in FUNCTIONALS:
                s = ibpf.rhs_special(delta, phi, POLY)
                u = ibpf.rhs_unified(delta, phi, POLY)
                assert u == pytest.approx(s, abs=1e-12)

    def test_refusals(self):
        with pytest.raises(ValueError):
            ibpf.rhs_quadrature(1.0, ONE, POLY)
        with pytest.raises(ValueError):
            ibpf.rhs_quadrature(3.0, ONE, POLY)
        with pytest.raises(ValueError):
            ibpf.rhs_unified(2.0, ONE, POLY)
        with pytest.raises(ValueError):
            ibpf.rhs_special(2.0, ONE, POLY)
        with pytest.raises(ValueError):
            ibpf.rhs_classical(2.5, ONE, POLY)

    def test_critical_continuity(self):
        for d0 in (1.0, 3.0):
            target = ibpf.rhs_special(d0, ONE, POLY)
            prev = None
            for eps in (0.01, 0.001):
                diff = max(abs(ibpf.rhs_quadrature(d0 + s * eps, ONE, POLY)
                               - target) for s in (-1.0, 1.0))
                assert diff <= 1e-3
                if prev is not None:
                    assert diff < prev
                prev = diff

    def test_plain_integral_regime_closed_form(self):
        # for delta > 3 no renormalization occurs and the double integral
        # collapses to -kappa int h_r E[X_r^{-3}] dr with
        # E[X_r^{-3}] = (2 r(1-r))^{-3/2} Gamma((delta-3)/2) / Gamma(delta/2)
        from besselbridges.specfun import gamma as g
        delta = 3.5
        kappa = 0.25 * (delta - 3.0) * (delta - 1.0)
        beta_32 = math.pi / 8.0  # int r^2(1-r)^2 (r(1-r))^{-3/2} dr
        target = (-kappa * 2.0 ** -1.5 * g(0.5 * (delta - 3.0))
                  / g(0.5 * delta) * beta_32)
        assert ibpf.rhs_quadrature(delta, ONE, POLY) == pytest.approx(
            target, abs=1e-9)
        assert ibpf.lhs_closed(delta, ONE, POLY) == pytest.approx(
            target, abs=1e-9)

    def test_inner_pairing_matches_pair_mu(self):
        # the vectorized kernel pairing equals Gamma(alpha) <mu_alpha, Sigma>
        from besselbridges.specfun import gamma
        delta = 2.3
        alpha = delta - 3.0
        r = np.array([0.3, 0.5, 0.62])
        vec = ibpf.renormalized_sigma_pairing(delta, HALF_LEB, r)
        for i, ri in enumerate(r):
            amp, c = laws.sigma_terms(delta, HALF_LEB, np.array([ri]))[0]
            scaled = renorm.ScalarTestFunction([float(amp[0])],
                                               c2=float(c[0]))
            val = renorm.pair_mu(alpha, scaled) * gamma(alpha)
            assert vec[i] == pytest.approx(val, rel=1e-9)


class TestSkeleton:
    CASES = [
        (FiniteMeasure.zero(), POLY),
        (FiniteMeasure.zero(), BUMP),
        (FiniteMeasure.lebesgue(0.5), BUMP),
        (FiniteMeasure.lebesgue(0.5), POLY),
        (FiniteMeasure.atom(0.3, 0.8) + FiniteMeasure.lebesgue(1.0), POLY),
        (FiniteMeasure.indicator(0.4, 0.7, 2.0), BUMP),
    ]

    @pytest.mark.parametrize("idx", range(len(CASES)))
    def test_residual_small(self, idx):
        m, h = self.CASES[idx]
        assert ibpf.skeleton_check(m, h) <= 1e-6

    def test_zero_measure_value(self):
        # both sides equal -(1/4) B(3/2,3/2) for h = r^2(1-r)^2
        assert ibpf.skeleton_check(FiniteMeasure.zero(), POLY) <= 1e-8

    def test_linearity_in_h(self):
        class Scaled(PolyH):
            def __init__(self, c):
                super().__init__((c,))

        m = FiniteMeasure.lebesgue(0.5)
        base = ibpf.skeleton_check(m, Scaled(1.0))
        scaled = ibpf.skeleton_check(m, Scaled(2.0))
        assert scaled == pytest.approx(2.0 * base, rel=1e-6, abs=1e-12)


class TestMonteCarloRoutes:
    def test_lhs_mc_agreement(self):
        grid = sampler.sin_squared_grid(128)
        for delta, phi, h, tag in [(3.0, ONE, POLY, 1), (1.0, ATOM, POLY, 2),
                                   (0.7, HALF_LEB, BUMP, 3)]:
            base = ibpf.lhs_closed(delta, phi, h)
            est, se = ibpf.lhs_mc(delta, phi, h, grid, 30000,
                                  STREAM.substream(tag))
            assert abs(est - base) <= 3.0 * se

    def test_classical_at_three_equals_special(self):
        val, se = ibpf.rhs_classical(3.0, HALF_LEB, POLY)
        assert se == 0.0
        assert val == pytest.approx(ibpf.rhs_special(3.0, HALF_LEB, POLY),
                                    abs=1e-10)

    def test_classical_above_three(self):
        grid = sampler.sin_squared_grid(64)
        for delta, tag in [(4.0, 11), (5.0, 12)]:
            base = ibpf.lhs_closed(delta, ONE, BUMP)
            est, se = ibpf.rhs_classical(delta, ONE, BUMP, grid, 40000,
                                         STREAM.substream(tag))
            assert abs(est - base) <= 3.0 * se


class TestVerify:
    def test_report_routes_present(self):
        rep = ibpf.verify(2.5, HALF_LEB, POLY, h_id="poly")
        assert rep.rhs_quadrature is not None
        assert rep.rhs_unified is not None
        assert rep.rhs_special is None
        rows = rep.rows()
        assert all(len(r) == 7 for r in rows)

    def test_report_at_two_skips_unified(self):
        rep = ibpf.verify(2.0, ONE, POLY)
        assert rep.rhs_unified is None
        assert rep.rhs_quadrature is not None

    def test_report_at_three_has_special_and_classical(self):
        rep = ibpf.verify(3.0, ONE, POLY)
        assert rep.rhs_special is not None
        assert rep.rhs_classical is not None
        assert rep.residuals["rhs_classical"] <= 1e-9
