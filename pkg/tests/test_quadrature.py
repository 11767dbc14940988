import math

import numpy as np
import pytest

from oracles import polar_midpoint_norm
from plbounds.domains import make_epicycloid
from plbounds.errors import AccuracyError, ParameterError
from plbounds.quadrature import (
    area,
    build_rule,
    composition_norm,
    integrate,
    lalpha_norm,
)


class TestExactValues:
    def test_identity_map_norms(self, disc):
        # integrand is 1, so the norm is area^{1/alpha} = pi^{1/alpha}
        for alpha in (2.0, 2.7, 3.0, 6.0):
            assert abs(lalpha_norm(disc, alpha) - math.pi ** (1 / alpha)) < 1e-10

    def test_epicycloid_areas(self):
        for n in range(2, 9):
            assert abs(area(make_epicycloid(n)) - math.pi * (1 + 1 / n)) < 1e-8

    def test_epicycloid_l2_norm_is_sqrt_area(self, epi3):
        # integral of |phi'|^2 over the disc is exactly the image area
        assert lalpha_norm(epi3, 2.0) == pytest.approx(math.sqrt(area(epi3)), rel=1e-12)

    def test_integrate_constant(self):
        rule = build_rule(16, 32)
        assert integrate(rule, np.ones(len(rule.weights))) == pytest.approx(math.pi, rel=1e-13)


class TestAgainstMidpointReference:
    def test_epicycloid_norm_matches_plain_midpoint_rule(self, epi3):
        ref = polar_midpoint_norm(epi3, 4.0)
        assert lalpha_norm(epi3, 4.0) == pytest.approx(ref, rel=1e-5)

    def test_area_matches_plain_midpoint_rule(self, epi3):
        ref = polar_midpoint_norm(epi3, 2.0) ** 2
        assert area(epi3) == pytest.approx(ref, rel=1e-5)


class TestInvariants:
    def test_hoelder_monotonicity_between_exponents(self):
        # ||f||_a <= ||f||_b * pi^{1/a - 1/b} for a < b (Hoelder on the unit disc)
        alphas = (2.0, 2.5, 3.0, 4.0, 6.0, 8.0)
        for n in (2, 3, 5):
            d = make_epicycloid(n)
            norms = [lalpha_norm(d, a) for a in alphas]
            for i in range(len(alphas)):
                for j in range(i + 1, len(alphas)):
                    ai, aj = alphas[i], alphas[j]
                    ceiling = norms[j] * math.pi ** (1 / ai - 1 / aj)
                    assert norms[i] <= ceiling * (1 + 1e-12)

    def test_resolution_doubling_is_converged(self, epi3):
        coarse = lalpha_norm(epi3, 3.0, rule=build_rule(64, 256))
        fine = lalpha_norm(epi3, 3.0, rule=build_rule(128, 512))
        assert abs(coarse - fine) < 1e-6 * fine

    def test_refinement_failure_raises(self, epi3):
        with pytest.raises(AccuracyError):
            lalpha_norm(epi3, 6.0, rule=build_rule(4, 8), rel_tol=1e-12, max_refinements=0)

    def test_parameter_validation(self, disc):
        with pytest.raises(ParameterError):
            lalpha_norm(disc, 0.0)
        with pytest.raises(ParameterError):
            build_rule(0, 8)


class TestCompositionNorm:
    def test_ceiling_holds_on_catalog(self, disc):
        domains = [disc] + [make_epicycloid(n) for n in (2, 3, 5)]
        for d in domains:
            for p in (2.5, 3.0, 4.0, 6.0):
                for q in (1.0, 1.5, 2.0):
                    c = composition_norm(d, p, q)
                    assert c.value <= c.analytic_bound * (1 + 1e-12)
                    assert c.exponent == pytest.approx((p - 2) * q / (p - q))

    def test_ceiling_is_attained_at_q_2(self, epi3):
        for p in (2.5, 3.0, 4.0):
            c = composition_norm(epi3, p, 2.0)
            assert c.value == pytest.approx(c.analytic_bound, rel=1e-12)

    def test_q_2_closed_form(self, epi3):
        # exponent collapses to 2, so the norm is area^{(p-2)/(2p)}
        c = composition_norm(epi3, 4.0, 2.0)
        assert c.value == pytest.approx(area(epi3) ** 0.25, rel=1e-12)

    def test_q_range_is_enforced(self, epi3):
        for q in (0.9, 2.5, 3.0):
            with pytest.raises(ParameterError):
                composition_norm(epi3, 3.0, q)
