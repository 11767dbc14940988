import json
import math

import mpmath as mp
import pytest

import oracles
from plbounds.bounds import (
    BoundReport,
    LogReal,
    ahlfors_bound,
    alpha_constant,
    delta_exponent,
    extension_coefficient_log,
    inverse_holder_constant,
    jacobian_nu,
    kappa_nu,
    nu_unit_root,
    quasidisc_bound,
    quasidisc_factor,
    regularity_bound,
    regularity_constant,
    snowflake_bound,
    szego_weinberger_upper,
)
from plbounds.domains import make_quasidisc_spec, make_star_spec
from plbounds.errors import InfeasibleError, ParameterError

LN10 = math.log(10.0)


class TestDeltaAndInterpolationFactor:
    def test_delta_closed_forms(self):
        assert delta_exponent(3.0, 2.0, math.inf) == pytest.approx(1 / 2 - 1 / 3, abs=1e-15)
        assert delta_exponent(3.0, 2.0, 4.0) == pytest.approx(1 / 2 - 2 / 12, abs=1e-15)
        assert delta_exponent(4.0, 1.5, 6.0) == pytest.approx(1 / 1.5 - 4 / 24, abs=1e-15)

    def test_finite_alpha_approaches_the_sup_case(self):
        assert delta_exponent(3.0, 2.0, 1e12) == pytest.approx(
            delta_exponent(3.0, 2.0, math.inf), abs=1e-11)

    def test_regularity_constant_sup_closed_form(self):
        # at alpha = inf the q-minimum sits at q = 2 and the factor is
        # (p/2 + 1)^{p/2 + 1}, giving C_p = 2^p pi^{1 - p/2} (p/2 + 1)^{p/2 + 1}
        for p in (2.0, 2.5, 3.0, 4.0, 6.0):
            rc = regularity_constant(p, math.inf)
            closed = 2.0 ** p * math.pi ** (1 - p / 2) * (p / 2 + 1) ** (p / 2 + 1)
            assert rc.value == pytest.approx(closed, rel=1e-12)
            assert rc.q_opt == 2.0

    def test_regularity_constant_finite_alpha_direct_formula(self):
        for p, alpha in ((3.0, 4.0), (4.0, 2.5), (2.5, 10.0)):
            rc = regularity_constant(p, alpha)
            d = 0.5 - delta_exponent(p, 2.0, alpha)
            h = ((0.5 + d) / d) ** ((0.5 + d) * p)
            closed = 2.0 ** p * math.pi ** ((alpha - 2) / alpha - p / 2) * h
            assert rc.value == pytest.approx(closed, rel=1e-12)

    def test_q_minimum_is_the_right_endpoint(self):
        # the factor is strictly decreasing in q, so the infimum is at q = 2
        for p, alpha in ((3.0, math.inf), (4.0, 5.0)):
            d2 = 0.5 - delta_exponent(p, 2.0, alpha)
            d17 = 0.5 - delta_exponent(p, 1.7, alpha)
            h = lambda d: ((0.5 + d) / d) ** ((0.5 + d) * p)
            assert h(d2) < h(d17)

    def test_q_1_is_outside_the_feasible_gap(self):
        # q = 1 puts delta above 1/2 for every p > 2 at alpha = inf, so the
        # optimizer must never land there
        assert delta_exponent(3.0, 1.0, math.inf) > 0.5
        assert regularity_constant(3.0, math.inf).q_opt == 2.0

    def test_alpha_validation(self):
        for alpha in (2.0, 1.5, -1.0):
            with pytest.raises(ParameterError):
                regularity_constant(3.0, alpha)


class TestRegularityRoute:
    def test_report_assembles_the_constant(self, epi3):
        p, alpha, dom_area, norm = 3.0, math.inf, math.pi, 1.7
        r = regularity_bound(p, alpha, dom_area, norm)
        recip = regularity_constant(p, alpha).value * dom_area ** ((p - 2) / 2) * norm ** 2
        assert r.mu_lower.ln == pytest.approx(-math.log(recip), rel=1e-12)
        assert r.r_star == pytest.approx(math.sqrt(dom_area / math.pi))
        assert r.route == "sup-regular"

    def test_finite_alpha_route_name(self):
        r = regularity_bound(3.0, 4.0, 1.0, 1.0)
        assert r.route == "alpha-regular"
        assert r.chosen_alpha == 4.0

    def test_p2_loses_the_area_dependence(self):
        a = regularity_bound(2.0, math.inf, 1.0, 1.0)
        b = regularity_bound(2.0, math.inf, 7.0, 1.0)
        assert a.mu_lower.linear == pytest.approx(1.0 / 16.0, rel=1e-12)
        assert b.mu_lower.linear == pytest.approx(1.0 / 16.0, rel=1e-12)

    def test_epicycloid_display_reproduction(self):
        # feeding the circumscribed-disc area pi ((n+1)/n)^2 and sup-norm 2
        # must reproduce 2^{p+2} ((n+1)/n)^{p-2} inf_q(...) exactly
        for n in range(2, 9):
            for p in (2.5, 3.0, 4.0):
                r = regularity_bound(p, math.inf, math.pi * ((n + 1) / n) ** 2, 2.0)
                h_inf = regularity_constant(p, math.inf).value / (
                    2.0 ** p * math.pi ** (1 - p / 2))
                display = 2.0 ** (p + 2) * ((n + 1) / n) ** (p - 2) * h_inf
                assert math.exp(-r.mu_lower.ln) == pytest.approx(display, rel=1e-12)

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            regularity_bound(1.9, math.inf, 1.0, 1.0)
        with pytest.raises(ParameterError):
            regularity_bound(3.0, math.inf, -1.0, 1.0)
        with pytest.raises(ParameterError):
            regularity_bound(3.0, math.inf, 1.0, 0.0)


class TestFeasibilityRoot:
    # reference values from the bisection in oracles.py
    FROZEN_ROOTS = {
        1.0: -29.355707948048295,
        1.5: -30.977568380479025,
        2.0: -32.128296670285806,
        5.0: -35.793459597782264,
    }

    def test_roots_match_the_reference_bisection(self):
        for K, expected in self.FROZEN_ROOTS.items():
            root = nu_unit_root(K)
            assert root.ln_eps == pytest.approx(expected, rel=1e-12)

    def test_nu_at_the_root_is_one(self):
        with mp.workdps(40):
            for K in (1.0, 1.5, 2.0, 5.0):
                root = nu_unit_root(K)
                ln_x = mp.log(24 * mp.pi ** 2) + 2 * mp.log(mp.mpf(K))
                nu = oracles.nu_value(mp.exp(mp.mpf(root.ln_eps)), ln_x)
                assert abs(float(nu) - 1.0) < 1e-10

    def test_nu_is_strictly_increasing_in_alpha(self):
        root = nu_unit_root(1.5)
        grid = [root.ln_eps - 40 + 39.9 * i / 99 for i in range(100)]
        vals = [jacobian_nu(1.5, eps=math.exp(u), log=True) for u in grid]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_jacobian_nu_log_matches_linear(self):
        v = jacobian_nu(1.5, alpha=2.0 + 1e-14)
        lv = jacobian_nu(1.5, alpha=2.0 + 1e-14, log=True)
        assert v == pytest.approx(math.exp(lv), rel=1e-12)

    def test_kappa_form_matches_the_substitution(self):
        # nu~(kappa, K) = nu(alpha = 2 kappa, K' = sqrt K), exactly
        for kappa, K in ((1.5, 2.0), (3.0, 1.44), (2.2, 5.0)):
            assert kappa_nu(kappa, K, log=True) == jacobian_nu(
                math.sqrt(K), alpha=2 * kappa, log=True)

    def test_alpha_constant_matches_direct_formula(self):
        with mp.workdps(40):
            for K in (1.2, 2.0):
                root = nu_unit_root(K)
                eps = math.exp(root.ln_eps - 1.0)
                ln_x = mp.log(24 * mp.pi ** 2) + 2 * mp.log(mp.mpf(K))
                expected = oracles.c_alpha_ln(mp.mpf(eps), ln_x)
                assert alpha_constant(K, eps=eps, log=True) == pytest.approx(
                    float(expected), rel=1e-12)

    def test_alpha_constant_requires_feasibility(self):
        root = nu_unit_root(1.5)
        with pytest.raises(InfeasibleError):
            alpha_constant(1.5, eps=math.exp(root.ln_eps + 1.0))


class TestQuasidiscRoute:
    def test_factor_matches_the_grid_reference(self):
        for p, K in ((2.5, 1.1), (3.0, 2.0), (4.0, 5.0), (6.0, 1.5)):
            mine = quasidisc_factor(p, K).ln_value
            ref = float(oracles.quasidisc_ln_m(p, K))
            assert abs(mine - ref) <= 1e-6 * abs(ref)

    def test_optimal_nu_sits_near_p_over_p_plus_2(self):
        for p in (2.5, 3.0, 4.0, 6.0):
            r = quasidisc_bound(p, make_quasidisc_spec(1.5, 1.0))
            assert abs(r.nu_at_alpha - p / (p + 2)) < 1e-6
            assert r.alpha_window_binding == "nu-root"

    def test_area_scaling_is_exactly_minus_p_halves(self):
        p = 3.0
        a = quasidisc_bound(p, make_quasidisc_spec(1.5, 1.0))
        b = quasidisc_bound(p, make_quasidisc_spec(1.5, 4.0))
        assert b.mu_lower.ln - a.mu_lower.ln == pytest.approx(
            -p / 2 * math.log(4.0), rel=1e-12)

    def test_star_spec_carries_provenance(self):
        r = quasidisc_bound(3.0, make_star_spec(0.5, 2.0))
        assert r.route_params["provenance"].startswith("star")

    def test_unit_coefficient_is_infeasible(self):
        with pytest.raises(InfeasibleError) as exc:
            quasidisc_bound(3.0, make_quasidisc_spec(1.0, 1.0))
        assert exc.value.constraint == "K > 1"

    def test_p_must_exceed_2(self):
        with pytest.raises(ParameterError):
            quasidisc_bound(2.0, make_quasidisc_spec(1.5, 1.0))

    def test_window_note_mentions_the_cap(self):
        r = quasidisc_bound(3.0, make_quasidisc_spec(1.5, 1.0))
        assert any("2K^2/(K^2-1)" in note for note in r.notes)


class TestExtremeRoutes:
    def test_extension_coefficient_log(self):
        C = 2.0
        expected = (1.0 + math.exp(2 * math.pi) * 32.0) ** 2 - 10 * math.log(2)
        assert extension_coefficient_log(C) == pytest.approx(expected, rel=1e-15)
        with pytest.raises(ParameterError):
            extension_coefficient_log(0.5)

    def test_ahlfors_route_frozen_value(self):
        r = ahlfors_bound(3.0, 2.0, math.pi)
        assert r.mu_lower.log10_json() == "-4.725332035262051e+255076447"

    def test_ahlfors_route_matches_the_reference_assembly(self):
        r = ahlfors_bound(3.0, 2.0, math.pi)
        with mp.workdps(50):
            ref = oracles.ahlfors_ln_recip(3.0, 2.0, math.pi)
            rel = abs(-mp.mpf(r.mu_lower.ln) - ref) / ref
        # reports keep ~16 significant digits of ln, so that is the floor
        assert float(rel) < 1e-14

    def test_snowflake_route_frozen_values(self):
        assert snowflake_bound(3.0, 0.26, 1.0).mu_lower.log10_json() == \
            "-6.1618336703828572e+241903741814867903835575099"
        assert snowflake_bound(3.0, 0.3, 1.0).mu_lower.log10_json() == \
            "-1.0145945518396596e+1497804208909810577338129596"

    def test_snowflake_route_matches_the_reference_assembly(self):
        for t in (0.26, 0.3):
            r = snowflake_bound(3.0, t, 1.0)
            with mp.workdps(50):
                ref = oracles.snowflake_ln_recip(3.0, t, 1.0)
                rel = abs(-mp.mpf(r.mu_lower.ln) - ref) / ref
            assert float(rel) < 1e-14

    def test_extreme_windows_still_find_the_interior_optimum(self):
        # the working variable is shifted by ~1e21, yet the optimum must
        # stay at nu = p/(p+2) instead of sliding to the window edge
        for p in (2.5, 3.0, 6.0):
            r = snowflake_bound(p, 0.26, 1.0)
            assert abs(r.nu_at_alpha - p / (p + 2)) < 1e-4
            assert r.alpha_window_binding == "nu-root"

    def test_snowflake_scale_validation(self):
        for t in (0.2, 0.5):
            with pytest.raises(ParameterError):
                snowflake_bound(3.0, t, 1.0)

    def test_inverse_holder_constant(self):
        # feasible only microscopically above kappa = 1
        v = inverse_holder_constant(1.0 + 1e-14, 2.0)
        assert v.log10_json() == pytest.approx(561.6401576829197, rel=1e-12)
        with pytest.raises(InfeasibleError):
            inverse_holder_constant(1.5, 2.0)
        with pytest.raises(InfeasibleError):
            inverse_holder_constant(2.1, 2.0)  # outside (1, K/(K-1))
        with pytest.raises(ParameterError):
            inverse_holder_constant(1.0, 2.0)


class TestRouteDominance:
    def test_quasidisc_bound_is_weaker_than_regularity(self):
        # whenever both routes run on the same inputs the quasidisc value
        # must come out below the conformal-regularity value
        for p in (2.5, 3.0):
            for n, K in ((2, 2.0), (3, 4.0)):
                dom_area = math.pi * (1 + 1 / n)
                b = regularity_bound(p, math.inf, dom_area, 2.0)
                a = quasidisc_bound(p, make_quasidisc_spec(K, dom_area))
                assert a.mu_lower.ln < b.mu_lower.ln

    def test_szego_weinberger_disc_value(self):
        assert szego_weinberger_upper(math.pi) == pytest.approx(3.3899437924, rel=1e-9)
        # scales like 1/area
        assert szego_weinberger_upper(2 * math.pi) == pytest.approx(
            szego_weinberger_upper(math.pi) / 2, rel=1e-12)
        with pytest.raises(ParameterError):
            szego_weinberger_upper(0.0)

    def test_lower_bounds_sit_below_the_upper_bound(self):
        # p = 2 sanity: the regularity floor must stay under the
        # equal-area-disc ceiling
        for dom_area in (1.0, math.pi, 10.0):
            lo = regularity_bound(2.0, math.inf, dom_area, 1.0)
            assert lo.mu_lower.linear < szego_weinberger_upper(dom_area)


class TestReportsAndSerialization:
    def test_logreal_basics(self):
        x = LogReal(math.log(0.25))
        assert x.linear == pytest.approx(0.25, rel=1e-15)
        assert x.log10 == pytest.approx(math.log10(0.25), rel=1e-15)
        tiny = LogReal(-800 * LN10)
        assert tiny.linear is None
        assert tiny.log10_json() == pytest.approx(-800.0)

    def test_roundtrip_is_byte_stable_for_every_route(self):
        reports = [
            regularity_bound(3.0, math.inf, math.pi, 1.0),
            regularity_bound(3.0, 4.0, 2.0, 1.3),
            quasidisc_bound(3.0, make_quasidisc_spec(1.5, 2.0)),
            ahlfors_bound(3.0, 2.0, math.pi),
            snowflake_bound(3.0, 0.26, 1.0),
        ]
        for r in reports:
            blob = json.dumps(r.to_dict(), sort_keys=True)
            back = BoundReport.from_dict(json.loads(blob))
            assert json.dumps(back.to_dict(), sort_keys=True) == blob

    def test_roundtrip_preserves_the_log_value(self):
        r = quasidisc_bound(3.0, make_quasidisc_spec(1.5, 2.0))
        back = BoundReport.from_dict(r.to_dict())
        assert back.mu_lower.ln == pytest.approx(r.mu_lower.ln, rel=1e-14)
        assert back.route == r.route
        assert back.p == r.p

    def test_linear_field_is_null_when_out_of_double_range(self):
        d = quasidisc_bound(3.0, make_quasidisc_spec(1.5, 2.0)).to_dict()
        assert d["mu_lower"] is None
        assert isinstance(d["mu_lower_log10"], float)
        d2 = regularity_bound(3.0, math.inf, math.pi, 1.0).to_dict()
        assert isinstance(d2["mu_lower"], float)
