import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import log_exp_sd, power_exp_sd
from gapflow import (
    DomainError,
    EdgeProfile,
    MomentDivergenceError,
    UnresolvedRegimeError,
    dephasing_rate,
    lambda_expansion,
    make_figure_sd,
    make_lorentzian_gap_sd,
    make_power_law_gap_sd,
    phi_c,
    phi_s,
)
from gapflow.asymptotics import (
    TailLaw,
    mu_constants,
    short_time_coeffs,
    short_time_gamma,
    tail_eval,
    tail_law,
    tail_laws_for,
)
from gapflow.sd_model import ExpansionTerm, LambdaExpansion

E = math.e


class TestShortTime:
    def test_figure_moments(self):
        # incomplete gamma values at 1: Gamma(2,1) = 2/e, Gamma(3,1) = 5/e, Gamma(4,1) = 16/e
        sd = make_figure_sd(2.0, 1.0, 1.0)
        co = short_time_coeffs(sd)
        assert co.l_c0 == pytest.approx(2 / E, rel=1e-10)
        assert co.l_s1 == pytest.approx(3 / E, rel=1e-10)
        assert co.l_c2 == pytest.approx(4 / E, rel=1e-10)
        assert co.l0 == pytest.approx(5 / E, rel=1e-10)

    def test_l0_is_total_coupling(self):
        for sd in (make_figure_sd(1.0, 10.0, 1.0), make_power_law_gap_sd(1, -0.5, 1, 1)):
            co = short_time_coeffs(sd)
            total = sd.integral_j_over_omega * sd.omega_g + co.l_s1
            assert co.l0 == pytest.approx(total, rel=1e-10)

    def test_lorentzian_l_c0(self):
        sd = make_lorentzian_gap_sd(1.0, 1.0, 1.0)
        assert phi_c(sd, 0.0) == pytest.approx(math.pi / 4, rel=1e-10)

    def test_lorentzian_short_time_diverges(self):
        with pytest.raises(MomentDivergenceError) as exc:
            short_time_coeffs(make_lorentzian_gap_sd(1.0, 1.0, 1.0))
        assert exc.value.moment == "l_c2"

    @pytest.mark.parametrize("sd", [make_figure_sd(1.0, 10.0, 1.0), make_figure_sd(0.0, 1.0, 1.0),
                                    make_power_law_gap_sd(1, -0.5, 1, 1)], ids=["fig1_10", "fig0_1", "J1"])
    def test_linear_law(self, sd):
        t = 1e-3 / sd.omega_s
        co = short_time_coeffs(sd)
        assert dephasing_rate(sd, t) == pytest.approx(short_time_gamma(sd, t, co), rel=1e-3)

    def test_quadratic_remainder_is_small(self):
        sd = make_figure_sd(1.0, 10.0, 1.0)
        co = short_time_coeffs(sd)
        ratios = [abs(phi_c(sd, t) - co.phi_c(t)) / t**2 for t in (1e-1, 1e-2, 1e-3)]
        assert ratios[0] > ratios[1] > ratios[2]
        assert ratios[2] < 1e-3 * co.l_c2
        s_ratios = [abs(phi_s(sd, t) - co.phi_s(t)) / t for t in (1e-1, 1e-2, 1e-3)]
        assert s_ratios[0] > s_ratios[1] > s_ratios[2]

    def test_negative_time(self):
        with pytest.raises(DomainError):
            short_time_gamma(make_figure_sd(1.0, 10.0, 1.0), -1.0)


class TestMuConstants:
    def test_negative_half(self):
        mus = mu_constants(-0.5, 0, 1.0, 1.0)
        assert mus["mu_c"] == pytest.approx(math.cos(math.pi / 4) * math.sqrt(math.pi))
        assert mus["mu_s"] == pytest.approx(math.sin(math.pi / 4) * math.sqrt(math.pi))
        assert mus["mu_c"] == pytest.approx(1.2533141373155)
        assert mus["mu_bar_c"] == 0.0

    def test_parity_zeros(self):
        assert mu_constants(2, 0, 1, 1)["mu_c"] == 0.0
        assert mu_constants(1, 0, 1, 1)["mu_s"] == 0.0
        assert mu_constants(0, 0, 1, 1)["mu_c"] == 0.0

    def test_even_log_prime(self):
        mus = mu_constants(2, 1, 1.0, 1.0)
        assert mus["mu_prime_c"] == pytest.approx(-math.pi)
        assert mus["mu_prime_c"] == pytest.approx(mus["mu_bar_c"])
        assert "mu_prime_s" not in mus

    @pytest.mark.parametrize("alpha, beta", [(1, 1), (2, 2), (3, 1.5), (4, 1), (5, 0.5)])
    def test_prime_equals_bar_at_integers(self, alpha, beta):
        mus = mu_constants(alpha, beta, 1.0, 1.0)
        key = "c" if alpha % 2 == 0 else "s"
        assert mus[f"mu_prime_{key}"] == pytest.approx(mus[f"mu_bar_{key}"], rel=1e-12)

    @given(alpha=st.floats(-0.95, 6), beta=st.floats(-2, 3),
           omega_g=st.floats(0.01, 100), omega_s=st.floats(0.01, 100))
    def test_scaling(self, alpha, beta, omega_g, omega_s):
        unit = mu_constants(alpha, beta, 1.0, 1.0)
        scaled = mu_constants(alpha, beta, omega_g, omega_s)
        for k, v in unit.items():
            assert scaled[k] == pytest.approx(v * omega_s**2 / omega_g, rel=1e-12, abs=1e-300)

    def test_needs_gap(self):
        with pytest.raises(DomainError):
            mu_constants(0.5, 0, 0.0, 1.0)


class TestTailLaw:
    def test_even_log_law(self):
        profile = EdgeProfile("class1", 2, 1, 1.0)
        law = tail_law(profile, lambda_expansion(profile, 1.0), "phi_c", 1.0, 1.0)
        assert law.regime == "mu_prime_c"
        assert law.exponent == -3.0 and law.log_exponent == 0.0
        assert law.coefficient == pytest.approx(-math.pi)

    def test_k1_rule(self):
        # Lambda = nu**2 - nu**3 + ...: the cosine law comes from the cube
        profile = EdgeProfile("class1", 2, 0, 1.0)
        law = tail_law(profile, lambda_expansion(profile, 1.0), "phi_c", 1.0, 1.0)
        assert law.regime.startswith("k1:") and law.index == 1
        assert law.exponent == -4.0
        assert law.coefficient == pytest.approx(-1.0 * math.cos(2 * math.pi) * math.gamma(4))

    def test_unresolved(self):
        lam = LambdaExpansion(1.0, tuple(ExpansionTerm(Fraction(k), Fraction(0), 1.0) for k in (0, 2, 4)))
        profile = EdgeProfile("class1", 0, 0, 1.0)
        with pytest.raises(UnresolvedRegimeError):
            tail_law(profile, lam, "phi_c", 1.0, 1.0)
        assert tail_law(profile, lam, "phi_s", 1.0, 1.0).exponent == -1.0

    def test_eval_examples(self):
        law = TailLaw("phi_c", -2.0, 0.0, 1.0, {}, "mu_c", 1.0)
        assert tail_eval(law, 10.0) == pytest.approx(0.01)
        logged = TailLaw("phi_s", -1.0, 1.0, 3.0, {}, "mu_s", 2.0)
        assert tail_eval(logged, E / 2) == pytest.approx(3.0 / E)
        with pytest.raises(DomainError):
            tail_eval(law, 1.0)
        with pytest.raises(DomainError):
            tail_eval(logged, 0.4)

    def test_rejects_non_decaying(self):
        with pytest.raises(ValueError):
            TailLaw("phi_c", 0.5, 0.0, 1.0, {}, "mu_c", 1.0)
        with pytest.raises(ValueError):
            TailLaw("gamma", -1.0, 0.0, 1.0, {}, "mu_c", 1.0)

    def test_json_round_trip(self):
        for sd in (make_power_law_gap_sd(1, -0.5, 1, 1), log_exp_sd(-0.5, 1, "class2")):
            for law in tail_laws_for(sd).values():
                again = TailLaw.from_dict(json.loads(law.to_json()))
                assert again == law

    def test_lorentzian_laws(self):
        laws = tail_laws_for(make_lorentzian_gap_sd(1.0, 1.0, 1.0))
        assert laws["phi_s"].exponent == -1.0 and laws["phi_s"].coefficient == pytest.approx(1.0)
        assert laws["phi_c"].regime == "k1:mu_c" and laws["phi_c"].exponent == -2.0


NUMERIC_CASES = [
    ("J1", make_power_law_gap_sd(1, -0.5, 1, 1), 500.0, 0.01),
    ("J1_quarter", make_power_law_gap_sd(1, -0.25, 1, 1), 500.0, 0.02),
    ("fig1_2", make_figure_sd(1.0, 2.0, 1.0), 500.0, 1e-4),
    ("exp0.5", power_exp_sd(0.5), 1000.0, 0.01),
    ("exp1", power_exp_sd(1), 1000.0, 1e-4),
    ("exp1.5", power_exp_sd(1.5), 1000.0, 0.01),
    ("exp2", power_exp_sd(2), 1000.0, 1e-3),
    ("exp3", power_exp_sd(3), 300.0, 2e-3),
    ("log_class2", log_exp_sd(-0.5, 1, "class2"), 1000.0, 0.01),
]


@pytest.mark.parametrize("name, sd, tau, tol", NUMERIC_CASES, ids=[c[0] for c in NUMERIC_CASES])
def test_tail_law_matches_quadrature(name, sd, tau, tol):
    laws = tail_laws_for(sd)
    t = tau / sd.omega_s
    assert phi_c(sd, t) / tail_eval(laws["phi_c"], t) == pytest.approx(1.0, abs=tol)
    assert phi_s(sd, t) / tail_eval(laws["phi_s"], t) == pytest.approx(1.0, abs=tol)


def test_sine_sign_over_window():
    sd = make_power_law_gap_sd(1, -0.5, 1, 1)
    law = tail_laws_for(sd)["phi_s"]
    for tau in np.linspace(200, 1000, 9):
        assert np.sign(phi_s(sd, tau)) == np.sign(tail_eval(law, tau))


def test_gap_and_scale_dependence():
    # the same dimensionless Lambda with a different omega_g, omega_s
    a = make_power_law_gap_sd(1.0, -0.5, 1.0, 1.0)
    b = make_power_law_gap_sd(1.0, -0.5, 1.0, 2.0)
    la, lb = tail_laws_for(a)["phi_s"], tail_laws_for(b)["phi_s"]
    assert la.exponent == lb.exponent == -0.5
    assert lb.mu_constants["mu_s"] == pytest.approx(la.mu_constants["mu_s"] / 2)
