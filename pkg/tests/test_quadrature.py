import doctest
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import gapflow.acceleration
import oracles
from conftest import builtin_sds
from gapflow import (
    QuadratureConfig,
    coherence,
    dephasing_factor,
    dephasing_rate,
    make_figure_sd,
    make_lorentzian_gap_sd,
    make_power_law_gap_sd,
    make_tabulated_sd,
    phi_c,
    phi_s,
    transform_sample,
)
from gapflow.quadrature import (
    dephasing_rate_direct,
    phi_c_estimate,
    reference_transform,
    map_times,
    thread_count,
)
from gapflow.sd_model import rescaled


def close(value, ref, scale, tol):
    assert abs(value - ref) <= tol * scale, (value, ref)


# frozen mpmath values (dps 30): incomplete-gamma closed form of the figure SD
@pytest.mark.parametrize("alpha, omega_g, t", [
    (0.0, 1.0, 0.5), (0.0, 1.0, 7.3), (1.0, 10.0, 2.0), (1.0, 10.0, 40.0),
    (2.0, 5.0, 13.0), (3.0, 0.1, 25.0), (0.5, 2.0, 100.0),
])
def test_figure_against_closed_form(alpha, omega_g, t):
    sd = make_figure_sd(alpha, omega_g, 1.0)
    ref = oracles.figure_transform(alpha, omega_g, t)
    scale = abs(ref)
    close(phi_c(sd, t), ref.real, scale, 1e-9)
    close(phi_s(sd, t), ref.imag, scale, 1e-9)


@pytest.mark.parametrize("alpha, lambda1, omega_g, t", [
    (-0.5, 1.0, 1.0, 0.3), (-0.5, 1.0, 1.0, 12.0), (-0.25, 2.0, 0.5, 60.0), (-0.9, 1.0, 3.0, 5.0),
])
def test_power_law_against_rotated_contour(alpha, lambda1, omega_g, t):
    sd = make_power_law_gap_sd(1.3, alpha, lambda1, omega_g)
    ref = oracles.j1_transform(1.3, alpha, lambda1, omega_g, t)
    close(phi_c(sd, t), ref.real, abs(ref), 1e-9)
    close(phi_s(sd, t), ref.imag, abs(ref), 1e-9)


@pytest.mark.parametrize("t", [0.0, 2.0, 15.0])
def test_lorentzian_against_mpmath(t):
    sd = make_lorentzian_gap_sd(1.0, 1.0, 1.0)
    ref = oracles.j2_transform(1.0, 1.0, 1.0, t)
    close(phi_c(sd, t), ref.real, abs(ref), 1e-9)
    close(phi_s(sd, t), ref.imag, abs(ref), 1e-9)


def test_xi_against_closed_form():
    for alpha, omega_g, t in [(1.0, 10.0, 3.0), (0.0, 1.0, 20.0), (2.0, 5.0, 0.7)]:
        sd = make_figure_sd(alpha, omega_g, 1.0)
        ref = oracles.figure_xi(alpha, omega_g, t)
        assert dephasing_factor(sd, t) == pytest.approx(ref, rel=1e-8, abs=1e-13)


@pytest.mark.parametrize("alpha, tau", [(0.0, 0.5), (0.0, 30.0), (1.0, 3.0), (2.0, 3.0), (3.0, 5.0)])
def test_gapless_closed_form(alpha, tau):
    sd = make_figure_sd(alpha, 0.0, 1.0)
    ref = oracles.gapless_gamma(alpha, tau)
    assert dephasing_rate(sd, tau) == pytest.approx(ref, rel=1e-8, abs=1e-12)
    sample = transform_sample(sd, tau)
    assert sample.gamma0 == pytest.approx(ref, rel=1e-8, abs=1e-12)
    assert sample.phase is None


def test_values_at_zero(sds):
    for sd in sds.values():
        assert phi_s(sd, 0.0) == 0.0
        assert dephasing_rate(sd, 0.0) == 0.0
        assert dephasing_factor(sd, 0.0) == 0.0
        assert phi_c(sd, 0.0) == pytest.approx(sd.integral_j_over_omega, rel=1e-9)


def test_large_gap_lorentzian():
    # for omega_g >> lambda2 the factor 1/(omega_g + x) is nearly constant
    sd = make_lorentzian_gap_sd(1.0, 1.0, 1e3)
    for t in (0.5, 1.0, 2.0):
        assert phi_c(sd, t) == pytest.approx(1e-3 * math.pi / 2 * math.exp(-t), rel=0.02)


@pytest.mark.parametrize("name", list(builtin_sds()))
def test_dual_method_agreement(name):
    sd = builtin_sds()[name]
    t = 5.0
    c, s = phi_c(sd, t), phi_s(sd, t)
    rc = reference_transform(sd, t, "cos").value
    rs = reference_transform(sd, t, "sin").value
    scale = math.hypot(rc, rs)
    close(c, rc, scale, 1e-8)
    close(s, rs, scale, 1e-8)


def test_exp_window_strategy_agrees():
    sd = make_figure_sd(1.0, 1.0, 1.0)
    cfg = QuadratureConfig(tail_strategy="exp_window")
    ref = oracles.figure_transform(1.0, 1.0, 7.0)
    close(phi_c(sd, 7.0, cfg), ref.real, abs(ref), 1e-8)
    close(phi_s(sd, 7.0, cfg), ref.imag, abs(ref), 1e-8)


@pytest.mark.parametrize("name", list(builtin_sds()))
def test_xi_derivative_is_rate(name):
    sd = builtin_sds()[name]
    t, h = 3.0, 1e-3
    cfg = QuadratureConfig(rel_tol=1e-12, abs_tol=1e-15)
    fd = (dephasing_factor(sd, t + h, cfg) - dephasing_factor(sd, t - h, cfg)) / (2 * h)
    rate = dephasing_rate(sd, t, cfg)
    assert abs(fd - rate) <= 1e-6 * max(1.0, abs(rate))


def test_error_estimate_is_honest():
    sd = make_figure_sd(1.0, 10.0, 1.0)
    for t in (2.0, 40.0):
        est = phi_c_estimate(sd, t)
        ref = oracles.figure_transform(1.0, 10.0, t).real
        assert abs(est.value - ref) <= max(10 * est.error, 1e-15)


class TestCoherence:
    def test_initial(self):
        sd = make_figure_sd(0.0, 1.0, 1.0)
        assert coherence(sd, 0.0) == 0.5
        assert coherence(sd, 0.0, 0.3j) == 0.3j

    def test_decays_with_xi(self):
        sd = make_figure_sd(0.0, 1.0, 1.0)
        rho = coherence(sd, 4.0)
        assert abs(rho) == pytest.approx(0.5 * math.exp(-dephasing_factor(sd, 4.0)))
        assert 0 < abs(rho) <= 0.5

    def test_rejects_invalid_state(self):
        with pytest.raises(ValueError):
            coherence(make_figure_sd(0.0, 1.0, 1.0), 1.0, 0.6)


class TestValidation:
    def test_negative_time(self):
        with pytest.raises(ValueError):
            phi_c(make_figure_sd(0.0, 1.0, 1.0), -1.0)

    def test_config(self):
        with pytest.raises(ValueError):
            QuadratureConfig(rel_tol=0)
        with pytest.raises(ValueError):
            QuadratureConfig(tail_strategy="nope")
        cfg = QuadratureConfig().tightened(1e-12)
        assert cfg.rel_tol == 1e-12 and cfg.abs_tol == QuadratureConfig().abs_tol

    def test_check_mode(self):
        sd = make_power_law_gap_sd(1.0, -0.5, 1.0, 1.0)
        assert dephasing_rate(sd, 9.0, check=True) == pytest.approx(dephasing_rate(sd, 9.0))


@given(t=st.floats(0.05, 80.0), which=st.sampled_from(["J1", "J2", "figure_a1_g10", "figure_a2_g5"]))
def test_decomposition_identity(t, which):
    sd = builtin_sds()[which]
    split = dephasing_rate(sd, t)
    direct = dephasing_rate_direct(sd, t).value
    amp = math.hypot(phi_c(sd, t), phi_s(sd, t))
    assert abs(split - direct) <= 1e-8 * max(amp, 1e-6)


@given(c=st.sampled_from([0.5, 2.0, 3.0]), t=st.floats(0.1, 20.0))
def test_scale_covariance(c, t):
    sd = make_figure_sd(1.0, 2.0, 1.0)
    big = rescaled(sd, c)
    lhs = dephasing_rate(big, t)
    rhs = c * dephasing_rate(sd, c * t)
    assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(rhs))


@given(t=st.floats(0.05, 60.0))
def test_sine_transform_positive_under_condition(t):
    for sd in (make_power_law_gap_sd(1.0, -0.5, 1.0, 1.0), make_lorentzian_gap_sd(1.0, 1.0, 1.0)):
        assert phi_s(sd, t) > 0


def test_wynn_doctest():
    result = doctest.testmod(gapflow.acceleration)
    assert result.attempted > 0 and result.failed == 0


def test_thread_helpers(monkeypatch):
    monkeypatch.setenv("GAPFLOW_THREADS", "3")
    assert thread_count() == 3
    assert thread_count(2) == 2
    monkeypatch.setenv("GAPFLOW_THREADS", "junk")
    assert thread_count() >= 1
    sd = make_figure_sd(0.0, 1.0, 1.0)
    ts = np.linspace(0.1, 5, 9)
    serial = [dephasing_rate(sd, t) for t in ts]
    assert map_times(lambda t: dephasing_rate(sd, t), ts, threads=4) == serial


def test_dense_table_transform():
    ref = make_figure_sd(1.0, 1.0, 1.0)
    x = np.linspace(1.0, 60.0, 4001)
    tab = make_tabulated_sd(x, ref(x), 1.0, 1.0, ref.edge_profile)
    for t in (0.5, 5.0, 50.0):
        exact = oracles.figure_transform(1.0, 1.0, t)
        # limited by the linear interpolation, not the quadrature
        close(phi_c(tab, t), exact.real, abs(exact), 1e-4)
        close(phi_s(tab, t), exact.imag, abs(exact), 1e-4)
