import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from gapflow import (  # noqa: E402
    EdgeProfile,
    GappedSpectralDensity,
    make_figure_sd,
    make_lorentzian_gap_sd,
    make_power_law_gap_sd,
)

settings.register_profile(
    "gapflow", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("gapflow")


def builtin_sds():
    """One representative per built-in family (plus two figure gaps)."""
    return {
        "J1": make_power_law_gap_sd(1.0, -0.5, 1.0, 1.0),
        "J1_quarter": make_power_law_gap_sd(1.0, -0.25, 1.0, 1.0),
        "J2": make_lorentzian_gap_sd(1.0, 1.0, 1.0),
        "figure_a0_g1": make_figure_sd(0.0, 1.0, 1.0),
        "figure_a1_g10": make_figure_sd(1.0, 10.0, 1.0),
        "figure_a2_g5": make_figure_sd(2.0, 5.0, 1.0),
    }


def power_exp_sd(alpha, omega_g=1.0, omega_s=1.0, n_terms=8):
    """Custom ``Omega(nu) = nu**alpha exp(-nu)`` with any ``alpha > -1``."""
    a = float(alpha)
    terms = tuple((alpha + k, 0, (-1.0) ** k / math.factorial(k)) for k in range(1, n_terms))

    def offset(x):
        y = x / omega_s
        return omega_s * y**a * np.exp(-y)

    profile = EdgeProfile("class1", alpha, 0, 1.0, terms, known_through=alpha + n_terms - 1)
    return GappedSpectralDensity(
        omega_g=omega_g, omega_s=omega_s, omega_max=math.inf,
        evaluator=lambda w: offset(w - omega_g), edge_profile=profile, family_tag="custom",
        params={"alpha": alpha}, structure_scale=omega_s, offset_evaluator=offset,
    )


def log_exp_sd(alpha, beta=1, class_tag="class1", omega_g=1.0, omega_s=1.0):
    """Custom ``Omega = nu**alpha ln(1 + 1/nu)**beta exp(-nu)``.

    Near zero ``ln(1 + 1/nu) = -ln nu + ln(1 + nu)``, so the leading term is
    ``nu**alpha (-ln nu)**beta``.  Only the leading term is declared; the
    next exponent is ``alpha + 1``.
    """
    a, b = float(alpha), float(beta)

    def offset(x):
        y = x / omega_s
        return omega_s * y**a * np.log1p(1.0 / y) ** b * np.exp(-y)

    profile = EdgeProfile(class_tag, alpha, beta, 1.0, (), known_through=alpha)
    return GappedSpectralDensity(
        omega_g=omega_g, omega_s=omega_s, omega_max=math.inf,
        evaluator=lambda w: offset(w - omega_g), edge_profile=profile, family_tag="custom",
        params={"alpha": alpha, "beta": beta}, structure_scale=omega_s, offset_evaluator=offset,
    )


@pytest.fixture(scope="session")
def sds():
    return builtin_sds()
