"""Short-time coefficients and long-time relaxation laws of the transforms.

In dimensionless form ``phi_c(t) = (omega_s**2 / omega_g) f_c(omega_s t)`` with
``f_c(tau) = int_0^inf Lambda(nu) cos(nu tau) dnu`` (sine analogously), so
every long-time law follows from the near-zero terms of ``Lambda``.  A term
``c nu**a (-ln nu)**b`` contributes

    c tau**(-1-a) (mu ln**b tau + mu_bar ln**(b-1) tau)

to the transform, with the mu-constants of :func:`mu_constants`.  When the
leading ``mu`` vanishes by parity and there is no log factor the term drops
out and the next one decides; this is the index ``k1`` (cosine) or ``k2``
(sine) rule.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from scipy import special

from .errors import DomainError, MomentDivergenceError, UnresolvedRegimeError
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, phi_c, phi_s
from .sd_model import (
    EdgeProfile,
    ExpansionTerm,
    GappedSpectralDensity,
    LambdaExpansion,
    as_fraction,
    frequency_moment,
    is_even_natural,
    is_odd_natural,
)

TARGETS = ("phi_c", "phi_s")
# high-frequency decay the short-time expansion needs, per SD class
_SHORT_TIME_CHI0 = {"class1": 1.0, "class2": 3.0}


@dataclass(frozen=True)
class ShortTimeCoefficients:
    l_c0: float
    l_s1: float
    l_c2: float
    l0: float

    def phi_c(self, t: float) -> float:
        return self.l_c0 - self.l_c2 * t * t

    def phi_s(self, t: float) -> float:
        return self.l_s1 * t


def short_time_coeffs(sd: GappedSpectralDensity, cfg: QuadratureConfig = DEFAULT_CONFIG) -> ShortTimeCoefficients:
    """``l_c0, l_s1, l_c2`` as plain frequency moments and ``l0 = omega_g l_c0 + l_s1``.

    Raises :class:`MomentDivergenceError` (with ``.moment`` set to the
    coefficient name) when a moment diverges or the SD decays too slowly
    for the short-time expansion.
    """
    profile = sd.edge_profile
    if math.isinf(sd.support_length):
        need = _SHORT_TIME_CHI0[profile.class_tag]
        if not profile.chi0 > need:
            raise MomentDivergenceError(
                f"short-time expansion needs chi0 > {need:g} for {profile.class_tag}, "
                f"got chi0={profile.chi0:g} (l_c2 diverges or is not controlled)",
                "l_c2",
            )
    values = []
    for power, name in ((0, "l_c0"), (1, "l_s1"), (2, "l_c2")):
        try:
            v, _ = frequency_moment(sd, power, rel_tol=cfg.rel_tol, abs_tol=0.0,
                                    limit=max(200, cfg.max_subdivisions // 10))
        except MomentDivergenceError as exc:
            raise MomentDivergenceError(f"{name}: {exc}", name) from exc
        values.append(v)
    l_c0, l_s1, m2 = values
    return ShortTimeCoefficients(l_c0, l_s1, 0.5 * m2, sd.omega_g * l_c0 + l_s1)


def short_time_gamma(sd: GappedSpectralDensity, t: float, coeffs: ShortTimeCoefficients | None = None) -> float:
    """Linear short-time law ``gamma0 ~ l0 t``."""
    if t < 0:
        raise DomainError(f"t must be non-negative, got {t}")
    if coeffs is None:
        coeffs = short_time_coeffs(sd)
    return coeffs.l0 * t


def _cos_half_pi(a: Fraction) -> float:
    """``cos(pi a / 2)``, exact at integers."""
    if a.denominator == 1:
        return (1.0, 0.0, -1.0, 0.0)[a.numerator % 4]
    return math.cos(math.pi * float(a) / 2)


def _sin_half_pi(a: Fraction) -> float:
    if a.denominator == 1:
        return (0.0, 1.0, 0.0, -1.0)[a.numerator % 4]
    return math.sin(math.pi * float(a) / 2)


def mu_constants(alpha, beta, omega_g: float, omega_s: float) -> dict:
    """All mu-constants for a term ``nu**alpha (-ln nu)**beta``.

    ``mu_c, mu_s, mu_bar_c, mu_bar_s`` always; ``mu_prime_c`` when ``alpha`` is
    even natural and ``mu_prime_s`` when it is odd natural (they coincide with
    the corresponding ``mu_bar`` there).
    """
    if not omega_g > 0:
        raise DomainError("mu-constants need a positive gap frequency")
    a = as_fraction(alpha)
    b = float(beta)
    pref = omega_s**2 / omega_g
    g = special.gamma(1 + float(a))
    dg = g * special.digamma(1 + float(a))
    cos_a, sin_a = _cos_half_pi(a), _sin_half_pi(a)
    out = {
        "mu_c": pref * _cos_half_pi(1 + a) * g,
        "mu_s": pref * _sin_half_pi(1 + a) * g,
        "mu_bar_c": pref * b * (math.pi * g * cos_a / 2 + sin_a * dg),
        "mu_bar_s": pref * b * (math.pi * g * sin_a / 2 - cos_a * dg),
    }
    if is_even_natural(a) and a > 0:
        m1 = a.numerator // 2
        out["mu_prime_c"] = math.pi * pref * b * (-1) ** m1 * math.factorial(2 * m1) / 2
    if is_odd_natural(a):
        m2 = (a.numerator - 1) // 2
        out["mu_prime_s"] = (-1) ** m2 * math.pi * b * math.factorial(1 + 2 * m2) * pref / 2
    return out


@dataclass(frozen=True)
class TailLaw:
    """Dominant long-time law ``coefficient tau**exponent ln**log_exponent tau``.

    ``exponent`` is the power of ``tau = omega_s t`` and equals ``-1 - alpha'``
    of the deciding term (``index`` in the grouped Lambda expansion).
    ``subleading_coefficient`` multiplies ``tau**exponent ln**(log_exponent-1) tau``
    and is only set for class-2 profiles.
    """

    target: str
    exponent: float
    log_exponent: float
    coefficient: float
    mu_constants: dict
    regime: str
    omega_s: float
    index: int = 0
    subleading_coefficient: float = 0.0

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}")
        if not self.exponent < 0:
            raise ValueError(f"tail exponent must be negative (decay), got {self.exponent}")
        if not math.isfinite(self.coefficient):
            raise ValueError("tail coefficient must be finite")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mu_constants"] = dict(self.mu_constants)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "TailLaw":
        return cls(**data)


def _term_law(term: ExpansionTerm, target: str, class_tag: str, omega_g: float, omega_s: float):
    """Law contributed by one Lambda term, or ``None`` if it vanishes by parity."""
    mus = mu_constants(term.exponent, term.log_power, omega_g, omega_s)
    side = "c" if target == "phi_c" else "s"
    mu, mu_bar = mus[f"mu_{side}"], mus[f"mu_bar_{side}"]
    exponent = float(-1 - term.exponent)
    beta = float(term.log_power)
    if mu != 0.0:
        sub = term.coeff * mu_bar if class_tag == "class2" else 0.0
        return exponent, beta, term.coeff * mu, sub, f"mu_{side}", mus
    if beta == 0.0:
        return None
    kind = "mu_bar" if class_tag == "class2" else "mu_prime"
    return exponent, beta - 1.0, term.coeff * mu_bar, 0.0, f"{kind}_{side}", mus


def tail_law(profile: EdgeProfile, lam: LambdaExpansion, target: str,
             omega_g: float, omega_s: float) -> TailLaw:
    """Dominant long-time law of ``phi_c`` or ``phi_s``.

    Walks the grouped Lambda terms in order of exponent and returns the
    first one not annihilated by parity.  Raises
    :class:`UnresolvedRegimeError` when the truncated expansion runs out.
    """
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}")
    grouped = lam.grouped()
    if not grouped or grouped[0].exponent != profile.alpha0:
        raise ValueError("Lambda expansion does not match the edge profile")
    for index, term in enumerate(grouped):
        law = _term_law(term, target, profile.class_tag, omega_g, omega_s)
        if law is None:
            continue
        exponent, log_exp, coeff, sub, kind, mus = law
        if index == 0:
            regime = kind
        else:
            regime = f"{'k1' if target == 'phi_c' else 'k2'}:{kind}"
        return TailLaw(target, exponent, log_exp, coeff, mus, regime, omega_s, index, sub)
    raise UnresolvedRegimeError(
        f"no algebraic {target} law within the known Lambda terms "
        f"(exponents up to {grouped[-1].exponent}); the decay may be faster than any power"
    )


def tail_laws_for(sd: GappedSpectralDensity, order: int = 8) -> dict:
    """Both laws for an SD; a target that cannot be resolved maps to ``None``."""
    from .sd_model import lambda_expansion

    lam = lambda_expansion(sd.edge_profile, sd.nu0, order)
    out = {}
    for target in TARGETS:
        try:
            out[target] = tail_law(sd.edge_profile, lam, target, sd.omega_g, sd.omega_s)
        except UnresolvedRegimeError:
            out[target] = None
    return out


def tail_eval(law: TailLaw, t: float) -> float:
    tau = law.omega_s * t
    if not tau > 1:
        raise DomainError(f"tail laws need omega_s t > 1, got {tau}")
    ln = math.log(tau)
    value = law.coefficient * tau**law.exponent * ln**law.log_exponent
    if law.subleading_coefficient:
        value += law.subleading_coefficient * tau**law.exponent * ln ** (law.log_exponent - 1)
    return value


def f_c(sd: GappedSpectralDensity, tau: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Dimensionless cosine transform of ``Lambda`` at ``tau = omega_s t``."""
    return phi_c(sd, tau / sd.omega_s, cfg) * sd.omega_g / sd.omega_s**2


def f_s(sd: GappedSpectralDensity, tau: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    return phi_s(sd, tau / sd.omega_s, cfg) * sd.omega_g / sd.omega_s**2
