"""The angle of the amplitude-phase form of the dephasing rate and its long-time limit.

With ``gamma0 = phi_c sin(omega_g t) + phi_s cos(omega_g t)`` we write
``gamma0 = A sin(omega_g t + phi)`` where ``A = hypot(phi_c, phi_s)`` and ``phi``
is built from ``arccot(phi_c / phi_s)`` on the branch ``(0, pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DegenerateSampleError, UnresolvedRegimeError
from .sd_model import (
    EdgeProfile,
    ExpansionTerm,
    LambdaExpansion,
    is_even_natural,
    is_natural,
    is_odd_natural,
)

TWO_PI = 2.0 * math.pi
REGIMES = (
    "neg_alpha",
    "pos_nonnatural",
    "even_natural",
    "odd_log",
    "odd_nolog_nonodd_k2",
    "odd_nolog_odd_k2",
)


def arccot(x: float) -> float:
    """Inverse cotangent on the branch ``(0, pi)``."""
    if math.isinf(x):
        return 0.0 if x > 0 else math.pi
    return math.pi / 2 - math.atan(x)


def phase_angle(phi_c_val: float, phi_s_val: float) -> float | None:
    """Angle ``phi`` with ``A sin(w + phi) = phi_c sin(w) + phi_s cos(w)``.

    Returns ``None`` when both transforms vanish; the angle is undefined
    there and callers decide how to fill it.
    """
    if phi_s_val == 0.0:
        if phi_c_val > 0:
            return 0.0
        if phi_c_val < 0:
            return math.pi
        return None
    base = arccot(phi_c_val / phi_s_val)
    if phi_s_val > 0:
        return base
    angle = math.pi + base
    # pi + base can round up to 2 pi when phi_s is a tiny negative number
    return angle if angle < TWO_PI else 0.0


def amplitude_phase(sample) -> tuple[float, float]:
    """``(amplitude, phase)`` of a :class:`~gapflow.quadrature.TransformSample`."""
    c, s = sample.phi_c, sample.phi_s
    amplitude = math.hypot(c, s)
    if not amplitude > 0:
        raise DegenerateSampleError(f"zero amplitude at t={sample.t}: phi_c = phi_s = 0")
    return amplitude, phase_angle(c, s)


@dataclass(frozen=True)
class PhaseLimit:
    value: float
    regime: str
    inputs_used: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if not 0.0 <= self.value < TWO_PI:
            raise ValueError(f"limit {self.value} outside [0, 2pi)")


def _reduce(angle: float) -> float:
    value = math.fmod(angle, TWO_PI)
    if value < 0:
        value += TWO_PI
    # fmod(2pi - tiny) may round up to 2pi itself
    return 0.0 if value >= TWO_PI or math.isclose(value, TWO_PI, rel_tol=0, abs_tol=1e-15) else value


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def resolve_k2(lam: LambdaExpansion) -> tuple[int, ExpansionTerm]:
    """Least index ``r >= 1`` whose term carries the sine-transform asymptotics.

    That is the first ``alpha'_r`` that is not an odd natural number, or an
    odd natural one with a non-vanishing log power.
    """
    for r, term in enumerate(lam.grouped()):
        if r == 0:
            continue
        if not is_odd_natural(term.exponent) or term.log_power != 0:
            return r, term
    raise UnresolvedRegimeError(
        "index k2 not found in the truncated Lambda expansion; declare more edge terms "
        "or raise known_through"
    )


def resolve_k1(lam: LambdaExpansion) -> tuple[int, ExpansionTerm]:
    """Cosine-transform analogue of :func:`resolve_k2` (even parity test)."""
    for r, term in enumerate(lam.grouped()):
        if r == 0:
            continue
        if not is_even_natural(term.exponent) or term.log_power != 0:
            return r, term
    raise UnresolvedRegimeError(
        "index k1 not found in the truncated Lambda expansion; declare more edge terms "
        "or raise known_through"
    )


def _sine_sign(term: ExpansionTerm) -> int:
    """Sign of the dominant sine-transform contribution of a k2 term.

    Not odd natural: sign of ``c * sin(pi (1+a)/2) = c * cos(pi a / 2)``.
    Odd natural ``1 + 2 m``: sign of ``c * beta * (-1)**m``.
    """
    a = term.exponent
    if is_odd_natural(a):
        m = (a.numerator - 1) // 2
        return _sign(term.coeff) * _sign(float(term.log_power)) * (-1) ** m
    return _sign(term.coeff) * _sign(math.cos(math.pi * float(a) / 2))


def phase_limit(profile: EdgeProfile, lam: LambdaExpansion) -> PhaseLimit:
    """Closed-form ``phi(infinity)`` from the near-edge structure.

    The regime is picked by exact rational tests on the declared exponents.
    Raw values equal to ``2 pi`` are reported as ``0``; the unreduced angle
    is kept in ``inputs_used["unreduced"]``.
    """
    a0: Fraction = profile.alpha0
    log0 = profile.log_power
    if lam.terms and lam.grouped()[0].exponent != a0:
        raise ValueError("Lambda expansion does not match the edge profile")
    pi = math.pi
    inputs: dict = {"alpha0": a0, "log_power": log0}

    if a0 < 0:
        regime, raw = "neg_alpha", pi * (1 + float(a0)) / 2
    elif not is_natural(a0):
        half = (1 + a0) / 2
        theta = 1.0 if math.cos(pi * float(a0) / 2) < 0 else 0.0
        regime = "pos_nonnatural"
        raw = pi * (float(half - math.floor(half)) + theta)
    elif is_even_natural(a0):
        m = a0.numerator // 2
        inputs["m"] = m
        regime, raw = "even_natural", (pi / 2) * (2 - (-1) ** m)
    else:
        m = (a0.numerator - 1) // 2
        inputs["m"] = m
        if log0 != 0:
            regime, raw = "odd_log", (pi / 2) * (3 - (-1) ** m)
        else:
            k2, term = resolve_k2(lam)
            sign = _sine_sign(term)
            inputs.update(k2=k2, alpha_k2=term.exponent, log_power_k2=term.log_power, sign_k2=sign)
            if is_odd_natural(term.exponent):
                inputs["m_k2"] = (term.exponent.numerator - 1) // 2
                regime = "odd_nolog_odd_k2"
            else:
                regime = "odd_nolog_nonodd_k2"
            # (pi/2)(2 + ((-1)^m - 1) s); s reduces to sign(cos(pi a'/2)) or (-1)^m_k2
            # for a positive coefficient and log power
            raw = (pi / 2) * (2 + ((-1) ** m - 1) * sign)
    inputs["unreduced"] = raw
    return PhaseLimit(_reduce(raw), regime, inputs)
