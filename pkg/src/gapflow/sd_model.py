"""Spectral densities with a low-frequency gap.

A gapped spectral density (SD) vanishes for ``0 <= omega < omega_g`` and is
described above the gap by the dimensionless profile

    J(omega_g + omega_s * nu) = omega_s * Omega(nu),

with ``Lambda(nu) = Omega(nu) / (1 + nu / nu0)`` and ``nu0 = omega_g / omega_s``.
The near-edge expansion of ``Omega`` is declared through an :class:`EdgeProfile`;
it is never inferred from samples.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate, special

from .errors import MomentDivergenceError, SpectralDensityError

FAMILIES = ("power_law_exp", "lorentzian_gap", "figure_ohmic_gap", "custom")
CLASSES = ("class1", "class2")
DEFAULT_EXPANSION_ORDER = 8

# Tolerances for the constructor's integrability check.
_INTEGRABILITY_RTOL = 1e-8
_INTEGRABILITY_LIMIT = 500
# knot count beyond which tables are integrated span by span
_DENSE_KNOTS = 200


def as_fraction(value) -> Fraction:
    """Exact rational view of a user-declared exponent.

    Floats are read through their shortest decimal repr, so ``-0.5`` becomes
    ``-1/2`` and ``0.1`` becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    value = float(value)
    if not math.isfinite(value):
        raise SpectralDensityError(f"exponent must be finite, got {value!r}")
    return Fraction(repr(value))


def is_natural(x: Fraction) -> bool:
    return x.denominator == 1 and x >= 0


def is_even_natural(x: Fraction) -> bool:
    return is_natural(x) and x.numerator % 2 == 0


def is_odd_natural(x: Fraction) -> bool:
    return is_natural(x) and x.numerator % 2 == 1


class ExpansionTerm(NamedTuple):
    """One term ``coeff * nu**exponent * (-ln nu)**log_power``."""

    exponent: Fraction
    log_power: Fraction
    coeff: float


@dataclass(frozen=True)
class EdgeProfile:
    """Leading asymptotic data of ``Omega(nu)`` as ``nu -> 0+``.

    ``higher_terms`` are the further terms of the expansion. They are taken
    to be exhaustive for exponents up to ``known_through``; the default
    (infinity) declares the listed terms to be the complete expansion.
    ``chi0`` is the high-frequency decay exponent, ``Omega = O(nu**(-1-chi0))``;
    use ``math.inf`` for faster-than-algebraic decay.
    """

    class_tag: str
    alpha0: Fraction
    log_power: Fraction
    leading_coeff: float
    higher_terms: tuple[ExpansionTerm, ...] = ()
    chi0: float = math.inf
    known_through: float | Fraction = math.inf

    def __post_init__(self):
        if self.class_tag not in CLASSES:
            raise SpectralDensityError(
                f"class_tag must be one of {CLASSES}, got {self.class_tag!r}", "class_tag"
            )
        alpha0 = as_fraction(self.alpha0)
        log_power = as_fraction(self.log_power)
        object.__setattr__(self, "alpha0", alpha0)
        object.__setattr__(self, "log_power", log_power)
        if alpha0 <= -1:
            raise SpectralDensityError(f"alpha0 must exceed -1, got {alpha0}", "alpha0")
        if not (self.leading_coeff > 0 and math.isfinite(self.leading_coeff)):
            raise SpectralDensityError(
                f"leading_coeff must be positive, got {self.leading_coeff}", "leading_coeff"
            )
        if self.class_tag == "class1" and not is_natural(log_power):
            raise SpectralDensityError(
                f"class1 log power must be a non-negative integer, got {log_power}", "log_power"
            )
        if alpha0 == 0 and log_power != 0:
            raise SpectralDensityError(
                "alpha0 = 0 requires a vanishing log power (summability)", "log_power"
            )
        if not self.chi0 > 0:
            raise SpectralDensityError(f"chi0 must be positive, got {self.chi0}", "chi0")
        known = self.known_through
        if not (isinstance(known, float) and math.isinf(known)):
            known = as_fraction(known)
        object.__setattr__(self, "known_through", known)

        terms = []
        for raw in self.higher_terms:
            exponent, lp, coeff = raw
            term = ExpansionTerm(as_fraction(exponent), as_fraction(lp), float(coeff))
            if self.class_tag == "class1" and not is_natural(term.log_power):
                raise SpectralDensityError(
                    f"class1 log power must be a non-negative integer, got {term.log_power}",
                    "higher_terms",
                )
            terms.append(term)
        object.__setattr__(self, "higher_terms", tuple(terms))

        keys = [(alpha0, -log_power)] + [(t.exponent, -t.log_power) for t in terms]
        for prev, nxt in zip(keys, keys[1:]):
            if not nxt > prev:
                raise SpectralDensityError(
                    "expansion terms must be strictly ordered by exponent "
                    "(then by decreasing log power)",
                    "higher_terms",
                )

    @property
    def leading_term(self) -> ExpansionTerm:
        return ExpansionTerm(self.alpha0, self.log_power, self.leading_coeff)

    @property
    def terms(self) -> tuple[ExpansionTerm, ...]:
        return (self.leading_term,) + self.higher_terms

    def to_dict(self) -> dict:
        return {
            "class": self.class_tag,
            "alpha0": str(self.alpha0),
            "log_power": str(self.log_power),
            "coeff": self.leading_coeff,
            "chi0": _json_float(self.chi0),
            "higher_terms": [[str(t.exponent), str(t.log_power), t.coeff] for t in self.higher_terms],
            "known_through": _json_float(self.known_through),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EdgeProfile":
        known = data.get("known_through", "inf")
        return cls(
            class_tag=data.get("class", "class1"),
            alpha0=data["alpha0"],
            log_power=data.get("log_power", 0),
            leading_coeff=float(data["coeff"]),
            higher_terms=tuple(tuple(t) for t in data.get("higher_terms", ())),
            chi0=float(data.get("chi0", math.inf)),
            known_through=math.inf if known in ("inf", None) else known,
        )


def _json_float(x):
    if isinstance(x, Fraction):
        return str(x)
    if math.isinf(x):
        return "inf"
    return float(x)


@dataclass(frozen=True)
class LambdaExpansion:
    """Truncated near-zero expansion of ``Lambda(nu)``."""

    nu0: float
    terms: tuple[ExpansionTerm, ...]
    class_tag: str = "class1"

    def grouped(self) -> list[ExpansionTerm]:
        """One entry per distinct exponent, carrying the top log power.

        These are the ``(alpha'_r, n'_r or beta'_r, coefficient)`` triples the
        long-time formulas consume; index 0 is the leading term.
        """
        out: list[ExpansionTerm] = []
        for term in self.terms:
            if out and out[-1].exponent == term.exponent:
                continue  # terms are sorted by decreasing log power within an exponent
            out.append(term)
        return out

    @property
    def leading(self) -> ExpansionTerm:
        return self.terms[0]

    def evaluate(self, nu, n_terms: int | None = None):
        nu = np.asarray(nu, dtype=float)
        total = np.zeros_like(nu)
        for term in self.terms[:n_terms]:
            total = total + term.coeff * nu ** float(term.exponent) * (-np.log(nu)) ** float(term.log_power)
        return total


def lambda_expansion(profile: EdgeProfile, nu0: float, order: int = DEFAULT_EXPANSION_ORDER) -> LambdaExpansion:
    """Expand ``Lambda = Omega / (1 + nu/nu0)`` as a product of series.

    The geometric series ``sum_l (-nu/nu0)**l`` multiplies every declared
    term of ``Omega``; products with equal exponent and log power are merged.
    Only exponents not beyond ``profile.known_through`` are returned, since
    unknown terms of ``Omega`` would contribute above that point.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if not nu0 > 0:
        raise SpectralDensityError("nu0 must be positive; Lambda is undefined without a gap", "nu0")
    known = profile.known_through
    source = profile.terms
    # exponents below this bound are complete after merging
    ceiling = source[0].exponent + order + 2
    if not _is_inf(known):
        ceiling = min(ceiling, known + Fraction(1, 10**9))

    merged: dict[tuple[Fraction, Fraction], float] = {}
    for term in source:
        for l in range(order + 3):
            exponent = term.exponent + l
            if exponent >= ceiling:
                break
            key = (exponent, term.log_power)
            merged[key] = merged.get(key, 0.0) + term.coeff * (-1.0 / nu0) ** l

    scale = max(abs(c) for c in merged.values())
    items = [
        ExpansionTerm(e, lp, c)
        for (e, lp), c in merged.items()
        if abs(c) > 1e-13 * scale
    ]
    items.sort(key=lambda t: (t.exponent, -t.log_power))
    return LambdaExpansion(nu0=float(nu0), terms=tuple(items[:order]), class_tag=profile.class_tag)


def _is_inf(x) -> bool:
    return isinstance(x, float) and math.isinf(x)


@dataclass(frozen=True, eq=False)
class GappedSpectralDensity:
    """Evaluable spectral density ``J(omega)`` with a hard gap below ``omega_g``.

    ``evaluator`` gives the spectral weight on the support and must accept
    numpy arrays; the gap truncation and the upper support edge are applied
    here. ``offset_evaluator``, when given, computes ``J(omega_g + x)`` from the
    offset ``x`` directly and is used by the quadrature so that points next to
    the gap edge do not lose precision to the subtraction ``omega - omega_g``. ``structure_scale`` is the frequency offset above the gap on which
    the SD has its structure; quadrature treats ``[0, 40 * structure_scale]``
    as the head region and accelerates the oscillatory remainder.
    """

    omega_g: float
    omega_s: float
    omega_max: float
    evaluator: Callable[[np.ndarray], np.ndarray]
    edge_profile: EdgeProfile
    family_tag: str = "custom"
    params: dict = field(default_factory=dict)
    structure_scale: float = 0.0
    breakpoints: tuple[float, ...] = ()
    offset_evaluator: Callable[[np.ndarray], np.ndarray] | None = None
    integral_j_over_omega: float = field(default=math.nan, init=False)

    def __post_init__(self):
        if self.family_tag not in FAMILIES:
            raise SpectralDensityError(f"unknown family {self.family_tag!r}", "family_tag")
        _require_positive("omega_s", self.omega_s)
        if not (self.omega_g >= 0 and math.isfinite(self.omega_g)):
            raise SpectralDensityError(f"omega_g must be non-negative, got {self.omega_g}", "omega_g")
        if self.omega_g == 0 and self.family_tag != "figure_ohmic_gap":
            raise SpectralDensityError("omega_g must be strictly positive", "omega_g")
        if not self.omega_max > self.omega_g:
            raise SpectralDensityError("omega_max must exceed omega_g", "omega_max")
        if self.structure_scale <= 0:
            scale = self.omega_s if math.isinf(self.omega_max) else self.omega_max - self.omega_g
            object.__setattr__(self, "structure_scale", float(scale))
        if self.gapless:
            value = math.inf if self.edge_profile.alpha0 <= 0 else self._integrability()
        else:
            value = self._integrability()
        object.__setattr__(self, "integral_j_over_omega", value)

    def _integrability(self) -> float:
        try:
            value, _ = frequency_moment(self, 0, rel_tol=_INTEGRABILITY_RTOL, limit=_INTEGRABILITY_LIMIT)
        except MomentDivergenceError as exc:
            raise SpectralDensityError(f"integral of J/omega does not converge: {exc}", "evaluator") from exc
        return value

    @property
    def gapless(self) -> bool:
        return self.omega_g == 0

    @property
    def nu0(self) -> float:
        return self.omega_g / self.omega_s

    @property
    def support_length(self) -> float:
        """Length of the support above the gap (``inf`` for unbounded)."""
        return self.omega_max - self.omega_g

    @property
    def integrand_exponent(self) -> Fraction:
        """Power of ``x`` in ``J(omega_g + x) / (omega_g + x)`` as ``x -> 0+``."""
        a0 = self.edge_profile.alpha0
        return a0 - 1 if self.gapless else a0

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        out = np.zeros_like(omega)
        mask = (omega >= self.omega_g) & (omega <= self.omega_max)
        if np.any(mask):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                out[mask] = self.evaluator(omega[mask])
        return out if out.ndim else float(out)

    def reduced(self, x, power: int = 1):
        """``J(omega_g + x) / (omega_g + x)**power`` for offsets ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        w = self.omega_g + x
        if self.offset_evaluator is None:
            j = self(w)
        else:
            j = np.zeros_like(x)
            mask = (x >= 0) & (x <= self.support_length)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                j[mask] = self.offset_evaluator(x[mask])
        with np.errstate(divide="ignore", invalid="ignore"):
            out = j / w**power
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        return {
            "family": self.family_tag,
            "params": dict(self.params),
            "omega_g": self.omega_g,
            "omega_s": self.omega_s,
            "edge_profile": self.edge_profile.to_dict(),
        }


def _require_positive(name, value):
    try:
        ok = value > 0 and math.isfinite(value)
    except TypeError:
        ok = False
    if not ok:
        raise SpectralDensityError(f"{name} must be a positive finite number, got {value!r}", name)


def frequency_moment(sd: GappedSpectralDensity, power: int, rel_tol: float = 1e-10,
                     abs_tol: float = 0.0, limit: int = 500, kernel_power: int = 1):
    """``int_0^X J(omega_g+x)/(omega_g+x)**kernel_power * x**power dx``.

    Non-oscillatory; the integrable edge singularity is removed by the
    substitution ``x = u**(1/(1+e))`` on the head piece. Returns
    ``(value, error)``.
    """
    exponent = float(sd.integrand_exponent) + power
    if kernel_power == 2 and sd.gapless:
        exponent -= 1
    if exponent <= -1:
        raise MomentDivergenceError(
            f"moment x**{power} diverges at the gap edge (local exponent {exponent:g})", power
        )
    X = sd.support_length
    if math.isinf(X):
        chi0 = sd.edge_profile.chi0
        # integrand decays like x**(power - 1 - kernel_power - chi0)
        if power - kernel_power - chi0 >= 0:
            raise MomentDivergenceError(
                f"moment x**{power} diverges at high frequency (chi0={chi0:g})", power
            )

    def f(x):
        return float(sd.reduced(x, kernel_power)) * x**power

    split = min(sd.structure_scale, X)
    total = 0.0
    err = 0.0
    pieces = []
    if exponent < 0:
        p = 1.0 / (1.0 + exponent)
        u_end = split ** (1.0 / p)

        def head(u):
            if u == 0.0:
                return 0.0
            x = u**p
            return f(x) * p * u ** (p - 1.0)

        pieces.append((head, 0.0, u_end, ()))
    else:
        pts = tuple(b for b in sd.breakpoints if 0 < b < split)
        pieces.append((f, 0.0, split, pts))
    if split < X:
        pts = tuple(b for b in sd.breakpoints if split < b < X) if math.isfinite(X) else ()
        pieces.append((f, split, X, pts))

    for func, a, b, pts in pieces:
        if len(pts) > _DENSE_KNOTS and math.isfinite(b):
            value, error = _span_quadrature(
                lambda x: np.asarray(sd.reduced(x, kernel_power), dtype=float) * x**power,
                np.concatenate([[a], pts, [b]]),
            )
            total += value
            err += error
            continue
        kwargs = dict(epsabs=abs_tol, epsrel=rel_tol, limit=limit, full_output=1)
        if pts and math.isfinite(b):
            kwargs["points"] = pts
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            res = integrate.quad(func, a, b, **kwargs)
        value, error = res[0], res[1]
        bad = len(res) > 3 and res[2].get("last", 0) >= limit
        if not math.isfinite(value) or (len(res) > 3 and error > max(abs_tol, 10 * rel_tol * abs(value))) or bad:
            raise MomentDivergenceError(
                f"moment x**{power} did not converge (estimate {value:g}, error {error:g})", power
            )
        total += value
        err += error
    return total, err


def _span_quadrature(func: Callable[[np.ndarray], np.ndarray], edges: np.ndarray):
    """Gauss-Legendre on every span of a dense knot set (smooth between knots).

    The error is the difference between the 8- and 16-point rules.
    """
    a, b = edges[:-1], edges[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    results = []
    for n in (8, 16):
        x, w = np.polynomial.legendre.leggauss(n)
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        vals = func(nodes).reshape(len(a), n)
        results.append(float(np.sum(half * (vals @ w))))
    return results[1], abs(results[1] - results[0])


def lambda_function(sd: GappedSpectralDensity, nu):
    """``Lambda(nu) = Omega(nu) / (1 + nu/nu0)`` with ``Omega(nu) = J(omega_g + omega_s nu) / omega_s``."""
    if sd.gapless:
        raise SpectralDensityError("Lambda is undefined for a gapless SD (nu0 = 0)", "omega_g")
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 0):
        raise SpectralDensityError("nu must be non-negative", "nu")
    omega = sd.omega_g + sd.omega_s * nu
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.asarray(sd(omega), dtype=float) / sd.omega_s / (1.0 + nu / sd.nu0)
    if sd.edge_profile.alpha0 > 0:
        out = np.where(nu == 0, 0.0, out)
    return out if out.ndim else float(out)


class BackflowCheck(NamedTuple):
    ok: bool
    first_violation: float | None
    max_excess: float

    def __bool__(self):
        return self.ok


def check_backflow_condition(sd: GappedSpectralDensity, grid: Sequence[float] | None = None,
                             tol: float = 1e-8) -> BackflowCheck:
    """Test ``J'(omega) < J(omega)/omega`` on a frequency grid above the gap.

    The derivative is a central difference with step ``1e-6 * max(omega,
    omega_s)``. A point violates the condition when ``J' - J/omega`` exceeds
    ``tol`` relative to ``max(|J/omega|, |J'|, tiny)``.
    """
    if grid is None:
        top = min(sd.omega_max, sd.omega_g + 50.0 * max(sd.structure_scale, sd.omega_s))
        lo = sd.omega_g + 1e-6 * sd.omega_s
        grid = sd.omega_g + np.geomspace(lo - sd.omega_g, top - sd.omega_g, 2000)[:-1]
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= sd.omega_g):
        bad = float(grid[grid <= sd.omega_g][0])
        raise SpectralDensityError(f"grid point {bad:g} is not above the gap edge {sd.omega_g:g}", "grid")
    if np.any(grid >= sd.omega_max):
        raise SpectralDensityError("grid must lie strictly inside the support", "grid")

    h = 1e-6 * np.maximum(grid, sd.omega_s)
    h = np.minimum(h, 0.5 * (grid - sd.omega_g))
    h = np.minimum(h, 0.5 * (sd.omega_max - grid)) if math.isfinite(sd.omega_max) else h
    jp = (np.asarray(sd(grid + h)) - np.asarray(sd(grid - h))) / (2 * h)
    ratio = np.asarray(sd(grid)) / grid
    excess = (jp - ratio) / np.maximum(np.maximum(np.abs(ratio), np.abs(jp)), 1e-300)
    bad = np.nonzero(excess > tol)[0]
    worst = float(np.max(excess)) if excess.size else -math.inf
    if bad.size:
        return BackflowCheck(False, float(grid[bad[0]]), worst)
    return BackflowCheck(True, None, worst)


# ---------------------------------------------------------------------------
# built-in families

def make_power_law_gap_sd(q1: float, alpha: float, lambda1: float, omega_g: float,
                          omega_s: float | None = None, n_terms: int = DEFAULT_EXPANSION_ORDER
                          ) -> GappedSpectralDensity:
    """``J(omega_g + w) = q1 * w**alpha * exp(-lambda1 * w)`` with ``-1 < alpha < 0``.

    ``lambda1`` is an inverse frequency; ``omega_s`` defaults to ``1/lambda1``.
    """
    _require_positive("q1", q1)
    _require_positive("lambda1", lambda1)
    _require_positive("omega_g", omega_g)
    if not (-1 < alpha < 0):
        raise SpectralDensityError(f"alpha must lie in (-1, 0), got {alpha!r}", "alpha")
    omega_s = 1.0 / lambda1 if omega_s is None else omega_s
    _require_positive("omega_s", omega_s)
    a = as_fraction(alpha)
    af = float(alpha)

    def offset(x):
        return q1 * x**af * np.exp(-lambda1 * x)

    def evaluator(w):
        return offset(w - omega_g)

    c0 = q1 * omega_s ** (af - 1.0)
    r = -lambda1 * omega_s
    higher = tuple((a + k, 0, c0 * r**k / math.factorial(k)) for k in range(1, n_terms))
    profile = EdgeProfile("class1", a, 0, c0, higher, chi0=math.inf, known_through=a + n_terms - 1)
    return GappedSpectralDensity(
        omega_g=float(omega_g), omega_s=float(omega_s), omega_max=math.inf,
        evaluator=evaluator, edge_profile=profile, family_tag="power_law_exp",
        params={"q1": q1, "alpha": alpha, "lambda1": lambda1},
        structure_scale=1.0 / lambda1, offset_evaluator=offset,
    )


def make_lorentzian_gap_sd(q2: float, lambda2: float, omega_g: float,
                           omega_s: float | None = None, n_terms: int = DEFAULT_EXPANSION_ORDER
                           ) -> GappedSpectralDensity:
    """``J(omega_g + w) = q2 / (lambda2**2 + w**2)``; ``omega_s`` defaults to ``lambda2``."""
    _require_positive("q2", q2)
    _require_positive("lambda2", lambda2)
    _require_positive("omega_g", omega_g)
    omega_s = lambda2 if omega_s is None else omega_s
    _require_positive("omega_s", omega_s)

    def offset(x):
        return q2 / (lambda2**2 + x**2)

    def evaluator(w):
        return offset(w - omega_g)

    c0 = q2 / (omega_s * lambda2**2)
    r = -((omega_s / lambda2) ** 2)
    higher = tuple((2 * k, 0, c0 * r**k) for k in range(1, n_terms))
    # odd powers vanish identically, so the listing is exhaustive up to 2*n_terms - 1
    profile = EdgeProfile("class1", 0, 0, c0, higher, chi0=1.0, known_through=2 * n_terms - 1)
    return GappedSpectralDensity(
        omega_g=float(omega_g), omega_s=float(omega_s), omega_max=math.inf,
        evaluator=evaluator, edge_profile=profile, family_tag="lorentzian_gap",
        params={"q2": q2, "lambda2": lambda2},
        structure_scale=float(lambda2), offset_evaluator=offset,
    )


def make_figure_sd(alpha: float, omega_g: float, omega_s: float,
                   n_terms: int = DEFAULT_EXPANSION_ORDER) -> GappedSpectralDensity:
    """``J(omega) = omega_s (omega/omega_s)**alpha exp(-omega/omega_s)`` for ``omega >= omega_g``.

    ``omega_g = 0`` gives the ungapped ohmic-like control reservoir.
    """
    if not (alpha >= 0 and math.isfinite(alpha)):
        raise SpectralDensityError(f"alpha must be non-negative, got {alpha!r}", "alpha")
    _require_positive("omega_s", omega_s)
    if not (omega_g >= 0 and math.isfinite(omega_g)):
        raise SpectralDensityError(f"omega_g must be non-negative, got {omega_g!r}", "omega_g")
    af = float(alpha)

    def evaluator(w):
        y = w / omega_s
        return omega_s * y**af * np.exp(-y)

    nu0 = omega_g / omega_s
    if omega_g > 0:
        # Omega(nu) = (nu0 + nu)**alpha * exp(-nu0 - nu), Taylor-expanded at nu = 0
        coeffs = []
        for k in range(n_terms):
            s = sum(
                special.binom(af, i) * nu0 ** (af - i) * (-1.0) ** (k - i) / math.factorial(k - i)
                for i in range(k + 1)
            )
            coeffs.append(math.exp(-nu0) * s)
        higher = tuple((k, 0, c) for k, c in enumerate(coeffs) if k > 0 and c != 0.0)
        profile = EdgeProfile("class1", 0, 0, coeffs[0], higher, chi0=math.inf,
                              known_through=n_terms - 1)
    else:
        a = as_fraction(alpha)
        higher = tuple((a + k, 0, (-1.0) ** k / math.factorial(k)) for k in range(1, n_terms))
        profile = EdgeProfile("class1", a, 0, 1.0, higher, chi0=math.inf,
                              known_through=a + n_terms - 1)
    return GappedSpectralDensity(
        omega_g=float(omega_g), omega_s=float(omega_s), omega_max=math.inf,
        evaluator=evaluator, edge_profile=profile, family_tag="figure_ohmic_gap",
        params={"alpha": alpha},
        structure_scale=float(omega_s), offset_evaluator=lambda x: evaluator(omega_g + x),
    )


def make_tabulated_sd(omega_over_omega_s: Sequence[float], j_over_omega_s: Sequence[float],
                      omega_g: float, omega_s: float, edge_profile: EdgeProfile,
                      source: str | None = None) -> GappedSpectralDensity:
    """Custom SD from tabulated ``(omega/omega_s, J/omega_s)`` pairs, linearly interpolated.

    The table must cover the support ``[omega_g, omega_max]``; ``omega_max``
    is the last tabulated frequency.
    """
    w = np.asarray(omega_over_omega_s, dtype=float) * omega_s
    j = np.asarray(j_over_omega_s, dtype=float) * omega_s
    if w.ndim != 1 or w.shape != j.shape or w.size < 2:
        raise SpectralDensityError("table needs two equal-length columns with >= 2 rows", "table")
    if np.any(np.diff(w) <= 0):
        raise SpectralDensityError("tabulated frequencies must be strictly increasing", "table")
    if np.any(j < 0) or not np.all(np.isfinite(j)):
        raise SpectralDensityError("tabulated J must be finite and non-negative", "table")
    _require_positive("omega_g", omega_g)
    if w[0] > omega_g * (1 + 1e-12):
        raise SpectralDensityError("table must start at or below omega_g", "table")

    def evaluator(x):
        return np.interp(x, w, j)

    inner = tuple(float(b - omega_g) for b in w if omega_g < b < w[-1])
    params = {"table": source} if source else {"points": [[a, b] for a, b in zip(w / omega_s, j / omega_s)]}
    return GappedSpectralDensity(
        omega_g=float(omega_g), omega_s=float(omega_s), omega_max=float(w[-1]),
        evaluator=evaluator, edge_profile=edge_profile, family_tag="custom",
        params=params, breakpoints=inner,
    )


def rescaled(sd: GappedSpectralDensity, c: float) -> GappedSpectralDensity:
    """SD with ``(omega_g, omega_s, J) -> (c omega_g, c omega_s, c J(./c))``."""
    _require_positive("c", c)
    inner = sd.evaluator
    inner_offset = sd.offset_evaluator
    profile = sd.edge_profile
    return GappedSpectralDensity(
        omega_g=c * sd.omega_g, omega_s=c * sd.omega_s, omega_max=c * sd.omega_max,
        evaluator=lambda w: c * inner(w / c), edge_profile=profile, family_tag=sd.family_tag,
        params=dict(sd.params, rescaled_by=c), structure_scale=c * sd.structure_scale,
        breakpoints=tuple(c * b for b in sd.breakpoints),
        offset_evaluator=None if inner_offset is None else (lambda x: c * inner_offset(x / c)),
    )
