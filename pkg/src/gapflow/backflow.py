"""Information-backflow intervals, their bounds, and the non-Markovianity measure.

Backflow happens where the dephasing rate is negative.  Intervals are found
by sign bracketing on a grid followed by Brent root polishing; the measure
``N = int_{gamma0<0} |gamma0| exp(-Xi0) dt`` is computed both by direct
quadrature and by telescoping ``exp(-Xi0)`` across each interval.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate, optimize

from .asymptotics import tail_eval, tail_laws_for
from .errors import DomainError
from .phase import PhaseLimit
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    dephasing_factor_estimate,
    dephasing_rate,
    dephasing_rate_estimate,
    map_times,
    parallel_map,
)
from .sd_model import GappedSpectralDensity

# persistence filter: minimum length (units of 1/omega_g) and depth (units of error bound)
MIN_LENGTH = 1e-5
MIN_DEPTH = 10.0
ROOT_XTOL = 1e-6
BOUND_TOL = 1e-4
MATCH_SAMPLES = 32


def _rate_unit(sd: GappedSpectralDensity) -> float:
    """Frequency setting the time tolerances: omega_g, or omega_s without a gap."""
    return sd.omega_g if sd.omega_g > 0 else sd.omega_s


@dataclass(frozen=True)
class BackflowInterval:
    """A maximal interval with ``gamma0 < 0``.

    ``n`` counts detected intervals; ``window`` is the bound window
    ``(pi (2n-1)/omega_g, 2 pi n/omega_g]`` containing ``t_end``, which
    coincides with ``n`` whenever the angle stays in ``(0, pi)``.
    """

    n: int
    t_start: float
    t_end: float
    omega_g: float
    min_gamma: float = math.nan
    truncated_start: bool = False
    truncated_end: bool = False

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError(f"empty interval [{self.t_start}, {self.t_end}]")

    @property
    def length(self) -> float:
        return self.t_end - self.t_start

    @property
    def predicted_start_bound(self) -> float:
        if self.omega_g == 0:
            return math.nan
        return math.pi * (1 + 2 * (self.n - 1)) / self.omega_g

    @property
    def predicted_end_bound(self) -> float:
        if self.omega_g == 0:
            return math.nan
        return 2 * math.pi * self.n / self.omega_g

    @property
    def window(self) -> int | None:
        if self.omega_g == 0:
            return None
        return max(1, math.ceil(self.t_end * self.omega_g / (2 * math.pi) - 1e-12))

    @property
    def truncated(self) -> bool:
        return self.truncated_start or self.truncated_end


def _sign(values: np.ndarray) -> np.ndarray:
    return np.where(values < 0, -1, 1)


def find_negative_intervals(sd: GappedSpectralDensity, t_max: float,
                            cfg: QuadratureConfig = DEFAULT_CONFIG, *, t_min: float = 0.0,
                            first_index: int | None = None,
                            threads: int | None = None) -> list[BackflowInterval]:
    """All maximal intervals of ``(t_min, t_max]`` where the rate is negative.

    The scan grid has step ``min(pi/(8 omega_g), 1/(8 omega_s))``; each sign
    change is refined to ``1e-6/omega_g``.  Intervals touching ``t_min > 0``
    or ``t_max`` are kept and flagged as truncated.  ``first_index`` numbers
    the first interval; by default it is 1 when scanning from zero and the
    bound window of the first interval otherwise.
    """
    if not t_max > 0:
        raise DomainError(f"t_max must be positive, got {t_max}")
    if not 0 <= t_min < t_max:
        raise DomainError(f"need 0 <= t_min < t_max, got t_min={t_min}")
    unit = _rate_unit(sd)
    step = 1.0 / (8 * sd.omega_s)
    if sd.omega_g > 0:
        step = min(step, math.pi / (8 * sd.omega_g))
    count = max(2, math.ceil((t_max - t_min) / step) + 1)
    grid = np.linspace(t_min, t_max, count)
    # gamma0(0) = 0 is not informative; start the scan just after it
    if t_min == 0:
        grid = grid[1:]
    estimates = map_times(lambda t: dephasing_rate_estimate(sd, float(t), cfg), grid, threads)
    values = np.array([e.value for e in estimates])
    errors = np.array([e.error for e in estimates])
    signs = _sign(values)

    def rate(t):
        return dephasing_rate(sd, t, cfg)

    xtol = ROOT_XTOL / unit
    crossings = np.nonzero(signs[1:] != signs[:-1])[0]

    def refine(i):
        return optimize.brentq(rate, grid[i], grid[i + 1], xtol=xtol)

    roots = parallel_map(refine, crossings, threads)

    # assemble [down-crossing, up-crossing] pairs
    raw: list[tuple[float, float, bool, bool]] = []
    start = grid[0] if signs[0] < 0 else None
    start_truncated = signs[0] < 0 and t_min > 0
    for i, root in zip(crossings, roots):
        if signs[i + 1] < 0:
            start, start_truncated = root, False
        elif start is not None:
            raw.append((start, root, start_truncated, False))
            start = None
    if start is not None:
        raw.append((start, float(t_max), start_truncated, True))

    kept = []
    for a, b, ta, tb in raw:
        if not b - a > MIN_LENGTH / unit:
            continue
        inside = (grid > a) & (grid < b)
        mid = 0.5 * (a + b)
        mid_est = dephasing_rate_estimate(sd, mid, cfg)
        depth = min([mid_est.value] + list(values[inside]))
        err = max([mid_est.error] + list(errors[inside]))
        if not depth < -MIN_DEPTH * err:
            continue
        kept.append((a, b, ta, tb, depth))

    if first_index is None:
        first_index = 1
        if t_min > 0 and kept and sd.omega_g > 0:
            probe = BackflowInterval(1, kept[0][0], kept[0][1], sd.omega_g)
            first_index = probe.window
    return [
        BackflowInterval(first_index + k, float(a), float(b), sd.omega_g, float(depth), bool(ta), bool(tb))
        for k, (a, b, ta, tb, depth) in enumerate(kept)
    ]


@dataclass(frozen=True)
class BoundCheck:
    n: int
    start_margin: float
    end_margin: float
    length_margin: float
    window_count: int
    ok: bool


@dataclass(frozen=True)
class BoundsReport:
    checks: tuple[BoundCheck, ...]
    tol: float

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def violations(self) -> list[BoundCheck]:
        return [c for c in self.checks if not c.ok]

    @property
    def max_margin(self) -> float:
        """Largest excess over any bound (negative when all bounds hold)."""
        if not self.checks:
            return -math.inf
        return max(max(-c.start_margin, -c.end_margin, -c.length_margin) for c in self.checks)

    def describe(self) -> str:
        if self.ok:
            return f"all {len(self.checks)} intervals within bounds"
        parts = []
        for c in self.violations:
            parts.append(
                f"n={c.n}: start margin {c.start_margin:.3e}, end margin {c.end_margin:.3e}, "
                f"length margin {c.length_margin:.3e}, intervals in window {c.window_count}"
            )
        return "; ".join(parts)


def verify_bounds(intervals: Sequence[BackflowInterval], tol: float | None = None) -> BoundsReport:
    """Check the universal start, end and length bounds of every interval.

    Margins are ``bound - value`` (positive means satisfied).  Each interval
    must also be the only one whose end falls in its bound window.
    Truncated ends are not checked.
    """
    if not intervals:
        return BoundsReport((), 0.0 if tol is None else tol)
    omega_g = intervals[0].omega_g
    if omega_g == 0:
        raise DomainError("bounds are defined only for gapped spectral densities")
    if tol is None:
        tol = BOUND_TOL / omega_g
    per_window: dict[int, int] = {}
    for iv in intervals:
        if not iv.truncated_end:
            per_window[iv.window] = per_window.get(iv.window, 0) + 1
    checks = []
    supremum = math.pi / omega_g
    for iv in intervals:
        start_margin = math.inf if iv.truncated_start else iv.predicted_start_bound - iv.t_start
        end_margin = math.inf if iv.truncated_end else iv.predicted_end_bound - iv.t_end
        length_margin = math.inf if iv.truncated else supremum - iv.length
        window_count = per_window.get(iv.window, 0) if not iv.truncated_end else 1
        ok = (
            start_margin >= -tol and end_margin >= -tol and length_margin >= -tol
            and window_count == 1 and (iv.truncated_end or iv.window == iv.n)
        )
        checks.append(BoundCheck(iv.n, start_margin, end_margin, length_margin, window_count, ok))
    return BoundsReport(tuple(checks), tol)


def n_bar(omega_g: float, omega_s: float) -> int:
    """Index beyond which the long-time predictions apply."""
    return 2 + math.floor(omega_g / omega_s)


@dataclass(frozen=True)
class PredictedInterval:
    """Long-time prediction ``(t1, t2)``; it sits in bound window ``n + 1``."""

    n: int
    t1: float
    t2: float

    @property
    def length(self) -> float:
        return self.t2 - self.t1


def predict_intervals(limit: PhaseLimit | float, omega_g: float, epsilon0: float = 0.1,
                      n_range: Iterable[int] = range(1)) -> list[PredictedInterval]:
    if not 0 < epsilon0 < math.pi / 2:
        raise DomainError(f"epsilon0 must lie in (0, pi/2), got {epsilon0}")
    if not omega_g > 0:
        raise DomainError("predictions need a positive gap frequency")
    phi_inf = limit.value if isinstance(limit, PhaseLimit) else float(limit)
    out = []
    for n in n_range:
        t1 = (math.pi * (1 + 2 * n) - phi_inf + epsilon0) / omega_g
        t2 = (2 * math.pi * (1 + n) - phi_inf - epsilon0) / omega_g
        out.append(PredictedInterval(int(n), t1, t2))
    return out


@dataclass(frozen=True)
class MatchEntry:
    n: int
    t1: float
    t2: float
    contained: bool
    sampled_negative: bool | None


@dataclass(frozen=True)
class MatchReport:
    entries: tuple[MatchEntry, ...]

    @property
    def fraction(self) -> float:
        if not self.entries:
            return math.nan
        good = [e.contained and e.sampled_negative is not False for e in self.entries]
        return sum(good) / len(good)


def match_predictions(detected: Sequence[BackflowInterval], predicted: Sequence[PredictedInterval],
                      sd: GappedSpectralDensity | None = None,
                      cfg: QuadratureConfig = DEFAULT_CONFIG,
                      threads: int | None = None) -> MatchReport:
    """Is every predicted interval inside a detected negative interval?

    With ``sd`` given, the rate is additionally sampled at 32 interior points
    of each prediction.
    """
    entries = []
    for p in predicted:
        contained = any(d.t_start <= p.t1 and p.t2 <= d.t_end for d in detected)
        sampled = None
        if sd is not None:
            ts = p.t1 + (p.t2 - p.t1) * (np.arange(1, MATCH_SAMPLES + 1) / (MATCH_SAMPLES + 1))
            vals = map_times(lambda t: dephasing_rate(sd, float(t), cfg), ts, threads)
            sampled = bool(np.all(np.asarray(vals) < 0))
        entries.append(MatchEntry(p.n, p.t1, p.t2, contained, sampled))
    return MatchReport(tuple(entries))


@dataclass(frozen=True)
class MeasureResult:
    N_quadrature: float
    N_telescoped: float
    intervals_used: int
    truncation_time: float
    error_quadrature: float = 0.0
    error_telescoped: float = 0.0
    tail_bound: float = 0.0

    @property
    def N(self) -> float:
        return self.N_quadrature

    @property
    def discrepancy(self) -> float:
        return abs(self.N_quadrature - self.N_telescoped)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tail_bound"] = "inf" if math.isinf(self.tail_bound) else self.tail_bound
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def tail_bound(sd: GappedSpectralDensity, t_max: float) -> float:
    """Bound on the measure accumulated after ``t_max``, from the tail laws.

    Uses ``|gamma0| <= hypot(phi_c, phi_s)`` and ``exp(-Xi0) <= 1``; infinite when the
    amplitude decays no faster than ``1/t``.  Targets with no algebraic law
    (faster decay) contribute nothing.
    """
    if sd.gapless:
        return math.nan
    laws = [law for law in tail_laws_for(sd).values() if law is not None]
    if not laws:
        return 0.0
    if max(law.exponent for law in laws) >= -1:
        return math.inf
    tau0 = max(sd.omega_s * t_max, math.e)

    def amp(tau):
        return math.hypot(*[tail_eval(law, tau / sd.omega_s) for law in laws])

    value, _ = integrate.quad(amp, tau0, math.inf, limit=200)
    return value / sd.omega_s


def non_markovianity(sd: GappedSpectralDensity, t_max: float, cfg: QuadratureConfig = DEFAULT_CONFIG,
                     intervals: Sequence[BackflowInterval] | None = None,
                     threads: int | None = None) -> MeasureResult:
    """The measure ``N`` on ``(0, t_max]``, by quadrature and by telescoping."""
    if intervals is None:
        intervals = find_negative_intervals(sd, t_max, cfg, threads=threads)
    intervals = [iv for iv in intervals if iv.t_start < t_max]
    tight = cfg.tightened(1e-11, 1e-15)

    def integrand(t):
        g = dephasing_rate(sd, t, cfg)
        return abs(g) * math.exp(-dephasing_factor_estimate(sd, t, cfg).value)

    def one(iv):
        a, b = iv.t_start, min(iv.t_end, t_max)
        q, q_err = integrate.quad(integrand, a, b, epsabs=1e-15, epsrel=1e-10, limit=100)
        xa = dephasing_factor_estimate(sd, a, tight)
        xb = dephasing_factor_estimate(sd, b, tight)
        ea, eb = math.exp(-xa.value), math.exp(-xb.value)
        tel = eb - ea
        tel_err = ea * xa.error + eb * xb.error
        return q, q_err, tel, tel_err

    parts = parallel_map(one, intervals, threads)
    nq = sum(p[0] for p in parts)
    nq_err = sum(p[1] for p in parts)
    nt = sum(p[2] for p in parts)
    nt_err = sum(p[3] for p in parts)
    return MeasureResult(
        N_quadrature=nq,
        N_telescoped=nt,
        intervals_used=len(intervals),
        truncation_time=float(t_max),
        error_quadrature=nq_err,
        error_telescoped=nt_err,
        tail_bound=tail_bound(sd, t_max),
    )


INTERVAL_COLUMNS = (
    "n", "t_start_omega_s", "t_end_omega_s", "length_omega_g_over_pi",
    "start_bound_margin", "end_bound_margin",
)


def write_intervals_csv(intervals: Sequence[BackflowInterval], omega_s: float, path) -> None:
    """Interval report; times and margins in units of ``1/omega_s``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(INTERVAL_COLUMNS)
        for iv in intervals:
            length = iv.length * iv.omega_g / math.pi if iv.omega_g else math.nan
            writer.writerow([
                iv.n,
                repr(iv.t_start * omega_s),
                repr(iv.t_end * omega_s),
                repr(length),
                repr((iv.predicted_start_bound - iv.t_start) * omega_s),
                repr((iv.predicted_end_bound - iv.t_end) * omega_s),
            ])
