"""Oscillatory semi-infinite transforms of a gapped spectral density.

All integrals are written over the offset ``x = omega - omega_g`` above the
gap. Writing ``g(x) = J(omega_g + x) / (omega_g + x)``,

    phi_c(t)  = int_0^X g(x) cos(x t) dx
    phi_s(t)  = int_0^X g(x) sin(x t) dx
    gamma0(t) = phi_c sin(omega_g t) + phi_s cos(omega_g t)
    Xi0(t)    = int_0^X J(omega_g + x) (1 - cos((omega_g + x) t)) / (omega_g + x)**2 dx

The default engine partitions the head region ``[0, 40 * structure_scale]``
at the zeros of the kernel, integrates every panel with a vectorized 21-point
Gauss-Kronrod rule (adaptive bisection on failing panels) and sums the
remaining alternating panel contributions with Wynn's epsilon algorithm. An
integrable edge singularity ``g ~ x**e`` with ``-1 < e < 0`` is removed on the
first panel by ``x = u**(1/(1+e))``.

:func:`reference_transform` is an independent route through QUADPACK
(substituted QAGS head plus QAWF/QAWO Fourier tail) used as an oracle.
"""

from __future__ import annotations

import csv
import math
import os
import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

from .acceleration import wynn_epsilon
from .errors import QuadratureError
from .sd_model import GappedSpectralDensity, frequency_moment

TAIL_STRATEGIES = ("between_zeros_accelerated", "exp_window")
_EPS = np.finfo(float).eps

# 21-point Kronrod nodes (non-negative half) and weights; the Gauss 10-point
# rule uses the odd-indexed nodes.
_XK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525478240, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])
NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
_GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13, 15, 17, 19])
GAUSS_WEIGHTS = np.concatenate([_WG, _WG[::-1]])


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 5000
    singularity_exponent: float | None = None
    tail_strategy: str = "between_zeros_accelerated"
    head_factor: float = 40.0
    max_tail_panels: int = 200_000
    diagnostics: str | None = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.max_subdivisions < 64:
            raise ValueError("max_subdivisions must be at least 64")
        if self.tail_strategy not in TAIL_STRATEGIES:
            raise ValueError(f"tail_strategy must be one of {TAIL_STRATEGIES}")

    def tightened(self, rel_tol: float, abs_tol: float | None = None) -> "QuadratureConfig":
        return replace(self, rel_tol=rel_tol, abs_tol=self.abs_tol if abs_tol is None else abs_tol)


DEFAULT_CONFIG = QuadratureConfig()


class Estimate(NamedTuple):
    value: float
    error: float
    subdivisions: int = 0


@dataclass(frozen=True)
class TransformSample:
    t: float
    phi_c: float
    phi_s: float
    gamma0: float
    amplitude: float
    phase: float | None
    error_c: float = 0.0
    error_s: float = 0.0

    @property
    def gamma_error(self) -> float:
        return self.error_c + self.error_s


# ---------------------------------------------------------------------------
# panel integration

def _gk_panels(F: Callable, a: np.ndarray, b: np.ndarray):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * NODES[None, :]
    fx = F(x)
    kron = h * (fx @ KRONROD_WEIGHTS)
    gauss = h * (fx[:, _GAUSS_IDX] @ GAUSS_WEIGHTS)
    absval = np.abs(h) * (np.abs(fx) @ KRONROD_WEIGHTS)
    return kron, np.abs(kron - gauss), absval


def _adaptive(F: Callable, edges: np.ndarray, cfg: QuadratureConfig, *, budget: int | None = None,
              target_abs: float | None = None):
    """Integrate ``F`` over consecutive panels, refining until the summed
    error meets the tolerance. Returns per-panel values (aligned with the
    input panels), the total error bound and the number of splits."""
    a = np.asarray(edges[:-1], dtype=float)
    b = np.asarray(edges[1:], dtype=float)
    parent = np.arange(a.size)
    val, err, absval = _gk_panels(F, a, b)
    budget = cfg.max_subdivisions if budget is None else budget
    splits = 0
    while True:
        total = val.sum()
        floor = 50 * _EPS * absval.sum()
        target = max(cfg.abs_tol if target_abs is None else target_abs, cfg.rel_tol * abs(total), floor)
        err_sum = err.sum()
        if err_sum <= target:
            break
        width_ok = (b - a) > 64 * _EPS * np.maximum(np.abs(a), np.abs(b))
        cand = (err > target / max(err.size, 1)) & width_ok
        if not cand.any():
            cand = (err == err.max()) & width_ok
            if not cand.any():
                break
        n_new = int(cand.sum())
        if splits + n_new > budget:
            raise QuadratureError(
                f"subdivision budget {budget} exhausted (error {err_sum:.3g} > {target:.3g})",
                float(total), float(err_sum + floor),
            )
        splits += n_new
        am, bm, pm = a[cand], b[cand], parent[cand]
        mid = 0.5 * (am + bm)
        na = np.concatenate([am, mid])
        nb = np.concatenate([mid, bm])
        nv, ne, nabs = _gk_panels(F, na, nb)
        keep = ~cand
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        parent = np.concatenate([parent[keep], pm, pm])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
        absval = np.concatenate([absval[keep], nabs])
    per_panel = np.zeros(len(edges) - 1)
    np.add.at(per_panel, parent, val)
    floor = 50 * _EPS * absval.sum()
    return per_panel, float(err.sum() + floor), splits, float(absval.sum())


def _kernel_zeros(t: float, theta: float, lo: float, hi: float) -> np.ndarray:
    """Points ``x`` in ``(lo, hi)`` with ``x t + theta`` an integer multiple of pi."""
    k0 = math.floor((lo * t + theta) / math.pi) + 1
    k1 = math.ceil((hi * t + theta) / math.pi) - 1
    if k1 < k0:
        return np.empty(0)
    count = k1 - k0 + 1
    if count > 20_000_000:
        raise QuadratureError(f"{count} kernel half-periods in the head region; t is too large")
    z = (np.arange(k0, k1 + 1, dtype=float) * math.pi - theta) / t
    return z[(z > lo) & (z < hi)]


def _head_edges(t, theta, lo, hi, scale, breakpoints):
    pts = [np.array([lo, hi])]
    if t > 0:
        pts.append(_kernel_zeros(t, theta, lo, hi))
    geo = lo + scale * np.concatenate([2.0 ** -np.arange(1, 25), np.arange(1, 1 + int(math.ceil((hi - lo) / scale)))])
    pts.append(geo[(geo > lo) & (geo < hi)])
    if breakpoints:
        bp = np.asarray(breakpoints, dtype=float)
        pts.append(bp[(bp > lo) & (bp < hi)])
    edges = np.unique(np.concatenate(pts))
    return edges


def _integrate_region(F: Callable, edges: np.ndarray, exponent: float, cfg: QuadratureConfig):
    """Integrate over ``edges``; if it starts at 0 and ``F ~ x**exponent``
    with ``exponent < 0``, the first panel is mapped through ``x = u**p``."""
    total = 0.0
    err = 0.0
    splits = 0
    absval = 0.0
    if edges[0] == 0.0 and exponent < 0:
        if exponent <= -1:
            raise QuadratureError(f"integrand ~ x**{exponent:g} is not integrable at the gap edge")
        p = 1.0 / (1.0 + exponent)
        u_end = edges[1] ** (1.0 / p)

        def G(u):
            x = u**p
            with np.errstate(divide="ignore", invalid="ignore"):
                out = F(x) * p * u ** (p - 1.0)
            return np.where(u > 0, out, 0.0)

        u_edges = np.concatenate([[0.0], u_end * 2.0 ** -np.arange(30, 0, -1), [u_end]])
        vals, e, s, av = _adaptive(G, u_edges, cfg)
        total += vals.sum()
        err += e
        splits += s
        absval += av
        edges = edges[1:]
    if edges.size >= 2:
        vals, e, s, av = _adaptive(F, edges, cfg, budget=cfg.max_subdivisions - splits)
        total += vals.sum()
        err += e
        splits += s
        absval += av
    return total, err, splits, absval


def _alternating_tail(F: Callable, t: float, theta: float, start: float, end: float,
                      envelope: Callable[[float], float], head_value: float,
                      cfg: QuadratureConfig, chi0: float, scale: float):
    """Sum panels between kernel zeros from ``start`` towards ``end``.

    Returns ``(value, error, splits)`` for the tail alone.
    """
    chunk = 32
    half = math.pi / t
    sums = []
    running = 0.0
    err_acc = 0.0
    splits = 0
    lo = start
    last_estimate = None
    panels = 0
    while True:
        first = _kernel_zeros(t, theta, lo, lo + (chunk + 1) * half)
        edges = np.concatenate([[lo], first[:chunk]])
        if edges[-1] >= end:
            edges = np.concatenate([edges[edges < end], [end]])
        vals, e, s, _ = _adaptive(F, edges, cfg, budget=cfg.max_subdivisions)
        splits += s
        err_acc += e
        for v in vals:
            running += v
            sums.append(running)
        panels += vals.size
        lo = edges[-1]
        reference = abs(head_value + running)
        target = max(cfg.abs_tol, cfg.rel_tol * reference)
        env = envelope(lo)
        if lo >= end:
            return running, err_acc, splits
        # remainder of a monotone envelope beyond lo
        remainder = env * (lo / (1.0 + chi0) if math.isfinite(chi0) else scale)
        if np.abs(vals).sum() <= 0.1 * target and remainder <= 0.1 * target:
            return running, err_acc + remainder, splits
        if cfg.tail_strategy == "exp_window":
            if env < cfg.abs_tol * 1e-3 and remainder <= target:
                return running, err_acc + remainder, splits
        elif len(sums) >= 8:
            est, wynn_err = wynn_epsilon(sums[-48:])
            if last_estimate is not None:
                delta = abs(est - last_estimate)
                if max(delta, wynn_err) <= target:
                    return est, err_acc + max(delta, wynn_err), splits
            last_estimate = est
        if panels > cfg.max_tail_panels:
            best = last_estimate if last_estimate is not None else running
            raise QuadratureError(
                f"oscillatory tail did not converge within {cfg.max_tail_panels} panels",
                head_value + best, abs(vals).sum() + remainder,
            )


def _fourier(sd: GappedSpectralDensity, f: Callable, t: float, theta: float, exponent: float,
             cfg: QuadratureConfig, chi0: float | None = None) -> Estimate:
    """``int_0^X f(x) sin(x t + theta) dx`` for ``t > 0``."""
    X = sd.support_length
    scale = sd.structure_scale
    head_end = min(X, cfg.head_factor * scale)
    eff = exponent
    if math.sin(theta) == 0.0:
        eff = exponent + 1.0  # the kernel vanishes linearly at the edge

    def F(x):
        return f(x) * np.sin(x * t + theta)

    edges = _head_edges(t, theta, 0.0, head_end, scale, sd.breakpoints)
    head, err, splits, _ = _integrate_region(F, edges, eff, cfg)
    if head_end >= X:
        return Estimate(head, err, splits)
    chi0 = sd.edge_profile.chi0 if chi0 is None else chi0

    def envelope(x):
        return float(np.abs(f(np.array([x])))[0])

    tail, terr, tsplits = _alternating_tail(F, t, theta, head_end, X, envelope, head, cfg, chi0, scale)
    return Estimate(head + tail, err + terr, splits + tsplits)


# ---------------------------------------------------------------------------
# diagnostics sink

_diag_lock = threading.Lock()


def _record(cfg: QuadratureConfig, kind: str, t: float, est: Estimate):
    if not cfg.diagnostics:
        return
    with _diag_lock:
        new = not os.path.exists(cfg.diagnostics)
        with open(cfg.diagnostics, "a", newline="") as fh:
            w = csv.writer(fh)
            if new:
                w.writerow(["kind", "t", "value", "error", "subdivisions"])
            w.writerow([kind, repr(t), repr(est.value), repr(est.error), est.subdivisions])


def _exponent(sd, cfg):
    if cfg.singularity_exponent is not None:
        return float(cfg.singularity_exponent)
    return float(sd.integrand_exponent)


def _check_t(t):
    if not (t >= 0 and math.isfinite(t)):
        raise ValueError(f"t must be a finite non-negative time, got {t!r}")


# ---------------------------------------------------------------------------
# public transforms

def phi_c_estimate(sd: GappedSpectralDensity, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> Estimate:
    _check_t(t)
    if t == 0:
        value, error = frequency_moment(sd, 0, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol)
        est = Estimate(value, error)
    else:
        est = _fourier(sd, sd.reduced, t, math.pi / 2, _exponent(sd, cfg), cfg)
    _record(cfg, "phi_c", t, est)
    return est


def phi_s_estimate(sd: GappedSpectralDensity, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> Estimate:
    _check_t(t)
    est = Estimate(0.0, 0.0) if t == 0 else _fourier(sd, sd.reduced, t, 0.0, _exponent(sd, cfg), cfg)
    _record(cfg, "phi_s", t, est)
    return est


def phi_c(sd: GappedSpectralDensity, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Cosine transform of ``J(omega_g + x)/(omega_g + x)``; ``phi_c(0) = int J/omega``."""
    return phi_c_estimate(sd, t, cfg).value


def phi_s(sd: GappedSpectralDensity, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Sine transform of ``J(omega_g + x)/(omega_g + x)``."""
    return phi_s_estimate(sd, t, cfg).value


def transform_sample(sd: GappedSpectralDensity, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> TransformSample:
    from .phase import phase_angle

    if sd.gapless:
        # cos(omega_g t) = 1: the rate is the sine transform alone and phi_c may diverge
        s = phi_s_estimate(sd, t, cfg)
        return TransformSample(t, math.nan, s.value, s.value, abs(s.value), None, math.inf, s.error)
    c = phi_c_estimate(sd, t, cfg)
    s = phi_s_estimate(sd, t, cfg)
    wg = sd.omega_g * t
    gamma = c.value * math.sin(wg) + s.value * math.cos(wg)
    amp = math.hypot(c.value, s.value)
    phase = 0.0 if t == 0 else phase_angle(c.value, s.value)
    return TransformSample(t, c.value, s.value, gamma, amp, phase, c.error, s.error)


def dephasing_rate_estimate(sd: GappedSpectralDensity, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> Estimate:
    _check_t(t)
    if t == 0:
        return Estimate(0.0, 0.0)
    if sd.gapless:
        return phi_s_estimate(sd, t, cfg)
    c = phi_c_estimate(sd, t, cfg)
    s = phi_s_estimate(sd, t, cfg)
    sn, cs = math.sin(sd.omega_g * t), math.cos(sd.omega_g * t)
    value = c.value * sn + s.value * cs
    error = abs(sn) * c.error + abs(cs) * s.error + 4 * _EPS * (abs(c.value) + abs(s.value))
    est = Estimate(value, error, c.subdivisions + s.subdivisions)
    _record(cfg, "gamma0", t, est)
    return est


def dephasing_rate(sd: GappedSpectralDensity, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG,
                   check: bool = False) -> float:
    """Dephasing rate ``gamma0(t)`` via the ``(phi_c, phi_s)`` decomposition.

    With ``check=True`` the value is compared with the direct integral of
    ``J(omega)/omega sin(omega t)`` and a :class:`QuadratureError` is raised
    if the two disagree beyond ten times their combined error bounds.
    """
    est = dephasing_rate_estimate(sd, t, cfg)
    if check and t > 0:
        direct = dephasing_rate_direct(sd, t, cfg)
        if abs(direct.value - est.value) > 10 * (direct.error + est.error):
            raise QuadratureError(
                f"decomposed and direct dephasing rates disagree at t={t:g}: "
                f"{est.value:.15g} vs {direct.value:.15g}", est.value, abs(direct.value - est.value),
            )
    return est.value


def dephasing_rate_direct(sd: GappedSpectralDensity, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> Estimate:
    """``int_{omega_g}^{omega_max} J(omega)/omega sin(omega t) d omega`` without the decomposition."""
    _check_t(t)
    if t == 0:
        return Estimate(0.0, 0.0)
    theta = math.fmod(sd.omega_g * t, 2 * math.pi)
    return _fourier(sd, sd.reduced, t, theta, _exponent(sd, cfg), cfg)


def dephasing_factor_estimate(sd: GappedSpectralDensity, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> Estimate:
    _check_t(t)
    if t == 0:
        return Estimate(0.0, 0.0)
    X = sd.support_length
    scale = sd.structure_scale
    theta = math.fmod(sd.omega_g * t, 2 * math.pi)
    head_end = min(X, cfg.head_factor * scale)

    def h(x):
        return sd.reduced(x, 2)

    def F(x):
        s = np.sin(0.5 * (x * t + theta))
        return 2.0 * h(x) * s * s

    exponent = float(sd.edge_profile.alpha0)
    edges = _head_edges(t, theta, 0.0, head_end, scale, sd.breakpoints)
    head, err, splits, _ = _integrate_region(F, edges, exponent, cfg)
    value, error = head, err
    if head_end < X:
        # remaining part: int h - int h cos((omega_g + x) t), both convergent here
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            plain, perr = integrate.quad(lambda x: float(h(x)), head_end, X,
                                         epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=500)[:2]

        def G(x):
            return h(x) * np.sin(x * t + theta + math.pi / 2)

        def envelope(x):
            return float(np.abs(h(np.array([x])))[0])

        chi0 = sd.edge_profile.chi0 + 1.0
        osc, oerr, s2 = _alternating_tail(G, t, theta + math.pi / 2, head_end, X, envelope,
                                          head + plain, cfg, chi0, scale)
        value = head + plain - osc
        error = err + perr + oerr
        splits += s2
    est = Estimate(max(value, 0.0), error, splits)
    _record(cfg, "Xi0", t, est)
    return est


def dephasing_factor(sd: GappedSpectralDensity, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Dephasing factor ``Xi0(t) >= 0``; its time derivative is ``gamma0(t)``."""
    return dephasing_factor_estimate(sd, t, cfg).value


def coherence(sd: GappedSpectralDensity, t: float, rho01_initial: complex = 0.5,
              cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """Off-diagonal element ``rho01(t) = rho01(0) exp(-Xi0(t))``."""
    if abs(rho01_initial) > 0.5 + 1e-15:
        raise ValueError("|rho01(0)| must not exceed 1/2 for a valid qubit state")
    if t == 0:
        return complex(rho01_initial)
    return complex(rho01_initial) * math.exp(-dephasing_factor(sd, t, cfg))


# ---------------------------------------------------------------------------
# independent oracle

def reference_transform(sd: GappedSpectralDensity, t: float, kind: str, rel_tol: float = 1e-11,
                        abs_tol: float = 1e-14) -> Estimate:
    """QUADPACK evaluation of ``phi_c`` (``kind='cos'``) or ``phi_s`` (``kind='sin'``).

    The first kernel half-period is integrated with QAGS after the edge
    substitution; the remainder uses QAWF (infinite support) or QAWO.
    Shares no code with the panel engine.
    """
    if kind not in ("cos", "sin"):
        raise ValueError("kind must be 'cos' or 'sin'")
    if t <= 0:
        raise ValueError("reference_transform needs t > 0")
    X = sd.support_length
    kernel = np.cos if kind == "cos" else np.sin
    e = float(sd.integrand_exponent) + (1.0 if kind == "sin" else 0.0)
    c = min(X, math.pi / t, sd.structure_scale)
    mid = min(X, max(c, 40.0 * sd.structure_scale))

    def g(x):
        return float(sd.reduced(x))

    def head_x(x):
        return g(x) * float(kernel(x * t))

    results = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if e < 0:
            p = 1.0 / (1.0 + e)

            def head_u(u):
                if u == 0.0:
                    return 0.0
                x = u**p
                return head_x(x) * p * u ** (p - 1.0)

            results.append(integrate.quad(head_u, 0.0, c ** (1.0 / p), epsabs=abs_tol, epsrel=rel_tol, limit=400))
        else:
            results.append(integrate.quad(head_x, 0.0, c, epsabs=abs_tol, epsrel=rel_tol, limit=400))
        if c < mid:
            results.append(integrate.quad(g, c, mid, weight=kind, wvar=t, epsabs=abs_tol,
                                          epsrel=rel_tol, limit=5000))
        if mid < X:
            if math.isinf(X):
                results.append(integrate.quad(g, mid, math.inf, weight=kind, wvar=t, epsabs=abs_tol,
                                              limlst=200, limit=400))
            else:
                results.append(integrate.quad(g, mid, X, weight=kind, wvar=t, epsabs=abs_tol,
                                              epsrel=rel_tol, limit=5000))
    value = sum(r[0] for r in results)
    error = sum(r[1] for r in results)
    return Estimate(value, error)


# ---------------------------------------------------------------------------
# grids

def thread_count(requested: int | None = None) -> int:
    """Worker count: ``requested`` if given, else ``GAPFLOW_THREADS``, else the CPU count (max 8)."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("GAPFLOW_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def parallel_map(func: Callable, items, threads: int | None = None) -> list:
    """``[func(x) for x in items]`` on a thread pool, order preserved."""
    items = list(items)
    n = thread_count(threads)
    if n <= 1 or len(items) < 4:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))


def map_times(func: Callable[[float], object], times, threads: int | None = None) -> list:
    """Evaluate ``func`` over ``times`` preserving order."""
    return parallel_map(func, [float(t) for t in times], threads)
