"""Curve distances and perturbation-rate experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core_flow import DrivingTerm, Geometry, driving_gap, evaluate_batch
from .errors import DomainError, GridMismatch, HypothesisFailed
from .trace import TracedCurve, trace_curve

C_DOUBLE_PRIME = 10.0
C_TIP = 4.0
C_DERIV = 4.0


@dataclass(frozen=True)
class RateFit:
    xs: np.ndarray
    ys: np.ndarray
    slope: float
    intercept: float
    r2: float
    note: str = ""
    rows: list = field(default_factory=list, compare=False)


def fit_rate(xs, ys, drop_transient: bool = True) -> RateFit:
    """Least-squares slope of log ys against log xs.

    When r2 < 0.98 and at least five points exist, the two largest xs are
    dropped as pre-asymptotic and the fit is redone.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size != ys.size or xs.size < 3:
        raise DomainError("need at least three (x, y) pairs")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise DomainError("log-log fit needs positive data")

    def fit(x, y):
        lx, ly = np.log(x), np.log(y)
        slope, icpt = np.polyfit(lx, ly, 1)
        res = ly - (slope * lx + icpt)
        tot = ly - ly.mean()
        ss = float(np.sum(tot * tot))
        r2 = 1.0 - float(np.sum(res * res)) / ss if ss > 0 else 1.0
        return float(slope), float(icpt), r2

    slope, icpt, r2 = fit(xs, ys)
    note = ""
    if drop_transient and r2 < 0.98 and xs.size >= 5:
        keep = np.argsort(xs)[:-2]
        keep.sort()
        slope, icpt, r2 = fit(xs[keep], ys[keep])
        note = "two largest abscissae excluded (r2 < 0.98)"
    return RateFit(xs, ys, slope, icpt, r2, note)


def sup_distance(c1: TracedCurve, c2: TracedCurve) -> float:
    if c1.geometry is not c2.geometry:
        raise GridMismatch("curves live in different geometries")
    if c1.times.shape != c2.times.shape or not np.allclose(c1.times, c2.times, rtol=0, atol=1e-12):
        raise GridMismatch("curves have different time grids")
    return float(np.max(np.abs(c1.points - c2.points)))


def perturb(base: DrivingTerm, eps: float, mode: str = "shift", seed: int = 0,
            modes: int = 6) -> DrivingTerm:
    """A second driving term with sup |W_1 - W_2| = eps exactly on the knots."""
    radial = base.geometry is Geometry.RADIAL
    # radial gaps are chord lengths |e^{ia} - 1| = 2 sin(|a|/2)
    amp = 2.0 * math.asin(min(eps / 2.0, 1.0)) if radial else eps
    if mode == "shift":
        return DrivingTerm(base.geometry, base.dt, base.xi + amp)
    if mode == "noise":
        rng = np.random.default_rng(seed)
        u = base.t_grid / max(base.T, base.dt)
        coef = rng.normal(size=modes)
        pert = sum(c * np.sin((j + 1) * math.pi * u + j) for j, c in enumerate(coef))
        pert = pert / np.max(np.abs(pert))
        return DrivingTerm(base.geometry, base.dt, base.xi + amp * pert)
    raise DomainError(f"unknown perturbation mode {mode!r}")


def _rho0(geometry: Geometry, beta1: float, beta2: float) -> float:
    if geometry is Geometry.RADIAL:
        return 1.0
    return 0.5 * math.sqrt((1 + beta1) * (1 + beta2))


def _tip_gap(driving: DrivingTerm, ref: TracedCurve, d: float) -> float:
    """sup_t |gamma(t) - f_t(point d away from W(t))| with gamma from a finer trace."""
    t = driving.t_grid
    w = driving.W(t)
    z = (1 - d) * w if driving.geometry is Geometry.RADIAL else w + 1j * d
    y, _ = evaluate_batch(driving, t, z, with_derivative=False)
    y = np.array(y)
    y[0] = z[0]
    return float(np.max(np.abs(ref.points - y)))


def perturbation_scan(base: DrivingTerm, eps_list, rho: float, p: float, mode: str = "shift",
                      seed: int = 0, beta1: float = 0.0, beta2: float = 0.0,
                      d_ref: float = 1e-5) -> RateFit:
    """Trace base and an eps-perturbation at d_cut = eps^p; fit distance versus eps.

    Each row carries the three terms of the decomposition
    eps^(1 - rho p) + sup|gamma_1 - f_1(., d)| + sup|gamma_2 - f_2(., d)|.
    """
    eps = np.sort(np.asarray(eps_list, dtype=float))[::-1]
    if rho <= _rho0(base.geometry, beta1, beta2):
        raise DomainError("rho must exceed rho_0")
    if not 0 < p < 1 / rho:
        raise DomainError("p must lie in (0, 1/rho)")
    rows = []
    ref1 = trace_curve(base, d_ref)
    for e in eps:
        other = perturb(base, e, mode, seed)
        d = min(e ** p, 0.1)
        c1 = trace_curve(base, d)
        c2 = trace_curve(other, d)
        ref2 = trace_curve(other, d_ref)
        measured = sup_distance(c1, c2)
        rows.append((float(e), d, measured, e ** (1 - rho * p),
                     _tip_gap(base, ref1, d), _tip_gap(other, ref2, d)))
    fit = fit_rate(eps, [r[2] for r in rows])
    return RateFit(fit.xs, fit.ys, fit.slope, fit.intercept, fit.r2, fit.note, rows)


@dataclass(frozen=True)
class CompositeCheck:
    measured: float
    bound: float
    hypotheses: dict

    @property
    def holds(self) -> bool:
        return self.measured <= self.bound


def derivative_sup(driving: DrivingTerm, d_values, t_stride: int = 4) -> np.ndarray:
    """sup over subsampled knots t of d |f'_t(point d away from W(t))|, per d."""
    t = driving.t_grid[::t_stride][1:]
    if t.size == 0:
        t = driving.t_grid[-1:]
    out = []
    w = driving.W(t)
    for d in d_values:
        z = (1 - d) * w if driving.geometry is Geometry.RADIAL else w + 1j * d
        _, dy = evaluate_batch(driving, t, z)
        out.append(float(d * np.max(np.abs(dy))))
    return np.asarray(out)


def composite_bound_check(d1: DrivingTerm, d2: DrivingTerm, beta: float, r: float, p: float,
                          rho: float, eps: float, d_cut: float = 1e-3,
                          c_tip: float = C_TIP, c_deriv: float = C_DERIV,
                          c_dd: float = C_DOUBLE_PRIME, eta_fn=None,
                          curves: tuple | None = None, raise_on_fail: bool = True,
                          t_stride: int = 4) -> CompositeCheck:
    """Check hypotheses (i)-(iii) and compare the traced distance with the bound.

    ``eta_fn(curve, delta)`` returns eta_tip of curve 1 at scale delta; by
    default the geometry module is used.  ``curves`` may supply already
    traced curves for d1 and d2.
    """
    if not (beta < 1 and 0 < r < 1 and rho > 1 and 0 < p < 1 / rho):
        raise DomainError("need beta < 1, r in (0,1), rho > 1, p in (0, 1/rho)")
    c1, c2 = curves if curves is not None else (trace_curve(d1, d_cut), trace_curve(d2, d_cut))
    if eps == 0.0:
        measured = sup_distance(c1, c2)
        return CompositeCheck(measured, 0.0, {})
    d_star = eps ** p
    hyp = {}
    gap = driving_gap(d1, d2, d1.T)
    hyp["i"] = (gap <= eps * (1 + 1e-9), gap, eps)
    if eta_fn is None:
        from .geometry import eta_tip_curve

        def eta_fn(curve, delta):
            return eta_tip_curve(curve, [delta])[0]
    eta = float(eta_fn(c1, d_star))
    hyp["ii"] = (eta <= c_tip * d_star ** r, eta, c_tip * d_star ** r)
    ds = d_star * 2.0 ** -np.arange(0, 6)
    ds = ds[ds >= 1e-6]
    lhs = derivative_sup(d2, ds, t_stride)
    rhs = c_deriv * ds ** (1 - beta)
    worst = int(np.argmax(lhs / rhs))
    hyp["iii"] = (bool(np.all(lhs <= rhs)), float(lhs[worst]), float(rhs[worst]))
    measured = sup_distance(c1, c2)
    bound = c_dd * max(eps ** (p * (1 - beta) * r), eps ** ((1 - rho * p) * r))
    if raise_on_fail:
        for key in ("i", "ii", "iii"):
            ok, val, thr = hyp[key]
            if not ok:
                raise HypothesisFailed(key, f"measured {val:.4g} > allowed {thr:.4g}")
    return CompositeCheck(measured, bound, hyp)
