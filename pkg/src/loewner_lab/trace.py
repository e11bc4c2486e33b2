"""Curves from driving terms, driving terms from curves, and tip diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .core_flow import DrivingTerm, Geometry, evaluate_batch
from .errors import DegenerateCurve, DomainError, NonBoundaryStart, SelfIntersection

ALPHA_MIN = 0.02
ALPHA_MAX = 0.98
BOUNDARY_TOL = 1e-6


@dataclass(frozen=True)
class TracedCurve:
    geometry: Geometry
    times: np.ndarray
    points: np.ndarray
    d_cut: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.points, dtype=complex)
        if t.shape != p.shape or t.ndim != 1:
            raise DomainError("times and points must be 1-d of equal length")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "geometry", Geometry.parse(self.geometry))

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    def upto(self, t: float) -> np.ndarray:
        k = int(math.floor(t / self.dt + 1e-9)) if self.dt > 0 else 0
        return self.points[: k + 1]


@dataclass(frozen=True)
class DerivativeProfile:
    t: float
    d_list: np.ndarray
    values: np.ndarray
    beta_fit: float
    beta_raw: float


def _offset_points(driving: DrivingTerm, t, d):
    w = driving.W(t)
    if driving.geometry is Geometry.RADIAL:
        return (1.0 - d) * w
    return w + 1j * d


def trace_curve(driving: DrivingTerm, d_cut: float = 1e-3) -> TracedCurve:
    """gamma(t_k) approximated by f_{t_k} at the point d_cut away from W(t_k)."""
    if not 0 < d_cut <= 0.1:
        raise DomainError("d_cut must lie in (0, 0.1]")
    t = driving.t_grid
    y, _ = evaluate_batch(driving, t, _offset_points(driving, t, d_cut), with_derivative=False)
    y = np.array(y)
    # at t = 0 the map is the identity and the limit is the driving point itself
    y[0] = driving.W(0.0)
    return TracedCurve(driving.geometry, t, y, d_cut)


def _dist_to_polyline(p: complex, poly: np.ndarray) -> float:
    if poly.size == 1:
        return float(abs(p - poly[0]))
    a = poly[:-1]
    d = poly[1:] - a
    L2 = np.abs(d) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(L2 > 0, ((p - a) * np.conj(d)).real / L2, 0.0)
    s = np.clip(s, 0.0, 1.0)
    return float(np.min(np.abs(a + s * d - p)))


def tip_distance(driving: DrivingTerm, curve: TracedCurve, t: float, d: float):
    """(exact, koebe_proxy) for the point d away from the driving point at time t."""
    y, dy = evaluate_batch(driving, t, _offset_points(driving, t, d))
    p = complex(y)
    ref = 1.0 - abs(p) if driving.geometry is Geometry.RADIAL else p.imag
    exact = min(ref, _dist_to_polyline(p, curve.upto(t)))
    return exact, d * abs(complex(dy))


def _loglog_slope(x, y):
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    slope, _ = np.polyfit(lx, ly, 1)
    return float(slope)


def derivative_profile(driving: DrivingTerm, t: float, d_list) -> DerivativeProfile:
    """|f'_t| at the offsets d_list from W(t); beta fitted from d|f'| ~ d^(1-beta).

    The exponent is defined through a sup over t that includes t = 0, where
    d|f'| = d, so negative single-time fits are reported as 0 (``beta_raw``
    keeps the fit).  Offsets below a few sqrt(dt) only see the linear
    interpolation of the driving and should be avoided.
    """
    d = np.asarray(d_list, dtype=float)
    if d.size < 2 or np.any(np.diff(d) >= 0):
        raise DomainError("d_list must be strictly decreasing with at least two entries")
    _, dy = evaluate_batch(driving, np.full(d.size, t), _offset_points(driving, t, d))
    vals = np.abs(dy)
    beta = 1.0 - _loglog_slope(d, d * vals)
    return DerivativeProfile(float(t), d, vals, max(beta, 0.0), beta)


def estimate_holder(curve: TracedCurve) -> float:
    """Exponent h in sup_{|t-s|=tau} |gamma(t)-gamma(s)| ~ C tau^h over dyadic lags."""
    p = curve.points
    if p.size < 100:
        raise DomainError("need at least 100 knots")
    if np.unique(np.round(p, 14)).size < 2:
        raise DegenerateCurve("curve has fewer than two distinct points")
    T = curve.times[-1] - curve.times[0]
    dt = curve.dt
    taus, sups = [], []
    for j in range(1, 9):
        tau = T * 2.0 ** (-j)
        if tau < 4 * dt:
            continue
        lag = int(round(tau / dt))
        sup = float(np.max(np.abs(p[lag:] - p[:-lag])))
        if sup > 0:
            taus.append(lag * dt)
            sups.append(sup)
    if len(taus) < 2:
        raise DegenerateCurve("not enough usable lags")
    return _loglog_slope(taus, sups)


# --------------------------------------------------------------------------
# extraction
# --------------------------------------------------------------------------

def _check_simple(pts: np.ndarray):
    a = pts[:-1]
    b = pts[1:]
    n = a.size
    ax, ay, bx, by = a.real, a.imag, b.real, b.imag
    for i in range(n - 2):
        j = slice(i + 2, n)
        px, py = ax[i], ay[i]
        rx, ry = bx[i] - px, by[i] - py
        qx, qy = ax[j], ay[j]
        sx, sy = bx[j] - qx, by[j] - qy
        den = rx * sy - ry * sx
        wx, wy = qx - px, qy - py
        with np.errstate(divide="ignore", invalid="ignore"):
            mu = (wx * sy - wy * sx) / den
            lam = (wx * ry - wy * rx) / den
        hit = (np.abs(den) > 1e-300) & (mu > 1e-12) & (mu < 1 - 1e-12) & (lam > 1e-12) & (lam < 1 - 1e-12)
        if np.any(hit):
            raise SelfIntersection(f"segments {i} and {i + 2 + int(np.argmax(hit))} cross")


def _slit_params(p: complex):
    """Tilted-slit elementary map sending the real line to a segment ending at p."""
    theta = math.atan2(p.imag, p.real)
    alpha = min(max(1.0 - theta / math.pi, ALPHA_MIN), ALPHA_MAX)
    length = abs(p)
    # unit q first, then rescale so the tip lands at distance |p|
    q1 = 1.0
    p1 = -(1.0 - alpha) * q1 / alpha
    wc1 = q1 * (2 * alpha - 1) / alpha
    f1 = abs((wc1 - p1) ** alpha * (q1 - wc1) ** (1 - alpha))
    scale = length / f1
    q = q1 * scale
    pp = p1 * scale
    return alpha, pp, q, wc1 * scale, (1 - alpha) * q * q / (4 * alpha)


def _slit_inverse(z: np.ndarray, alpha: float, pp: float, q: float, cap: float):
    """Solve (w-p)^alpha (w-q)^(1-alpha) = z for w in the upper half-plane."""
    w = np.sqrt(z * z + 4 * cap)
    w = np.where(w.imag < 0, -w, w)
    w = np.where(np.abs(w.imag) < 1e-300, w + 1e-300j, w)
    target = np.log(z)
    for _ in range(60):
        g = alpha * np.log(w - pp) + (1 - alpha) * np.log(w - q) - target
        dg = alpha / (w - pp) + (1 - alpha) / (w - q)
        step = g / dg
        wn = w - step
        bad = wn.imag <= 0
        while np.any(bad):
            step = np.where(bad, 0.5 * step, step)
            wn = w - step
            bad = (wn.imag <= 0) & (np.abs(step) > 1e-300)
        w = wn
        if np.max(np.abs(step), initial=0.0) < 1e-15 * max(1.0, float(np.max(np.abs(w), initial=1.0))):
            break
    return w, 1.0 / (z * dg)


_LINEAR_TABLE = None


def _linear_table():
    """Endpoint P(a) of the curve driven by W(t) = a t on [0, 1], on a fine grid in a.

    By Brownian scaling the curve for increment delta over time tau is
    sqrt(tau) * P(delta / sqrt(tau)), so this single table serves every step.
    """
    global _LINEAR_TABLE
    if _LINEAR_TABLE is None:
        a = np.sinh(np.linspace(-np.arcsinh(400.0), np.arcsinh(400.0), 6001))
        s0 = 1e-10
        # start from the local square-root expansion at the tip and flow the rest
        z0 = a + 2j * math.sqrt(s0)
        xi = np.stack([np.zeros_like(a), a], axis=1)
        y, _, st, _, _ = kernels.flow_batch(kernels.CHORDAL, xi, np.arange(a.size), 1.0,
                                            np.full(a.size, 1.0 - s0), -1.0, 1.0,
                                            np.full(a.size, 1.0 - s0), z0, False, 0.02,
                                            1e-18, np.zeros(0))
        ok = (st == 0) & np.isfinite(y)
        a, y = a[ok], y[ok]
        theta = np.angle(y)
        order = np.argsort(theta)
        _LINEAR_TABLE = (theta[order], a[order], np.abs(y[order]))
    return _LINEAR_TABLE


def _linear_params(p: complex):
    theta_t, a_t, r_t = _linear_table()
    theta = math.atan2(p.imag, p.real)
    theta = min(max(theta, theta_t[0]), theta_t[-1])
    a = float(np.interp(theta, theta_t, a_t))
    r = float(np.interp(theta, theta_t, r_t))
    root = abs(p) / r
    return a * root, root * root


def _linear_forward(z: np.ndarray, delta: float, tau: float, track: bool):
    xi = np.array([[0.0, delta]])
    y, dy, st, _, _ = kernels.flow_batch(kernels.CHORDAL, xi, np.zeros(z.size, dtype=np.int64),
                                         tau, np.zeros(z.size), 1.0, -1.0,
                                         np.full(z.size, tau), z, track, 0.1, 1e-16,
                                         np.zeros(0))
    if np.any(st):
        raise SelfIntersection("a later curve point was swallowed by an earlier piece")
    return y - delta, dy


def _zipper_chordal(pts: np.ndarray, track: complex | None = None, elementary: str = "linear"):
    """Unzip a chordal polyline starting at 0; returns cumulative times and driving.

    ``elementary="linear"`` uses the maps generated by linear driving over each
    step (exact for the piecewise-linear drivings produced by tracing);
    ``"slit"`` uses tilted straight slits.
    """
    m = pts.size - 1
    z = pts[1:].astype(complex).copy()
    times = np.zeros(m + 1)
    drive = np.zeros(m + 1)
    mu = np.full(m + 1, np.nan + 0j)
    dmu = np.full(m + 1, np.nan + 0j)
    tr = None if track is None else complex(track)
    dtr = 1.0 + 0j
    if tr is not None:
        mu[0] = tr
        dmu[0] = dtr
    t = 0.0
    u = 0.0
    for k in range(m):
        p = complex(z[k])
        if not p.imag > 0:
            if abs(p) < 1e-300:
                raise DegenerateCurve(f"repeated point at index {k + 1}")
            raise SelfIntersection(f"curve point {k + 1} left the slit domain")
        if elementary == "linear":
            delta, cap = _linear_params(p)
            rest = z[k + 1:]
            if tr is not None:
                rest = np.append(rest, tr)
            w, dw = _linear_forward(rest, delta, cap, tr is not None)
            if tr is not None:
                dtr = dtr * complex(dw[-1])
                tr = complex(w[-1])
                w = w[:-1]
            z[k + 1:] = w
            wc = delta
        else:
            alpha, pp, q, wc, cap = _slit_params(p)
            rest = z[k + 1:]
            if rest.size:
                w, _ = _slit_inverse(rest, alpha, pp, q, cap)
                z[k + 1:] = w - wc
            if tr is not None:
                w, dw = _slit_inverse(np.array([tr]), alpha, pp, q, cap)
                dtr = dtr * complex(dw[0])
                tr = complex(w[0]) - wc
        if tr is not None:
            mu[k + 1] = tr
            dmu[k + 1] = dtr
        t += cap
        u += wc
        times[k + 1] = t
        drive[k + 1] = u
    return times, drive, mu, dmu


def _to_uniform(times, values, dt):
    n = int(math.floor(times[-1] / dt + 1e-9))
    grid = np.arange(n + 1) * dt
    return np.interp(grid, times, values)


def extract_driving(curve: TracedCurve, elementary: str = "linear") -> DrivingTerm:
    """Recover the driving term by unzipping the polyline one segment at a time."""
    pts = np.asarray(curve.points, dtype=complex)
    if pts.size < 2:
        raise DegenerateCurve("need at least two points")
    dt = curve.dt
    keep = np.concatenate([[True], np.abs(np.diff(pts)) > 1e-14])
    pts = pts[keep]
    if curve.geometry is Geometry.CHORDAL:
        if abs(pts[0].imag) > BOUNDARY_TOL:
            raise NonBoundaryStart(f"curve starts at {pts[0]}, off the real line")
        _check_simple(pts)
        x0 = pts[0].real
        times, drive, _, _ = _zipper_chordal(pts - x0, elementary=elementary)
        return DrivingTerm(Geometry.CHORDAL, dt, _to_uniform(times, drive + x0, dt))
    if abs(abs(pts[0]) - 1.0) > BOUNDARY_TOL:
        raise NonBoundaryStart(f"curve starts at {pts[0]}, off the unit circle")
    if np.any(np.abs(pts[1:]) >= 1.0):
        raise DomainError("radial curve must stay inside the disk")
    _check_simple(pts)
    w0 = pts[0] / abs(pts[0])
    xi0 = math.atan2(w0.imag, w0.real)
    h = half_plane_from_disk(pts * np.conj(w0))
    h[0] = 0.0
    times, drive, mu, dmu = _zipper_chordal(h, track=1j, elementary=elementary)
    s = np.log(np.abs(dmu) / mu.imag)
    alpha = math.pi - np.angle(dmu)
    ang = alpha + np.angle(mu / np.conj(mu))
    xi = xi0 + np.unwrap(np.angle(np.exp(1j * ang)))
    order = np.concatenate([[True], np.diff(s) > 0])
    return DrivingTerm(Geometry.RADIAL, dt, _to_uniform(s[order], xi[order], dt))


# --------------------------------------------------------------------------
# coordinate change between the disk and the half-plane
# --------------------------------------------------------------------------

def disk_from_half_plane(z):
    """phi(z) = (i - z)/(i + z): 0 -> 1, i -> 0, infinity -> -1."""
    return (1j - z) / (1j + z)


def half_plane_from_disk(w):
    return 1j * (1 - w) / (1 + w)


# --------------------------------------------------------------------------
# curve files
# --------------------------------------------------------------------------

def write_curve(curve: TracedCurve, path, dt: float | None = None) -> None:
    dt = curve.dt if dt is None else dt
    lines = [f"# geometry={curve.geometry.value} d_cut={curve.d_cut!r} dt={dt!r}"]
    for t, p in zip(curve.times, curve.points):
        lines.append(f"{float(t)!r},{float(p.real)!r},{float(p.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_curve(path) -> TracedCurve:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith("#"):
        raise DomainError(f"{path}: missing header line")
    meta = dict(item.split("=", 1) for item in text[0][1:].split())
    rows = np.array([[float(v) for v in line.split(",")] for line in text[1:] if line.strip()])
    rows = rows.reshape(-1, 3)
    return TracedCurve(Geometry.parse(meta["geometry"]), rows[:, 0],
                       rows[:, 1] + 1j * rows[:, 2], float(meta["d_cut"]))
