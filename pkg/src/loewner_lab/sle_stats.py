"""SLE sampling, moment and tail scans, the radial/chordal change of
coordinates seen from the boundary point -1, and the exponent bookkeeping
of the lattice comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from . import kernels
from .compare import RateFit, fit_rate
from .core_flow import C_STEP, STEP_FLOOR, DrivingTerm, Geometry, evaluate_batch, forward_batch
from .errors import Disconnected, DomainError, NumericError
from .rng import make_rng
from .trace import TracedCurve, _zipper_chordal, disk_from_half_plane, half_plane_from_disk

MOMENT_DT = 1.0 / 64.0
MOMENT_CHUNK = 2000
MU_TOL = 1e-3
# Step control of the boundary-point integrator: h <= C_THETA * (2 sin(theta/2))^2.
C_THETA = 0.05


@dataclass(frozen=True)
class SleParams:
    kappa: float
    T: float
    dt: float
    seed: int = 0

    def __post_init__(self):
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise DomainError("kappa must be positive")
        if not (self.T > 0 and self.dt > 0 and self.dt <= self.T):
            raise DomainError("need 0 < dt <= T")


def _check_scan_kappa(kappa):
    if not 0 < kappa < 8:
        raise DomainError("scans assume kappa in (0, 8)")


def brownian_increments(kappa: float, n_steps: int, dt: float, seed: int, stream: int) -> np.ndarray:
    return math.sqrt(kappa * dt) * make_rng(seed, stream).standard_normal(n_steps)


def sample_sle_driving(params: SleParams, geometry="chordal", stream: int = 0,
                       rotate: bool = False) -> DrivingTerm:
    """xi(t_k) = sqrt(kappa) B(t_k) from seeded Gaussian increments.

    With ``rotate`` (radial only) the whole path is turned by an independent
    uniform angle, so W(0) is uniform on the circle.
    """
    geometry = Geometry.parse(geometry)
    k = int(round(params.T / params.dt))
    rng = make_rng(params.seed, stream)
    xi = np.zeros(k + 1)
    xi[1:] = np.cumsum(math.sqrt(params.kappa * params.dt) * rng.standard_normal(k))
    if rotate:
        if geometry is not Geometry.RADIAL:
            raise DomainError("rotation only makes sense for radial drivings")
        xi += 2 * math.pi * rng.random()
    return DrivingTerm(geometry, params.dt, xi)


# --------------------------------------------------------------------------
# exponent formulas
# --------------------------------------------------------------------------

def lambda_c(kappa: float) -> float:
    if kappa <= 0:
        raise DomainError("kappa must be positive")
    return 1 + 2 / kappa + 3 * kappa / 32


def zeta(kappa: float, lam: float) -> float:
    if lam >= lambda_c(kappa):
        raise DomainError(f"lambda must be below lambda_c = {lambda_c(kappa):.6g}")
    disc = (4 + kappa) ** 2 - 8 * lam * kappa
    return lam + (math.sqrt(disc) - (4 + kappa)) / 4


def rho_beta(kappa: float, beta: float) -> float:
    if kappa <= 0 or beta <= -1:
        raise DomainError("need kappa > 0 and beta > -1")
    return beta + 2 * (1 + beta) / kappa + beta * beta * kappa / (8 * (1 + beta))


def beta_plus(kappa: float) -> float:
    if kappa <= 0:
        raise DomainError("kappa must be positive")
    return max(0.0, 4 * (kappa * math.sqrt(8 + kappa) - (4 - kappa)) / (4 + kappa) ** 2)


def q_beta(kappa: float, beta: float) -> float:
    bp = beta_plus(kappa)
    if not bp < beta < 1:
        raise DomainError(f"beta must lie in ({bp:.6g}, 1)")
    return min(lambda_c(kappa) * beta, rho_beta(kappa, beta) - 2)


# --------------------------------------------------------------------------
# reverse-flow moments
# --------------------------------------------------------------------------

def reverse_sle_moment_scan(kappa: float, lam: float, t_list, N: int, seed: int = 0,
                            dt: float = MOMENT_DT, chunk: int = MOMENT_CHUNK) -> RateFit:
    """Slope of log E|h_t'(i)|^lam against log t for the reverse flow
    dh/dt = -2/(h - sqrt(kappa) B_t).

    All times in ``t_list`` are read off the same paths (common random
    numbers); sample k uses Philox stream k.  ``rows`` of the result hold
    (t, mean_moment, stderr).
    """
    _check_scan_kappa(kappa)
    zeta(kappa, lam)  # range check
    ts = np.unique(np.asarray(t_list, dtype=float))
    if ts.size < 3 or ts[0] < 1 or ts[-1] > 100:
        raise DomainError("t_list needs at least three times in [1, 100]")
    if N < 2:
        raise DomainError("need N >= 2")
    n_steps = int(math.ceil(ts[-1] / dt - 1e-9))
    T = n_steps * dt
    total = np.zeros(ts.size)
    total2 = np.zeros(ts.size)
    for start in range(0, N, chunk):
        m = min(chunk, N - start)
        xi = np.zeros((m, n_steps + 1))
        for j in range(m):
            xi[j, 1:] = np.cumsum(brownian_increments(kappa, n_steps, dt, seed, start + j))
        _, _, status, _, drec = kernels.flow_batch(
            kernels.CHORDAL, xi, np.arange(m, dtype=np.int64), dt, np.zeros(m), 1.0, 1.0,
            np.full(m, T), np.full(m, 1j), True, C_STEP, STEP_FLOOR, ts)
        if np.any(status):
            raise NumericError("reverse flow failed on some lanes")
        mom = np.abs(drec) ** lam
        total += mom.sum(axis=0)
        total2 += (mom * mom).sum(axis=0)
    mean = total / N
    var = np.maximum(total2 / N - mean * mean, 0.0) * N / (N - 1)
    err = np.sqrt(var / N)
    if lam == 0:
        fit = RateFit(ts, mean, 0.0, 0.0, 1.0, "lambda = 0: all moments equal 1")
    else:
        fit = fit_rate(ts, mean, drop_transient=False)
    rows = [(float(t), float(a), float(b)) for t, a, b in zip(ts, mean, err)]
    return RateFit(fit.xs, fit.ys, fit.slope, fit.intercept, fit.r2, fit.note, rows)


# --------------------------------------------------------------------------
# derivative tails
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TailScan:
    rows: list
    c: float
    exponent: float
    q_pred: float
    levels: np.ndarray = field(compare=False)
    maxima: np.ndarray = field(compare=False)


def _level_maxima(driving: DrivingTerm, beta: float, levels) -> np.ndarray:
    """max over t = j 4^-n in (0, T] of y^beta |F'_t(iy)|, y = 2^-n, per level n."""
    out = np.empty(len(levels))
    for i, n in enumerate(levels):
        y = 2.0 ** -n
        t = np.arange(1, int(round(driving.T * 4.0 ** n)) + 1) * 4.0 ** -n
        t = t[t <= driving.T + 1e-12]
        _, dy = evaluate_batch(driving, t, driving.value(t) + 1j * y)
        out[i] = y ** beta * float(np.max(np.abs(dy)))
    return out


def derivative_tail_scan(kappa: float, beta: float, d_star_list, T: float = 1.0, N: int = 200,
                         seed: int = 0, c: float | None = None) -> TailScan:
    """Failure frequency of {sup_t y|F'_t(iy)| > c y^(1-beta) for some dyadic y <= d_*}.

    Times run over the dyadic grid j 4^-n at height 2^-n.  Unless given, c
    is the median at the largest d_*, so that frequency is about 1/2 there;
    the decay of the remaining frequencies is then compared with q(beta).
    """
    _check_scan_kappa(kappa)
    qp = q_beta(kappa, beta)
    ds = np.asarray(sorted(set(float(d) for d in d_star_list), reverse=True))
    if ds.size < 2 or np.any(ds <= 0) or np.any(ds >= 1):
        raise DomainError("need at least two d_* in (0, 1)")
    n_lo = int(math.ceil(-math.log2(ds[0]) - 1e-9))
    n_hi = int(math.ceil(-math.log2(ds[-1]) - 1e-9))
    levels = np.arange(n_lo, n_hi + 1)
    dt = 4.0 ** -n_hi
    params = SleParams(kappa, T, dt, seed)
    maxima = np.empty((N, levels.size))
    for k in range(N):
        maxima[k] = _level_maxima(sample_sle_driving(params, "chordal", stream=k), beta, levels)
    # worst level at or below each d_*: a suffix maximum over levels
    first = [int(np.searchsorted(levels, math.ceil(-math.log2(d) - 1e-9))) for d in ds]
    worst = np.stack([maxima[:, f:].max(axis=1) for f in first], axis=1)
    if c is None:
        c = float(np.median(worst[:, 0]))
    freq = (worst > c).mean(axis=0)
    rows = [(float(d), float(f), qp) for d, f in zip(ds, freq)]
    pos = freq > 0
    exponent = float("nan")
    if pos.sum() >= 2:
        exponent = float(np.polyfit(np.log(ds[pos]), np.log(freq[pos]), 1)[0])
    return TailScan(rows, c, exponent, qp, levels, maxima)


# --------------------------------------------------------------------------
# the boundary point -1 under the radial flow
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialChainState:
    s: float
    lambda_s: complex
    g_prime_mag: float
    theta_s: float
    sigma: float = math.inf

    def __post_init__(self):
        if abs(abs(self.lambda_s) - 1) > 1e-9:
            raise DomainError("lambda_s must lie on the unit circle")


@dataclass(frozen=True)
class BoundaryPath:
    """Knot-sampled angle alpha_s of g_s(-1), theta = alpha - xi, and log|g_s'(-1)|."""

    s: np.ndarray
    alpha: np.ndarray
    theta: np.ndarray
    log_gp: np.ndarray
    sigma: float

    def state(self, s: float) -> RadialChainState:
        a = float(np.interp(s, self.s, self.alpha))
        th = float(np.interp(s, self.s, self.theta))
        lg = float(np.interp(s, self.s, self.log_gp))
        return RadialChainState(float(s), complex(np.exp(1j * a)), math.exp(lg), th, self.sigma)


def _boundary_rhs(theta):
    half = 0.5 * theta
    sn = np.sin(half)
    return np.cos(half) / sn, -0.5 / (sn * sn)


def boundary_flow(driving: DrivingTerm, eps: float = 0.0, T: float | None = None,
                  c_theta: float = C_THETA) -> BoundaryPath:
    """Follow g_s(-1) = exp(i alpha_s) under the forward radial flow.

    alpha' = cot((alpha - xi)/2) and d log|g'(-1)|/ds = -1/(2 sin^2(theta/2));
    the state is an angle, so |g_s(-1)| = 1 holds exactly.  Integration stops
    at sigma = first s with |g_s(-1) - W(s)| <= eps (or T).
    """
    if driving.geometry is not Geometry.RADIAL:
        raise DomainError("the boundary flow is radial")
    T = driving.T if T is None else float(T)
    if not 0 <= T <= driving.T + 1e-12:
        raise DomainError(f"T must lie in [0, {driving.T}]")
    dt = driving.dt
    n_knots = int(math.floor(T / dt + 1e-9))
    xi = driving.xi
    alpha = math.pi
    lg = 0.0
    out_s, out_a, out_th, out_lg = [0.0], [alpha], [alpha - xi[0]], [0.0]

    def crossed(th):
        return 2 * abs(math.sin(0.5 * th)) <= eps

    sigma = T
    if crossed(alpha - xi[0]):
        sigma = 0.0
    else:
        for k in range(n_knots + (1 if T > n_knots * dt + 1e-12 else 0)):
            s0 = k * dt
            s1 = min((k + 1) * dt, T)
            x0 = xi[k]
            slope = (xi[min(k + 1, xi.size - 1)] - x0) / dt
            s = s0
            stop = False
            while s < s1 - 1e-15:
                th = alpha - (x0 + slope * (s - s0))
                sn = 2 * math.sin(0.5 * th)
                h = min(s1 - s, c_theta * sn * sn)
                if h < STEP_FLOOR:
                    raise NumericError(f"boundary point reached the driving point near s={s:.6g}")

                def f(a, t):
                    v, w = _boundary_rhs(a - (x0 + slope * (t - s0)))
                    return float(v), float(w)

                k1, l1 = f(alpha, s)
                k2, l2 = f(alpha + 0.5 * h * k1, s + 0.5 * h)
                k3, l3 = f(alpha + 0.5 * h * k2, s + 0.5 * h)
                k4, l4 = f(alpha + h * k3, s + h)
                alpha_new = alpha + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                lg_new = lg + h / 6 * (l1 + 2 * l2 + 2 * l3 + l4)
                th_new = alpha_new - (x0 + slope * (s + h - s0))
                if eps > 0 and crossed(th_new):
                    # locate the crossing inside the step by linear interpolation in |g - W|
                    g0, g1 = 2 * abs(math.sin(0.5 * th)), 2 * abs(math.sin(0.5 * th_new))
                    frac = (g0 - eps) / (g0 - g1) if g0 > g1 else 1.0
                    sigma = s + frac * h
                    alpha = alpha + frac * (alpha_new - alpha)
                    lg = lg + frac * (lg_new - lg)
                    s = sigma
                    stop = True
                    break
                alpha, lg, s = alpha_new, lg_new, s + h
            out_s.append(s)
            out_a.append(alpha)
            out_th.append(alpha - float(driving.value(s)))
            out_lg.append(lg)
            if stop:
                break
    return BoundaryPath(np.array(out_s), np.array(out_a), np.array(out_th), np.array(out_lg),
                        float(sigma))


def sigma_stop(driving: DrivingTerm, eps: float, T: float | None = None) -> float:
    """inf{s : |g_s(-1) - W(s)| <= eps} capped at T."""
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    return boundary_flow(driving, eps, T).sigma


def radial_chain_state(driving: DrivingTerm, s: float, eps: float = 0.0) -> RadialChainState:
    """State of g_s(-1) at time s; ``sigma`` records the stopping time for ``eps``."""
    path = boundary_flow(driving, eps, driving.T)
    st = path.state(min(s, path.sigma))
    return RadialChainState(float(s), st.lambda_s, st.g_prime_mag, st.theta_s, path.sigma)


def theta_sde(kappa: float, T: float, dt: float, seed: int = 0, stream: int = 0,
              theta0: float = math.pi, increments=None) -> np.ndarray:
    """Euler-Maruyama for d theta = cot(theta/2) ds - sqrt(kappa) dB.

    ``increments`` may carry the driving increments sqrt(kappa) dB directly
    (for pathwise comparison with the flow); otherwise they are drawn from
    the (seed, stream) Philox block as in ``sample_sle_driving``.
    """
    k = int(round(T / dt))
    if increments is None:
        increments = brownian_increments(kappa, k, dt, seed, stream)
    inc = np.asarray(increments, dtype=float)
    th = np.empty(inc.size + 1)
    th[0] = theta0
    for j in range(inc.size):
        th[j + 1] = th[j] + dt / math.tan(0.5 * th[j]) - inc[j]
    return th


# --------------------------------------------------------------------------
# radial chain seen as a chordal chain towards -1
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ChordalChain:
    """Chordal driving of the half-plane image of a radial curve piece and
    the capacity time t(s) reached at its end."""

    driving: DrivingTerm
    t: float
    mu_zipper: complex


def transported_chain(curve: TracedCurve, s: float, refine: int = 4) -> ChordalChain:
    """Map gamma[0, s] to the half-plane by z -> i(1-z)/(1+z) and unzip it.

    The unzipping tracks i; since it recentres at every step, the tracked
    value is G_t(i) - U_t.
    """
    if curve.geometry is not Geometry.RADIAL:
        raise DomainError("expected a radial curve")
    pts = curve.upto(s)
    if pts.size < 2:
        raise DomainError("need at least two curve points before s")
    h = half_plane_from_disk(pts)
    if abs(h[0].imag) > 1e-6 or not math.isfinite(abs(h[0])):
        raise DomainError("curve must start on the circle away from -1")
    x0 = float(h[0].real)
    h = h - x0
    h[0] = 0.0
    times, drive, mu, _ = _zipper_chordal(h, track=1j - x0)
    m = refine * (times.size - 1)
    grid = np.linspace(0.0, times[-1], m + 1)
    xi = np.interp(grid, times, drive) + x0
    return ChordalChain(DrivingTerm(Geometry.CHORDAL, times[-1] / m, xi), float(times[-1]),
                        complex(mu[-1] + drive[-1] + x0))


def transport_mu(state: RadialChainState, chain: ChordalChain, tol: float = MU_TOL) -> complex:
    """mu = G_{t(s)}(i), checked against Im mu = |g_s'(-1)| and returned with
    that imaginary part."""
    if state.s > state.sigma:
        raise Disconnected(f"s = {state.s:.6g} is past the stopping time {state.sigma:.6g}")
    y, _ = forward_batch(chain.driving, chain.t, 1j)
    mu = complex(y)
    if abs(mu.imag - state.g_prime_mag) > tol:
        raise NumericError(
            f"Im G(i) = {mu.imag:.6g} disagrees with |g'(-1)| = {state.g_prime_mag:.6g}")
    return complex(mu.real, state.g_prime_mag)


def delta_map(state: RadialChainState, mu: complex, z):
    """Moebius map of the disk onto the half-plane sending lambda_s to infinity and 0 to mu."""
    z = np.asarray(z, dtype=complex)
    lam = state.lambda_s
    return (z * np.conj(mu) - lam * mu) / (z - lam)


def radial_chordal_transport(state: RadialChainState, chordal_chain: ChordalChain, z,
                             tol: float = MU_TOL):
    """phi(F_{t(s)}(Delta_s(z))), which should reproduce the radial f_s(z)."""
    mu = transport_mu(state, chordal_chain, tol)
    w = delta_map(state, mu, z)
    if chordal_chain.t == 0:
        f = w
    else:
        f, _ = evaluate_batch(chordal_chain.driving, chordal_chain.t, w, with_derivative=False)
    out = disk_from_half_plane(f)
    return complex(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# exponent optimization
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentChoice:
    beta_star: float
    r_star: float
    m_star: float
    mu: float
    branches: tuple


def mu_branches(beta: float, r: float) -> tuple:
    return (r * (1 - beta), -1 + 2 * beta + beta * beta / (4 * (1 + beta)), 0.2 - 11 * r / 5)


def _cubic(b):
    return 45 * b ** 3 - 128 * b ** 2 - 84 * b + 68


def optimize_exponents(tol: float = 1e-12) -> ExponentChoice:
    """Balance the three exponents r(1-beta), q(beta) and 1/5 - 11r/5.

    Equating the first and the last gives r = 1/(16 - 5 beta); equating the
    result with q(beta) is the cubic 45b^3 - 128b^2 - 84b + 68 = 0.
    """
    grid = np.linspace(0.4, 0.6, 201)
    vals = _cubic(grid)
    if not np.all(np.diff(vals) < 0):
        raise NumericError("cubic is not monotone on the bracket")
    beta = float(bisect(_cubic, 0.4, 0.6, xtol=tol))
    r = 1.0 / (16.0 - 5.0 * beta)
    br = mu_branches(beta, r)
    if max(br) - min(br) > 1e-9:
        raise NumericError(f"branches do not balance: {br}")
    mu = min(br)
    return ExponentChoice(beta, r, mu / (2 - beta), mu, br)
