"""Polygon-to-disk maps by composing geodesic slit maps, and grid-map experiments."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from .compare import RateFit, fit_rate
from .errors import DomainError, NonSimplePolygon

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
THREE_POINT_FLAG = 10.0
# eta_tip transfer constant: LERW at n = 100 on the disk, seeds 1000-1049, gave
# a largest ratio of 1.06; frozen with margin
C_TRANSFER = 4.0


def _sqrt_h(w, sgn):
    s = np.sqrt(w)
    return np.where(sgn < 0, -s, s)


def _sqrt_eval(w, T):
    # interior points must stay in the upper half-plane; the sign of Re T only
    # decides for points on the real line (boundary images)
    s = np.sqrt(w)
    tiny = np.abs(s.imag) <= 1e-12 * np.abs(s)
    flip = np.where(tiny, T.real < 0, s.imag < 0)
    return np.where(flip, -s, s)


def _sqrt_upper(w):
    s = np.sqrt(w)
    return np.where(s.imag < 0, -s, s)


def subdivide_polygon(verts, spacing: float) -> np.ndarray:
    """Boundary points with consecutive gaps at most ``spacing``; vertices kept."""
    v = np.asarray(verts, dtype=complex)
    if v[0] == v[-1]:
        v = v[:-1]
    out = []
    for a, b in zip(v, np.roll(v, -1)):
        m = max(1, int(math.ceil(abs(b - a) / spacing)))
        out.append(a + (b - a) * np.arange(m) / m)
    return np.concatenate(out)


def _orient_ccw(p: np.ndarray) -> np.ndarray:
    area = 0.5 * np.sum((np.conj(p) * np.roll(p, -1)).imag)
    return p if area > 0 else p[::-1].copy()


class ZipperMap:
    """psi: polygon interior -> unit disk with psi(0) = 0 and psi'(0) > 0.

    The boundary points are unzipped one at a time by geodesic slit maps of
    the upper half-plane; after each step the remaining points are rescaled to
    keep the next point at modulus one.
    """

    def __init__(self, pts, interior: complex = 0j, _params=None):
        if _params is not None:
            (self.z0, self.z1, self.A, self.S, self.pinv, self.sig, self.w0,
             self.rot, self.interior) = _params
            return
        pts = _orient_ccw(np.asarray(pts, dtype=complex))
        if pts.size < 3:
            raise DomainError("need at least three boundary points")
        self.interior = complex(interior)
        self.z0, self.z1 = complex(pts[0]), complex(pts[1])
        zeta = 1j * np.sqrt((pts[2:] - self.z1) / (pts[2:] - self.z0))
        m = zeta.size
        A = np.empty(m, dtype=complex)
        S = np.ones(m)
        pinv = 0.0
        for k in range(m):
            a = zeta[k]
            A[k] = a
            if a.imag <= 0:
                raise NonSimplePolygon("boundary points left the half-plane while unzipping")
            binv = a.real / abs(a) ** 2
            c = abs(a) ** 2 / a.imag
            rest = zeta[k + 1:]
            T = rest / (1 - rest * binv)
            zeta[k + 1:] = _sqrt_h(T * T + c * c, T.real)
            q = pinv - binv
            pinv = q / math.sqrt(1 + c * c * q * q)
            sc = abs(zeta[k + 1]) if k + 1 < m else 1.0
            zeta[k + 1:] /= sc
            pinv *= sc
            S[k] = sc
        self.A, self.S, self.pinv = A, S, float(pinv)
        self.sig, self.w0, self.rot = 1.0, 0j, 1.0 + 0j
        u, du = self._raw(np.array([self.interior]), with_derivative=True)
        u, du = complex(u[0]), complex(du[0])
        if u.imag < 0:
            self.sig = -1.0
            u, du = -u, -du
        self.w0 = u
        d = du / (2j * u.imag)
        self.rot = abs(d) / d

    def _raw(self, z, with_derivative=False):
        z = np.asarray(z, dtype=complex)
        q = (z - self.z1) / (z - self.z0)
        w = 1j * np.sqrt(q)
        dw = -(self.z1 - self.z0) / (z - self.z0) ** 2 / (2 * w) if with_derivative else None
        for a, sc in zip(self.A, self.S):
            binv = a.real / abs(a) ** 2
            c = abs(a) ** 2 / a.imag
            den = 1 - w * binv
            T = w / den
            nw = _sqrt_eval(T * T + c * c, T)
            if with_derivative:
                dw = T * dw / (den * den) / nw / sc
            w = nw / sc
        den = 1 - w * self.pinv
        M = w / den
        if with_derivative:
            return M * M, 2 * M * dw / (den * den)
        return M * M, None

    def evaluate(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        u, _ = self._raw(z)
        u = self.sig * u
        out = self.rot * (u - self.w0) / (u - np.conj(self.w0))
        return np.where(z == self.interior, 0j, out)

    __call__ = evaluate

    def derivative(self, z) -> np.ndarray:
        u, du = self._raw(np.asarray(z, dtype=complex), with_derivative=True)
        u, du = self.sig * u, self.sig * du
        b = np.conj(self.w0)
        return self.rot * (self.w0 - b) / (u - b) ** 2 * du

    def inverse(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        v = w / self.rot
        b = np.conj(self.w0)
        u = (self.w0 - b * v) / (1 - v)
        M = _sqrt_upper(self.sig * u)
        x = M / (1 + M * self.pinv)
        for a, sc in zip(self.A[::-1], self.S[::-1]):
            binv = a.real / abs(a) ** 2
            c = abs(a) ** 2 / a.imag
            x = x * sc
            T = _sqrt_upper(x * x - c * c)
            x = T / (1 + T * binv)
        q = -(x * x)
        return (self.z1 - q * self.z0) / (1 - q)

    @property
    def elementary_params(self):
        return list(zip(self.A.tolist(), self.S.tolist()))

    # -------------------------------------------------------------- files
    def save(self, path) -> None:
        def f(*xs):
            return " ".join(repr(float(x)) for x in xs)

        lines = [f"# loewner-lab zipper v{FORMAT_VERSION}",
                 "start " + f(self.z0.real, self.z0.imag, self.z1.real, self.z1.imag),
                 "interior " + f(self.interior.real, self.interior.imag)]
        lines += ["geo " + f(a.real, a.imag, s) for a, s in zip(self.A, self.S)]
        lines.append("final " + f(self.pinv, self.sig, self.w0.real, self.w0.imag,
                                  self.rot.real, self.rot.imag))
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "ZipperMap":
        text = Path(path).read_text().splitlines()
        if not text or not text[0].startswith("# loewner-lab zipper v"):
            raise DomainError("not a zipper parameter file")
        if int(text[0].rsplit("v", 1)[1]) != FORMAT_VERSION:
            raise DomainError("unsupported zipper file version")
        A, S = [], []
        for ln in text[1:]:
            key, *vals = ln.split()
            x = [float(v) for v in vals]
            if key == "start":
                z0, z1 = complex(x[0], x[1]), complex(x[2], x[3])
            elif key == "interior":
                interior = complex(x[0], x[1])
            elif key == "geo":
                A.append(complex(x[0], x[1]))
                S.append(x[2])
            elif key == "final":
                pinv, sig, w0, rot = x[0], x[1], complex(x[2], x[3]), complex(x[4], x[5])
        return cls(None, _params=(z0, z1, np.array(A), np.array(S), pinv, sig, w0, rot,
                                  interior))


def zipper_disk_map(polygon, resolution: int | None = None) -> ZipperMap:
    """Zipper map through the polygon's vertices, edges subdivided to ~``resolution`` points."""
    P = np.asarray(polygon, dtype=complex)
    if P[0] == P[-1]:
        P = P[:-1]
    from .lattice import _polygon_is_simple

    if not _polygon_is_simple(P):
        raise NonSimplePolygon("polygon self-intersects")
    if resolution is not None and resolution > P.size:
        per = float(np.sum(np.abs(np.roll(P, -1) - P)))
        P = subdivide_polygon(P, per / resolution)
    return ZipperMap(P)


GRID_ZIPPER_DENSITY = 8


def grid_zipper(domain) -> ZipperMap:
    """psi_n for a grid domain; consecutive boundary points within 1/(8n).

    The zipper domain is bounded by arcs through these points, which bulge off
    the straight edges by a fraction of the spacing.  At 1/(4n) an interior
    point 0.09/n from a staircase corner already fell outside it.
    """
    h = 1.0 / (GRID_ZIPPER_DENSITY * domain.n)
    return ZipperMap(subdivide_polygon(domain.boundary_polygon, h))


# --------------------------------------------------------------------------
# three-point constant
# --------------------------------------------------------------------------

def three_point_constant(polygon, samples: int = 200) -> float:
    """Largest sampled diam(smaller arc)/|x - y| over boundary pairs (a lower bound for A)."""
    P = np.asarray(polygon, dtype=complex)
    if P[0] == P[-1]:
        P = P[:-1]
    per = float(np.sum(np.abs(np.roll(P, -1) - P)))
    pts = subdivide_polygon(P, per / samples)
    N = pts.size
    # D[i, k]: diameter of the CCW arc from pts[i] through k further points
    D = np.zeros((N, N))
    dist = np.abs(pts[:, None] - pts[None, :])
    for i in range(N):
        order = (i + np.arange(N)) % N
        cur = 0.0
        for k in range(1, N):
            j = order[k]
            cur = max(cur, float(dist[j, order[:k]].max()))
            D[i, k] = cur
    best = 1.0
    for i in range(N):
        for k in range(1, N):
            j = (i + k) % N
            arc = min(D[i, k], D[j, N - k])
            best = max(best, arc / dist[i, j])
    if best > THREE_POINT_FLAG:
        log.warning("three-point constant %.3g exceeds %.3g: near-degenerate boundary",
                    best, THREE_POINT_FLAG)
    return best


# --------------------------------------------------------------------------
# grid-map convergence
# --------------------------------------------------------------------------

def _dist_to_boundary(z, P):
    from .geometry import _dist_to_polygon

    return _dist_to_polygon(np.asarray(z, dtype=complex), P)


def sample_points(jordan, n: int, samples: int = 500, band: int = 200, seed: int = 0,
                  domain=None) -> np.ndarray:
    """Low-discrepancy bulk points at distance >= 0.05 from the boundary, plus band
    points at distance in [2/n, 0.05]; only points inside ``domain`` (if given) are kept."""
    from .geometry import point_in_polygon

    P = np.asarray(jordan, dtype=complex)
    lo = np.array([P.real.min(), P.imag.min()])
    hi = np.array([P.real.max(), P.imag.max()])
    halton = qmc.Halton(d=2, seed=seed)
    bulk = np.zeros(0, dtype=complex)
    while bulk.size < samples:
        u = qmc.scale(halton.random(4 * samples), lo, hi)
        z = u[:, 0] + 1j * u[:, 1]
        z = z[point_in_polygon(z, P)]
        z = z[_dist_to_boundary(z, P) >= 0.05]
        bulk = np.concatenate([bulk, z])
    bulk = bulk[:samples]
    rng = np.random.default_rng(seed)
    a, b = sorted((2.0 / n, 0.05))
    layer = np.zeros(0, dtype=complex)
    edges = np.roll(P, -1) - P
    lengths = np.abs(edges)
    while layer.size < band:
        k = rng.choice(P.size, size=4 * band, p=lengths / lengths.sum())
        t = rng.random(4 * band)
        normal = 1j * edges[k] / lengths[k]
        orient = 1.0 if np.sum((np.conj(P) * np.roll(P, -1)).imag) > 0 else -1.0
        z = P[k] + t * edges[k] + orient * normal * rng.uniform(a, b, 4 * band)
        z = z[point_in_polygon(z, P)]
        d = _dist_to_boundary(z, P)
        layer = np.concatenate([layer, z[(d >= a) & (d <= b)]])
    z = np.concatenate([bulk, layer[:band]])
    if domain is not None:
        z = z[point_in_polygon(z, domain.boundary_polygon)]
    return z


def psi_convergence_experiment(jordan, n_list, samples: int = 500, band: int = 200,
                               seed: int = 0, reference: ZipperMap | None = None) -> RateFit:
    """sup over sample points of |psi_n - psi| for grid approximations D_n.

    psi is the zipper map of ``jordan`` at four times its vertex count unless
    a reference map is supplied.  The decay exponent is ``-fit.slope``; rows
    hold (n, sup gap, median gap, log(n)/sqrt(n)).
    """
    from .lattice import grid_approximation

    P = np.asarray(jordan, dtype=complex)
    psi = reference if reference is not None else zipper_disk_map(P, 4 * P.size)
    rows = []
    for n in n_list:
        dom = grid_approximation(P, n)
        psi_n = grid_zipper(dom)
        z = sample_points(P, n, samples, band, seed, dom)
        gap = np.abs(psi_n(z) - psi(z))
        rows.append((int(n), float(gap.max()), float(np.median(gap)), math.log(n) / math.sqrt(n)))
    fit = fit_rate([r[0] for r in rows], [r[1] for r in rows])
    return RateFit(fit.xs, fit.ys, fit.slope, fit.intercept, fit.r2, fit.note, rows)


# --------------------------------------------------------------------------
# eta_tip transfer
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TransferResult:
    eta_Dn: float
    eta_disk: float
    ratio: float
    d_n: float
    c: float

    @property
    def holds(self) -> bool:
        return self.ratio <= self.c


def transfer_eta_tip_check(curve_in_Dn, Dn, n: int, r: float, c: float = C_TRANSFER,
                           psi_n: ZipperMap | None = None, refine: int = 4) -> TransferResult:
    """eta_tip at d_n = n^-r in D_n versus eta_tip at d_n/c of psi_n(curve) in the disk.

    ``curve_in_Dn`` runs from the boundary of D_n to 0 (physical coordinates).
    """
    from .geometry import disk_domain, eta_tip

    if not 0 < r < 0.5:
        raise DomainError("r must lie in (0, 1/2)")
    psi_n = psi_n if psi_n is not None else grid_zipper(Dn)
    pts = np.asarray(curve_in_Dn, dtype=complex)
    d_n = float(n) ** -r
    eta_dn = float(eta_tip(pts, Dn.polygon_domain(), [d_n]).eta_values[0])
    fine = np.concatenate([pts[k] + (pts[k + 1] - pts[k]) * np.arange(refine) / refine
                           for k in range(pts.size - 1)] + [pts[-1:]])
    img = psi_n(fine)
    # points within ~1e-9 of the boundary lose their imaginary part while
    # unzipping, so the start image comes from a point slightly inside
    inner = psi_n(np.array([fine[0] + 1e-3 * (fine[1] - fine[0])]))[0]
    img[0] = inner / abs(inner)
    eta_d = float(eta_tip(img, disk_domain(1024, img[0]), [d_n / c]).eta_values[0])
    ratio = eta_d / eta_dn if eta_dn > 0 else (0.0 if eta_d == 0 else math.inf)
    return TransferResult(eta_dn, eta_d, ratio, d_n, c)
