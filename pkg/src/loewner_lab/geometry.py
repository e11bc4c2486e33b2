"""Tip structure modulus, bottlenecks and annulus crossings for polygonal curves.

A domain is a simple polygon (counterclockwise) together with a target point;
curves start on the polygon and run into the domain.  Crosscuts are straight
segments, so every reported eta_tip is a lower bound of the true modulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import kernels
from .core_flow import Geometry
from .errors import DomainError, NonBoundaryStart

ON_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class AnnulusSpec:
    center: complex
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not 0 < self.r_inner < self.r_outer:
            raise DomainError("need 0 < r_inner < r_outer")


@dataclass(frozen=True)
class PolygonDomain:
    boundary: np.ndarray
    target: complex = 0j

    def __post_init__(self):
        b = np.asarray(self.boundary, dtype=complex)
        if b.size < 3:
            raise DomainError("polygon needs at least three vertices")
        if abs(b[0] - b[-1]) == 0:
            b = b[:-1]
        area = 0.5 * np.sum((b * np.conj(np.roll(b, -1))).imag)
        if area > 0:
            b = b[::-1].copy()
        object.__setattr__(self, "boundary", b)


@dataclass(frozen=True)
class Crosscut:
    endpoints: tuple
    t: float
    length: float


@dataclass(frozen=True)
class Witness:
    delta: float
    t: float
    eta: float
    cut: Crosscut
    piece_diam: float
    kind: str
    u_start: float
    u_touch: float


@dataclass
class TipStructureReport:
    delta_list: np.ndarray
    eta_values: np.ndarray
    witnesses: list = field(default_factory=list)

    def to_csv(self, path) -> None:
        lines = ["delta,t,eta,cut_x1,cut_y1,cut_x2,cut_y2,piece_diam"]
        for w in self.witnesses:
            if w is None:
                continue
            a, b = w.cut.endpoints
            lines.append(",".join(repr(float(v)) for v in (w.delta, w.t, w.eta, a.real, a.imag,
                                                          b.real, b.imag, w.piece_diam)))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def disk_domain(n: int = 1024, start: complex = 1.0) -> PolygonDomain:
    """Regular n-gon inscribed in the unit circle with a vertex at ``start``."""
    a0 = math.atan2(start.imag, start.real) if start != 0 else 0.0
    return PolygonDomain(np.exp(1j * (a0 + 2 * np.pi * np.arange(n) / n)), 0j)


def half_box_domain(points, scale: float = 4.0) -> PolygonDomain:
    """Half-box [-R, R] x [0, R] around a chordal curve; the target sits near the top.

    Stands in for the half-plane with target at infinity; R is ``scale`` times
    the curve's extent so crosscuts near the curve see the same topology.
    """
    p = np.asarray(points, dtype=complex)
    R = scale * max(float(np.max(np.abs(p))), 0.25)
    box = np.array([-R, R, R + 1j * R, -R + 1j * R])
    return PolygonDomain(box, 0.9j * R)


def domain_for_curve(curve) -> PolygonDomain:
    if curve.geometry is Geometry.RADIAL:
        return disk_domain(1024, curve.points[0])
    return half_box_domain(curve.points)


# --------------------------------------------------------------------------
# annulus crossings
# --------------------------------------------------------------------------

def count_crossings(curve, annulus: AnnulusSpec) -> int:
    """Number of maximal sub-arcs inside the closed annulus touching both circles."""
    pts = np.ascontiguousarray(np.asarray(curve, dtype=complex))
    if pts.size < 2:
        return 0
    return int(kernels.count_crossings(pts, complex(annulus.center), float(annulus.r_inner),
                                       float(annulus.r_outer)))


def _dist_to_polygon(z: np.ndarray, B: np.ndarray) -> np.ndarray:
    a = B
    d = np.roll(B, -1) - B
    L2 = np.abs(d) ** 2
    out = np.full(z.shape, np.inf)
    for k in range(0, a.size, 256):
        aa = a[k:k + 256][None, :]
        dd = d[k:k + 256][None, :]
        ll = L2[k:k + 256][None, :]
        s = np.clip(((z[:, None] - aa) * np.conj(dd)).real / ll, 0, 1)
        out = np.minimum(out, np.min(np.abs(aa + s * dd - z[:, None]), axis=1))
    return out


def point_in_polygon(z: np.ndarray, B: np.ndarray) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    x, y = z.real[:, None], z.imag[:, None]
    a = B[None, :]
    b = np.roll(B, -1)[None, :]
    cond = (a.imag > y) != (b.imag > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
    return (np.sum(cond & (x < xc), axis=1) % 2) == 1


@dataclass(frozen=True)
class FiveCrossingResult:
    centers: list
    boundary_event: bool


def five_crossing_scan(curve, domain: PolygonDomain, delta: float, eta: float, k: int = 5,
                       path=None) -> FiveCrossingResult:
    """Grid centers (spacing eta/4) where the curve has k crossings of A(w; delta, eta).

    The boundary event flags a path that comes within delta of the boundary
    and afterwards moves more than eta away from that point.
    """
    pts = np.asarray(curve, dtype=complex)
    B = domain.boundary
    h = eta / 4.0
    xs = np.arange(math.floor(B.real.min() / h), math.ceil(B.real.max() / h) + 1) * h
    ys = np.arange(math.floor(B.imag.min() / h), math.ceil(B.imag.max() / h) + 1) * h
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    cand = (gx + 1j * gy).ravel()
    cand = cand[point_in_polygon(cand, B)]
    near = np.min(np.abs(cand[:, None] - pts[None, ::max(1, pts.size // 400)]), axis=1) <= eta + h
    centers = [complex(c) for c in cand[near]
               if kernels.count_crossings(pts, complex(c), delta, eta) >= k]
    flag = False
    walk = pts if path is None else np.asarray(path, dtype=complex)
    dist = _dist_to_polygon(walk, B)
    close = np.flatnonzero(dist <= delta)
    for i in close:
        if np.max(np.abs(walk[i:] - walk[i])) > eta:
            flag = True
            break
    return FiveCrossingResult(centers, flag)


# --------------------------------------------------------------------------
# crosscut scan
# --------------------------------------------------------------------------

@dataclass
class _Scan:
    P: np.ndarray
    times: np.ndarray
    rows: np.ndarray
    diam_cache: dict


def _dedupe(p: np.ndarray, times: np.ndarray):
    keep = np.concatenate([[True], np.abs(np.diff(p)) > 1e-13])
    return p[keep], times[keep]


def _project_to_boundary(z: complex, B: np.ndarray):
    a = B
    d = np.roll(B, -1) - B
    s = np.clip(((z - a) * np.conj(d)).real / (np.abs(d) ** 2), 0, 1)
    q = a + s * d
    j = int(np.argmin(np.abs(q - z)))
    return complex(q[j]), j + float(s[j]), float(abs(q[j] - z))


def _subdivide(n_seg: int, lengths: np.ndarray, h: float):
    per = np.maximum(2, np.ceil(2 * lengths / h).astype(np.int64))
    params = [k + np.arange(c) / c for k, c in enumerate(per)]
    return np.concatenate(params) if params else np.zeros(0)


def _build_hash(seg_a, seg_b, pts, bpts, cell):
    allz = np.concatenate([seg_a, seg_b, pts, bpts])
    ox = float(allz.real.min()) - cell
    oy = float(allz.imag.min()) - cell
    ncx = int(math.ceil((allz.real.max() - ox) / cell)) + 2
    ncy = int(math.ceil((allz.imag.max() - oy) / cell)) + 2

    def cix(z):
        return (np.clip(np.floor((z.real - ox) / cell), 0, ncx - 1).astype(np.int64),
                np.clip(np.floor((z.imag - oy) / cell), 0, ncy - 1).astype(np.int64))

    ax, ay = cix(seg_a)
    bx, by = cix(seg_b)
    cells, ids = [], []
    short = (np.abs(ax - bx) <= 1) & (np.abs(ay - by) <= 1)
    sid = np.arange(seg_a.size)
    for cx in (ax, bx):
        for cy in (ay, by):
            cells.append(cx[short] * ncy + cy[short])
            ids.append(sid[short])
    half = cell * math.sqrt(0.5) + 1e-12
    for s in np.flatnonzero(~short):
        xr = np.arange(min(ax[s], bx[s]), max(ax[s], bx[s]) + 1)
        yr = np.arange(min(ay[s], by[s]), max(ay[s], by[s]) + 1)
        gx, gy = np.meshgrid(xr, yr, indexing="ij")
        c = ox + (gx.ravel() + 0.5) * cell + 1j * (oy + (gy.ravel() + 0.5) * cell)
        d = seg_b[s] - seg_a[s]
        t = np.clip(((c - seg_a[s]) * np.conj(d)).real / (abs(d) ** 2), 0, 1)
        ok = np.abs(seg_a[s] + t * d - c) <= half
        cells.append(gx.ravel()[ok] * ncy + gy.ravel()[ok])
        ids.append(np.full(int(ok.sum()), s))
    cells = np.concatenate(cells)
    ids = np.concatenate(ids)
    pair = np.unique(cells * (seg_a.size + 1) + ids)
    cells = pair // (seg_a.size + 1)
    ids = pair % (seg_a.size + 1)
    seg_start = np.searchsorted(cells, np.arange(ncx * ncy + 1)).astype(np.int64)

    def csr(z):
        x, y = cix(z)
        c = x * ncy + y
        order = np.argsort(c, kind="stable")
        return (np.searchsorted(c[order], np.arange(ncx * ncy + 1)).astype(np.int64),
                order.astype(np.int64))

    pt_start, pt_ids = csr(pts)
    bpt_start, bpt_ids = csr(bpts)
    return (ox, oy, ncx, ncy, seg_start, ids.astype(np.int64), pt_start, pt_ids,
            bpt_start, bpt_ids)


def _prefix_angles(z: np.ndarray, closed: bool):
    zz = np.concatenate([z, z[:1]]) if closed else z
    th = np.concatenate([[np.angle(zz[0])], np.angle(zz[1:] / zz[:-1])])
    ar = np.concatenate([[0.0], 0.5 * (np.conj(zz[:-1]) * zz[1:]).imag])
    return np.cumsum(th), np.cumsum(ar)


def _suffix_bbox(P: np.ndarray):
    r = P.real[::-1]
    i = P.imag[::-1]
    return (np.minimum.accumulate(r)[::-1].copy(), np.maximum.accumulate(r)[::-1].copy(),
            np.minimum.accumulate(i)[::-1].copy(), np.maximum.accumulate(i)[::-1].copy())


def prepare_curve(points, domain: PolygonDomain, times=None, drop_target: bool = True):
    """Shift to target coordinates and make sure the curve starts on the boundary."""
    p = np.asarray(points, dtype=complex) - domain.target
    t = np.arange(p.size, dtype=float) if times is None else np.asarray(times, dtype=float)
    B = domain.boundary - domain.target
    if drop_target and abs(p[-1]) < 1e-12:
        p, t = p[:-1], t[:-1]
    p, t = _dedupe(p, t)
    if np.any(np.abs(p) < 1e-12):
        raise DomainError("curve passes through the target point")
    q, v0, dist = _project_to_boundary(complex(p[0]), B)
    if dist <= ON_BOUNDARY_TOL:
        p = p.copy()
        p[0] = q
    else:
        p = np.concatenate([[q], p])
        t = np.concatenate([[t[0]], t])
    if not point_in_polygon(np.array([p[min(1, p.size - 1)]]), B)[0] and p.size > 1:
        raise NonBoundaryStart("curve does not enter the domain")
    return p, t, B, v0


def scan_crosscuts(points, domain: PolygonDomain, delta_max: float, times=None,
                   prune_floor: float = 0.0, boundary_pairs: bool = True,
                   drop_target: bool = True) -> _Scan:
    """All separating straight crosscuts of length <= delta_max, with their pieces."""
    P, t, B, v0 = prepare_curve(points, domain, times, drop_target)
    m = P.size - 1
    if m < 1:
        return _Scan(P, t, np.zeros((0, 12)), {})
    cth, car = _prefix_angles(P, False)
    bth, bar = _prefix_angles(B, True)
    seg_len = np.abs(np.diff(P))
    u = _subdivide(m, seg_len, delta_max)
    u = np.concatenate([u, [float(m)]])
    k = np.minimum(np.floor(u).astype(np.int64), m - 1)
    samp_p = P[k] + (u - k) * (P[np.minimum(k + 1, m)] - P[k])
    samp_p[-1] = P[m]
    nb = B.size
    bl = np.abs(np.roll(B, -1) - B)
    v = _subdivide(nb, bl, delta_max)
    kb = np.floor(v).astype(np.int64)
    bsamp_p = B[kb] + (v - kb) * (np.roll(B, -1)[kb] - B[kb])
    seg_a = np.concatenate([P[:-1], B])
    seg_b = np.concatenate([P[1:], np.roll(B, -1)])
    cell = float(delta_max)
    hs = _build_hash(seg_a, seg_b, samp_p, bsamp_p, cell)
    sminx, smaxx, sminy, smaxy = _suffix_bbox(P)
    rows = kernels.tip_candidates(P, B, float(v0), cth, car, bth, bar, u, samp_p, v, bsamp_p,
                                  cell, *hs, sminx, smaxx, sminy, smaxy, float(delta_max),
                                  float(prune_floor), bool(boundary_pairs))
    return _Scan(P, t, np.asarray(rows), {})


def _piece_points(scan: _Scan, row) -> np.ndarray:
    P = scan.P
    m = P.size - 1
    kind, ub_, touch = int(row[0]), row[2], row[3]
    start = complex(row[4], row[5]) if kind != 2 else P[0]
    k0 = int(math.ceil(ub_ - 1e-12))
    k1 = min(int(math.floor(touch + 1e-12)), m)
    mid = P[k0:k1 + 1] if k0 <= k1 else np.zeros(0, dtype=complex)
    return np.concatenate([[start], mid, [complex(row[8], row[9])]])


def _diameter(z: np.ndarray) -> float:
    if z.size <= 1:
        return 0.0
    pts = np.column_stack([z.real, z.imag])
    if z.size > 8:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except QhullError:
            pass
    if pts.shape[0] > 2000:
        pts = pts[:: pts.shape[0] // 2000 + 1]
    d = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt(np.max(np.sum(d * d, axis=2))))


def piece_diameter(scan: _Scan, i: int) -> float:
    if i not in scan.diam_cache:
        scan.diam_cache[i] = _diameter(_piece_points(scan, scan.rows[i]))
    return scan.diam_cache[i]


def _best(scan: _Scan, mask: np.ndarray):
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return -1, 0.0
    order = idx[np.argsort(-scan.rows[idx, 11], kind="stable")]
    best, bi = 0.0, -1
    for i in order:
        if scan.rows[i, 11] <= best:
            break
        d = piece_diameter(scan, int(i))
        if d > best:
            best, bi = d, int(i)
    return bi, best


def _time_at(scan: _Scan, u: float) -> float:
    return float(np.interp(u, np.arange(scan.times.size), scan.times))


def _witness(scan: _Scan, i: int, delta: float, eta: float, target: complex) -> Witness:
    r = scan.rows[i]
    a = complex(r[4], r[5]) + target
    b = complex(r[6], r[7]) + target
    kinds = {0: "curve-curve", 1: "curve-boundary", 2: "boundary-boundary"}
    t = _time_at(scan, r[3])
    return Witness(delta, t, eta, Crosscut((a, b), t, float(r[1])), piece_diameter(scan, i),
                   kinds[int(r[0])], float(r[2]), float(r[3]))


def eta_tip(curve, domain: PolygonDomain, delta_list, times=None, prune_floor: float = 0.0,
            boundary_pairs: bool = True, drop_target: bool = True) -> TipStructureReport:
    """Lower bound of eta_tip(delta) for each delta, with the witnessing crosscuts.

    Every crosscut is followed over the whole time window in which it stays a
    crosscut, so no time subsampling is needed; values are nondecreasing in
    delta by construction.
    """
    deltas = np.asarray(delta_list, dtype=float).ravel()
    if deltas.size == 0 or np.any(deltas <= 0):
        raise DomainError("delta_list must hold positive scales")
    scan = scan_crosscuts(curve, domain, float(deltas.max()), times, prune_floor,
                          boundary_pairs, drop_target)
    etas, wit = [], []
    for d in deltas:
        if scan.rows.shape[0] == 0:
            etas.append(0.0)
            wit.append(None)
            continue
        bi, best = _best(scan, scan.rows[:, 1] <= d)
        etas.append(best)
        wit.append(_witness(scan, bi, float(d), best, domain.target) if bi >= 0 else None)
    return TipStructureReport(deltas, np.asarray(etas), wit)


def eta_tip_curve(curve, delta_list, prune_floor: float = 0.0):
    """eta_tip for a traced curve in its reference domain (disk, or a large half-box)."""
    rep = eta_tip(curve.points, domain_for_curve(curve), delta_list, times=curve.times,
                  prune_floor=prune_floor)
    lookup = dict(zip(rep.delta_list.tolist(), rep.eta_values.tolist()))
    return np.array([lookup[float(d)] for d in delta_list])


def detect_bottleneck(curve, domain: PolygonDomain, t_index: int, delta: float, eta: float,
                      times=None) -> Witness | None:
    """A crosscut of D_t of length <= delta separating a piece of diameter >= eta, if any."""
    pts = np.asarray(curve, dtype=complex)[: t_index + 1]
    tt = None if times is None else np.asarray(times)[: t_index + 1]
    if pts.size < 2:
        return None
    scan = scan_crosscuts(pts, domain, delta, tt, drop_target=False)
    if scan.rows.shape[0] == 0:
        return None
    m = scan.P.size - 1
    mask = (scan.rows[:, 3] >= m - 1e-9) & (scan.rows[:, 1] <= delta)
    bi, best = _best(scan, mask)
    if bi < 0 or best < eta:
        return None
    return _witness(scan, bi, delta, best, domain.target)
