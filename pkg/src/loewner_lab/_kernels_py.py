"""Pure numpy implementations of the hot loops.

Every function here has a twin with the same signature in the compiled
``_ckernels`` module; ``loewner_lab.kernels`` picks one at import time.
Status codes returned by the flow kernels: 0 ok, 1 step underflow,
2 non-finite state.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

RADIAL = 0
CHORDAL = 1

_DIR = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=np.int64)


# --------------------------------------------------------------------------
# Loewner flows
# --------------------------------------------------------------------------

def _interp(xi, rows, dt, tau):
    k = xi.shape[1]
    x = np.clip(tau / dt, 0.0, k - 1.0)
    i = np.minimum(x.astype(np.int64), k - 2) if k > 1 else np.zeros_like(x, dtype=np.int64)
    if k == 1:
        return xi[rows, 0]
    f = x - i
    return xi[rows, i] + f * (xi[rows, i + 1] - xi[rows, i])


def _field(geom, y, v, sign):
    if geom == RADIAL:
        w = np.exp(1j * v)
        q = w - y
        f = -y * (w + y) / q
        df = -(w * w + 2.0 * y * w - y * y) / (q * q)
    else:
        q = y - v
        f = -2.0 / q
        df = 2.0 / (q * q)
    return sign * f, sign * df


def _dist(geom, y, v):
    if geom == RADIAL:
        return np.abs(y - np.exp(1j * v))
    return np.abs(y - v)


def flow_batch(geom, xi, rows, dt, tau0, direction, sign, s_end, z, track,
               c_step, floor, checkpoints):
    """Integrate dy/ds = sign * Phi(y, V(tau0 + direction * s)) lane by lane.

    Steps are RK4 with h = min(knot gap, c_step * dist**2, remaining); they
    never straddle a driving knot or a checkpoint.
    """
    xi = np.ascontiguousarray(xi, dtype=np.float64)
    rows = np.asarray(rows, dtype=np.int64)
    tau0 = np.asarray(tau0, dtype=np.float64)
    s_end = np.asarray(s_end, dtype=np.float64)
    y = np.array(z, dtype=np.complex128)
    n = y.shape[0]
    dy = np.ones(n, dtype=np.complex128)
    s = np.zeros(n)
    status = np.zeros(n, dtype=np.int8)
    ck = np.asarray(checkpoints, dtype=np.float64)
    nc = ck.shape[0]
    rec = np.full((n, nc), np.nan + 1j * np.nan)
    drec = np.full((n, nc), np.nan + 1j * np.nan)
    ci = np.zeros(n, dtype=np.int64)
    tol = 1e-12 * max(dt, 1e-300)

    def record(idx):
        while True:
            j = idx[ci[idx] < nc]
            if j.size == 0:
                return
            hit = j[s[j] >= ck[ci[j]] - tol]
            if hit.size == 0:
                return
            rec[hit, ci[hit]] = y[hit]
            drec[hit, ci[hit]] = dy[hit]
            ci[hit] += 1

    record(np.arange(n))
    active = s_end > 0.0
    while True:
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        si = s[idx]
        yi = y[idx]
        ri = rows[idx]
        tau = tau0[idx] + direction * si
        v0 = _interp(xi, ri, dt, tau)
        dist = _dist(geom, yi, v0)
        hd = c_step * dist * dist
        if direction > 0:
            kn = np.floor(tau / dt + 1e-9) + 1.0
            hk = kn * dt - tau
        else:
            kn = np.ceil(tau / dt - 1e-9) - 1.0
            hk = np.where(kn < 0, np.inf, tau - kn * dt)
        rem = s_end[idx] - si
        cgap = np.full(idx.size, np.inf)
        has = ci[idx] < nc
        cgap[has] = ck[ci[idx][has]] - si[has]
        h = np.minimum(np.minimum(hk, rem), np.minimum(hd, cgap))
        bad = (hd < floor) & (hd <= np.minimum(np.minimum(hk, rem), cgap))
        if bad.any():
            status[idx[bad]] = 1
            active[idx[bad]] = False
            keep = ~bad
            idx, si, yi, ri, tau, v0, h = (idx[keep], si[keep], yi[keep], ri[keep],
                                           tau[keep], v0[keep], h[keep])
            if idx.size == 0:
                continue
        dyi = dy[idx]
        vm = _interp(xi, ri, dt, tau + direction * 0.5 * h)
        v1 = _interp(xi, ri, dt, tau + direction * h)
        k1, m1 = _field(geom, yi, v0, sign)
        y2 = yi + 0.5 * h * k1
        k2, m2 = _field(geom, y2, vm, sign)
        y3 = yi + 0.5 * h * k2
        k3, m3 = _field(geom, y3, vm, sign)
        y4 = yi + h * k3
        k4, m4 = _field(geom, y4, v1, sign)
        ynew = yi + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if track:
            d1 = m1 * dyi
            d2 = m2 * (dyi + 0.5 * h * d1)
            d3 = m3 * (dyi + 0.5 * h * d2)
            d4 = m4 * (dyi + h * d3)
            dy[idx] = dyi + h / 6.0 * (d1 + 2 * d2 + 2 * d3 + d4)
        y[idx] = ynew
        snew = si + h
        done = h >= s_end[idx] - si
        snew[done] = s_end[idx][done]
        s[idx] = snew
        fin = ~np.isfinite(ynew)
        if fin.any():
            status[idx[fin]] = 2
            active[idx[fin]] = False
        record(idx)
        active[idx[done]] = False
    return y, dy, status, rec, drec


def gronwall_pair(geom, xi1, xi2, dt, t0, z1, z2, c_step, floor, eps_prime):
    """Integrate two reverse flows in lockstep and accumulate the Gronwall terms.

    Returns (h1, h2, int_re_psi, K, r_max_all, r_max_near, status) where the
    xi-term of the bound equals exp(int_re_psi) * K.
    """
    k = len(xi1)

    def drive(row, tau):
        x = min(max(tau / dt, 0.0), k - 1.0)
        i = min(int(x), k - 2) if k > 1 else 0
        if k == 1:
            return row[0]
        return row[i] + (x - i) * (row[i + 1] - row[i])

    def field(y, v):
        if geom == RADIAL:
            w = cmath.exp(1j * v)
            return -y * (w + y) / (w - y), w
        return -2.0 / (y - v), complex(v)

    def rk4(y, v0, vm, v1, h):
        a, _ = field(y, v0)
        b, _ = field(y + 0.5 * h * a, vm)
        c, _ = field(y + 0.5 * h * b, vm)
        d, _ = field(y + h * c, v1)
        return y + h / 6.0 * (a + 2 * b + 2 * c + d)

    def terms(h1, h2, w1, w2):
        if geom == RADIAL:
            den = (h1 - w1) * (h2 - w2)
            psi = (h1 * h2 - w1 * w2 - 0.5 * (h1 + h2) * (w1 + w2)) / den
            xi = (h1 * h1 + h2 * h2) / (2.0 * den)
            return psi, xi
        psi = 2.0 / ((h1 - w1) * (h2 - w2))
        return psi, psi

    def kernel_r(h1, h2, w1, w2):
        a = h1 * w1.conjugate()
        b = h2 * w2.conjugate()
        num = ((a * b - 1.0 - (a + b)) * (1.0 - a.conjugate()) * (1.0 - b.conjugate())).real
        den = abs(1.0 - a) * abs(1.0 - b) * math.sqrt((1.0 + abs(a)) * (1.0 + abs(b)))
        return num / den, abs(a), abs(b)

    h1 = complex(z1)
    h2 = complex(z2)
    s = 0.0
    integ = 0.0
    kacc = 0.0
    rmax = -math.inf
    rnear = -math.inf
    status = 0
    tol = 1e-12 * dt
    v1a = drive(xi1, t0)
    v2a = drive(xi2, t0)
    _, w1 = field(h1, v1a)
    _, w2 = field(h2, v2a)
    psi_a, xi_a = terms(h1, h2, w1, w2)
    if geom == RADIAL:
        r, a1, a2 = kernel_r(h1, h2, w1, w2)
        rmax = r
        if a1 >= 1 - eps_prime and a2 >= 1 - eps_prime:
            rnear = r
    while s < t0 - tol:
        tau = t0 - s
        kn = math.ceil(tau / dt - 1e-9) - 1.0
        hk = tau - kn * dt if kn >= 0 else math.inf
        d1 = abs(h1 - w1)
        d2 = abs(h2 - w2)
        hd = c_step * min(d1, d2) ** 2
        rem = t0 - s
        h = min(hk, hd, rem)
        if hd < floor and hd <= min(hk, rem):
            status = 1
            break
        vm1 = drive(xi1, tau - 0.5 * h)
        vm2 = drive(xi2, tau - 0.5 * h)
        ve1 = drive(xi1, tau - h)
        ve2 = drive(xi2, tau - h)
        h1 = rk4(h1, v1a, vm1, ve1, h)
        h2 = rk4(h2, v2a, vm2, ve2, h)
        if not (cmath.isfinite(h1) and cmath.isfinite(h2)):
            status = 2
            break
        s = t0 if h >= rem else s + h
        v1a, v2a = ve1, ve2
        _, w1 = field(h1, v1a)
        _, w2 = field(h2, v2a)
        psi_b, xi_b = terms(h1, h2, w1, w2)
        inew = integ + 0.5 * h * (psi_a.real + psi_b.real)
        kacc += 0.5 * h * (math.exp(-integ) * abs(xi_a) + math.exp(-inew) * abs(xi_b))
        integ = inew
        psi_a, xi_a = psi_b, xi_b
        if geom == RADIAL:
            r, a1, a2 = kernel_r(h1, h2, w1, w2)
            rmax = max(rmax, r)
            if a1 >= 1 - eps_prime and a2 >= 1 - eps_prime:
                rnear = max(rnear, r)
    return h1, h2, integ, kacc, rmax, rnear, status


# --------------------------------------------------------------------------
# Lattice walks
# --------------------------------------------------------------------------

def walk_chunk(mask, x0, y0, dirs):
    """Advance a walk on the interior mask using the direction bytes in order.

    Returns the visited sites (excluding the start), and whether the walk
    stepped onto a non-interior site within this chunk.
    """
    d = _DIR[np.asarray(dirs, dtype=np.int64)]
    xs = x0 + np.cumsum(d[:, 0])
    ys = y0 + np.cumsum(d[:, 1])
    cx = np.clip(xs, 0, mask.shape[0] - 1)
    cy = np.clip(ys, 0, mask.shape[1] - 1)
    out = np.flatnonzero(mask[cx, cy] == 0)
    if out.size:
        n = int(out[0]) + 1
        return xs[:n].copy(), ys[:n].copy(), True
    return xs, ys, False


def loop_erase_indices(codes, table_size):
    """Indices kept by the last-exit recursion s_i = last visit of S(s_{i-1}+1)."""
    codes = np.asarray(codes, dtype=np.int64)
    n = codes.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    uniq, first_rev = np.unique(codes[::-1], return_index=True)
    last = (n - 1 - first_rev)[np.searchsorted(uniq, codes)]
    out = []
    i = 0
    while True:
        j = int(last[i])
        out.append(j)
        if j == n - 1:
            break
        i = j + 1
    return np.asarray(out, dtype=np.int64)


# --------------------------------------------------------------------------
# Annulus crossings
# --------------------------------------------------------------------------

def _circle_roots(a, d, r):
    qa = d.real * d.real + d.imag * d.imag
    if qa == 0.0:
        return []
    qb = 2.0 * (a.real * d.real + a.imag * d.imag)
    qc = a.real * a.real + a.imag * a.imag - r * r
    disc = qb * qb - 4 * qa * qc
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    return [(-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)]


def count_crossings(pts, center, r_in, r_out):
    pts = np.asarray(pts, dtype=np.complex128) - center
    eps = 1e-12
    count = 0
    in_run = False
    t_in = t_out = False
    for k in range(len(pts) - 1):
        a = complex(pts[k])
        d = complex(pts[k + 1]) - a
        cuts = [0.0, 1.0]
        for r in (r_in, r_out):
            for s in _circle_roots(a, d, r):
                if 0.0 < s < 1.0:
                    cuts.append(s)
        cuts.sort()
        for j in range(len(cuts) - 1):
            s0, s1 = cuts[j], cuts[j + 1]
            if s1 - s0 <= 0.0 and not (len(pts) == 2 and j == 0):
                continue
            mid = abs(a + 0.5 * (s0 + s1) * d)
            e0 = abs(a + s0 * d)
            e1 = abs(a + s1 * d)
            cls = 1
            if mid < r_in * (1 - eps) and not (abs(mid - r_in) <= eps * r_in):
                cls = 0
            elif mid > r_out * (1 + eps):
                cls = 2
            if cls != 1:
                if in_run and t_in and t_out:
                    count += 1
                in_run = False
                t_in = t_out = False
                continue
            qa = d.real * d.real + d.imag * d.imag
            lo = min(e0, e1)
            if qa > 0:
                sc = -(a.real * d.real + a.imag * d.imag) / qa
                if s0 < sc < s1:
                    lo = min(lo, abs(a + sc * d))
            hi = max(e0, e1)
            if not in_run:
                in_run = True
                t_in = t_out = False
            if lo <= r_in * (1 + eps):
                t_in = True
            if hi >= r_out * (1 - eps):
                t_out = True
    if in_run and t_in and t_out:
        count += 1
    return count


# --------------------------------------------------------------------------
# Tip structure modulus candidates
# --------------------------------------------------------------------------

_PEPS = 1e-9


def _cross(a, b):
    return a.real * b.imag - a.imag * b.real


def _dot(a, b):
    return a.real * b.real + a.imag * b.imag


def seg_intersect(a, b, c, d):
    """Intersection of closed segments [a,b] and [c,d].

    Returns None or (mu0, mu1, lam_first) with [mu0, mu1] the parameter range
    on [a,b] and lam_first the smallest parameter on [c,d].
    """
    r = b - a
    s = d - c
    rr = abs(r)
    ss = abs(s)
    if rr == 0.0 or ss == 0.0:
        return None
    den = _cross(r, s)
    scale = rr * ss
    if abs(den) > 1e-12 * scale:
        w = c - a
        mu = _cross(w, s) / den
        lam = _cross(w, r) / den
        if -_PEPS <= mu <= 1 + _PEPS and -_PEPS <= lam <= 1 + _PEPS:
            mu = min(max(mu, 0.0), 1.0)
            lam = min(max(lam, 0.0), 1.0)
            return mu, mu, lam
        return None
    w = c - a
    if abs(_cross(w, r)) > 1e-12 * rr * max(abs(w), rr):
        return None
    mc = _dot(c - a, r) / (rr * rr)
    md = _dot(d - a, r) / (rr * rr)
    lo = max(min(mc, md), 0.0)
    hi = min(max(mc, md), 1.0)
    if lo > hi + _PEPS:
        return None
    lo = min(lo, hi)
    if md == mc:
        return lo, hi, 0.0
    la = (lo - mc) / (md - mc)
    lb = (hi - mc) / (md - mc)
    return lo, hi, max(min(la, lb), 0.0)


def _open_hit(res):
    return res is not None and res[1] > _PEPS and res[0] < 1 - _PEPS


def _in_ccw_sector(d, start, end):
    """True when direction d lies strictly inside the CCW sweep start -> end."""
    a0 = math.atan2(start.imag, start.real)
    span = (math.atan2(end.imag, end.real) - a0) % (2 * math.pi)
    ang = (math.atan2(d.imag, d.real) - a0) % (2 * math.pi)
    return 1e-12 < ang < span - 1e-12


def tip_candidates(P, B, v0, cth, car, bth, bar, samp_u, samp_p, bsamp_v, bsamp_p,
                   cell, ox, oy, ncx, ncy, seg_start, seg_ids, pt_start, pt_ids,
                   bpt_start, bpt_ids, sminx, smaxx, sminy, smaxy, delta_max,
                   prune_floor, include_boundary_pairs):
    """Enumerate straight crosscuts and the curve pieces they separate.

    Coordinates are shifted so that the target point is the origin.  Returns a
    float array with one row per separating crosscut:
    (kind, length, u_b, u_touch, x.re, x.im, y.re, y.im, tp.re, tp.im, lb, ub).
    """
    m = len(P) - 1
    nb = len(B)
    out = []

    def cell_of(z):
        return (min(max(int(math.floor((z.real - ox) / cell)), 0), ncx - 1),
                min(max(int(math.floor((z.imag - oy) / cell)), 0), ncy - 1))

    def curve_point(u):
        k = int(math.floor(u))
        if k >= m:
            return complex(P[m])
        f = u - k
        return complex(P[k]) + f * (complex(P[k + 1]) - complex(P[k]))

    def curve_theta(u):
        k = min(int(math.floor(u)), m)
        q = curve_point(u)
        base = complex(P[k])
        return cth[k] + cmath.phase(q / base), car[k] + 0.5 * _cross(base, q)

    def bnd_point(v):
        k = int(math.floor(v)) % nb
        f = v - math.floor(v)
        return complex(B[k]) + f * (complex(B[(k + 1) % nb]) - complex(B[k]))

    def bnd_theta(v):
        k = int(math.floor(v))
        q = bnd_point(v)
        base = complex(B[k % nb])
        return bth[k] + cmath.phase(q / base), bar[k] + 0.5 * _cross(base, q)

    def bnd_ccw(va, vb):
        # a wrap of (almost) the whole loop is the same boundary point seen
        # from both sides of the seam; treat it as an empty arc
        span = (vb - va) % nb
        if span > nb - 1e-9 or span < 1e-12:
            return 0.0, 0.0
        ta, aa = bnd_theta(va)
        if vb >= va:
            tb, ab = bnd_theta(vb)
            return tb - ta, ab - aa
        te, ae = bth[nb], bar[nb]
        tb, ab = bnd_theta(vb)
        return (te - ta) + tb, (ae - aa) + ab

    def bbox_range(k0, k1):
        # vertex k0..k1 inclusive (k0 <= k1), via direct min/max
        if k0 > k1:
            return None
        seg = P[k0:k1 + 1]
        return seg.real.min(), seg.real.max(), seg.imag.min(), seg.imag.max()

    def seg_cells(a, b):
        (ax, ay), (bx, by) = cell_of(a), cell_of(b)
        for ix in range(min(ax, bx), max(ax, bx) + 1):
            for iy in range(min(ay, by), max(ay, by) + 1):
                c = ix * ncy + iy
                for q in range(seg_start[c], seg_start[c + 1]):
                    yield int(seg_ids[q])

    def evaluate(kind, x, ux, y, uy, vy):
        # validity of the open segment and the first touch after u_b
        ub_ = ux if kind != 2 else 0.0
        kx = int(math.floor(ux))
        touch = math.inf
        tpt = None
        seen = set()
        for sid in seg_cells(x, y):
            if sid in seen:
                continue
            seen.add(sid)
            if sid >= m:
                j = sid - m
                res = seg_intersect(x, y, complex(B[j]), complex(B[(j + 1) % nb]))
                if _open_hit(res):
                    return None
                continue
            j = sid
            p0 = complex(P[j])
            p1 = complex(P[j + 1])
            if kind == 2:
                res = seg_intersect(x, y, p0, p1)
                if res is not None:
                    u = j + res[2]
                    if u < touch:
                        touch = u
                continue
            if j < kx:
                res = seg_intersect(x, y, p0, p1)
                if _open_hit(res):
                    return None
                continue
            # j >= kx
            if j == kx and ux > kx:
                past = seg_intersect(x, y, p0, x)
                if _open_hit(past):
                    return None
                fut0 = x
                off = ux - kx
            else:
                fut0 = p0
                off = 0.0
            res = seg_intersect(x, y, fut0, p1)
            if res is None:
                continue
            if fut0 == x or (j == kx and ux == kx):
                # the future piece starts at x: ignore the isolated touch at x
                if res[1] - res[0] <= _PEPS and res[0] <= _PEPS:
                    continue
                return None
            u = j + off + (1.0 - off) * res[2]
            if u < touch:
                touch = u
        if touch == math.inf:
            touch = float(m)
        if touch <= ub_ + 1e-12:
            return None
        # separation
        if kind == 2:
            if _seg_hits_origin(x, y):
                return None
            # loop: y -> ccw along the boundary -> x -> straight back to y
            tot, _ = bnd_ccw(vy[0], vy[1])
            tot += cmath.phase(y / x)
            wind = int(round(tot / (2 * math.pi)))
            mid = 0.5 * (x + y)
            if not _point_in_polygon(mid, B):
                return None
            if wind != 0:
                return None
        else:
            if _seg_hits_origin(x, y):
                return None
            tx, ax = curve_theta(ux)
            if kind == 0:
                ty, ay = curve_theta(uy)
                tot = (ty - tx) + cmath.phase(x / y)
                area = -(ax - ay) + 0.5 * _cross(y, x)
            else:
                t0, a0 = cth[0], car[0]
                tb, ab = bnd_ccw(v0, vy)
                tot = (t0 - tx) + tb + cmath.phase(x / y)
                area = -(ax - a0) + ab + 0.5 * _cross(y, x)
            wind = int(round(tot / (2 * math.pi)))
            if ux == kx:
                d_in = complex(P[kx - 1]) - x
            else:
                d_in = complex(P[kx]) - x
            d_out = complex(P[kx + 1]) - x
            d_c = y - x
            if area > 0:
                tip_in = _in_ccw_sector(d_out, d_in, d_c)
            else:
                tip_in = _in_ccw_sector(d_out, d_c, d_in)
            if tip_in == (wind != 0):
                return None
        tp = curve_point(touch)
        start = x if kind != 2 else complex(P[0])
        k0 = int(math.ceil(ub_ - 1e-12))
        k1 = int(math.floor(touch + 1e-12))
        xs = [start.real, tp.real]
        ys = [start.imag, tp.imag]
        bb = bbox_range(k0, min(k1, m))
        if bb is not None:
            xs += [bb[0], bb[1]]
            ys += [bb[2], bb[3]]
        w = max(xs) - min(xs)
        hgt = max(ys) - min(ys)
        ub = math.hypot(w, hgt)
        if ub <= prune_floor:
            return None
        lb = max(w, hgt)
        return (kind, abs(x - y), ub_, touch, x.real, x.imag, y.real, y.imag,
                tp.real, tp.imag, lb, ub)

    dmax2 = delta_max * delta_max
    for i in range(len(samp_u)):
        ux = float(samp_u[i])
        if ux <= 0.0 or ux >= m:
            continue
        x = complex(samp_p[i])
        kx = int(math.ceil(ux))
        if kx <= m:
            w = max(smaxx[kx], x.real) - min(sminx[kx], x.real)
            hgt = max(smaxy[kx], x.imag) - min(sminy[kx], x.imag)
            if math.hypot(w, hgt) <= prune_floor:
                continue
        cx, cy = cell_of(x)
        for ix in range(max(cx - 1, 0), min(cx + 2, ncx)):
            for iy in range(max(cy - 1, 0), min(cy + 2, ncy)):
                c = ix * ncy + iy
                for q in range(pt_start[c], pt_start[c + 1]):
                    j = int(pt_ids[q])
                    uy = float(samp_u[j])
                    if uy >= ux - 1e-12:
                        continue
                    y = complex(samp_p[j])
                    dd = abs(y - x) ** 2
                    if dd > dmax2 or dd < 1e-24:
                        continue
                    r = evaluate(0, x, ux, y, uy, None)
                    if r is not None:
                        out.append(r)
                for q in range(bpt_start[c], bpt_start[c + 1]):
                    j = int(bpt_ids[q])
                    y = complex(bsamp_p[j])
                    dd = abs(y - x) ** 2
                    if dd > dmax2 or dd < 1e-24:
                        continue
                    r = evaluate(1, x, ux, y, None, float(bsamp_v[j]))
                    if r is not None:
                        out.append(r)
    if include_boundary_pairs:
        for i in range(len(bsamp_v)):
            y1 = complex(bsamp_p[i])
            v1 = float(bsamp_v[i])
            cx, cy = cell_of(y1)
            for ix in range(max(cx - 1, 0), min(cx + 2, ncx)):
                for iy in range(max(cy - 1, 0), min(cy + 2, ncy)):
                    c = ix * ncy + iy
                    for q in range(bpt_start[c], bpt_start[c + 1]):
                        j = int(bpt_ids[q])
                        if j == i:
                            continue
                        y2 = complex(bsamp_p[j])
                        dd = abs(y2 - y1) ** 2
                        if dd > dmax2 or dd < 1e-24:
                            continue
                        v2 = float(bsamp_v[j])
                        a = (v0 - v1) % nb
                        b = (v2 - v1) % nb
                        if not (1e-12 < a < b - 1e-12):
                            continue
                        r = evaluate(2, y2, 0.0, y1, None, (v1, v2))
                        if r is not None:
                            out.append(r)
    if not out:
        return np.zeros((0, 12))
    return np.asarray(out, dtype=np.float64)


def _seg_hits_origin(a, b):
    d = b - a
    L = abs(d)
    if L == 0:
        return abs(a) < 1e-15
    return abs(_cross(a, d)) <= 1e-12 * L * max(abs(a), 1e-300) and _dot(-a, d) >= 0 and _dot(-b, -d) >= 0


def _point_in_polygon(z, B):
    x, y = z.real, z.imag
    inside = False
    n = len(B)
    for k in range(n):
        a = B[k]
        b = B[(k + 1) % n]
        if (a.imag > y) != (b.imag > y):
            xc = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            if x < xc:
                inside = not inside
    return inside
