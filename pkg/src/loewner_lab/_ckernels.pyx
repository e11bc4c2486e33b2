# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_kernels_py``; same signatures."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor, ceil, exp, cos, sin, fabs, INFINITY, isfinite, NAN
from libc.stdint cimport int64_t

cnp.import_array()

cdef extern from "complex.h":
    pass

ctypedef double complex cplx

cdef inline double cabs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag

cdef inline double cabs(cplx z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)

cdef inline cplx cexpi(double v) nogil:
    return cos(v) + 1j * sin(v)


cdef inline double interp(const double[:, ::1] xi, int64_t row, double dt, double tau) nogil:
    cdef Py_ssize_t k = xi.shape[1]
    cdef double x
    cdef Py_ssize_t i
    if k == 1:
        return xi[row, 0]
    x = tau / dt
    if x < 0.0:
        x = 0.0
    elif x > k - 1.0:
        x = k - 1.0
    i = <Py_ssize_t>x
    if i > k - 2:
        i = k - 2
    return xi[row, i] + (x - i) * (xi[row, i + 1] - xi[row, i])


cdef inline void field(int geom, cplx y, double v, double sign, cplx* f, cplx* df) nogil:
    cdef cplx w, q
    if geom == 0:
        w = cexpi(v)
        q = w - y
        f[0] = sign * (-y * (w + y) / q)
        df[0] = sign * (-(w * w + 2.0 * y * w - y * y) / (q * q))
    else:
        q = y - v
        f[0] = sign * (-2.0 / q)
        df[0] = sign * (2.0 / (q * q))


cdef inline double dist(int geom, cplx y, double v) nogil:
    if geom == 0:
        return cabs(y - cexpi(v))
    return cabs(y - v)


def flow_batch(int geom, xi_in, rows_in, double dt, tau0_in, double direction, double sign,
               s_end_in, z_in, bint track, double c_step, double floor_,
               checkpoints_in):
    cdef const double[:, ::1] xi = np.ascontiguousarray(xi_in, dtype=np.float64)
    cdef const int64_t[::1] rows = np.ascontiguousarray(rows_in, dtype=np.int64)
    cdef const double[::1] tau0 = np.ascontiguousarray(tau0_in, dtype=np.float64)
    cdef const double[::1] s_end = np.ascontiguousarray(s_end_in, dtype=np.float64)
    cdef const double[::1] ck = np.ascontiguousarray(checkpoints_in, dtype=np.float64)
    yo = np.array(z_in, dtype=np.complex128)
    cdef Py_ssize_t n = yo.shape[0]
    cdef Py_ssize_t nc = ck.shape[0]
    dyo = np.ones(n, dtype=np.complex128)
    sto = np.zeros(n, dtype=np.int8)
    reco = np.full((n, nc), NAN + 1j * NAN)
    dreco = np.full((n, nc), NAN + 1j * NAN)
    cdef cplx[::1] Y = yo
    cdef cplx[::1] DY = dyo
    cdef signed char[::1] ST = sto
    cdef cplx[:, ::1] REC = reco
    cdef cplx[:, ::1] DREC = dreco
    cdef Py_ssize_t L, ci
    cdef double s, tau, v0, vm, v1, hd, hk, kn, rem, cgap, h, d, tol, send
    cdef cplx y, dy, k1, k2, k3, k4, m1, m2, m3, m4, d1, d2, d3, d4
    cdef int64_t r
    tol = 1e-12 * dt
    with nogil:
        for L in range(n):
            y = Y[L]
            dy = 1.0
            s = 0.0
            ci = 0
            r = rows[L]
            send = s_end[L]
            while ci < nc and s >= ck[ci] - tol:
                REC[L, ci] = y
                DREC[L, ci] = dy
                ci += 1
            while send > 0.0 and s < send:
                tau = tau0[L] + direction * s
                v0 = interp(xi, r, dt, tau)
                d = dist(geom, y, v0)
                hd = c_step * d * d
                if direction > 0:
                    kn = floor(tau / dt + 1e-9) + 1.0
                    hk = kn * dt - tau
                else:
                    kn = ceil(tau / dt - 1e-9) - 1.0
                    if kn < 0:
                        hk = INFINITY
                    else:
                        hk = tau - kn * dt
                rem = send - s
                cgap = INFINITY
                if ci < nc:
                    cgap = ck[ci] - s
                h = hk
                if rem < h:
                    h = rem
                if cgap < h:
                    h = cgap
                if hd < floor_ and hd <= h:
                    ST[L] = 1
                    break
                if hd < h:
                    h = hd
                vm = interp(xi, r, dt, tau + direction * 0.5 * h)
                v1 = interp(xi, r, dt, tau + direction * h)
                field(geom, y, v0, sign, &k1, &m1)
                field(geom, y + 0.5 * h * k1, vm, sign, &k2, &m2)
                field(geom, y + 0.5 * h * k2, vm, sign, &k3, &m3)
                field(geom, y + h * k3, v1, sign, &k4, &m4)
                if track:
                    d1 = m1 * dy
                    d2 = m2 * (dy + 0.5 * h * d1)
                    d3 = m3 * (dy + 0.5 * h * d2)
                    d4 = m4 * (dy + h * d3)
                    dy = dy + h / 6.0 * (d1 + 2 * d2 + 2 * d3 + d4)
                y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                if h >= rem:
                    s = send
                else:
                    s = s + h
                if not (isfinite(y.real) and isfinite(y.imag)):
                    ST[L] = 2
                    break
                while ci < nc and s >= ck[ci] - tol:
                    REC[L, ci] = y
                    DREC[L, ci] = dy
                    ci += 1
            Y[L] = y
            DY[L] = dy
    return yo, dyo, sto, reco, dreco


cdef inline double drive1(const double[::1] row, double dt, double tau) nogil:
    cdef Py_ssize_t k = row.shape[0]
    cdef double x
    cdef Py_ssize_t i
    if k == 1:
        return row[0]
    x = tau / dt
    if x < 0.0:
        x = 0.0
    elif x > k - 1.0:
        x = k - 1.0
    i = <Py_ssize_t>x
    if i > k - 2:
        i = k - 2
    return row[i] + (x - i) * (row[i + 1] - row[i])


cdef inline cplx rk4(int geom, cplx y, double v0, double vm, double v1, double h) nogil:
    cdef cplx a, b, c, d, t
    field(geom, y, v0, 1.0, &a, &t)
    field(geom, y + 0.5 * h * a, vm, 1.0, &b, &t)
    field(geom, y + 0.5 * h * b, vm, 1.0, &c, &t)
    field(geom, y + h * c, v1, 1.0, &d, &t)
    return y + h / 6.0 * (a + 2 * b + 2 * c + d)


cdef inline void terms(int geom, cplx h1, cplx h2, cplx w1, cplx w2, cplx* psi, cplx* xi) nogil:
    cdef cplx den = (h1 - w1) * (h2 - w2)
    if geom == 0:
        psi[0] = (h1 * h2 - w1 * w2 - 0.5 * (h1 + h2) * (w1 + w2)) / den
        xi[0] = (h1 * h1 + h2 * h2) / (2.0 * den)
    else:
        psi[0] = 2.0 / den
        xi[0] = psi[0]


cdef inline double kernel_r(cplx h1, cplx h2, cplx w1, cplx w2, double* a1, double* a2) nogil:
    cdef cplx a = h1 * w1.conjugate()
    cdef cplx b = h2 * w2.conjugate()
    cdef double num = ((a * b - 1.0 - (a + b)) * (1.0 - a.conjugate()) * (1.0 - b.conjugate())).real
    a1[0] = cabs(a)
    a2[0] = cabs(b)
    return num / (cabs(1.0 - a) * cabs(1.0 - b) * sqrt((1.0 + a1[0]) * (1.0 + a2[0])))


def gronwall_pair(int geom, xi1_in, xi2_in, double dt, double t0, z1, z2,
                  double c_step, double floor_, double eps_prime):
    cdef const double[::1] xi1 = np.ascontiguousarray(xi1_in, dtype=np.float64)
    cdef const double[::1] xi2 = np.ascontiguousarray(xi2_in, dtype=np.float64)
    cdef cplx h1 = z1, h2 = z2, w1, w2, psi_a, xi_a, psi_b, xi_b
    cdef double s = 0.0, integ = 0.0, kacc = 0.0, inew
    cdef double rmax = -INFINITY, rnear = -INFINITY, r, a1, a2
    cdef int status = 0
    cdef double tol = 1e-12 * dt, tau, kn, hk, hd, rem, h, dd
    cdef double v1a, v2a, vm1, vm2, ve1, ve2
    with nogil:
        v1a = drive1(xi1, dt, t0)
        v2a = drive1(xi2, dt, t0)
        if geom == 0:
            w1 = cexpi(v1a)
            w2 = cexpi(v2a)
        else:
            w1 = v1a
            w2 = v2a
        terms(geom, h1, h2, w1, w2, &psi_a, &xi_a)
        if geom == 0:
            r = kernel_r(h1, h2, w1, w2, &a1, &a2)
            rmax = r
            if a1 >= 1 - eps_prime and a2 >= 1 - eps_prime:
                rnear = r
        while s < t0 - tol:
            tau = t0 - s
            kn = ceil(tau / dt - 1e-9) - 1.0
            hk = tau - kn * dt if kn >= 0 else INFINITY
            dd = cabs(h1 - w1)
            if cabs(h2 - w2) < dd:
                dd = cabs(h2 - w2)
            hd = c_step * dd * dd
            rem = t0 - s
            h = hk if hk < rem else rem
            if hd < floor_ and hd <= h:
                status = 1
                break
            if hd < h:
                h = hd
            vm1 = drive1(xi1, dt, tau - 0.5 * h)
            vm2 = drive1(xi2, dt, tau - 0.5 * h)
            ve1 = drive1(xi1, dt, tau - h)
            ve2 = drive1(xi2, dt, tau - h)
            h1 = rk4(geom, h1, v1a, vm1, ve1, h)
            h2 = rk4(geom, h2, v2a, vm2, ve2, h)
            if not (isfinite(h1.real) and isfinite(h1.imag) and isfinite(h2.real) and isfinite(h2.imag)):
                status = 2
                break
            if h >= rem:
                s = t0
            else:
                s = s + h
            v1a = ve1
            v2a = ve2
            if geom == 0:
                w1 = cexpi(v1a)
                w2 = cexpi(v2a)
            else:
                w1 = v1a
                w2 = v2a
            terms(geom, h1, h2, w1, w2, &psi_b, &xi_b)
            inew = integ + 0.5 * h * (psi_a.real + psi_b.real)
            kacc += 0.5 * h * (exp(-integ) * cabs(xi_a) + exp(-inew) * cabs(xi_b))
            integ = inew
            psi_a = psi_b
            xi_a = xi_b
            if geom == 0:
                r = kernel_r(h1, h2, w1, w2, &a1, &a2)
                if r > rmax:
                    rmax = r
                if a1 >= 1 - eps_prime and a2 >= 1 - eps_prime and r > rnear:
                    rnear = r
    return complex(h1), complex(h2), integ, kacc, rmax, rnear, status


def walk_chunk(mask_in, int64_t x0, int64_t y0, dirs_in):
    cdef const unsigned char[:, ::1] mask = np.ascontiguousarray(mask_in, dtype=np.uint8)
    cdef const unsigned char[::1] dirs = np.ascontiguousarray(dirs_in, dtype=np.uint8)
    cdef Py_ssize_t n = dirs.shape[0], i, nx = mask.shape[0], ny = mask.shape[1]
    xo = np.empty(n, dtype=np.int64)
    yo = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] X = xo
    cdef int64_t[::1] Y = yo
    cdef int64_t x = x0, y = y0
    cdef unsigned char d
    cdef bint out = False
    with nogil:
        for i in range(n):
            d = dirs[i]
            if d == 0:
                x += 1
            elif d == 1:
                x -= 1
            elif d == 2:
                y += 1
            else:
                y -= 1
            X[i] = x
            Y[i] = y
            if x < 0 or y < 0 or x >= nx or y >= ny or mask[x, y] == 0:
                out = True
                break
    if out:
        return xo[:i + 1].copy(), yo[:i + 1].copy(), True
    return xo, yo, False


def loop_erase_indices(codes_in, int64_t table_size):
    cdef const int64_t[::1] codes = np.ascontiguousarray(codes_in, dtype=np.int64)
    cdef Py_ssize_t n = codes.shape[0], i, j, m = 0
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    lasto = np.empty(table_size, dtype=np.int64)
    outo = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] last = lasto
    cdef int64_t[::1] out = outo
    with nogil:
        for i in range(n):
            last[codes[i]] = i
        i = 0
        while True:
            j = last[codes[i]]
            out[m] = j
            m += 1
            if j == n - 1:
                break
            i = j + 1
    return outo[:m].copy()


cdef inline int roots(cplx a, cplx d, double r, double* s0, double* s1) nogil:
    cdef double qa = cabs2(d), qb, qc, disc, sq
    if qa == 0.0:
        return 0
    qb = 2.0 * (a.real * d.real + a.imag * d.imag)
    qc = cabs2(a) - r * r
    disc = qb * qb - 4 * qa * qc
    if disc < 0:
        return 0
    sq = sqrt(disc)
    s0[0] = (-qb - sq) / (2 * qa)
    s1[0] = (-qb + sq) / (2 * qa)
    return 2


def count_crossings(pts_in, center, double r_in, double r_out):
    cdef cplx c = center
    cdef const cplx[::1] P = np.ascontiguousarray(pts_in, dtype=np.complex128)
    cdef Py_ssize_t n = P.shape[0], k, j, nc, p, q
    cdef double eps = 1e-12, rr[2], cuts[6], tmp, s0, s1, sa, sb, mid, e0, e1, lo, hi, qa, sc
    cdef cplx a, d
    cdef int count = 0, cls, t
    cdef bint in_run = False, t_in = False, t_out = False
    rr[0] = r_in
    rr[1] = r_out
    with nogil:
        for k in range(n - 1):
            a = P[k] - c
            d = P[k + 1] - P[k]
            nc = 2
            cuts[0] = 0.0
            cuts[1] = 1.0
            for t in range(2):
                if roots(a, d, rr[t], &sa, &sb) == 2:
                    if 0.0 < sa < 1.0:
                        cuts[nc] = sa
                        nc += 1
                    if 0.0 < sb < 1.0:
                        cuts[nc] = sb
                        nc += 1
            for p in range(1, nc):
                tmp = cuts[p]
                q = p - 1
                while q >= 0 and cuts[q] > tmp:
                    cuts[q + 1] = cuts[q]
                    q -= 1
                cuts[q + 1] = tmp
            for j in range(nc - 1):
                s0 = cuts[j]
                s1 = cuts[j + 1]
                if s1 - s0 <= 0.0 and not (n == 2 and j == 0):
                    continue
                mid = cabs(a + 0.5 * (s0 + s1) * d)
                e0 = cabs(a + s0 * d)
                e1 = cabs(a + s1 * d)
                cls = 1
                if mid < r_in * (1 - eps) and not (fabs(mid - r_in) <= eps * r_in):
                    cls = 0
                elif mid > r_out * (1 + eps):
                    cls = 2
                if cls != 1:
                    if in_run and t_in and t_out:
                        count += 1
                    in_run = False
                    t_in = False
                    t_out = False
                    continue
                qa = cabs2(d)
                lo = e0 if e0 < e1 else e1
                if qa > 0:
                    sc = -(a.real * d.real + a.imag * d.imag) / qa
                    if s0 < sc < s1:
                        tmp = cabs(a + sc * d)
                        if tmp < lo:
                            lo = tmp
                hi = e0 if e0 > e1 else e1
                if not in_run:
                    in_run = True
                    t_in = False
                    t_out = False
                if lo <= r_in * (1 + eps):
                    t_in = True
                if hi >= r_out * (1 - eps):
                    t_out = True
    if in_run and t_in and t_out:
        count += 1
    return count


# --------------------------------------------------------------------------
# tip structure modulus candidates (mirrors _kernels_py.tip_candidates)
# --------------------------------------------------------------------------

from libc.math cimport atan2, hypot, fmod, M_PI, round as c_round

DEF PEPS = 1e-9

cdef inline double cross(cplx a, cplx b) nogil:
    return a.real * b.imag - a.imag * b.real

cdef inline double dot(cplx a, cplx b) nogil:
    return a.real * b.real + a.imag * b.imag

cdef inline double phase(cplx z) nogil:
    return atan2(z.imag, z.real)

cdef inline double pmod(double a, double m) nogil:
    cdef double r = fmod(a, m)
    if r < 0:
        r += m
    return r


cdef int seg_intersect(cplx a, cplx b, cplx c, cplx d, double* mu0, double* mu1,
                       double* lam) nogil:
    cdef cplx r = b - a, s = d - c, w
    cdef double rr = cabs(r), ss = cabs(s), den, mu, la, mc, md, lo, hi, lb
    if rr == 0.0 or ss == 0.0:
        return 0
    den = cross(r, s)
    w = c - a
    if fabs(den) > 1e-12 * rr * ss:
        mu = cross(w, s) / den
        la = cross(w, r) / den
        if -PEPS <= mu <= 1 + PEPS and -PEPS <= la <= 1 + PEPS:
            mu = min(max(mu, 0.0), 1.0)
            la = min(max(la, 0.0), 1.0)
            mu0[0] = mu
            mu1[0] = mu
            lam[0] = la
            return 1
        return 0
    if fabs(cross(w, r)) > 1e-12 * rr * max(cabs(w), rr):
        return 0
    mc = dot(c - a, r) / (rr * rr)
    md = dot(d - a, r) / (rr * rr)
    lo = max(min(mc, md), 0.0)
    hi = min(max(mc, md), 1.0)
    if lo > hi + PEPS:
        return 0
    lo = min(lo, hi)
    mu0[0] = lo
    mu1[0] = hi
    if md == mc:
        lam[0] = 0.0
        return 1
    la = (lo - mc) / (md - mc)
    lb = (hi - mc) / (md - mc)
    lam[0] = max(min(la, lb), 0.0)
    return 1


cdef inline bint open_hit(int hit, double mu0, double mu1) nogil:
    return hit and mu1 > PEPS and mu0 < 1 - PEPS


cdef inline bint in_ccw_sector(cplx d, cplx start, cplx end) nogil:
    cdef double a0 = phase(start)
    cdef double span = pmod(phase(end) - a0, 2 * M_PI)
    cdef double ang = pmod(phase(d) - a0, 2 * M_PI)
    return 1e-12 < ang < span - 1e-12


cdef inline bint seg_hits_origin(cplx a, cplx b) nogil:
    cdef cplx d = b - a
    cdef double L = cabs(d)
    if L == 0:
        return cabs(a) < 1e-15
    return (fabs(cross(a, d)) <= 1e-12 * L * max(cabs(a), 1e-300)
            and dot(-a, d) >= 0 and dot(-b, -d) >= 0)


cdef struct Ctx:
    const cplx* P
    const cplx* B
    Py_ssize_t m
    Py_ssize_t nb
    double v0
    const double* cth
    const double* car
    const double* bth
    const double* bar
    double cell
    double ox
    double oy
    Py_ssize_t ncx
    Py_ssize_t ncy
    const int64_t* seg_start
    const int64_t* seg_ids
    double prune_floor


cdef inline void cell_of(Ctx* c, cplx z, Py_ssize_t* ix, Py_ssize_t* iy) nogil:
    cdef Py_ssize_t a = <Py_ssize_t>floor((z.real - c.ox) / c.cell)
    cdef Py_ssize_t b = <Py_ssize_t>floor((z.imag - c.oy) / c.cell)
    ix[0] = min(max(a, 0), c.ncx - 1)
    iy[0] = min(max(b, 0), c.ncy - 1)


cdef inline cplx curve_point(Ctx* c, double u) nogil:
    cdef Py_ssize_t k = <Py_ssize_t>floor(u)
    if k >= c.m:
        return c.P[c.m]
    return c.P[k] + (u - k) * (c.P[k + 1] - c.P[k])


cdef inline void curve_theta(Ctx* c, double u, double* th, double* ar) nogil:
    cdef Py_ssize_t k = min(<Py_ssize_t>floor(u), c.m)
    cdef cplx q = curve_point(c, u)
    cdef cplx base = c.P[k]
    th[0] = c.cth[k] + phase(q * base.conjugate())
    ar[0] = c.car[k] + 0.5 * cross(base, q)


cdef inline cplx bnd_point(Ctx* c, double v) nogil:
    cdef Py_ssize_t k = (<Py_ssize_t>floor(v)) % c.nb
    cdef double f = v - floor(v)
    return c.B[k] + f * (c.B[(k + 1) % c.nb] - c.B[k])


cdef inline void bnd_theta(Ctx* c, double v, double* th, double* ar) nogil:
    cdef Py_ssize_t k = <Py_ssize_t>floor(v)
    cdef cplx q = bnd_point(c, v)
    cdef cplx base = c.B[k % c.nb]
    th[0] = c.bth[k] + phase(q * base.conjugate())
    ar[0] = c.bar[k] + 0.5 * cross(base, q)


cdef inline void bnd_ccw(Ctx* c, double va, double vb, double* th, double* ar) nogil:
    cdef double ta, aa, tb, ab
    cdef double span = pmod(vb - va, <double>c.nb)
    if span > c.nb - 1e-9 or span < 1e-12:
        th[0] = 0.0
        ar[0] = 0.0
        return
    bnd_theta(c, va, &ta, &aa)
    bnd_theta(c, vb, &tb, &ab)
    if vb >= va:
        th[0] = tb - ta
        ar[0] = ab - aa
    else:
        th[0] = (c.bth[c.nb] - ta) + tb
        ar[0] = (c.bar[c.nb] - aa) + ab


cdef inline bint point_in_polygon(Ctx* c, cplx z) nogil:
    cdef bint inside = False
    cdef Py_ssize_t k
    cdef cplx a, b
    cdef double xc
    for k in range(c.nb):
        a = c.B[k]
        b = c.B[(k + 1) % c.nb]
        if (a.imag > z.imag) != (b.imag > z.imag):
            xc = a.real + (z.imag - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            if z.real < xc:
                inside = not inside
    return inside


cdef int evaluate(Ctx* c, int kind, cplx x, double ux, cplx y, double uy, double va,
                  double vb, double* row) nogil:
    cdef double ub_ = ux if kind != 2 else 0.0
    cdef Py_ssize_t kx = <Py_ssize_t>floor(ux)
    cdef double touch = INFINITY, mu0, mu1, lam, off, u
    cdef Py_ssize_t ax, ay, bx, by, ix, iy, q, sid, j
    cdef cplx p0, p1, fut0
    cdef int hit
    cell_of(c, x, &ax, &ay)
    cell_of(c, y, &bx, &by)
    for ix in range(min(ax, bx), max(ax, bx) + 1):
        for iy in range(min(ay, by), max(ay, by) + 1):
            for q in range(c.seg_start[ix * c.ncy + iy], c.seg_start[ix * c.ncy + iy + 1]):
                sid = c.seg_ids[q]
                if sid >= c.m:
                    j = sid - c.m
                    hit = seg_intersect(x, y, c.B[j], c.B[(j + 1) % c.nb], &mu0, &mu1, &lam)
                    if open_hit(hit, mu0, mu1):
                        return 0
                    continue
                j = sid
                p0 = c.P[j]
                p1 = c.P[j + 1]
                if kind == 2:
                    if seg_intersect(x, y, p0, p1, &mu0, &mu1, &lam):
                        u = j + lam
                        if u < touch:
                            touch = u
                    continue
                if j < kx:
                    hit = seg_intersect(x, y, p0, p1, &mu0, &mu1, &lam)
                    if open_hit(hit, mu0, mu1):
                        return 0
                    continue
                if j == kx and ux > kx:
                    hit = seg_intersect(x, y, p0, x, &mu0, &mu1, &lam)
                    if open_hit(hit, mu0, mu1):
                        return 0
                    fut0 = x
                    off = ux - kx
                else:
                    fut0 = p0
                    off = 0.0
                if not seg_intersect(x, y, fut0, p1, &mu0, &mu1, &lam):
                    continue
                if fut0 == x or (j == kx and ux == kx):
                    if mu1 - mu0 <= PEPS and mu0 <= PEPS:
                        continue
                    return 0
                u = j + off + (1.0 - off) * lam
                if u < touch:
                    touch = u
    if touch == INFINITY:
        touch = <double>c.m
    if touch <= ub_ + 1e-12:
        return 0
    cdef double tot, area, tx, axr, ty, ayr, tb, ab
    cdef long wind
    cdef cplx d_in, d_out, d_c
    cdef bint tip_in
    if seg_hits_origin(x, y):
        return 0
    if kind == 2:
        bnd_ccw(c, va, vb, &tot, &area)
        tot += phase(y * x.conjugate())
        if not point_in_polygon(c, 0.5 * (x + y)):
            return 0
        wind = <long>c_round(tot / (2 * M_PI))
        if wind != 0:
            return 0
    else:
        curve_theta(c, ux, &tx, &axr)
        if kind == 0:
            curve_theta(c, uy, &ty, &ayr)
            tot = (ty - tx) + phase(x * y.conjugate())
            area = -(axr - ayr) + 0.5 * cross(y, x)
        else:
            bnd_ccw(c, c.v0, vb, &tb, &ab)
            tot = (c.cth[0] - tx) + tb + phase(x * y.conjugate())
            area = -(axr - c.car[0]) + ab + 0.5 * cross(y, x)
        wind = <long>c_round(tot / (2 * M_PI))
        if ux == kx:
            d_in = c.P[kx - 1] - x
        else:
            d_in = c.P[kx] - x
        d_out = c.P[kx + 1] - x
        d_c = y - x
        if area > 0:
            tip_in = in_ccw_sector(d_out, d_in, d_c)
        else:
            tip_in = in_ccw_sector(d_out, d_c, d_in)
        if tip_in == (wind != 0):
            return 0
    cdef cplx tp = curve_point(c, touch)
    cdef cplx start = x if kind != 2 else c.P[0]
    cdef Py_ssize_t k0 = <Py_ssize_t>ceil(ub_ - 1e-12)
    cdef Py_ssize_t k1 = min(<Py_ssize_t>floor(touch + 1e-12), c.m)
    cdef double mnx = min(start.real, tp.real), mxx = max(start.real, tp.real)
    cdef double mny = min(start.imag, tp.imag), mxy = max(start.imag, tp.imag)
    cdef Py_ssize_t k
    for k in range(k0, k1 + 1):
        mnx = min(mnx, c.P[k].real)
        mxx = max(mxx, c.P[k].real)
        mny = min(mny, c.P[k].imag)
        mxy = max(mxy, c.P[k].imag)
    cdef double ub = hypot(mxx - mnx, mxy - mny)
    if ub <= c.prune_floor:
        return 0
    row[0] = kind
    row[1] = cabs(x - y)
    row[2] = ub_
    row[3] = touch
    row[4] = x.real
    row[5] = x.imag
    row[6] = y.real
    row[7] = y.imag
    row[8] = tp.real
    row[9] = tp.imag
    row[10] = max(mxx - mnx, mxy - mny)
    row[11] = ub
    return 1


def tip_candidates(P_in, B_in, double v0, cth_in, car_in, bth_in, bar_in, samp_u_in,
                   samp_p_in, bsamp_v_in, bsamp_p_in, double cell, double ox, double oy,
                   Py_ssize_t ncx, Py_ssize_t ncy, seg_start_in, seg_ids_in, pt_start_in,
                   pt_ids_in, bpt_start_in, bpt_ids_in, sminx_in, smaxx_in, sminy_in,
                   smaxy_in, double delta_max, double prune_floor, bint include_boundary_pairs):
    cdef const cplx[::1] P = np.ascontiguousarray(P_in, dtype=np.complex128)
    cdef const cplx[::1] B = np.ascontiguousarray(B_in, dtype=np.complex128)
    cdef const double[::1] cth = np.ascontiguousarray(cth_in, dtype=np.float64)
    cdef const double[::1] car = np.ascontiguousarray(car_in, dtype=np.float64)
    cdef const double[::1] bth = np.ascontiguousarray(bth_in, dtype=np.float64)
    cdef const double[::1] bar = np.ascontiguousarray(bar_in, dtype=np.float64)
    cdef const double[::1] su = np.ascontiguousarray(samp_u_in, dtype=np.float64)
    cdef const cplx[::1] sp = np.ascontiguousarray(samp_p_in, dtype=np.complex128)
    cdef const double[::1] bv = np.ascontiguousarray(bsamp_v_in, dtype=np.float64)
    cdef const cplx[::1] bp = np.ascontiguousarray(bsamp_p_in, dtype=np.complex128)
    cdef const int64_t[::1] seg_start = np.ascontiguousarray(seg_start_in, dtype=np.int64)
    cdef const int64_t[::1] seg_ids = np.ascontiguousarray(seg_ids_in, dtype=np.int64)
    cdef const int64_t[::1] pt_start = np.ascontiguousarray(pt_start_in, dtype=np.int64)
    cdef const int64_t[::1] pt_ids = np.ascontiguousarray(pt_ids_in, dtype=np.int64)
    cdef const int64_t[::1] bpt_start = np.ascontiguousarray(bpt_start_in, dtype=np.int64)
    cdef const int64_t[::1] bpt_ids = np.ascontiguousarray(bpt_ids_in, dtype=np.int64)
    cdef const double[::1] sminx = np.ascontiguousarray(sminx_in, dtype=np.float64)
    cdef const double[::1] smaxx = np.ascontiguousarray(smaxx_in, dtype=np.float64)
    cdef const double[::1] sminy = np.ascontiguousarray(sminy_in, dtype=np.float64)
    cdef const double[::1] smaxy = np.ascontiguousarray(smaxy_in, dtype=np.float64)
    cdef Ctx c
    c.P = &P[0]
    c.B = &B[0]
    c.m = P.shape[0] - 1
    c.nb = B.shape[0]
    c.v0 = v0
    c.cth = &cth[0]
    c.car = &car[0]
    c.bth = &bth[0]
    c.bar = &bar[0]
    c.cell = cell
    c.ox = ox
    c.oy = oy
    c.ncx = ncx
    c.ncy = ncy
    c.seg_start = &seg_start[0]
    c.seg_ids = &seg_ids[0] if seg_ids.shape[0] else NULL
    c.prune_floor = prune_floor
    cdef Py_ssize_t cap = 1024, n = 0
    buf = np.empty((cap, 12))
    cdef double[:, ::1] out = buf
    cdef double row[12]
    cdef double dmax2 = delta_max * delta_max, ux, uy, dd, w, hgt, v1, v2, a, b
    cdef Py_ssize_t i, q, jj, cx, cy, ix, iy, cc, kx, r
    cdef cplx x, y, y1, y2
    cdef Py_ssize_t nbf = c.nb
    for i in range(su.shape[0]):
        ux = su[i]
        if ux <= 0.0 or ux >= c.m:
            continue
        x = sp[i]
        kx = <Py_ssize_t>ceil(ux)
        if kx <= c.m:
            w = max(smaxx[kx], x.real) - min(sminx[kx], x.real)
            hgt = max(smaxy[kx], x.imag) - min(sminy[kx], x.imag)
            if hypot(w, hgt) <= prune_floor:
                continue
        cell_of(&c, x, &cx, &cy)
        for ix in range(max(cx - 1, 0), min(cx + 2, ncx)):
            for iy in range(max(cy - 1, 0), min(cy + 2, ncy)):
                cc = ix * ncy + iy
                for q in range(pt_start[cc], pt_start[cc + 1]):
                    jj = pt_ids[q]
                    uy = su[jj]
                    if uy >= ux - 1e-12:
                        continue
                    y = sp[jj]
                    dd = cabs2(y - x)
                    if dd > dmax2 or dd < 1e-24:
                        continue
                    if evaluate(&c, 0, x, ux, y, uy, 0.0, 0.0, row):
                        if n == cap:
                            cap *= 2
                            buf = np.resize(buf, (cap, 12))
                            out = buf
                        for r in range(12):
                            out[n, r] = row[r]
                        n += 1
                for q in range(bpt_start[cc], bpt_start[cc + 1]):
                    jj = bpt_ids[q]
                    y = bp[jj]
                    dd = cabs2(y - x)
                    if dd > dmax2 or dd < 1e-24:
                        continue
                    if evaluate(&c, 1, x, ux, y, 0.0, 0.0, bv[jj], row):
                        if n == cap:
                            cap *= 2
                            buf = np.resize(buf, (cap, 12))
                            out = buf
                        for r in range(12):
                            out[n, r] = row[r]
                        n += 1
    if include_boundary_pairs:
        for i in range(bv.shape[0]):
            y1 = bp[i]
            v1 = bv[i]
            cell_of(&c, y1, &cx, &cy)
            for ix in range(max(cx - 1, 0), min(cx + 2, ncx)):
                for iy in range(max(cy - 1, 0), min(cy + 2, ncy)):
                    cc = ix * ncy + iy
                    for q in range(bpt_start[cc], bpt_start[cc + 1]):
                        jj = bpt_ids[q]
                        if jj == i:
                            continue
                        y2 = bp[jj]
                        dd = cabs2(y2 - y1)
                        if dd > dmax2 or dd < 1e-24:
                            continue
                        v2 = bv[jj]
                        a = pmod(v0 - v1, <double>nbf)
                        b = pmod(v2 - v1, <double>nbf)
                        if not (1e-12 < a < b - 1e-12):
                            continue
                        if evaluate(&c, 2, y2, 0.0, y1, 0.0, v1, v2, row):
                            if n == cap:
                                cap *= 2
                                buf = np.resize(buf, (cap, 12))
                                out = buf
                            for r in range(12):
                                out[n, r] = row[r]
                            n += 1
    return buf[:n].copy()
