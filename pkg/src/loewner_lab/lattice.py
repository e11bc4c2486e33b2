"""Grid domains, simple random walk, loop erasure and LERW Monte Carlo."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse.linalg import spsolve

from . import kernels
from .errors import DomainError, NonSimplePolygon, OriginExcluded, StepBudgetExceeded
from .rng import make_rng

MAX_STEPS = 10**9
_DIRS = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class GridDomain:
    """Union of closed faces [i, i+1] x [j, j+1] (lattice units) at spacing 1/n.

    ``boundary_polygon`` is the CCW vertex loop in physical coordinates.
    """

    n: int
    faces: frozenset
    boundary_polygon: np.ndarray

    @cached_property
    def _face_array(self) -> np.ndarray:
        return np.array(sorted(self.faces), dtype=np.int64).reshape(-1, 2)

    @cached_property
    def origin(self) -> tuple:
        f = self._face_array
        return int(f[:, 0].min()), int(f[:, 1].min())

    @cached_property
    def mask(self) -> np.ndarray:
        """Vertex mask indexed [x - ox, y - oy]: 1 for interior sites.

        A site is interior when all four faces around it belong to the domain.
        The array carries a zero border so walks never index outside it.
        """
        f = self._face_array
        ox, oy = self.origin
        w = int(f[:, 0].max()) - ox + 1
        h = int(f[:, 1].max()) - oy + 1
        face = np.zeros((w + 2, h + 2), dtype=bool)
        face[f[:, 0] - ox + 1, f[:, 1] - oy + 1] = True
        # vertex (x, y) sits at array index (x - ox + 1, y - oy + 1) of a (w+3, h+3) grid
        v = np.zeros((w + 3, h + 3), dtype=bool)
        v[1:-1, 1:-1] = face[:-1, :-1] & face[1:, :-1] & face[:-1, 1:] & face[1:, 1:]
        return v.astype(np.uint8)

    def to_index(self, x, y):
        ox, oy = self.origin
        return np.asarray(x) - ox + 1, np.asarray(y) - oy + 1

    def is_interior(self, x: int, y: int) -> bool:
        i, j = self.to_index(x, y)
        m = self.mask
        return bool(0 <= i < m.shape[0] and 0 <= j < m.shape[1] and m[i, j])

    @cached_property
    def interior_sites(self) -> np.ndarray:
        i, j = np.nonzero(self.mask)
        ox, oy = self.origin
        return np.stack([i + ox - 1, j + oy - 1], axis=1)

    @cached_property
    def boundary_sites(self) -> np.ndarray:
        b = np.round(self.boundary_polygon * self.n)
        return np.stack([b.real, b.imag], axis=1).astype(np.int64)

    @cached_property
    def digest(self) -> str:
        h = hashlib.sha256(str(self.n).encode())
        h.update(self._face_array.tobytes())
        return h.hexdigest()[:16]

    def polygon_domain(self):
        from .geometry import PolygonDomain

        return PolygonDomain(self.boundary_polygon, 0j)


@dataclass(frozen=True, eq=False)
class LatticeWalk:
    sites: np.ndarray  # (k, 2) integer lattice coordinates
    n: int

    def __len__(self) -> int:
        return int(self.sites.shape[0])

    @property
    def points(self) -> np.ndarray:
        return (self.sites[:, 0] + 1j * self.sites[:, 1]) / self.n

    def reversed(self) -> "LatticeWalk":
        return LatticeWalk(self.sites[::-1].copy(), self.n)

    def __eq__(self, other) -> bool:
        return (isinstance(other, LatticeWalk) and self.n == other.n
                and np.array_equal(self.sites, other.sites))

    __hash__ = None


# --------------------------------------------------------------------------
# grid approximation
# --------------------------------------------------------------------------

def _polygon_is_simple(P: np.ndarray) -> bool:
    a, b = P, np.roll(P, -1)
    m = P.size
    d = b - a
    for k in range(m):
        idx = np.arange(k + 2, m)
        if k == 0:
            idx = idx[idx != m - 1]
        if idx.size == 0:
            continue
        r, s = d[k], d[idx]
        w = a[idx] - a[k]
        den = (r.conjugate() * s).imag
        with np.errstate(divide="ignore", invalid="ignore"):
            mu = (w.conjugate() * s).imag / den
            la = (w.conjugate() * r).imag / den
        hit = (den != 0) & (mu >= 0) & (mu <= 1) & (la >= 0) & (la <= 1)
        if np.any(hit):
            return False
    return True


def _touched_faces(Q: np.ndarray) -> set:
    """Faces whose closed square meets the closed polygon boundary (lattice units)."""
    out = set()
    for a, b in zip(Q, np.roll(Q, -1)):
        x0, x1 = sorted((a.real, b.real))
        y0, y1 = sorted((a.imag, b.imag))
        I, J = np.meshgrid(np.arange(math.ceil(x0) - 1, math.floor(x1) + 1),
                           np.arange(math.ceil(y0) - 1, math.floor(y1) + 1), indexing="ij")
        I, J = I.ravel(), J.ravel()
        # Liang-Barsky clip of the segment against each closed unit square
        d = b - a
        lo = np.zeros(I.size)
        hi = np.ones(I.size)
        ok = np.ones(I.size, dtype=bool)
        for p, q0, q1 in ((d.real, a.real - I, I + 1 - a.real), (d.imag, a.imag - J, J + 1 - a.imag)):
            if p == 0:
                ok &= (q0 >= 0) & (q1 >= 0)
                continue
            t0 = -q0 / p
            t1 = q1 / p
            lo = np.maximum(lo, np.minimum(t0, t1))
            hi = np.minimum(hi, np.maximum(t0, t1))
        ok &= lo <= hi + 1e-12
        out.update(zip(I[ok].tolist(), J[ok].tolist()))
    return out


def _trace_boundary(face: np.ndarray, ox: int, oy: int) -> np.ndarray:
    nxt = {}
    for i, j in zip(*np.nonzero(face)):
        x, y = int(i) + ox, int(j) + oy
        if not face[i, j - 1]:
            nxt[(x, y)] = (x + 1, y)
        if not face[i + 1, j]:
            nxt[(x + 1, y)] = (x + 1, y + 1)
        if not face[i, j + 1]:
            nxt[(x + 1, y + 1)] = (x, y + 1)
        if not face[i - 1, j]:
            nxt[(x, y + 1)] = (x, y)
    start = min(nxt)
    loop = [start]
    v = nxt[start]
    while v != start:
        loop.append(v)
        v = nxt[v]
        if len(loop) > len(nxt):
            raise NonSimplePolygon("boundary tracing did not close")
    if len(loop) != len(nxt):
        raise NonSimplePolygon("face set has more than one boundary loop")
    return np.array([complex(*p) for p in loop])


def _remove_pinches(face: np.ndarray, ci: int, cj: int) -> np.ndarray:
    """Drop faces meeting the rest only at a corner until the boundary is a simple loop."""
    while True:
        a = face[:-1, :-1]
        b = face[1:, :-1]
        c = face[:-1, 1:]
        d = face[1:, 1:]
        p1 = a & d & ~b & ~c
        p2 = b & c & ~a & ~d
        if not (p1.any() or p2.any()):
            return face
        for (i, j) in zip(*np.nonzero(p1)):
            pair = ((i, j), (i + 1, j + 1))
            far = max(pair, key=lambda f: (f[0] + 0.5 - ci) ** 2 + (f[1] + 0.5 - cj) ** 2)
            face[far] = False
        for (i, j) in zip(*np.nonzero(p2)):
            pair = ((i + 1, j), (i, j + 1))
            far = max(pair, key=lambda f: (f[0] + 0.5 - ci) ** 2 + (f[1] + 0.5 - cj) ** 2)
            face[far] = False
        lab, _ = ndimage.label(face)
        face = lab == lab[ci, cj]


def grid_approximation(jordan, n: int) -> GridDomain:
    """Component of 0 after deleting every closed 1/n face that meets the boundary."""
    P = np.asarray(jordan, dtype=complex).ravel()
    if P.size >= 2 and P[0] == P[-1]:
        P = P[:-1]
    if P.size < 3 or n < 1:
        raise DomainError("need a polygon with at least three vertices and n >= 1")
    if not _polygon_is_simple(P):
        raise NonSimplePolygon("input polygon self-intersects")
    from .geometry import point_in_polygon

    if not point_in_polygon(np.array([0j]), P)[0]:
        raise OriginExcluded("0 is not inside the polygon")
    Q = P * n
    bad = _touched_faces(Q)
    ox = math.floor(Q.real.min()) - 2
    oy = math.floor(Q.imag.min()) - 2
    w = math.ceil(Q.real.max()) - ox + 3
    h = math.ceil(Q.imag.max()) - oy + 3
    I, J = np.meshgrid(np.arange(w) + ox, np.arange(h) + oy, indexing="ij")
    centers = ((I + 0.5) + 1j * (J + 0.5)) / n
    face = point_in_polygon(centers.ravel(), P).reshape(w, h)
    if bad:
        b = np.array(list(bad))
        keep = (b[:, 0] - ox >= 0) & (b[:, 0] - ox < w) & (b[:, 1] - oy >= 0) & (b[:, 1] - oy < h)
        face[b[keep, 0] - ox, b[keep, 1] - oy] = False
    ci, cj = -ox, -oy
    if not (face[ci, cj] and face[ci - 1, cj] and face[ci, cj - 1] and face[ci - 1, cj - 1]):
        raise OriginExcluded("0 lies in a removed face")
    lab, _ = ndimage.label(face)
    face = lab == lab[ci, cj]
    face = _remove_pinches(face, ci, cj)
    if not (face[ci, cj] and face[ci - 1, cj] and face[ci, cj - 1] and face[ci - 1, cj - 1]):
        raise OriginExcluded("0 lies on the boundary after pinch removal")
    loop = _trace_boundary(face, ox, oy)
    fi, fj = np.nonzero(face)
    faces = frozenset(zip((fi + ox).tolist(), (fj + oy).tolist()))
    return GridDomain(n, faces, loop / n)


def square_domain(half: int, n: int = 1) -> GridDomain:
    """Sites {-half..half}^2 / n; interior sites are those with max(|x|, |y|) < half."""
    faces = frozenset((i, j) for i in range(-half, half) for j in range(-half, half))
    face = np.zeros((2 * half + 2, 2 * half + 2), dtype=bool)
    face[1:-1, 1:-1] = True
    loop = _trace_boundary(face, -half - 1, -half - 1)
    return GridDomain(n, faces, loop / n)


def disk_polygon(m: int = 256) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(m) / m)


# --------------------------------------------------------------------------
# walks
# --------------------------------------------------------------------------

def _walk_until_zero(mask: np.ndarray, ix: int, iy: int, rng: np.random.Generator,
                     max_steps: int) -> np.ndarray:
    """Index-space walk from (ix, iy) until it lands on a zero of ``mask``."""
    xs = [np.array([ix], dtype=np.int64)]
    ys = [np.array([iy], dtype=np.int64)]
    if not mask[ix, iy]:
        return np.stack([xs[0], ys[0]], axis=1)
    total = 0
    chunk = 256
    while True:
        dirs = rng.integers(0, 4, size=chunk, dtype=np.uint8)
        cx, cy, done = kernels.walk_chunk(mask, ix, iy, dirs)
        xs.append(np.asarray(cx, dtype=np.int64))
        ys.append(np.asarray(cy, dtype=np.int64))
        total += len(cx)
        if done:
            break
        if total >= max_steps:
            raise StepBudgetExceeded(f"walk exceeded {max_steps} steps")
        ix, iy = int(cx[-1]), int(cy[-1])
        chunk = min(chunk * 2, 1 << 20)
    return np.stack([np.concatenate(xs), np.concatenate(ys)], axis=1)


def srw_path(domain: GridDomain, start=(0, 0), seed: int = 0, stream: int = 0,
             max_steps: int = MAX_STEPS) -> LatticeWalk:
    """Simple random walk from ``start`` (lattice coordinates) stopped on the boundary."""
    x0, y0 = int(start[0]), int(start[1])
    if not domain.is_interior(x0, y0):
        raise DomainError("start must be an interior site")
    ix, iy = domain.to_index(x0, y0)
    idx = _walk_until_zero(domain.mask, int(ix), int(iy), make_rng(seed, stream), max_steps)
    ox, oy = domain.origin
    idx[:, 0] += ox - 1
    idx[:, 1] += oy - 1
    return LatticeWalk(idx, domain.n)


def _codes(sites: np.ndarray):
    lo = sites.min(axis=0)
    span = sites.max(axis=0) - lo + 1
    return (sites[:, 0] - lo[0]) * span[1] + (sites[:, 1] - lo[1]), int(span[0] * span[1])


def loop_erase(walk: LatticeWalk) -> LatticeWalk:
    """Chronological loop erasure via the last-visit recursion."""
    if len(walk) == 0:
        raise DomainError("empty walk")
    codes, size = _codes(walk.sites)
    keep = kernels.loop_erase_indices(codes, size)
    return LatticeWalk(walk.sites[np.asarray(keep)], walk.n)


def loop_erase_literal(walk: LatticeWalk) -> LatticeWalk:
    """Direct transcription of s_0 = max{j : S(j) = S(0)}, s_i = max{j : S(j) = S(s_{i-1}+1)}."""
    S = [tuple(p) for p in walk.sites.tolist()]
    tau = len(S) - 1
    last = {}
    for j, site in enumerate(S):
        last[site] = j  # ends up as max{j : S(j) = site}

    s = [last[S[0]]]
    while s[-1] != tau:
        s.append(last[S[s[-1] + 1]])
    return LatticeWalk(walk.sites[s], walk.n)


def is_self_avoiding(walk: LatticeWalk) -> bool:
    codes, _ = _codes(walk.sites)
    return np.unique(codes).size == codes.size


def _check_erasure(walk: LatticeWalk, le: LatticeWalk) -> None:
    ok = (is_self_avoiding(le) and np.array_equal(le.sites[0], walk.sites[0])
          and np.array_equal(le.sites[-1], walk.sites[-1]))
    if not ok:
        raise AssertionError("loop erasure broke an invariant")


def lerw_sample(domain: GridDomain, seed: int = 0, stream: int = 0) -> LatticeWalk:
    """Loop-erased SRW from 0 to the boundary of ``domain``."""
    walk = srw_path(domain, (0, 0), seed, stream)
    le = loop_erase(walk)
    _check_erasure(walk, le)
    return le


def lerw_reversed(walk: LatticeWalk) -> LatticeWalk:
    """L{S^R}; equal in law to (L{S})^R, so it may stand in for the time-reversed LERW."""
    return loop_erase(walk.reversed())


# --------------------------------------------------------------------------
# exact exit distribution
# --------------------------------------------------------------------------

def harmonic_measure(domain: GridDomain, start=(0, 0)) -> dict:
    """Exit distribution of SRW from ``start``: solve the discrete Dirichlet problem."""
    mask = domain.mask
    inner = np.argwhere(mask == 1)
    index = -np.ones(mask.shape, dtype=np.int64)
    index[inner[:, 0], inner[:, 1]] = np.arange(len(inner))
    rows, cols, vals = [], [], []
    out_rows, out_keys = [], []
    for k, (i, j) in enumerate(inner):
        for dx, dy in _DIRS:
            a, b = i + dx, j + dy
            if index[a, b] >= 0:
                rows.append(k)
                cols.append(index[a, b])
                vals.append(0.25)
            else:
                out_rows.append(k)
                out_keys.append((int(a), int(b)))
    m = len(inner)
    A = sparse.identity(m, format="csr") - sparse.csr_matrix((vals, (rows, cols)), shape=(m, m))
    si, sj = domain.to_index(*start)
    e = np.zeros(m)
    e[index[si, sj]] = 1.0
    g = spsolve(A.T.tocsc(), e)
    ox, oy = domain.origin
    mu = {}
    for k, (a, b) in zip(out_rows, out_keys):
        key = (a + ox - 1, b + oy - 1)
        mu[key] = mu.get(key, 0.0) + 0.25 * g[k]
    return mu


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def empirical_endpoints(domain: GridDomain, N: int, seed: int, erase: bool = True) -> dict:
    counts: dict = {}
    for s in range(N):
        w = lerw_sample(domain, seed, s) if erase else srw_path(domain, (0, 0), seed, s)
        key = tuple(int(v) for v in w.sites[-1])
        counts[key] = counts.get(key, 0) + 1
    return {k: v / N for k, v in counts.items()}


# --------------------------------------------------------------------------
# Monte Carlo estimates
# --------------------------------------------------------------------------

def boundary_distance(domain: GridDomain, z0: complex) -> float:
    from .geometry import _dist_to_polygon

    return float(_dist_to_polygon(np.array([z0]), domain.boundary_polygon)[0])


def escape_probability_mc(domain: GridDomain, z0: complex, d0: float | None, eta: float,
                          N: int, seed: int = 0) -> float:
    """Per-round probability that SRW started just outside B(z0, eta/2) leaves the
    domain before entering B(z0, eta/4).

    ``d0`` is the distance from z0 to the boundary; it is computed when None
    and only reported, since the walk itself sees the true boundary.
    """
    if d0 is None:
        d0 = boundary_distance(domain, z0)
    n = domain.n
    mask = domain.mask.copy()
    ox, oy = domain.origin
    gi, gj = np.meshgrid(np.arange(mask.shape[0]), np.arange(mask.shape[1]), indexing="ij")
    z = ((gi + ox - 1) + 1j * (gj + oy - 1)) / n
    r = np.abs(z - z0)
    mask[r < eta / 4] = 0
    ring = (r >= eta / 2) & (r < eta / 2 + 1.0 / n)
    si, sj = np.nonzero(ring)
    if si.size == 0:
        raise DomainError("the ball B(z0, eta/2) is not resolved at this lattice scale")
    inside = domain.mask[si, sj] == 1
    if not inside.any():
        return 1.0
    rng = make_rng(seed, 0)
    picks = rng.integers(0, si.size, size=N)
    esc = 0
    for k in range(N):
        i, j = int(si[picks[k]]), int(sj[picks[k]])
        if not domain.mask[i, j]:
            esc += 1
            continue
        path = _walk_until_zero(mask, i, j, make_rng(seed, k + 1), MAX_STEPS)
        a, b = path[-1]
        if r[a, b] >= eta / 4:
            esc += 1
    return esc / N


@dataclass
class ModulusRow:
    n: int
    delta: float
    threshold: float
    failures: int
    samples: int
    witnesses: list = field(default_factory=list, repr=False)

    @property
    def p_fail(self) -> float:
        return self.failures / self.samples


def default_delta_rule(n: int) -> float:
    return n ** -0.4


def lerw_eta_tip(walk: LatticeWalk, domain: GridDomain, delta_list, prune_floor: float = 0.0):
    """eta_tip of the LERW read from the boundary to 0, in D_n."""
    from .geometry import eta_tip

    return eta_tip(walk.reversed().points, domain.polygon_domain(), delta_list,
                   prune_floor=prune_floor)


def structure_modulus_mc(domain_family, n_list, delta_rule=default_delta_rule, r: float = 0.05,
                         N: int = 200, seed: int = 0) -> list:
    """Empirical P{eta_tip(delta) > delta^r} over N LERW samples per n.

    ``domain_family`` is either a callable n -> GridDomain or a polygon that
    is grid-approximated at each n.
    """
    if not 0 < r < 1 / 11:
        raise DomainError("r must lie in (0, 1/11)")
    rows = []
    for n in n_list:
        dom = domain_family(n) if callable(domain_family) else grid_approximation(domain_family, n)
        delta = float(delta_rule(n))
        thr = delta ** r
        fails, wits = 0, []
        for s in range(N):
            w = lerw_sample(dom, seed, s)
            # crosscuts separating pieces smaller than thr cannot cause a failure
            rep = lerw_eta_tip(w, dom, [delta], prune_floor=thr)
            eta = float(rep.eta_values[0])
            if eta > thr:
                fails += 1
                wits.append((s, rep.witnesses[0]))
        rows.append(ModulusRow(int(n), delta, thr, fails, N, wits))
    return rows


# --------------------------------------------------------------------------
# walk files
# --------------------------------------------------------------------------

def write_walk(path, walk: LatticeWalk) -> None:
    lines = [f"# n={walk.n}"] + [f"{x},{y}" for x, y in walk.sites.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_walk(path) -> LatticeWalk:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("# n="):
        raise DomainError("walk file must start with '# n=<scale>'")
    n = int(text[0][4:])
    rows = [tuple(int(v) for v in ln.split(",")) for ln in text[1:] if ln.strip()]
    return LatticeWalk(np.array(rows, dtype=np.int64).reshape(-1, 2), n)
