"""The compiled kernels and the numpy fallback must agree."""

import numpy as np
import pytest

from loewner_lab import _kernels_py as py
from loewner_lab import kernels

cy = pytest.importorskip("loewner_lab._ckernels")


def drivings(rows=3, k=200, seed=0):
    rng = np.random.default_rng(seed)
    xi = np.zeros((rows, k + 1))
    xi[:, 1:] = np.cumsum(rng.normal(0, 0.05, (rows, k)), axis=1)
    return xi


@pytest.mark.parametrize("geom", [kernels.CHORDAL, kernels.RADIAL])
@pytest.mark.parametrize("direction,sign", [(-1.0, 1.0), (1.0, -1.0)])
def test_flow_batch_agrees(geom, direction, sign):
    xi = drivings()
    n = 12
    rows = np.arange(n, dtype=np.int64) % 3
    s_end = np.linspace(0.1, 1.0, n)
    tau0 = s_end.copy() if direction < 0 else np.zeros(n)
    z = (0.3 + 0.4j) * np.ones(n) if geom == kernels.RADIAL else (0.2 + 1.0j) * np.ones(n)
    ck = np.array([0.05, 0.5])
    args = (geom, xi, rows, 5e-3, tau0, direction, sign, s_end, z, True, 0.1, 1e-14, ck)
    a = py.flow_batch(*args)
    b = cy.flow_batch(*args)
    for u, v in zip(a, b):
        np.testing.assert_allclose(u, v, rtol=1e-10, atol=1e-12, equal_nan=True)


def test_gronwall_pair_agrees():
    xi = drivings(2)
    for geom, z in ((kernels.CHORDAL, 0.1 + 0.3j), (kernels.RADIAL, 0.6 + 0.1j)):
        a = py.gronwall_pair(geom, xi[0], xi[1], 5e-3, 0.8, z, z, 0.1, 1e-14, 0.2)
        b = cy.gronwall_pair(geom, xi[0], xi[1], 5e-3, 0.8, z, z, 0.1, 1e-14, 0.2)
        np.testing.assert_allclose(np.array(a[:6], dtype=complex), np.array(b[:6], dtype=complex),
                                   rtol=1e-9)
        assert a[6] == b[6]


def test_walk_chunk_agrees():
    mask = np.zeros((12, 12), dtype=np.uint8)
    mask[1:-1, 1:-1] = 1
    dirs = np.random.default_rng(1).integers(0, 4, 5000).astype(np.uint8)
    a = py.walk_chunk(mask, 5, 5, dirs)
    b = cy.walk_chunk(mask, 5, 5, dirs)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1]) and a[2] == b[2]


def test_loop_erase_indices_agree():
    rng = np.random.default_rng(2)
    codes = rng.integers(0, 40, 3000).astype(np.int64)
    codes[-1] = 99
    assert list(py.loop_erase_indices(codes, 100)) == list(cy.loop_erase_indices(codes, 100))


def test_count_crossings_agree():
    rng = np.random.default_rng(3)
    pts = np.cumsum(rng.normal(0, 0.05, 800) + 1j * rng.normal(0, 0.05, 800))
    for r in ((0.1, 0.3), (0.05, 0.5)):
        assert py.count_crossings(pts, 0j, *r) == cy.count_crossings(pts, 0j, *r)


def test_tip_candidates_agree(monkeypatch):
    from loewner_lab.geometry import disk_domain, eta_tip
    from loewner_lab.lattice import disk_polygon, grid_approximation, lerw_sample

    D = grid_approximation(disk_polygon(), 40)
    curves = [lerw_sample(D, 5, k).reversed().points for k in range(4)]
    hook = np.array([1, 0.8, 0.8 + 0.2j, 0.4 + 0.2j, 0.4 - 0.2j, 0.8 - 0.2j, 0.8 - 0.02j,
                     0.45 - 0.05j])
    results = {}
    for name, impl in (("py", py.tip_candidates), ("cy", cy.tip_candidates)):
        monkeypatch.setattr(kernels, "tip_candidates", impl)
        vals = [eta_tip(c, D.polygon_domain(), [0.1, 0.3]).eta_values for c in curves]
        vals.append(eta_tip(hook, disk_domain(512), [0.03, 0.1]).eta_values)
        results[name] = np.array(vals)
    np.testing.assert_allclose(results["py"], results["cy"], rtol=1e-12, atol=1e-14)
