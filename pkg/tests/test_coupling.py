import numpy as np
import pytest

from loewner_lab.conformal import grid_zipper
from loewner_lab.core_flow import DrivingTerm
from loewner_lab.coupling import lerw_disk_curve, lerw_driving, pinned_brownian
from loewner_lab.lattice import disk_polygon, grid_approximation, lerw_sample


def test_pinned_brownian_hits_pins():
    target = DrivingTerm("radial", 1e-3, np.sin(np.linspace(0, 3, 1001)))
    w = pinned_brownian(target, 0.04, 2.0, seed=5, stream=3)
    pins = np.arange(0, 1001, 40)
    assert np.allclose(w.xi[pins], target.xi[pins], atol=1e-12)
    assert w.xi[-1] == pytest.approx(target.xi[-1])
    assert np.max(np.abs(w.xi - target.xi)) > 0
    again = pinned_brownian(target, 0.04, 2.0, seed=5, stream=3)
    assert np.array_equal(w.xi, again.xi)


def test_refined_curve_keeps_lattice_vertices():
    dom = grid_approximation(disk_polygon(), 30)
    psi = grid_zipper(dom)
    walk = lerw_sample(dom, 0, 0)
    a = lerw_disk_curve(walk, psi, 1)
    b = lerw_disk_curve(walk, psi, 3)
    m = min(a.size, (b.size + 2) // 3)
    assert np.allclose(a[1:m], b[3:3 * m:3], atol=1e-9)
    assert np.all(np.abs(b) <= 1)


@pytest.mark.slow
def test_u_turn_walk_extracts():
    # sample 4 at n = 200 traces three sides of a lattice square, which the
    # unrefined zipper rejects as leaving the slit domain
    dom = grid_approximation(disk_polygon(), 200)
    w = lerw_driving(lerw_sample(dom, 0, 4), grid_zipper(dom), 2e-3, 1.0)
    assert w.T == pytest.approx(1.0)
    assert np.all(np.isfinite(w.xi))
