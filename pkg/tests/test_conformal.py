import numpy as np
import pytest

from loewner_lab.conformal import (ZipperMap, grid_zipper, psi_convergence_experiment,
                                   sample_points, three_point_constant, transfer_eta_tip_check,
                                   zipper_disk_map)
from loewner_lab.errors import NonSimplePolygon
from loewner_lab.lattice import disk_polygon, grid_approximation, lerw_sample

SQUARE = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j])


@pytest.fixture(scope="module")
def square_map():
    return zipper_disk_map(SQUARE, 400)


def test_near_identity_on_circle_polygon():
    psi = ZipperMap(disk_polygon(256))
    rng = np.random.default_rng(0)
    z = 0.9 * np.sqrt(rng.random(200)) * np.exp(2j * np.pi * rng.random(200))
    assert np.max(np.abs(psi(z) - z)) < 1e-4
    assert psi(0j) == 0


def test_normalization_and_inverse(square_map):
    assert square_map(0j) == 0
    assert abs(np.angle(square_map.derivative(0j))) < 1e-10
    z = np.array([0.3 + 0.2j, -0.7 + 0.5j, 0.1 - 0.9j])
    assert np.max(np.abs(square_map.inverse(square_map(z)) - z)) < 1e-9
    assert np.all(np.abs(square_map(z)) < 1)


def test_square_corner_symmetry(square_map):
    ang = np.degrees(np.angle(square_map(SQUARE * (1 - 1e-9))))
    gaps = np.diff(np.sort(np.mod(ang, 360)))
    assert np.allclose(gaps, 90, atol=0.05)


def test_file_round_trip(square_map, tmp_path):
    square_map.save(tmp_path / "m.txt")
    other = ZipperMap.load(tmp_path / "m.txt")
    z = np.array([0.2 + 0.1j, -0.5j])
    assert np.array_equal(other(z), square_map(z))


def test_rejects_non_simple_polygon():
    with pytest.raises(NonSimplePolygon):
        zipper_disk_map(np.array([1, -1 + 1j, -1, 1 + 1j]))


def test_three_point_constant():
    assert three_point_constant(disk_polygon(128)) == pytest.approx(1.0, abs=0.02)
    sliver = np.array([0, 10, 10 + 0.2j, 0.2j]) - (5 + 0.1j)
    assert three_point_constant(sliver) > 10


def test_sample_points_inside_grid_domain():
    D = grid_approximation(disk_polygon(), 32)
    z = sample_points(disk_polygon(), 32, 100, 50, seed=1, domain=D)
    assert z.size > 100 and np.all(np.abs(z) < 1)


def test_convergence_small():
    fit = psi_convergence_experiment(disk_polygon(), [8, 16, 32], samples=100, band=50)
    assert fit.slope < 0
    assert [r[0] for r in fit.rows] == [8, 16, 32]


def test_transfer_on_lerw():
    n = 40
    D = grid_approximation(disk_polygon(), n)
    psi = grid_zipper(D)
    w = lerw_sample(D, 1000, 0)
    res = transfer_eta_tip_check(w.reversed().points, D, n, 0.3, psi_n=psi)
    assert res.eta_disk >= 0 and res.d_n == pytest.approx(n ** -0.3)


def test_grid_zipper_near_staircase_corner():
    # 0.09/n from the boundary of D_16; a coarser zipper sent it across the disk
    D = grid_approximation(disk_polygon(), 16)
    z = np.array([0.75533964 - 0.56023666j])
    assert abs(grid_zipper(D)(z)[0] - z[0]) < 0.08
