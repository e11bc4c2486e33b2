import numpy as np
import pytest

from loewner_lab.errors import DomainError, NonSimplePolygon, OriginExcluded
from loewner_lab.lattice import (LatticeWalk, disk_polygon, escape_probability_mc,
                                 grid_approximation, harmonic_measure, is_self_avoiding,
                                 lerw_eta_tip, lerw_reversed, lerw_sample, loop_erase,
                                 loop_erase_literal, read_walk, square_domain, srw_path,
                                 structure_modulus_mc, total_variation, write_walk)


def chronological_erasure(sites):
    """Stack-based erasure: on revisiting a site, cut the loop just closed."""
    out, pos = [], {}
    for p in map(tuple, sites):
        if p in pos:
            k = pos[p]
            for q in out[k + 1:]:
                del pos[q]
            del out[k + 1:]
        else:
            pos[p] = len(out)
            out.append(p)
    return np.array(out)


def test_small_loop_erasure():
    w = LatticeWalk(np.array([[0, 0], [1, 0], [1, 1], [1, 0], [2, 0]]), 1)
    assert loop_erase(w).sites.tolist() == [[0, 0], [1, 0], [2, 0]]
    assert loop_erase(w) == loop_erase_literal(w)


def test_three_erasures_agree():
    rng = np.random.default_rng(0)
    for _ in range(50):
        L = int(rng.integers(1, 2000))
        steps = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])[rng.integers(0, 4, L)]
        sites = np.vstack([[0, 0], np.cumsum(steps, axis=0)])
        le = loop_erase(LatticeWalk(sites, 1))
        assert np.array_equal(le.sites, chronological_erasure(sites))
        assert is_self_avoiding(le)


def test_grid_approximation_of_disk():
    D = grid_approximation(disk_polygon(256), 16)
    gap = np.max(1 - np.abs(D.boundary_polygon))
    assert 0 <= gap <= np.sqrt(2) / 16
    assert D.is_interior(0, 0)
    with pytest.raises(OriginExcluded):
        grid_approximation(disk_polygon(64) + 3, 8)
    with pytest.raises(NonSimplePolygon):
        grid_approximation(np.array([1, -1 + 1j, -1, 1 + 1j]) * 0.9 - 0.1, 8)


def test_square_domain_counts():
    sq = square_domain(2)
    assert sq.mask.sum() == 9
    mu = harmonic_measure(sq)
    assert sum(mu.values()) == pytest.approx(1.0)
    assert len(mu) == 12
    # symmetric square: every side's middle site gets the same mass
    assert mu[(2, 0)] == pytest.approx(mu[(0, 2)]) == pytest.approx(mu[(-2, 0)])


def test_lerw_properties_and_files(tmp_path):
    D = grid_approximation(disk_polygon(), 20)
    w = lerw_sample(D, seed=1, stream=2)
    assert is_self_avoiding(w) and w.sites[0].tolist() == [0, 0]
    assert not D.is_interior(*w.sites[-1])
    assert lerw_sample(D, seed=1, stream=2) == w
    assert lerw_sample(D, seed=1, stream=3) != w
    write_walk(tmp_path / "w.txt", w)
    assert read_walk(tmp_path / "w.txt") == w
    r = lerw_reversed(srw_path(D, seed=1, stream=2))
    assert is_self_avoiding(r)


def test_endpoint_law_small_sample():
    sq = square_domain(2)
    from loewner_lab.lattice import empirical_endpoints

    assert total_variation(harmonic_measure(sq), empirical_endpoints(sq, 4000, 3)) < 0.05


def test_escape_probability_bounds():
    D = grid_approximation(disk_polygon(), 40)
    near = escape_probability_mc(D, 0.85, None, 0.2, 200, 0)
    far = escape_probability_mc(D, 0.3, None, 0.2, 200, 0)
    assert 0 <= far <= near <= 1


def test_structure_modulus_rows():
    rows = structure_modulus_mc(disk_polygon(), [20, 30], N=5, seed=1)
    assert [r.n for r in rows] == [20, 30] and all(0 <= r.p_fail <= 1 for r in rows)
    with pytest.raises(DomainError):
        structure_modulus_mc(disk_polygon(), [20], r=0.2, N=1)
    D = grid_approximation(disk_polygon(), 30)
    rep = lerw_eta_tip(lerw_sample(D, 0, 0), D, [0.3])
    assert rep.eta_values.shape == (1,)
