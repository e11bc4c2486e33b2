import numpy as np
import pytest

from loewner_lab import geometry
from loewner_lab.core_flow import DrivingTerm
from loewner_lab.errors import DomainError
from loewner_lab.geometry import (AnnulusSpec, PolygonDomain, count_crossings, detect_bottleneck,
                                  disk_domain, eta_tip, eta_tip_curve, five_crossing_scan,
                                  half_box_domain, point_in_polygon)
from loewner_lab.trace import trace_curve

HOOK = np.array([1, 0.8, 0.8 + 0.2j, 0.4 + 0.2j, 0.4 - 0.2j, 0.8 - 0.2j, 0.8 - 0.02j, 0.45 - 0.05j])


def test_annulus_crossings():
    a = AnnulusSpec(0j, 0.2, 0.4)
    line = np.linspace(-1, 1, 50).astype(complex)
    assert count_crossings(line, a) == 2
    zig = np.array([0.1, 0.5, 0.1 + 0.1j, 0.5 + 0.1j, 0.15j])
    assert count_crossings(zig, a) == 4
    assert count_crossings(np.array([0.25, 0.3]), a) == 0
    with pytest.raises(DomainError):
        AnnulusSpec(0j, 0.4, 0.2)


def test_point_in_polygon_square():
    sq = np.array([0, 1, 1 + 1j, 1j])
    assert point_in_polygon(np.array([0.5 + 0.5j, 2.0]), sq).tolist() == [True, False]


def test_slit_has_small_eta():
    D = disk_domain(1024)
    slit = np.linspace(1, 0.05, 200).astype(complex)
    for d in (0.02, 0.05, 0.1):
        assert eta_tip(slit, D, [d]).eta_values[0] <= 2 * d


def test_hook_bottleneck_and_witness(tmp_path):
    D = disk_domain(1024)
    rep = eta_tip(HOOK, D, [0.1, 0.03, 0.01])
    assert rep.eta_values[1] >= 0.3
    # caller order is kept and values are monotone in delta
    assert rep.delta_list.tolist() == [0.1, 0.03, 0.01]
    assert rep.eta_values[0] >= rep.eta_values[1] >= rep.eta_values[2]
    w = rep.witnesses[1]
    assert w.cut.length <= 0.03 + 1e-12 and w.piece_diam >= 0.3
    rep.to_csv(tmp_path / "w.csv")
    assert (tmp_path / "w.csv").read_text().startswith("delta,t,eta")
    with pytest.raises(DomainError):
        eta_tip(HOOK, D, [0.0])


def test_detect_bottleneck_on_hook():
    D = disk_domain(1024)
    assert detect_bottleneck(HOOK, D, HOOK.size - 1, 0.03, 0.3) is not None
    assert detect_bottleneck(HOOK, D, 2, 0.03, 0.3) is None


def test_eta_tip_curve_chordal_half_box():
    c = trace_curve(DrivingTerm.constant("chordal", 1.0, 1e-2), 1e-3)
    v = eta_tip_curve(c, [0.05, 0.1])
    assert np.all(v <= 2 * np.array([0.05, 0.1]))
    box = half_box_domain(c.points)
    assert box.target.imag > 0


def test_five_crossings_on_zigzag():
    D = disk_domain(256)
    zz = []
    for k in range(6):
        zz += [0.5 + 0.1j * k - 0.3, 0.5 + 0.1j * k + 0.3][:: 1 if k % 2 == 0 else -1]
    res = five_crossing_scan(np.array(zz) - 0.5 - 0.25j, D, 0.05, 0.4)
    assert isinstance(res.centers, list)


def test_polygon_domain_orientation():
    cw = np.array([0, 1j, 1 + 1j, 1]) - (0.5 + 0.5j)
    P = PolygonDomain(cw)
    area = 0.5 * np.sum((P.boundary * np.conj(np.roll(P.boundary, -1))).imag)
    assert P.boundary.size == 4 and area != 0
