import math

import numpy as np
import pytest

from loewner_lab.core_flow import (DrivingTerm, Geometry, driving_gap, eps_prime, evaluate_batch,
                                   evaluate_map, forward_batch, forward_map, gronwall_bound,
                                   radial_kernel, radial_psi_decoupled_bound, vector_field,
                                   vector_field_dz)
from loewner_lab.errors import DomainError, PoleAtDrivingPoint, SwallowedByHull


def test_driving_term_validation():
    with pytest.raises(DomainError):
        DrivingTerm("chordal", 0.0, [0.0, 1.0])
    with pytest.raises(DomainError):
        DrivingTerm("chordal", 0.1, [0.0, np.nan])
    with pytest.raises(DomainError):
        DrivingTerm("elliptic", 0.1, [0.0])
    d = DrivingTerm("radial", 0.1, [0.0, 1.0, 2.0])
    assert d.T == pytest.approx(0.2)
    assert d.value(0.05) == pytest.approx(0.5)
    assert d.W(0.1) == pytest.approx(np.exp(1j))
    assert d.truncated(0.1).xi.tolist() == [0.0, 1.0]


def test_vector_fields():
    assert vector_field("chordal", 1j, 0.0) == pytest.approx(2j)
    assert vector_field("radial", 0.0, 1.0) == 0
    h = 1e-6
    for g, z, w in (("chordal", 0.3 + 0.7j, 0.1), ("radial", 0.2 + 0.3j, np.exp(0.4j))):
        num = (vector_field(g, z + h, w) - vector_field(g, z - h, w)) / (2 * h)
        assert vector_field_dz(g, z, w) == pytest.approx(num, rel=1e-6)
    with pytest.raises(PoleAtDrivingPoint):
        vector_field("chordal", 0.0, 0.0)


def test_chordal_slit_closed_form():
    d = DrivingTerm.constant("chordal", 1.0, 1e-2)
    z = np.array([0.5 + 0.5j, -1 + 0.2j, 2j])
    f, df = evaluate_batch(d, 1.0, z)
    exact = np.sqrt(z * z - 4)
    exact = np.where(exact.imag < 0, -exact, exact)
    assert np.max(np.abs(f - exact)) < 1e-8
    assert np.max(np.abs(df - z / exact)) < 1e-7


def test_forward_inverts_reverse():
    rng = np.random.default_rng(3)
    xi = np.concatenate([[0], np.cumsum(rng.normal(0, 0.05, 100))])
    for geom, z in (("chordal", 0.4 + 1.1j), ("radial", 0.3 - 0.2j)):
        d = DrivingTerm(geom, 0.01, xi)
        w = evaluate_map(d, 0.7, z).z
        assert forward_map(d, 0.7, w) == pytest.approx(z, abs=1e-9)


def test_radial_capacity():
    d = DrivingTerm.from_function("radial", lambda t: math.sin(3 * t), 1.0, 1e-3)
    t = np.array([0.25, 0.5, 1.0])
    _, dg = forward_batch(d, t, np.zeros(3, complex), with_derivative=True)
    assert np.allclose(np.abs(dg), np.exp(t), rtol=1e-6)


def test_domain_errors():
    d = DrivingTerm.constant("chordal", 1.0, 0.1)
    with pytest.raises(DomainError):
        evaluate_map(d, 0.5, 1.0 - 0.1j)
    with pytest.raises(DomainError):
        evaluate_map(d, 2.0, 1j)
    r = DrivingTerm.constant("radial", 1.0, 0.1)
    with pytest.raises(DomainError):
        evaluate_map(r, 0.5, 1.5)
    with pytest.raises(SwallowedByHull):
        forward_map(d, 1.0, 0.5j)


def test_driving_gap_radial_chord():
    a = DrivingTerm.constant("radial", 1.0, 0.1)
    b = DrivingTerm.constant("radial", 1.0, 0.1, value=0.3)
    assert driving_gap(a, b, 1.0) == pytest.approx(2 * math.sin(0.15))


def test_gronwall_bound_dominates():
    rng = np.random.default_rng(5)
    xi = np.concatenate([[0], np.cumsum(rng.normal(0, 0.04, 200))])
    d1 = DrivingTerm("chordal", 5e-3, xi)
    d2 = DrivingTerm("chordal", 5e-3, xi + 1e-3 * np.sin(np.arange(xi.size)))
    z = complex(d1.W(1.0)) + 0.05j
    y1 = evaluate_map(d1, 1.0, z).z
    y2 = evaluate_map(d2, 1.0, z).z
    b = gronwall_bound(d1, d2, 1.0, z, z)
    assert abs(y1 - y2) <= b.bound
    assert b.epsilon == pytest.approx(driving_gap(d1, d2, 1.0))


def test_decoupled_bound_and_kernel():
    assert eps_prime(0.1) == 0.2
    with pytest.raises(DomainError):
        eps_prime(0.001)
    assert radial_kernel(0.5, 0.5) <= 1 + 1e-12
    d1 = DrivingTerm.constant("radial", 1.0, 1e-2)
    d2 = d1.shifted(1e-3)
    z = 0.97 * complex(d1.W(1.0))
    b = radial_psi_decoupled_bound(d1, d2, 1.0, z, z, 0.1)
    assert b.bound > 0 and b.nu == 0
    with pytest.raises(DomainError):
        radial_psi_decoupled_bound(DrivingTerm.constant("chordal", 1, 0.1),
                                   DrivingTerm.constant("chordal", 1, 0.1), 1.0, 1j, 1j, 0.1)


def test_geometry_parse():
    assert Geometry.parse("RADIAL") is Geometry.RADIAL
