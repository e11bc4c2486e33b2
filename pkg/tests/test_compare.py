import numpy as np
import pytest

from loewner_lab.compare import (composite_bound_check, derivative_sup, fit_rate, perturb,
                                 perturbation_scan, sup_distance)
from loewner_lab.core_flow import DrivingTerm, driving_gap
from loewner_lab.errors import DomainError, GridMismatch, HypothesisFailed
from loewner_lab.sle_stats import SleParams, sample_sle_driving
from loewner_lab.trace import trace_curve


def test_fit_rate_exact_power():
    x = np.array([1, 2, 4, 8.0])
    f = fit_rate(x, 3 * x ** -0.7)
    assert f.slope == pytest.approx(-0.7) and f.r2 == pytest.approx(1.0)
    with pytest.raises(DomainError):
        fit_rate([1, 2], [1, 2])
    with pytest.raises(DomainError):
        fit_rate([1, 2, 3], [1, 0, 2])


def test_perturb_gap_is_exact():
    d = sample_sle_driving(SleParams(2.0, 1.0, 1e-2, seed=2), "radial")
    for mode in ("shift", "noise"):
        assert driving_gap(d, perturb(d, 1e-3, mode, seed=4), d.T) == pytest.approx(1e-3)
    with pytest.raises(DomainError):
        perturb(d, 1e-3, "warp")


def test_shift_moves_curve_rigidly():
    d = sample_sle_driving(SleParams(2.0, 0.5, 1e-3, seed=3), "chordal")
    c1 = trace_curve(d, 1e-3)
    c2 = trace_curve(perturb(d, 0.01), 1e-3)
    assert abs(sup_distance(c1, c2) - 0.01) < 1e-9
    with pytest.raises(GridMismatch):
        sup_distance(c1, trace_curve(d.truncated(0.25), 1e-3))


def test_perturbation_scan_rows():
    d = sample_sle_driving(SleParams(2.0, 0.5, 1e-3, seed=4), "chordal")
    f = perturbation_scan(d, [1e-2, 5e-3, 2e-3], rho=1.5, p=0.5)
    assert f.slope == pytest.approx(1.0, abs=0.05)
    assert len(f.rows) == 3 and len(f.rows[0]) == 6
    with pytest.raises(DomainError):
        perturbation_scan(d, [1e-2, 5e-3, 2e-3], rho=0.4, p=0.5)


def test_composite_check_zero_eps_and_failure():
    d = sample_sle_driving(SleParams(2.0, 0.5, 1e-3, seed=5), "radial")
    chk = composite_bound_check(d, d, 0.5, 0.1, 0.5, 1.5, 0.0)
    assert chk.measured == 0.0 and chk.holds
    with pytest.raises(HypothesisFailed):
        composite_bound_check(d, perturb(d, 1e-3), 0.5, 0.1, 0.5, 1.5, 1e-3, c_deriv=1e-6)
    with pytest.raises(DomainError):
        composite_bound_check(d, d, 1.5, 0.1, 0.5, 1.5, 1e-3)


def test_derivative_sup_monotone_scale():
    d = DrivingTerm.constant("chordal", 1.0, 1e-2)
    v = derivative_sup(d, [0.1, 0.01])
    # d |f'(W + i d)| = d |z|/|sqrt(z^2 - 4t)| grows towards the slit tip as sqrt(d)
    assert v[1] < v[0]
