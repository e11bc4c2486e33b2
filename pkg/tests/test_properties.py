"""Property-based checks of the invariants stated for each module."""

import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from loewner_lab.compare import perturb
from loewner_lab.core_flow import DrivingTerm, driving_gap, evaluate_batch, forward_batch
from loewner_lab.geometry import disk_domain, eta_tip
from loewner_lab.lattice import LatticeWalk, is_self_avoiding, loop_erase, loop_erase_literal
from loewner_lab.sle_stats import beta_plus, lambda_c, q_beta, rho_beta, zeta
from loewner_lab.trace import disk_from_half_plane, half_plane_from_disk

FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

small_paths = st.lists(st.floats(-0.3, 0.3), min_size=5, max_size=30)


@FAST
@given(steps=small_paths, x=st.floats(-1, 1), y=st.floats(0.05, 2))
def test_chordal_maps_stay_in_half_plane(steps, x, y):
    d = DrivingTerm("chordal", 0.02, np.concatenate([[0], np.cumsum(steps)]))
    f, df = evaluate_batch(d, d.T, complex(x, y))
    assert complex(f).imag >= y - 1e-9  # Im f_t(z) >= Im z
    assert abs(complex(df)) > 0


@FAST
@given(steps=small_paths, r=st.floats(0, 0.95), a=st.floats(0, 2 * math.pi))
def test_radial_maps_contract(steps, r, a):
    d = DrivingTerm("radial", 0.02, np.concatenate([[0], np.cumsum(steps)]))
    z = r * np.exp(1j * a)
    f, _ = evaluate_batch(d, d.T, z, with_derivative=False)
    assert abs(complex(f)) <= abs(z) + 1e-12  # Schwarz lemma: f_t(0) = 0, |f_t'(0)| < 1


@FAST
@given(steps=small_paths, t=st.floats(0.01, 1))
def test_radial_capacity_any_driving(steps, t):
    d = DrivingTerm("radial", 0.05, np.concatenate([[0], np.cumsum(steps)]))
    t = min(t, d.T)
    _, dg = forward_batch(d, t, 0j, with_derivative=True)
    assert abs(abs(complex(dg)) - math.exp(t)) <= 1e-6 * math.exp(t)


@FAST
@given(steps=small_paths, c=st.floats(-1, 1), x=st.floats(-1, 1), y=st.floats(0.05, 1))
def test_chordal_shift_covariance(steps, c, x, y):
    d = DrivingTerm("chordal", 0.02, np.concatenate([[0], np.cumsum(steps)]))
    z = complex(x, y)
    a, _ = evaluate_batch(d.shifted(c), d.T, z + c, with_derivative=False)
    b, _ = evaluate_batch(d, d.T, z, with_derivative=False)
    assert abs(complex(a) - (complex(b) + c)) < 1e-9


@FAST
@given(steps=small_paths, eps=st.floats(1e-4, 0.1), mode=st.sampled_from(["shift", "noise"]))
def test_perturbation_gap_exact(steps, eps, mode):
    d = DrivingTerm("chordal", 0.02, np.concatenate([[0], np.cumsum(steps)]))
    assert abs(driving_gap(d, perturb(d, eps, mode, seed=1), d.T) - eps) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from([(1, 0), (-1, 0), (0, 1), (0, -1)]), min_size=0, max_size=400))
def test_loop_erasure_matches_definition(steps):
    sites = np.vstack([[0, 0], np.cumsum(np.array(steps, dtype=int).reshape(-1, 2), axis=0)])
    w = LatticeWalk(sites, 1)
    le = loop_erase(w)
    assert le == loop_erase_literal(w)
    assert is_self_avoiding(le)
    assert np.array_equal(le.sites[0], sites[0]) and np.array_equal(le.sites[-1], sites[-1])
    # erasing again changes nothing
    assert loop_erase(le) == le


@settings(max_examples=25, deadline=None)
@given(pts=st.lists(st.complex_numbers(max_magnitude=0.9), min_size=3, max_size=12),
       deltas=st.lists(st.floats(0.01, 0.5), min_size=2, max_size=4))
def test_eta_tip_monotone_in_delta(pts, deltas):
    curve = np.array([1.0 + 0j] + pts)
    if np.any(np.abs(np.diff(curve)) < 1e-6):
        return
    D = disk_domain(256)
    try:
        rep = eta_tip(curve, D, deltas)
    except Exception:
        return
    order = np.argsort(deltas)
    v = rep.eta_values[order]
    assert np.all(np.diff(v) >= -1e-12)
    assert np.all(rep.eta_values <= 2.0 + 1e-9)


@settings(max_examples=100, deadline=None)
@given(z=st.complex_numbers(max_magnitude=0.999))
def test_mobius_round_trip(z):
    if abs(z) >= 0.999:
        return
    h = half_plane_from_disk(z)
    assert h.imag > 0
    assert abs(disk_from_half_plane(h) - z) < 1e-9


@settings(max_examples=60, deadline=None)
@given(kappa=st.sampled_from([1.0, 2.0, 3.0]), u=st.floats(1e-6, 1 - 1e-9))
def test_q_positive_on_range(kappa, u):
    bp = beta_plus(kappa)
    beta = bp + 1e-6 + u * (1 - bp - 2e-6)
    assert q_beta(kappa, beta) > 0


def test_q_positive_sweep():
    for kappa in (1.0, 2.0, 3.0):
        bp = beta_plus(kappa)
        for beta in np.linspace(bp + 1e-6, 1 - 1e-9, 1000):
            assert q_beta(kappa, beta) > 0
        assert abs(rho_beta(kappa, bp) - 2) < 1e-9 or bp == 0


@settings(max_examples=60, deadline=None)
@given(kappa=st.floats(0.5, 7.5))
def test_zeta_endpoints(kappa):
    lc = lambda_c(kappa)
    assert abs(zeta(kappa, 0.0)) < 1e-12
    # at lambda_c the discriminant collapses to kappa^2 / 4
    assert abs(zeta(kappa, lc * (1 - 1e-12)) - (lc - 1 - kappa / 8)) < 1e-4
