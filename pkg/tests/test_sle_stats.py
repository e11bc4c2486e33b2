import math

import numpy as np
import pytest

from loewner_lab.core_flow import DrivingTerm, evaluate_batch, forward_batch
from loewner_lab.errors import Disconnected, DomainError, NumericError
from loewner_lab.sle_stats import (RadialChainState, SleParams, beta_plus, boundary_flow,
                                   delta_map, derivative_tail_scan, lambda_c, mu_branches,
                                   optimize_exponents, q_beta, radial_chain_state,
                                   radial_chordal_transport, reverse_sle_moment_scan, rho_beta,
                                   sample_sle_driving, sigma_stop, theta_sde, transported_chain,
                                   zeta)
from loewner_lab.trace import disk_from_half_plane, trace_curve


def test_driving_sampling():
    p = SleParams(2.0, 1.0, 0.01, seed=5)
    d = sample_sle_driving(p)
    assert d.xi[0] == 0 and d.xi.size == 101
    assert np.array_equal(sample_sle_driving(p).xi, d.xi)
    assert not np.array_equal(sample_sle_driving(p, stream=1).xi, d.xi)
    r = sample_sle_driving(p, "radial", rotate=True)
    assert np.allclose(np.diff(r.xi), np.diff(sample_sle_driving(p, "radial").xi))
    with pytest.raises(DomainError):
        sample_sle_driving(p, "chordal", rotate=True)
    with pytest.raises(DomainError):
        SleParams(-1.0, 1.0, 0.1)


def test_terminal_variance():
    p = SleParams(3.0, 1.0, 0.25, seed=9)
    ends = np.array([sample_sle_driving(p, stream=k).xi[-1] for k in range(100_000)])
    assert ends.var() == pytest.approx(3.0, rel=0.03)


def test_exponent_formulas():
    assert zeta(2.0, 0.0) == 0
    assert lambda_c(2.0) == pytest.approx(35 / 16)
    lc = lambda_c(2.0)
    assert zeta(2.0, lc - 1e-14) == pytest.approx(lc - 1 - 2.0 / 8, abs=1e-6)
    assert beta_plus(2.0) == pytest.approx(2 * (math.sqrt(10) - 1) / 9)
    for b in (0.5, 0.7, 0.9):
        assert q_beta(2.0, b) == pytest.approx(-1 + 2 * b + b * b / (4 * (1 + b)))
    assert q_beta(2.0, 1 - 1e-12) == pytest.approx(1.125)
    assert rho_beta(2.0, beta_plus(2.0)) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        zeta(2.0, 3.0)
    with pytest.raises(DomainError):
        q_beta(2.0, 0.3)


def test_optimizer():
    e = optimize_exponents()
    assert e.beta_star == pytest.approx(0.497, abs=1e-3)
    assert e.mu == pytest.approx(0.037, abs=1e-3)
    assert e.m_star == pytest.approx(0.024, abs=1e-3) and e.m_star > 1 / 41
    assert max(e.branches) - min(e.branches) < 1e-9
    assert mu_branches(e.beta_star, e.r_star)[1] == pytest.approx(q_beta(2.0, e.beta_star))


def test_moment_scan_small():
    f = reverse_sle_moment_scan(2.0, 1.0, [1, 4, 16], 400, seed=2)
    assert f.slope < 0 and len(f.rows) == 3 and all(r[1] > 0 for r in f.rows)
    z = reverse_sle_moment_scan(2.0, 0.0, [1, 2, 4], 50, seed=2)
    assert z.slope == 0 and all(r[1] == 1.0 for r in z.rows)
    with pytest.raises(DomainError):
        reverse_sle_moment_scan(2.0, 1.0, [0.5, 1, 2], 10)


@pytest.mark.slow
@pytest.mark.parametrize("kappa,lam", [(2.0, 1.5), (3.0, 1.0)])
def test_moment_scan_other_exponents(kappa, lam):
    f = reverse_sle_moment_scan(kappa, lam, [1, 2, 4, 8, 16, 32, 64], 20_000, seed=4)
    assert f.slope == pytest.approx(-zeta(kappa, lam) / 2, abs=0.05)


def test_tail_scan_monotone_and_trend():
    lo = derivative_tail_scan(2.0, 0.55, [0.25, 0.125, 0.0625], N=20, seed=1)
    hi = derivative_tail_scan(2.0, 0.95, [0.25, 0.125, 0.0625], N=20, seed=1)
    for res in (lo, hi):
        f = [r[1] for r in res.rows]
        assert all(b <= a for a, b in zip(f, f[1:]))
    assert hi.rows[-1][1] <= lo.rows[-1][1]
    assert hi.q_pred > lo.q_pred


def test_sigma_examples():
    zero = DrivingTerm.constant("radial", 1.0, 1e-3)
    assert sigma_stop(zero, 2.0) == 0.0
    assert sigma_stop(zero, 0.1) == 1.0
    path = boundary_flow(zero)
    assert np.allclose(path.alpha, math.pi)


def test_boundary_flow_matches_forward_map():
    d = sample_sle_driving(SleParams(2.0, 1.0, 1e-3, seed=7), "radial")
    path = boundary_flow(d)
    t = np.array([0.2, 0.6, 1.0])
    g, dg = forward_batch(d, t, -1 + 0j, with_derivative=True)
    for s, gg, dd in zip(t, g, dg):
        st = path.state(s)
        assert abs(st.lambda_s - gg) < 1e-8
        assert st.g_prime_mag == pytest.approx(abs(dd), rel=1e-8)
    # |g'(-1)| strictly decreasing, |lambda| = 1 exactly
    assert np.all(np.diff(path.log_gp) < 0)
    assert np.allclose(np.abs(np.exp(1j * path.alpha)), 1, atol=1e-15)


def test_theta_sde_pathwise():
    d = sample_sle_driving(SleParams(2.0, 1.0, 1e-4, seed=8), "radial")
    path = boundary_flow(d)
    th = theta_sde(2.0, 1.0, 1e-4, increments=np.diff(d.xi), theta0=math.pi - d.xi[0])
    grid = np.arange(th.size) * 1e-4
    assert np.max(np.abs(np.interp(path.s, grid, th) - path.theta)) < 1e-3


def test_sigma_concentrates_at_T():
    meds = []
    for eps in (0.3, 0.1, 0.03):
        s = [sigma_stop(sample_sle_driving(SleParams(2.0, 1.0, 1e-3, seed=1), "radial", stream=k),
                        eps) for k in range(30)]
        meds.append(np.median(s))
    assert all(b >= a for a, b in zip(meds, meds[1:])) and meds[-1] == pytest.approx(1.0)


def test_transport_identity_time_and_phi():
    assert disk_from_half_plane(0) == 1 and disk_from_half_plane(1j) == 0
    st = RadialChainState(0.0, -1 + 0j, 1.0, math.pi)
    z = np.array([0.1 + 0.2j, -0.4j, 0.5])
    assert np.allclose(disk_from_half_plane(delta_map(st, 1j, z)), z)


def test_transport_cross_check_and_errors():
    d = sample_sle_driving(SleParams(2.0, 0.3, 2.5e-4, seed=3), "radial", rotate=True)
    st = radial_chain_state(d, 0.2)
    ch = transported_chain(trace_curve(d, 1e-4), 0.2)
    z = np.array([0.1, 0.3j, -0.4 - 0.2j])
    ref, _ = evaluate_batch(d, 0.2, z, with_derivative=False)
    assert np.max(np.abs(radial_chordal_transport(st, ch, z) - ref)) < 1e-3
    assert abs(ch.mu_zipper.imag - st.g_prime_mag) < 1e-3
    bad = RadialChainState(0.2, st.lambda_s, st.g_prime_mag * 1.5, st.theta_s)
    with pytest.raises(NumericError):
        radial_chordal_transport(bad, ch, z)
    late = RadialChainState(0.2, st.lambda_s, st.g_prime_mag, st.theta_s, sigma=0.1)
    with pytest.raises(Disconnected):
        radial_chordal_transport(late, ch, z)
