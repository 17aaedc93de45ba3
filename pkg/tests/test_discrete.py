"""Two-step iteration family: step maps, switching law, trajectory records."""

import math

import numpy as np
import pytest

from hbreset.discrete import (AlgoParams, STATUS_CONVERGED, STATUS_DIVERGED,
                              STATUS_MAX_ITER, Trajectory, Variant,
                              count_nonmonotone, initial_state,
                              nesterov_beta_schedule, run, step_gd, step_nes,
                              step_pol, switching_beta)
from hbreset.objectives import QuadraticSpec, gen_random_quadratic, quadratic_model


def scalar_model(curv=2.0):
    return quadratic_model(QuadraticSpec(Q=np.array([[curv]]), b=np.zeros(1)))


def test_params_h_is_eps_squared_exactly():
    p = AlgoParams(eps=0.3, beta_lo=0.1, beta_hi=0.5, variant=Variant.POL)
    assert p.h == 0.3 * 0.3
    q = AlgoParams.from_h(1e-4, 0.0, 0.9, Variant.NES)
    assert q.eps == math.sqrt(1e-4)
    assert q.h == pytest.approx(1e-4, rel=1e-15)


def test_params_validation():
    with pytest.raises(ValueError):
        AlgoParams(eps=0.0)
    with pytest.raises(ValueError):
        AlgoParams(eps=0.1, beta_lo=0.6, beta_hi=0.5)
    with pytest.raises(ValueError):
        AlgoParams(eps=0.1, beta_lo=0.0, beta_hi=1.5)
    # GD ignores the beta ordering check
    AlgoParams(eps=0.1, beta_lo=0.0, beta_hi=0.0, variant=Variant.GD)


def test_params_json_round_trip():
    p = AlgoParams(eps=0.05, beta_lo=0.2, beta_hi=0.8, variant=Variant.NES)
    q = AlgoParams.from_json(p.to_json())
    assert q == p


def test_initial_state_embedding():
    q0 = np.array([1.0, -2.0])
    p0 = np.array([0.5, 0.25])
    st = initial_state(q0, eps=0.1, p0=p0)
    np.testing.assert_allclose(st.q_prev, q0 - 0.1 * p0)
    np.testing.assert_allclose(st.p, p0)
    st0 = initial_state(q0, eps=0.1)
    np.testing.assert_allclose(st0.q_prev, q0)
    st.check(0.1)


def test_switching_law_boundary_resets():
    p = AlgoParams(eps=0.1, beta_lo=0.2, beta_hi=0.9, variant=Variant.POL)
    beta, reset = switching_beta(np.array([1.0]), np.array([-1.0]), p)
    assert beta == 0.9 and not reset
    beta, reset = switching_beta(np.array([1.0]), np.array([1.0]), p)
    assert beta == 0.2 and reset
    # the boundary <g, p> = 0 takes the reset branch
    beta, reset = switching_beta(np.array([1.0]), np.array([0.0]), p)
    assert beta == 0.2 and reset


def test_step_pol_matches_classic_recursion():
    model = scalar_model(3.0)
    p = AlgoParams(eps=0.2, beta_lo=0.5, beta_hi=0.5, variant=Variant.POL)
    st = initial_state(np.array([1.0]), p.eps, np.array([0.7]))
    beta = 0.5
    nxt = step_pol(st, p, model)
    expected = st.q + beta * (st.q - st.q_prev) - p.h * model.gradient(st.q)
    np.testing.assert_allclose(nxt.q, expected, rtol=1e-14)
    np.testing.assert_allclose(nxt.p, (nxt.q - st.q) / p.eps, rtol=1e-14)
    assert nxt.k == 1


def test_step_nes_gradient_at_extrapolated_point():
    model = scalar_model(3.0)
    p = AlgoParams(eps=0.2, beta_lo=0.6, beta_hi=0.6, variant=Variant.NES)
    st = initial_state(np.array([1.0]), p.eps, np.array([0.7]))
    nxt = step_nes(st, p, model)
    y = st.q + 0.6 * (st.q - st.q_prev)
    expected = st.q + 0.6 * (st.q - st.q_prev) - p.h * model.gradient(y)
    np.testing.assert_allclose(nxt.q, expected, rtol=1e-14)


def test_step_gd_is_plain_descent():
    model = scalar_model(5.0)
    p = AlgoParams(eps=0.1, variant=Variant.GD)
    st = initial_state(np.array([2.0]), p.eps)
    nxt = step_gd(st, p, model)
    np.testing.assert_allclose(nxt.q, st.q - p.h * model.gradient(st.q))


def test_reset_branch_equals_momentum_zeroing():
    # beta_lo = 0 on the reset branch reproduces a step from (q, p=0)
    model = scalar_model(2.0)
    p = AlgoParams(eps=0.1, beta_lo=0.0, beta_hi=0.8, variant=Variant.POL)
    # ascending state: grad and momentum aligned, so <g, p> > 0
    st = initial_state(np.array([1.0]), p.eps, np.array([0.5]))
    assert float(model.gradient(st.q) @ st.p) > 0
    nxt = step_pol(st, p, model)
    zeroed = initial_state(st.q, p.eps)  # same point, no momentum
    nxt0 = step_pol(zeroed, p, model)
    np.testing.assert_allclose(nxt.q, nxt0.q, rtol=1e-15)


def test_beta_schedule_recursion_invariant():
    alpha = 1.0
    beta, alpha_next = nesterov_beta_schedule(alpha)
    assert beta == 0.0  # alpha_0 = 1 makes the first extrapolation vanish
    for _ in range(50):
        beta, nxt = nesterov_beta_schedule(alpha)
        # alpha_next solves a^2 = (1 - a) alpha^2
        assert nxt * nxt == pytest.approx((1.0 - nxt) * alpha * alpha, rel=1e-12)
        assert beta == pytest.approx(alpha * (1.0 - alpha) / (alpha * alpha + nxt),
                                     rel=1e-12)
        assert 0.0 <= beta < 1.0
        alpha = nxt
    with pytest.raises(ValueError):
        nesterov_beta_schedule(0.0)


def test_run_record_counts_and_state_pairs():
    _, model = gen_random_quadratic(4, 10.0, 3)
    p = AlgoParams.from_h(1.0 / 10.0, 0.3, 0.3, Variant.POL)
    q0 = np.ones(4)
    traj = run(model, p, q0, max_iter=25)
    assert len(traj) == 26
    assert traj.iterations == 25
    assert traj.status == STATUS_MAX_ITER
    assert len(traj.phi_gaps) == len(traj) == len(traj.betas) == len(traj.resets)
    prev, cur = traj.state_pair(0)
    np.testing.assert_allclose(cur, q0)
    np.testing.assert_allclose(prev, q0)  # p0 = 0
    prev, cur = traj.state_pair(5)
    np.testing.assert_array_equal(prev, traj.qs[4])
    np.testing.assert_array_equal(cur, traj.qs[5])


def test_run_grad_tol_stops_early():
    model = scalar_model(4.0)
    p = AlgoParams.from_h(0.25, variant=Variant.GD)  # exact one-step solve
    traj = run(model, p, np.array([3.0]), max_iter=50, grad_tol=1e-12)
    assert traj.status == STATUS_CONVERGED
    assert traj.iterations <= 2


def test_run_divergence_guard():
    model = scalar_model(100.0)
    p = AlgoParams.from_h(1.0, variant=Variant.GD)  # wildly unstable
    traj = run(model, p, np.array([1.0]), max_iter=1000)
    assert traj.status == STATUS_DIVERGED
    assert traj.iterations < 1000


def test_run_nes_schedule_uses_recursion_betas():
    _, model = gen_random_quadratic(3, 8.0, 11)
    p = AlgoParams.from_h(1.0 / 8.0, variant=Variant.NES_SCHEDULE)
    traj = run(model, p, np.zeros(3) + 2.0, max_iter=10)
    alpha, expected = 1.0, []
    for _ in range(len(traj)):
        beta, alpha = nesterov_beta_schedule(alpha)
        expected.append(beta)
    np.testing.assert_allclose(traj.betas, expected, rtol=1e-12)
    assert not any(traj.resets)


def test_trajectory_csv_format_and_determinism(tmp_path):
    _, model = gen_random_quadratic(3, 12.0, 6)
    p = AlgoParams.from_h(1.0 / 12.0, 0.2, 0.7, Variant.NES)
    traj = run(model, p, np.ones(3) * 5.0, max_iter=40)
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    traj.to_csv(f1)
    run(model, p, np.ones(3) * 5.0, max_iter=40).to_csv(f2)
    assert f1.read_bytes() == f2.read_bytes()
    lines = f1.read_text().splitlines()
    assert lines[0] == "k,phi_gap,inner_sign,beta,reset,grad_norm"
    assert len(lines) == len(traj) + 1
    first = lines[1].split(",")
    assert first[0] == "0"
    assert float(first[1]) == pytest.approx(traj.phi_gaps[0], rel=1e-16)


def test_iterations_to_gap():
    _, model = gen_random_quadratic(4, 5.0, 2)
    p = AlgoParams.from_h(1.0 / 5.0, variant=Variant.GD)
    traj = run(model, p, np.ones(4), max_iter=500)
    k = traj.iterations_to_gap(1e-8)
    assert k is not None
    assert traj.phi_gaps[k] <= 1e-8
    assert all(g > 1e-8 for g in traj.phi_gaps[:k])
    assert traj.iterations_to_gap(-1.0) is None


def test_count_nonmonotone_hand_case():
    p = AlgoParams(eps=0.1, variant=Variant.GD)
    traj = Trajectory(params=p, q0_prev=np.zeros(1),
                      qs=[np.zeros(1)] * 5,
                      phi_gaps=[5.0, 3.0, 4.0, 1.0, 2.0],
                      inner_signs=[0] * 5, betas=[0.0] * 5,
                      resets=[False] * 5, grad_norms=[0.0] * 5)
    assert count_nonmonotone(traj) == 2
    traj.phi_gaps[2] = float("nan")
    with pytest.raises(ValueError):
        count_nonmonotone(traj)


def test_reset_count_drops_with_reset_branch():
    # hard-reset variant suppresses nonmonotone steps on a stiff quadratic
    _, model = gen_random_quadratic(10, 1000.0, 4)
    rng = np.random.default_rng(4)
    q0 = rng.uniform(-50.0, 50.0, 10)
    eps = math.sqrt(1e-4)
    beta = 1.0 - eps * 1.0  # underestimated damping
    classic = run(model, AlgoParams(eps=eps, beta_lo=beta, beta_hi=beta,
                                    variant=Variant.POL), q0, 3000)
    reset = run(model, AlgoParams(eps=eps, beta_lo=0.0, beta_hi=beta,
                                  variant=Variant.POL), q0, 3000)
    assert count_nonmonotone(reset) < count_nonmonotone(classic)
    assert reset.phi_gaps[-1] < classic.phi_gaps[-1]
