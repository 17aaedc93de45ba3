"""Cutting-plane feasibility engine and its dense eigensolver."""

import json

import numpy as np
import pytest

from hbreset.sdp import (AffineMatrixMap, FEASIBLE, FeasProblem, INDETERMINATE,
                         INFEASIBLE, check_nsd, eig_max, problem_from_json,
                         problem_to_json, result_to_json, solve_feasibility,
                         symmetric_eig)


# ---------------------------------------------------------------------------
# eigensolver


def test_eig_diagonal_sorted():
    vals, vecs = symmetric_eig(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(vals, [1.0, 2.0, 3.0], atol=1e-13)
    np.testing.assert_allclose(np.abs(vecs), np.eye(3)[:, [1, 2, 0]], atol=1e-13)


def test_eig_known_2x2():
    vals, _ = symmetric_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(vals, [-1.0, 1.0], atol=1e-14)


def test_eig_matches_numpy_and_reconstructs():
    rng = np.random.default_rng(0)
    for dim in (1, 2, 3, 6, 10, 16):
        a = rng.standard_normal((dim, dim))
        a = 0.5 * (a + a.T)
        vals, vecs = symmetric_eig(a)
        np.testing.assert_allclose(vals, np.linalg.eigvalsh(a), atol=1e-11)
        recon = vecs @ np.diag(vals) @ vecs.T
        assert np.linalg.norm(recon - a) <= 1e-12 * max(1.0, np.linalg.norm(a))
        # orthonormality
        np.testing.assert_allclose(vecs.T @ vecs, np.eye(dim), atol=1e-12)


def test_eig_rejects_asymmetry_and_big_dims():
    bad = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        symmetric_eig(bad)
    with pytest.raises(ValueError):
        symmetric_eig(np.eye(17))


def test_check_nsd_boundaries():
    assert check_nsd(np.zeros((2, 2)), 0.0)
    assert not check_nsd(np.eye(2), 0.0)
    rng = np.random.default_rng(1)
    pert = rng.standard_normal((3, 3)) * 1e-12
    assert check_nsd(-np.eye(3) + 0.5 * (pert + pert.T), 1e-9)
    lam, vec = eig_max(np.diag([-5.0, 2.0]))
    assert lam == pytest.approx(2.0, abs=1e-13)
    np.testing.assert_allclose(np.abs(vec), [0.0, 1.0], atol=1e-13)


# ---------------------------------------------------------------------------
# affine maps and problems


def test_affine_map_evaluation():
    amap = AffineMatrixMap(constant=np.zeros((2, 2)),
                           basis=[(0, np.eye(2)), (2, np.diag([1.0, -1.0]))])
    v = np.array([2.0, 9.0, 3.0])
    np.testing.assert_allclose(amap.value(v), np.diag([5.0, -1.0]))
    np.testing.assert_allclose(amap.negated().value(v), np.diag([-5.0, 1.0]))


def _scalar_problem():
    # one block (v1 - 1) * I, v1 in [0, 2]
    amap = AffineMatrixMap(constant=-np.eye(2), basis=[(0, np.eye(2))])
    return FeasProblem(nvar=1, nsd_blocks=[amap], bounds=[(0.0, 2.0)])


def test_scalar_block_feasible():
    res = solve_feasibility(_scalar_problem(), max_oracle_calls=50)
    assert res.status == FEASIBLE
    assert res.feasible
    # any point on the feasible side of the sector works; the engine stops
    # at the first certified one
    assert res.v[0] < 1.0
    assert res.worst_eig <= -1e-9


def test_constant_identity_infeasible():
    amap = AffineMatrixMap(constant=np.eye(2), basis=[])
    prob = FeasProblem(nvar=0, nsd_blocks=[amap])
    res = solve_feasibility(prob, max_oracle_calls=10)
    assert res.status == INFEASIBLE


def test_constant_nsd_feasible_without_variables():
    amap = AffineMatrixMap(constant=-np.eye(3), basis=[])
    res = solve_feasibility(FeasProblem(nvar=0, nsd_blocks=[amap]), 10)
    assert res.status == FEASIBLE
    assert res.worst_eig == pytest.approx(-1.0, abs=1e-12)


def test_flat_violated_block_is_infeasible_with_variables():
    # block ignores v entirely and sits at +1/2: subgradient is zero, which
    # certifies the minimum of the objective exceeds the margin
    amap = AffineMatrixMap(constant=0.5 * np.eye(1), basis=[])
    prob = FeasProblem(nvar=1, nsd_blocks=[amap], bounds=[(0.0, 1.0)])
    res = solve_feasibility(prob, max_oracle_calls=20)
    assert res.status == INFEASIBLE


def test_lyapunov_block_feasible_iff_stable():
    # discrete Lyapunov: A' P A - P < 0 with P = diag(v0, v1) seeded by
    # normalization v0 + v1 = 1
    def lyap_problem(a_mat):
        e00 = np.diag([1.0, 0.0])
        e11 = np.diag([0.0, 1.0])
        blocks = []
        amap_c = np.zeros((2, 2))
        b0 = a_mat.T @ e00 @ a_mat - e00
        b1 = a_mat.T @ e11 @ a_mat - e11
        blocks.append(AffineMatrixMap(constant=amap_c, basis=[(0, b0), (1, b1)]))
        pd = [AffineMatrixMap(constant=np.zeros((2, 2)),
                              basis=[(0, e00), (1, e11)])]
        return FeasProblem(nvar=2, nsd_blocks=blocks, pd_blocks=pd,
                           normalization=np.array([1.0, 1.0]))

    stable = np.array([[0.5, 0.2], [0.0, 0.6]])
    res = solve_feasibility(lyap_problem(stable), max_oracle_calls=100)
    assert res.status == FEASIBLE
    # independent re-verification with numpy at half margin
    p_mat = np.diag(res.v)
    m = stable.T @ p_mat @ stable - p_mat
    assert np.linalg.eigvalsh(m)[-1] <= -0.5e-9
    assert np.linalg.eigvalsh(p_mat)[0] >= 0.5e-9

    unstable = np.array([[1.2, 0.0], [0.3, 1.1]])
    res2 = solve_feasibility(lyap_problem(unstable), max_oracle_calls=200)
    assert res2.status == INFEASIBLE


def test_budget_exhaustion_is_indeterminate_not_infeasible():
    # feasible problem, but the 1-call budget runs out after the first cut
    amap = AffineMatrixMap(constant=-np.eye(2) * 1e-12, basis=[(0, np.eye(2))])
    prob = FeasProblem(nvar=1, nsd_blocks=[amap], bounds=[(-1.0, 1.0)])
    res = solve_feasibility(prob, max_oracle_calls=1)
    assert res.status == INDETERMINATE
    assert "budget" in res.message


def test_nonneg_floor_enforced():
    # v0 must stay >= 0.3 while the block wants it small
    amap = AffineMatrixMap(constant=-np.eye(1), basis=[(0, np.eye(1))])
    prob = FeasProblem(nvar=1, nsd_blocks=[amap], nonneg={0: 0.3},
                       bounds=[(-2.0, 2.0)])
    res = solve_feasibility(prob, max_oracle_calls=60)
    assert res.status == FEASIBLE
    assert res.v[0] >= 0.3 - 1e-9


def test_normalization_respected():
    # block needs v0 <= 1 - margin while v0 + v1 stays pinned at 1
    amap = AffineMatrixMap(constant=-np.eye(1), basis=[(0, np.eye(1))])
    prob = FeasProblem(nvar=2, nsd_blocks=[amap],
                       nonneg={0: 0.0, 1: 0.0},
                       normalization=np.array([1.0, 1.0]))
    res = solve_feasibility(prob, max_oracle_calls=60)
    assert res.status == FEASIBLE
    assert res.v[0] + res.v[1] == pytest.approx(1.0, abs=1e-9)
    assert res.v[0] <= 1.0


def test_determinism():
    prob = _scalar_problem()
    r1 = solve_feasibility(prob, max_oracle_calls=50)
    r2 = solve_feasibility(prob, max_oracle_calls=50)
    np.testing.assert_array_equal(r1.v, r2.v)
    assert r1.oracle_calls == r2.oracle_calls
    assert result_to_json(r1) == result_to_json(r2)


def test_midpoint_convexity_of_objective():
    prob = _scalar_problem()
    amap = prob.nsd_blocks[0]

    def f(v):
        return float(np.linalg.eigvalsh(amap.value(np.array([v])))[-1])

    rng = np.random.default_rng(5)
    for _ in range(100):
        a, b = rng.uniform(0.0, 2.0, 2)
        assert f(0.5 * (a + b)) <= max(f(a), f(b)) + 1e-12


def test_problem_validation():
    amap = AffineMatrixMap(constant=np.eye(1), basis=[])
    with pytest.raises(ValueError):
        FeasProblem(nvar=0, nsd_blocks=[])
    with pytest.raises(ValueError):
        FeasProblem(nvar=1, nsd_blocks=[amap], margin=0.0)
    with pytest.raises(ValueError):
        FeasProblem(nvar=0, nsd_blocks=[AffineMatrixMap(constant=np.eye(1),
                                                        basis=[(0, np.eye(1))])])
    with pytest.raises(ValueError):
        FeasProblem(nvar=1, nsd_blocks=[amap], normalization=np.zeros(1))
    with pytest.raises(ValueError):
        FeasProblem(nvar=2, nsd_blocks=[amap], bounds=[(0.0, 1.0)])


def test_conflicting_bounds_infeasible():
    amap = AffineMatrixMap(constant=-np.eye(1), basis=[(0, np.eye(1))])
    prob = FeasProblem(nvar=1, nsd_blocks=[amap], bounds=[(1.0, -1.0)])
    res = solve_feasibility(prob, max_oracle_calls=10)
    assert res.status == INFEASIBLE


def test_problem_json_round_trip():
    prob = _scalar_problem()
    text = problem_to_json(prob)
    again = problem_to_json(problem_from_json(text))
    assert text == again
    parsed = json.loads(text)
    assert parsed["nvar"] == 1


def test_feasible_result_verified_at_half_margin():
    # soundness invariant: every returned FEASIBLE passes check_nsd at
    # margin/2 on all sign-adjusted blocks
    rng = np.random.default_rng(7)
    a = rng.standard_normal((3, 3))
    stable = 0.4 * a / np.linalg.norm(a, 2)
    basis = []
    for i in range(3):
        e = np.zeros((3, 3))
        e[i, i] = 1.0
        basis.append((i, stable.T @ e @ stable - e))
    nsd = [AffineMatrixMap(constant=np.zeros((3, 3)), basis=basis)]
    pd = [AffineMatrixMap(constant=np.zeros((3, 3)),
                          basis=[(i, np.diag(np.eye(3)[i])) for i in range(3)])]
    prob = FeasProblem(nvar=3, nsd_blocks=nsd, pd_blocks=pd,
                       normalization=np.ones(3))
    res = solve_feasibility(prob, max_oracle_calls=150)
    assert res.status == FEASIBLE
    assert res.worst_eig <= -1e-9
    for amap in prob.compiled_blocks():
        assert check_nsd(amap.value(res.v), -0.5e-9)
