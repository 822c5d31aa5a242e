import numpy as np
import pytest

from edgeoffload.model import Cap, Device, Instance, Task
from edgeoffload.oracle import solve_exact
from edgeoffload.qcqp import build, eval_objective, lift_decision
from edgeoffload.rounding import RoundingOptions, run_algorithm1
from edgeoffload.sdp import (
    SdpConstraint,
    SdpProblem,
    dump_standard_form,
    homogenize,
    rank_one_check,
    solve,
    to_standard_form,
)

from conftest import make_instance, random_decision


def lifted(y):
    yh = np.append(y, 1.0)
    return np.outer(yh, yh)


class TestHomogenize:
    def test_trace_identities_random(self, rng):
        for _ in range(10):
            inst = make_instance(rng, int(rng.integers(1, 6)), int(rng.integers(1, 4)))
            form = build(inst)
            hp = homogenize(form)
            for _ in range(20):
                y = rng.uniform(-2.0, 2.0, form.layout.length)
                z = lifted(y)
                psi = eval_objective(form, y)
                assert np.sum(hp.b0_mat * z) == pytest.approx(psi, rel=1e-10, abs=1e-12)
                for h, mat in enumerate(hp.h):
                    assert np.sum(mat * z) == pytest.approx(
                        float(form.a3[h] @ y), rel=1e-10, abs=1e-12
                    )
                for j, mat in enumerate(hp.j):
                    assert np.sum(mat * z) == pytest.approx(
                        float(form.a4[j] @ y), rel=1e-10, abs=1e-12
                    )
                for p, mat in enumerate(hp.g):
                    assert np.sum(mat * z) == pytest.approx(
                        float(form.a5[p] @ y), rel=1e-10, abs=1e-12
                    )
                for q, mat in enumerate(hp.k_eq):
                    assert np.sum(mat * z) == pytest.approx(
                        y[q] * y[q] - y[q], rel=1e-10, abs=1e-12
                    )

    def test_binary_point_kills_binary_traces(self, rng):
        inst = make_instance(rng, 3, 2)
        form = build(inst)
        hp = homogenize(form)
        y = lift_decision(inst, random_decision(rng, inst))
        z = lifted(y)
        for mat in hp.k_eq:
            assert np.sum(mat * z) == pytest.approx(0.0, abs=1e-12)

    def test_gamma_interval_trace(self, rng):
        inst = make_instance(rng, 2, 1)
        form = build(inst)
        hp = homogenize(form)
        y = np.zeros(form.layout.length)
        y[form.layout.gamma_index] = 0.3
        assert np.sum(hp.k_ineq * lifted(y)) == pytest.approx(-0.21, rel=1e-12)

    def test_t_max_is_a_valid_epigraph_bound(self, rng):
        from edgeoffload.model import batch_latency, Decision

        for _ in range(10):
            inst = make_instance(rng, int(rng.integers(1, 6)), 2)
            hp = homogenize(build(inst))
            dec = random_decision(rng, inst)
            assert float(np.max(batch_latency(inst, dec))) <= hp.t_max + 1e-9


class TestToStandardForm:
    def test_counts_smallest_shape(self, rng):
        inst = make_instance(rng, 1, 1)
        prob = to_standard_form(homogenize(build(inst)))
        # (M+1) + M + N + Q + 1 + 1 and one slack per inequality
        assert len(prob.constraints) == 8
        assert prob.n_slacks == 4

    def test_counts_general(self, rng):
        inst = make_instance(rng, 4, 2)
        prob = to_standard_form(homogenize(build(inst)))
        n, m, q = 4, 2, 12
        assert len(prob.constraints) == (m + 1) + m + n + q + 1 + 1
        assert prob.n_slacks == 2 * m + 2

    def test_zero_latency_weight_adds_epigraph_cap(self, rng):
        inst = make_instance(rng, 2, 2, lambda_t=0.0, lambda_e=1.0)
        prob = to_standard_form(homogenize(build(inst)))
        labels = [c.label for c in prob.constraints]
        assert "t_cap" in labels

    def test_optional_rail_and_pin(self, rng):
        hp = homogenize(build(make_instance(rng, 2, 2)))
        base = to_standard_form(hp)
        railed = to_standard_form(hp, bound_t_diag=True)
        pinned = to_standard_form(hp, pin_gamma_zero=True)
        assert len(railed.constraints) == len(base.constraints) + 1
        assert railed.n_slacks == base.n_slacks + 1
        assert len(pinned.constraints) == len(base.constraints) + 1
        assert pinned.n_slacks == base.n_slacks

    def test_each_slack_used_once(self, rng):
        prob = to_standard_form(homogenize(build(make_instance(rng, 3, 2))))
        used = [c.slack for c in prob.constraints if c.slack >= 0]
        assert sorted(used) == list(range(prob.n_slacks))


class TestSolveAnalytic:
    def test_smallest_eigenvalue_problem(self):
        prob = SdpProblem(
            order=2,
            n_slacks=0,
            cost=np.diag([1.0, 2.0]),
            constraints=(SdpConstraint(np.eye(2), 1.0),),
        )
        sol = solve(prob)
        assert sol.status == "optimal"
        assert sol.iterations < 50
        assert abs(sol.objective - 1.0) <= 1e-6
        assert max(sol.res_primal, sol.res_dual, sol.res_gap) <= 1e-7
        assert np.allclose(sol.z, np.diag([1.0, 0.0]), atol=1e-5)

    def test_scalar_problem(self):
        prob = SdpProblem(
            order=1,
            n_slacks=0,
            cost=np.array([[3.0]]),
            constraints=(SdpConstraint(np.array([[2.0]]), 4.0),),
        )
        sol = solve(prob)
        assert sol.status == "optimal"
        assert abs(sol.objective - 6.0) <= 1e-6
        assert sol.z[0, 0] == pytest.approx(2.0, abs=1e-6)

    def test_triangle_cut_relaxation(self):
        # maximize sum of (1 - Z_ij)/2 over edges == minimize sum Z_ij / 2
        cost = (np.ones((3, 3)) - np.eye(3)) / 4.0
        cons = []
        for i in range(3):
            e = np.zeros((3, 3))
            e[i, i] = 1.0
            cons.append(SdpConstraint(e, 1.0))
        sol = solve(SdpProblem(order=3, n_slacks=0, cost=cost, constraints=tuple(cons)))
        assert sol.status == "optimal"
        assert abs(sol.objective - (-0.75)) <= 1e-6
        cut = sum((1.0 - sol.z[i, j]) / 2.0 for i in range(3) for j in range(i + 1, 3))
        assert cut == pytest.approx(2.25, abs=1e-5)
        off = sol.z[~np.eye(3, dtype=bool)]
        assert np.allclose(off, -0.5, atol=1e-5)

    def test_weak_duality_at_solution(self):
        prob = SdpProblem(
            order=2,
            n_slacks=0,
            cost=np.diag([1.0, 2.0]),
            constraints=(SdpConstraint(np.eye(2), 1.0),),
        )
        sol = solve(prob)
        assert sol.dual_objective <= sol.objective + 1e-6


class TestSolvePipelineProblems:
    def test_slacks_nonnegative_at_optimum(self, rng):
        inst = make_instance(rng, 3, 2)
        prob = to_standard_form(homogenize(build(inst)), bound_t_diag=True)
        sol = solve(prob)
        assert sol.status == "optimal"
        assert np.min(sol.slacks) >= -1e-8

    def test_constraint_residual_reconstruction(self, rng):
        inst = make_instance(rng, 2, 2)
        prob = to_standard_form(homogenize(build(inst)), bound_t_diag=True)
        sol = solve(prob)
        for con in prob.constraints:
            lhs = float(np.sum(con.matrix * sol.z))
            if con.slack >= 0:
                lhs += sol.slacks[con.slack]
            assert lhs == pytest.approx(con.rhs, abs=1e-5 * (1.0 + abs(con.rhs)))

    def test_relaxation_lower_bounds_binary_optimum(self, rng):
        for _ in range(5):
            inst = make_instance(rng, int(rng.integers(1, 5)), 2)
            prob = to_standard_form(homogenize(build(inst)), bound_t_diag=True)
            sol = solve(prob)
            assert sol.status == "optimal"
            result = solve_exact(inst)
            assert sol.objective <= result.psi_p3 + 1e-5 * (1.0 + abs(result.psi_p3))

    def test_psd_within_tolerance(self, rng):
        inst = make_instance(rng, 3, 2)
        sol = solve(to_standard_form(homogenize(build(inst)), bound_t_diag=True))
        assert np.linalg.eigvalsh(sol.z)[0] >= -1e-8


class TestRankOneCheck:
    def test_outer_product_is_rank_one(self, rng):
        v = rng.standard_normal(6)
        flag, lam, vec = rank_one_check(np.outer(v, v))
        assert flag
        assert lam == pytest.approx(float(v @ v), rel=1e-10)
        assert np.allclose(np.abs(vec @ v), np.linalg.norm(v), rtol=1e-10)

    def test_identity_is_not(self):
        flag, _, _ = rank_one_check(np.eye(3))
        assert not flag

    def test_zero_matrix_is_not(self):
        flag, _, _ = rank_one_check(np.zeros((3, 3)))
        assert not flag

    def test_dominated_instance_pipeline_matches_oracle(self):
        # one access point with hopeless rates: running locally dominates,
        # and the pipeline must land exactly on the oracle optimum
        device = Device(4e8, 0.8, 1.258, 1.181, 350.0, 1.5e-10)
        inst = Instance(device, (Cap(1e7, 1e4, 1e4),), (Task(4e6, 8e5, 1.32e9),), 0.5, 0.5)
        report = run_algorithm1(inst, RoundingOptions(l=50, seed=3))
        result = solve_exact(inst)
        assert report.decision.assignment.cpu_of == result.decision.assignment.cpu_of == (0,)
        assert report.psi == pytest.approx(result.psi_p1, rel=1e-12)
        assert report.psi == pytest.approx(2.97, rel=1e-9)


class TestDump:
    def test_format(self, rng):
        prob = to_standard_form(homogenize(build(make_instance(rng, 1, 1))))
        text = dump_standard_form(prob)
        lines = text.strip().split("\n")
        assert lines[0] == f"sdp order {prob.order} slacks {prob.n_slacks} constraints 8"
        assert lines[1].startswith("cost ")
        assert sum(1 for ln in lines if ln.startswith("con ")) == 8
        # triplets round-trip as floats
        first = lines[2].split()
        assert first[0] == "con" and "rhs" in first
