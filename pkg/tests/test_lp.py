"""LP core checked against scipy.optimize.linprog (HiGHS)."""

import numpy as np
import pytest
from scipy.optimize import linprog

from poutine import (INF, LPRelaxation, LPStatus, ProblemInstance, Relation,
                     SimplexWorkspace, VarClass, make_row, solve_lp)

from helpers import random_milp


def scipy_reference(instance, bound_overrides=None):
    n = instance.num_vars
    lo = instance.lower_bounds.copy()
    hi = instance.upper_bounds.copy()
    if bound_overrides:
        for j, (a, b) in bound_overrides.items():
            lo[j], hi[j] = a, b
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for row in instance.rows:
        dense = np.zeros(n)
        dense[list(row.indices)] = row.coefficients
        if row.relation == Relation.LE:
            A_ub.append(dense)
            b_ub.append(row.rhs)
        elif row.relation == Relation.GE:
            A_ub.append(-dense)
            b_ub.append(-row.rhs)
        else:
            A_eq.append(dense)
            b_eq.append(row.rhs)
    res = linprog(instance.objective,
                  A_ub=np.array(A_ub) if A_ub else None,
                  b_ub=np.array(b_ub) if b_ub else None,
                  A_eq=np.array(A_eq) if A_eq else None,
                  b_eq=np.array(b_eq) if b_eq else None,
                  bounds=list(zip(lo, hi)), method="highs")
    return res


def random_lp(rng, allow_unbounded=False):
    inst = random_milp(rng)
    classes = np.full(inst.num_vars, VarClass.CONTINUOUS)
    lo = inst.lower_bounds.copy()
    hi = inst.upper_bounds.copy()
    if allow_unbounded:
        drop = rng.random(inst.num_vars) < 0.4
        hi[drop] = INF
    return ProblemInstance(inst.name, inst.objective, list(inst.rows),
                           lo, hi, classes,
                           objective_constant=inst.objective_constant)


def test_matches_scipy_on_bounded_instances():
    rng = np.random.default_rng(42)
    for _ in range(60):
        inst = random_lp(rng)
        ref = scipy_reference(inst)
        res = solve_lp(LPRelaxation(inst))
        assert ref.status == 0, "generator guarantees feasibility"
        assert res.status == LPStatus.OPTIMAL
        assert res.objective == pytest.approx(
            ref.fun + inst.objective_constant, abs=1e-7)
        # the point itself must satisfy everything
        acts = inst.matrix @ res.point
        for i, row in enumerate(inst.rows):
            if row.relation == Relation.LE:
                assert acts[i] <= row.rhs + 1e-7
            elif row.relation == Relation.GE:
                assert acts[i] >= row.rhs - 1e-7
            else:
                assert acts[i] == pytest.approx(row.rhs, abs=1e-7)


def test_detects_unbounded_and_infeasible():
    rng = np.random.default_rng(43)
    seen_unbounded = seen_infeasible = 0
    for _ in range(120):
        inst = random_lp(rng, allow_unbounded=True)
        if rng.random() < 0.4:
            # contradictory pair on the first variable
            extra = [make_row([0], [1.0], Relation.GE, 5.0, "c1"),
                     make_row([0], [1.0], Relation.LE, 4.0, "c2")]
            inst = ProblemInstance(inst.name, inst.objective,
                                   list(inst.rows) + extra,
                                   inst.lower_bounds, inst.upper_bounds,
                                   inst.var_class)
        ref = scipy_reference(inst)
        res = solve_lp(LPRelaxation(inst))
        if ref.status == 2:
            assert res.status == LPStatus.INFEASIBLE
            seen_infeasible += 1
        elif ref.status == 3:
            assert res.status == LPStatus.UNBOUNDED
            seen_unbounded += 1
        else:
            assert res.status == LPStatus.OPTIMAL
            assert res.objective == pytest.approx(
                ref.fun + inst.objective_constant, abs=1e-7)
    assert seen_unbounded > 3
    assert seen_infeasible > 3


def test_bound_overrides_and_warm_start():
    rng = np.random.default_rng(44)
    for _ in range(30):
        inst = random_lp(rng)
        ws = SimplexWorkspace(inst)
        root = ws.solve()
        assert root.status == LPStatus.OPTIMAL
        j = int(rng.integers(0, inst.num_vars))
        mid = float(np.floor((inst.lower_bounds[j] + inst.upper_bounds[j]) / 2))
        overrides = {j: (inst.lower_bounds[j], mid)}
        warm = ws.solve(bound_overrides=overrides, warm_basis=root.basis)
        cold = ws.solve(bound_overrides=overrides)
        ref = scipy_reference(inst, overrides)
        if ref.status == 0:
            assert warm.status == LPStatus.OPTIMAL
            assert warm.objective == pytest.approx(
                ref.fun + inst.objective_constant, abs=1e-7)
            assert cold.objective == pytest.approx(warm.objective, abs=1e-7)
        else:
            assert warm.status == LPStatus.INFEASIBLE
            assert cold.status == LPStatus.INFEASIBLE


def test_objective_override():
    rng = np.random.default_rng(45)
    inst = random_lp(rng)
    ws = SimplexWorkspace(inst)
    alt = rng.standard_normal(inst.num_vars)
    res = ws.solve(objective_override=(alt, 0.0))
    swapped = ProblemInstance(inst.name, alt, list(inst.rows),
                              inst.lower_bounds, inst.upper_bounds,
                              inst.var_class)
    ref = scipy_reference(swapped)
    assert res.status == LPStatus.OPTIMAL
    # overrides ignore the instance constant
    assert res.objective == pytest.approx(ref.fun, abs=1e-7)


def test_no_rows_separable():
    inst = ProblemInstance("sep", np.array([2.0, -3.0, 0.0]), [],
                           np.array([-1.0, -2.0, 4.0]),
                           np.array([5.0, 6.0, 4.0]),
                           np.full(3, VarClass.CONTINUOUS))
    res = solve_lp(LPRelaxation(inst))
    assert res.status == LPStatus.OPTIMAL
    assert np.allclose(res.point, [-1.0, 6.0, 4.0])
    assert res.objective == pytest.approx(-20.0)


def test_no_rows_unbounded():
    inst = ProblemInstance("sep", np.array([1.0]), [], np.array([-INF]),
                           np.array([3.0]), np.full(1, VarClass.CONTINUOUS))
    res = solve_lp(LPRelaxation(inst))
    assert res.status == LPStatus.UNBOUNDED


def test_iteration_cap_reports_limit():
    rng = np.random.default_rng(46)
    inst = random_lp(rng)
    ws = SimplexWorkspace(inst)
    res = ws.solve(iteration_cap=1)
    assert res.status in (LPStatus.ITERATION_LIMIT, LPStatus.OPTIMAL)


def test_empty_override_domain_is_infeasible():
    rng = np.random.default_rng(47)
    inst = random_lp(rng)
    ws = SimplexWorkspace(inst)
    res = ws.solve(bound_overrides={0: (2.0, 1.0)})
    assert res.status == LPStatus.INFEASIBLE


def test_equality_heavy_instance():
    # x + y = 4, x - y = 1 has the unique solution (2.5, 1.5)
    rows = [make_row([0, 1], [1.0, 1.0], Relation.EQ, 4.0, "s"),
            make_row([0, 1], [1.0, -1.0], Relation.EQ, 1.0, "d")]
    inst = ProblemInstance("eq", np.array([1.0, 1.0]), rows,
                           np.zeros(2), np.full(2, 10.0),
                           np.full(2, VarClass.CONTINUOUS))
    res = solve_lp(LPRelaxation(inst))
    assert res.status == LPStatus.OPTIMAL
    assert np.allclose(res.point, [2.5, 1.5], atol=1e-8)


def test_degenerate_does_not_cycle():
    # many redundant constraints through the same vertex
    rows = [make_row([0, 1, 2], [1.0, 1.0, 1.0], Relation.LE, 0.0, f"r{k}")
            for k in range(6)]
    rows += [make_row([0, 1], [1.0, -1.0], Relation.LE, 0.0, "t1"),
             make_row([1, 2], [1.0, -1.0], Relation.LE, 0.0, "t2")]
    inst = ProblemInstance("deg", np.array([-1.0, -1.0, -1.0]), rows,
                           np.full(3, -5.0), np.full(3, 5.0),
                           np.full(3, VarClass.CONTINUOUS))
    res = solve_lp(LPRelaxation(inst))
    ref = scipy_reference(inst)
    assert res.status == LPStatus.OPTIMAL
    assert res.objective == pytest.approx(ref.fun, abs=1e-7)
