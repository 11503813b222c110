"""Exactness on mixed integer-continuous instances.

The pure-integer oracle cannot cover these, so the reference optimum is
computed by enumerating every integer assignment and solving the
continuous remainder with scipy's linprog.
"""

import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from poutine import (BnbBudget, BnbStatus, ProblemInstance, Relation,
                     VarClass, solve_bnb)

from helpers import random_milp


def mixed_oracle(inst):
    n = inst.num_vars
    int_idx = np.flatnonzero(inst.integer_mask)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for row in inst.rows:
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
    grids = [np.arange(int(inst.lower_bounds[j]), int(inst.upper_bounds[j]) + 1)
             for j in int_idx]
    best = None
    for combo in itertools.product(*grids):
        bounds = list(zip(inst.lower_bounds, inst.upper_bounds))
        for j, v in zip(int_idx, combo):
            bounds[j] = (v, v)
        res = linprog(inst.objective,
                      A_ub=np.array(A_ub) if A_ub else None,
                      b_ub=np.array(b_ub) if b_ub else None,
                      A_eq=np.array(A_eq) if A_eq else None,
                      b_eq=np.array(b_eq) if b_eq else None,
                      bounds=bounds, method="highs")
        if res.status == 0:
            val = res.fun + inst.objective_constant
            if best is None or val < best - 1e-12:
                best = val
    return best


def test_bnb_exact_on_mixed_instances():
    rng = np.random.default_rng(888)
    for _ in range(15):
        base = random_milp(rng, max_vars=7, max_rows=5)
        classes = base.var_class.copy()
        relax = rng.random(base.num_vars) < 0.4
        classes[relax] = VarClass.CONTINUOUS
        inst = ProblemInstance(base.name, base.objective, list(base.rows),
                               base.lower_bounds, base.upper_bounds, classes,
                               objective_constant=base.objective_constant)
        oracle = mixed_oracle(inst)
        res = solve_bnb(inst, None, BnbBudget())
        if oracle is None:
            assert res.status == BnbStatus.INFEASIBLE
        else:
            assert res.solution is not None
            assert res.solution.objective == pytest.approx(oracle, abs=1e-6)
