"""Repair of a near-feasible integer point via indicator-penalized slacks.

Violated rows are given an artificial slack s (two-sided for equalities)
linked to a fresh indicator binary y through s <= M*y, with M at 1.1x the
seed violation and floored at 1.0; the repair objective minimizes the sum
of indicators, so objective zero is exactly "the projection onto the
original variables is feasible". The repair MIP is attacked with local
branching iterations around the current repair point, each solved by the
internal branch-and-bound under a node/time budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .bnb import BnbBudget, solve_bnb, with_local_branching
from .model import (FEAS_TOL, ProblemInstance, Relation, Row, Solution,
                    VarClass, evaluate)

DEFAULT_RADIUS = 10
BIG_M_MARGIN = 1.1
BIG_M_FLOOR = 1.0


@dataclass
class RepairModel:
    model: ProblemInstance
    artificials: dict[int, tuple[int, int]]   # row index -> (s col, y col)
    big_m: dict[int, float]
    original_n: int
    seed_augmented: np.ndarray


def _clamped_seed(instance: ProblemInstance, x_hat) -> np.ndarray:
    x = np.asarray(x_hat, dtype=float)
    if x.shape != (instance.num_vars,):
        raise ValueError("seed point has the wrong length")
    imask = instance.integer_mask
    if imask.any() and np.max(np.abs(x[imask] - np.rint(x[imask]))) > FEAS_TOL:
        raise ValueError("seed point must be integral on the integer variables")
    x = np.clip(x, instance.lower_bounds, instance.upper_bounds)
    x[imask] = np.rint(x[imask])
    return x


def build_repair_model(instance: ProblemInstance, x_hat) -> RepairModel:
    """Augment only the rows the (clamped) seed violates."""
    x = _clamped_seed(instance, x_hat)
    n = instance.num_vars
    act = instance.matrix @ x if instance.num_rows else np.zeros(0)

    rows: list[Row] = []
    links: list[Row] = []
    artificials: dict[int, tuple[int, int]] = {}
    big_m: dict[int, float] = {}
    extra_lo: list[float] = []
    extra_hi: list[float] = []
    extra_cls: list[int] = []
    extra_names: list[str] = []
    seed_extra: list[float] = []
    next_col = n

    for i, row in enumerate(instance.rows):
        if row.relation == Relation.LE:
            viol = act[i] - row.rhs
        elif row.relation == Relation.GE:
            viol = row.rhs - act[i]
        else:
            viol = abs(act[i] - row.rhs)
        if viol <= FEAS_TOL:
            rows.append(row)
            continue

        m_val = max(BIG_M_FLOOR, BIG_M_MARGIN * float(viol))
        s_col, y_col = next_col, next_col + 1
        next_col += 2
        artificials[i] = (s_col, y_col)
        big_m[i] = m_val
        extra_cls += [int(VarClass.CONTINUOUS), int(VarClass.BINARY)]
        extra_names += [f"_rlb_s{i}", f"_rlb_y{i}"]
        extra_hi += [m_val, 1.0]

        if row.relation == Relation.LE:
            rows.append(Row(row.indices + (s_col,), row.coefficients + (-1.0,),
                            Relation.LE, row.rhs, row.name))
            extra_lo.append(0.0)
            seed_extra += [float(viol), 1.0]
        elif row.relation == Relation.GE:
            rows.append(Row(row.indices + (s_col,), row.coefficients + (1.0,),
                            Relation.GE, row.rhs, row.name))
            extra_lo.append(0.0)
            seed_extra += [float(viol), 1.0]
        else:
            rows.append(Row(row.indices + (s_col,), row.coefficients + (1.0,),
                            Relation.EQ, row.rhs, row.name))
            extra_lo.append(-m_val)
            seed_extra += [float(row.rhs - act[i]), 1.0]
            links.append(Row((s_col, y_col), (-1.0, -m_val), Relation.LE, 0.0,
                             f"_rlb_link_lo{i}"))
        extra_lo.append(0.0)
        links.append(Row((s_col, y_col), (1.0, -m_val), Relation.LE, 0.0,
                         f"_rlb_link{i}"))

    n_extra = next_col - n
    objective = np.zeros(next_col)
    for _, y_col in artificials.values():
        objective[y_col] = 1.0

    model = ProblemInstance(
        name=instance.name + "_repair",
        objective=objective,
        rows=rows + links,
        lower_bounds=np.concatenate([instance.lower_bounds, extra_lo]),
        upper_bounds=np.concatenate([instance.upper_bounds, extra_hi]),
        var_class=np.concatenate([instance.var_class,
                                  np.array(extra_cls, dtype=np.int8)]),
        var_names=list(instance.var_names) + extra_names,
        objective_constant=0.0,
    )
    seed = np.concatenate([x, seed_extra]) if n_extra else x.copy()
    return RepairModel(model=model, artificials=artificials, big_m=big_m,
                       original_n=n, seed_augmented=seed)


def project(repair: RepairModel, values) -> np.ndarray:
    return np.asarray(values, dtype=float)[: repair.original_n].copy()


def run_rlb(instance: ProblemInstance, seed_point, k: int = DEFAULT_RADIUS,
            deadline: float | None = None, stop=None, sub_solver=None,
            node_cap: int = 1000) -> Solution | None:
    """Iterate local branching on the repair model until indicators reach 0.

    Returns a feasible Solution of `instance`, or None. A feasible seed is
    returned unchanged (after clamping). On a stalled iteration the radius
    doubles once; a second stall gives up.
    """
    solver = sub_solver or solve_bnb
    repair = build_repair_model(instance, seed_point)
    if not repair.artificials:
        sol = evaluate(instance, project(repair, repair.seed_augmented))
        return sol if sol.is_feasible else None

    current = repair.seed_augmented
    current_obj = float(len(repair.artificials))
    radius = k
    doubled = False

    def out_of_budget():
        if stop is not None and stop():
            return True
        return deadline is not None and time.monotonic() >= deadline

    while not out_of_budget():
        sub = with_local_branching(repair.model, current, radius)
        res = solver(sub, None,
                     BnbBudget(node_cap=node_cap, deadline=deadline),
                     cutoff=current_obj - 1e-6,
                     enable_heuristics=False, stop=stop)
        improved = (res.solution is not None
                    and res.solution.objective < current_obj - 1e-6)
        if improved:
            check = evaluate(repair.model, res.solution.values)
            improved = check.is_feasible
        if improved:
            current = res.solution.values.copy()
            current_obj = res.solution.objective
            if current_obj < 0.5:
                sol = evaluate(instance, project(repair, current))
                if sol.is_feasible:
                    return sol
        else:
            if doubled:
                break
            radius *= 2
            doubled = True
    return None
