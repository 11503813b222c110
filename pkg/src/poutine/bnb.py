"""Breadth-first branch-and-bound with periodic local-search boosts.

Nodes live in a FIFO queue (switching to best-bound order only if the
queue ever exceeds QUEUE_CAP); branching picks the most fractional
integer variable and enqueues the floor child before the ceil child.
With an incumbent available, local branching runs once at the root and
LNS / RINS alternate every HEURISTIC_PERIOD processed nodes, each as a
recursive budgeted sub-solve with nested boosts disabled.
"""

from __future__ import annotations

import heapq
import time
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import (INF, ProblemInstance, Relation, Row, Solution, VarClass,
                    evaluate, is_integral)
from .simplex import Basis, LPStatus, SimplexWorkspace

QUEUE_CAP = 200_000
HEURISTIC_PERIOD = 50
SUB_NODE_CAP = 1000
# in-tree improvement pulses get a smaller allowance: LNS repeats its
# destroy-and-repair rounds until the budget is gone, and with most
# integers fixed each round costs only a handful of nodes, so a large cap
# turns one pulse into hundreds of rounds
PULSE_NODE_CAP = 150
SUB_TIME_SHARE = 0.1
FRACTION_TOL = 1e-6
PRUNE_TOL = 1e-9


class BnbStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass
class BnbBudget:
    node_cap: int | None = None
    deadline: float | None = None
    gap_tol: float | None = None


@dataclass
class SearchNode:
    overrides: dict[int, tuple[float, float]]
    parent_bound: float
    depth: int
    creation_index: int
    basis: Basis | None = None


@dataclass
class BnbResult:
    solution: Solution | None
    lower_bound: float
    nodes: int
    status: BnbStatus


def branch(instance: ProblemInstance, node: SearchNode, lp_point,
           lp_bound: float, basis: Basis | None, next_creation: int
           ) -> tuple[SearchNode, SearchNode]:
    """Split on the most fractional integer variable (ties: smallest index).

    Returns (floor child, ceil child) in their enqueue order.
    """
    v = np.asarray(lp_point, dtype=float)
    gaps = np.abs(v - np.rint(v))
    gaps[instance.var_class == VarClass.CONTINUOUS] = 0.0
    j = int(np.argmax(gaps))
    if gaps[j] <= FRACTION_TOL:
        raise ValueError("branch called on an integral point")
    lo, hi = node.overrides.get(
        j, (float(instance.lower_bounds[j]), float(instance.upper_bounds[j])))
    split = float(np.floor(v[j]))
    down = SearchNode({**node.overrides, j: (lo, min(hi, split))},
                      lp_bound, node.depth + 1, next_creation, basis)
    up = SearchNode({**node.overrides, j: (max(lo, split + 1.0), hi)},
                    lp_bound, node.depth + 1, next_creation + 1, basis)
    return down, up


def with_bounds_fixed(instance: ProblemInstance, indices, values
                      ) -> ProblemInstance:
    lo = instance.lower_bounds.copy()
    hi = instance.upper_bounds.copy()
    for j, v in zip(indices, values):
        lo[j] = hi[j] = float(v)
    return ProblemInstance(
        name=instance.name, objective=instance.objective.copy(),
        rows=list(instance.rows), lower_bounds=lo, upper_bounds=hi,
        var_class=instance.var_class.copy(),
        var_names=list(instance.var_names),
        objective_constant=instance.objective_constant)


def local_branching_row(incumbent_values, var_class, k: int,
                        name: str = "local_branch") -> Row:
    """Hamming-ball row: flips of the binary support limited to k."""
    values = np.asarray(incumbent_values, dtype=float)
    bin_idx = np.flatnonzero(np.asarray(var_class) == VarClass.BINARY)
    if bin_idx.size == 0:
        raise ValueError("local branching needs at least one binary")
    support = values[bin_idx] >= 0.5
    coefs = np.where(support, -1.0, 1.0)
    rhs = float(k) - float(np.count_nonzero(support))
    return Row(tuple(int(j) for j in bin_idx), tuple(coefs),
               Relation.LE, rhs, name)


def with_local_branching(instance: ProblemInstance, incumbent_values,
                         k: int) -> ProblemInstance:
    row = local_branching_row(incumbent_values, instance.var_class, k)
    return ProblemInstance(
        name=instance.name, objective=instance.objective.copy(),
        rows=list(instance.rows) + [row],
        lower_bounds=instance.lower_bounds.copy(),
        upper_bounds=instance.upper_bounds.copy(),
        var_class=instance.var_class.copy(),
        var_names=list(instance.var_names),
        objective_constant=instance.objective_constant)


def local_branching(instance: ProblemInstance, incumbent: Solution, k: int,
                    sub_budget: BnbBudget, stop=None) -> Solution | None:
    """One Hamming-ball sub-solve around the incumbent; improvement or None."""
    if not (instance.var_class == VarClass.BINARY).any():
        return None
    sub = with_local_branching(instance, incumbent.values, k)
    res = solve_bnb(sub, None, sub_budget,
                    cutoff=incumbent.objective - 1e-6,
                    enable_heuristics=False, stop=stop)
    if res.solution is None:
        return None
    sol = evaluate(instance, res.solution.values)
    if sol.is_feasible and sol.objective < incumbent.objective - 1e-6:
        return sol
    return None


def lns(instance: ProblemInstance, incumbent: Solution,
        destroy_fraction: float, rng: np.random.Generator,
        sub_budget: BnbBudget, stop=None) -> Solution | None:
    """Fix-and-reoptimize rounds until the sub budget runs out."""
    int_idx = instance.integer_indices()
    best = None
    current = incumbent
    nodes_left = sub_budget.node_cap if sub_budget.node_cap is not None else SUB_NODE_CAP
    while nodes_left > 0:
        if stop is not None and stop():
            break
        if sub_budget.deadline is not None and time.monotonic() >= sub_budget.deadline:
            break
        n_fix = int(round((1.0 - destroy_fraction) * int_idx.size))
        chosen = np.sort(rng.choice(int_idx, size=n_fix, replace=False)) \
            if n_fix else np.empty(0, dtype=int)
        sub = with_bounds_fixed(instance, chosen,
                                np.rint(current.values[chosen]))
        res = solve_bnb(sub, None,
                        BnbBudget(node_cap=min(SUB_NODE_CAP, nodes_left),
                                  deadline=sub_budget.deadline),
                        cutoff=current.objective - 1e-6,
                        enable_heuristics=False, stop=stop)
        nodes_left -= max(res.nodes, 1)
        if res.solution is not None:
            sol = evaluate(instance, res.solution.values)
            if sol.is_feasible and sol.objective < current.objective - 1e-6:
                current = sol
                best = sol
    return best


def rins(instance: ProblemInstance, incumbent: Solution, node_lp_point,
         sub_budget: BnbBudget, stop=None) -> Solution | None:
    """Fix the variables where incumbent and node relaxation agree."""
    lp = np.asarray(node_lp_point, dtype=float)
    int_idx = instance.integer_indices()
    agree = int_idx[np.abs(incumbent.values[int_idx] - lp[int_idx]) <= 1e-6]
    sub = with_bounds_fixed(instance, agree, np.rint(incumbent.values[agree]))
    cut = incumbent.objective - max(1e-6, 1e-4 * abs(incumbent.objective))
    res = solve_bnb(sub, None, sub_budget, cutoff=cut,
                    enable_heuristics=False, stop=stop)
    if res.solution is None:
        return None
    sol = evaluate(instance, res.solution.values)
    if sol.is_feasible and sol.objective < incumbent.objective - 1e-6:
        return sol
    return None


def solve_bnb(instance: ProblemInstance, warm_incumbent: Solution | None = None,
              budget: BnbBudget | None = None, incumbent_sink=None, *,
              cutoff: float | None = None, enable_heuristics: bool = True,
              lb_radius: int = 10, destroy_fraction: float = 0.3,
              rng: np.random.Generator | None = None, stop=None,
              on_node=None) -> BnbResult:
    """Exact search within the budget; strict improvements reach the sink.

    `cutoff` restricts the search to solutions strictly below the given
    objective (used by the sub-solve heuristics). `on_node` observes
    (current lower bound, incumbent objective) after each processed node.
    """
    budget = budget or BnbBudget()
    rng = rng or np.random.default_rng(0)
    ws = SimplexWorkspace(instance)

    incumbent = warm_incumbent
    inc_obj = incumbent.objective if incumbent is not None else INF
    hard_cut = cutoff if cutoff is not None else INF

    def current_cut():
        return min(inc_obj, hard_cut)

    def accept(sol: Solution) -> bool:
        nonlocal incumbent, inc_obj
        if not sol.is_feasible:
            return False
        if sol.objective >= current_cut() - PRUNE_TOL:
            return False
        incumbent = sol
        inc_obj = sol.objective
        if incumbent_sink is not None:
            incumbent_sink(sol)
        return True

    def out_of_time():
        if stop is not None and stop():
            return True
        return budget.deadline is not None and time.monotonic() >= budget.deadline

    def sub_budget():
        if budget.deadline is None:
            dl = None
        else:
            dl = time.monotonic() + SUB_TIME_SHARE * max(
                0.0, budget.deadline - time.monotonic())
        return BnbBudget(node_cap=PULSE_NODE_CAP, deadline=dl)

    if enable_heuristics and incumbent is not None:
        improved = local_branching(instance, incumbent, lb_radius,
                                   sub_budget(), stop)
        if improved is not None:
            accept(improved)

    queue = deque([SearchNode({}, -INF, 0, 0)])
    as_heap = False
    next_creation = 1
    nodes = 0
    dropped_bound = INF
    use_lns = True
    last_lp_point = None

    def open_bound():
        bounds = [nd.parent_bound for _, _, nd in queue] if as_heap \
            else [nd.parent_bound for nd in queue]
        return min(bounds, default=INF)

    def stopped_result():
        bound = min(open_bound(), dropped_bound, inc_obj)
        return BnbResult(incumbent, bound, nodes, BnbStatus.BUDGET_EXHAUSTED)

    while queue:
        if out_of_time():
            return stopped_result()
        if budget.node_cap is not None and nodes >= budget.node_cap:
            return stopped_result()
        if budget.gap_tol is not None and incumbent is not None \
                and inc_obj - min(open_bound(), dropped_bound) <= budget.gap_tol:
            return BnbResult(incumbent, min(open_bound(), dropped_bound),
                             nodes, BnbStatus.OPTIMAL)

        if as_heap:
            _, _, node = heapq.heappop(queue)
        else:
            node = queue.popleft()
        nodes += 1

        if node.parent_bound >= current_cut() - PRUNE_TOL:
            continue

        res = ws.solve(bound_overrides=node.overrides, warm_basis=node.basis)
        if res.status == LPStatus.INFEASIBLE:
            pass
        elif res.status == LPStatus.UNBOUNDED:
            if node.depth == 0:
                return BnbResult(incumbent, -INF, nodes, BnbStatus.UNBOUNDED)
            dropped_bound = min(dropped_bound, node.parent_bound)
        elif res.status == LPStatus.ITERATION_LIMIT:
            dropped_bound = min(dropped_bound, node.parent_bound)
        elif res.objective >= current_cut() - PRUNE_TOL:
            pass
        elif is_integral(res.point, instance.var_class):
            accept(evaluate(instance, res.point))
        else:
            last_lp_point = res.point.copy()
            down, up = branch(instance, node, res.point, res.objective,
                              res.basis, next_creation)
            next_creation += 2
            if as_heap:
                heapq.heappush(queue, (down.parent_bound, down.creation_index, down))
                heapq.heappush(queue, (up.parent_bound, up.creation_index, up))
            else:
                queue.append(down)
                queue.append(up)
                if len(queue) > QUEUE_CAP:
                    queue = [(nd.parent_bound, nd.creation_index, nd)
                             for nd in queue]
                    heapq.heapify(queue)
                    as_heap = True

        if on_node is not None:
            on_node(min(open_bound(), dropped_bound, inc_obj), inc_obj)

        if enable_heuristics and incumbent is not None and nodes % HEURISTIC_PERIOD == 0:
            if use_lns:
                cand = lns(instance, incumbent, destroy_fraction, rng,
                           sub_budget(), stop)
            else:
                cand = rins(instance, incumbent,
                            last_lp_point if last_lp_point is not None
                            else incumbent.values, sub_budget(), stop)
            use_lns = not use_lns
            if cand is not None:
                accept(cand)

    if dropped_bound < INF:
        return BnbResult(incumbent, min(dropped_bound, inc_obj), nodes,
                         BnbStatus.BUDGET_EXHAUSTED)
    if incumbent is not None:
        return BnbResult(incumbent, inc_obj, nodes, BnbStatus.OPTIMAL)
    if cutoff is not None:
        return BnbResult(None, hard_cut, nodes, BnbStatus.OPTIMAL)
    return BnbResult(None, INF, nodes, BnbStatus.INFEASIBLE)
