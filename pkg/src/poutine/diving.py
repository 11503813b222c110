"""Depth-first rounding dives over the LP relaxation.

Each step picks a fractional integer variable (least fractional, most
fractional, or uniformly at random), tightens one bound toward its nearest
integer, and re-solves warm-started. An infeasible re-solve backtracks to
the deepest frame with an open branch and flips it. The first
integer-feasible LP point ends the dive; the outcome also keeps the last
LP point seen so a repair stage can be seeded from a failed dive.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import FEAS_TOL, ProblemInstance, Solution, VarClass, evaluate
from .simplex import LPStatus, SimplexWorkspace

FRACTION_TOL = 1e-6
DEFAULT_MAX_DIVES = 2**31 - 1


class DiveTag(Enum):
    LEAST_FRACTIONAL = 1
    MOST_FRACTIONAL = 2
    RANDOM = 3


@dataclass(frozen=True)
class DiveRule:
    tag: DiveTag
    rng_seed: int | None = None


class Direction(Enum):
    DOWN = "down"
    UP = "up"


@dataclass
class DiveOutcome:
    solution: Solution | None
    last_point: np.ndarray | None
    dives: int
    lp_solves: int


def fractionality(values, var_class) -> np.ndarray:
    """Distance of each integer-class entry to its nearest integer (else 0)."""
    v = np.asarray(values, dtype=float)
    gaps = np.abs(v - np.rint(v))
    gaps[np.asarray(var_class) == VarClass.CONTINUOUS] = 0.0
    return gaps


def select_variable(point, var_class, rule: DiveRule,
                    rng: np.random.Generator | None = None):
    """Pick the branching variable and rounding direction for one dive step.

    Returns (index, Direction) or None when no integer-class entry is
    fractional beyond FRACTION_TOL. Ties on the fractionality score go to
    the smallest index; a 0.5 fraction rounds down.
    """
    gaps = fractionality(point, var_class)
    candidates = np.flatnonzero(gaps > FRACTION_TOL)
    if candidates.size == 0:
        return None
    if rule.tag == DiveTag.LEAST_FRACTIONAL:
        j = int(candidates[np.argmin(gaps[candidates])])
    elif rule.tag == DiveTag.MOST_FRACTIONAL:
        j = int(candidates[np.argmax(gaps[candidates])])
    else:
        if rng is None:
            raise ValueError("random dive rule needs a generator")
        j = int(candidates[rng.integers(candidates.size)])
    x = float(np.asarray(point, dtype=float)[j])
    frac = x - math.floor(x)
    direction = Direction.DOWN if frac <= 0.5 else Direction.UP
    return j, direction


@dataclass
class _Frame:
    var: int
    floor_value: float
    taken: Direction
    other_open: bool
    prev_override: tuple[float, float] | None
    basis: object


def dive(instance: ProblemInstance, rule: DiveRule,
         max_dives: int = DEFAULT_MAX_DIVES, deadline: float | None = None,
         stop=None, workspace: SimplexWorkspace | None = None) -> DiveOutcome:
    """Run one backtracking dive; returns the first integer-feasible point.

    A leaf attempt (infeasible re-solve, depth cap, or an integral point)
    counts one dive; the search stops at max_dives, the deadline, the stop
    callback, or when the frame stack is exhausted.
    """
    ws = workspace or SimplexWorkspace(instance)
    rng = np.random.default_rng(rule.rng_seed) if rule.tag == DiveTag.RANDOM else None
    depth_cap = int(np.count_nonzero(instance.integer_mask))
    lp_solves = 0
    dives = 0
    last_point = None
    overrides: dict[int, tuple[float, float]] = {}
    stack: list[_Frame] = []

    def out_of_budget():
        if stop is not None and stop():
            return True
        return deadline is not None and time.monotonic() >= deadline

    res = ws.solve(bound_overrides=overrides)
    lp_solves += 1
    if res.status != LPStatus.OPTIMAL:
        return DiveOutcome(None, None, 0, lp_solves)
    last_point = res.point.copy()

    def current_bounds(j):
        if j in overrides:
            return overrides[j]
        return float(instance.lower_bounds[j]), float(instance.upper_bounds[j])

    def apply(j, floor_value, direction):
        lo, hi = current_bounds(j)
        if direction == Direction.DOWN:
            overrides[j] = (lo, min(hi, floor_value))
        else:
            overrides[j] = (max(lo, floor_value + 1.0), hi)

    def backtrack():
        """Pop closed frames, flip the deepest open one, re-solve.

        Returns the LP result of the reopened branch, or None when the
        stack is exhausted or the budget runs out.
        """
        nonlocal dives, lp_solves
        while stack:
            if out_of_budget():
                return None
            frame = stack.pop()
            if frame.prev_override is None:
                overrides.pop(frame.var, None)
            else:
                overrides[frame.var] = frame.prev_override
            if not frame.other_open:
                continue
            flipped = (Direction.UP if frame.taken == Direction.DOWN
                       else Direction.DOWN)
            apply(frame.var, frame.floor_value, flipped)
            stack.append(_Frame(frame.var, frame.floor_value, flipped,
                                False, frame.prev_override, frame.basis))
            res = ws.solve(bound_overrides=overrides, warm_basis=frame.basis)
            lp_solves += 1
            if res.status == LPStatus.OPTIMAL:
                return res
            dives += 1
            if dives >= max_dives:
                return None
        return None

    while True:
        if out_of_budget():
            return DiveOutcome(None, last_point, dives, lp_solves)
        picked = select_variable(res.point, instance.var_class, rule, rng)
        if picked is None:
            sol = evaluate(instance, res.point)
            if sol.max_violation <= FEAS_TOL:
                return DiveOutcome(sol, last_point, dives, lp_solves)
            dives += 1          # integral LP point that still fails evaluate
            if dives >= max_dives:
                return DiveOutcome(None, last_point, dives, lp_solves)
            res = backtrack()
        elif len(stack) >= depth_cap:
            dives += 1          # depth cap reached: treat as a dead-end leaf
            if dives >= max_dives:
                return DiveOutcome(None, last_point, dives, lp_solves)
            res = backtrack()
        else:
            j, direction = picked
            frame = _Frame(j, math.floor(float(res.point[j])), direction,
                           True, overrides.get(j), res.basis)
            apply(j, frame.floor_value, direction)
            stack.append(frame)
            res = ws.solve(bound_overrides=overrides, warm_basis=frame.basis)
            lp_solves += 1
            if res.status == LPStatus.OPTIMAL:
                last_point = res.point.copy()
            else:
                dives += 1
                if dives >= max_dives:
                    return DiveOutcome(None, last_point, dives, lp_solves)
                res = backtrack()
        if res is None:
            return DiveOutcome(None, last_point, dives, lp_solves)
        last_point = res.point.copy()
