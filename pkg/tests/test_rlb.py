import numpy as np
import pytest

from poutine import (ProblemInstance, Relation, VarClass, build_repair_model,
                     evaluate, make_row, project, run_rlb)

from helpers import assert_sound, make_infeasible, random_milp


def small_instance():
    rows = [make_row([0, 1], [1.0, 1.0], Relation.LE, 3.0, "cap"),
            make_row([0, 1], [2.0, -1.0], Relation.GE, 0.0, "ratio"),
            make_row([0, 1], [1.0, -1.0], Relation.EQ, 1.0, "gap")]
    return ProblemInstance("s", np.array([1.0, 2.0]), rows, np.zeros(2),
                           np.full(2, 3.0), np.full(2, VarClass.GENERAL_INTEGER))


def test_artificials_only_on_violated_rows():
    inst = small_instance()
    seed = np.array([2.0, 1.0])  # cap ok, ratio ok, gap ok
    rep = build_repair_model(inst, seed)
    assert rep.artificials == {}

    seed = np.array([3.0, 3.0])  # cap violated (6>3), gap violated (0 != 1)
    rep = build_repair_model(inst, seed)
    assert set(rep.artificials) == {0, 2}
    assert rep.original_n == 2


def test_repair_model_structure():
    inst = small_instance()
    seed = np.array([3.0, 3.0])
    rep = build_repair_model(inst, seed)
    n = inst.num_vars
    s0, y0 = rep.artificials[0]
    s2, y2 = rep.artificials[2]
    aug = rep.model
    # slack carries -1 on a <= row, +1 on an = row
    row0 = dict(zip(aug.rows[0].indices, aug.rows[0].coefficients))
    assert row0[s0] == -1.0
    row2 = dict(zip(aug.rows[2].indices, aug.rows[2].coefficients))
    assert row2[s2] == 1.0
    # flags are binary, slacks sized by the seed violation
    assert aug.var_class[y0] == VarClass.BINARY
    assert aug.var_class[s0] == VarClass.CONTINUOUS
    assert rep.big_m[0] == pytest.approx(max(1.0, 1.1 * 3.0))
    # objective counts flags only
    assert aug.objective[y0] == 1.0 and aug.objective[y2] == 1.0
    assert np.count_nonzero(aug.objective) == 2
    # equality rows get links in both directions, inequalities one
    link_rows = [r for r in aug.rows if r.name.startswith("_rlb_link")]
    assert len(link_rows) == 3


def test_seed_augmented_is_feasible_in_repair_model():
    rng = np.random.default_rng(12)
    for _ in range(30):
        inst = random_milp(rng)
        seed = rng.integers(inst.lower_bounds.astype(int),
                            inst.upper_bounds.astype(int) + 1).astype(float)
        rep = build_repair_model(inst, seed)
        if not rep.artificials:
            continue
        sol = evaluate(rep.model, rep.seed_augmented)
        assert sol.is_feasible, "augmented seed must always be feasible"
        assert sol.objective == pytest.approx(len(rep.artificials))


def test_project_strips_artificials():
    inst = small_instance()
    rep = build_repair_model(inst, np.array([3.0, 3.0]))
    full = rep.seed_augmented
    assert np.array_equal(project(rep, full), [3.0, 3.0])


def test_seed_validation():
    inst = small_instance()
    with pytest.raises(ValueError):
        build_repair_model(inst, np.array([0.5, 1.0]))  # fractional integer
    with pytest.raises(ValueError):
        build_repair_model(inst, np.array([1.0]))  # wrong length


def test_seed_clamped_to_bounds():
    inst = small_instance()
    rep = build_repair_model(inst, np.array([9.0, -4.0]))
    assert rep.seed_augmented[0] == 3.0
    assert rep.seed_augmented[1] == 0.0


def test_run_rlb_repairs_random_seeds():
    rng = np.random.default_rng(13)
    repaired = 0
    for _ in range(25):
        inst = random_milp(rng, max_vars=8, max_rows=5)
        seed = rng.integers(inst.lower_bounds.astype(int),
                            inst.upper_bounds.astype(int) + 1).astype(float)
        sol = run_rlb(inst, seed)
        if sol is not None:
            assert_sound(inst, sol)
            repaired += 1
    assert repaired >= 15


def test_run_rlb_feasible_seed_returns_directly():
    inst = small_instance()
    seed = np.array([2.0, 1.0])
    sol = run_rlb(inst, seed)
    assert sol is not None
    assert np.array_equal(sol.values, seed)


def test_run_rlb_gives_up_on_impossible():
    inst = make_infeasible(small_instance())
    seed = np.array([2.0, 1.0])
    sol = run_rlb(inst, seed)
    assert sol is None
