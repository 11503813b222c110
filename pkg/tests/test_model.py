import numpy as np
import pytest

from poutine import (ProblemInstance, Relation, Solution, VarClass, evaluate,
                     is_integral, make_row, read_sol, write_sol)


def two_var(relation=Relation.LE, rhs=3.0, classes=None):
    rows = [make_row([0, 1], [1.0, 1.0], relation, rhs, "r0")]
    cls = classes if classes is not None else np.array(
        [VarClass.GENERAL_INTEGER, VarClass.CONTINUOUS])
    return ProblemInstance("t", np.array([1.0, -1.0]), rows,
                           np.zeros(2), np.full(2, 4.0), cls)


def test_evaluate_objective_and_constant():
    inst = two_var()
    inst = ProblemInstance(inst.name, inst.objective, list(inst.rows),
                           inst.lower_bounds, inst.upper_bounds,
                           inst.var_class, objective_constant=2.5)
    sol = evaluate(inst, np.array([1.0, 2.0]))
    assert sol.objective == pytest.approx(1.0 - 2.0 + 2.5)
    assert sol.max_violation == 0.0
    assert sol.is_feasible


def test_evaluate_row_violations():
    inst = two_var(Relation.LE, 3.0)
    sol = evaluate(inst, np.array([2.0, 2.0]))
    assert sol.max_violation == pytest.approx(1.0)
    assert not sol.is_feasible

    inst = two_var(Relation.GE, 3.0)
    sol = evaluate(inst, np.array([1.0, 0.5]))
    assert sol.max_violation == pytest.approx(1.5)

    inst = two_var(Relation.EQ, 3.0)
    sol = evaluate(inst, np.array([1.0, 0.5]))
    assert sol.max_violation == pytest.approx(1.5)


def test_evaluate_bound_and_integrality_violations():
    inst = two_var()
    sol = evaluate(inst, np.array([4.5, 0.0]))
    assert sol.max_violation >= 0.5
    sol = evaluate(inst, np.array([1.3, 0.0]))
    assert sol.max_violation == pytest.approx(0.3)
    assert not is_integral(np.array([1.3, 0.0]), inst.var_class)
    assert is_integral(np.array([1.0, 0.7]), inst.var_class)


def test_integer_bounds_are_tightened():
    rows = [make_row([0], [1.0], Relation.LE, 9.0, "r0")]
    inst = ProblemInstance("t", np.array([1.0]), rows,
                           np.array([0.2]), np.array([3.7]),
                           np.array([VarClass.GENERAL_INTEGER]))
    assert inst.lower_bounds[0] == 1.0
    assert inst.upper_bounds[0] == 3.0


def test_binary_bounds_validated():
    rows = [make_row([0], [1.0], Relation.LE, 9.0, "r0")]
    with pytest.raises(ValueError):
        ProblemInstance("t", np.array([1.0]), rows, np.array([0.0]),
                        np.array([2.0]), np.array([VarClass.BINARY]))


def test_duplicate_row_indices_rejected():
    rows = [make_row([0, 0], [1.0, 2.0], Relation.LE, 1.0, "bad")]
    with pytest.raises(ValueError):
        ProblemInstance("t", np.array([1.0]), rows, np.zeros(1), np.ones(1),
                        np.array([VarClass.CONTINUOUS]))


def test_matrix_cache():
    inst = two_var()
    mat = inst.matrix
    assert mat.shape == (1, 2)
    assert np.array_equal(mat, [[1.0, 1.0]])
    assert inst.matrix is mat


def test_sol_round_trip(tmp_path):
    inst = two_var()
    sol = evaluate(inst, np.array([2.0, 0.5]))
    text = write_sol(sol, inst)
    lines = text.splitlines()
    assert lines[0].startswith("=obj=")
    assert text.endswith("\n")
    # integer-classed values print without a decimal point
    assert lines[1].split() == ["x0", "2"]
    values, stated = read_sol(text, inst)
    assert np.allclose(values, sol.values)
    assert stated == pytest.approx(sol.objective)


def test_read_sol_defaults_and_errors():
    inst = two_var()
    values, _ = read_sol("=obj= 0\nx1 1.5\n", inst)
    assert values[0] == 0.0 and values[1] == 1.5
    with pytest.raises(ValueError):
        read_sol("=obj= 0\nnope 1\n", inst)


def test_solution_feasibility_threshold():
    sol = Solution(np.zeros(1), 0.0, 1e-6)
    assert sol.is_feasible
    sol = Solution(np.zeros(1), 0.0, 2e-6)
    assert not sol.is_feasible
