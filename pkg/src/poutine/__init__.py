"""Heuristic MILP solver built around a portfolio of diving, pumping,
repair and branch-and-bound workers sharing one incumbent."""

from .bnb import (BnbBudget, BnbResult, BnbStatus, lns, local_branching,
                  local_branching_row, rins, solve_bnb, with_local_branching)
from .diving import DiveOutcome, DiveRule, DiveTag, dive
from .fpump import FPConfig, FPOutcome, fp_objective, round_point, run_fp
from .model import (FEAS_TOL, INF, ProblemInstance, Relation, Row, Solution,
                    VarClass, evaluate, is_integral, make_row, read_sol,
                    write_sol)
from .mps import MpsParseError, parse_mps, read_instance
from .portfolio import (BnbStage, DiveStage, FPStage, IncumbentStore,
                        RandomStage, RLBStage, RunReport, WorkerConfig,
                        default_portfolio, diving_portfolio, load_portfolio,
                        random_instantiation, run_poutine, try_update)
from .presolve import (PresolveRecord, ProvenInfeasible, crush, presolve,
                       uncrush)
from .rlb import RepairModel, build_repair_model, project, run_rlb
from .simplex import (Basis, LPRelaxation, LPResult, LPStatus,
                      SimplexWorkspace, solve_lp)

__version__ = "0.1.0"

__all__ = [
    "BnbBudget", "BnbResult", "BnbStatus", "lns", "local_branching",
    "local_branching_row", "rins", "solve_bnb", "with_local_branching",
    "DiveOutcome", "DiveRule", "DiveTag", "dive",
    "FPConfig", "FPOutcome", "fp_objective", "round_point", "run_fp",
    "FEAS_TOL", "INF", "ProblemInstance", "Relation", "Row", "Solution",
    "VarClass", "evaluate", "is_integral", "make_row", "read_sol",
    "write_sol",
    "MpsParseError", "parse_mps", "read_instance",
    "BnbStage", "DiveStage", "FPStage", "IncumbentStore", "RandomStage",
    "RLBStage", "RunReport", "WorkerConfig", "default_portfolio",
    "diving_portfolio", "load_portfolio", "random_instantiation",
    "run_poutine", "try_update",
    "PresolveRecord", "ProvenInfeasible", "crush", "presolve", "uncrush",
    "RepairModel", "build_repair_model", "project", "run_rlb",
    "Basis", "LPRelaxation", "LPResult", "LPStatus", "SimplexWorkspace",
    "solve_lp",
    "__version__",
]
