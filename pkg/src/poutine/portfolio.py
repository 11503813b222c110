"""Parallel portfolio driver.

Presolves once, fans the reduced instance out to worker threads (each a
fixed list of heuristic stages, usually ending in branch-and-bound), and
funnels every strict improvement through a locked incumbent store that
keeps the `.sol` file on disk current via atomic replace. A shared stop
flag plus a common deadline bound the run; workers poll both at every LP
solve and node pop.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bnb import BnbBudget, BnbStatus, solve_bnb
from .diving import DiveRule, DiveTag, dive
from .fpump import FPConfig, round_point, run_fp
from .model import INF, ProblemInstance, Solution, evaluate, write_sol
from .presolve import PresolveRecord, ProvenInfeasible, presolve, uncrush
from .rlb import run_rlb
from .simplex import LPStatus, SimplexWorkspace

IMPROVE_TOL = 1e-9
GRACE_SECONDS = 2.0


# -- worker stage vocabulary ----------------------------------------------

@dataclass(frozen=True)
class DiveStage:
    tag: DiveTag
    seed: int | None = None


@dataclass(frozen=True)
class FPStage:
    alpha: float = 0.4
    max_iterations: int = 10
    perturb_period: int = 20
    seed: int = 0


@dataclass(frozen=True)
class RLBStage:
    radius: int = 10


@dataclass(frozen=True)
class RandomStage:
    seed: int = 0


@dataclass(frozen=True)
class BnbStage:
    pass


@dataclass(frozen=True)
class WorkerConfig:
    worker_id: int
    stages: tuple

    def __post_init__(self):
        for pos, stage in enumerate(self.stages):
            if isinstance(stage, BnbStage) and pos != len(self.stages) - 1:
                raise ValueError("branch-and-bound must be the final stage")
            if isinstance(stage, RLBStage):
                if pos == 0 or not isinstance(self.stages[pos - 1],
                                              (DiveStage, FPStage)):
                    raise ValueError("repair stage needs a seed-producing "
                                     "stage right before it")


_BASE_STAGES = (
    (DiveStage(DiveTag.LEAST_FRACTIONAL), BnbStage()),
    (DiveStage(DiveTag.MOST_FRACTIONAL), BnbStage()),
    (DiveStage(DiveTag.RANDOM, seed=100), RLBStage(), BnbStage()),
    (DiveStage(DiveTag.RANDOM, seed=200), BnbStage()),
    (FPStage(alpha=0.4, seed=300), BnbStage()),
    (FPStage(alpha=0.9, seed=400), RLBStage(), BnbStage()),
    (FPStage(alpha=0.4, seed=500), RLBStage(), BnbStage()),
    (RandomStage(seed=600),),
)


def default_portfolio(thread_count: int) -> list[WorkerConfig]:
    """Standard 8-entry worker list; other counts take a prefix or cycle."""
    if thread_count < 1:
        raise ValueError("thread_count must be >= 1")
    return [WorkerConfig(i, _BASE_STAGES[i % len(_BASE_STAGES)])
            for i in range(thread_count)]


def diving_portfolio(thread_count: int) -> list[WorkerConfig]:
    """The four dive workers only, cycled to the requested width."""
    if thread_count < 1:
        raise ValueError("thread_count must be >= 1")
    return [WorkerConfig(i, _BASE_STAGES[i % 4]) for i in range(thread_count)]


_RULE_NAMES = {
    "least-fractional": DiveTag.LEAST_FRACTIONAL,
    "most-fractional": DiveTag.MOST_FRACTIONAL,
    "random": DiveTag.RANDOM,
    1: DiveTag.LEAST_FRACTIONAL, 2: DiveTag.MOST_FRACTIONAL, 3: DiveTag.RANDOM,
}


def load_portfolio(path) -> list[WorkerConfig]:
    """Read worker stage lists from a JSON file.

    Schema: a list of objects, each {"stages": [stage, ...]} where a stage
    is one of
      {"kind": "dive", "rule": "least-fractional"|"most-fractional"|"random"
                               | 1 | 2 | 3, "seed": int?}
      {"kind": "fp", "alpha": float?, "max_iterations": int?,
                     "perturb_period": int?, "seed": int?}
      {"kind": "rlb", "radius": int?}
      {"kind": "random", "seed": int?}
      {"kind": "bnb"}
    """
    entries = json.loads(Path(path).read_text())
    if not isinstance(entries, list) or not entries:
        raise ValueError("portfolio file must hold a non-empty list")
    configs = []
    for wid, entry in enumerate(entries):
        stages = []
        for raw in entry.get("stages", []):
            kind = raw.get("kind")
            if kind == "dive":
                rule = raw.get("rule", "random")
                if rule not in _RULE_NAMES:
                    raise ValueError(f"unknown dive rule {rule!r}")
                stages.append(DiveStage(_RULE_NAMES[rule], raw.get("seed")))
            elif kind == "fp":
                stages.append(FPStage(raw.get("alpha", 0.4),
                                      raw.get("max_iterations", 10),
                                      raw.get("perturb_period", 20),
                                      raw.get("seed", 0)))
            elif kind == "rlb":
                stages.append(RLBStage(raw.get("radius", 10)))
            elif kind == "random":
                stages.append(RandomStage(raw.get("seed", 0)))
            elif kind == "bnb":
                stages.append(BnbStage())
            else:
                raise ValueError(f"unknown stage kind {kind!r}")
        configs.append(WorkerConfig(wid, tuple(stages)))
    return configs


# -- shared incumbent state -----------------------------------------------

class IncumbentStore:
    """Lock-protected best solution plus the on-disk .sol mirror."""

    def __init__(self, original: ProblemInstance, record: PresolveRecord,
                 sol_path=None, on_update=None):
        self._lock = threading.Lock()
        self.original = original
        self.record = record
        self.sol_path = Path(sol_path) if sol_path is not None else None
        self.on_update = on_update
        self.created = time.monotonic()
        self.best: Solution | None = None
        self.best_reduced: Solution | None = None
        self.update_log: list[tuple[float, int | str, float]] = []

    def best_objective(self) -> float:
        with self._lock:
            return self.best.objective if self.best is not None else INF

    def snapshot_reduced(self) -> Solution | None:
        with self._lock:
            if self.best_reduced is None:
                return None
            return Solution(self.best_reduced.values.copy(),
                            self.best_reduced.objective,
                            self.best_reduced.max_violation)


def try_update(store: IncumbentStore, candidate: Solution,
               record: PresolveRecord | None = None,
               original: ProblemInstance | None = None,
               sol_path=None, worker: int | str = "main") -> bool:
    """Uncrush a reduced-space candidate and install it if strictly better.

    The original-space point must be feasible; the stored objective only
    ever decreases, by more than IMPROVE_TOL per accepted update. The .sol
    file is rewritten atomically inside the lock.
    """
    record = record if record is not None else store.record
    original = original if original is not None else store.original
    sol_path = Path(sol_path) if sol_path is not None else store.sol_path

    full = uncrush(candidate, record, original)
    if not full.is_feasible:
        return False
    with store._lock:
        if store.best is not None \
                and full.objective >= store.best.objective - IMPROVE_TOL:
            return False
        store.best = full
        store.best_reduced = Solution(candidate.values.copy(),
                                      candidate.objective,
                                      candidate.max_violation)
        stamp = time.monotonic() - store.created
        store.update_log.append((stamp, worker, full.objective))
        if sol_path is not None:
            tmp = sol_path.with_name(sol_path.name + ".tmp")
            tmp.write_text(write_sol(full, original))
            os.replace(tmp, sol_path)
    if store.on_update is not None:
        store.on_update(worker, full.objective)
    return True


# -- the eighth worker: pure random search --------------------------------

def random_instantiation(instance: ProblemInstance, rng: np.random.Generator,
                         deadline: float | None = None, stop=None,
                         attempts: int | None = None,
                         workspace: SimplexWorkspace | None = None
                         ) -> Solution | None:
    """Sample integer assignments uniformly; LP-solve the continuous rest.

    Integer ranges are capped at +-1e6. Returns the first feasible
    Solution, or None when the budget runs out. Without a deadline or an
    attempt count, 1000 attempts are made.
    """
    int_idx = instance.integer_indices()
    cont = instance.num_vars - int_idx.size
    ws = workspace or SimplexWorkspace(instance)
    if deadline is None and attempts is None:
        attempts = 1000

    if int_idx.size == 0:
        res = ws.solve()
        if res.status == LPStatus.OPTIMAL:
            sol = evaluate(instance, res.point)
            if sol.is_feasible:
                return sol
        return None

    lo = np.maximum(instance.lower_bounds[int_idx], -1e6).astype(np.int64)
    hi = np.minimum(instance.upper_bounds[int_idx], 1e6).astype(np.int64)
    made = 0
    while True:
        if stop is not None and stop():
            return None
        if deadline is not None and time.monotonic() >= deadline:
            return None
        if attempts is not None and made >= attempts:
            return None
        made += 1
        sample = rng.integers(lo, hi + 1)
        if cont == 0:
            values = np.zeros(instance.num_vars)
            values[int_idx] = sample
            sol = evaluate(instance, values)
            if sol.is_feasible:
                return sol
        else:
            overrides = {int(j): (float(s), float(s))
                         for j, s in zip(int_idx, sample)}
            res = ws.solve(bound_overrides=overrides)
            if res.status == LPStatus.OPTIMAL:
                sol = evaluate(instance, res.point)
                if sol.is_feasible:
                    return sol


# -- run orchestration ----------------------------------------------------

@dataclass
class RunReport:
    best: Solution | None
    best_bound: float
    proven_infeasible: bool
    wall_time: float
    events: list[str] = field(default_factory=list)
    worker_stats: dict = field(default_factory=dict)
    sol_path: Path | None = None

    @property
    def exit_code(self) -> int:
        if self.best is not None:
            return 0
        return 3 if self.proven_infeasible else 2


class _RunLog:
    """Collects `time_s,worker,event,objective` lines; optionally streamed.

    time_s is whole seconds since run start so that equal single-threaded
    runs produce byte-identical logs.
    """

    def __init__(self, t0: float, path=None):
        self.t0 = t0
        self.lines: list[str] = []
        self._lock = threading.Lock()
        self._handle = open(path, "w") if path is not None else None

    def __call__(self, worker, event, objective=None):
        stamp = int(time.monotonic() - self.t0)
        obj = "" if objective is None else repr(float(objective))
        line = f"{stamp},{worker},{event},{obj}"
        with self._lock:
            self.lines.append(line)
            if self._handle is not None:
                self._handle.write(line + "\n")
                self._handle.flush()

    def close(self):
        if self._handle is not None:
            self._handle.close()
            self._handle = None


def _stage_seed(cli_seed: int, worker_id: int, stage_idx: int,
                declared: int | None) -> int:
    ss = np.random.SeedSequence(
        [cli_seed, worker_id, stage_idx, declared if declared is not None else 0])
    return int(ss.generate_state(1)[0])


def _worker_main(cfg: WorkerConfig, reduced: ProblemInstance,
                 store: IncumbentStore, deadline: float, stop_event,
                 log, cli_seed: int, results: dict):
    wid = cfg.worker_id
    label = f"w{wid}"
    stats = {"bound": -INF, "status": None, "error": None}
    results[wid] = stats

    def stopped():
        return stop_event.is_set() or time.monotonic() >= deadline

    def stop_cb():
        return stop_event.is_set()

    own: Solution | None = None
    seed_point = None

    def offer(sol: Solution):
        nonlocal own
        if sol is None:
            return
        if own is None or sol.objective < own.objective - IMPROVE_TOL:
            own = sol
        try_update(store, sol, worker=wid)

    try:
        for idx, stage in enumerate(cfg.stages):
            if stopped():
                break
            if isinstance(stage, DiveStage):
                log(label, f"dive_{stage.tag.name.lower()}")
                rule = DiveRule(stage.tag,
                                _stage_seed(cli_seed, wid, idx, stage.seed)
                                if stage.tag == DiveTag.RANDOM else None)
                out = dive(reduced, rule, deadline=deadline, stop=stop_cb)
                if out.solution is not None:
                    offer(out.solution)
                elif out.last_point is not None:
                    seed_point = round_point(out.last_point, reduced.var_class)
            elif isinstance(stage, FPStage):
                log(label, "feasibility_pump")
                fp_cfg = FPConfig(stage.alpha, stage.max_iterations,
                                  stage.perturb_period,
                                  _stage_seed(cli_seed, wid, idx, stage.seed))
                out = run_fp(reduced, fp_cfg, deadline=deadline, stop=stop_cb)
                if out.solution is not None:
                    offer(out.solution)
                elif out.x_tilde is not None:
                    seed_point = out.x_tilde
            elif isinstance(stage, RLBStage):
                log(label, "repair")
                if own is None and seed_point is not None:
                    sol = run_rlb(reduced, seed_point, stage.radius,
                                  deadline=deadline, stop=stop_cb)
                    if sol is not None:
                        offer(sol)
            elif isinstance(stage, RandomStage):
                log(label, "random_search")
                rng = np.random.default_rng(
                    _stage_seed(cli_seed, wid, idx, stage.seed))
                sol = random_instantiation(reduced, rng, deadline=deadline,
                                           stop=stop_cb)
                if sol is not None:
                    offer(sol)
            elif isinstance(stage, BnbStage):
                log(label, "branch_and_bound")
                warm = own if own is not None else store.snapshot_reduced()
                rng = np.random.default_rng(_stage_seed(cli_seed, wid, idx, 0))
                res = solve_bnb(reduced, warm, BnbBudget(deadline=deadline),
                                incumbent_sink=lambda s: try_update(
                                    store, s, worker=wid),
                                rng=rng, stop=stop_cb)
                stats["bound"] = res.lower_bound
                stats["status"] = res.status.value
    except Exception as exc:  # keep one worker's failure from killing the run
        stats["error"] = f"{type(exc).__name__}: {exc}"
        log(label, "error")
    log(label, "worker_done")


def run_poutine(instance: ProblemInstance, portfolio=None,
                time_limit: float = 600.0, sol_path=None, *,
                log_path=None, seed: int = 0) -> RunReport:
    """Drive the full pipeline on one instance; returns the run report."""
    t0 = time.monotonic()
    deadline = t0 + time_limit
    log = _RunLog(t0, log_path)
    log("main", "start")
    if portfolio is None:
        portfolio = default_portfolio(8)

    try:
        reduced, record = presolve(instance)
    except ProvenInfeasible:
        log("main", "proven_infeasible")
        log("main", "done")
        log.close()
        return RunReport(None, INF, True, time.monotonic() - t0,
                         log.lines, {}, None)
    log("main", "presolve")

    store = IncumbentStore(instance, record, sol_path,
                           on_update=lambda w, obj: log(f"w{w}", "incumbent", obj))

    if reduced.num_vars == 0:
        sol = evaluate(reduced, np.zeros(0))
        ok = sol.is_feasible and try_update(store, sol, worker="main")
        log("main", "done", store.best.objective if store.best else None)
        log.close()
        return RunReport(store.best, sol.objective if ok else INF, False,
                         time.monotonic() - t0, log.lines, {},
                         store.sol_path)

    stop_event = threading.Event()
    results: dict = {}
    threads = []
    for cfg in portfolio:
        th = threading.Thread(
            target=_worker_main,
            args=(cfg, reduced, store, deadline, stop_event, log, seed, results),
            daemon=True, name=f"poutine-w{cfg.worker_id}")
        threads.append(th)
    for th in threads:
        th.start()

    while any(th.is_alive() for th in threads):
        if time.monotonic() >= deadline:
            break
        time.sleep(0.005)
    stop_event.set()
    grace_end = time.monotonic() + GRACE_SECONDS
    for th in threads:
        th.join(timeout=max(0.0, grace_end - time.monotonic()))

    best_bound = -INF
    any_infeasible = False
    for stats in results.values():
        if stats.get("bound", -INF) > best_bound:
            best_bound = stats["bound"]
        if stats.get("status") == BnbStatus.INFEASIBLE.value:
            any_infeasible = True
    best = store.best
    if best is not None and best_bound > best.objective:
        best_bound = best.objective
    proven = best is None and any_infeasible
    log("main", "done", best.objective if best is not None else None)
    log.close()
    return RunReport(best, best_bound, proven, time.monotonic() - t0,
                     log.lines, results, store.sol_path)
