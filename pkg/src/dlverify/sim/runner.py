"""Numeric execution of hybrid programs (the transition-relation semantics).

Nondeterminism is explored breadth-first under a branch budget: choices take
both branches, loops unroll up to a bound, and each ODE yields a bundle of
stop times (zero, uniformly sampled interior times, and the domain-exit time
found by bisection).  Exceeding the budget degrades softly: the partial
result set is returned with `exhausted` set.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from ..core import ast
from ..core.ast import (Assign, Choice, Formula, Loop, ODE, Program, Seq,
                        Term, Test, Variable)
from ..core.desugar import desugar
from ..core.vars import bound_vars, free_vars
from . import backend
from .compile import FlatODE
from .floats import eval_formula_float, eval_term_float

FState = Dict[Variable, float]


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    max_loop: int = 6
    max_ode_time: float = 10.0
    ode_step: float = 1.0 / 64.0
    ode_samples: int = 5
    falsify_samples: int = 120
    max_branches: int = 400
    margin_tol: float = 1e-6
    bisect_tol: float = 1e-9
    value_range: float = 4.0

    def __post_init__(self) -> None:
        if self.ode_step <= 0:
            raise ValueError("ode_step must be positive")


@dataclass(frozen=True)
class TraceStep:
    time: float
    state: Tuple[Tuple[Variable, float], ...]
    label: str
    prog: Optional[Program] = field(default=None, compare=False, repr=False)


Trace = Tuple[TraceStep, ...]


@dataclass
class RunResult:
    results: List[Tuple[FState, Trace]]
    exhausted: bool = False


def _snap(state: FState) -> Tuple[Tuple[Variable, float], ...]:
    return tuple(sorted(state.items(), key=lambda kv: kv[0]))


class _Runner:
    def __init__(self, cfg: SimConfig, monitors: Sequence[Term] = ()):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.monitors = list(monitors)
        self.count = 0
        self.exhausted = False

    def execute(self, prog: Program, state: FState, trace: List[TraceStep],
                time: float) -> Iterator[Tuple[FState, List[TraceStep], float]]:
        if self.count > self.cfg.max_branches:
            self.exhausted = True
            return
        if isinstance(prog, Assign):
            new = dict(state)
            new[prog.var] = eval_term_float(prog.term, state)
            yield new, trace + [TraceStep(time, _snap(new), "assign", prog)], time
        elif isinstance(prog, Test):
            if eval_formula_float(prog.cond, state):
                yield state, trace + [TraceStep(time, _snap(state), "test",
                                                prog)], time
        elif isinstance(prog, Choice):
            for st, tr, tm in self.execute(prog.left, state,
                                           trace + [TraceStep(time, _snap(state),
                                                              "choice-left")], time):
                yield st, tr, tm
            for st, tr, tm in self.execute(prog.right, state,
                                           trace + [TraceStep(time, _snap(state),
                                                              "choice-right")], time):
                yield st, tr, tm
        elif isinstance(prog, Seq):
            for st, tr, tm in self.execute(prog.first, state, trace, time):
                yield from self.execute(prog.second, st, tr, tm)
        elif isinstance(prog, Loop):
            yield state, trace, time  # zero iterations
            frontier = [(state, trace, time)]
            for _ in range(self.cfg.max_loop):
                nxt = []
                for st, tr, tm in frontier:
                    for st2, tr2, tm2 in self.execute(
                            prog.body, st,
                            tr + [TraceStep(tm, _snap(st), "loop-iter")], tm):
                        nxt.append((st2, tr2, tm2))
                        yield st2, tr2, tm2
                if not nxt:
                    break
                frontier = nxt
        elif isinstance(prog, ODE):
            yield from self._run_ode(prog, state, trace, time)
        else:
            raise TypeError(f"run requires a core program, got {prog!r}")
        self.count += 1

    # ----------------------------------------------------------------- ODEs

    def _run_ode(self, prog: ODE, state: FState, trace: List[TraceStep],
                 time: float):
        ambient = sorted(state, key=lambda v: (v.name, v.kind))
        flat = FlatODE(prog.eqs, prog.domain, ambient)
        y0 = [state.get(v, 0.0) for v in flat.variables]
        if not flat.domain_holds(y0):
            return  # not even a zero-duration evolution is possible
        h = self.cfg.ode_step
        max_steps = max(1, int(self.cfg.max_ode_time / h))
        traj, exited = backend.integrate(flat, y0, h, max_steps)
        last = len(traj) - 1
        horizon = last * h
        if exited:
            horizon = last * h + self._exit_offset(flat, traj[-1], h)
        stops = {0.0, horizon}
        for _ in range(self.cfg.ode_samples):
            stops.add(self.rng.uniform(0.0, horizon))
        for mon in self.monitors:
            stops.update(self._crossings(mon, flat, traj, h))
        for stop in sorted(stops):
            st = self._state_at(flat, traj, h, stop, state)
            if st is None:
                continue
            yield st, trace + [TraceStep(time + stop, _snap(st), "ode-step",
                                         prog)], time + stop

    def _exit_offset(self, flat: FlatODE, y_last: List[float], h: float) -> float:
        """Largest extra time in [0, h) keeping the domain, by bisection."""
        lo, hi = 0.0, h
        while hi - lo > self.cfg.bisect_tol:
            mid = 0.5 * (lo + hi)
            probe = backend.rk4_step(flat, y_last, mid)
            if flat.domain_holds(probe):
                lo = mid
            else:
                hi = mid
        return lo

    def _state_at(self, flat: FlatODE, traj, h: float, stop: float,
                  base: FState) -> Optional[FState]:
        k = min(int(stop / h), len(traj) - 1)
        rem = stop - k * h
        y = traj[k]
        if rem > self.cfg.bisect_tol:
            y = backend.rk4_step(flat, y, rem)
            if not flat.domain_holds(y):
                return None
        out = dict(base)
        for i, v in enumerate(flat.variables):
            out[v] = y[i]
        return out

    def _crossings(self, term: Term, flat: FlatODE, traj, h: float) -> List[float]:
        """Times where the monitored term changes sign along the trajectory."""
        out = []
        idx = flat.index

        def value(row) -> float:
            return eval_term_float(term, {v: row[idx[v]] for v in flat.variables})

        prev = value(traj[0])
        for k in range(1, len(traj)):
            cur = value(traj[k])
            if prev == 0.0:
                out.append((k - 1) * h)
            elif prev * cur < 0.0:
                lo, hi = 0.0, h
                ylo = traj[k - 1]
                while hi - lo > self.cfg.bisect_tol:
                    mid = 0.5 * (lo + hi)
                    if prev * value(backend.rk4_step(flat, ylo, mid)) <= 0.0:
                        hi = mid
                    else:
                        lo = mid
                out.append((k - 1) * h + hi)
            prev = cur
        if prev == 0.0:
            out.append((len(traj) - 1) * h)
        return out


def run(prog: Program, state: FState, cfg: SimConfig,
        monitors: Sequence[Term] = ()) -> RunResult:
    """All (final state, trace) pairs reachable under the budget."""
    core = desugar(prog)
    for v in free_vars(core) | bound_vars(core):
        if v not in state:
            raise KeyError(f"initial state must bind {v}")
    runner = _Runner(cfg, monitors)
    results = [(st, tuple(tr))
               for st, tr, _ in runner.execute(core, dict(state), [], 0.0)]
    return RunResult(results, runner.exhausted)
