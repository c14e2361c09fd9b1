"""Randomized falsification: bounded search for concrete counterexamples.

Sampling can only refute, never confirm: a box over an ODE is reported false
when a sampled run violates the postcondition robustly, and every candidate
must survive a replay of its trace at half the integration step before it is
reported.  Refutations of disequations (a != b) are certified by a sign
change of a - b along the trajectory; their margin is the first-order
bracket amplitude |d/dt (a-b)| * h at the crossing.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from ..core import ast
from ..core.ast import (Box, Cmp, Diamond, Exists, FalseF, Forall, Formula,
                        Not, ODE, Sub, Term, TrueF, Variable)
from ..core.desugar import desugar_formula
from ..core.vars import bound_vars as ast_bound
from ..core.vars import free_vars
from ..deriv import derive_term, diff_subst
from . import backend
from .compile import FlatODE
from .floats import atom_margin, eval_formula_float, eval_term_float
from .runner import FState, RunResult, SimConfig, Trace, TraceStep, run

NEAR_EQ_TOL = 1e-7


@dataclass
class Counterexample:
    initial: FState
    trace: Trace
    violated: Formula
    margin: float

    def replay(self, cfg: SimConfig, step_scale: float = 1.0) -> Optional[float]:
        """Re-simulate the trace (scaled ODE step); margin or None if the
        violation does not reproduce."""
        return _replay(self, cfg, step_scale)


class Unknown:
    """No counterexample found within the budget; carries no validity claim."""

    def __repr__(self) -> str:
        return "Unknown(no counterexample found)"


def _comparison_monitors(phi: Formula) -> List[Term]:
    out: List[Term] = []

    def walk(f: Formula) -> None:
        if isinstance(f, Cmp):
            out.append(Sub(f.left, f.right))
        elif isinstance(f, Not):
            walk(f.arg)
        elif isinstance(f, (ast.And, ast.Or, ast.Imp, ast.Iff)):
            walk(f.left)
            walk(f.right)
        elif isinstance(f, (Forall, Exists)):
            walk(f.body)
    walk(phi)
    return out


def _ode_slope(ode: ODE, term: Term, state: FState) -> float:
    """d/dt of term along the ODE at state (symbolic derivation, float eval)."""
    d = diff_subst(Cmp(derive_term(term), ast.EQ, ast.ZERO), ode.eqs).left
    return eval_term_float(d, state)


class _Falsifier:
    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed + 0x5EED)

    def sample_value(self) -> float:
        r = self.cfg.value_range
        den = self.rng.choice((1, 2, 4, 8))
        return self.rng.randrange(int(-r * den), int(r * den) + 1) / den

    # truth: True / False / None (unknown); on False inside a box, `witness`
    # receives (final state, trace, violated subformula, margin)
    def truth(self, phi: Formula, state: FState, witness: List,
              ode_ctx: Optional[ODE] = None) -> Optional[bool]:
        cfg = self.cfg
        if isinstance(phi, TrueF):
            return True
        if isinstance(phi, FalseF):
            return False
        if isinstance(phi, Cmp):
            m = atom_margin(phi, state)
            if phi.op == ast.NE and ode_ctx is not None and m < NEAR_EQ_TOL:
                return False  # crossing-certified near-equality
            if abs(m) < cfg.margin_tol:
                return None
            return m > 0
        if isinstance(phi, Not):
            t = self.truth(phi.arg, state, witness, ode_ctx)
            return None if t is None else not t
        if isinstance(phi, ast.And):
            l = self.truth(phi.left, state, witness, ode_ctx)
            if l is False:
                return False
            r = self.truth(phi.right, state, witness, ode_ctx)
            if r is False:
                return False
            return True if (l is True and r is True) else None
        if isinstance(phi, ast.Or):
            l = self.truth(phi.left, state, witness, ode_ctx)
            if l is True:
                return True
            r = self.truth(phi.right, state, witness, ode_ctx)
            if r is True:
                return True
            return False if (l is False and r is False) else None
        if isinstance(phi, ast.Imp):
            l = self.truth(phi.left, state, witness, ode_ctx)
            if l is False:
                return True
            r = self.truth(phi.right, state, witness, ode_ctx)
            if r is True:
                return True
            if l is True and r is False:
                return False
            return None
        if isinstance(phi, ast.Iff):
            l = self.truth(phi.left, state, witness, ode_ctx)
            r = self.truth(phi.right, state, witness, ode_ctx)
            if l is None or r is None:
                return None
            return l == r
        if isinstance(phi, (Forall, Exists)):
            for _ in range(max(4, cfg.falsify_samples // 8)):
                st = dict(state)
                st[phi.var] = self.sample_value()
                t = self.truth(phi.body, st, witness, ode_ctx)
                if isinstance(phi, Forall) and t is False:
                    return False
                if isinstance(phi, Exists) and t is True:
                    return True
            return None
        if isinstance(phi, (Box, Diamond)):
            monitors = _comparison_monitors(phi.post)
            start = dict(state)
            for v in free_vars(phi.prog) | ast_bound(phi.prog):
                # bound-only variables cannot influence the run's semantics
                start.setdefault(v, 0.0)
            res: RunResult = run(phi.prog, start, cfg, monitors=monitors)
            inner_ode = phi.prog if isinstance(phi.prog, ODE) else None
            if isinstance(phi, Box):
                for final, trace in res.results:
                    last_ode = _last_ode(trace) or inner_ode
                    t = self.truth(phi.post, final, [], last_ode)
                    if t is False:
                        viol, margin = self._violation(phi.post, final, last_ode)
                        if viol is not None:
                            witness.append((final, trace, viol, margin))
                            return False
                return None  # a box over ODEs can only be refuted by sampling
            for final, trace in res.results:
                if self.truth(phi.post, final, [], _last_ode(trace)) is True:
                    return True
            return None
        raise TypeError(f"falsify cannot handle {phi!r}")

    def _violation(self, phi: Formula, state: FState,
                   ode_ctx: Optional[ODE]) -> Tuple[Optional[Formula], float]:
        """Smallest subformula responsible for falsity, with its margin."""
        if isinstance(phi, Cmp):
            m = atom_margin(phi, state)
            if phi.op == ast.NE and ode_ctx is not None and m < NEAR_EQ_TOL:
                slope = abs(_ode_slope(ode_ctx, Sub(phi.left, phi.right), state))
                return phi, slope * self.cfg.ode_step
            if m <= -self.cfg.margin_tol:
                return phi, -m
            return None, 0.0
        if isinstance(phi, Not):
            inner = phi.arg
            if isinstance(inner, Cmp):
                m = atom_margin(inner, state)
                if m >= self.cfg.margin_tol:
                    return phi, m
                return None, 0.0
            sub, margin = self._violation_true(inner, state, ode_ctx)
            return (Not(sub) if sub is not None else None), margin
        if isinstance(phi, (ast.And, ast.Or)):
            for side in (phi.left, phi.right):
                sub, margin = self._violation(side, state, ode_ctx)
                if sub is not None:
                    return sub, margin
            return None, 0.0
        if isinstance(phi, ast.Imp):
            return self._violation(phi.right, state, ode_ctx)
        return phi if self.truth(phi, state, [], ode_ctx) is False else None, \
            self.cfg.margin_tol

    def _violation_true(self, phi: Formula, state: FState,
                        ode_ctx) -> Tuple[Optional[Formula], float]:
        if isinstance(phi, Cmp):
            m = atom_margin(phi, state)
            return (phi, m) if m >= self.cfg.margin_tol else (None, 0.0)
        return (phi, self.cfg.margin_tol) \
            if self.truth(phi, state, [], ode_ctx) is True else (None, 0.0)


def _last_ode(trace: Trace) -> Optional[ODE]:
    for step in reversed(trace):
        if step.label == "ode-step" and isinstance(step.prog, ODE):
            return step.prog
    return None


def falsify(phi: Formula, cfg: SimConfig):
    """Search for a robust counterexample to phi; Counterexample or Unknown."""
    phi = desugar_formula(phi)
    fal = _Falsifier(cfg)
    fvars = sorted(free_vars(phi))
    for _ in range(cfg.falsify_samples):
        state: FState = {v: fal.sample_value() for v in fvars}
        witness: List = []
        t = fal.truth(phi, state, witness)
        if t is False and witness:
            final, trace, viol, margin = witness[-1]
            if margin < cfg.margin_tol:
                continue
            cex = Counterexample(dict(state), trace, viol, margin)
            replayed = cex.replay(cfg, step_scale=0.5)
            if replayed is not None and replayed >= cfg.margin_tol:
                return cex
    return Unknown()


# ------------------------------------------------------------------- replay


def _replay(cex: Counterexample, cfg: SimConfig, step_scale: float) -> Optional[float]:
    """Re-execute the recorded trace; ODE segments are re-integrated with the
    scaled step, discrete steps are recomputed exactly."""
    state: FState = dict(cex.initial)
    time = 0.0
    for step in cex.trace:
        if step.label == "assign" and step.prog is not None:
            state = dict(state)
            state[step.prog.var] = eval_term_float(step.prog.term, state)
        elif step.label == "test" and step.prog is not None:
            if not eval_formula_float(step.prog.cond, state):
                return None
        elif step.label == "ode-step" and isinstance(step.prog, ODE):
            duration = step.time - time
            state = _integrate_for(step.prog, state, duration, cfg, step_scale)
            if state is None:
                return None
        time = step.time
    viol = cex.violated
    if isinstance(viol, Not) and isinstance(viol.arg, Cmp):
        m = atom_margin(viol.arg, state)
        return m if m >= cfg.margin_tol else None
    if not isinstance(viol, Cmp):
        return None
    m = atom_margin(viol, state)
    if viol.op == ast.NE:
        # near-equality certified by the crossing; use the slope bracket
        if m > NEAR_EQ_TOL * 100:
            return None
        ode = _last_ode(cex.trace)
        if ode is None:
            return None
        slope = abs(_ode_slope(ode, Sub(viol.left, viol.right), state))
        return slope * cfg.ode_step * step_scale \
            if slope * cfg.ode_step * step_scale >= cfg.margin_tol else None
    return -m if -m >= cfg.margin_tol else None


def _integrate_for(ode: ODE, state: FState, duration: float, cfg: SimConfig,
                   step_scale: float) -> Optional[FState]:
    if duration < 0:
        return None
    ambient = sorted(state, key=lambda v: (v.name, v.kind))
    flat = FlatODE(ode.eqs, ode.domain, ambient)
    y = [state.get(v, 0.0) for v in flat.variables]
    if not flat.domain_holds(y):
        return None
    h = cfg.ode_step * step_scale
    steps = int(duration / h)
    for _ in range(steps):
        y = backend.rk4_step(flat, y, h)
        if not flat.domain_holds(y):
            return None
    rem = duration - steps * h
    if rem > cfg.bisect_tol:
        y = backend.rk4_step(flat, y, rem)
        if not flat.domain_holds(y):
            return None
    out = dict(state)
    for i, v in enumerate(flat.variables):
        out[v] = y[i]
    return out
