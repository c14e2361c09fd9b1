"""Best-effort automation by symbolic execution.

Repeatedly decomposes modalities with the structural axioms (outermost
first, except nested assignment chains which must be substituted innermost
first to respect admissibility), solves domain-free differential equations
with the solution axiom, reduces constrained evolutions with the domain
axiom when the flow is solvable, unwinds loops up to a budget, and finally
hands first-order goals to arithmetic.  Goals it cannot close stay open.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..arith.qe import LiftError, UnsupportedDegree
from ..core import ast
from ..core.ast import (Assign, Box, Choice, Diamond, Formula, Loop, ODE,
                        Seq, Test, TrueF)
from ..kernel import (ModalitiesRemain, NoMatch, NotClosed, Position,
                      ProofState, SideConditionError, apply_axiom, apply_rule,
                      close_arith)
from ..kernel.sequent import Sequent, node_children
from ..odesolve import Solution, Unsolvable, solve_ode


@dataclass
class AutoConfig:
    loop_unwind: int = 2
    max_steps: int = 600


@dataclass
class AutoReport:
    """What auto did and why open goals stayed open."""

    steps: int = 0
    stuck: Dict[int, str] = field(default_factory=dict)
    residuals: Dict[int, Formula] = field(default_factory=dict)


def _modal_positions(f: Formula, path: Tuple[int, ...] = ()) -> List[Tuple[Tuple[int, ...], Formula]]:
    out = []
    if isinstance(f, (Box, Diamond)):
        out.append((path, f))
    for i, c in enumerate(node_children(f)):
        if isinstance(c, Formula):
            out.extend(_modal_positions(c, path + (i,)))
        elif isinstance(c, (Test, ODE)):
            pass  # conditions inside programs are handled with the program
    return out


def _descend_assign_chain(f: Box, path: Tuple[int, ...]) -> Tuple[Tuple[int, ...], Box]:
    while isinstance(f.post, Box) and isinstance(f.post.prog, Assign) \
            and isinstance(f.prog, Assign):
        f = f.post
        path = path + (1,)
    return path, f


def _candidate_positions(seq: Sequent) -> List[Tuple[Position, Formula]]:
    cands: List[Tuple[Position, Formula]] = []
    for side, formulas in (("ante", seq.ante), ("succ", seq.succ)):
        for i, f in enumerate(formulas):
            for path, node in _modal_positions(f):
                if isinstance(node, Box) and isinstance(node.prog, Assign):
                    path, node = _descend_assign_chain(node, path)
                cands.append((Position(side, i, path), node))
    return cands


def _step_for(node: Formula, unwind_left: int):
    """(axiom_id, needs_solution, consumes_unwind) or None when stuck."""
    if isinstance(node, Diamond):
        return ("<>", False, False)
    prog = node.prog
    if isinstance(prog, Assign):
        return (":=", False, False)
    if isinstance(prog, Test):
        return ("?", False, False)
    if isinstance(prog, Choice):
        return ("++", False, False)
    if isinstance(prog, Seq):
        return (";", False, False)
    if isinstance(prog, Loop):
        if unwind_left > 0:
            return ("*", False, True)
        return None
    if isinstance(prog, ODE):
        sol = solve_ode(prog.eqs)
        if isinstance(sol, Unsolvable):
            return None
        if isinstance(prog.domain, TrueF):
            return ("'", True, False)
        return ("&", False, False)
    return None


def auto(ps: ProofState, cfg: Optional[AutoConfig] = None,
         goal_ids: Optional[List[int]] = None) -> Tuple[ProofState, AutoReport]:
    """Run symbolic execution on the selected goals (default: all open)."""
    cfg = cfg or AutoConfig()
    report = AutoReport()
    active = set(g for g, _ in ps.goals) if goal_ids is None else set(goal_ids)
    unwind: Dict[int, int] = {}
    done_with: set = set()

    while report.steps < cfg.max_steps:
        goal_id = None
        for gid, _ in ps.goals:
            if gid in active and gid not in done_with:
                goal_id = gid
                break
        if goal_id is None:
            break
        seq = ps.goal(goal_id)
        budget = unwind.get(goal_id, cfg.loop_unwind)
        step = None
        for pos, node in _candidate_positions(seq):
            got = _step_for(node, budget)
            if got is None:
                continue
            axiom_id, needs_solution, consumes = got
            inst = None
            if needs_solution:
                sol = solve_ode(node.prog.eqs, avoid_names={v.name for v in
                                                            seq.variables()})
                if isinstance(sol, Unsolvable):
                    continue
                inst = {"solution": sol}
            try:
                ps2 = apply_axiom(ps, goal_id, axiom_id, pos, inst)
            except (SideConditionError, NoMatch):
                continue
            new_ids = [gid for gid, _ in ps2.goals
                       if gid not in {g for g, _ in ps.goals}]
            for nid in new_ids:
                unwind[nid] = budget - 1 if consumes else budget
                active.add(nid)
            ps = ps2
            report.steps += 1
            step = axiom_id
            break
        if step is not None:
            continue
        # no modal step applies; try propositional splitting, then arithmetic
        prop = _propositional_step(seq)
        if prop is not None:
            rule_id, args = prop
            ps2 = apply_rule(ps, goal_id, rule_id, args)
            new_ids = [gid for gid, _ in ps2.goals
                       if gid not in {g for g, _ in ps.goals}]
            for nid in new_ids:
                unwind[nid] = budget
                active.add(nid)
            ps = ps2
            report.steps += 1
            continue
        try:
            ps = close_arith(ps, goal_id)
            report.steps += 1
        except NotClosed as exc:
            report.stuck[goal_id] = "not valid arithmetic"
            report.residuals[goal_id] = exc.residual
            done_with.add(goal_id)
        except (ModalitiesRemain, UnsupportedDegree, LiftError) as exc:
            report.stuck[goal_id] = str(exc)
            done_with.add(goal_id)
    return ps, report


def _propositional_step(seq: Sequent):
    """A safe splitting step that makes progress toward first-order goals."""
    for i, f in enumerate(seq.succ):
        if isinstance(f, ast.Imp) and _mentions_modality(f):
            return "implyR", {"index": i}
        if isinstance(f, ast.And) and _mentions_modality(f):
            return "andR", {"index": i}
        if isinstance(f, ast.Not) and _mentions_modality(f):
            return "notR", {"index": i}
    for i, f in enumerate(seq.ante):
        if isinstance(f, ast.And) and _mentions_modality(f):
            return "andL", {"index": i}
        if isinstance(f, ast.Not) and _mentions_modality(f):
            return "notL", {"index": i}
    return None


def _mentions_modality(f: Formula) -> bool:
    if isinstance(f, (Box, Diamond)):
        return True
    return any(_mentions_modality(c) for c in node_children(f)
               if isinstance(c, Formula))
