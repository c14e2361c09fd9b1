"""Checked application of the dynamic-logic axioms.

Equivalence axioms act as position-based rewrites (sound in any context by
congruence); the implication axioms K, I, C, B, V replace a top-level
succedent formula matching their conclusion by their premise (modus-ponens
discipline).  Every side condition is enforced here: substitution
admissibility for assignments, verified solutions and fresh time variables
for differential equations, variable-occurrence conditions for C, B, and V.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from ..core import ast
from ..core.ast import (Add, Assign, Box, Choice, Cmp, Diamond, Exists,
                        Forall, Formula, GE, Imp, Loop, Not, ODE, Program,
                        Seq, Term, Test, TrueF, Var, Variable, conj)
from ..core.subst import ClashError, admissible_substitute, subst_term
from ..core.vars import (all_vars, bound_vars, free_vars, fresh_variable,
                         signature)
from ..odesolve import Solution, verify_solution
from .sequent import Position, PositionError, Sequent

# Positive-position discipline: an equivalence axiom rewrites anywhere (by
# congruence); an implication axiom A -> C may replace C by A only where the
# replacement strengthens the goal, i.e. at positive succedent positions.


class NoMatch(Exception):
    """The subformula at the position does not match the axiom's shape."""


class SideConditionError(Exception):
    """An axiom side condition failed; carries the detail."""


EQUIVALENCE_AXIOMS = (":=", "?", "'", "&", "++", ";", "*", "<>")
IMPLICATION_AXIOMS = ("K", "I", "C", "B", "V")


def taken_names(seq: Sequent) -> frozenset:
    names = set()
    for f in seq.ante + seq.succ:
        names |= signature(f)
    return frozenset(names)


# --------------------------------------------------------------- assignments


def _solution_assignments(ode_vars: Sequence[Variable],
                          terms: Dict[Variable, Term],
                          taken: frozenset) -> List[Assign]:
    """Sequential assignments realizing the simultaneous update x := y(t).

    Ordered so no right-hand side reads a variable assigned earlier; when the
    read graph is cyclic, fresh backup variables hold the initial values.
    """
    remaining = list(ode_vars)
    order: List[Variable] = []
    while remaining:
        progress = None
        for v in remaining:
            # v may be assigned now if no later assignment reads v
            if all(v not in free_vars_term(terms[w]) for w in remaining if w != v):
                progress = v
                break
        if progress is None:
            break
        order.append(progress)
        remaining.remove(progress)
    if not remaining:
        return [Assign(v, terms[v]) for v in order]
    # cyclic reads: save initial values first (vectorial-assignment encoding)
    backups: Dict[Variable, Variable] = {}
    names = set(taken)
    out: List[Assign] = []
    for v in ode_vars:
        b = fresh_variable(f"{v.name}_0", frozenset(names))
        names.add(b.name)
        backups[v] = b
        out.append(Assign(b, Var(v)))
    for v in ode_vars:
        t = terms[v]
        for w, b in backups.items():
            t = subst_term(t, w, Var(b))
        out.append(Assign(v, t))
    return out


def free_vars_term(t: Term):
    from ..core.vars import term_vars
    return term_vars(t)


# ------------------------------------------------------------------ rewrites


def _rewrite(node: Formula, axiom_id: str, inst: Optional[dict],
             taken: frozenset) -> Formula:
    """The right-hand side for an equivalence axiom applied at `node`."""
    if axiom_id == ":=":
        if not (isinstance(node, Box) and isinstance(node.prog, Assign)):
            raise NoMatch("[:=] expects [x := e] p")
        try:
            return admissible_substitute(node.post, node.prog.var,
                                         node.prog.term)
        except ClashError as exc:
            raise SideConditionError(f"substitution clash: {exc}") from None
    if axiom_id == "?":
        if not (isinstance(node, Box) and isinstance(node.prog, Test)):
            raise NoMatch("[?] expects [?q] p")
        return Imp(node.prog.cond, node.post)
    if axiom_id == "++":
        if not (isinstance(node, Box) and isinstance(node.prog, Choice)):
            raise NoMatch("[++] expects [a ++ b] p")
        return ast.And(Box(node.prog.left, node.post),
                       Box(node.prog.right, node.post))
    if axiom_id == ";":
        if not (isinstance(node, Box) and isinstance(node.prog, Seq)):
            raise NoMatch("[;] expects [a; b] p")
        return Box(node.prog.first, Box(node.prog.second, node.post))
    if axiom_id == "*":
        if not (isinstance(node, Box) and isinstance(node.prog, Loop)):
            raise NoMatch("[*] expects [{a}*] p")
        return ast.And(node.post,
                       Box(node.prog.body, Box(node.prog, node.post)))
    if axiom_id == "<>":
        if not isinstance(node, Diamond):
            raise NoMatch("<> expects <a> p")
        return Not(Box(node.prog, Not(node.post)))
    if axiom_id == "'":
        return _rewrite_solution(node, inst, taken)
    if axiom_id == "&":
        return _rewrite_domain(node, taken)
    raise NoMatch(f"unknown equivalence axiom {axiom_id!r}")


def _rewrite_solution(node: Formula, inst: Optional[dict],
                      taken: frozenset) -> Formula:
    if not (isinstance(node, Box) and isinstance(node.prog, ODE)):
        raise NoMatch("['] expects [x' = e] p")
    prog = node.prog
    if not isinstance(prog.domain, TrueF):
        raise SideConditionError(
            "['] applies to domain-free differential equations; use [&] first")
    sol = (inst or {}).get("solution")
    if not isinstance(sol, Solution):
        raise SideConditionError("['] needs a Solution instance")
    if not verify_solution(prog.eqs, sol):
        raise SideConditionError("solution failed verification against the ODE")
    t = sol.time
    if t.name in taken:
        raise SideConditionError(f"time variable {t} is not fresh for the goal")
    terms = {v: term for v, term in sol.assignments}
    assigns = _solution_assignments([v for v, _ in prog.eqs], terms, taken)
    body: Formula = node.post
    for a in reversed(assigns):
        body = Box(a, body)
    return Forall(t, Imp(Cmp(Var(t), GE, ast.ZERO), body))


def _rewrite_domain(node: Formula, taken: frozenset) -> Formula:
    if not (isinstance(node, Box) and isinstance(node.prog, ODE)):
        raise NoMatch("[&] expects [x' = e & q] p")
    prog = node.prog
    if isinstance(prog.domain, TrueF):
        raise NoMatch("[&] is for constrained evolutions; domain is true")
    names = set(taken)
    clock = fresh_variable("c", frozenset(names))
    names.add(clock.name)
    t0 = fresh_variable("t0", frozenset(names))
    forward = ODE(prog.eqs + ((clock, ast.ONE),), ast.TRUE)
    backward = ODE(tuple((v, ast.neg(rhs)) for v, rhs in prog.eqs)
                   + ((clock, ast.const(-1)),), ast.TRUE)
    check = Box(backward, Imp(Cmp(Var(clock), GE, Var(t0)), prog.domain))
    inner = Box(forward, Imp(check, node.post))
    return Forall(t0, Imp(Cmp(Var(t0), ast.EQ, Var(clock)), inner))


# ------------------------------------------------------- implication axioms


def _premise_of(axiom_id: str, node: Formula) -> Formula:
    """Premise A of an implication axiom A -> C whose conclusion C matches."""
    if axiom_id == "K":
        if not (isinstance(node, Imp) and isinstance(node.left, Box)
                and isinstance(node.right, Box)
                and node.left.prog == node.right.prog):
            raise NoMatch("K expects [a]p -> [a]q")
        return Box(node.left.prog, Imp(node.left.post, node.right.post))
    if axiom_id == "I":
        if not (isinstance(node, Imp) and isinstance(node.right, Box)
                and isinstance(node.right.prog, Loop)
                and node.left == node.right.post):
            raise NoMatch("I expects p -> [{a}*]p")
        alpha = node.right.prog
        p = node.left
        return Box(alpha, Imp(p, Box(alpha.body, p)))
    if axiom_id == "C":
        # forall v (p(v) -> <{a}*> exists v (v<=0 & p(v)))
        if not isinstance(node, Forall):
            raise NoMatch("C expects forall v (p -> <{a}*> exists v (v<=0 & p))")
        v = node.var
        body = node.body
        if not (isinstance(body, Imp) and isinstance(body.right, Diamond)
                and isinstance(body.right.prog, Loop)):
            raise NoMatch("C conclusion shape mismatch")
        p = body.left
        target = body.right.post
        expected = Exists(v, ast.And(Cmp(Var(v), ast.LE, ast.ZERO), p))
        if target != expected:
            raise NoMatch("C conclusion shape mismatch")
        alpha = body.right.prog
        if v in all_vars(alpha):
            raise SideConditionError(f"C requires {v} not to occur in the loop")
        step = admissible_substitute(p, v, ast.Sub(Var(v), ast.ONE))
        premise = Box(alpha, Forall(v, Imp(Cmp(Var(v), ast.GT, ast.ZERO),
                                           Imp(p, Diamond(alpha.body, step)))))
        return premise
    if axiom_id == "B":
        if not (isinstance(node, Box) and isinstance(node.post, Forall)):
            raise NoMatch("B expects [a] forall x p")
        x = node.post.var
        if x in all_vars(node.prog):
            raise SideConditionError(f"B requires {x} not to occur in the program")
        return Forall(x, Box(node.prog, node.post.body))
    if axiom_id == "V":
        if not isinstance(node, Box):
            raise NoMatch("V expects [a] p")
        overlap = free_vars(node.post) & bound_vars(node.prog)
        if overlap:
            names = ", ".join(sorted(v.name for v in overlap))
            raise SideConditionError(
                f"V requires FV(p) and BV(a) disjoint; shared: {names}")
        return node.post
    raise NoMatch(f"unknown implication axiom {axiom_id!r}")


def axiom_subgoals(seq: Sequent, axiom_id: str, pos: Position,
                   inst: Optional[dict]) -> List[Sequent]:
    """Subgoals from applying the axiom at the position (checked)."""
    if axiom_id in EQUIVALENCE_AXIOMS:
        node, _ = seq.subnode_at(pos)
        if not isinstance(node, Formula):
            raise PositionError("equivalence axioms rewrite formulas; "
                                "the position addresses a program")
        new = _rewrite(node, axiom_id, inst, taken_names(seq))
        return [seq.replace(pos, new)]
    if axiom_id in IMPLICATION_AXIOMS:
        node, polarity = seq.subnode_at(pos)
        if pos.side != "succ" or polarity != 1:
            raise PositionError(
                "implication axioms apply only at positive succedent positions")
        if not isinstance(node, Formula):
            raise PositionError("position addresses a program")
        premise = _premise_of(axiom_id, node)
        return [seq.replace(pos, premise)]
    raise NoMatch(f"unknown axiom {axiom_id!r}")
