"""Closed-form polynomial flows for nilpotent-triangularizable ODE systems.

Solving proceeds by dependency order: a component whose right-hand side
mentions only already-solved components (after substitution it is polynomial
in t) integrates formally; if no component can make progress the system has
no polynomial flow and `Unsolvable` is returned.  Verification by formal
differentiation is a separate code path so the kernel can re-check any
solution it is handed.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .arith.poly import Poly
from .arith.terms import normalize_poly, term_from_poly
from .core.ast import Term, Variable
from .core.vars import signature, term_vars

_TIME_PREFIX = "t$"


@dataclass(frozen=True)
class Solution:
    """Polynomial flow y(t) with y(0) = initial symbols."""

    time: Variable
    assignments: Tuple[Tuple[Variable, Term], ...]

    def term_for(self, v: Variable) -> Term:
        for x, t in self.assignments:
            if x == v:
                return t
        raise KeyError(f"{v} not part of the solution")


class Unsolvable:
    """Marker: the system has no polynomial flow in the supported class."""

    def __init__(self, reason: str):
        self.reason = reason

    def __repr__(self) -> str:
        return f"Unsolvable({self.reason!r})"


def fresh_time_variable(ode: Sequence[Tuple[Variable, Term]],
                        extra_taken: Iterable[str] = ()) -> Variable:
    taken = set(extra_taken)
    for v, rhs in ode:
        taken.add(v.name)
        taken |= signature(rhs)
    i = 1
    while f"{_TIME_PREFIX}{i}" in taken:
        i += 1
    return Variable(f"{_TIME_PREFIX}{i}")


def _integrate(p: Poly, t: Variable) -> Poly:
    """Formal integral in t with zero constant term."""
    out: Dict = {}
    for m, c in p.coeffs.items():
        e = 0
        rest = []
        for mv, me in m:
            if mv == t:
                e = me
            else:
                rest.append((mv, me))
        rest.append((t, e + 1))
        rest.sort(key=lambda it: (it[0].name, it[0].kind))
        out[tuple(rest)] = c / (e + 1)
    q = Poly.__new__(Poly)
    q.coeffs = out
    q._hash = None
    return q


def solve_ode(ode: Sequence[Tuple[Variable, Term]],
              avoid_names: Iterable[str] = ()) -> Union[Solution, Unsolvable]:
    """Symbolic flow for the initial-value problem y(0) = y, y'(t) = rhs(y)."""
    t = fresh_time_variable(ode, avoid_names)
    unsolved: Dict[Variable, Poly] = {}
    for v, rhs in ode:
        unsolved[v] = normalize_poly(rhs)
    ode_vars = set(unsolved)
    solved: Dict[Variable, Poly] = {}

    while unsolved:
        progress = None
        for v, rhs in unsolved.items():
            deps = rhs.variables() & ode_vars
            if deps <= set(solved):
                progress = v
                break
        if progress is None:
            cyclic = ", ".join(sorted(v.name for v in unsolved))
            return Unsolvable(f"cyclic dependency among {{{cyclic}}}")
        rhs = unsolved.pop(progress).subst(solved)
        solved[progress] = Poly.var(progress) + _integrate(rhs, t)

    assignments = tuple((v, term_from_poly(solved[v])) for v, _ in ode)
    return Solution(t, assignments)


def verify_solution(ode: Sequence[Tuple[Variable, Term]], sol: Solution) -> bool:
    """Check d/dt sol_x = rhs(sol) for every component and sol(0) = identity."""
    lhs_vars = [v for v, _ in ode]
    if [v for v, _ in sol.assignments] != lhs_vars:
        return False
    flows: Dict[Variable, Poly] = {}
    for v, term in sol.assignments:
        flows[v] = normalize_poly(term)
    zero_env = {sol.time: Poly()}
    for v, rhs in ode:
        flow = flows[v]
        if flow.subst(zero_env) != Poly.var(v):
            return False
        if flow.derivative(sol.time) != normalize_poly(rhs).subst(flows):
            return False
    return True
