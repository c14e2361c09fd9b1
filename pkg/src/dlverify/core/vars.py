"""Free/bound variable analysis with the standard static over-approximation.

``bound`` collects variables written by assignments, ODEs, or quantifiers.
``free`` collects variables whose *initial* value the meaning can depend on;
sequential composition subtracts the must-bound set of the prefix, so that
``a:=-b; {x'=v,v'=a}`` does not report ``a`` free.
"""
from __future__ import annotations

from typing import FrozenSet, Tuple

from . import ast
from .ast import (Assign, AssignAny, Box, Choice, Cmp, Diamond, Exists,
                  FalseF, Forall, Formula, IfElse, Loop, Not, ODE, Program,
                  Seq, Term, Test, TrueF, Variable, While)

VarSet = FrozenSet[Variable]

EMPTY: VarSet = frozenset()


def term_vars(t: Term) -> VarSet:
    return frozenset(n.var for n in ast.walk_terms(t) if isinstance(n, ast.Var))


def _formula_analysis(f: Formula) -> Tuple[VarSet, VarSet]:
    """Return (free, bound) of a formula."""
    if isinstance(f, (TrueF, FalseF)):
        return EMPTY, EMPTY
    if isinstance(f, Cmp):
        return term_vars(f.left) | term_vars(f.right), EMPTY
    if isinstance(f, Not):
        return _formula_analysis(f.arg)
    if isinstance(f, (ast.And, ast.Or, ast.Imp, ast.Iff)):
        fl, bl = _formula_analysis(f.left)
        fr, br = _formula_analysis(f.right)
        return fl | fr, bl | br
    if isinstance(f, (Forall, Exists)):
        fb, bb = _formula_analysis(f.body)
        return fb - {f.var}, bb | {f.var}
    if isinstance(f, (Box, Diamond)):
        fp, bp, mp = _program_analysis(f.prog)
        fb, bb = _formula_analysis(f.post)
        return fp | (fb - mp), bp | bb
    raise TypeError(f"not a formula: {f!r}")


def _program_analysis(p: Program) -> Tuple[VarSet, VarSet, VarSet]:
    """Return (free, bound, must_bound) of a program.

    must_bound: variables written on every path, hence shadowing later reads.
    """
    if isinstance(p, Assign):
        return term_vars(p.term), frozenset({p.var}), frozenset({p.var})
    if isinstance(p, AssignAny):
        return EMPTY, frozenset({p.var}), frozenset({p.var})
    if isinstance(p, Test):
        ff, bf = _formula_analysis(p.cond)
        return ff, bf, EMPTY
    if isinstance(p, ODE):
        lhs = frozenset(p.vars)
        free = frozenset(lhs)
        for _, rhs in p.eqs:
            free |= term_vars(rhs)
        fd, bd = _formula_analysis(p.domain)
        # ODE variables evolve from their initial values, so they are free too.
        return free | fd, lhs | bd, lhs
    if isinstance(p, Choice):
        f1, b1, m1 = _program_analysis(p.left)
        f2, b2, m2 = _program_analysis(p.right)
        return f1 | f2, b1 | b2, m1 & m2
    if isinstance(p, Seq):
        f1, b1, m1 = _program_analysis(p.first)
        f2, b2, m2 = _program_analysis(p.second)
        return f1 | (f2 - m1), b1 | b2, m1 | m2
    if isinstance(p, Loop):
        f1, b1, _ = _program_analysis(p.body)
        return f1, b1, EMPTY  # zero iterations possible
    if isinstance(p, IfElse):
        fc, bc = _formula_analysis(p.cond)
        f1, b1, m1 = _program_analysis(p.then_)
        if p.else_ is None:
            return fc | f1, bc | b1, EMPTY
        f2, b2, m2 = _program_analysis(p.else_)
        return fc | f1 | f2, bc | b1 | b2, m1 & m2
    if isinstance(p, While):
        fc, bc = _formula_analysis(p.cond)
        f1, b1, _ = _program_analysis(p.body)
        return fc | f1, bc | b1, EMPTY
    raise TypeError(f"not a program: {p!r}")


def var_analysis(e) -> Tuple[VarSet, VarSet]:
    """Free and bound variables of a term, formula, or program."""
    if isinstance(e, Term):
        return term_vars(e), EMPTY
    if isinstance(e, Formula):
        return _formula_analysis(e)
    if isinstance(e, Program):
        f, b, _ = _program_analysis(e)
        return f, b
    raise TypeError(f"expected term/formula/program, got {e!r}")


def free_vars(e) -> VarSet:
    return var_analysis(e)[0]


def bound_vars(e) -> VarSet:
    return var_analysis(e)[1]


def must_bound_vars(p: Program) -> VarSet:
    return _program_analysis(p)[2]


def all_vars(e) -> VarSet:
    f, b = var_analysis(e)
    return f | b


def signature(e) -> FrozenSet[str]:
    """All variable names occurring in e (base or differential)."""
    return frozenset(v.name for v in all_vars(e))


def fresh_variable(base: str, taken: FrozenSet[str]) -> Variable:
    """A base-kind variable whose name avoids every name in `taken`."""
    if base not in taken:
        return Variable(base)
    i = 1
    while f"{base}${i}" in taken:
        i += 1
    return Variable(f"{base}${i}")
