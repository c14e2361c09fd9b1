"""Admissible substitution of a term for a free variable.

Capture is an error, never silent renaming: callers that want renaming
(tactics) must rename with fresh names before substituting.  A substitution
clashes when a free occurrence of x lies in the scope of a quantifier or
modality that binds x or a variable of the replacement term.
"""
from __future__ import annotations

from . import ast
from .ast import (Assign, AssignAny, Box, Choice, Cmp, Diamond, Exists,
                  FalseF, Forall, Formula, IfElse, Loop, Not, ODE, Program,
                  Seq, Term, Test, TrueF, Var, Variable, While)
from .vars import bound_vars, free_vars, term_vars


class ClashError(Exception):
    """Substituting would capture a variable; the caller must rename or refuse."""


def subst_term(t: Term, x: Variable, rep: Term) -> Term:
    """Replace every occurrence of x in term t by rep (terms have no binders)."""
    if isinstance(t, ast.Const):
        return t
    if isinstance(t, Var):
        return rep if t.var == x else t
    if isinstance(t, ast.Add):
        return ast.Add(subst_term(t.left, x, rep), subst_term(t.right, x, rep))
    if isinstance(t, ast.Sub):
        return ast.Sub(subst_term(t.left, x, rep), subst_term(t.right, x, rep))
    if isinstance(t, ast.Mul):
        return ast.Mul(subst_term(t.left, x, rep), subst_term(t.right, x, rep))
    if isinstance(t, ast.Div):
        return ast.div(subst_term(t.num, x, rep), subst_term(t.den, x, rep))
    if isinstance(t, ast.Neg):
        return ast.neg(subst_term(t.arg, x, rep))
    if isinstance(t, ast.FuncApp):
        return ast.FuncApp(t.fname, tuple(subst_term(a, x, rep) for a in t.args))
    raise TypeError(f"not a term: {t!r}")


def admissible_substitute(phi: Formula, x: Variable, rep: Term) -> Formula:
    """phi with every free occurrence of x replaced by rep, or ClashError."""
    return _subst_formula(phi, x, rep, term_vars(rep))


def _subst_formula(phi: Formula, x: Variable, rep: Term, rep_vars) -> Formula:
    if isinstance(phi, (TrueF, FalseF)):
        return phi
    if isinstance(phi, Cmp):
        return Cmp(subst_term(phi.left, x, rep), phi.op, subst_term(phi.right, x, rep))
    if isinstance(phi, Not):
        return Not(_subst_formula(phi.arg, x, rep, rep_vars))
    if isinstance(phi, (ast.And, ast.Or, ast.Imp, ast.Iff)):
        cls = type(phi)
        return cls(_subst_formula(phi.left, x, rep, rep_vars),
                   _subst_formula(phi.right, x, rep, rep_vars))
    if isinstance(phi, (Forall, Exists)):
        if phi.var == x:
            return phi  # no free occurrences of x below
        if x not in free_vars(phi.body):
            return phi
        if phi.var in rep_vars:
            raise ClashError(
                f"substituting {rep_vars_str(rep_vars)} for {x} under binder of {phi.var}")
        cls = type(phi)
        return cls(phi.var, _subst_formula(phi.body, x, rep, rep_vars))
    if isinstance(phi, (Box, Diamond)):
        bv = bound_vars(phi.prog)
        occurs = x in free_vars(phi.prog) or x in free_vars(phi.post)
        if not occurs and x not in bv:
            return phi
        if x in bv:
            if occurs:
                raise ClashError(f"{x} occurs in the scope of a modality binding {x}")
            return phi
        if bv & rep_vars:
            clashing = sorted(v.name for v in bv & rep_vars)
            raise ClashError(
                f"modality binds {', '.join(clashing)} occurring in the replacement")
        cls = type(phi)
        return cls(_subst_program(phi.prog, x, rep, rep_vars),
                   _subst_formula(phi.post, x, rep, rep_vars))
    raise TypeError(f"not a formula: {phi!r}")


def _subst_program(p: Program, x: Variable, rep: Term, rep_vars) -> Program:
    # Only reached when x is not bound anywhere in p and p binds no rep var,
    # so every occurrence of x inside p refers to the initial state.
    if isinstance(p, Assign):
        return Assign(p.var, subst_term(p.term, x, rep))
    if isinstance(p, AssignAny):
        return p
    if isinstance(p, Test):
        return Test(_subst_formula(p.cond, x, rep, rep_vars))
    if isinstance(p, ODE):
        return ODE(tuple((v, subst_term(rhs, x, rep)) for v, rhs in p.eqs),
                   _subst_formula(p.domain, x, rep, rep_vars))
    if isinstance(p, Choice):
        return Choice(_subst_program(p.left, x, rep, rep_vars),
                      _subst_program(p.right, x, rep, rep_vars))
    if isinstance(p, Seq):
        return Seq(_subst_program(p.first, x, rep, rep_vars),
                   _subst_program(p.second, x, rep, rep_vars))
    if isinstance(p, Loop):
        return Loop(_subst_program(p.body, x, rep, rep_vars))
    if isinstance(p, IfElse):
        els = None if p.else_ is None else _subst_program(p.else_, x, rep, rep_vars)
        return IfElse(_subst_formula(p.cond, x, rep, rep_vars),
                      _subst_program(p.then_, x, rep, rep_vars), els)
    if isinstance(p, While):
        return While(_subst_formula(p.cond, x, rep, rep_vars),
                     _subst_program(p.body, x, rep, rep_vars))
    raise TypeError(f"not a program: {p!r}")


def rep_vars_str(rep_vars) -> str:
    return "{" + ", ".join(sorted(str(v) for v in rep_vars)) + "}"


def rename_bound(phi: Formula, old: Variable, new: Variable) -> Formula:
    """Rename one outermost quantifier binding `old` to `new` (alpha conversion).

    Utility for tactics; raises ClashError if `new` is not fresh for the body.
    """
    if isinstance(phi, (Forall, Exists)) and phi.var == old:
        if new in free_vars(phi.body) or new in bound_vars(phi.body):
            raise ClashError(f"{new} is not fresh in the quantifier body")
        cls = type(phi)
        return cls(new, admissible_substitute(phi.body, old, Var(new)))
    raise ValueError("formula does not start with a quantifier binding the variable")
