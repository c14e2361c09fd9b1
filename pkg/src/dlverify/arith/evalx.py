"""Exact evaluation of quantifier-free formulas on rational states.

This is the oracle every sampling test rests on, so it stays independent of
the polynomial layer: terms are evaluated by direct recursion on the tree.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from ..core import ast
from ..core.ast import (Cmp, FalseF, Formula, Not, Term, TrueF, Variable)

State = Mapping[Variable, Fraction]


def eval_term(t: Term, s: State) -> Fraction:
    if isinstance(t, ast.Const):
        return t.value
    if isinstance(t, ast.Var):
        try:
            return s[t.var]
        except KeyError:
            raise KeyError(f"variable {t.var} not in state") from None
    if isinstance(t, ast.Add):
        return eval_term(t.left, s) + eval_term(t.right, s)
    if isinstance(t, ast.Sub):
        return eval_term(t.left, s) - eval_term(t.right, s)
    if isinstance(t, ast.Mul):
        return eval_term(t.left, s) * eval_term(t.right, s)
    if isinstance(t, ast.Div):
        return eval_term(t.num, s) / eval_term(t.den, s)
    if isinstance(t, ast.Neg):
        return -eval_term(t.arg, s)
    raise TypeError(f"cannot evaluate term: {t!r}")


_REL = {
    ast.EQ: lambda a, b: a == b,
    ast.GE: lambda a, b: a >= b,
    ast.GT: lambda a, b: a > b,
    ast.LE: lambda a, b: a <= b,
    ast.LT: lambda a, b: a < b,
    ast.NE: lambda a, b: a != b,
}


def eval_exact(phi: Formula, s: State) -> bool:
    if isinstance(phi, TrueF):
        return True
    if isinstance(phi, FalseF):
        return False
    if isinstance(phi, Cmp):
        return _REL[phi.op](eval_term(phi.left, s), eval_term(phi.right, s))
    if isinstance(phi, Not):
        return not eval_exact(phi.arg, s)
    if isinstance(phi, ast.And):
        return eval_exact(phi.left, s) and eval_exact(phi.right, s)
    if isinstance(phi, ast.Or):
        return eval_exact(phi.left, s) or eval_exact(phi.right, s)
    if isinstance(phi, ast.Imp):
        return (not eval_exact(phi.left, s)) or eval_exact(phi.right, s)
    if isinstance(phi, ast.Iff):
        return eval_exact(phi.left, s) == eval_exact(phi.right, s)
    raise TypeError(f"eval_exact requires a quantifier-free, modal-free "
                    f"formula, got {phi!r}")
