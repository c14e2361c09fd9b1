"""Floating-point evaluation of terms and quantifier-free formulas."""
from __future__ import annotations

from typing import Dict, Mapping

from ..core import ast
from ..core.ast import Cmp, FalseF, Formula, Not, Term, TrueF, Variable

FState = Mapping[Variable, float]


def eval_term_float(t: Term, s: FState) -> float:
    if isinstance(t, ast.Const):
        return float(t.value)
    if isinstance(t, ast.Var):
        return s[t.var]
    if isinstance(t, ast.Add):
        return eval_term_float(t.left, s) + eval_term_float(t.right, s)
    if isinstance(t, ast.Sub):
        return eval_term_float(t.left, s) - eval_term_float(t.right, s)
    if isinstance(t, ast.Mul):
        return eval_term_float(t.left, s) * eval_term_float(t.right, s)
    if isinstance(t, ast.Div):
        return eval_term_float(t.num, s) / eval_term_float(t.den, s)
    if isinstance(t, ast.Neg):
        return -eval_term_float(t.arg, s)
    raise TypeError(f"cannot evaluate term: {t!r}")


_REL = {
    ast.EQ: lambda a, b: a == b,
    ast.GE: lambda a, b: a >= b,
    ast.GT: lambda a, b: a > b,
    ast.LE: lambda a, b: a <= b,
    ast.LT: lambda a, b: a < b,
    ast.NE: lambda a, b: a != b,
}


def eval_formula_float(phi: Formula, s: FState) -> bool:
    if isinstance(phi, TrueF):
        return True
    if isinstance(phi, FalseF):
        return False
    if isinstance(phi, Cmp):
        return _REL[phi.op](eval_term_float(phi.left, s),
                            eval_term_float(phi.right, s))
    if isinstance(phi, Not):
        return not eval_formula_float(phi.arg, s)
    if isinstance(phi, ast.And):
        return eval_formula_float(phi.left, s) and eval_formula_float(phi.right, s)
    if isinstance(phi, ast.Or):
        return eval_formula_float(phi.left, s) or eval_formula_float(phi.right, s)
    if isinstance(phi, ast.Imp):
        return (not eval_formula_float(phi.left, s)) \
            or eval_formula_float(phi.right, s)
    if isinstance(phi, ast.Iff):
        return eval_formula_float(phi.left, s) == eval_formula_float(phi.right, s)
    raise TypeError(f"float evaluation needs a quantifier-free formula: {phi!r}")


def atom_margin(phi: Formula, s: FState) -> float:
    """How robustly the comparison phi holds (negative when violated)."""
    if not isinstance(phi, Cmp):
        raise TypeError("margin is defined on comparisons")
    a = float(eval_term_float(phi.left, s))
    b = float(eval_term_float(phi.right, s))
    if phi.op in (ast.GE, ast.GT):
        return a - b
    if phi.op in (ast.LE, ast.LT):
        return b - a
    if phi.op == ast.EQ:
        return -abs(a - b)
    return abs(a - b)  # !=
