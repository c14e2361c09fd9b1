"""Elimination of extended program constructs.

x := *            ~>  x'=1 ++ x'=-1
if (c) {a} else {b} ~> (?c; a) ++ (?!c; b)
if (c) {a}          ~> (?c; a) ++ ?!c
while (c) {a}       ~> (?c; a)*; ?!c
"""
from __future__ import annotations

from fractions import Fraction

from . import ast
from .ast import (Assign, AssignAny, Choice, Const, Formula, IfElse, Loop,
                  ODE, ONE, Program, Seq, Test, TRUE, While, lnot)


def desugar(p: Program) -> Program:
    if isinstance(p, (Assign, Test, ODE)):
        return p
    if isinstance(p, AssignAny):
        up = ODE(((p.var, ONE),), TRUE)
        down = ODE(((p.var, Const(Fraction(-1))),), TRUE)
        return Choice(up, down)
    if isinstance(p, Choice):
        return Choice(desugar(p.left), desugar(p.right))
    if isinstance(p, Seq):
        return Seq(desugar(p.first), desugar(p.second))
    if isinstance(p, Loop):
        return Loop(desugar(p.body))
    if isinstance(p, IfElse):
        then_branch = Seq(Test(p.cond), desugar(p.then_))
        if p.else_ is None:
            return Choice(then_branch, Test(lnot(p.cond)))
        return Choice(then_branch, Seq(Test(lnot(p.cond)), desugar(p.else_)))
    if isinstance(p, While):
        return Seq(Loop(Seq(Test(p.cond), desugar(p.body))), Test(lnot(p.cond)))
    raise TypeError(f"not a program: {p!r}")


def desugar_formula(f: Formula) -> Formula:
    """Desugar every program occurring inside modalities of f."""
    if isinstance(f, (ast.TrueF, ast.FalseF, ast.Cmp)):
        return f
    if isinstance(f, ast.Not):
        return ast.Not(desugar_formula(f.arg))
    if isinstance(f, (ast.And, ast.Or, ast.Imp, ast.Iff)):
        return type(f)(desugar_formula(f.left), desugar_formula(f.right))
    if isinstance(f, (ast.Forall, ast.Exists)):
        return type(f)(f.var, desugar_formula(f.body))
    if isinstance(f, (ast.Box, ast.Diamond)):
        return type(f)(desugar(f.prog), desugar_formula(f.post))
    raise TypeError(f"not a formula: {f!r}")
