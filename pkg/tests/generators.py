"""Seeded random generators shared by the property suites."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, List

from dlverify.core import ast
from dlverify.core.ast import (Assign, Choice, Cmp, Const, Formula, Loop,
                               Program, Seq, Term, Test, Var, Variable)

VARS = [Variable(n) for n in ("x", "y", "z")]


def rand_fraction(rng: random.Random, span: int = 4) -> Fraction:
    num = rng.randint(-span, span)
    den = rng.choice((1, 1, 2, 3))
    return Fraction(num, den)


def rand_state(rng: random.Random, variables=None) -> Dict[Variable, Fraction]:
    return {v: rand_fraction(rng) for v in (variables or VARS)}


def rand_term(rng: random.Random, depth: int = 2) -> Term:
    if depth <= 0 or rng.random() < 0.4:
        if rng.random() < 0.5:
            return Const(rand_fraction(rng))
        return Var(rng.choice(VARS))
    op = rng.choice(("add", "sub", "mul", "neg"))
    if op == "neg":
        inner = rand_term(rng, depth - 1)
        return ast.neg(inner) if not isinstance(inner, Const) \
            else Const(-inner.value)
    left = rand_term(rng, depth - 1)
    right = rand_term(rng, depth - 1)
    cls = {"add": ast.Add, "sub": ast.Sub, "mul": ast.Mul}[op]
    return cls(left, right)


def rand_qf_formula(rng: random.Random, depth: int = 2) -> Formula:
    if depth <= 0 or rng.random() < 0.45:
        rel = rng.choice(ast.RELATIONS)
        return Cmp(rand_term(rng, 1), rel, rand_term(rng, 1))
    op = rng.choice(("and", "or", "not", "imp"))
    if op == "not":
        return ast.Not(rand_qf_formula(rng, depth - 1))
    cls = {"and": ast.And, "or": ast.Or, "imp": ast.Imp}[op]
    return cls(rand_qf_formula(rng, depth - 1), rand_qf_formula(rng, depth - 1))


def parse_primed(text: str, entry: str = "formula"):
    """Parse with `<name>_p` identifiers standing for primed variables."""
    from dlverify.parser import parse as _parse

    def fix_term(t: Term) -> Term:
        if isinstance(t, Var) and t.var.name.endswith("_p"):
            return Var(Variable(t.var.name[:-2], ast.DIFF))
        if isinstance(t, (Const, Var)):
            return t
        if isinstance(t, (ast.Add, ast.Sub, ast.Mul)):
            return type(t)(fix_term(t.left), fix_term(t.right))
        if isinstance(t, ast.Div):
            return ast.div(fix_term(t.num), fix_term(t.den))
        if isinstance(t, ast.Neg):
            return ast.neg(fix_term(t.arg))
        raise TypeError(t)

    def fix(f):
        if isinstance(f, Cmp):
            return Cmp(fix_term(f.left), f.op, fix_term(f.right))
        if isinstance(f, (ast.TrueF, ast.FalseF)):
            return f
        if isinstance(f, ast.Not):
            return ast.Not(fix(f.arg))
        if isinstance(f, (ast.And, ast.Or, ast.Imp, ast.Iff)):
            return type(f)(fix(f.left), fix(f.right))
        raise TypeError(f)

    node = _parse(text, entry)
    return fix_term(node) if entry == "term" else fix(node)


def rand_discrete_program(rng: random.Random, depth: int = 3) -> Program:
    """ODE-free program whose loops saturate quickly (for exact evaluation)."""
    if depth <= 0 or rng.random() < 0.35:
        if rng.random() < 0.6:
            return Assign(rng.choice(VARS), rand_term(rng, 1))
        return Test(rand_qf_formula(rng, 1))
    op = rng.choice(("seq", "choice", "seq", "choice", "loop"))
    if op == "loop":
        # constant-range bodies keep the reachable set finite
        body = Choice(Assign(rng.choice(VARS), Const(rand_fraction(rng))),
                      Test(rand_qf_formula(rng, 1)))
        return Loop(body)
    cls = Seq if op == "seq" else Choice
    return cls(rand_discrete_program(rng, depth - 1),
               rand_discrete_program(rng, depth - 1))
