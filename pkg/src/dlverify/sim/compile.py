"""Flattening of polynomial ODE systems and conjunctive domains for the
numeric integrators.

Both integrator backends (compiled and pure Python) consume the same
flattened form: per equation a list of (coefficient, exponent-vector) terms,
and the evolution domain as a list of atoms `poly rel 0` when it is a pure
conjunction (anything else falls back to tree evaluation in Python).
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from ..arith.poly import Poly
from ..arith.terms import normalize_poly
from ..core import ast
from ..core.ast import And, Cmp, Formula, Term, TrueF, Variable

REL_LE, REL_LT, REL_EQ = 0, 1, 2

FlatPoly = List[Tuple[float, Tuple[int, ...]]]


def flatten_poly(p: Poly, index: Dict[Variable, int], n: int) -> FlatPoly:
    out: FlatPoly = []
    for mono, coeff in sorted(p.coeffs.items(),
                              key=lambda it: (str(it[0]), float(it[1]))):
        exps = [0] * n
        for v, e in mono:
            exps[index[v]] = e
        out.append((float(coeff), tuple(exps)))
    return out


def eval_flat(fp: FlatPoly, y: Sequence[float]) -> float:
    total = 0.0
    for coeff, exps in fp:
        val = coeff
        for i, e in enumerate(exps):
            if e:
                base = y[i]
                for _ in range(e):
                    val *= base
        total += val
    return total


class FlatODE:
    """A polynomial vector field plus (optionally) a conjunctive domain."""

    def __init__(self, ode: Sequence[Tuple[Variable, Term]], domain: Formula,
                 ambient: Sequence[Variable]):
        self.ode_vars = [v for v, _ in ode]
        ambient_extra = [v for v in ambient if v not in self.ode_vars]
        self.variables: List[Variable] = self.ode_vars + ambient_extra
        self.index = {v: i for i, v in enumerate(self.variables)}
        n = len(self.variables)
        self.n_ode = len(self.ode_vars)
        self.rhs: List[FlatPoly] = [
            flatten_poly(normalize_poly(t), self.index, n) for _, t in ode]
        self.domain = domain
        self.domain_atoms = _conjunctive_atoms(domain, self.index, n)

    def deriv(self, y: Sequence[float]) -> List[float]:
        return [eval_flat(fp, y) for fp in self.rhs]

    def domain_holds(self, y: Sequence[float]) -> bool:
        if self.domain_atoms is not None:
            for fp, rel in self.domain_atoms:
                val = eval_flat(fp, y)
                if rel == REL_LE and not val <= 0.0:
                    return False
                if rel == REL_LT and not val < 0.0:
                    return False
                if rel == REL_EQ and val != 0.0:
                    return False
            return True
        state = {v: y[i] for v, i in self.index.items()}
        return _eval_formula_float(self.domain, state)


def _conjunctive_atoms(domain: Formula, index, n) -> Optional[List[Tuple[FlatPoly, int]]]:
    atoms: List[Tuple[FlatPoly, int]] = []

    def walk(f: Formula) -> bool:
        if isinstance(f, TrueF):
            return True
        if isinstance(f, And):
            return walk(f.left) and walk(f.right)
        if isinstance(f, Cmp):
            try:
                diff = normalize_poly(f.left) - normalize_poly(f.right)
            except Exception:
                return False
            if f.op == ast.LE:
                atoms.append((flatten_poly(diff, index, n), REL_LE))
            elif f.op == ast.LT:
                atoms.append((flatten_poly(diff, index, n), REL_LT))
            elif f.op == ast.GE:
                atoms.append((flatten_poly(-diff, index, n), REL_LE))
            elif f.op == ast.GT:
                atoms.append((flatten_poly(-diff, index, n), REL_LT))
            elif f.op == ast.EQ:
                atoms.append((flatten_poly(diff, index, n), REL_EQ))
            else:
                return False
            return True
        return False

    if walk(domain):
        return atoms
    return None


def _eval_formula_float(f: Formula, state: Dict[Variable, float]) -> bool:
    from .floats import eval_formula_float
    return eval_formula_float(f, state)
