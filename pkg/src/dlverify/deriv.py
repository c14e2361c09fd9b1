"""Syntactic total derivation and its companions.

`derive_term` maps a term to its total differential over primed variables
(x becomes x'), `derive_formula` lifts it conjunctively to quantifier-free
formulas, and `diff_subst` replaces each primed variable by the right-hand
side of its differential equation (absent variables count as constant, so
their primes become zero).  `weak_negate` and `eps_strengthen` supply the
boundary-retaining negation and minimum-progress strengthening used for
progress arguments over ODEs.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Tuple

from .core import ast
from .core.ast import (Add, And, Cmp, Const, Div, EQ, FalseF, Formula, GE,
                       GT, LE, LT, Mul, NE, Neg, Not, Or, Sub, Term, TrueF,
                       Var, Variable)
from .core.subst import subst_term


class NormalFormError(Exception):
    """Input must be negation-free with dualities applied."""


class EqualityError(Exception):
    """Equalities are not permitted here (weak negation / strengthening)."""


def _as_power(t: Term):
    """(base, k) when t is a left-nested product of one repeated factor."""
    if not isinstance(t, Mul):
        return None
    base = t.right
    cur = t.left
    count = 1
    while isinstance(cur, Mul) and cur.right == base:
        count += 1
        cur = cur.left
    if cur == base:
        return base, count + 1
    return None


def derive_term(t: Term) -> Term:
    """Total derivative: constants to 0, x to x', with sum/product/quotient
    rules (powers x^n derive directly to n*x^(n-1)*x')."""
    if isinstance(t, Const):
        return ast.ZERO
    if isinstance(t, Var):
        if t.var.is_differential:
            raise ValueError("cannot derive an already-primed variable")
        return Var(t.var.prime())
    if isinstance(t, Add):
        return Add(derive_term(t.left), derive_term(t.right))
    if isinstance(t, Sub):
        return Sub(derive_term(t.left), derive_term(t.right))
    if isinstance(t, Mul):
        power = _as_power(t)
        if power is not None:
            base, k = power
            lowered = base
            for _ in range(k - 2):
                lowered = Mul(lowered, base)
            return Mul(Mul(Const(Fraction(k)), lowered), derive_term(base))
        return Add(Mul(derive_term(t.left), t.right),
                   Mul(t.left, derive_term(t.right)))
    if isinstance(t, Neg):
        return ast.neg(derive_term(t.arg))
    if isinstance(t, Div):
        # divisors are nonzero constants, so (a/b)' = a'/b
        return ast.div(derive_term(t.num), t.den)
    raise TypeError(f"cannot derive term: {t!r}")


# strict relations weaken: the sound default for > is >= on derivatives
_DERIVE_REL = {GE: GE, GT: GE, LE: LE, LT: LE, EQ: EQ}


def derive_formula(f: Formula) -> Formula:
    """Conjunctive lift of derivation to a quantifier-free formula.

    Disjunctions derive conjunctively (both branches must be preserved) and
    a != b must have been rewritten to a>b | a<b beforehand; the tempting
    a' != b' reading is unsound.
    """
    if isinstance(f, (TrueF, FalseF)):
        return ast.TRUE
    if isinstance(f, Not):
        raise NormalFormError(
            "derivation requires negation-free input; apply dualities first")
    if isinstance(f, (And, Or)):
        return And(derive_formula(f.left), derive_formula(f.right))
    if isinstance(f, Cmp):
        if f.op == NE:
            raise NormalFormError("rewrite a!=b to a>b | a<b before deriving")
        return Cmp(derive_term(f.left), _DERIVE_REL[f.op], derive_term(f.right))
    raise TypeError(f"derivation is defined on quantifier-free formulas, "
                    f"got {f!r}")


def nnf_dualities(f: Formula) -> Formula:
    """Push negations into atoms using comparison dualities."""
    if isinstance(f, Not):
        g = f.arg
        if isinstance(g, Not):
            return nnf_dualities(g.arg)
        if isinstance(g, Cmp):
            dual = {EQ: NE, NE: EQ, GE: LT, LT: GE, GT: LE, LE: GT}[g.op]
            return Cmp(g.left, dual, g.right)
        if isinstance(g, And):
            return Or(nnf_dualities(Not(g.left)), nnf_dualities(Not(g.right)))
        if isinstance(g, Or):
            return And(nnf_dualities(Not(g.left)), nnf_dualities(Not(g.right)))
        if isinstance(g, TrueF):
            return ast.FALSE
        if isinstance(g, FalseF):
            return ast.TRUE
        raise TypeError(f"cannot normalize negation of {g!r}")
    if isinstance(f, (And, Or)):
        return type(f)(nnf_dualities(f.left), nnf_dualities(f.right))
    return f


def split_disequalities(f: Formula) -> Formula:
    """Rewrite a != b to a > b | a < b (Counterexample-1-safe form)."""
    if isinstance(f, Cmp) and f.op == NE:
        return Or(Cmp(f.left, GT, f.right), Cmp(f.left, LT, f.right))
    if isinstance(f, (And, Or)):
        return type(f)(split_disequalities(f.left), split_disequalities(f.right))
    if isinstance(f, Not):
        return Not(split_disequalities(f.arg))
    return f


def derivation_input(f: Formula) -> Formula:
    """Normalize a first-order, quantifier-free formula for derivation."""
    return split_disequalities(nnf_dualities(f))


def diff_subst(delta: Formula, ode: Iterable[Tuple[Variable, Term]]) -> Formula:
    """Replace every primed variable by its ODE right-hand side.

    Variables without a differential equation are constant during the flow,
    so their primes substitute to zero.
    """
    rhs: Dict[Variable, Term] = {v.prime(): t for v, t in ode}

    def on_term(t: Term) -> Term:
        if isinstance(t, Var) and t.var.is_differential:
            return rhs.get(t.var, ast.ZERO)
        if isinstance(t, (Const, Var)):
            return t
        if isinstance(t, (Add, Sub, Mul)):
            left, right = on_term(t.left), on_term(t.right)
            # fold the zeros left by constant-during-flow variables
            zl = isinstance(left, Const) and left.value == 0
            zr = isinstance(right, Const) and right.value == 0
            if isinstance(t, Mul) and (zl or zr):
                return ast.ZERO
            if isinstance(t, Add) and zl:
                return right
            if isinstance(t, (Add, Sub)) and zr:
                return left
            return type(t)(left, right)
        if isinstance(t, Div):
            return ast.div(on_term(t.num), on_term(t.den))
        if isinstance(t, Neg):
            return ast.neg(on_term(t.arg))
        raise TypeError(f"not a term: {t!r}")

    def on_formula(f: Formula) -> Formula:
        if isinstance(f, (TrueF, FalseF)):
            return f
        if isinstance(f, Cmp):
            return Cmp(on_term(f.left), f.op, on_term(f.right))
        if isinstance(f, Not):
            return Not(on_formula(f.arg))
        if isinstance(f, (And, Or, ast.Imp, ast.Iff)):
            return type(f)(on_formula(f.left), on_formula(f.right))
        raise TypeError(f"diff_subst expects a quantifier-free formula: {f!r}")

    return on_formula(delta)


def weak_negate(f: Formula) -> Formula:
    """Negation that retains the boundary: ~(a>=b) = a<=b, ~(a>b) = a<=b.

    Defined on formulas built from inequalities with conjunction and
    disjunction; equalities are rejected because they would be unsound here.
    """
    if isinstance(f, TrueF):
        return ast.FALSE
    if isinstance(f, FalseF):
        return ast.TRUE
    if isinstance(f, And):
        return Or(weak_negate(f.left), weak_negate(f.right))
    if isinstance(f, Or):
        return And(weak_negate(f.left), weak_negate(f.right))
    if isinstance(f, Cmp):
        if f.op in (EQ, NE):
            raise EqualityError("weak negation is undefined on (dis)equalities")
        weak = {GE: LE, GT: LE, LE: GE, LT: GE}[f.op]
        return Cmp(f.left, weak, f.right)
    raise TypeError(f"weak negation is undefined on {f!r}")


def eps_strengthen(delta: Formula, eps: Variable) -> Formula:
    """Strengthen a derived formula by a minimum progress rate.

    a>=b becomes a>=b+eps (dually a<=b becomes a<=b-eps), so proving the
    result for one positive eps bounds progress away from zero.
    """
    e = Var(eps)
    if isinstance(delta, (TrueF, FalseF)):
        return delta
    if isinstance(delta, (And, Or)):
        return type(delta)(eps_strengthen(delta.left, eps),
                           eps_strengthen(delta.right, eps))
    if isinstance(delta, Cmp):
        if delta.op in (EQ, NE):
            raise EqualityError(
                "progress strengthening is undefined on (dis)equalities")
        if delta.op in (GE, GT):
            return Cmp(delta.left, delta.op, Add(delta.right, e))
        return Cmp(delta.left, delta.op, Sub(delta.right, e))
    raise TypeError(f"cannot strengthen {delta!r}")
