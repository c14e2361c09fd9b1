"""Conversions between core terms and canonical polynomials."""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from ..core import ast
from ..core.ast import (Add, Const, Div, DivisionError, FuncApp, Mul, Neg,
                        Sub, Term, Var, Variable, const_value)
from .poly import Monomial, NonPolynomialError, Poly, _mono_key


def normalize_poly(t: Term) -> Poly:
    """Canonical polynomial equal to t as a function on R^n.

    Raises DivisionError for a non-constant or zero divisor and
    NonPolynomialError for uninterpreted function applications.
    """
    if isinstance(t, Const):
        return Poly.const(t.value)
    if isinstance(t, Var):
        return Poly.var(t.var)
    if isinstance(t, Add):
        return normalize_poly(t.left) + normalize_poly(t.right)
    if isinstance(t, Sub):
        return normalize_poly(t.left) - normalize_poly(t.right)
    if isinstance(t, Mul):
        return normalize_poly(t.left) * normalize_poly(t.right)
    if isinstance(t, Neg):
        return -normalize_poly(t.arg)
    if isinstance(t, Div):
        c = const_value(t.den)
        if c is None or c == 0:
            raise DivisionError("divisor must be a nonzero rational constant")
        return normalize_poly(t.num).scale(1 / c)
    if isinstance(t, FuncApp):
        raise NonPolynomialError(f"uninterpreted function {t.fname!r} in term")
    raise TypeError(f"not a term: {t!r}")


def _mono_term(m: Monomial, coeff: Fraction) -> Term:
    """|coeff| * monomial as a term; the caller places the sign."""
    factors = [Var(v) for v, e in m for _ in range(e)]
    out: Optional[Term] = None
    if not factors or abs(coeff) != 1:
        out = Const(abs(coeff))
    for f in factors:
        out = f if out is None else Mul(out, f)
    assert out is not None
    return out


def term_from_poly(p: Poly) -> Term:
    """Deterministic term rendering of a polynomial (graded-lex monomial order)."""
    if not p.coeffs:
        return Const(Fraction(0))
    items = sorted(p.coeffs.items(), key=lambda it: _mono_key(it[0]), reverse=True)
    out: Optional[Term] = None
    for m, c in items:
        piece = _mono_term(m, c)
        if out is None:
            out = piece if c > 0 else ast.neg(piece)
        elif c > 0:
            out = Add(out, piece)
        else:
            out = Sub(out, piece)
    assert out is not None
    return out
