"""Sign propagation over unexpanded term trees.

Discharges goals like `a>=0 |- 3*x^2*((x-3)^4+a) >= 0` that are far beyond
the quantifier-elimination degree limit but follow from simple facts: even
powers are nonnegative, products and sums propagate signs, and the context
pins down the sign of matching subterms.  Purely sufficient: returns False
whenever unsure.
"""
from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Tuple

from ..core import ast
from ..core.ast import (Cmp, EQ, FalseF, Formula, GE, GT, LE, LT, NE, Not,
                        Term, TrueF)
from .poly import NonPolynomialError, Poly
from .terms import normalize_poly
from .simplify import definite_sign

POS, NONNEG, ZERO, NONPOS, NEG, NONZERO, UNKNOWN = (
    "+", ">=", "0", "<=", "-", "!=", "?")

_ADD_TABLE = {
    (POS, POS): POS, (POS, NONNEG): POS, (POS, ZERO): POS,
    (NONNEG, NONNEG): NONNEG, (NONNEG, ZERO): NONNEG,
    (NEG, NEG): NEG, (NEG, NONPOS): NEG, (NEG, ZERO): NEG,
    (NONPOS, NONPOS): NONPOS, (NONPOS, ZERO): NONPOS,
    (ZERO, ZERO): ZERO,
}

_NEGATE = {POS: NEG, NONNEG: NONPOS, ZERO: ZERO, NONPOS: NONNEG, NEG: POS,
           NONZERO: NONZERO, UNKNOWN: UNKNOWN}


def _sign_add(a: str, b: str) -> str:
    if a == UNKNOWN or b == UNKNOWN or a == NONZERO or b == NONZERO:
        if a == ZERO:
            return b
        if b == ZERO:
            return a
        return UNKNOWN
    key = (a, b) if (a, b) in _ADD_TABLE else (b, a)
    return _ADD_TABLE.get(key, UNKNOWN)


def _sign_mul(a: str, b: str) -> str:
    if a == ZERO or b == ZERO:
        return ZERO
    if a == UNKNOWN or b == UNKNOWN:
        return UNKNOWN
    strict = {POS, NEG, NONZERO}
    negative = (a in (NEG, NONPOS)) != (b in (NEG, NONPOS))
    if a in strict and b in strict:
        if a == NONZERO or b == NONZERO:
            return NONZERO
        return NEG if negative else POS
    return NONPOS if negative else NONNEG


class SignContext:
    """Known sign sets for canonical polynomials, from conjunctive literals."""

    def __init__(self) -> None:
        self.known: Dict[Poly, str] = {}
        self.contradictory = False

    def add_literal(self, phi: Formula, negated: bool = False) -> None:
        if isinstance(phi, Not):
            self.add_literal(phi.arg, not negated)
            return
        if isinstance(phi, ast.And) and not negated:
            self.add_literal(phi.left)
            self.add_literal(phi.right)
            return
        if isinstance(phi, (TrueF, FalseF)):
            if isinstance(phi, FalseF) != negated:
                self.contradictory = True
            return
        if not isinstance(phi, Cmp):
            return
        op = phi.op
        if negated:
            op = {EQ: NE, NE: EQ, GE: LT, LT: GE, GT: LE, LE: GT}[op]
        try:
            diff = normalize_poly(phi.left) - normalize_poly(phi.right)
        except (NonPolynomialError, ast.DivisionError):
            return
        sign = {EQ: ZERO, GE: NONNEG, GT: POS, LE: NONPOS, LT: NEG,
                NE: NONZERO}[op]
        self._record(diff, sign)

    def _record(self, p: Poly, sign: str) -> None:
        c = p.const_value()
        if c is not None:
            actual = ZERO if c == 0 else (POS if c > 0 else NEG)
            if not _compatible(actual, sign):
                self.contradictory = True
            return
        canon = p.primitive()
        flip = canon.lead_coeff_sign() < 0
        if flip:
            canon = -canon
            sign = _NEGATE[sign]
        prev = self.known.get(canon)
        merged = _merge(prev, sign) if prev else sign
        if merged is None:
            self.contradictory = True
        else:
            self.known[canon] = merged

    def lookup(self, p: Poly) -> str:
        c = p.const_value()
        if c is not None:
            return ZERO if c == 0 else (POS if c > 0 else NEG)
        canon = p.primitive()
        if canon.lead_coeff_sign() < 0:
            s = self.known.get(-canon, UNKNOWN)
            return _NEGATE[s]
        return self.known.get(canon, UNKNOWN)


_SET_OF = {POS: {1}, NONNEG: {0, 1}, ZERO: {0}, NONPOS: {-1, 0}, NEG: {-1},
           NONZERO: {-1, 1}, UNKNOWN: {-1, 0, 1}}
_OF_SET = {frozenset(v): k for k, v in _SET_OF.items()}


def _merge(a: str, b: str) -> Optional[str]:
    s = frozenset(_SET_OF[a] & _SET_OF[b])
    if not s:
        return None
    return _OF_SET[frozenset(s)]


def _compatible(actual: str, required: str) -> bool:
    return bool(_SET_OF[actual] & _SET_OF[required])


_SPLIT_DEPTH = 4
_SUM_CAP = 64


def _top_sum(t: Term, sign: int = 1) -> List[Tuple[int, Term]]:
    """Top-level additive structure as signed summands (factors left whole)."""
    if isinstance(t, ast.Add):
        return _top_sum(t.left, sign) + _top_sum(t.right, sign)
    if isinstance(t, ast.Sub):
        return _top_sum(t.left, sign) + _top_sum(t.right, -sign)
    if isinstance(t, ast.Neg):
        return _top_sum(t.arg, -sign)
    return [(sign, t)]


def _product_factors(t: Term, sign: int = 1) -> Tuple[int, List[Term]]:
    """Multiplicative flattening; sum-shaped subterms stay atomic factors."""
    if isinstance(t, ast.Mul):
        s1, f1 = _product_factors(t.left, sign)
        s2, f2 = _product_factors(t.right, 1)
        return s1 * s2, f1 + f2
    if isinstance(t, ast.Neg):
        return _product_factors(t.arg, -sign)
    if isinstance(t, ast.Div):
        c = ast.const_value(t.den)
        if c is None or c == 0:
            return sign, [t]  # not reachable for well-formed terms
        return _product_factors(t.num, sign if c > 0 else -sign)
    if isinstance(t, ast.Const):
        if t.value == 0:
            return 0, []
        return (sign if t.value > 0 else -sign), []
    return sign, [t]


def _addend_sign(sign: int, factors: List[Term], ctx: SignContext,
                 depth: int) -> str:
    """Sign of a product of factors, pairing syntactically equal factors
    (by canonical polynomial) into nonnegative even powers; when the result
    is unknown, one sum-shaped factor is split and the pieces recombined."""
    if sign == 0:
        return ZERO
    groups: Dict[Poly, Tuple[Term, int]] = {}
    order: List[Poly] = []
    for f in factors:
        try:
            key = normalize_poly(f)
        except (NonPolynomialError, ast.DivisionError):
            return UNKNOWN
        if key in groups:
            groups[key] = (groups[key][0], groups[key][1] + 1)
        else:
            groups[key] = (f, 1)
            order.append(key)
    total = POS
    unknown_sum_factor: Optional[Term] = None
    for key in order:
        f, mult = groups[key]
        base = term_sign(f, ctx, depth - 1) if depth > 0 else _quick_sign(f, ctx)
        if mult % 2 == 0:
            part = _even_power_sign(base)
        elif mult > 1:
            part = _sign_mul(_even_power_sign(base), base)
        else:
            part = base
        if part == UNKNOWN and mult > 1:
            # the context may know the sign of the whole power
            part = ctx.lookup(key ** mult)
        if part == UNKNOWN and unknown_sum_factor is None \
                and len(_top_sum(f)) > 1 and mult % 2 == 1:
            unknown_sum_factor = f
        total = _sign_mul(total, part)
    if total != UNKNOWN or depth <= 0 or unknown_sum_factor is None:
        return total if sign > 0 else _NEGATE[total]
    # distribute the product over one unknown sum factor
    remaining = list(factors)
    remaining.remove(unknown_sum_factor)
    combined: Optional[str] = None
    parts = _top_sum(unknown_sum_factor)
    if len(parts) > _SUM_CAP:
        return UNKNOWN
    for psign, piece in parts:
        s2, extra = _product_factors(piece)
        s = _addend_sign(sign * psign * s2, remaining + extra, ctx, depth - 1)
        combined = s if combined is None else _sign_add(combined, s)
        if combined == UNKNOWN:
            return UNKNOWN
    return combined or ZERO


def _quick_sign(t: Term, ctx: SignContext) -> str:
    try:
        p = normalize_poly(t)
    except (NonPolynomialError, ast.DivisionError):
        return UNKNOWN
    c = p.const_value()
    if c is not None:
        return ZERO if c == 0 else (POS if c > 0 else NEG)
    looked = ctx.lookup(p)
    if looked != UNKNOWN:
        return looked
    ds = definite_sign(p)
    if ds != "?":
        return {"+": POS, "0": ZERO, "-": NEG, ">=": NONNEG, "<=": NONPOS}[ds]
    return UNKNOWN


def term_sign(t: Term, ctx: SignContext, depth: int = _SPLIT_DEPTH) -> str:
    """Best-effort sign of t under the context (sound, not complete)."""
    quick = _quick_sign(t, ctx)
    if quick != UNKNOWN:
        return quick
    if depth <= 0:
        return UNKNOWN
    total: Optional[str] = None
    for sign, summand in _top_sum(t):
        s2, factors = _product_factors(summand)
        s = _addend_sign(sign * s2, factors, ctx, depth)
        total = s if total is None else _sign_add(total, s)
        if total == UNKNOWN:
            return UNKNOWN
    return total or ZERO


def _even_power_sign(base: str) -> str:
    if base in (POS, NEG, NONZERO):
        return POS
    if base == ZERO:
        return ZERO
    return NONNEG


def _proves_cmp(sign: str, op: str) -> bool:
    need = {EQ: ZERO, GE: NONNEG, GT: POS, LE: NONPOS, LT: NEG, NE: NONZERO}[op]
    return _SET_OF[sign] <= _SET_OF[need]


def _refutes_cmp(sign: str, op: str) -> bool:
    need = {EQ: ZERO, GE: NONNEG, GT: POS, LE: NONPOS, LT: NEG, NE: NONZERO}[op]
    return not (_SET_OF[sign] & _SET_OF[need])


def implied_by_signs(phi: Formula, ctx: SignContext) -> bool:
    """True only if phi provably holds under ctx by sign propagation."""
    if isinstance(phi, TrueF):
        return True
    if isinstance(phi, FalseF):
        return False
    if isinstance(phi, Not):
        return refuted_by_signs(phi.arg, ctx)
    if isinstance(phi, ast.And):
        return implied_by_signs(phi.left, ctx) and implied_by_signs(phi.right, ctx)
    if isinstance(phi, ast.Or):
        return implied_by_signs(phi.left, ctx) or implied_by_signs(phi.right, ctx)
    if isinstance(phi, ast.Imp):
        extended = _extend(ctx, phi.left)
        if extended.contradictory:
            return True
        return implied_by_signs(phi.right, extended)
    if isinstance(phi, ast.Iff):
        return (implied_by_signs(phi.left, ctx) and implied_by_signs(phi.right, ctx)) \
            or (refuted_by_signs(phi.left, ctx) and refuted_by_signs(phi.right, ctx))
    if isinstance(phi, Cmp):
        diff = ast.Sub(phi.left, phi.right)
        return _proves_cmp(term_sign(diff, ctx), phi.op)
    return False


def refuted_by_signs(phi: Formula, ctx: SignContext) -> bool:
    """True only if phi provably fails under ctx."""
    if isinstance(phi, FalseF):
        return True
    if isinstance(phi, TrueF):
        return False
    if isinstance(phi, Not):
        return implied_by_signs(phi.arg, ctx)
    if isinstance(phi, ast.And):
        return refuted_by_signs(phi.left, ctx) or refuted_by_signs(phi.right, ctx)
    if isinstance(phi, ast.Or):
        return refuted_by_signs(phi.left, ctx) and refuted_by_signs(phi.right, ctx)
    if isinstance(phi, ast.Imp):
        return implied_by_signs(phi.left, ctx) and refuted_by_signs(phi.right, ctx)
    if isinstance(phi, Cmp):
        diff = ast.Sub(phi.left, phi.right)
        return _refutes_cmp(term_sign(diff, ctx), phi.op)
    return False


def _extend(ctx: SignContext, phi: Formula) -> SignContext:
    out = SignContext()
    out.known = dict(ctx.known)
    out.contradictory = ctx.contradictory
    out.add_literal(phi)
    return out


def prove_sequent_by_signs(antecedents: Iterable[Formula],
                           succedents: Iterable[Formula]) -> bool:
    """Sufficient check that /\\ antecedents -> \\/ succedents is valid."""
    ctx = SignContext()
    for a in antecedents:
        ctx.add_literal(a)
    if ctx.contradictory:
        return True
    return any(implied_by_signs(s, ctx) for s in succedents)
