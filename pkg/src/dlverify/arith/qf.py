"""Internal quantifier-free representation used by the elimination engine.

Atoms are canonical polynomial comparisons against zero with relation in
{= 0, <= 0, < 0}; all other relations and negations are normalized away, so
formulas are in negation normal form by construction.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Tuple

from ..core import ast
from ..core.ast import (And, Cmp, EQ, FalseF, Formula, GE, GT, Iff, Imp, LE,
                        LT, NE, Not, Or, TrueF)
from .poly import Poly
from .terms import normalize_poly, term_from_poly

EQ0, LE0, LT0 = "=0", "<=0", "<0"


class QTrue:
    __slots__ = ()

    def __eq__(self, other):
        return isinstance(other, QTrue)

    def __hash__(self):
        return hash("QTrue")

    def __repr__(self):
        return "QTrue"


class QFalse:
    __slots__ = ()

    def __eq__(self, other):
        return isinstance(other, QFalse)

    def __hash__(self):
        return hash("QFalse")

    def __repr__(self):
        return "QFalse"


TRUE_IR = QTrue()
FALSE_IR = QFalse()


class QAtom:
    __slots__ = ("poly", "rel", "_hash")

    def __init__(self, poly: Poly, rel: str):
        self.poly = poly
        self.rel = rel
        self._hash: Optional[int] = None

    def __eq__(self, other):
        return (isinstance(other, QAtom) and self.rel == other.rel
                and self.poly == other.poly)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rel, self.poly))
        return self._hash

    def __repr__(self):
        return f"QAtom({self.poly!r} {self.rel})"


class QAnd:
    __slots__ = ("args", "_hash")

    def __init__(self, args: Tuple):
        self.args = args
        self._hash: Optional[int] = None

    def __eq__(self, other):
        return isinstance(other, QAnd) and self.args == other.args

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("and", self.args))
        return self._hash

    def __repr__(self):
        return f"QAnd{self.args!r}"


class QOr:
    __slots__ = ("args", "_hash")

    def __init__(self, args: Tuple):
        self.args = args
        self._hash: Optional[int] = None

    def __eq__(self, other):
        return isinstance(other, QOr) and self.args == other.args

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("or", self.args))
        return self._hash

    def __repr__(self):
        return f"QOr{self.args!r}"


# ----------------------------------------------------------- smart constructors


def atom(poly: Poly, rel: str):
    """Canonical atom: constant folding, content/sign normalization, and
    extraction of even variable-power factors (v**2k is nonnegative, so the
    atom splits into a lower-degree one plus zero tests)."""
    c = poly.const_value()
    if c is not None:
        if rel == EQ0:
            return TRUE_IR if c == 0 else FALSE_IR
        if rel == LE0:
            return TRUE_IR if c <= 0 else FALSE_IR
        return TRUE_IR if c < 0 else FALSE_IR
    p = poly.primitive()
    stripped = []
    for v, k in p.var_content().items():
        if k >= 2:
            k_even = k - (k % 2)
            p = p.div_mono(v, k_even)
            stripped.append(v)
    if stripped:
        zeros = [atom(Poly.var(v), EQ0) for v in stripped]
        nonzeros = [disj_ir([atom(Poly.var(v), LT0), atom(-Poly.var(v), LT0)])
                    for v in stripped]
        if rel == EQ0:
            return disj_ir([atom(p, EQ0)] + zeros)
        if rel == LE0:
            return disj_ir([atom(p, LE0)] + zeros)
        return conj_ir([atom(p, LT0)] + nonzeros)
    if rel == EQ0 and p.lead_coeff_sign() < 0:
        p = -p
    return QAtom(p, rel)


def conj_ir(args: Iterable):
    flat = []
    for a in args:
        if isinstance(a, QTrue):
            continue
        if isinstance(a, QFalse):
            return FALSE_IR
        if isinstance(a, QAnd):
            flat.extend(a.args)
        else:
            flat.append(a)
    seen = []
    uniq = set()
    for a in flat:
        if a not in uniq:
            uniq.add(a)
            seen.append(a)
    if not seen:
        return TRUE_IR
    if len(seen) == 1:
        return seen[0]
    return QAnd(tuple(seen))


def disj_ir(args: Iterable):
    flat = []
    for a in args:
        if isinstance(a, QFalse):
            continue
        if isinstance(a, QTrue):
            return TRUE_IR
        if isinstance(a, QOr):
            flat.extend(a.args)
        else:
            flat.append(a)
    seen = []
    uniq = set()
    for a in flat:
        if a not in uniq:
            uniq.add(a)
            seen.append(a)
    if not seen:
        return FALSE_IR
    if len(seen) == 1:
        return seen[0]
    return QOr(tuple(seen))


def negate_ir(f):
    """Negation normal form negation (atoms negate to atoms or small disjunctions)."""
    if isinstance(f, QTrue):
        return FALSE_IR
    if isinstance(f, QFalse):
        return TRUE_IR
    if isinstance(f, QAtom):
        if f.rel == EQ0:
            return disj_ir([atom(f.poly, LT0), atom(-f.poly, LT0)])
        if f.rel == LE0:
            return atom(-f.poly, LT0)
        return atom(-f.poly, LE0)
    if isinstance(f, QAnd):
        return disj_ir([negate_ir(a) for a in f.args])
    if isinstance(f, QOr):
        return conj_ir([negate_ir(a) for a in f.args])
    raise TypeError(f"not an IR formula: {f!r}")


# --------------------------------------------------------------- conversions


def ir_of_formula(f: Formula, negated: bool = False):
    """Translate a quantifier-free, modal-free formula to IR (NNF)."""
    if isinstance(f, TrueF):
        return FALSE_IR if negated else TRUE_IR
    if isinstance(f, FalseF):
        return TRUE_IR if negated else FALSE_IR
    if isinstance(f, Not):
        return ir_of_formula(f.arg, not negated)
    if isinstance(f, And):
        op = disj_ir if negated else conj_ir
        return op([ir_of_formula(f.left, negated), ir_of_formula(f.right, negated)])
    if isinstance(f, Or):
        op = conj_ir if negated else disj_ir
        return op([ir_of_formula(f.left, negated), ir_of_formula(f.right, negated)])
    if isinstance(f, Imp):
        if negated:  # !(a -> b) = a & !b
            return conj_ir([ir_of_formula(f.left, False),
                            ir_of_formula(f.right, True)])
        return disj_ir([ir_of_formula(f.left, True), ir_of_formula(f.right, False)])
    if isinstance(f, Iff):
        a, b = f.left, f.right
        both = conj_ir([ir_of_formula(a, negated), ir_of_formula(b, False)])
        neither = conj_ir([ir_of_formula(a, not negated), ir_of_formula(b, True)])
        return disj_ir([both, neither])
    if isinstance(f, Cmp):
        diff = normalize_poly(f.left) - normalize_poly(f.right)
        rel = f.op
        if negated:
            rel = {EQ: NE, NE: EQ, GE: LT, LT: GE, GT: LE, LE: GT}[rel]
        if rel == EQ:
            return atom(diff, EQ0)
        if rel == LE:
            return atom(diff, LE0)
        if rel == LT:
            return atom(diff, LT0)
        if rel == GE:
            return atom(-diff, LE0)
        if rel == GT:
            return atom(-diff, LT0)
        return disj_ir([atom(diff, LT0), atom(-diff, LT0)])  # !=
    raise TypeError(f"formula is not quantifier-free first-order: {f!r}")


def formula_of_ir(f) -> Formula:
    """Render IR back as a core formula with atoms in `p <rel> 0` shape."""
    if isinstance(f, QTrue):
        return ast.TRUE
    if isinstance(f, QFalse):
        return ast.FALSE
    if isinstance(f, QAtom):
        rel = {EQ0: EQ, LE0: LE, LT0: LT}[f.rel]
        # prefer >=/> over <=/< when the polynomial leads negatively
        poly = f.poly
        if f.rel != EQ0 and poly.lead_coeff_sign() < 0:
            poly = -poly
            rel = {LE: GE, LT: GT}[rel]
        return Cmp(term_from_poly(poly), rel, ast.ZERO)
    if isinstance(f, QAnd):
        return ast.conj(*[formula_of_ir(a) for a in f.args])
    if isinstance(f, QOr):
        return ast.disj(*[formula_of_ir(a) for a in f.args])
    raise TypeError(f"not an IR formula: {f!r}")


def ir_variables(f) -> frozenset:
    if isinstance(f, (QTrue, QFalse)):
        return frozenset()
    if isinstance(f, QAtom):
        return f.poly.variables()
    return frozenset().union(*[ir_variables(a) for a in f.args])


def ir_atoms(f):
    if isinstance(f, QAtom):
        yield f
    elif isinstance(f, (QAnd, QOr)):
        for a in f.args:
            yield from ir_atoms(a)


def map_atoms(f, fn):
    """Rebuild f with fn applied to every atom (fn returns IR)."""
    if isinstance(f, (QTrue, QFalse)):
        return f
    if isinstance(f, QAtom):
        return fn(f)
    if isinstance(f, QAnd):
        return conj_ir([map_atoms(a, fn) for a in f.args])
    if isinstance(f, QOr):
        return disj_ir([map_atoms(a, fn) for a in f.args])
    raise TypeError(f"not an IR formula: {f!r}")
