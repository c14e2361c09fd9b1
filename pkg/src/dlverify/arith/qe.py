"""Quantifier elimination for linear and quadratic real arithmetic.

The workhorse is test-point virtual substitution (Loos-Weispfenning for the
linear fragment, Weispfenning-style square-root expressions for quadratics).
For an existential quantifier the eliminated formula is a disjunction over a
finite elimination set: minus infinity, the guarded roots of every weak atom,
and infinitesimally shifted roots of every strict atom.  Universals go
through the duality with negation normal form.  A second, independent linear
procedure (Fourier-Motzkin with sign case splits) exists for cross-checking.

Degrees above two in a quantified variable raise UnsupportedDegree: callers
fall back to differential reasoning instead of closing by arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..core import ast
from ..core.ast import (Box, Cmp, Diamond, Exists, FalseF, Forall, Formula,
                        Not, TrueF, Variable)
from ..core.subst import admissible_substitute
from ..core.vars import free_vars, signature
from .poly import Poly
from .qf import (EQ0, FALSE_IR, LE0, LT0, QAnd, QAtom, QFalse, QOr, QTrue,
                 TRUE_IR, atom, conj_ir, disj_ir, formula_of_ir, ir_atoms,
                 ir_of_formula, ir_variables, map_atoms, negate_ir)
from .simplify import definite_sign, simplify_ir


class UnsupportedDegree(Exception):
    """A quantified variable occurs with degree above two."""

    def __init__(self, var: Variable, degree: int):
        super().__init__(f"variable {var} has degree {degree} > 2 in the "
                         "quantified formula")
        self.var = var
        self.degree = degree


class LiftError(Exception):
    """A quantified variable occurs inside a term that must be abstracted."""


@dataclass(frozen=True)
class _Point:
    """Test point (num + sgn*sqrt(rad)) / den, optionally shifted by +epsilon."""

    num: Poly
    den: Poly
    rad: Optional[Poly]  # None for rational points
    sgn: int
    eps: bool
    guard: object  # IR formula

    def key(self):
        return (self.num, self.den, self.rad, self.sgn, self.eps)


# ------------------------------------------------------------- sqrt arithmetic


def _sqrt_eq0(a: Poly, b: Poly, s: Poly):
    """a + b*sqrt(s) = 0 given s >= 0."""
    return conj_ir([atom(a * b, LE0), atom(a * a - b * b * s, EQ0)])


def _sqrt_le0(a: Poly, b: Poly, s: Poly):
    """a + b*sqrt(s) <= 0 given s >= 0."""
    a_np = atom(a, LE0)
    b_np = atom(b, LE0)
    square = a * a - b * b * s
    return disj_ir([
        conj_ir([a_np, disj_ir([b_np, atom(-square, LE0)])]),
        conj_ir([b_np, disj_ir([a_np, atom(square, LE0)])]),
    ])


def _sqrt_lt0(a: Poly, b: Poly, s: Poly):
    """a + b*sqrt(s) < 0 given s >= 0."""
    square = a * a - b * b * s
    left = conj_ir([atom(a, LT0),
                    disj_ir([atom(b, LE0), atom(-square, LT0)])])
    right = conj_ir([atom(b, LT0), atom(-s, LT0),
                     disj_ir([atom(a, LE0), atom(square, LT0)])])
    return disj_ir([left, right])


def _sqrt_rel(a: Poly, b: Poly, s: Poly, rel: str):
    if rel == EQ0:
        return _sqrt_eq0(a, b, s)
    if rel == LE0:
        return _sqrt_le0(a, b, s)
    return _sqrt_lt0(a, b, s)


def _den_sign(den: Poly) -> int:
    """1 or -1 if the sign of den is fixed (assuming den != 0), else 0."""
    s = definite_sign(den)
    if s in ("+", ">="):
        return 1
    if s in ("-", "<="):
        return -1
    return 0


def _value_at_point(coeffs: Tuple[Poly, ...], pt: _Point) -> Tuple[Poly, Optional[Poly]]:
    """(A, B) with p(point)*den^k = A + B*sqrt(rad); B None for rational points."""
    k = len(coeffs) - 1
    if pt.rad is None:
        va = Poly()
        for i, c in enumerate(coeffs):
            va = va + c * (pt.num ** i) * (pt.den ** (k - i))
        return va, None
    va, vb = Poly(), Poly()
    ai, bi = Poly.const(1), Poly()  # (num + sgn*sqrt(rad))^i
    powers = [(ai, bi)]
    for _ in range(k):
        ai, bi = (ai * pt.num + bi * pt.rad.scale(pt.sgn),
                  ai.scale(pt.sgn) + bi * pt.num)
        powers.append((ai, bi))
    for i, c in enumerate(coeffs):
        dpow = pt.den ** (k - i)
        va = va + c * powers[i][0] * dpow
        vb = vb + c * powers[i][1] * dpow
    return va, vb


def _atom_at_value(va: Poly, vb: Optional[Poly], rad: Optional[Poly],
                   rel: str, den: Poly, k: int):
    """p(point) rel 0 where p(point)*den^k = va + vb*sqrt(rad)."""
    def with_sign(sign: int):
        a = va if sign > 0 else -va
        if vb is None:
            return atom(a, rel)
        b = vb if sign > 0 else -vb
        return _sqrt_rel(a, b, rad, rel)

    if k % 2 == 0 or rel == EQ0:
        return with_sign(1)
    ds = _den_sign(den)
    if ds:
        return with_sign(ds)
    pos = conj_ir([atom(-den, LT0), with_sign(1)])
    neg = conj_ir([atom(den, LT0), with_sign(-1)])
    return disj_ir([pos, neg])


def _subst_point_atom(a: QAtom, x: Variable, pt: _Point):
    coeffs = a.poly.coeffs_in(x)
    k = len(coeffs) - 1
    if k == 0:
        return a
    if not pt.eps:
        va, vb = _value_at_point(coeffs, pt)
        return _atom_at_value(va, vb, pt.rad, a.rel, pt.den, k)
    # point + epsilon: sign sequence of p, p', p'' at the point
    derivs = [coeffs]
    cur = list(coeffs)
    while len(cur) > 1:
        cur = [c.scale(i + 1) for i, c in enumerate(cur[1:])]
        derivs.append(tuple(cur))

    def at(cs) -> object:
        va, vb = _value_at_point(tuple(cs), pt)
        return va, vb, len(cs) - 1

    def rel_at(cs, rel):
        va, vb = _value_at_point(tuple(cs), pt)
        return _atom_at_value(va, vb, pt.rad, rel, pt.den, len(cs) - 1)

    if a.rel == EQ0:
        return conj_ir([rel_at(d, EQ0) for d in derivs])
    # p(t+eps) < 0  iff  p<0 or (p=0 and (p'<0 or (p'=0 and p''<0)))
    # weak final step for LE0
    out = None
    for idx in range(len(derivs) - 1, -1, -1):
        d = derivs[idx]
        last = idx == len(derivs) - 1
        final_rel = a.rel if last else LT0
        branch = rel_at(d, final_rel)
        if out is None:
            out = branch
        else:
            out = disj_ir([branch, conj_ir([rel_at(d, EQ0), out])])
    return out


def _minus_inf_atom(a: QAtom, x: Variable):
    coeffs = a.poly.coeffs_in(x)
    k = len(coeffs) - 1
    if k == 0:
        return a
    if a.rel == EQ0:
        return conj_ir([atom(c, EQ0) for c in coeffs])
    branches = []
    for kk in range(k, 0, -1):
        lead = coeffs[kk] if kk % 2 == 0 else -coeffs[kk]
        cond = [atom(coeffs[j], EQ0) for j in range(kk + 1, k + 1)]
        cond.append(atom(lead, LT0))
        branches.append(conj_ir(cond))
    tail = [atom(coeffs[j], EQ0) for j in range(1, k + 1)]
    tail.append(atom(coeffs[0], a.rel))
    branches.append(conj_ir(tail))
    return disj_ir(branches)


def _points_of_atom(a: QAtom, x: Variable) -> List[_Point]:
    coeffs = a.poly.coeffs_in(x)
    k = len(coeffs) - 1
    eps = a.rel == LT0
    out: List[_Point] = []
    if k == 1:
        c0, c1 = coeffs
        out.append(_Point(-c0, c1, None, 0, eps,
                          negate_ir(atom(c1, EQ0))))
    elif k == 2:
        c0, c1, c2 = coeffs
        disc = c1 * c1 - (c2 * c0).scale(4)
        guard2 = conj_ir([negate_ir(atom(c2, EQ0)), atom(-disc, LE0)])
        den = c2.scale(2)
        out.append(_Point(-c1, den, disc, 1, eps, guard2))
        out.append(_Point(-c1, den, disc, -1, eps, guard2))
        guard1 = conj_ir([atom(c2, EQ0), negate_ir(atom(c1, EQ0))])
        out.append(_Point(-c0, c1, None, 0, eps, guard1))
    return out


def _degree_check(ir, x: Variable) -> int:
    deg = 0
    for a in ir_atoms(ir):
        d = a.poly.degree(x)
        if d > 2:
            raise UnsupportedDegree(x, d)
        deg = max(deg, d)
    return deg


def _try_equality_subst(x: Variable, ir):
    """exists x (x = e and R)  ~>  R[x:=e] when a top-level conjunct pins x
    linearly with a constant coefficient."""
    if not isinstance(ir, QAnd):
        candidates = [ir] if isinstance(ir, QAtom) else []
        rest: Tuple = ()
    else:
        candidates = [a for a in ir.args if isinstance(a, QAtom)]
        rest = ir.args
    for a in candidates:
        if a.rel != EQ0:
            continue
        coeffs = a.poly.coeffs_in(x)
        if len(coeffs) != 2:
            continue
        c1 = coeffs[1].const_value()
        if c1 is None or c1 == 0:
            continue
        point = _Point(coeffs[0].scale(Fraction(-1)), Poly.const(c1), None, 0,
                       False, TRUE_IR)
        return map_atoms(ir, lambda at_: _subst_point_atom(at_, x, point)
                         if at_.poly.degree(x) else at_)
    return None


def eliminate_exists(x: Variable, ir, ctx=None):
    """Eliminate exists-x from an NNF IR formula (degree <= 2 in x)."""
    scoped = None if ctx is None else {p: s for p, s in ctx.items()
                                       if x not in p.variables()}
    ir = simplify_ir(ir, ctx=ctx)
    if isinstance(ir, (QTrue, QFalse)):
        return ir
    if isinstance(ir, QOr):
        return disj_ir([eliminate_exists(x, a, ctx) for a in ir.args])
    deg = _degree_check(ir, x)
    if deg == 0:
        return ir
    fast = _try_equality_subst(x, ir)
    if fast is not None:
        return simplify_ir(fast, ctx=scoped)

    points: List[_Point] = []
    seen = set()
    for a in ir_atoms(ir):
        if a.poly.degree(x) == 0:
            continue
        for pt in _points_of_atom(a, x):
            key = pt.key()
            if key not in seen:
                seen.add(key)
                points.append(pt)

    branches = [map_atoms(ir, lambda a: _minus_inf_atom(a, x)
                          if a.poly.degree(x) else a)]
    for pt in points:
        sub = map_atoms(ir, lambda a, p=pt: _subst_point_atom(a, x, p)
                        if a.poly.degree(x) else a)
        branches.append(simplify_ir(conj_ir([pt.guard, sub]), ctx=scoped))
    return simplify_ir(disj_ir(branches), ctx=scoped)


def eliminate_forall(x: Variable, ir, ctx=None):
    return negate_ir(eliminate_exists(x, negate_ir(ir), ctx=ctx))


# ------------------------------------------------------------------ drivers


def _block_order(ir, block: List[Variable]) -> List[Variable]:
    """Eliminate cheap variables first: lowest max degree, fewest atoms."""
    def cost(v: Variable):
        deg = 0
        occ = 0
        for a in ir_atoms(ir):
            d = a.poly.degree(v)
            if d:
                occ += 1
                deg = max(deg, d)
        return (deg, occ)
    return sorted(block, key=cost)


def _eliminate_block(kind, block: List[Variable], ir, ctx=None):
    step = eliminate_exists if kind is Exists else eliminate_forall
    # a block distributes over the matching connective, and each branch is
    # usually much smaller with a better variable order of its own
    if kind is Exists and isinstance(ir, QOr):
        return disj_ir([_eliminate_block(kind, block, a, ctx)
                        for a in ir.args])
    if kind is Forall and isinstance(ir, QAnd):
        return conj_ir([_eliminate_block(kind, block, a, ctx)
                        for a in ir.args])
    remaining = list(block)
    while remaining:
        remaining = _block_order(ir, remaining)
        blocked: Optional[UnsupportedDegree] = None
        for i, v in enumerate(remaining):
            try:
                ir = step(v, ir, ctx)
            except UnsupportedDegree as exc:
                # another variable may reduce the degree first; skip for now
                if blocked is None:
                    blocked = exc
                continue
            remaining.pop(i)
            break
        else:
            raise blocked  # every remaining variable is out of fragment
        if isinstance(ir, (QTrue, QFalse)):
            break
    return ir


def _ctx_literals(f: Formula, ctx: Dict) -> Dict:
    """Extend a sign-set context with the conjunctive literals of f."""
    from .simplify import _atom_signs
    if isinstance(f, ast.And):
        return _ctx_literals(f.right, _ctx_literals(f.left, ctx))
    if isinstance(f, (Cmp, Not)):
        try:
            ir = ir_of_formula(f)
        except Exception:
            return ctx
        if isinstance(ir, QAtom):
            p, allowed = _atom_signs(ir)
            out = dict(ctx)
            out[p] = out[p] & allowed if p in out else allowed
            return out
    return ctx


def _guard_equality(var: Variable, guard: Formula):
    """The pinned term when guard is `var = e` (or `e = var`) with var not
    occurring in e, else None."""
    if not isinstance(guard, Cmp) or guard.op != ast.EQ:
        return None
    for side, other in ((guard.left, guard.right), (guard.right, guard.left)):
        if isinstance(side, ast.Var) and side.var == var \
                and var not in free_vars(other):
            return other
    return None


def _qe_walk(f: Formula, ctx: Optional[Dict] = None):
    """Bottom-up elimination; returns an IR formula for the QF result.

    `ctx` carries sign knowledge from enclosing conjunctions and implication
    antecedents; it is only ever used to simplify, so results are equivalent
    within their context.
    """
    ctx = ctx or {}
    if isinstance(f, (Forall, Exists)):
        kind = type(f)
        # bounded-quantifier shortcut: forall x (x = e -> ...) and
        # exists x (x = e & ...) substitute the pinned value directly
        body = f.body
        pin = None
        if kind is Forall and isinstance(body, ast.Imp):
            pin = _guard_equality(f.var, body.left)
            rest = body.right
        elif kind is Exists and isinstance(body, ast.And):
            pin = _guard_equality(f.var, body.left)
            rest = body.right
        if pin is not None:
            try:
                return _qe_walk(admissible_substitute(rest, f.var, pin), ctx)
            except Exception:
                pass
        block = [f.var]
        body = f.body
        while isinstance(body, kind):
            block.append(body.var)
            body = body.body
        inner = _qe_walk(body, ctx)
        return _eliminate_block(kind, block, inner, ctx)
    if isinstance(f, Not):
        # simplification context is preserved under negation (congruence)
        return negate_ir(_qe_walk(f.arg, ctx))
    if isinstance(f, ast.And):
        left = _qe_walk(f.left, _ctx_literals(f.right, ctx))
        right = _qe_walk(f.right, _ctx_literals(f.left, ctx))
        return conj_ir([left, right])
    if isinstance(f, ast.Or):
        return disj_ir([_qe_walk(f.left, ctx), _qe_walk(f.right, ctx)])
    if isinstance(f, ast.Imp):
        left = _qe_walk(f.left, ctx)
        right = _qe_walk(f.right, _ctx_literals(f.left, ctx))
        return disj_ir([negate_ir(left), right])
    if isinstance(f, ast.Iff):
        a, b = _qe_walk(f.left, {}), _qe_walk(f.right, {})
        return disj_ir([conj_ir([a, b]), conj_ir([negate_ir(a), negate_ir(b)])])
    if isinstance(f, (TrueF, FalseF, Cmp)):
        return ir_of_formula(f)
    if isinstance(f, (Box, Diamond)):
        raise TypeError("quantifier elimination requires a modality-free formula")
    raise TypeError(f"not a formula: {f!r}")


def qe(phi: Formula) -> Formula:
    """Equivalent quantifier-free formula over the same free variables."""
    before = free_vars(phi)
    out_ir = simplify_ir(_qe_walk(phi))
    out = formula_of_ir(out_ir)
    after = free_vars(out)
    assert after <= before, "qe must not invent free variables"
    return out


def decide(phi: Formula) -> bool:
    """Validity of a closed first-order formula over the reals."""
    if free_vars(phi):
        names = ", ".join(sorted(v.name for v in free_vars(phi)))
        raise ValueError(f"decide requires a closed formula; free: {names}")
    out = qe(phi)
    if isinstance(out, TrueF):
        return True
    if isinstance(out, FalseF):
        return False
    raise AssertionError(f"closed formula did not reduce to a constant: {out!r}")


def universal_closure(phi: Formula, order: Optional[List[Variable]] = None) -> Formula:
    fvs = sorted(free_vars(phi)) if order is None else list(order)
    out = phi
    for v in reversed(fvs):
        out = Forall(v, out)
    return out


# ------------------------------------------------------------------ lifting


def _collect_apps(t, out):
    if isinstance(t, ast.FuncApp):
        out.append(t)
        return
    for c in ast.term_children(t):
        _collect_apps(c, out)


def _formula_apps(f: Formula, bound: frozenset, out: Dict):
    """Map each maximal uninterpreted application to the quantified variables
    in scope at some occurrence."""
    if isinstance(f, (TrueF, FalseF)):
        return
    if isinstance(f, Cmp):
        apps: List = []
        _collect_apps(f.left, apps)
        _collect_apps(f.right, apps)
        for a in apps:
            out.setdefault(a, set()).update(bound & free_vars(a))
        return
    if isinstance(f, Not):
        _formula_apps(f.arg, bound, out)
        return
    if isinstance(f, (ast.And, ast.Or, ast.Imp, ast.Iff)):
        _formula_apps(f.left, bound, out)
        _formula_apps(f.right, bound, out)
        return
    if isinstance(f, (Forall, Exists)):
        _formula_apps(f.body, bound | {f.var}, out)
        return
    raise TypeError("qe_lift requires a modality-free formula")


def abstract_apps(phi: Formula) -> Tuple[Formula, List[Tuple["ast.FuncApp", Variable]]]:
    """Abstract every maximal uninterpreted application by a fresh variable.

    Raises LiftError when an application contains a quantified variable (the
    abstraction would not be instance-correct).
    """
    occurrences: Dict = {}
    _formula_apps(phi, frozenset(), occurrences)
    if not occurrences:
        return phi, []
    taken = set(signature(phi))
    abstraction: List[Tuple[ast.FuncApp, Variable]] = []
    for app, scoped in occurrences.items():
        if scoped:
            names = ", ".join(sorted(v.name for v in scoped))
            raise LiftError(
                f"quantified variable(s) {names} occur inside {app.fname}(...)"
                " which would have to be abstracted")
        from ..core.vars import fresh_variable
        v = fresh_variable("u", frozenset(taken))
        taken.add(v.name)
        abstraction.append((app, v))

    def abstract_term(t):
        for app, v in abstraction:
            if t == app:
                return ast.Var(v)
        if isinstance(t, (ast.Const, ast.Var)):
            return t
        if isinstance(t, ast.FuncApp):
            return ast.FuncApp(t.fname, tuple(abstract_term(a) for a in t.args))
        if isinstance(t, (ast.Add, ast.Sub, ast.Mul)):
            return type(t)(abstract_term(t.left), abstract_term(t.right))
        if isinstance(t, ast.Div):
            return ast.div(abstract_term(t.num), abstract_term(t.den))
        if isinstance(t, ast.Neg):
            return ast.neg(abstract_term(t.arg))
        raise TypeError(f"not a term: {t!r}")

    def abstract_formula(f: Formula) -> Formula:
        if isinstance(f, (TrueF, FalseF)):
            return f
        if isinstance(f, Cmp):
            return Cmp(abstract_term(f.left), f.op, abstract_term(f.right))
        if isinstance(f, Not):
            return Not(abstract_formula(f.arg))
        if isinstance(f, (ast.And, ast.Or, ast.Imp, ast.Iff)):
            return type(f)(abstract_formula(f.left), abstract_formula(f.right))
        if isinstance(f, (Forall, Exists)):
            return type(f)(f.var, abstract_formula(f.body))
        raise TypeError(f"not a first-order formula: {f!r}")

    return abstract_formula(phi), abstraction


def qe_lift(phi: Formula) -> Formula:
    """QE lifted to instances: abstract maximal non-arithmetic subterms by
    fresh variables, eliminate, and re-substitute."""
    abstracted, abstraction = abstract_apps(phi)
    out = qe(abstracted)
    for app, v in abstraction:
        out = admissible_substitute(out, v, app)
    return out


# ------------------------------------------- Fourier-Motzkin (cross-check path)


class FMError(Exception):
    pass


def _dnf(ir, cap: int = 4096) -> List[List[QAtom]]:
    if isinstance(ir, QTrue):
        return [[]]
    if isinstance(ir, QFalse):
        return []
    if isinstance(ir, QAtom):
        return [[ir]]
    if isinstance(ir, QOr):
        out = []
        for a in ir.args:
            out.extend(_dnf(a, cap))
            if len(out) > cap:
                raise FMError("DNF blowup")
        return out
    if isinstance(ir, QAnd):
        parts = [_dnf(a, cap) for a in ir.args]
        out: List[List[QAtom]] = [[]]
        for p in parts:
            out = [c + d for c in out for d in p]
            if len(out) > cap:
                raise FMError("DNF blowup")
        return out
    raise TypeError(f"not an IR formula: {ir!r}")


def fm_eliminate_exists(x: Variable, ir):
    """Fourier-Motzkin elimination of exists-x (linear in x, with sign case
    splits on parametric coefficients).  Independent of the test-point path."""
    conjuncts = _dnf(simplify_ir(ir))
    return simplify_ir(disj_ir([_fm_conjunct(x, c) for c in conjuncts]))


def _fm_conjunct(x: Variable, atoms: List[QAtom]):
    """Eliminate x from a conjunction of atoms; returns an IR formula.

    Bounds are collected as (c1, c0, rel) for c1*x + c0 rel 0 together with
    the known sign of c1; unknown signs are resolved by case distinction.
    """
    lowers: List[Tuple[Poly, Poly, str]] = []   # c1 < 0: x >= -c0/c1
    uppers: List[Tuple[Poly, Poly, str]] = []   # c1 > 0: x <= -c0/c1
    eqs: List[Tuple[Poly, Poly]] = []
    rest: List = []

    def finish():
        if eqs:
            c1, c0 = eqs[0]
            point = _Point(-c0, c1, None, 0, False, TRUE_IR)
            parts = list(rest)
            for (d1, d0, rel) in lowers + uppers:
                parts.append(_subst_point_atom(
                    QAtom(Poly.var(x) * d1 + d0, rel), x, point))
            for (d1, d0) in eqs[1:]:
                parts.append(_subst_point_atom(
                    QAtom(Poly.var(x) * d1 + d0, EQ0), x, point))
            return conj_ir(parts)
        parts = list(rest)
        for (lc1, lc0, lrel) in lowers:
            for (uc1, uc0, urel) in uppers:
                # -lc0/lc1 <= -uc0/uc1 with lc1<0, uc1>0
                rel = LT0 if LT0 in (lrel, urel) else LE0
                parts.append(atom(lc0 * uc1 - lc1 * uc0, rel))
        return conj_ir(parts)

    def go(i: int):
        if i == len(atoms):
            return finish()
        a = atoms[i]
        d = a.poly.degree(x)
        if d > 1:
            raise UnsupportedDegree(x, d)
        if d == 0:
            rest.append(a)
            out = go(i + 1)
            rest.pop()
            return out
        c0, c1 = a.poly.coeffs_in(x)
        cval = c1.const_value()
        sign = 0
        if cval is not None:
            sign = 1 if cval > 0 else -1
        else:
            ds = definite_sign(c1)
            if ds == "+":
                sign = 1
            elif ds == "-":
                sign = -1
        if sign:
            bucket = eqs if a.rel == EQ0 else (uppers if sign > 0 else lowers)
            entry = (c1, c0) if a.rel == EQ0 else (c1, c0, a.rel)
            bucket.append(entry)
            out = go(i + 1)
            bucket.pop()
            return out
        # unknown sign: three-way case distinction
        branches = []
        zero = atom(c1, EQ0)
        degenerate = atom(c0, a.rel)
        if not isinstance(zero, QFalse) and not isinstance(degenerate, QFalse):
            rest.append(zero)
            if not isinstance(degenerate, QTrue):
                rest.append(degenerate)
            branches.append(go(i + 1))
            if not isinstance(degenerate, QTrue):
                rest.pop()
            rest.pop()
        for sgn, assume in ((1, atom(-c1, LT0)), (-1, atom(c1, LT0))):
            if isinstance(assume, QFalse):
                continue
            rest.append(assume)
            bucket = eqs if a.rel == EQ0 else (uppers if sgn > 0 else lowers)
            entry = (c1, c0) if a.rel == EQ0 else (c1, c0, a.rel)
            bucket.append(entry)
            branches.append(go(i + 1))
            bucket.pop()
            rest.pop()
        return disj_ir(branches)

    return go(0)


def fm_qe(phi: Formula) -> Formula:
    """Fourier-Motzkin based qe for linear formulas (cross-validation path)."""
    def walk(f: Formula):
        if isinstance(f, (Forall, Exists)):
            inner = walk(f.body)
            if isinstance(f, Exists):
                return fm_eliminate_exists(f.var, inner)
            return negate_ir(fm_eliminate_exists(f.var, negate_ir(inner)))
        if isinstance(f, Not):
            return negate_ir(walk(f.arg))
        if isinstance(f, ast.And):
            return conj_ir([walk(f.left), walk(f.right)])
        if isinstance(f, ast.Or):
            return disj_ir([walk(f.left), walk(f.right)])
        if isinstance(f, ast.Imp):
            return disj_ir([negate_ir(walk(f.left)), walk(f.right)])
        if isinstance(f, ast.Iff):
            a, b = walk(f.left), walk(f.right)
            return disj_ir([conj_ir([a, b]),
                            conj_ir([negate_ir(a), negate_ir(b)])])
        return ir_of_formula(f)
    return formula_of_ir(simplify_ir(walk(phi)))
