"""Equivalence-preserving simplification of quantifier-free formulas.

Three layers: atom-level constant folding and definite-sign analysis,
pairwise combination of atoms over the same polynomial inside a connective
(via sign sets over {-, 0, +}), and tree flattening/absorption.  Idempotent.
"""
from __future__ import annotations

from typing import Dict, FrozenSet, Optional, Tuple

from ..core.ast import Formula
from .poly import Poly
from .qf import (EQ0, FALSE_IR, LE0, LT0, QAnd, QAtom, QFalse, QOr, QTrue,
                 TRUE_IR, atom, conj_ir, disj_ir, formula_of_ir,
                 ir_of_formula)

NEGS, ZEROS, POSS = frozenset("-"), frozenset("0"), frozenset("+")
ALL_SIGNS = frozenset("-0+")


def definite_sign(p: Poly) -> str:
    """One of '+', '0', '-', '>=', '<=', '?' by inspection of monomial parity.

    If every non-constant monomial has even exponents throughout and a
    positive coefficient, the polynomial is bounded below by its constant
    term; dually for negative coefficients.
    """
    c = p.const_value()
    if c is not None:
        return "0" if c == 0 else ("+" if c > 0 else "-")
    all_pos = True
    all_neg = True
    const = 0
    for m, coeff in p.coeffs.items():
        if not m:
            const = coeff
            continue
        if any(e % 2 for _, e in m):
            return "?"
        if coeff > 0:
            all_neg = False
        else:
            all_pos = False
        if not (all_pos or all_neg):
            return "?"
    if all_pos:
        if const > 0:
            return "+"
        return ">=" if const == 0 else "?"
    if all_neg:
        if const < 0:
            return "-"
        return "<=" if const == 0 else "?"
    return "?"


def _atom_signs(a: QAtom) -> Tuple[Poly, FrozenSet[str]]:
    """Canonical polynomial (positive leading sign) and allowed sign set."""
    p, rel = a.poly, a.rel
    flipped = p.lead_coeff_sign() < 0
    if flipped:
        p = -p
    if rel == EQ0:
        allowed = ZEROS
    elif rel == LE0:
        allowed = (ZEROS | POSS) if flipped else (NEGS | ZEROS)
    else:
        allowed = POSS if flipped else NEGS
    return p, allowed


def _atom_of_signs(p: Poly, allowed: FrozenSet[str]):
    if not allowed:
        return FALSE_IR
    if allowed == ALL_SIGNS:
        return TRUE_IR
    if allowed == ZEROS:
        return atom(p, EQ0)
    if allowed == NEGS:
        return atom(p, LT0)
    if allowed == POSS:
        return atom(-p, LT0)
    if allowed == NEGS | ZEROS:
        return atom(p, LE0)
    if allowed == ZEROS | POSS:
        return atom(-p, LE0)
    # {-, +}: not equal to zero
    return disj_ir([atom(p, LT0), atom(-p, LT0)])


def _fold_atom(a: QAtom):
    s = definite_sign(a.poly)
    if s == "?":
        return a
    if a.rel == EQ0:
        if s in ("+", "-"):
            return FALSE_IR
        if s == "0":
            return TRUE_IR
    elif a.rel == LE0:
        if s in ("0", "-", "<="):
            return TRUE_IR
        if s == "+":
            return FALSE_IR
    else:  # LT0
        if s == "-":
            return TRUE_IR
        if s in ("0", "+", ">="):
            return FALSE_IR
    return a


Context = Dict[Poly, FrozenSet[str]]


def _ctx_add(ctx: Context, p: Poly, allowed: FrozenSet[str]) -> Context:
    out = dict(ctx)
    out[p] = out[p] & allowed if p in out else allowed
    return out


def _strip_known_factors(a: QAtom, ctx: Context):
    """Divide out variable-power factors whose sign the context pins down."""
    p, rel = a.poly, a.rel
    changed = False
    for v, k in list(p.var_content().items()):
        known = ctx.get(Poly.var(v))
        if known is None:
            continue
        if known == ZEROS:
            return TRUE_IR if rel in (EQ0, LE0) else FALSE_IR
        if known <= POSS:
            p = p.div_mono(v, k)
            changed = True
        elif known <= NEGS:
            p = p.div_mono(v, k)
            if k % 2 and rel != EQ0:
                p = -p
            changed = True
        elif known <= (NEGS | POSS) and k % 2 == 0:
            p = p.div_mono(v, k)
            changed = True
    if changed:
        return atom(p, rel)
    return a


_REFUTE_CACHE: Dict[frozenset, bool] = {}
_REFUTE_CACHE_CAP = 200000


def _conjunct_infeasible(atoms_out, ctx: Context) -> bool:
    """Linear-relaxation refutation of a conjunction (with its context)."""
    from .linrelax import linear_refute
    collected = []
    for p, s in atoms_out:
        a = _atom_of_signs(p, s)
        if isinstance(a, QAtom):
            collected.append(a)
    for p, s in ctx.items():
        a = _atom_of_signs(p, s)
        if isinstance(a, QAtom):
            collected.append(a)
    if not 3 <= len(collected) <= 60:
        return False
    key = frozenset((a.poly, a.rel) for a in collected)
    hit = _REFUTE_CACHE.get(key)
    if hit is not None:
        return hit
    out = linear_refute(collected)
    if len(_REFUTE_CACHE) < _REFUTE_CACHE_CAP:
        _REFUTE_CACHE[key] = out
    return out


def _derive_zeros(atoms_out, ctx: Context):
    """Variables provably zero in this conjunct (by linear relaxation of
    both strict sign assumptions), e.g. A = 0 from A>=0, b>0, A*(A+b)=0."""
    from .linrelax import linear_refute
    candidates = set()
    eq_vars = set()
    known: Dict[Poly, FrozenSet[str]] = dict(ctx)
    for p, s in atoms_out:
        known[p] = known[p] & s if p in known else s
        if s == ZEROS and not p.is_const():
            for v in p.variables():
                eq_vars.add(v)
    for v in eq_vars:
        vs = known.get(Poly.var(v))
        if vs is None or ("0" in vs and vs != ZEROS):
            candidates.add(v)  # not already pinned to zero
    if not candidates:
        return []
    base = []
    for p, s in known.items():
        a = _atom_of_signs(p, s)
        if isinstance(a, QAtom):
            base.append(a)
    out = []
    for v in sorted(candidates, key=str):
        pos = QAtom((-Poly.var(v)).primitive(), LT0)
        neg = QAtom(Poly.var(v).primitive(), LT0)
        if linear_refute(base + [pos]) and linear_refute(base + [neg]):
            out.append(v)
    return out


def _subst_zeros_ir(f, env):
    if isinstance(f, (QTrue, QFalse)):
        return f
    if isinstance(f, QAtom):
        return atom(f.poly.subst(env), f.rel)
    if isinstance(f, QAnd):
        return conj_ir([_subst_zeros_ir(a, env) for a in f.args])
    return disj_ir([_subst_zeros_ir(a, env) for a in f.args])


def _simplify_ir(f, ctx: Context):
    """Simplify under a conjunctive context of known sign sets."""
    if isinstance(f, (QTrue, QFalse)):
        return f
    if isinstance(f, QAtom):
        g = _fold_atom(f)
        if not isinstance(g, QAtom):
            return g
        g = _strip_known_factors(g, ctx)
        if not isinstance(g, QAtom):
            return _simplify_ir(g, ctx)
        p, allowed = _atom_signs(g)
        known = ctx.get(p)
        if known is not None:
            narrowed = known & allowed
            if not narrowed:
                return FALSE_IR
            if known <= allowed:
                return TRUE_IR
            if narrowed != allowed:
                return _atom_of_signs(p, narrowed)
        if ctx and _conjunct_infeasible([(p, allowed)], ctx):
            return FALSE_IR
        return g
    if isinstance(f, QOr):
        args = [_simplify_ir(a, ctx) for a in f.args]
        flat = disj_ir(args)
        if not isinstance(flat, QOr):
            return flat
        sign_map: Dict[Poly, FrozenSet[str]] = {}
        others = []
        for a in flat.args:
            if isinstance(a, QAtom):
                p, allowed = _atom_signs(a)
                sign_map[p] = sign_map.get(p, frozenset()) | allowed
            else:
                others.append(a)
        rebuilt = []
        for p, s in sign_map.items():
            known = ctx.get(p, ALL_SIGNS)
            if known <= s:
                return TRUE_IR
            rebuilt.append(_atom_of_signs(p, s))
        return disj_ir(rebuilt + others)
    if isinstance(f, QAnd):
        # merge sign sets of the atom conjuncts first
        sign_map: Dict[Poly, FrozenSet[str]] = {}
        others = []
        for a in f.args:
            if isinstance(a, QAtom):
                b = _fold_atom(a)
                if isinstance(b, QFalse):
                    return FALSE_IR
                if isinstance(b, QTrue):
                    continue
                p, allowed = _atom_signs(b)
                sign_map[p] = sign_map[p] & allowed if p in sign_map else allowed
            else:
                others.append(a)
        atoms_out = []
        for p, s in sign_map.items():
            known = ctx.get(p)
            if known is not None:
                if known & s == frozenset():
                    return FALSE_IR
                if known <= s:
                    continue  # implied by context
                s = s & known
            if not s:
                return FALSE_IR
            atoms_out.append((p, s))
        if _conjunct_infeasible(atoms_out, ctx):
            return FALSE_IR
        zeroed = _derive_zeros(atoms_out, ctx)
        if zeroed:
            rewritten = []
            env = {z: Poly() for z in zeroed}
            for a in f.args:
                if isinstance(a, QAtom):
                    rewritten.append(atom(a.poly.subst(env), a.rel))
                else:
                    rewritten.append(_subst_zeros_ir(a, env))
            rewritten.extend(atom(Poly.var(z), EQ0) for z in zeroed)
            return _simplify_ir(conj_ir(rewritten), ctx)
        # strip factors from each entry using its siblings plus the outer ctx
        rebuilt = []
        for i, (p, s) in enumerate(atoms_out):
            entry = _atom_of_signs(p, s)
            if isinstance(entry, QAtom):
                sib_ctx = dict(ctx)
                for j, (q, sq) in enumerate(atoms_out):
                    if j != i:
                        sib_ctx[q] = sib_ctx[q] & sq if q in sib_ctx else sq
                stripped = _strip_known_factors(entry, sib_ctx)
                if stripped is not entry:
                    entry = _simplify_ir(stripped, sib_ctx) \
                        if not isinstance(stripped, QAtom) else stripped
            rebuilt.append(entry)
        inner_ctx = dict(ctx)
        for p, s in atoms_out:
            inner_ctx[p] = inner_ctx[p] & s if p in inner_ctx else s
        simplified_others = [_simplify_ir(a, inner_ctx) for a in others]
        return conj_ir(rebuilt + simplified_others)
    raise TypeError(f"not an IR formula: {f!r}")


def simplify_ir(f, rounds: int = 4, ctx: Optional[Context] = None):
    base = ctx or {}
    for _ in range(rounds):
        g = _simplify_ir(f, base)
        if g == f:
            return g
        f = g
    return f


def simplify(phi: Formula) -> Formula:
    """Simplify a quantifier-free, modal-free formula (equivalence-preserving)."""
    return formula_of_ir(simplify_ir(ir_of_formula(phi)))
