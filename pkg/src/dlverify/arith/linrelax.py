"""Linear-relaxation infeasibility check for conjunctions of atoms.

Each distinct monomial becomes an opaque variable, turning every polynomial
atom into a linear constraint; Fourier-Motzkin elimination then detects
infeasibility.  Monomials that are even powers contribute nonnegativity
seeds.  Purely refutational: True means the conjunction has no real
solution; False carries no claim (the relaxation may be feasible even when
the conjunction is not).
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .poly import Monomial, Poly
from .qf import EQ0, LE0, LT0, QAtom

_MAX_VARS = 72
_MAX_ROWS = 160
_MAX_COMBINED = 900
_PRODUCT_ROWS = 26            # seed products only for this many small atoms
_PRODUCT_MONOMIALS = 8        # ... and only between atoms this small
_TINY_MONOMIALS = 2           # sign-bound atoms eligible for deeper products

# one row: (coeffs over monomial-variables, constant, rel)
Row = Tuple[Dict[int, Fraction], Fraction, str]


def _even_monomial(m: Monomial) -> bool:
    return bool(m) and all(e % 2 == 0 for _, e in m)


def linear_refute(atoms: Sequence[QAtom]) -> bool:
    """True iff the conjunction of atoms is infeasible in linear relaxation.

    The relaxation is seeded with two classes of valid consequences: even
    powers are nonnegative, and the product of two nonpositive sides is
    nonnegative (pairwise products of small atoms), which captures the
    monotonicity arguments that make these goals valid.
    """
    if len(atoms) > _MAX_ROWS:
        return False
    polys: List[Tuple[Poly, str]] = [(a.poly, a.rel) for a in atoms]
    small = [(p, rel) for p, rel in polys
             if rel != EQ0 and len(p.coeffs) <= _PRODUCT_MONOMIALS]
    if len(small) <= _PRODUCT_ROWS:
        for i in range(len(small)):
            for j in range(i, len(small)):
                prod = small[i][0] * small[j][0]
                # p<=0 and q<=0 imply pq>=0, strictly when both are strict
                rel = LT0 if small[i][1] == LT0 and small[j][1] == LT0 else LE0
                polys.append((-prod, rel))
        # deeper products of the tiny sign-bound atoms capture the
        # monotonicity steps of textbook proofs (e.g. A*v*(eps-s) >= 0)
        tiny = [(p, rel) for p, rel in small
                if len(p.coeffs) <= _TINY_MONOMIALS]
        if len(tiny) <= 9:
            from itertools import combinations_with_replacement
            max_size = 4 if len(tiny) <= 8 else 3
            for size in range(3, max_size + 1):
                for combo in combinations_with_replacement(range(len(tiny)),
                                                           size):
                    prod = tiny[combo[0]][0]
                    strict = tiny[combo[0]][1] == LT0
                    for k in combo[1:]:
                        prod = prod * tiny[k][0]
                        strict = strict and tiny[k][1] == LT0
                    # product of `size` nonpositive values: <=0 for odd
                    # size, >=0 for even size
                    rel = LT0 if strict else LE0
                    polys.append((prod if size % 2 else -prod, rel))
    index: Dict[Monomial, int] = {}
    rows: List[Row] = []
    for poly, rel in polys:
        coeffs: Dict[int, Fraction] = {}
        const = Fraction(0)
        ok = True
        for mono, c in poly.coeffs.items():
            if not mono:
                const = c
                continue
            if mono not in index:
                if len(index) >= _MAX_VARS:
                    ok = False
                    break
                index[mono] = len(index)
            coeffs[index[mono]] = c
        if ok:
            rows.append((coeffs, const, rel))
        # dropping a constraint only weakens the relaxation, which is safe
        # for refutation
    # nonnegativity of even-power monomials
    for mono, i in index.items():
        if _even_monomial(mono):
            rows.append(({i: Fraction(-1)}, Fraction(0), LE0))
    # equalities split into two inequalities
    expanded: List[Row] = []
    for coeffs, const, rel in rows:
        if rel == EQ0:
            expanded.append((coeffs, const, LE0))
            expanded.append(({k: -v for k, v in coeffs.items()}, -const, LE0))
        else:
            expanded.append((coeffs, const, rel))
    return _fm_infeasible(expanded, len(index))


def _fm_infeasible(rows: List[Row], nvars: int) -> bool:
    for _ in range(nvars):
        # check ground contradictions first
        rest: List[Row] = []
        for coeffs, const, rel in rows:
            if coeffs:
                rest.append((coeffs, const, rel))
            elif rel == LE0 and const > 0:
                return True
            elif rel == LT0 and const >= 0:
                return True
        rows = rest
        if not rows:
            return False
        # pick the variable with the fewest pairings
        counts: Dict[int, Tuple[int, int]] = {}
        for coeffs, _, _ in rows:
            for v, c in coeffs.items():
                lo, hi = counts.get(v, (0, 0))
                counts[v] = (lo + (c < 0), hi + (c > 0))
        var = min(counts, key=lambda v: counts[v][0] * counts[v][1])
        lo_n, hi_n = counts[var]
        if lo_n * hi_n > _MAX_COMBINED:
            return False
        lowers: List[Row] = []
        uppers: List[Row] = []
        others: List[Row] = []
        for coeffs, const, rel in rows:
            c = coeffs.get(var)
            if c is None:
                others.append((coeffs, const, rel))
            elif c > 0:
                uppers.append((coeffs, const, rel))
            else:
                lowers.append((coeffs, const, rel))
        new_rows = others
        for lc, lconst, lrel in lowers:
            for uc, uconst, urel in uppers:
                a = -lc[var]   # > 0
                b = uc[var]    # > 0
                coeffs: Dict[int, Fraction] = {}
                for v, c in lc.items():
                    if v != var:
                        coeffs[v] = coeffs.get(v, Fraction(0)) + b * c
                for v, c in uc.items():
                    if v != var:
                        coeffs[v] = coeffs.get(v, Fraction(0)) + a * c
                coeffs = {v: c for v, c in coeffs.items() if c}
                const = b * lconst + a * uconst
                rel = LT0 if LT0 in (lrel, urel) else LE0
                new_rows.append((coeffs, const, rel))
        if len(new_rows) > _MAX_COMBINED:
            return False
        rows = new_rows
    for coeffs, const, rel in rows:
        if not coeffs:
            if rel == LE0 and const > 0:
                return True
            if rel == LT0 and const >= 0:
                return True
    return False
