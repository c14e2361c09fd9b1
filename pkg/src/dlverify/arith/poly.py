"""Exact multivariate polynomials with arbitrary-precision rational coefficients.

Canonical form: a mapping from monomials (sorted tuples of (variable, exponent)
pairs with positive exponents) to nonzero Fraction coefficients, so two equal
polynomials are structurally identical.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, Mapping, Optional, Tuple

from ..core import ast
from ..core.ast import Term, Variable

Monomial = Tuple[Tuple[Variable, int], ...]

_ONE_M: Monomial = ()


class NonPolynomialError(Exception):
    """Term contains a subterm outside the polynomial fragment."""


def _var_key(v: Variable):
    return (v.name, v.kind)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    merged: Dict[Variable, int] = dict(a)
    for v, e in b:
        merged[v] = merged.get(v, 0) + e
    return tuple(sorted(merged.items(), key=lambda it: _var_key(it[0])))


def _mono_key(m: Monomial):
    # graded lexicographic, for deterministic term output
    return (sum(e for _, e in m), tuple((_var_key(v), e) for v, e in m))


class Poly:
    """Immutable by convention; do not mutate `coeffs` after construction."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Optional[Mapping[Monomial, Fraction]] = None):
        cleaned = {}
        if coeffs:
            for m, c in coeffs.items():
                if c:
                    cleaned[m] = c
        self.coeffs: Dict[Monomial, Fraction] = cleaned
        self._hash: Optional[int] = None

    # ---------------------------------------------------------- constructors

    @staticmethod
    def const(value) -> "Poly":
        value = Fraction(value)
        return Poly({_ONE_M: value}) if value else Poly()

    @staticmethod
    def var(v: Variable) -> "Poly":
        return Poly({((v, 1),): Fraction(1)})

    # ------------------------------------------------------------- inspection

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_const(self) -> bool:
        return not self.coeffs or (len(self.coeffs) == 1 and _ONE_M in self.coeffs)

    def const_value(self) -> Optional[Fraction]:
        if self.is_zero():
            return Fraction(0)
        if self.is_const():
            return self.coeffs[_ONE_M]
        return None

    def variables(self) -> frozenset:
        out = set()
        for m in self.coeffs:
            for v, _ in m:
                out.add(v)
        return frozenset(out)

    def degree(self, v: Variable) -> int:
        d = 0
        for m in self.coeffs:
            for mv, e in m:
                if mv == v and e > d:
                    d = e
        return d

    def total_degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.coeffs), default=0)

    # ------------------------------------------------------------- arithmetic

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        p = Poly.__new__(Poly)
        p.coeffs = out
        p._hash = None
        return p

    def __neg__(self) -> "Poly":
        p = Poly.__new__(Poly)
        p.coeffs = {m: -c for m, c in self.coeffs.items()}
        p._hash = None
        return p

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        p = Poly.__new__(Poly)
        p.coeffs = out
        p._hash = None
        return p

    def scale(self, k) -> "Poly":
        k = Fraction(k)
        if not k:
            return Poly()
        p = Poly.__new__(Poly)
        p.coeffs = {m: c * k for m, c in self.coeffs.items()}
        p._hash = None
        return p

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power")
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    # ------------------------------------------------------------ structure

    def coeffs_in(self, v: Variable) -> Tuple["Poly", ...]:
        """Coefficient polynomials [c0, c1, ..., cd] of v^i, cd nonzero or d=0."""
        buckets: Dict[int, Dict[Monomial, Fraction]] = {}
        for m, c in self.coeffs.items():
            e = 0
            rest = []
            for mv, me in m:
                if mv == v:
                    e = me
                else:
                    rest.append((mv, me))
            buckets.setdefault(e, {})[tuple(rest)] = c
        d = max(buckets, default=0)
        out = []
        for i in range(d + 1):
            p = Poly.__new__(Poly)
            p.coeffs = buckets.get(i, {})
            p._hash = None
            out.append(p)
        return tuple(out)

    def derivative(self, v: Variable) -> "Poly":
        out: Dict[Monomial, Fraction] = {}
        for m, c in self.coeffs.items():
            for i, (mv, e) in enumerate(m):
                if mv == v:
                    rest = m[:i] + ((v, e - 1),) * (e > 1) + m[i + 1:]
                    rest = tuple(sorted(rest, key=lambda it: _var_key(it[0])))
                    s = out.get(rest, 0) + c * e
                    if s:
                        out[rest] = s
                    else:
                        out.pop(rest, None)
                    break
        p = Poly.__new__(Poly)
        p.coeffs = out
        p._hash = None
        return p

    def subst(self, env: Mapping[Variable, "Poly"]) -> "Poly":
        """Substitute polynomials for variables (composition)."""
        out = Poly()
        pow_cache: Dict[Tuple[Variable, int], Poly] = {}
        for m, c in self.coeffs.items():
            term = Poly.const(c)
            for v, e in m:
                if v in env:
                    key = (v, e)
                    if key not in pow_cache:
                        pow_cache[key] = env[v] ** e
                    term = term * pow_cache[key]
                else:
                    term = term * Poly({((v, e),): Fraction(1)})
            out = out + term
        return out

    def eval(self, state: Mapping[Variable, Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self.coeffs.items():
            val = c
            for v, e in m:
                val *= state[v] ** e
            total += val
        return total

    def eval_float(self, state: Mapping[Variable, float]) -> float:
        total = 0.0
        for m, c in self.coeffs.items():
            val = float(c)
            for v, e in m:
                val *= state[v] ** e
            total += val
        return total

    # ---------------------------------------------------------- normalization

    def content(self) -> Fraction:
        """Positive rational c such that self/c has coprime integer coefficients."""
        if not self.coeffs:
            return Fraction(1)
        num = 0
        den = 1
        for c in self.coeffs.values():
            num = gcd(num, abs(c.numerator))
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den)

    def primitive(self) -> "Poly":
        c = self.content()
        return self if c == 1 else self.scale(1 / c)

    def var_content(self) -> Dict[Variable, int]:
        """Variables dividing every monomial, with their minimal exponent."""
        if not self.coeffs:
            return {}
        it = iter(self.coeffs)
        common: Dict[Variable, int] = dict(next(it))
        for m in it:
            if not common:
                break
            exps = dict(m)
            common = {v: min(k, exps[v]) for v, k in common.items() if v in exps}
        return common

    def div_mono(self, v: Variable, k: int) -> "Poly":
        """Divide by v**k; every monomial must contain v**k."""
        out: Dict[Monomial, Fraction] = {}
        for m, c in self.coeffs.items():
            entry = []
            for mv, me in m:
                if mv == v:
                    if me < k:
                        raise ValueError("monomial not divisible")
                    if me > k:
                        entry.append((mv, me - k))
                else:
                    entry.append((mv, me))
            out[tuple(entry)] = c
        p = Poly.__new__(Poly)
        p.coeffs = out
        p._hash = None
        return p

    def lead_coeff_sign(self) -> int:
        """Sign of the coefficient of the graded-lex largest monomial (0 if zero)."""
        if not self.coeffs:
            return 0
        m = max(self.coeffs, key=_mono_key)
        c = self.coeffs[m]
        return 1 if c > 0 else -1

    # -------------------------------------------------------------- protocol

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.coeffs.items()))
        return self._hash

    def __repr__(self) -> str:
        from .terms import term_from_poly
        from ..parser.pretty import pretty
        return f"Poly({pretty(term_from_poly(self))})"


ZERO = Poly()
ONE = Poly.const(1)
