"""Abstract syntax of terms, formulas, hybrid programs, and hybrid automata.

All nodes are immutable; construction is the only mutation point, so values
are safe to share across threads and to use as dict keys.  Source spans are
attached for diagnostics but excluded from equality and hashing, so two
parses of the same text compare equal no matter where they came from.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Tuple, Union

Span = Tuple[int, int]  # (offset, end) into the source text

BASE = "base"
DIFF = "differential"


@dataclass(frozen=True)
class Variable:
    """A named variable; differential kind marks x' symbols in derivation output."""

    name: str
    kind: str = BASE

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("variable names must be nonempty")
        if self.kind not in (BASE, DIFF):
            raise ValueError(f"bad variable kind: {self.kind!r}")

    def prime(self) -> "Variable":
        return Variable(self.name, DIFF)

    def unprime(self) -> "Variable":
        return Variable(self.name, BASE)

    @property
    def is_differential(self) -> bool:
        return self.kind == DIFF

    def __str__(self) -> str:
        return self.name + ("'" if self.kind == DIFF else "")

    def __lt__(self, other: "Variable") -> bool:
        return (self.name, self.kind) < (other.name, other.kind)


@dataclass(frozen=True)
class Node:
    span: Optional[Span] = field(default=None, compare=False, repr=False, kw_only=True)


# --------------------------------------------------------------------------- terms


class Term(Node):
    pass


@dataclass(frozen=True)
class Const(Term):
    value: Fraction

    def __post_init__(self) -> None:
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Var(Term):
    var: Variable


@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Sub(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Mul(Term):
    left: Term
    right: Term


class DivisionError(Exception):
    """Divisor is not a syntactically nonzero rational constant."""


@dataclass(frozen=True)
class Div(Term):
    """Quotient; the divisor must be a syntactically nonzero rational constant."""

    num: Term
    den: Term

    def __post_init__(self) -> None:
        c = const_value(self.den)
        if c is None or c == 0:
            raise DivisionError(
                "division is only allowed by nonzero rational constants")


@dataclass(frozen=True)
class Neg(Term):
    arg: Term

    def __post_init__(self) -> None:
        # Negated constants must be folded (use ast.neg); this keeps every
        # term printable in a form that reparses to the identical tree.
        if isinstance(self.arg, Const):
            raise ValueError("Neg(Const) is not canonical; fold via ast.neg")


@dataclass(frozen=True)
class FuncApp(Term):
    """Uninterpreted function occurrence, e.g. f(x, y).

    Never produced by the prover itself; it exists so that arithmetic over
    abstracted instances (qe_lift) has something to abstract.
    """

    fname: str
    args: Tuple[Term, ...]


# ------------------------------------------------------------------------ formulas


class Formula(Node):
    pass


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


EQ, GE, GT, LE, LT, NE = "=", ">=", ">", "<=", "<", "!="
RELATIONS = (EQ, GE, GT, LE, LT, NE)


@dataclass(frozen=True)
class Cmp(Formula):
    left: Term
    op: str
    right: Term

    def __post_init__(self) -> None:
        if self.op not in RELATIONS:
            raise ValueError(f"bad relation: {self.op!r}")


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: Variable
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: Variable
    body: Formula


@dataclass(frozen=True)
class Box(Formula):
    prog: "Program"
    post: Formula


@dataclass(frozen=True)
class Diamond(Formula):
    prog: "Program"
    post: Formula


# ------------------------------------------------------------------------ programs


class Program(Node):
    pass


@dataclass(frozen=True)
class Assign(Program):
    var: Variable
    term: Term


@dataclass(frozen=True)
class AssignAny(Program):
    """x := * (nondeterministic assignment); removed by desugaring."""

    var: Variable


@dataclass(frozen=True)
class Test(Program):
    cond: Formula


@dataclass(frozen=True)
class ODE(Program):
    """x1'=e1, ..., xn'=en & domain.  Left-hand variables are pairwise distinct."""

    eqs: Tuple[Tuple[Variable, Term], ...]
    domain: Formula

    def __post_init__(self) -> None:
        seen = set()
        for v, _ in self.eqs:
            if v in seen:
                raise ValueError(f"duplicate ODE variable {v}")
            seen.add(v)

    @property
    def vars(self) -> Tuple[Variable, ...]:
        return tuple(v for v, _ in self.eqs)


@dataclass(frozen=True)
class Choice(Program):
    left: Program
    right: Program


@dataclass(frozen=True)
class Seq(Program):
    first: Program
    second: Program


@dataclass(frozen=True)
class Loop(Program):
    body: Program


@dataclass(frozen=True)
class IfElse(Program):
    """if (cond) then {then_} [else {else_}]; removed by desugaring."""

    cond: Formula
    then_: Program
    else_: Optional[Program] = None


@dataclass(frozen=True)
class While(Program):
    """while (cond) {body}; removed by desugaring."""

    cond: Formula
    body: Program


# ------------------------------------------------------------------- hybrid automata


@dataclass(frozen=True)
class Mode:
    name: str
    flow: Tuple[Tuple[Variable, Term], ...]
    domain: Formula
    init: Formula


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    guard: Formula
    resets: Tuple[Tuple[Variable, Term], ...]


@dataclass(frozen=True)
class HybridAutomaton:
    name: str
    variables: Tuple[Variable, ...]
    modes: Tuple[Mode, ...]
    edges: Tuple[Edge, ...]
    initial: Optional[str] = None  # designated initial mode, if any

    def __post_init__(self) -> None:
        names = [m.name for m in self.modes]
        if len(set(names)) != len(names):
            raise ValueError("mode names must be unique")
        known = set(names)
        for e in self.edges:
            if e.source not in known or e.target not in known:
                raise ValueError(f"edge {e.source}->{e.target} names unknown mode")
        if self.initial is not None and self.initial not in known:
            raise ValueError(f"unknown initial mode {self.initial}")


# ------------------------------------------------------------------- constructors

TRUE = TrueF()
FALSE = FalseF()

ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def const(value) -> Const:
    return Const(Fraction(value))


def neg(t: Term) -> Term:
    """Negation, folding constants to keep terms canonical."""
    if isinstance(t, Const):
        return Const(-t.value)
    return Neg(t)


def div(num: Term, den: Term) -> Term:
    """Quotient, folding constant/constant to a single rational."""
    if isinstance(num, Const) and isinstance(den, Const) and den.value != 0:
        return Const(num.value / den.value)
    return Div(num, den)


def const_value(t: Term) -> Optional[Fraction]:
    """Fold a term of constants to its rational value, or None if not constant."""
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Neg):
        v = const_value(t.arg)
        return None if v is None else -v
    if isinstance(t, (Add, Sub, Mul)):
        a, b = const_value(t.left), const_value(t.right)
        if a is None or b is None:
            return None
        return {Add: a + b, Sub: a - b, Mul: a * b}[type(t)]
    if isinstance(t, Div):
        a, b = const_value(t.num), const_value(t.den)
        if a is None or b is None or b == 0:
            return None
        return a / b
    return None


def lnot(phi: Formula) -> Formula:
    """Negation with constant folding only (no other rewriting)."""
    if isinstance(phi, TrueF):
        return FALSE
    if isinstance(phi, FalseF):
        return TRUE
    return Not(phi)


def conj(*phis: Formula) -> Formula:
    parts = [p for p in phis if not isinstance(p, TrueF)]
    if any(isinstance(p, FalseF) for p in parts):
        return FALSE
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(*phis: Formula) -> Formula:
    parts = [p for p in phis if not isinstance(p, FalseF)]
    if any(isinstance(p, TrueF) for p in parts):
        return TRUE
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def seq(*progs: Program) -> Program:
    if not progs:
        return Test(TRUE)
    out = progs[0]
    for p in progs[1:]:
        out = Seq(out, p)
    return out


def term_children(t: Term) -> Tuple[Term, ...]:
    if isinstance(t, (Const, Var)):
        return ()
    if isinstance(t, (Add, Sub, Mul)):
        return (t.left, t.right)
    if isinstance(t, Div):
        return (t.num, t.den)
    if isinstance(t, Neg):
        return (t.arg,)
    if isinstance(t, FuncApp):
        return t.args
    raise TypeError(f"not a term: {t!r}")


def walk_terms(t: Term) -> Iterator[Term]:
    yield t
    for c in term_children(t):
        yield from walk_terms(c)


def is_core_program(p: Program) -> bool:
    """True iff p uses only the six core constructs (no sugar)."""
    if isinstance(p, (Assign, Test, ODE)):
        return True
    if isinstance(p, Choice):
        return is_core_program(p.left) and is_core_program(p.right)
    if isinstance(p, Seq):
        return is_core_program(p.first) and is_core_program(p.second)
    if isinstance(p, Loop):
        return is_core_program(p.body)
    return False


Expr = Union[Term, Formula, Program]
