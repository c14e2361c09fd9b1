"""Pretty printer: minimal parenthesization, lossless round trip.

``parse(pretty(node), kind)`` is structurally equal to ``node``.  The printer
can also emit a span map from node paths (child-index sequences over
formula/program structure) to character ranges, which the interactive UI uses
for click-to-position.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..core import ast
from ..core.ast import (Add, And, Assign, AssignAny, Box, Choice, Cmp, Const,
                        Diamond, Div, Exists, FalseF, Forall, Formula,
                        FuncApp, Iff, IfElse, Imp, Loop, Mul, Neg, Not, ODE,
                        Or, Program, Seq, Sub, Term, Test, TrueF, Var, While)

# Term precedence levels: higher binds tighter.
_ADD, _MUL, _UNARY, _ATOM = 1, 2, 3, 4
# Formula precedence levels.
_IFF, _IMP, _OR, _AND, _UNARYF = 1, 2, 3, 4, 5
# Program precedence levels.
_CHOICE, _SEQ, _PRIM = 1, 2, 3

Path = Tuple[int, ...]


class _Emitter:
    def __init__(self) -> None:
        self.parts: List[str] = []
        self.length = 0
        self.spans: Dict[Path, Tuple[int, int]] = {}

    def emit(self, text: str) -> None:
        self.parts.append(text)
        self.length += len(text)

    def text(self) -> str:
        return "".join(self.parts)


def _frac(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _collapse_power(t: Term) -> Tuple[Term, int]:
    """Recognize a left-nested product of one identical factor as a power."""
    if not isinstance(t, Mul):
        return t, 1
    base = t.right
    cur = t.left
    count = 1
    while isinstance(cur, Mul) and cur.right == base:
        count += 1
        cur = cur.left
    if cur == base:
        return base, count + 1
    return t, 1


def _term(e: _Emitter, t: Term, prec: int) -> None:
    if isinstance(t, Const):
        s = _frac(t.value)
        if ("/" in s and prec > _MUL) or (s.startswith("-") and prec > _ADD):
            e.emit(f"({s})")
        else:
            e.emit(s)
        return
    if isinstance(t, Var):
        e.emit(str(t.var))
        return
    if isinstance(t, (Add, Sub)):
        op = "+" if isinstance(t, Add) else "-"
        parens = prec > _ADD
        if parens:
            e.emit("(")
        _term(e, t.left, _ADD)
        e.emit(op)
        _term(e, t.right, _MUL)
        if parens:
            e.emit(")")
        return
    if isinstance(t, Mul):
        base, k = _collapse_power(t)
        if k > 1:
            wrap = prec > _UNARY  # a^b is not an atom; parenthesize in slots
            if wrap:
                e.emit("(")
            _term(e, base, _ATOM)
            e.emit(f"^{k}")
            if wrap:
                e.emit(")")
            return
        parens = prec > _MUL
        if parens:
            e.emit("(")
        _term(e, t.left, _MUL)
        e.emit("*")
        _term(e, t.right, _UNARY)
        if parens:
            e.emit(")")
        return
    if isinstance(t, Div):
        parens = prec > _MUL
        if parens:
            e.emit("(")
        _term(e, t.num, _MUL)
        e.emit("/")
        _term(e, t.den, _ATOM)
        if parens:
            e.emit(")")
        return
    if isinstance(t, Neg):
        parens = prec > _UNARY
        if parens:
            e.emit("(")
        e.emit("-")
        _term(e, t.arg, _UNARY + 1)
        if parens:
            e.emit(")")
        return
    if isinstance(t, FuncApp):
        e.emit(t.fname)
        e.emit("(")
        for i, a in enumerate(t.args):
            if i:
                e.emit(",")
            _term(e, a, _ADD)
        e.emit(")")
        return
    raise TypeError(f"not a term: {t!r}")


def _formula(e: _Emitter, f: Formula, prec: int, path: Path,
             spans: bool) -> None:
    start = e.length
    if isinstance(f, TrueF):
        e.emit("true")
    elif isinstance(f, FalseF):
        e.emit("false")
    elif isinstance(f, Cmp):
        _term(e, f.left, _ADD)
        e.emit(f.op)
        _term(e, f.right, _ADD)
    elif isinstance(f, Not):
        e.emit("!")
        _formula(e, f.arg, _UNARYF, path + (0,), spans)
    elif isinstance(f, (Iff, Imp, Or, And)):
        level = {Iff: _IFF, Imp: _IMP, Or: _OR, And: _AND}[type(f)]
        op = {Iff: "<->", Imp: "->", Or: "|", And: "&"}[type(f)]
        parens = prec > level
        if parens:
            e.emit("(")
        # -> is right-associative; the others are left-associative
        lp = level if not isinstance(f, Imp) else level + 1
        rp = level + 1 if not isinstance(f, Imp) else level
        _formula(e, f.left, lp, path + (0,), spans)
        e.emit(op)
        _formula(e, f.right, rp, path + (1,), spans)
        if parens:
            e.emit(")")
    elif isinstance(f, (Forall, Exists)):
        kw = "forall" if isinstance(f, Forall) else "exists"
        parens = prec > _UNARYF
        if parens:
            e.emit("(")
        e.emit(f"{kw} {f.var.name} . ")
        _formula(e, f.body, _UNARYF, path + (0,), spans)
        if parens:
            e.emit(")")
    elif isinstance(f, (Box, Diamond)):
        parens = prec > _UNARYF
        if parens:
            e.emit("(")
        opener, closer = ("[", "]") if isinstance(f, Box) else ("<", ">")
        e.emit(opener)
        _program(e, f.prog, _CHOICE, path + (0,), spans)
        e.emit(closer)
        _formula(e, f.post, _UNARYF, path + (1,), spans)
        if parens:
            e.emit(")")
    else:
        raise TypeError(f"not a formula: {f!r}")
    if spans:
        e.spans[path] = (start, e.length)


def _program(e: _Emitter, p: Program, prec: int, path: Path,
             spans: bool) -> None:
    start = e.length
    if isinstance(p, Assign):
        e.emit(f"{p.var.name}:=")
        _term(e, p.term, _ADD)
    elif isinstance(p, AssignAny):
        e.emit(f"{p.var.name}:=*")
    elif isinstance(p, Test):
        e.emit("?")
        _formula(e, p.cond, _IFF, path + (0,), spans)
    elif isinstance(p, ODE):
        e.emit("{")
        for i, (v, rhs) in enumerate(p.eqs):
            if i:
                e.emit(",")
            e.emit(f"{v.name}'=")
            _term(e, rhs, _ADD)
        if not isinstance(p.domain, TrueF):
            e.emit("&")
            _formula(e, p.domain, _IFF, path + (0,), spans)
        e.emit("}")
    elif isinstance(p, Choice):
        parens = prec > _CHOICE
        if parens:
            e.emit("{")
        _program(e, p.left, _CHOICE, path + (0,), spans)
        e.emit(" ++ ")
        _program(e, p.right, _SEQ, path + (1,), spans)
        if parens:
            e.emit("}")
    elif isinstance(p, Seq):
        parens = prec > _SEQ
        if parens:
            e.emit("{")
        _program(e, p.first, _SEQ, path + (0,), spans)
        e.emit("; ")
        _program(e, p.second, _PRIM, path + (1,), spans)
        if parens:
            e.emit("}")
    elif isinstance(p, Loop):
        e.emit("{")
        _program(e, p.body, _CHOICE, path + (0,), spans)
        e.emit("}*")
    elif isinstance(p, IfElse):
        e.emit("if (")
        _formula(e, p.cond, _IFF, path + (0,), spans)
        e.emit(") then {")
        _program(e, p.then_, _CHOICE, path + (1,), spans)
        e.emit("}")
        if p.else_ is not None:
            e.emit(" else {")
            _program(e, p.else_, _CHOICE, path + (2,), spans)
            e.emit("}")
    elif isinstance(p, While):
        e.emit("while (")
        _formula(e, p.cond, _IFF, path + (0,), spans)
        e.emit(") {")
        _program(e, p.body, _CHOICE, path + (1,), spans)
        e.emit("}")
    else:
        raise TypeError(f"not a program: {p!r}")
    if spans:
        e.spans[path] = (start, e.length)


def pretty(node) -> str:
    e = _Emitter()
    if isinstance(node, Term):
        _term(e, node, _ADD)
    elif isinstance(node, Formula):
        _formula(e, node, _IFF, (), False)
    elif isinstance(node, Program):
        _program(e, node, _CHOICE, (), False)
    else:
        raise TypeError(f"cannot pretty-print {node!r}")
    return e.text()


def pretty_with_spans(node) -> Tuple[str, Dict[Path, Tuple[int, int]]]:
    """Pretty text plus a map from formula/program paths to char ranges."""
    e = _Emitter()
    if isinstance(node, Formula):
        _formula(e, node, _IFF, (), True)
    elif isinstance(node, Program):
        _program(e, node, _CHOICE, (), True)
    else:
        raise TypeError(f"cannot pretty-print {node!r}")
    return e.text(), e.spans
