"""Recursive-descent parser for terms, formulas, and hybrid programs.

Precedences follow the usual conventions: in formulas ! binds tighter than &
than | than -> than <->, implications associate to the right, and quantifiers
and modalities scope over the formula immediately after them.  In programs,
++ (choice) binds loosest, then ;, then postfix * on braced groups.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from ..core import ast
from ..core.ast import (Assign, AssignAny, Box, Choice, Cmp, Const, Diamond,
                        Div, Exists, FALSE, Forall, Formula, FuncApp, IfElse,
                        Loop, Mul, Neg, Not, ODE, Program, Seq, Term, Test,
                        TRUE, Var, Variable, While)
from .lexer import DLSyntaxError, Token, tokenize


class ArityError(DLSyntaxError):
    """Malformed ODE system (e.g. duplicate left-hand variable)."""


Defs = Dict[str, Union[Formula, Program]]


class _Parser:
    def __init__(self, text: str, defs: Optional[Defs] = None):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.defs: Defs = defs or {}

    # ------------------------------------------------------------ plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def at(self, *kinds: str) -> bool:
        return self.peek().kind in kinds

    def accept(self, kind: str) -> Optional[Token]:
        if self.at(kind):
            return self.next()
        return None

    def expect(self, kind: str, what: str = "") -> Token:
        t = self.peek()
        if t.kind != kind:
            want = what or repr(kind)
            raise DLSyntaxError(f"expected {want}, found {t.text or 'end of input'!r}",
                                t.line, t.col)
        return self.next()

    def error(self, message: str) -> DLSyntaxError:
        t = self.peek()
        return DLSyntaxError(message, t.line, t.col)

    def _spanned(self, node, start: int):
        end = self.tokens[self.i - 1].end if self.i > 0 else start
        object.__setattr__(node, "span", (start, end))
        return node

    # --------------------------------------------------------------- terms

    def term(self) -> Term:
        start = self.peek().pos
        t = self.product()
        while self.at("+", "-"):
            op = self.next().kind
            rhs = self.product()
            t = ast.Add(t, rhs) if op == "+" else ast.Sub(t, rhs)
            self._spanned(t, start)
        return t

    def product(self) -> Term:
        start = self.peek().pos
        t = self.unary_term()
        while self.at("*", "/"):
            op = self.next().kind
            rhs = self.unary_term()
            if op == "*":
                t = Mul(t, rhs)
            elif isinstance(t, Const) and isinstance(rhs, Const):
                # constant quotients denote single rational constants
                if rhs.value == 0:
                    raise self.error("division by zero")
                t = Const(t.value / rhs.value)
            else:
                try:
                    t = Div(t, rhs)
                except ast.DivisionError as exc:
                    raise self.error(str(exc)) from None
            self._spanned(t, start)
        return t

    def unary_term(self) -> Term:
        start = self.peek().pos
        if self.accept("-"):
            arg = self.unary_term()
            if isinstance(arg, Const):
                return self._spanned(Const(-arg.value), start)
            return self._spanned(Neg(arg), start)
        return self.power()

    def power(self) -> Term:
        start = self.peek().pos
        base = self.atom_term()
        if self.accept("^"):
            tok = self.expect("NUMBER", "a nonnegative integer exponent")
            if "." in tok.text:
                raise DLSyntaxError("exponent must be a nonnegative integer",
                                    tok.line, tok.col)
            n = int(tok.text)
            if n == 0:
                return self._spanned(Const(Fraction(1)), start)
            t = base
            for _ in range(n - 1):
                t = Mul(t, base)
            return self._spanned(t, start)
        return base

    def atom_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.next()
            return self._spanned(Const(Fraction(tok.text)), tok.pos)
        if tok.kind == "IDENT":
            self.next()
            if self.at("("):
                self.next()
                args = [self.term()]
                while self.accept(","):
                    args.append(self.term())
                self.expect(")")
                return self._spanned(FuncApp(tok.text, tuple(args)), tok.pos)
            return self._spanned(Var(Variable(tok.text)), tok.pos)
        if tok.kind == "(":
            self.next()
            t = self.term()
            self.expect(")")
            return t
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")

    # ------------------------------------------------------------ formulas

    def formula(self) -> Formula:
        start = self.peek().pos
        f = self.implication()
        while self.accept("<->"):
            f = self._spanned(ast.Iff(f, self.implication()), start)
        return f

    def implication(self) -> Formula:
        start = self.peek().pos
        f = self.disjunction()
        if self.accept("->"):
            return self._spanned(ast.Imp(f, self.implication()), start)
        return f

    def disjunction(self) -> Formula:
        start = self.peek().pos
        f = self.conjunction()
        while self.accept("|"):
            f = self._spanned(ast.Or(f, self.conjunction()), start)
        return f

    def conjunction(self) -> Formula:
        start = self.peek().pos
        f = self.unary_formula()
        while self.accept("&"):
            f = self._spanned(ast.And(f, self.unary_formula()), start)
        return f

    def unary_formula(self) -> Formula:
        tok = self.peek()
        if tok.kind == "!":
            self.next()
            return self._spanned(Not(self.unary_formula()), tok.pos)
        if tok.kind in ("FORALL", "EXISTS"):
            self.next()
            name = self.expect("IDENT", "a variable").text
            self.expect(".", "'.' after the quantified variable")
            body = self.unary_formula()
            cls = Forall if tok.kind == "FORALL" else Exists
            return self._spanned(cls(Variable(name), body), tok.pos)
        if tok.kind == "[":
            self.next()
            prog = self.program()
            self.expect("]")
            return self._spanned(Box(prog, self.unary_formula()), tok.pos)
        if tok.kind == "<":
            self.next()
            prog = self.program()
            self.expect(">")
            return self._spanned(Diamond(prog, self.unary_formula()), tok.pos)
        return self.primary_formula()

    def primary_formula(self) -> Formula:
        tok = self.peek()
        if tok.kind == "TRUE":
            self.next()
            return self._spanned(ast.TrueF(), tok.pos)
        if tok.kind == "FALSE":
            self.next()
            return self._spanned(ast.FalseF(), tok.pos)
        # A named formula abbreviation, unless it starts a comparison.
        if tok.kind == "IDENT" and tok.text in self.defs \
                and isinstance(self.defs[tok.text], Formula) \
                and self.peek(1).kind not in ("=", ">=", ">", "<=", "<", "!=",
                                              "+", "-", "*", "/", "^", "("):
            self.next()
            return self.defs[tok.text]
        if tok.kind == "(":
            # Could be a parenthesized formula or a parenthesized term that
            # starts a comparison; try the formula reading first.
            saved = self.i
            try:
                self.next()
                f = self.formula()
                self.expect(")")
                return f
            except DLSyntaxError:
                self.i = saved
        left = self.term()
        op_tok = self.peek()
        if op_tok.kind not in ("=", ">=", ">", "<=", "<", "!="):
            raise self.error("expected a comparison operator")
        self.next()
        right = self.term()
        return self._spanned(Cmp(left, op_tok.kind, right), tok.pos)

    # ------------------------------------------------------------ programs

    def program(self) -> Program:
        start = self.peek().pos
        p = self.seq_program()
        while self.accept("++"):
            p = self._spanned(Choice(p, self.seq_program()), start)
        return p

    def seq_program(self) -> Program:
        start = self.peek().pos
        p = self.rep_program()
        while self.accept(";"):
            if self.at("]", ">", "}", "++", "EOF", ")"):
                break  # trailing semicolon
            p = self._spanned(Seq(p, self.rep_program()), start)
        return p

    def rep_program(self) -> Program:
        start = self.peek().pos
        p, starrable = self.primary_program()
        while self.at("*"):
            if not starrable:
                raise self.error("'*' repetition applies only to braced programs")
            self.next()
            p = self._spanned(Loop(p), start)
        return p

    def primary_program(self) -> Tuple[Program, bool]:
        """Parse one program atom; the flag says whether postfix * may follow."""
        tok = self.peek()
        if tok.kind == "?":
            self.next()
            return self._spanned(Test(self.formula()), tok.pos), False
        if tok.kind == "{":
            self.next()
            if self.at("IDENT") and self.peek(1).kind == "'":
                return self.ode_body(tok), True
            p = self.program()
            self.expect("}")
            return p, True
        if tok.kind == "IF":
            self.next()
            self.expect("(")
            cond = self.formula()
            self.expect(")")
            self.expect("THEN", "'then'")
            self.expect("{")
            then_ = self.program()
            self.expect("}")
            els = None
            if self.accept("ELSE"):
                self.expect("{")
                els = self.program()
                self.expect("}")
            return self._spanned(IfElse(cond, then_, els), tok.pos), False
        if tok.kind == "WHILE":
            self.next()
            self.expect("(")
            cond = self.formula()
            self.expect(")")
            self.expect("{")
            body = self.program()
            self.expect("}")
            return self._spanned(While(cond, body), tok.pos), False
        if tok.kind == "IDENT":
            if self.peek(1).kind == ":=":
                self.next()
                self.next()
                if self.accept("*"):
                    return self._spanned(AssignAny(Variable(tok.text)), tok.pos), False
                t = self._spanned(Assign(Variable(tok.text), self.term()), tok.pos)
                return t, False
            if tok.text in self.defs and isinstance(self.defs[tok.text], Program):
                self.next()
                return self.defs[tok.text], False
            raise self.error(f"unknown program abbreviation {tok.text!r}")
        raise self.error(f"expected a program, found {tok.text or 'end of input'!r}")

    def ode_body(self, open_tok: Token) -> Program:
        eqs: List[Tuple[Variable, Term]] = []
        while True:
            name_tok = self.expect("IDENT", "an ODE variable")
            self.expect("'", "a prime on the ODE variable")
            self.expect("=")
            rhs = self.term()
            eqs.append((Variable(name_tok.text), rhs))
            if not self.accept(","):
                break
        domain: Formula = TRUE
        if self.accept("&"):
            domain = self.formula()
        self.expect("}")
        seen = set()
        for v, _ in eqs:
            if v in seen:
                raise ArityError(f"duplicate ODE variable {v.name!r}",
                                 open_tok.line, open_tok.col)
            seen.add(v)
        return self._spanned(ODE(tuple(eqs), domain), open_tok.pos)


def parse(text: str, entry: str = "formula", defs: Optional[Defs] = None):
    """Parse text as a 'term', 'formula', or 'program'."""
    p = _Parser(text, defs)
    if entry == "term":
        node = p.term()
    elif entry == "formula":
        node = p.formula()
    elif entry == "program":
        node = p.program()
    else:
        raise ValueError(f"unknown entry point {entry!r}")
    tok = p.peek()
    if tok.kind != "EOF":
        raise DLSyntaxError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
    return node
