"""`.dl` problem files.

Sections (any order, `#` line comments):

    Vars:
      state x, v.           # variables the programs may change
      const b, m.           # symbolic parameters
    Defs:
      plant ::= {x'=v, v'=a}.          # named program abbreviation
      safe  ::= x <= m.                # named formula abbreviation
    Automaton: ball                     # optional; compiled to a program
      var h, v.                         # abbreviation named like the automaton
      mode fly: flow {h'=v, v'=-g & h>=0} init true.
      edge fly -> fly: guard h=0 reset v := -c*v.
    Assume:
      v >= 0.
      b > 0.
    Prove:
      [a:=-b; plant] safe.

Abbreviations are acyclic (each may use only earlier ones) and are expanded
at load time, so the resulting Problem carries plain core ASTs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from ..core import ast
from ..core.ast import (Edge, FALSE, Formula, HybridAutomaton, Imp, Mode,
                        Program, TRUE, Term, Variable, conj)
from ..core.automata import compile_automaton
from ..core.desugar import desugar, desugar_formula
from ..core.vars import free_vars
from .lexer import DLSyntaxError
from .parser import _Parser

STATE, CONST = "state", "const"


@dataclass
class Problem:
    declarations: List[Tuple[Variable, str]]
    assumptions: List[Formula]
    conjecture: Formula
    definitions: Dict[str, Union[Formula, Program]] = field(default_factory=dict)
    automata: Dict[str, HybridAutomaton] = field(default_factory=dict)

    @property
    def state_vars(self) -> List[Variable]:
        return [v for v, role in self.declarations if role == STATE]

    @property
    def const_vars(self) -> List[Variable]:
        return [v for v, role in self.declarations if role == CONST]

    def goal(self) -> Formula:
        """The sentence to prove: assumptions imply the conjecture."""
        if not self.assumptions:
            return self.conjecture
        return Imp(conj(*self.assumptions), self.conjecture)


class _ProblemParser(_Parser):
    SECTIONS = ("Vars", "Defs", "Assume", "Prove", "Automaton")

    def at_section(self) -> bool:
        return (self.at("IDENT") and self.peek().text in self.SECTIONS
                and self.peek(1).kind == ":")

    def parse_problem(self) -> Problem:
        decls: List[Tuple[Variable, str]] = []
        assumptions: List[Formula] = []
        conjecture: Optional[Formula] = None
        automata: Dict[str, HybridAutomaton] = {}

        while not self.at("EOF"):
            if not self.at_section():
                raise self.error("expected a section header "
                                 "(Vars:, Defs:, Assume:, Prove:, Automaton:)")
            section = self.next().text
            self.expect(":")
            if section == "Vars":
                decls.extend(self.vars_section())
            elif section == "Defs":
                self.defs_section()
            elif section == "Assume":
                assumptions.extend(self.assume_section())
            elif section == "Prove":
                if conjecture is not None:
                    raise self.error("duplicate Prove section")
                conjecture = desugar_formula(self.formula())
                self.expect(".", "'.' ending the conjecture")
            elif section == "Automaton":
                a = self.automaton_section()
                automata[a.name] = a
                self.defs[a.name] = desugar(compile_automaton(a))
        if conjecture is None:
            raise DLSyntaxError("missing Prove section", 1, 1)

        problem = Problem(decls, assumptions, conjecture, dict(self.defs), automata)
        _validate(problem)
        return problem

    def vars_section(self) -> List[Tuple[Variable, str]]:
        decls = []
        while self.at("STATE", "CONST"):
            role = STATE if self.next().kind == "STATE" else CONST
            decls.append((Variable(self.expect("IDENT").text), role))
            while self.accept(","):
                decls.append((Variable(self.expect("IDENT").text), role))
            self.expect(".", "'.' ending the declaration")
        return decls

    def defs_section(self) -> None:
        while self.at("IDENT") and self.peek(1).kind == "::=":
            name = self.next().text
            if name in self.defs:
                raise self.error(f"duplicate definition of {name!r}")
            self.next()  # ::=
            body = self.def_body()
            self.expect(".", "'.' ending the definition")
            self.defs[name] = body

    def def_body(self) -> Union[Formula, Program]:
        saved = self.i
        try:
            f = self.formula()
            if self.at("."):
                return desugar_formula(f)
        except DLSyntaxError:
            pass
        self.i = saved
        return desugar(self.program())

    def assume_section(self) -> List[Formula]:
        out = []
        while not self.at_section() and not self.at("EOF"):
            out.append(desugar_formula(self.formula()))
            self.expect(".", "'.' ending the assumption")
        return out

    def automaton_section(self) -> HybridAutomaton:
        name = self.expect("IDENT", "the automaton name").text
        variables: List[Variable] = []
        modes: List[Mode] = []
        edges: List[Edge] = []
        initial: Optional[str] = None
        while self.at("VAR", "MODE", "EDGE", "INITIAL"):
            kind = self.next().kind
            if kind == "VAR":
                variables.append(Variable(self.expect("IDENT").text))
                while self.accept(","):
                    variables.append(Variable(self.expect("IDENT").text))
                self.expect(".")
            elif kind == "MODE":
                mode_name = self.expect("IDENT").text
                self.expect(":")
                self.expect("FLOW", "'flow'")
                open_tok = self.expect("{")
                ode = self.ode_body(open_tok)
                init: Formula = FALSE
                if self.accept("INIT"):
                    init = self.formula()
                self.expect(".")
                modes.append(Mode(mode_name, ode.eqs, ode.domain, init))
            elif kind == "EDGE":
                src = self.expect("IDENT").text
                self.expect("->", "'->'")
                tgt = self.expect("IDENT").text
                self.expect(":")
                guard: Formula = TRUE
                if self.accept("GUARD"):
                    guard = self.formula()
                resets: List[Tuple[Variable, Term]] = []
                if self.accept("RESET"):
                    while True:
                        v = Variable(self.expect("IDENT").text)
                        self.expect(":=")
                        resets.append((v, self.term()))
                        if not self.accept(","):
                            break
                self.expect(".")
                edges.append(Edge(src, tgt, guard, tuple(resets)))
            else:  # INITIAL
                initial = self.expect("IDENT").text
                self.expect(".")
        try:
            return HybridAutomaton(name, tuple(variables), tuple(modes),
                                   tuple(edges), initial)
        except ValueError as exc:
            raise self.error(str(exc)) from None


def _validate(problem: Problem) -> None:
    declared = {v for v, _ in problem.declarations}
    if not declared:
        return  # declarations are optional; skip the check
    undeclared = sorted(v.name for v in free_vars(problem.goal()) if v not in declared)
    if undeclared:
        raise DLSyntaxError(
            f"undeclared variables in the conjecture: {', '.join(undeclared)}", 1, 1)


def parse_problem(text: str) -> Problem:
    p = _ProblemParser(text)
    problem = p.parse_problem()
    tok = p.peek()
    if tok.kind != "EOF":
        raise DLSyntaxError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
    return problem


def load_problem(path: str) -> Problem:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem(fh.read())
