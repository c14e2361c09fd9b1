import random

import pytest

from dlverify.core import ast
from dlverify.core.ast import (And, Box, Choice, Imp, Loop, Not, Or, Seq,
                               Test, Variable)
from dlverify.parser import DLSyntaxError, parse, parse_problem, pretty
from dlverify.parser.pretty import pretty_with_spans

from generators import rand_discrete_program, rand_qf_formula, rand_term


class TestGolden:
    def test_braking_program(self):
        prog = parse("a:=-b; {x'=v, v'=a & v>=0}", "program")
        assert isinstance(prog, Seq)
        ode = prog.second
        assert [v.name for v in ode.vars] == ["x", "v"]
        assert pretty(ode.domain) == "v>=0"

    def test_trivial_box(self):
        phi = parse("[?true]true")
        assert phi == Box(Test(ast.TRUE), ast.TRUE)

    def test_example3_formula(self):
        phi = parse("v^2<=2*b*(m-x) -> [a:=-b; {x'=v,v'=a}] x<=m")
        assert isinstance(phi, Imp)
        assert isinstance(phi.right, Box)

    def test_section32_precedence(self):
        # !A & B | C -> D | E & F  ==  (((!A)&B)|C) -> (D|(E&F))
        phi = parse("!A=1&B=1|C=1->D=1|E=1&F=1")
        assert isinstance(phi, Imp)
        assert isinstance(phi.left, Or)
        assert isinstance(phi.left.left, And)
        assert isinstance(phi.left.left.left, Not)
        assert isinstance(phi.right, Or)
        assert isinstance(phi.right.right, And)

    def test_modalities_bind_strong(self):
        phi = parse("[{x:=1}*](a=1&b=1)")
        assert isinstance(phi, Box)
        phi2 = parse("[{x:=1}*]a=1&b=1")
        assert isinstance(phi2, And)
        assert pretty(Box(Loop(parse("x:=1", "program")),
                          And(parse("a=1"), parse("b=1")))) == "[{x:=1}*](a=1&b=1)"

    def test_repetition_only_on_braced_programs(self):
        with pytest.raises(DLSyntaxError):
            parse("x:=1*", "program")
        assert isinstance(parse("{x:=1}*", "program"), Loop)

    def test_positions_attached(self):
        phi = parse("x>=0 & y>=0")
        assert phi.span is not None
        assert phi.left.span is not None

    def test_syntax_error_carries_position(self):
        with pytest.raises(DLSyntaxError) as err:
            parse("x >= ", "formula")
        assert err.value.line == 1

    def test_duplicate_ode_variable_rejected(self):
        with pytest.raises(DLSyntaxError):
            parse("{x'=1, x'=2}", "program")


class TestRoundTrip:
    CASES = [
        ("x+y*z", "term"),
        ("(x+1)^2-1/2", "term"),
        ("x^0+y^1", "term"),
        ("v^2<=2*b*(m-x) -> [a:=-b; {x'=v,v'=a}] x<=m", "formula"),
        ("forall x . exists y . x<y", "formula"),
        ("<{x'=a}> x>=b", "formula"),
        ("{ {h'=v,v'=-g & h>=0}; if (h=0) then {v:=-c*v} }*", "program"),
        ("while (x>=0) { x:=x-1 }", "program"),
        ("x:=*", "program"),
        ("?x>=0&y>=0; {z:=1 ++ z:=2}", "program"),
    ]

    @pytest.mark.parametrize("text,entry", CASES)
    def test_examples(self, text, entry):
        node = parse(text, entry)
        assert parse(pretty(node), entry) == node

    def test_fuzzed_terms(self):
        rng = random.Random(5)
        for _ in range(400):
            t = rand_term(rng, 3)
            assert parse(pretty(t), "term") == t

    def test_fuzzed_formulas(self):
        rng = random.Random(6)
        for _ in range(400):
            f = rand_qf_formula(rng, 3)
            assert parse(pretty(f), "formula") == f

    def test_fuzzed_programs(self):
        rng = random.Random(8)
        for _ in range(300):
            p = rand_discrete_program(rng, 3)
            assert parse(pretty(p), "program") == p

    def test_fuzzed_modal_formulas(self):
        rng = random.Random(9)
        for _ in range(200):
            f = Box(rand_discrete_program(rng, 2), rand_qf_formula(rng, 2))
            assert parse(pretty(f), "formula") == f

    def test_desugared_ball_reparses_identically(self):
        from dlverify.core.desugar import desugar
        ball = parse("{ {h'=v,v'=-g & h>=0}; if (h=0) then {v:=-c*v} }*",
                     "program")
        core = desugar(ball)
        assert parse(pretty(core), "program") == core


class TestSpans:
    def test_span_map_covers_subformulas(self):
        phi = parse("x>=0 & [a:=1]y>=0")
        text, spans = pretty_with_spans(phi)
        assert spans[()] == (0, len(text))
        # the box subformula has its own span and it parses back
        sub_span = spans[(1,)]
        sub_text = text[sub_span[0]:sub_span[1]]
        assert parse(sub_text, "formula") == phi.right


class TestProblems:
    def test_braking_problem(self, tmp_path):
        from pathlib import Path
        text = Path("problems/braking.dl").read_text()
        problem = parse_problem(text)
        assert [v.name for v in problem.state_vars] == ["x", "v", "a"]
        assert len(problem.assumptions) == 3
        assert pretty(problem.conjecture).startswith("[a:=-b;")

    def test_undeclared_variable_rejected(self):
        with pytest.raises(DLSyntaxError):
            parse_problem("Vars:\n  state x.\nProve:\n  x<=m.\n")

    def test_defs_expand_acyclically(self):
        problem = parse_problem(
            "Defs:\n  inv ::= x>=0.\n  prog ::= ?inv; x:=x+1.\n"
            "Prove:\n  [prog] x>=0.\n")
        assert "inv" not in pretty(problem.conjecture)

    def test_automaton_section_compiles(self):
        from pathlib import Path
        problem = parse_problem(Path("problems/ball_automaton.dl").read_text())
        assert "ball" in problem.automata
        assert "ball" in problem.definitions
