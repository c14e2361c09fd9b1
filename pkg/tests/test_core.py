import random
from fractions import Fraction

import pytest

from dlverify.core import ast
from dlverify.core.ast import (Assign, Box, Choice, Cmp, Const, Forall, Loop,
                               ODE, Seq, Test, Var, Variable, TRUE)
from dlverify.core.automata import MultipleInitError, choice_branches, compile_automaton
from dlverify.core.desugar import desugar
from dlverify.core.subst import ClashError, admissible_substitute
from dlverify.core.vars import free_vars, var_analysis
from dlverify.arith.evalx import eval_exact, eval_term
from dlverify.parser import parse

from generators import rand_qf_formula, rand_state


def names(vs):
    return sorted(v.name for v in vs)


class TestVarAnalysis:
    def test_plain_term(self):
        free, bound = var_analysis(parse("x+y*z", "term"))
        assert names(free) == ["x", "y", "z"]
        assert not bound

    def test_braking_modality(self):
        # free {b,v,x,m}: a is written before the flow reads it
        phi = parse("[a:=-b; {x'=v, v'=a & v>=0}] x<=m")
        free, bound = var_analysis(phi)
        assert names(free) == ["b", "m", "v", "x"]
        assert names(bound) == ["a", "v", "x"]

    def test_quantifier(self):
        free, bound = var_analysis(parse("forall x . x>=y"))
        assert names(free) == ["y"]
        assert names(bound) == ["x"]

    def test_choice_keeps_initial_dependency(self):
        # x is only written on one branch, so its initial value can matter
        phi = parse("[x:=1 ++ ?true] x>=0")
        free, _ = var_analysis(phi)
        assert "x" in names(free)


class TestSubstitution:
    def test_example3_discovery_step(self):
        phi = parse("forall t . (t>=0 -> (a/2)*t^2+v*t+x <= m)")
        out = admissible_substitute(phi, Variable("a"), parse("-b", "term"))
        assert out == parse("forall t . (t>=0 -> (-b/2)*t^2+v*t+x <= m)")

    def test_identity(self):
        phi = parse("forall y . x>=y")
        assert admissible_substitute(phi, Variable("x"), Var(Variable("x"))) == phi

    def test_capture_is_an_error(self):
        phi = parse("forall y . x>=y")
        with pytest.raises(ClashError):
            admissible_substitute(phi, Variable("x"), Var(Variable("y")))

    def test_modality_binding_substituted_variable(self):
        phi = parse("[x:=1 ++ ?true] x>=0")
        with pytest.raises(ClashError):
            admissible_substitute(phi, Variable("x"), Const(Fraction(2)))

    def test_ground_substitution_lemma_sampled(self):
        rng = random.Random(7)
        x = Variable("x")
        for _ in range(300):
            phi = rand_qf_formula(rng, 2)
            theta = Const(Fraction(rng.randint(-3, 3)))
            state = rand_state(rng)
            substituted = admissible_substitute(phi, x, theta)
            shifted = dict(state)
            shifted[x] = eval_term(theta, state)
            assert eval_exact(substituted, state) == eval_exact(phi, shifted)


class TestDesugar:
    def test_if_then(self):
        prog = parse("if (h=0) then { v := -c*v }", "program")
        out = desugar(prog)
        assert out == parse("{?h=0; v:=-c*v} ++ ?!h=0", "program")

    def test_assign_any(self):
        assert desugar(parse("x:=*", "program")) == \
            parse("{x'=1} ++ {x'=-1}", "program")

    def test_while_false(self):
        out = desugar(parse("while (false) { x:=1 }", "program"))
        assert out == parse("{?false; x:=1}*; ?true", "program")

    def test_idempotent_on_core(self):
        rng = random.Random(11)
        from generators import rand_discrete_program
        for _ in range(100):
            prog = rand_discrete_program(rng)
            core = desugar(prog)
            assert desugar(core) == core


def car_automaton():
    # two modes sharing the kinematic flow, switching on the guard chi
    chi = parse("v<=20")
    flow = parse("{x'=v, v'=a}", "program").eqs
    dom = parse("v>=0")
    return ast.HybridAutomaton(
        "car", (Variable("x"), Variable("v"), Variable("a")),
        (ast.Mode("accel", flow, dom, TRUE),
         ast.Mode("brake", flow, dom, ast.FALSE)),
        (ast.Edge("accel", "brake", TRUE, ((Variable("a"), parse("-b", "term")),)),
         ast.Edge("brake", "accel", chi, ((Variable("a"), parse("A", "term")),)),
         ast.Edge("accel", "accel", chi, ())),
    )


class TestAutomata:
    def test_branch_count_is_modes_plus_edges(self):
        prog = compile_automaton(car_automaton())
        assert isinstance(prog, Seq) and isinstance(prog.second, Loop)
        branches = choice_branches(prog.second.body)
        assert len(branches) == 2 + 3

    def test_car_listing_structure(self):
        prog = compile_automaton(car_automaton())
        q = prog.first.var
        branches = choice_branches(prog.second.body)
        # continuous branch per mode: ?q=i; {flow & dom}
        cont = [b for b in branches
                if isinstance(b, Seq) and isinstance(b.second, ODE)]
        assert len(cont) == 2
        # every discrete branch tests the guard first and the target domain last
        def flat(p):
            if isinstance(p, Seq):
                return flat(p.first) + flat(p.second)
            return [p]

        disc = [b for b in branches if b not in cont]
        for b in disc:
            steps = flat(b)
            assert isinstance(steps[0], Test)
            assert isinstance(steps[-1], Test)  # domain test after the resets
            assert any(isinstance(s, Assign) and s.var == q for s in steps)

    def test_single_mode_no_edges(self):
        auto = ast.HybridAutomaton(
            "m", (Variable("x"),),
            (ast.Mode("only", ((Variable("x"), ast.ONE),), TRUE, TRUE),), ())
        prog = compile_automaton(auto)
        assert isinstance(prog.first, Assign)
        branches = choice_branches(prog.second.body)
        assert len(branches) == 1

    def test_multiple_init_error(self):
        auto = ast.HybridAutomaton(
            "m", (Variable("x"),),
            (ast.Mode("a", ((Variable("x"), ast.ONE),), TRUE, TRUE),
             ast.Mode("b", ((Variable("x"), ast.ONE),), TRUE, TRUE)), ())
        with pytest.raises(MultipleInitError):
            compile_automaton(auto)

    def test_designated_initial_overrides(self):
        auto = ast.HybridAutomaton(
            "m", (Variable("x"),),
            (ast.Mode("a", ((Variable("x"), ast.ONE),), TRUE, TRUE),
             ast.Mode("b", ((Variable("x"), ast.ONE),), TRUE, TRUE)),
            (), initial="b")
        prog = compile_automaton(auto)
        assert prog.first.term == Const(Fraction(1))  # b is mode number 1


class TestScopingSoundness:
    def test_eval_depends_only_on_free_variables(self):
        rng = random.Random(23)
        for _ in range(200):
            phi = rand_qf_formula(rng, 2)
            state = rand_state(rng)
            other = dict(state)
            # changing a non-free variable cannot change the value
            fv = free_vars(phi)
            for v in list(other):
                if v not in fv:
                    other[v] = other[v] + 17
            assert eval_exact(phi, state) == eval_exact(phi, other)
