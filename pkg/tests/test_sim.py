import math
import random
from fractions import Fraction

import pytest

from dlverify.arith.evalx import eval_exact
from dlverify.core.ast import Box, Variable
from dlverify.parser import parse, pretty
from dlverify.sim import (Counterexample, ExplosionError, SimConfig, Unknown,
                          discrete_reach, eval_discrete, falsify, run,
                          trace_to_csv)
from dlverify.sim.backend import BACKEND_NAME, integrate, integrate_pure
from dlverify.sim.compile import FlatODE
from dlverify.sim.reach import NotSaturated

from generators import rand_discrete_program, rand_state

V = Variable


def fstate(**kv):
    return {V(k): float(v) for k, v in kv.items()}


def qstate(**kv):
    return {V(k): Fraction(v) for k, v in kv.items()}


class TestRun:
    def test_braking_finals_on_flow(self):
        prog = parse("a:=-b; {x'=v, v'=a & v>=0}", "program")
        res = run(prog, fstate(x=0, v=1, a=0, b=1), SimConfig(seed=7))
        assert res.results
        for state, trace in res.results:
            x, v = state[V("x")], state[V("v")]
            t = 1.0 - v          # v(t) = 1 - t along the braking flow
            assert abs(x - (t - t * t / 2)) < 1e-6
        assert max(s[V("x")] for s, _ in res.results) == pytest.approx(0.5, abs=1e-6)

    def test_failed_test_has_no_transitions(self):
        res = run(parse("?false; x:=1", "program"), fstate(x=0), SimConfig())
        assert res.results == []

    def test_zero_duration_included(self):
        prog = parse("{x'=1}", "program")
        res = run(prog, fstate(x=0), SimConfig(seed=1))
        assert any(abs(s[V("x")]) < 1e-12 for s, _ in res.results)

    def test_domain_violated_initially_stops_everything(self):
        prog = parse("{x'=1 & x<=0}", "program")
        res = run(prog, fstate(x=1), SimConfig())
        assert res.results == []

    def test_bouncing_ball_apex_decay(self):
        # successive apexes decay by c^2 = 1/4 (energy bookkeeping)
        prog = parse(
            "{ {h'=v, v'=-g & h>=0}; if (h=0) then {v:=-c*v} }*", "program")
        cfg = SimConfig(seed=5, max_loop=3, ode_samples=3, max_ode_time=4.0,
                        max_branches=4000)
        res = run(prog, fstate(h=1, v=0, g=1, c=0.5), cfg)
        apex = {}
        for state, trace in res.results:
            bounces = sum(1 for step in trace if step.label == "assign")
            h, v = state[V("h")], state[V("v")]
            energy_height = h + v * v / 2.0
            apex.setdefault(bounces, set()).add(round(energy_height, 4))
        assert apex.get(0) and max(apex[0]) == pytest.approx(1.0, rel=1e-3)
        if 1 in apex:
            assert max(apex[1]) == pytest.approx(0.25, rel=0.01)
        if 2 in apex:
            assert max(apex[2]) == pytest.approx(0.0625, rel=0.01)

    def test_csv_export(self):
        prog = parse("x:=1; {x'=1}", "program")
        res = run(prog, fstate(x=0), SimConfig(seed=2, ode_samples=2))
        text = trace_to_csv(res.results[0][1])
        assert "assign" in text and "ode-step" in text


class TestBackends:
    def test_compiled_and_pure_agree(self):
        flat = FlatODE(parse("{x'=v, v'=-x*x}", "program").eqs,
                       parse("x^2<=4"), [V("x"), V("v")])
        y0 = [0.5, 1.0]
        a, ea = integrate(flat, y0, 1.0 / 64, 200)
        b, eb = integrate_pure(flat, y0, 1.0 / 64, 200)
        assert ea == eb
        assert len(a) == len(b)
        for ra, rb in zip(a, b):
            for xa, xb in zip(ra, rb):
                assert abs(xa - xb) < 1e-12


class TestDiscreteReach:
    def test_choice(self):
        r = discrete_reach(parse("x:=1 ++ x:=2", "program"), qstate(x=0))
        assert sorted(dict(s)[V("x")] for s in r) == [1, 2]

    def test_counter_loop(self):
        r = discrete_reach(parse("{x:=x+1}*", "program"), qstate(x=0),
                           loop_bound=3)
        assert sorted(dict(s)[V("x")] for s in r) == [0, 1, 2, 3]

    def test_while_desugaring(self):
        prog = parse("while (x>=0) { x:=x-1 }", "program")
        r = discrete_reach(prog, qstate(x=2), loop_bound=5)
        assert [dict(s)[V("x")] for s in r] == [-1]

    def test_explosion_guard(self):
        prog = parse("{x:=x+1 ++ y:=y+1}*", "program")
        with pytest.raises(ExplosionError):
            discrete_reach(prog, qstate(x=0, y=0), loop_bound=64, cap=100)

    def test_saturation_flag(self):
        with pytest.raises(NotSaturated):
            discrete_reach(parse("{x:=x+1}*", "program"), qstate(x=0),
                           loop_bound=4, saturate=True)

    def test_exactness_on_rationals(self):
        prog = parse("x:=x+1/3; {x:=2*x}*", "program")
        r = discrete_reach(prog, qstate(x=Fraction(1, 3)), loop_bound=2)
        values = sorted(dict(s)[V("x")] for s in r)
        assert values == [Fraction(2, 3), Fraction(4, 3), Fraction(8, 3)]


class TestEvalDiscrete:
    def test_box_diamond(self):
        s = qstate(x=0)
        assert eval_discrete(parse("[x:=1 ++ x:=2] x>=1"), s) is True
        assert eval_discrete(parse("<x:=1 ++ x:=2> x>=2"), s) is True
        assert eval_discrete(parse("[x:=1 ++ x:=2] x>=2"), s) is False


class TestFalsify:
    def test_counterexample_one(self):
        cex = falsify(parse("x!=0 -> [{x'=1}] x!=0"), SimConfig(seed=3))
        assert isinstance(cex, Counterexample)
        assert cex.margin > 1e-3
        assert pretty(cex.violated) == "x!=0"
        assert cex.replay(SimConfig(seed=3), step_scale=0.5) is not None

    def test_braking_without_assumptions(self):
        cex = falsify(parse("v>=0 & x<=m -> [a:=-b; {x'=v,v'=a}] x<=m"),
                      SimConfig(seed=3))
        assert isinstance(cex, Counterexample)

    def test_trivial_truth_reports_unknown(self):
        assert isinstance(falsify(parse("true -> [?true] true"),
                                  SimConfig(seed=1)), Unknown)

    def test_valid_formula_never_falsified(self):
        out = falsify(parse("v>=0 & A>=0 -> [a:=A; {x'=v,v'=a}] v>=0"),
                      SimConfig(seed=11, falsify_samples=60))
        assert isinstance(out, Unknown)

    def test_monotone_refutation(self):
        # counterexamples must replay at half step with margin above tolerance
        cfg = SimConfig(seed=13)
        for text in ["x!=0 -> [{x'=1}] x!=0",
                     "x<=m -> [{x'=1}] x<=m",
                     "v>=0 -> [{x'=v, v'=1}] x<=10"]:
            cex = falsify(parse(text), cfg)
            if isinstance(cex, Unknown):
                continue
            replayed = cex.replay(cfg, step_scale=0.5)
            assert replayed is not None and replayed >= cfg.margin_tol


class TestAxiomValiditySampling:
    AXIOMS = ("assign", "test", "choice", "seq", "unwind")

    @pytest.mark.parametrize("axiom", AXIOMS)
    def test_axiom_sampled(self, axiom):
        rng = random.Random(hash(axiom) % 100000)
        checked = 0
        while checked < 150:
            s = rand_state(rng)
            try:
                if axiom == "assign":
                    from generators import rand_term, rand_qf_formula, VARS
                    x = rng.choice(VARS)
                    theta = rand_term(rng, 2)
                    post = rand_qf_formula(rng, 2)
                    from dlverify.core.ast import Assign
                    from dlverify.core.subst import admissible_substitute
                    lhs = eval_discrete(Box(Assign(x, theta), post), s)
                    rhs = eval_exact(admissible_substitute(post, x, theta), s)
                elif axiom == "test":
                    from generators import rand_qf_formula
                    from dlverify.core.ast import Imp, Test
                    chi = rand_qf_formula(rng, 2)
                    post = rand_qf_formula(rng, 2)
                    lhs = eval_discrete(Box(Test(chi), post), s)
                    rhs = eval_exact(Imp(chi, post), s)
                elif axiom == "choice":
                    from generators import rand_qf_formula
                    from dlverify.core.ast import And, Choice
                    a = rand_discrete_program(rng, 2)
                    b = rand_discrete_program(rng, 2)
                    post = rand_qf_formula(rng, 2)
                    lhs = eval_discrete(Box(Choice(a, b), post), s)
                    rhs = eval_discrete(And(Box(a, post), Box(b, post)), s)
                elif axiom == "seq":
                    from generators import rand_qf_formula
                    from dlverify.core.ast import Seq
                    a = rand_discrete_program(rng, 2)
                    b = rand_discrete_program(rng, 2)
                    post = rand_qf_formula(rng, 2)
                    lhs = eval_discrete(Box(Seq(a, b), post), s)
                    rhs = eval_discrete(Box(a, Box(b, post)), s)
                else:  # unwind: the n-bounded identity over Def. 1 clause 6
                    from generators import rand_qf_formula
                    from dlverify.core.ast import And, Loop
                    body = rand_discrete_program(rng, 2)
                    post = rand_qf_formula(rng, 2)
                    n = rng.randint(1, 4)
                    lhs = all(eval_exact(post, dict(w)) for w in
                              discrete_reach(Loop(body), s, loop_bound=n))
                    inner = all(
                        eval_exact(post, dict(w2))
                        for w1 in discrete_reach(body, s, loop_bound=n)
                        for w2 in discrete_reach(Loop(body), dict(w1),
                                                 loop_bound=n - 1))
                    rhs = eval_exact(post, s) and inner
            except (NotSaturated, ExplosionError, ZeroDivisionError):
                continue
            assert lhs == rhs
            checked += 1
