import json
import random
from fractions import Fraction

import pytest

from dlverify.arith import UnsupportedDegree
from dlverify.core.ast import Box, Imp, Variable
from dlverify.kernel import (ModalitiesRemain, NoMatch, NotClosed, Position,
                             PositionError, ReplayError, Sequent, ShapeError,
                             SideConditionError, apply_axiom, apply_rule,
                             check_proof, close_arith, hilbert_audit,
                             init_proof, proof_from_json, proof_to_json,
                             validate_proof)
from dlverify.odesolve import solve_ode
from dlverify.parser import parse, pretty
from dlverify.sim import eval_discrete
from dlverify.sim.reach import ExplosionError, NotSaturated

from generators import rand_discrete_program, rand_qf_formula, rand_state


def F(s):
    return parse(s, "formula")


def single_goal(ps):
    assert len(ps.goals) == 1
    return ps.goals[0][0]


class TestInitProof:
    def test_single_open_goal(self):
        ps = init_proof(F("v^2<=2*b*(m-x) -> [a:=-b; {x'=v,v'=a}] x<=m"))
        assert len(ps.goals) == 1
        assert ps.goal(0) == Sequent((), (ps.conjecture,))

    def test_trivial_closable(self):
        ps = init_proof(F("true"))
        ps = close_arith(ps, 0)
        assert ps.closed


class TestAxioms:
    def test_choice_splits(self):
        phi = F("[{?x>=0; a:=A} ++ a:=-b] a<=A")
        ps = init_proof(phi)
        ps = apply_axiom(ps, 0, "++", Position("succ", 0, ()))
        goal = ps.goal(single_goal(ps))
        out = goal.succ[0]
        assert out == F("[?x>=0; a:=A]a<=A & [a:=-b]a<=A")

    def test_compose_nests(self):
        ps = init_proof(F("[a:=-b; {x'=v,v'=a}] x<=m"))
        ps = apply_axiom(ps, 0, ";", Position("succ", 0, ()))
        assert ps.goal(single_goal(ps)).succ[0] == \
            F("[a:=-b][{x'=v,v'=a}] x<=m")

    def test_solution_axiom_example3(self):
        ps = init_proof(F("[{x'=v,v'=a}] x<=m"))
        ode = parse("{x'=v,v'=a}", "program")
        sol = solve_ode(ode.eqs, avoid_names={"x", "v", "a", "m"})
        ps = apply_axiom(ps, 0, "'", Position("succ", 0, ()),
                         {"solution": sol})
        text = pretty(ps.goal(single_goal(ps)).succ[0])
        assert text.startswith("forall t$1 . (t$1>=0->[x:=")

    def test_solution_axiom_reverifies(self):
        from dlverify.odesolve import Solution
        ode = parse("{x'=2}", "program")
        t = Variable("t$1")
        bogus = Solution(t, ((Variable("x"),
                              parse("x+t$1", "term")),))
        ps = init_proof(F("[{x'=2}] x<=m"))
        with pytest.raises(SideConditionError):
            apply_axiom(ps, 0, "'", Position("succ", 0, ()),
                        {"solution": bogus})

    def test_time_variable_freshness_enforced(self):
        from dlverify.odesolve import Solution
        ps = init_proof(F("[{x'=2}] x<=t$1"))
        ode = parse("{x'=2}", "program")
        sol = solve_ode(ode.eqs)  # picks t$1, which is not fresh here
        assert sol.time.name == "t$1"
        with pytest.raises(SideConditionError):
            apply_axiom(ps, 0, "'", Position("succ", 0, ()),
                        {"solution": sol})

    def test_assignment_admissibility(self):
        ps = init_proof(F("[x:=v+1] [x:=1 ++ ?true] x>=0"))
        with pytest.raises(SideConditionError):
            apply_axiom(ps, 0, ":=", Position("succ", 0, ()))

    def test_test_axiom(self):
        ps = init_proof(F("[?x>=0] x>=0"))
        ps = apply_axiom(ps, 0, "?", Position("succ", 0, ()))
        assert ps.goal(single_goal(ps)).succ[0] == F("x>=0 -> x>=0")

    def test_unwind_axiom(self):
        ps = init_proof(F("[{x:=x+1}*] x>=0"))
        ps = apply_axiom(ps, 0, "*", Position("succ", 0, ()))
        assert ps.goal(single_goal(ps)).succ[0] == \
            F("x>=0 & [x:=x+1][{x:=x+1}*] x>=0")

    def test_diamond_unfolds(self):
        ps = init_proof(F("<x:=1> x>=0"))
        ps = apply_axiom(ps, 0, "<>", Position("succ", 0, ()))
        assert ps.goal(single_goal(ps)).succ[0] == F("![x:=1](!x>=0)")

    def test_domain_axiom_shape(self):
        ps = init_proof(F("[{x'=1 & x<=5}] x<=5"))
        ps = apply_axiom(ps, 0, "&", Position("succ", 0, ()))
        text = pretty(ps.goal(single_goal(ps)).succ[0])
        assert text.startswith("forall t0")
        assert "c'=1" in text and "c'=-1" in text and "x'=-1" in text

    def test_V_side_condition(self):
        ps = init_proof(F("[x:=1] x>=0"))
        with pytest.raises(SideConditionError):
            apply_axiom(ps, 0, "V", Position("succ", 0, ()))
        ps2 = init_proof(F("[x:=1] y>=0"))
        ps2 = apply_axiom(ps2, 0, "V", Position("succ", 0, ()))
        assert ps2.goal(single_goal(ps2)).succ[0] == F("y>=0")

    def test_B_side_condition(self):
        ps = init_proof(F("[x:=y] forall x . x>=0"))
        with pytest.raises(SideConditionError):
            apply_axiom(ps, 0, "B", Position("succ", 0, ()))
        ps2 = init_proof(F("[z:=y] forall x . x>=z"))
        ps2 = apply_axiom(ps2, 0, "B", Position("succ", 0, ()))
        assert ps2.goal(single_goal(ps2)).succ[0] == \
            F("forall x . [z:=y] x>=z")

    def test_position_discipline(self):
        # implication axioms only at positive positions
        phi = F("!([x:=1] y>=0)")
        ps = init_proof(phi)
        with pytest.raises(PositionError):
            apply_axiom(ps, 0, "V", Position("succ", 0, (0,)))
        # equivalence axioms rewrite anywhere, even under negation
        ps = apply_axiom(ps, 0, ":=", Position("succ", 0, (0,)))
        assert ps.goal(single_goal(ps)).succ[0] == F("!y>=0")

    def test_rewrite_inside_test_condition(self):
        phi = F("[?[y:=2]y>=1; x:=1] x>=0")
        ps = init_proof(phi)
        ps = apply_axiom(ps, 0, ";", Position("succ", 0, ()))
        ps = apply_axiom(ps, single_goal(ps), ":=",
                         Position("succ", 0, (0, 0)))
        assert ps.goal(single_goal(ps)).succ[0] == F("[?2>=1][x:=1] x>=0")


class TestRules:
    def test_G_drops_context(self):
        ps = init_proof(F("x>=5 -> [y:=1] 1>=1"))
        ps = apply_rule(ps, 0, "implyR")
        gid = single_goal(ps)
        ps = apply_rule(ps, gid, "G")
        assert ps.goal(single_goal(ps)) == Sequent((), (F("1>=1"),))

    def test_DI_shapes(self):
        ps = init_proof(F("x^2+y^2>=p^2 -> [{x'=y,y'=-x}] x^2+y^2>=p^2"))
        ps = apply_rule(ps, 0, "DI")
        goal = ps.goal(single_goal(ps))
        lhs = goal.succ[0]
        from dlverify.arith import normalize_poly
        assert normalize_poly(lhs.left) == normalize_poly(lhs.right)

    def test_DC_produces_two_premises(self):
        ps = init_proof(F("[{x'=1 & x>=0}] x>=0"))
        ps = apply_rule(ps, 0, "DC", {"formula": F("x>=0")})
        assert len(ps.goals) == 2

    def test_DW_uses_domain(self):
        ps = init_proof(F("[{x'=1 & x>=0 & x<=5}] x<=5"))
        ps = apply_rule(ps, 0, "DW")
        assert ps.goal(single_goal(ps)) == \
            Sequent((F("x>=0 & x<=5"),), (F("x<=5"),))

    def test_DV_rejects_equalities(self):
        ps = init_proof(F("<{x'=a}> x=b"))
        with pytest.raises(SideConditionError):
            apply_rule(ps, 0, "DV")

    def test_DV_shape(self):
        ps = init_proof(F("<{x'=a}> x>=b"))
        ps = apply_rule(ps, 0, "DV")
        assert len(ps.goals) == 2
        progress = ps.goals[0][1].succ[0]
        assert pretty(progress).startswith("exists eps . (eps>0&forall x . ")
        sustain = ps.goals[1][1].succ[0]
        assert sustain == F("[{x'=a & x<=b}] true")

    def test_DA_side_conditions(self):
        goal = F("x>0 -> [{x'=-x}] x>0")
        ps = init_proof(goal)
        ps0 = apply_rule(ps, 0, "implyR")
        gid = single_goal(ps0)
        y = Variable("y")
        ok_args = {"variable": y, "term": parse("y/2", "term"),
                   "formula": F("x*y^2=1")}
        ps1 = apply_rule(ps0, gid, "DA", ok_args)
        assert len(ps1.goals) == 2
        with pytest.raises(SideConditionError):
            apply_rule(ps0, gid, "DA",
                       {"variable": Variable("x"),
                        "term": parse("1", "term"), "formula": F("x>0")})
        with pytest.raises(SideConditionError):
            apply_rule(ps0, gid, "DA",
                       {"variable": y, "term": parse("y*y", "term"),
                        "formula": F("x*y^2=1")})

    def test_ind_and_con_shapes(self):
        ps = init_proof(F("x>=0 -> [{x:=x+1}*] x>=0"))
        ps = apply_rule(ps, 0, "ind")
        assert ps.goal(single_goal(ps)) == \
            Sequent((), (F("x>=0 -> [x:=x+1] x>=0"),))

        con_goal = F("v>=0 -> <{x:=x+1}*> exists v . (v<=0 & v>=0)")
        ps2 = init_proof(con_goal)
        ps2 = apply_rule(ps2, 0, "con", {"variable": Variable("v")})
        premise = ps2.goal(single_goal(ps2)).succ[0]
        assert premise == F("v>=0 & v>0 -> <x:=x+1> v-1>=0")

    def test_con_variable_must_not_occur(self):
        con_goal = F("v>=0 -> <{v:=v+1}*> exists v . (v<=0 & v>=0)")
        ps = init_proof(con_goal)
        with pytest.raises(SideConditionError):
            apply_rule(ps, 0, "con", {"variable": Variable("v")})


class TestCloseArith:
    def test_example3_closes(self):
        seq = Sequent((F("v^2<=2*b*(m-x)"), F("v>=0"), F("x<=m"), F("b>0")),
                      (F("forall t . (t>=0 -> (-b/2)*t^2+v*t+x<=m)"),))
        ps = init_proof(F("true"))  # host for the goal below
        from dlverify.kernel.close import close_goal_arith
        assert close_goal_arith(seq).method in ("qe", "signs")

    def test_constraint_discovery_residual(self):
        from dlverify.kernel.close import close_goal_arith
        seq = Sequent((F("v>=0"), F("x<=m"), F("b>0")),
                      (F("forall t . (t>=0 -> (-b/2)*t^2+v*t+x<=m)"),))
        with pytest.raises(NotClosed) as err:
            close_goal_arith(seq)
        residual = err.value.residual
        from dlverify.arith import decide
        from dlverify.arith.qe import universal_closure
        from dlverify.core.ast import Iff
        check = Imp(F("v>=0 & x<=m & b>0"),
                    Iff(residual, F("v^2<=2*b*(m-x)")))
        assert decide(universal_closure(check)) is True

    def test_zero_equality(self):
        from dlverify.kernel.close import close_goal_arith
        assert close_goal_arith(Sequent((), (F("0=0"),))).method \
            in ("qe", "signs")

    def test_modalities_remain(self):
        from dlverify.kernel.close import close_goal_arith
        with pytest.raises(ModalitiesRemain):
            close_goal_arith(Sequent((), (F("[x:=1] x>=0"),)))

    def test_unsupported_degree_propagates(self):
        from dlverify.kernel.close import close_goal_arith
        with pytest.raises(UnsupportedDegree):
            close_goal_arith(Sequent((), (F("exists x . x^5+a*x+1=0"),)))


class TestReplay:
    def build_example3(self):
        phi = F("v^2<=2*b*(m-x) & v>=0 & x<=m & b>0 "
                "-> [a:=-b; {x'=v,v'=a}] x<=m")
        ps = init_proof(phi)
        ps = apply_rule(ps, 0, "implyR")
        gid = single_goal(ps)
        ps = apply_axiom(ps, gid, ";", Position("succ", 0, ()))
        gid = single_goal(ps)
        ode = parse("{x'=v,v'=a}", "program")
        sol = solve_ode(ode.eqs, avoid_names={"v", "x", "m", "b", "a"})
        ps = apply_axiom(ps, gid, "'", Position("succ", 0, (1,)),
                         {"solution": sol})
        gid = single_goal(ps)
        ps = apply_axiom(ps, gid, ":=", Position("succ", 0, ()))
        gid = single_goal(ps)
        ps = apply_axiom(ps, gid, ":=", Position("succ", 0, (0, 1, 1)))
        gid = single_goal(ps)
        ps = apply_axiom(ps, gid, ":=", Position("succ", 0, (0, 1)))
        gid = single_goal(ps)
        return close_arith(ps, gid)

    def test_round_trip_and_replay(self):
        ps = self.build_example3()
        assert ps.closed
        doc = proof_to_json(ps)
        conjecture, tree = proof_from_json(doc)
        assert check_proof(tree, conjecture)

    def test_every_single_node_mutation_rejected(self):
        ps = self.build_example3()
        doc = json.loads(proof_to_json(ps))
        rejected = 0
        total = 0
        for i, node in enumerate(doc["nodes"]):
            for side in ("ante", "succ"):
                for j, text in enumerate(node["sequent"][side]):
                    mutated = json.loads(json.dumps(doc))
                    mutated["nodes"][i]["sequent"][side][j] = \
                        text.replace("<=", "<", 1) if "<=" in text \
                        else "1>=0"
                    total += 1
                    conjecture, tree = proof_from_json(json.dumps(mutated))
                    if not check_proof(tree, conjecture):
                        rejected += 1
        assert total > 0 and rejected == total

    def test_open_leaf_fails(self):
        ps = init_proof(F("x>=0"))
        assert check_proof(ps.tree, ps.conjecture) is False

    def test_audit_of_rewrite_step(self):
        ps = self.build_example3()
        lines = hilbert_audit(ps.tree, 2)
        assert any("congruence" in line for line in lines)


class TestKernelSoundnessSampling:
    def test_equivalence_rewrites_preserve_discrete_truth(self):
        rng = random.Random(71)
        from dlverify.kernel.axioms import axiom_subgoals
        from generators import rand_qf_formula
        checked = 0
        while checked < 200:
            prog = rand_discrete_program(rng, 2)
            post = rand_qf_formula(rng, 2)
            phi = Box(prog, post)
            seq = Sequent((), (phi,))
            for axiom_id in (":=", "?", "++", ";", "*"):
                try:
                    out = axiom_subgoals(seq, axiom_id, Position(), None)
                except (NoMatch, SideConditionError):
                    continue
                rewritten = out[0].succ[0]
                state = rand_state(rng)
                try:
                    before = eval_discrete(phi, state, saturate=True)
                    after = eval_discrete(rewritten, state, saturate=True)
                except (NotSaturated, ExplosionError, ZeroDivisionError):
                    continue
                assert before == after, f"{axiom_id}: {pretty(phi)}"
                checked += 1
