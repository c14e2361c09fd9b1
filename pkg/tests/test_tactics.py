import pytest

from dlverify.core.ast import Variable
from dlverify.kernel import (check_proof, init_proof, validate_proof)
from dlverify.kernel.sequent import Sequent
from dlverify.parser import parse, pretty
from dlverify.tactics import (AutoConfig, CutUnprovable, auto, di_prove,
                              di_search, diff_saturate, loop_invariant,
                              prove_auto, run_script, ScriptError)


def F(s):
    return parse(s, "formula")


class TestAuto:
    def test_example3_closes_without_hints(self):
        phi = F("v^2<=2*b*(m-x) & v>=0 & x<=m & b>0 "
                "-> [a:=-b; {x'=v,v'=a}] x<=m")
        ps, report = auto(init_proof(phi))
        assert ps.closed
        assert check_proof(ps.tree, ps.conjecture)

    def test_velocity_never_negative(self):
        phi = F("v>=0 & A>=0 -> [a:=A; {x'=v,v'=a}] v>=0")
        ps, _ = auto(init_proof(phi))
        assert ps.closed

    def test_rotational_stays_open(self):
        # the flow is unsolvable in the polynomial class, so symbolic
        # execution hands the goal to differential induction
        phi = F("x^2+y^2>=p^2 -> [{x'=y,y'=-x}] x^2+y^2>=p^2")
        ps, report = auto(init_proof(phi))
        assert not ps.closed and len(ps.goals) == 1
        ps2 = di_prove(ps, ps.goals[0][0])
        assert ps2.closed

    def test_loop_unwinding_closes_vacuous_while(self):
        phi = F("[while (false) {x:=1}] true")
        ps, _ = auto(init_proof(phi))
        assert ps.closed

    def test_every_output_replays(self):
        for text in ["[?true]true",
                     "x>=1 -> [x:=x+1] x>=2",
                     "[x:=1 ++ x:=2] x>=1",
                     "<x:=1> x>=1"]:
            ps, _ = auto(init_proof(F(text)))
            assert ps.closed, text
            assert check_proof(ps.tree, ps.conjecture)


class TestLoopInvariant:
    def test_three_subgoals(self):
        phi = F("x>=2 -> [{x:=x+1}*] x>=0")
        ps = loop_invariant(init_proof(phi), 0, F("x>=0"))
        goals = [g for _, g in ps.goals]
        assert Sequent((F("x>=2"),), (F("x>=0"),)) in goals
        assert Sequent((F("x>=0"),), (F("[x:=x+1] x>=0"),)) in goals
        assert Sequent((F("x>=0"),), (F("x>=0"),)) in goals

    def test_closes_with_auto(self):
        phi = F("x>=2 -> [{x:=x+1}*] x>=0")
        ps = loop_invariant(init_proof(phi), 0, F("x>=0"))
        ps, _ = auto(ps)
        assert ps.closed and check_proof(ps.tree, ps.conjecture)

    def test_trivial_invariant(self):
        phi = F("x>=0 -> [{?true}*] x>=0")
        ps = loop_invariant(init_proof(phi), 0, F("x>=0"))
        ps, _ = auto(ps)
        assert ps.closed

    def test_unprovable_init_reports_residual(self):
        phi = F("x>=0 -> [{x:=x+1}*] x>=1")
        ps = loop_invariant(init_proof(phi), 0, F("x>=1"))
        ps, report = auto(ps)
        assert not ps.closed
        assert any(r is not None for r in report.residuals.values())

    def test_prefix_boxes_are_traversed(self):
        phi = F("h=1 -> [q:=0; {h:=h}*] h>=0")
        ps = loop_invariant(init_proof(phi), 0, F("h>=0"))
        ps, _ = auto(ps)
        assert ps.closed and check_proof(ps.tree, ps.conjecture)


class TestDiProve:
    def test_rotational(self):
        ps = di_prove(init_proof(
            F("x^2+y^2>=p^2 -> [{x'=y,y'=-x}] x^2+y^2>=p^2")), 0)
        assert ps.closed and check_proof(ps.tree, ps.conjecture)

    def test_quartic_with_domain(self):
        ps = di_prove(init_proof(
            F("x^3>=-1 -> [{x'=(x-3)^4+a & a>=0}] x^3>=-1")), 0)
        assert ps.closed and check_proof(ps.tree, ps.conjecture)

    def test_counterexample_one_fails(self):
        # x!=0 under x'=1: the split derived condition needs 1=0
        ps = di_prove(init_proof(F("x!=0 -> [{x'=1}] x!=0")), 0)
        assert not ps.closed

    def test_strengthened_invariant(self):
        phi = F("x>=2 -> [{x'=x^2}] x>=1")
        ps = di_prove(init_proof(phi), 0, F("x>=2"))
        assert ps.closed and check_proof(ps.tree, ps.conjecture)


class TestDiffSaturate:
    def test_figure8(self):
        phi = F("x^3>=-1 & y^5>=0 -> [{x'=(x-3)^4+y^5, y'=y^2}] x^3>=-1")
        ps = diff_saturate(init_proof(phi), 0, [F("y^5>=0")])
        assert ps.closed and check_proof(ps.tree, ps.conjecture)

    def test_empty_cut_list_is_di(self):
        phi = F("x^2+y^2>=p^2 -> [{x'=y,y'=-x}] x^2+y^2>=p^2")
        ps = diff_saturate(init_proof(phi), 0, [])
        assert ps.closed

    def test_wrong_cut_raises_with_index(self):
        phi = F("x^3>=-1 & y^5>=0 -> [{x'=(x-3)^4+y^5, y'=y^2}] x^3>=-1")
        with pytest.raises(CutUnprovable) as err:
            diff_saturate(init_proof(phi), 0, [F("y^5<=-1")])
        assert err.value.index == 0

    def test_dw_path_when_domain_suffices(self):
        phi = F("x<=5 -> [{x'=1 & x<=5}] x<=5")
        ps = diff_saturate(init_proof(phi), 0, [])
        assert ps.closed


class TestDiSearch:
    def goal_sequent(self, text):
        from dlverify.kernel import apply_rule
        ps = init_proof(F(text))
        if ps.goals and parse(text, "formula") != ps.conjecture:
            pass
        try:
            ps = apply_rule(ps, 0, "implyR")
        except Exception:
            pass
        return ps.goals[0][1]

    def test_rotational_candidate_found(self):
        seq = self.goal_sequent("x^2+y^2>=p^2 -> [{x'=y,y'=-x}] x^2+y^2>=p^2")
        candidates = di_search(seq)
        assert candidates
        assert candidates[0] == F("x^2+y^2>=p^2")

    def test_counterexample_one_has_no_sound_atom(self):
        seq = self.goal_sequent("x!=0 -> [{x'=1}] x!=0")
        assert di_search(seq) == []

    def test_post_returned_first_when_already_invariant(self):
        seq = self.goal_sequent("x>=0 -> [{x'=x^2}] x>=0")
        candidates = di_search(seq)
        assert candidates and candidates[0] == F("x>=0")


class TestScripts:
    def test_script_drives_saturation(self):
        phi = F("x^3>=-1 & y^5>=0 -> [{x'=(x-3)^4+y^5, y'=y^2}] x^3>=-1")
        ps = init_proof(phi)
        ps = run_script(ps, "# comment\n* diff_saturate \"y^5>=0\"\n")
        assert ps.closed

    def test_bad_goal_address(self):
        ps = init_proof(F("true"))
        with pytest.raises(ScriptError):
            run_script(ps, "7 auto\n")

    def test_axiom_with_position(self):
        ps = init_proof(F("[?true; x:=1] x>=1"))
        ps = run_script(ps, "* axiom ; succ 0\n* auto\n")
        assert ps.closed

    def test_tactics_never_extend_kernel(self):
        phi = F("x>=2 -> [{x:=x+1}*] x>=0")
        ps = loop_invariant(init_proof(phi), 0, F("x>=0"))
        ps, _ = auto(ps)
        validate_proof(ps.tree, ps.conjecture)  # raises on unjustified steps
