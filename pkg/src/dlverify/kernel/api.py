"""The kernel's public operations on proof states.

Everything here is checked: applications validate shapes and side conditions
before producing subgoals, and `check_proof` replays every recorded step and
compares the produced children against the record.
"""
from __future__ import annotations

from typing import List, Optional, Sequence

from ..core.ast import Formula
from .axioms import (EQUIVALENCE_AXIOMS, IMPLICATION_AXIOMS, NoMatch,
                     SideConditionError, axiom_subgoals)
from .close import ArithResult, ModalitiesRemain, NotClosed, close_goal_arith
from .rules import ALL_RULES, ShapeError, rule_subgoals
from .sequent import (Justification, Position, PositionError, ProofState,
                      ProofTree, Sequent, init_proof)

ALL_AXIOMS = EQUIVALENCE_AXIOMS + IMPLICATION_AXIOMS


def apply_axiom(ps: ProofState, goal_id: int, axiom_id: str,
                pos: Optional[Position] = None,
                inst: Optional[dict] = None) -> ProofState:
    pos = pos or Position()
    seq = ps.goal(goal_id)
    subgoals = axiom_subgoals(seq, axiom_id, pos, inst)
    just = Justification("axiom", axiom_id, pos, dict(inst or {}))
    return ps.expand(goal_id, just, subgoals)


def apply_rule(ps: ProofState, goal_id: int, rule_id: str,
               args: Optional[dict] = None) -> ProofState:
    seq = ps.goal(goal_id)
    subgoals = rule_subgoals(seq, rule_id, args)
    just = Justification("rule", rule_id, None, dict(args or {}))
    return ps.expand(goal_id, just, subgoals)


def close_arith(ps: ProofState, goal_id: int) -> ProofState:
    """Close the goal by decidable real arithmetic (or raise NotClosed)."""
    seq = ps.goal(goal_id)
    result = close_goal_arith(seq)
    args = {"method": result.method}
    if result.sentence is not None:
        args["sentence"] = result.sentence
    return ps.expand(goal_id, Justification("arith", "R", None, args), [])


class ReplayError(Exception):
    def __init__(self, node_id: int, reason: str):
        super().__init__(f"node {node_id}: {reason}")
        self.node_id = node_id
        self.reason = reason


def _replay_node(tree: ProofTree, node_id: int) -> None:
    node = tree.node(node_id)
    just = node.just
    if just.kind == "open":
        raise ReplayError(node_id, "open leaf")
    if just.kind == "arith":
        if node.children:
            raise ReplayError(node_id, "arithmetic closure must be a leaf")
        try:
            redo = close_goal_arith(node.sequent)
        except (NotClosed, ModalitiesRemain) as exc:
            raise ReplayError(node_id, f"arithmetic step does not re-close: "
                                       f"{exc}") from None
        if redo.method != just.args.get("method"):
            raise ReplayError(node_id, "arithmetic method mismatch")
        return
    if just.kind == "axiom":
        try:
            subgoals = axiom_subgoals(node.sequent, just.rule_id,
                                      just.pos or Position(), dict(just.args))
        except (NoMatch, SideConditionError, PositionError) as exc:
            raise ReplayError(node_id, str(exc)) from None
    else:
        try:
            subgoals = rule_subgoals(node.sequent, just.rule_id,
                                     dict(just.args))
        except (ShapeError, SideConditionError, PositionError) as exc:
            raise ReplayError(node_id, str(exc)) from None
    recorded = [tree.node(c).sequent for c in node.children]
    if recorded != subgoals:
        raise ReplayError(node_id, "recorded children differ from replay")


def check_proof(tree: ProofTree, conjecture: Optional[Formula] = None) -> bool:
    """Replay every node; True iff all steps re-apply and all leaves close."""
    try:
        validate_proof(tree, conjecture)
        return True
    except ReplayError:
        return False


def validate_proof(tree: ProofTree, conjecture: Optional[Formula] = None) -> None:
    root = tree.node(tree.root)
    if conjecture is not None and root.sequent != Sequent((), (conjecture,)):
        raise ReplayError(tree.root, "root sequent does not match the conjecture")
    seen = set()
    stack = [tree.root]
    while stack:
        nid = stack.pop()
        if nid in seen:
            raise ReplayError(nid, "node reachable twice (not a tree)")
        seen.add(nid)
        _replay_node(tree, nid)
        stack.extend(tree.node(nid).children)


def hilbert_audit(tree: ProofTree, node_id: int) -> List[str]:
    """Expanded Hilbert-style reading of one abbreviated proof step.

    Rewriting with an equivalence axiom at a position abbreviates: derive the
    axiom instance, lift it through the context by congruence, then chain
    with modus ponens; `ind`/`con` expand through I/C with G, K, and MP.
    """
    from ..parser.pretty import pretty
    node = tree.node(node_id)
    just = node.just
    out: List[str] = []
    if just.kind == "axiom" and just.rule_id in EQUIVALENCE_AXIOMS:
        goal = pretty(node.sequent.succ[0]) if node.sequent.succ else "<goal>"
        out.append(f"1. axiom {just.rule_id}: the instance rewritten at "
                   f"{just.pos.side}[{just.pos.index}] path {list(just.pos.path)}")
        out.append("2. congruence: lift the equivalence through the context")
        out.append(f"3. MP with (2) against the recorded goal: {goal}")
        return out
    if just.kind == "rule" and just.rule_id == "ind":
        out.append("1. premise: p -> [a]p            (recorded subgoal)")
        out.append("2. G on (1):                     [{a}*](p -> [a]p)")
        out.append("3. axiom I:                      [{a}*](p -> [a]p) -> "
                   "(p -> [{a}*]p)")
        out.append("4. MP(3, 2):                     p -> [{a}*]p")
        return out
    if just.kind == "rule" and just.rule_id == "con":
        out.append("1. premise: p(v) & v>0 -> <a>p(v-1)   (recorded subgoal)")
        out.append("2. forall-generalization and G of (1) under [{a}*]")
        out.append("3. axiom C with v not in a")
        out.append("4. MP(3, 2):                     p(v) -> <{a}*> exists v "
                   "(v<=0 & p(v))")
        return out
    out.append(f"step {just.kind}:{just.rule_id} is primitive (no expansion)")
    return out
