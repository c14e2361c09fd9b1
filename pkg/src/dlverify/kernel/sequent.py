"""Goals, proof trees, and formula positions.

A sequent means: the conjunction of the antecedent implies the disjunction
of the succedent.  Proof states are immutable; every application returns a
new state sharing structure with the old one, so undo and parallel goal work
are free.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ..core import ast
from ..core.ast import (Box, Choice, Diamond, Exists, Forall, Formula, Loop,
                        Not, ODE, Program, Seq, Test, Variable)


class PositionError(Exception):
    """The position does not resolve in the host formula."""


@dataclass(frozen=True)
class Position:
    """Path of child indices into a sequent formula.

    side/index select the formula in the sequent; path descends through
    formula and program structure (Box/Diamond children: 0 = program,
    1 = postcondition).
    """

    side: str = "succ"           # "ante" | "succ"
    index: int = 0
    path: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.side not in ("ante", "succ"):
            raise PositionError(f"bad side {self.side!r}")


TOP = Position()


def node_children(node) -> Tuple:
    if isinstance(node, (ast.TrueF, ast.FalseF, ast.Cmp, ast.Assign,
                         ast.AssignAny)):
        return ()
    if isinstance(node, Not):
        return (node.arg,)
    if isinstance(node, (ast.And, ast.Or, ast.Imp, ast.Iff)):
        return (node.left, node.right)
    if isinstance(node, (Forall, Exists)):
        return (node.body,)
    if isinstance(node, (Box, Diamond)):
        return (node.prog, node.post)
    if isinstance(node, Test):
        return (node.cond,)
    if isinstance(node, ODE):
        return (node.domain,)
    if isinstance(node, Choice):
        return (node.left, node.right)
    if isinstance(node, Seq):
        return (node.first, node.second)
    if isinstance(node, Loop):
        return (node.body,)
    raise PositionError(f"cannot descend into {node!r}")


def node_with_child(node, i: int, new):
    kids = list(node_children(node))
    if not 0 <= i < len(kids):
        raise PositionError(f"child {i} out of range for {type(node).__name__}")
    kids[i] = new
    if isinstance(node, Not):
        return Not(*kids)
    if isinstance(node, (ast.And, ast.Or, ast.Imp, ast.Iff)):
        return type(node)(*kids)
    if isinstance(node, (Forall, Exists)):
        return type(node)(node.var, kids[0])
    if isinstance(node, (Box, Diamond)):
        return type(node)(kids[0], kids[1])
    if isinstance(node, Test):
        return Test(kids[0])
    if isinstance(node, ODE):
        return ODE(node.eqs, kids[0])
    if isinstance(node, (Choice, Seq)):
        return type(node)(*kids)
    if isinstance(node, Loop):
        return Loop(kids[0])
    raise PositionError(f"cannot rebuild {node!r}")


def resolve(formula: Formula, path: Sequence[int]):
    """The subnode at path, plus its polarity (+1, -1, or 0 under an iff)."""
    node = formula
    polarity = 1
    for i in path:
        kids = node_children(node)
        if not 0 <= i < len(kids):
            raise PositionError(f"path {tuple(path)} does not resolve")
        if isinstance(node, Not):
            polarity = -polarity
        elif isinstance(node, ast.Imp) and i == 0:
            polarity = -polarity
        elif isinstance(node, ast.Iff):
            polarity = 0
        elif isinstance(node, Test) or isinstance(node, ODE):
            polarity = 0  # program conditions have no fixed polarity
        node = kids[i]
    return node, polarity


def replace_at(formula: Formula, path: Sequence[int], new):
    if not path:
        return new
    i, rest = path[0], path[1:]
    kids = node_children(formula)
    if not 0 <= i < len(kids):
        raise PositionError(f"path {tuple(path)} does not resolve")
    return node_with_child(formula, i, replace_at(kids[i], rest, new))


@dataclass(frozen=True)
class Sequent:
    ante: Tuple[Formula, ...] = ()
    succ: Tuple[Formula, ...] = ()

    def formula_at(self, pos: Position) -> Formula:
        side = self.ante if pos.side == "ante" else self.succ
        if not 0 <= pos.index < len(side):
            raise PositionError(f"no formula at {pos.side}[{pos.index}]")
        return side[pos.index]

    def subnode_at(self, pos: Position):
        host = self.formula_at(pos)
        node, polarity = resolve(host, pos.path)
        if pos.side == "ante":
            polarity = -polarity if polarity else 0
        return node, polarity

    def replace(self, pos: Position, new: Formula) -> "Sequent":
        host = self.formula_at(pos)
        rebuilt = replace_at(host, pos.path, new)
        if pos.side == "ante":
            ante = self.ante[:pos.index] + (rebuilt,) + self.ante[pos.index + 1:]
            return Sequent(ante, self.succ)
        succ = self.succ[:pos.index] + (rebuilt,) + self.succ[pos.index + 1:]
        return Sequent(self.ante, succ)

    def without(self, pos: Position) -> "Sequent":
        if pos.side == "ante":
            return Sequent(self.ante[:pos.index] + self.ante[pos.index + 1:],
                           self.succ)
        return Sequent(self.ante,
                       self.succ[:pos.index] + self.succ[pos.index + 1:])

    def variables(self) -> frozenset:
        from ..core.vars import all_vars
        out = frozenset()
        for f in self.ante + self.succ:
            out |= all_vars(f)
        return out


@dataclass(frozen=True)
class Justification:
    kind: str                    # "axiom" | "rule" | "arith" | "open"
    rule_id: str = ""
    pos: Optional[Position] = None
    args: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("axiom", "rule", "arith", "open"):
            raise ValueError(f"bad justification kind {self.kind!r}")


OPEN = Justification("open")


@dataclass(frozen=True)
class ProofNode:
    node_id: int
    sequent: Sequent
    just: Justification
    children: Tuple[int, ...] = ()


@dataclass(frozen=True)
class ProofTree:
    nodes: Mapping[int, ProofNode]
    root: int

    def node(self, node_id: int) -> ProofNode:
        return self.nodes[node_id]


@dataclass(frozen=True)
class ProofState:
    conjecture: Formula
    tree: ProofTree
    goals: Tuple[Tuple[int, Sequent], ...]
    next_id: int

    def goal(self, goal_id: int) -> Sequent:
        for gid, seq in self.goals:
            if gid == goal_id:
                return seq
        raise KeyError(f"no open goal {goal_id}")

    @property
    def closed(self) -> bool:
        return not self.goals

    def expand(self, goal_id: int, just: Justification,
               subgoals: Sequence[Sequent]) -> "ProofState":
        """Replace an open goal by `subgoals` justified by `just`."""
        self.goal(goal_id)  # raises if unknown
        nodes = dict(self.tree.nodes)
        child_ids = []
        nid = self.next_id
        for sq in subgoals:
            nodes[nid] = ProofNode(nid, sq, OPEN)
            child_ids.append(nid)
            nid += 1
        old = nodes[goal_id]
        nodes[goal_id] = ProofNode(goal_id, old.sequent, just, tuple(child_ids))
        new_goals: List[Tuple[int, Sequent]] = []
        for gid, sq in self.goals:
            if gid == goal_id:
                new_goals.extend(zip(child_ids, subgoals))
            else:
                new_goals.append((gid, sq))
        return ProofState(self.conjecture, ProofTree(nodes, self.tree.root),
                          tuple(new_goals), nid)


def init_proof(phi: Formula) -> ProofState:
    from ..core.desugar import desugar_formula
    phi = desugar_formula(phi)  # the kernel works on core programs only
    root = ProofNode(0, Sequent((), (phi,)), OPEN)
    return ProofState(phi, ProofTree({0: root}, 0), ((0, Sequent((), (phi,))),), 1)
