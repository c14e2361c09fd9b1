"""Loop-invariant and differential-invariant tactics.

These compose kernel steps only; every resulting state replays through
check_proof.  loop_invariant expands into MP + K + G + ind exactly as the
derived rule does; di_prove arranges the goal into the implication shape the
DI rule wants, adding a monotonicity step when the invariant differs from
the postcondition.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct
from typing import Iterable, List, Optional, Sequence, Tuple

from ..arith.qe import UnsupportedDegree, decide, universal_closure
from ..arith.poly import Poly
from ..arith.terms import normalize_poly, term_from_poly
from ..core import ast
from ..core.ast import (And, Box, Cmp, Formula, GE, Imp, Loop, ODE, TrueF,
                        Variable, conj)
from typing import Tuple as _Tuple
from ..core.vars import free_vars
from ..deriv import derivation_input, derive_formula, diff_subst
from ..kernel import (ModalitiesRemain, NotClosed, ProofState, ShapeError,
                      apply_axiom, apply_rule, close_arith)
from ..kernel.close import sequent_formula
from ..kernel.sequent import Position, Sequent
from .auto import AutoConfig, auto


class CutUnprovable(Exception):
    def __init__(self, index: int, reason: str = ""):
        super().__init__(f"differential cut {index} is not provable"
                         + (f": {reason}" if reason else ""))
        self.index = index


def _normalize_to_succ_box(ps: ProofState, goal_id: int,
                           want_loop: bool) -> Tuple[ProofState, int, int]:
    """implyR/andL and prefix decomposition until the succedent exposes the
    target box; returns (state, goal, succedent index)."""
    from ..core.ast import Assign, Seq, Test
    from ..kernel import Position, SideConditionError, apply_axiom
    changed = True
    while changed:
        changed = False
        seq = ps.goal(goal_id)
        for i, f in enumerate(seq.succ):
            if want_loop and _loop_under_prefix(f):
                return ps, goal_id, i
            if not want_loop and isinstance(f, Box) and isinstance(f.prog, ODE):
                return ps, goal_id, i
        if seq.succ and isinstance(seq.succ[0], Imp):
            ps = apply_rule(ps, goal_id, "implyR", {"index": 0})
            goal_id = _only_new(ps, goal_id)
            changed = True
            continue
        for i, f in enumerate(seq.ante):
            if isinstance(f, And):
                ps = apply_rule(ps, goal_id, "andL", {"index": i})
                goal_id = _only_new(ps, goal_id)
                changed = True
                break
        if changed:
            continue
        # peel discrete prefixes: [a; b]p, [x:=e]p, [?q]p
        for i, f in enumerate(seq.succ):
            if not isinstance(f, Box):
                continue
            axiom_id = {Seq: ";", Assign: ":=", Test: "?"}.get(type(f.prog))
            if axiom_id is None:
                continue
            try:
                ps = apply_axiom(ps, goal_id, axiom_id, Position("succ", i, ()))
            except SideConditionError:
                continue
            goal_id = _only_new(ps, goal_id)
            changed = True
            break
    raise ShapeError("no goal of the required modal shape in the succedent")


def _loop_under_prefix(f: Formula) -> bool:
    """True when f is a chain of boxes whose innermost program is a loop."""
    while isinstance(f, Box):
        if isinstance(f.prog, Loop):
            return True
        f = f.post
    return False


def _only_new(ps: ProofState, old_goal: int) -> int:
    node = ps.tree.node(old_goal)
    if len(node.children) != 1:
        raise AssertionError("expected exactly one child goal")
    return node.children[0]


def loop_invariant(ps: ProofState, goal_id: int, invariant: Formula,
                   close: bool = False) -> ProofState:
    """Split  Gamma |- [prefix][{a}*]psi  into init, step, and use subgoals.

    The recorded proof expands through MP, K, G, and ind (K and the loop
    induction axiom applied at positive positions under any box prefix), so
    the open subgoals are  Gamma |- [prefix]I;  I |- [a]I;  I |- psi.
    """
    from ..kernel.sequent import replace_at
    ps, goal_id, index = _normalize_to_succ_box(ps, goal_id, want_loop=True)
    seq = ps.goal(goal_id)
    host = seq.succ[index]
    # descend through the box prefix to the loop
    path: tuple = ()
    node = host
    while isinstance(node, Box) and not isinstance(node.prog, Loop):
        path = path + (1,)
        node = node.post
    if not (isinstance(node, Box) and isinstance(node.prog, Loop)):
        raise ShapeError("no loop box in the succedent formula")
    alpha = node.prog
    psi = node.post
    with_inv = replace_at(host, path, Box(alpha, invariant))

    # Gamma |- [prefix][a*]I   and   Gamma |- ([prefix][a*]I -> [prefix][a*]psi)
    ps = apply_rule(ps, goal_id, "MP", {"formula": with_inv, "index": index})
    minor_id, major_id = ps.tree.node(goal_id).children

    # major: K along the prefix, then K on the loop, then G to |- I -> psi
    cur = major_id
    for depth in range(len(path) + 1):
        ps = apply_axiom(ps, cur, "K",
                         Position("succ", index, (1,) * depth))
        cur = _only_new(ps, cur)
    for step_i in range(len(path) + 1):
        ps = apply_rule(ps, cur, "G", {"index": index if step_i == 0 else 0})
        cur = _only_new(ps, cur)
    ps = apply_rule(ps, cur, "implyR", {"index": 0})
    use_id = _only_new(ps, cur)

    # minor: cut the invariant through the prefix, then induction
    entry = replace_at(host, path, invariant)   # [prefix]I
    ps = apply_rule(ps, minor_id, "MP", {"formula": entry, "index": index})
    init_id, imp_id = ps.tree.node(minor_id).children
    cur = imp_id
    for depth in range(len(path)):
        ps = apply_axiom(ps, cur, "K", Position("succ", index, (1,) * depth))
        cur = _only_new(ps, cur)
    # the innermost implication I -> [a*]I is the loop-induction conclusion
    ps = apply_axiom(ps, cur, "I", Position("succ", index, (1,) * len(path)))
    cur = _only_new(ps, cur)
    for step_i in range(len(path) + 1):
        ps = apply_rule(ps, cur, "G", {"index": index if step_i == 0 else 0})
        cur = _only_new(ps, cur)
    ps = apply_rule(ps, cur, "implyR", {"index": 0})

    if close:
        for gid in (init_id, use_id):
            try:
                ps = close_arith(ps, gid)
            except (NotClosed, ModalitiesRemain, UnsupportedDegree):
                pass
    return ps


def di_prove(ps: ProofState, goal_id: int,
             invariant: Optional[Formula] = None) -> ProofState:
    """Prove  Gamma |- [ode & q]psi  by differential induction.

    Uses the postcondition as invariant when none is given; otherwise adds
    initial and monotonicity steps around the DI core, then closes the
    arithmetic subgoals.
    """
    ps, goal_id, index = _normalize_to_succ_box(ps, goal_id, want_loop=False)
    seq = ps.goal(goal_id)
    box = seq.succ[index]
    post = box.post
    inv = invariant if invariant is not None else post
    arith_goals: List[int] = []

    if inv == post:
        ps = apply_rule(ps, goal_id, "MP",
                        {"formula": inv, "index": index})
        init_id, imp_id = ps.tree.node(goal_id).children
        ps = apply_rule(ps, imp_id, "DI", {"index": index})
        arith_goals = [init_id, _only_new(ps, imp_id)]
    else:
        inv_box = Box(box.prog, inv)
        ps = apply_rule(ps, goal_id, "MP", {"formula": inv_box, "index": index})
        minor_id, major_id = ps.tree.node(goal_id).children
        ps = apply_axiom(ps, major_id, "K", Position("succ", index, ()))
        k_id = _only_new(ps, major_id)
        ps = apply_rule(ps, k_id, "G", {"index": index})
        mono_id = _only_new(ps, k_id)
        ps = apply_rule(ps, minor_id, "MP", {"formula": inv, "index": index})
        init_id, imp_id = ps.tree.node(minor_id).children
        ps = apply_rule(ps, imp_id, "DI", {"index": index})
        arith_goals = [init_id, _only_new(ps, imp_id), mono_id]

    open_ids = {g for g, _ in ps.goals}
    for gid in arith_goals:
        if gid not in open_ids:
            continue
        try:
            ps = close_arith(ps, gid)
        except (NotClosed, ModalitiesRemain, UnsupportedDegree):
            pass
    return ps


def diff_saturate(ps: ProofState, goal_id: int,
                  cuts: Sequence[Formula]) -> ProofState:
    """Fold DC over the cuts (each proved by di_prove), then DW or DI."""
    ps, goal_id, index = _normalize_to_succ_box(ps, goal_id, want_loop=False)
    current = goal_id
    for k, cut in enumerate(cuts):
        ps2 = apply_rule(ps, current, "DC", {"formula": cut, "index": index})
        left_id, right_id = ps2.tree.node(current).children
        ps3 = di_prove(ps2, left_id)
        if any(g == left_id or _under(ps3, left_id, g) for g, _ in ps3.goals):
            raise CutUnprovable(k, "differential induction left goals open")
        ps = ps3
        current = right_id
    # saturated: try pure domain reasoning first, then induction
    seq = ps.goal(current)
    trial = apply_rule(ps, current, "DW", {"index": index})
    dw_goal = _only_new(trial, current)
    try:
        return close_arith(trial, dw_goal)
    except (NotClosed, ModalitiesRemain, UnsupportedDegree):
        pass
    return di_prove(ps, current)


def prove_auto(ps: ProofState, auto_cfg=None) -> Tuple[ProofState, object]:
    """Symbolic execution plus a differential-induction fallback.

    Runs `auto`, then retries every remaining goal whose succedent carries an
    ODE box with `di_prove` (postcondition as invariant) and re-runs auto on
    whatever that opens.
    """
    ps, report = auto(ps, auto_cfg)
    for _ in range(4):
        retried = False
        for gid, seq in list(ps.goals):
            target = None
            for f in seq.succ:
                if isinstance(f, Box) and isinstance(f.prog, ODE):
                    target = f
                    break
                if isinstance(f, Imp) and isinstance(f.right, Box) \
                        and isinstance(f.right.prog, ODE):
                    target = f
                    break
            if target is None:
                continue
            try:
                ps2 = di_prove(ps, gid)
            except Exception:
                continue  # best effort; the goal simply stays open
            if not any(_under(ps2, gid, g) for g, _ in ps2.goals):
                ps = ps2
                retried = True
        if not retried:
            break
        ps, report = auto(ps, auto_cfg)
    return ps, report


def _under(ps: ProofState, root: int, gid: int) -> bool:
    frontier = [root]
    while frontier:
        nid = frontier.pop()
        if nid == gid:
            return True
        frontier.extend(ps.tree.node(nid).children)
    return False


# ------------------------------------------------------------ invariant search


def di_search(seq: Sequent, degree: int = 2,
              grid: Iterable[int] = (-1, 0, 1),
              max_basis: int = 6) -> List[Formula]:
    """Template search for differential invariants of the goal's ODE.

    Templates are atoms p >= 0 with p a grid combination of candidate
    monomials (those of the postcondition polynomial, padded with monomials
    over the ODE variables up to the degree bound).  A candidate is kept if
    its DI premise is valid, it implies the postcondition, and it follows
    from the antecedent.  Results are ranked by syntactic size, except that
    a postcondition that is itself a differential invariant comes first.
    """
    box = None
    for f in seq.succ:
        if isinstance(f, Box) and isinstance(f.prog, ODE):
            box = f
            break
    if box is None:
        raise ShapeError("di_search needs an ODE box goal")
    ode = box.prog
    post = box.post
    context = conj(*seq.ante) if seq.ante else ast.TRUE

    basis: List[Poly] = []
    if isinstance(post, Cmp):
        diff = normalize_poly(post.left) - normalize_poly(post.right)
        for mono in diff.coeffs:
            basis.append(_mono_poly(mono))
    for v in ode.vars:
        for d in range(1, degree + 1):
            basis.append(Poly.var(v) ** d)
    seen = set()
    unique_basis: List[Poly] = []
    for p in basis:
        if p not in seen:
            seen.add(p)
            unique_basis.append(p)
        if len(unique_basis) >= max_basis:
            break

    candidates: List[Formula] = []
    if _is_invariant(post, ode, context, post):
        candidates.append(post)
    grid = tuple(grid)
    for coeffs in iproduct(grid, repeat=len(unique_basis)):
        if not any(coeffs):
            continue
        poly = Poly()
        for c, b in zip(coeffs, unique_basis):
            if c:
                poly = poly + b.scale(c)
        cand = Cmp(term_from_poly(poly), GE, ast.ZERO)
        if cand in candidates:
            continue
        if _is_invariant(cand, ode, context, post):
            candidates.append(cand)
    head = candidates[:1] if candidates[:1] == [post] else []
    tail = sorted(candidates[len(head):], key=_size)
    return head + tail


def _mono_poly(mono) -> Poly:
    from fractions import Fraction
    return Poly({mono: Fraction(1)})


def _size(f: Formula) -> int:
    from ..kernel.sequent import node_children
    if isinstance(f, Cmp):
        return 1 + _tsize(f.left) + _tsize(f.right)
    return 1 + sum(_size(c) for c in node_children(f) if isinstance(c, Formula))


def _tsize(t) -> int:
    return 1 + sum(_tsize(c) for c in ast.term_children(t))


def _is_invariant(cand: Formula, ode: ODE, context: Formula,
                  post: Formula) -> bool:
    try:
        premise = diff_subst(derive_formula(derivation_input(cand)), ode.eqs)
    except Exception:
        return False
    checks = [Imp(ode.domain, premise), Imp(cand, post), Imp(context, cand)]
    for chk in checks:
        try:
            if not decide(universal_closure(chk)):
                return False
        except UnsupportedDegree:
            from ..arith.signs import prove_sequent_by_signs
            if not prove_sequent_by_signs([chk.left], [chk.right]):
                return False
    return True
