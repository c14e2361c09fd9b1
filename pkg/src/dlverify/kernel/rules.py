"""Checked proof rules: structural sequent steps, the modal rules G, MP, and
quantifier generalization, the derived loop rules ind and con, and the
differential-equation rules DI, DC, DW, DV, DA with their side conditions.
"""
from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from ..core import ast
from ..core.ast import (And, Box, Cmp, Diamond, Exists, Forall, Formula, GT,
                        Iff, Imp, LE, Not, ODE, Or, Term, TrueF, Var,
                        Variable, conj)
from ..core.subst import ClashError, admissible_substitute
from ..core.vars import all_vars, free_vars, fresh_variable, signature
from ..deriv import (EqualityError, derivation_input, derive_formula,
                     diff_subst, eps_strengthen, weak_negate)
from ..arith.terms import normalize_poly
from .axioms import SideConditionError, taken_names
from .sequent import Position, PositionError, Sequent


class ShapeError(Exception):
    """The goal does not have the shape the rule's conclusion requires."""


STRUCTURAL_RULES = ("implyR", "implyL", "andR", "andL", "orR", "orL", "notR",
                    "notL", "iffR", "iffL", "closeId", "closeTrue",
                    "closeFalse", "cut")
MODAL_RULES = ("G", "MP", "forallgen")
LOOP_RULES = ("ind", "con")
DIFF_RULES = ("DI", "DC", "DW", "DV", "DA")
ALL_RULES = STRUCTURAL_RULES + MODAL_RULES + LOOP_RULES + DIFF_RULES


def _succ_at(seq: Sequent, index: int) -> Formula:
    if not 0 <= index < len(seq.succ):
        raise ShapeError(f"no succedent formula at index {index}")
    return seq.succ[index]


def _ante_at(seq: Sequent, index: int) -> Formula:
    if not 0 <= index < len(seq.ante):
        raise ShapeError(f"no antecedent formula at index {index}")
    return seq.ante[index]


def _replace_succ(seq: Sequent, index: int, *new: Formula) -> Sequent:
    return Sequent(seq.ante,
                   seq.succ[:index] + tuple(new) + seq.succ[index + 1:])


def _replace_ante(seq: Sequent, index: int, *new: Formula) -> Sequent:
    return Sequent(seq.ante[:index] + tuple(new) + seq.ante[index + 1:],
                   seq.succ)


def rule_subgoals(seq: Sequent, rule_id: str, args: Optional[dict]) -> List[Sequent]:
    args = args or {}
    index = args.get("index", 0)

    # ------------------------------------------------------------ structural
    if rule_id == "implyR":
        f = _succ_at(seq, index)
        if not isinstance(f, Imp):
            raise ShapeError("implyR expects an implication in the succedent")
        return [Sequent(seq.ante + (f.left,),
                        seq.succ[:index] + (f.right,) + seq.succ[index + 1:])]
    if rule_id == "implyL":
        f = _ante_at(seq, index)
        if not isinstance(f, Imp):
            raise ShapeError("implyL expects an implication in the antecedent")
        drop = seq.ante[:index] + seq.ante[index + 1:]
        return [Sequent(drop, seq.succ + (f.left,)),
                Sequent(drop + (f.right,), seq.succ)]
    if rule_id == "andR":
        f = _succ_at(seq, index)
        if not isinstance(f, And):
            raise ShapeError("andR expects a conjunction in the succedent")
        return [_replace_succ(seq, index, f.left),
                _replace_succ(seq, index, f.right)]
    if rule_id == "andL":
        f = _ante_at(seq, index)
        if not isinstance(f, And):
            raise ShapeError("andL expects a conjunction in the antecedent")
        return [_replace_ante(seq, index, f.left, f.right)]
    if rule_id == "orR":
        f = _succ_at(seq, index)
        if not isinstance(f, Or):
            raise ShapeError("orR expects a disjunction in the succedent")
        return [_replace_succ(seq, index, f.left, f.right)]
    if rule_id == "orL":
        f = _ante_at(seq, index)
        if not isinstance(f, Or):
            raise ShapeError("orL expects a disjunction in the antecedent")
        return [_replace_ante(seq, index, f.left),
                _replace_ante(seq, index, f.right)]
    if rule_id == "notR":
        f = _succ_at(seq, index)
        if not isinstance(f, Not):
            raise ShapeError("notR expects a negation in the succedent")
        return [Sequent(seq.ante + (f.arg,),
                        seq.succ[:index] + seq.succ[index + 1:])]
    if rule_id == "notL":
        f = _ante_at(seq, index)
        if not isinstance(f, Not):
            raise ShapeError("notL expects a negation in the antecedent")
        return [Sequent(seq.ante[:index] + seq.ante[index + 1:],
                        seq.succ + (f.arg,))]
    if rule_id == "iffR":
        f = _succ_at(seq, index)
        if not isinstance(f, Iff):
            raise ShapeError("iffR expects a biconditional in the succedent")
        return [_replace_succ(seq, index, Imp(f.left, f.right)),
                _replace_succ(seq, index, Imp(f.right, f.left))]
    if rule_id == "iffL":
        f = _ante_at(seq, index)
        if not isinstance(f, Iff):
            raise ShapeError("iffL expects a biconditional in the antecedent")
        return [_replace_ante(seq, index, Imp(f.left, f.right),
                              Imp(f.right, f.left))]
    if rule_id == "closeId":
        for a in seq.ante:
            if a in seq.succ:
                return []
        raise ShapeError("closeId needs a formula on both sides")
    if rule_id == "closeTrue":
        if any(isinstance(s, TrueF) for s in seq.succ):
            return []
        raise ShapeError("closeTrue needs `true` in the succedent")
    if rule_id == "closeFalse":
        if any(isinstance(a, ast.FalseF) for a in seq.ante):
            return []
        raise ShapeError("closeFalse needs `false` in the antecedent")
    if rule_id == "cut":
        phi = args.get("formula")
        if not isinstance(phi, Formula):
            raise ShapeError("cut needs a formula argument")
        return [Sequent(seq.ante, seq.succ + (phi,)),
                Sequent(seq.ante + (phi,), seq.succ)]

    # ----------------------------------------------------------------- modal
    if rule_id == "G":
        f = _succ_at(seq, index)
        if not isinstance(f, Box):
            raise ShapeError("G expects a box in the succedent")
        return [Sequent((), (f.post,))]
    if rule_id == "MP":
        # minor premise first: from  Gamma |- phi  and  Gamma |- phi -> psi
        phi = args.get("formula")
        if not isinstance(phi, Formula):
            raise ShapeError("MP needs the cut formula")
        return [_replace_succ(seq, index, phi),
                _replace_succ(seq, index, Imp(phi, _succ_at(seq, index)))]
    if rule_id == "forallgen":
        f = _succ_at(seq, index)
        if not isinstance(f, Forall):
            raise ShapeError("forallgen expects a universal in the succedent")
        others = [g for i, g in enumerate(seq.succ) if i != index]
        for g in list(seq.ante) + others:
            if f.var in free_vars(g):
                raise SideConditionError(
                    f"{f.var} occurs free elsewhere in the goal; rename first")
        return [_replace_succ(seq, index, f.body)]

    # ------------------------------------------------------------ loop rules
    if rule_id == "ind":
        f = _succ_at(seq, index)
        if not (isinstance(f, Imp) and isinstance(f.right, Box)
                and isinstance(f.right.prog, ast.Loop)
                and f.left == f.right.post):
            raise ShapeError("ind expects p -> [{a}*]p in the succedent")
        p = f.left
        return [Sequent((), (Imp(p, Box(f.right.prog.body, p)),))]
    if rule_id == "con":
        f = _succ_at(seq, index)
        if not (isinstance(f, Imp) and isinstance(f.right, Diamond)
                and isinstance(f.right.prog, ast.Loop)):
            raise ShapeError("con expects p(v) -> <{a}*> exists v (v<=0 & p)")
        v = args.get("variable")
        if not isinstance(v, Variable):
            raise ShapeError("con needs the variant variable")
        p = f.left
        expected = Exists(v, And(Cmp(Var(v), LE, ast.ZERO), p))
        if f.right.post != expected:
            raise ShapeError("con conclusion must end in exists v (v<=0 & p)")
        alpha = f.right.prog
        if v in all_vars(alpha):
            raise SideConditionError(f"con requires {v} not to occur in the loop")
        try:
            step = admissible_substitute(p, v, ast.Sub(Var(v), ast.ONE))
        except ClashError as exc:
            raise SideConditionError(str(exc)) from None
        premise = Imp(And(p, Cmp(Var(v), GT, ast.ZERO)),
                      Diamond(alpha.body, step))
        return [Sequent((), (premise,))]

    # ---------------------------------------------------------- differential
    if rule_id == "DI":
        return _di(seq, index)
    if rule_id == "DC":
        return _dc(seq, index, args)
    if rule_id == "DW":
        return _dw(seq, index)
    if rule_id == "DV":
        return _dv(seq, index)
    if rule_id == "DA":
        return _da(seq, index, args)
    raise ShapeError(f"unknown rule {rule_id!r}")


def _box_ode_at(seq: Sequent, index: int) -> Box:
    f = _succ_at(seq, index)
    if not (isinstance(f, Box) and isinstance(f.prog, ODE)):
        raise ShapeError("expected [x' = e & q] p in the succedent")
    return f


def _modal_free(f: Formula) -> bool:
    if isinstance(f, (Box, Diamond)):
        return False
    from .sequent import node_children
    return all(_modal_free(c) for c in node_children(f)
               if isinstance(c, Formula))


def _di(seq: Sequent, index: int) -> List[Sequent]:
    f = _succ_at(seq, index)
    # accept both the implication form F -> [ode & q]F and the sequent
    # form F |- [ode & q]F
    if isinstance(f, Imp) and isinstance(f.right, Box) \
            and isinstance(f.right.prog, ODE) and f.left == f.right.post:
        invariant, ode = f.left, f.right.prog
    elif isinstance(f, Box) and isinstance(f.prog, ODE) \
            and seq.ante == (f.post,) and len(seq.succ) == 1:
        invariant, ode = f.post, f.prog
    else:
        raise ShapeError("DI applies to  F -> [ode & q]F  "
                         "(or the sequent F |- [ode & q]F)")
    try:
        delta = derive_formula(derivation_input(invariant))
    except (TypeError, ValueError) as exc:
        raise ShapeError(f"cannot derive the invariant: {exc}") from None
    premise = diff_subst(delta, ode.eqs)
    return [Sequent((ode.domain,), (premise,))]


def _dc(seq: Sequent, index: int, args: dict) -> List[Sequent]:
    f = _box_ode_at(seq, index)
    cut = args.get("formula")
    if not isinstance(cut, Formula):
        raise ShapeError("DC needs the cut formula")
    if not _modal_free(cut):
        raise SideConditionError("the differential cut must be modality-free")
    ode = f.prog
    left = _replace_succ(seq, index, Box(ode, cut))
    strengthened = ODE(ode.eqs, conj(ode.domain, cut))
    right = _replace_succ(seq, index, Box(strengthened, f.post))
    return [left, right]


def _dw(seq: Sequent, index: int) -> List[Sequent]:
    f = _box_ode_at(seq, index)
    return [Sequent((f.prog.domain,), (f.post,))]


def _dv(seq: Sequent, index: int) -> List[Sequent]:
    f = _succ_at(seq, index)
    if not (isinstance(f, Diamond) and isinstance(f.prog, ODE)):
        raise ShapeError("DV expects <x' = e & q> F in the succedent")
    ode = f.prog
    target = f.post
    try:
        weak = weak_negate(target)
        delta = derive_formula(derivation_input(target))
    except EqualityError as exc:
        raise SideConditionError(str(exc)) from None
    taken = taken_names(seq)
    eps = fresh_variable("eps", taken)
    try:
        strengthened = eps_strengthen(delta, eps)
    except EqualityError as exc:
        raise SideConditionError(str(exc)) from None
    progress = diff_subst(strengthened, ode.eqs)
    body = Imp(And(weak, ode.domain) if not isinstance(ode.domain, TrueF)
               else weak, progress)
    for v in reversed(sorted(ode.vars)):
        body = Forall(v, body)
    premise = Exists(eps, And(Cmp(Var(eps), GT, ast.ZERO), body))
    # the context stays: the ODE variables are re-quantified inside the
    # premise, so antecedent facts only constrain initial values and symbols
    progress_goal = _replace_succ(seq, index, premise)
    sustain = _replace_succ(seq, index, Box(ODE(ode.eqs, weak), ode.domain))
    return [progress_goal, sustain]


def _da(seq: Sequent, index: int, args: dict) -> List[Sequent]:
    f = _box_ode_at(seq, index)
    if seq.ante != (f.post,) or len(seq.succ) != 1:
        raise ShapeError("DA applies to goals of the shape  p |- [ode & q] p")
    y = args.get("variable")
    eta = args.get("term")
    psi = args.get("formula")
    if not (isinstance(y, Variable) and isinstance(eta, Term)
            and isinstance(psi, Formula)):
        raise ShapeError("DA needs the auxiliary variable, its dynamics, "
                         "and the reformulated invariant")
    goal_vars = seq.variables()
    if y in goal_vars:
        raise SideConditionError(f"auxiliary {y} must be fresh for the goal")
    if normalize_poly(eta).degree(y) > 1:
        raise SideConditionError(
            "auxiliary dynamics must be linear in the auxiliary variable "
            "(syntactic global-solution guarantee)")
    if not _modal_free(psi):
        raise SideConditionError("the reformulated invariant must be "
                                 "modality-free")
    if not (free_vars(psi) <= goal_vars | {y}):
        raise SideConditionError("the reformulation may only mention goal "
                                 "variables and the auxiliary")
    phi = f.post
    equiv = Sequent((), (Iff(phi, Exists(y, psi)),))
    extended = ODE(f.prog.eqs + ((y, eta),), f.prog.domain)
    preserved = Sequent((psi,), (Box(extended, psi),))
    return [equiv, preserved]
