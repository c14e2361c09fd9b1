import random
from fractions import Fraction

import pytest

from dlverify.arith import normalize_poly
from dlverify.core.ast import Variable
from dlverify.deriv import (EqualityError, NormalFormError, derivation_input,
                            derive_formula, derive_term, diff_subst,
                            eps_strengthen, weak_negate)
from dlverify.parser import parse, pretty
from dlverify.sim.compile import FlatODE
from dlverify.sim.backend import integrate_pure, rk4_step

from generators import parse_primed, rand_term


def T(s):
    return parse(s, "term")


def F(s):
    return parse(s, "formula")


def ode(s):
    return parse(s, "program").eqs


class TestDeriveTerm:
    def test_constant(self):
        assert derive_term(T("5")) == T("0")

    def test_circle(self):
        d = derive_term(T("x^2+y^2"))
        expected = parse_primed("2*x*x_p + 2*y*y_p", "term")
        assert normalize_poly(d) == normalize_poly(expected)

    def test_quotient_by_constant(self):
        d = derive_term(T("a/2"))
        assert normalize_poly(d) == normalize_poly(parse_primed("a_p/2", "term"))

    def test_linearity(self):
        rng = random.Random(2)
        for _ in range(150):
            t1, t2 = rand_term(rng, 2), rand_term(rng, 2)
            separate = normalize_poly(derive_term(t1)) \
                + normalize_poly(derive_term(t2))
            from dlverify.core.ast import Add
            together = derive_term(Add(t1, t2))
            assert normalize_poly(together) == separate


class TestDeriveFormula:
    def test_rotational_example(self):
        d = derive_formula(F("x^2+y^2>=p^2"))
        sub = diff_subst(d, ode("{x'=y, y'=-x}"))
        lhs, rhs = sub.left, sub.right
        assert normalize_poly(lhs) == normalize_poly(rhs)

    def test_cubic_gives_three_x_squared(self):
        # the derivation rules give 3x^2 x' (validated numerically below)
        d = derive_formula(F("x^3>=-1"))
        sub = diff_subst(d, ode("{x'=1}"))
        assert normalize_poly(sub.left) == normalize_poly(T("3*x^2"))

    def test_disjunction_derives_conjunctively(self):
        d = derive_formula(F("x>=0 | y>=0"))
        assert d == parse_primed("x_p>=0 & y_p>=0")

    def test_strict_atoms_weaken(self):
        assert derive_formula(F("x>0")) == parse_primed("x_p>=0")

    def test_negations_must_be_resolved_first(self):
        with pytest.raises(NormalFormError):
            derive_formula(F("!(x>=0)"))
        out = derive_formula(derivation_input(F("!(x>=0)")))
        assert out == parse_primed("x_p<=0")

    def test_disequality_splits_to_equal_derivatives(self):
        d = derive_formula(derivation_input(F("x!=0")))
        assert d == parse_primed("x_p>=0 & x_p<=0")


class TestDiffSubst:
    def test_rotational(self):
        sub = diff_subst(parse_primed("2*x*x_p+2*y*y_p>=0"),
                         ode("{x'=y, y'=-x}"))
        assert normalize_poly(sub.left).is_zero()

    def test_absent_variables_are_constant(self):
        sub = diff_subst(parse_primed("3*x^2*x_p + y_p >= 0"),
                         ode("{x'=(x-3)^4+a}"))
        assert sub == F("3*x^2*((x-3)^4+a) >= 0")

    def test_empty_ode(self):
        assert diff_subst(parse_primed("x_p>=0"), ()) == F("0>=0")


class TestWeakNegation:
    def test_paper_definition(self):
        assert weak_negate(F("x>=b")) == F("x<=b")
        assert weak_negate(F("x>b")) == F("x<=b")

    def test_dual_cases(self):
        assert weak_negate(F("x<b")) == F("x>=b")
        assert weak_negate(F("x<=b")) == F("x>=b")

    def test_de_morgan(self):
        assert weak_negate(F("x>=0 & y>0")) == F("x<=0 | y<=0")

    def test_equalities_rejected(self):
        with pytest.raises(EqualityError):
            weak_negate(F("x=0"))


class TestEpsStrengthen:
    def test_progress_example(self):
        # x'>=0 strengthened, then substituted under x'=a, gives a >= eps
        eps = Variable("eps")
        d = eps_strengthen(derive_formula(F("x>=b")), eps)
        sub = diff_subst(d, ode("{x'=a}"))
        assert sub == F("a >= eps")

    def test_lower_bounds_descend(self):
        eps = Variable("eps")
        out = eps_strengthen(parse_primed("x_p<=0"), eps)
        assert out == parse_primed("x_p<=0-eps")

    def test_equalities_rejected(self):
        with pytest.raises(EqualityError):
            eps_strengthen(parse_primed("x_p=0"), Variable("eps"))

    def test_zero_eps_collapses(self):
        from dlverify.core.subst import admissible_substitute
        eps = Variable("eps")
        d = parse_primed("x_p>=0")
        strengthened = eps_strengthen(d, eps)
        collapsed = admissible_substitute(strengthened, eps, T("0"))
        sub = diff_subst(collapsed, ode("{x'=a}"))
        base = diff_subst(d, ode("{x'=a}"))
        assert normalize_poly(sub.left) - normalize_poly(sub.right) == \
            normalize_poly(base.left) - normalize_poly(base.right)


def finite_difference_check(rng: random.Random, dim: int) -> float:
    """|d/dt val(c)(flow(t)) - val(D(c)[x':=theta])(flow(t))| at samples."""
    from dlverify.core.ast import Cmp, GE, ZERO
    all_vars = [Variable(n) for n in ("x", "y", "z")]
    eqs = tuple((v, rand_term(rng, 1)) for v in all_vars[:dim])
    term = rand_term(rng, 2)
    derived = diff_subst(Cmp(derive_term(term), GE, ZERO), eqs).left

    # ambient covers every variable the monitored term can mention
    flat = FlatODE(eqs, parse("true"), all_vars)
    y0 = [rng.uniform(-1.0, 1.0) for _ in flat.variables]
    h = 1e-3
    traj, _ = integrate_pure(flat, y0, h, 400)
    worst = 0.0
    from dlverify.sim.floats import eval_term_float
    delta = 1e-4
    for k in (50, 150, 300):
        if k >= len(traj):
            continue
        state = {v: traj[k][i] for i, v in enumerate(flat.variables)}
        if max(abs(x) for x in traj[k]) > 50:
            continue  # runaway trajectory; derivative magnitudes dwarf tol
        fwd = rk4_step(flat, traj[k], delta)
        back = rk4_step(flat, traj[k], -delta)
        val_fwd = eval_term_float(term, {v: fwd[i] for i, v in
                                         enumerate(flat.variables)})
        val_back = eval_term_float(term, {v: back[i] for i, v in
                                          enumerate(flat.variables)})
        numeric = (val_fwd - val_back) / (2 * delta)
        symbolic = eval_term_float(derived, state)
        worst = max(worst, abs(numeric - symbolic))
    return worst


class TestDerivationLemmaNumeric:
    def test_finite_differences_agree(self):
        rng = random.Random(41)
        for _ in range(25):
            assert finite_difference_check(rng, rng.choice((1, 2, 3))) <= 1e-4
