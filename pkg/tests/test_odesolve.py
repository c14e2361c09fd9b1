import random
from fractions import Fraction

import pytest

from dlverify.arith import normalize_poly
from dlverify.arith.poly import Poly
from dlverify.core.ast import Add, Const, Mul, Var, Variable
from dlverify.odesolve import Solution, Unsolvable, solve_ode, verify_solution
from dlverify.parser import parse, pretty

from generators import rand_fraction


def eqs(text):
    return parse(text, "program").eqs


class TestSolve:
    def test_double_integrator(self):
        ode = eqs("{x'=v, v'=a}")
        sol = solve_ode(ode)
        assert not isinstance(sol, Unsolvable)
        t = sol.time
        x_expected = parse(f"x + v*{t.name} + (a/2)*{t.name}^2", "term")
        assert normalize_poly(sol.term_for(Variable("x"))) == \
            normalize_poly(x_expected)
        assert verify_solution(ode, sol)

    def test_clock(self):
        ode = eqs("{t'=1}")
        sol = solve_ode(ode)
        assert normalize_poly(sol.term_for(Variable("t"))) == \
            normalize_poly(parse(f"t + {sol.time.name}", "term"))

    def test_rotational_unsolvable(self):
        out = solve_ode(eqs("{x'=y, y'=-x}"))
        assert isinstance(out, Unsolvable)

    def test_exponential_unsolvable(self):
        assert isinstance(solve_ode(eqs("{x'=x}")), Unsolvable)

    def test_triangular_chain(self):
        ode = eqs("{x'=y^2, y'=c, z'=x+y}")
        sol = solve_ode(ode)
        assert not isinstance(sol, Unsolvable)
        assert verify_solution(ode, sol)

    def test_fresh_time_variable_avoids_names(self):
        ode = eqs("{x'=v, v'=a}")
        sol = solve_ode(ode, avoid_names={"t$1", "t$2"})
        assert sol.time.name == "t$3"


class TestVerify:
    def test_derivative_mismatch(self):
        ode = eqs("{x'=2}")
        t = Variable("t$1")
        wrong = Solution(t, ((Variable("x"),
                              Add(Var(Variable("x")), Var(t))),))
        assert verify_solution(ode, wrong) is False

    def test_initial_value_mismatch(self):
        ode = eqs("{x'=1}")
        t = Variable("t$1")
        wrong = Solution(t, ((Variable("x"),
                              Mul(Const(Fraction(2)), Var(t))),))
        assert verify_solution(ode, wrong) is False

    def test_mutation_harness(self):
        # perturbing a correct solution must be caught nearly always
        rng = random.Random(53)
        systems = ["{x'=v, v'=a}", "{x'=y^2, y'=c}", "{t'=1}",
                   "{x'=v, v'=g, z'=x}"]
        mutations = total = 0
        for text in systems:
            ode = eqs(text)
            sol = solve_ode(ode)
            assert verify_solution(ode, sol)
            for _ in range(40):
                target = rng.randrange(len(sol.assignments))
                v, term = sol.assignments[target]
                bump = Const(rand_fraction(rng))
                if bump.value == 0:
                    continue
                mutated_term = Add(term, Mul(bump, Var(sol.time))) \
                    if rng.random() < 0.5 else Add(term, bump)
                mutated = Solution(sol.time, tuple(
                    (w, mutated_term if w == v else s)
                    for w, s in sol.assignments))
                total += 1
                if not verify_solution(ode, mutated):
                    mutations += 1
        assert mutations / total >= 0.99

    def test_solver_output_always_verifies(self):
        rng = random.Random(59)
        names = [Variable(n) for n in ("x", "y", "z")]
        for _ in range(80):
            dim = rng.randint(1, 3)
            # build a random triangular system (guaranteed solvable)
            eqs_list = []
            for i in range(dim):
                rhs = Const(rand_fraction(rng))
                for j in range(i + 1, dim):
                    rhs = Add(rhs, Mul(Const(rand_fraction(rng)),
                                       Var(names[j])))
                eqs_list.append((names[i], rhs))
            sol = solve_ode(tuple(eqs_list))
            assert not isinstance(sol, Unsolvable)
            assert verify_solution(tuple(eqs_list), sol)


class TestSemigroup:
    def test_flow_composes(self):
        # sol(t+s) equals sol(s) started from sol(t), exactly on rationals
        rng = random.Random(61)
        ode = eqs("{x'=v, v'=a}")
        sol = solve_ode(ode)
        t = sol.time
        for _ in range(60):
            state = {Variable("x"): rand_fraction(rng),
                     Variable("v"): rand_fraction(rng),
                     Variable("a"): rand_fraction(rng)}
            t1, t2 = abs(rand_fraction(rng)), abs(rand_fraction(rng))
            direct = {}
            for v, term in sol.assignments:
                direct[v] = normalize_poly(term).eval({**state, t: t1 + t2})
            mid = dict(state)
            for v, term in sol.assignments:
                mid[v] = normalize_poly(term).eval({**state, t: t1})
            final = {}
            for v, term in sol.assignments:
                final[v] = normalize_poly(term).eval({**mid, t: t2})
            assert final == direct
