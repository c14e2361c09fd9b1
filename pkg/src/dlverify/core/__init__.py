from .ast import (Add, And, Assign, AssignAny, Box, Choice, Cmp, Const,
                  Diamond, Div, Edge, EQ, Exists, FALSE, FalseF, Forall,
                  Formula, FuncApp, GE, GT, HybridAutomaton, Iff, IfElse, Imp,
                  LE, Loop, LT, Mode, Mul, NE, Neg, Node, Not, ODE, ONE, Or,
                  Program, RELATIONS, Seq, Span, Sub, Term, Test, TRUE, TrueF,
                  Var, Variable, While, ZERO, conj, const, const_value, disj,
                  div, DivisionError, is_core_program, lnot, neg, seq,
                  term_children, walk_terms)
from .automata import MultipleInitError, choice_branches, compile_automaton
from .desugar import desugar, desugar_formula
from .subst import (ClashError, admissible_substitute, rename_bound,
                    subst_term)
from .vars import (all_vars, bound_vars, free_vars, fresh_variable,
                   must_bound_vars, signature, term_vars, var_analysis)
