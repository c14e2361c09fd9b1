from ..core.ast import DivisionError
from .evalx import eval_exact, eval_term
from .poly import NonPolynomialError, Poly
from .qe import (LiftError, UnsupportedDegree, decide, fm_qe, qe, qe_lift,
                 universal_closure)
from .simplify import definite_sign, simplify
from .terms import normalize_poly, term_from_poly
