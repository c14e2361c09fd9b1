from .lexer import DLSyntaxError, tokenize
from .parser import ArityError, parse
from .pretty import pretty, pretty_with_spans
from .problem import Problem, load_problem, parse_problem
