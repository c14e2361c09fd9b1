from .backend import BACKEND_NAME
from .falsify import Counterexample, Unknown, falsify
from .reach import ExplosionError, NotSaturated, discrete_reach, eval_discrete
from .runner import RunResult, SimConfig, Trace, TraceStep, run
from .trace_io import trace_to_csv, traces_to_csv
