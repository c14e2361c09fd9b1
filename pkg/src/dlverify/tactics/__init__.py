from .auto import AutoConfig, AutoReport, auto
from .invariants import (CutUnprovable, di_prove, di_search, diff_saturate,
                         loop_invariant, prove_auto)
from .script import ScriptError, run_script
