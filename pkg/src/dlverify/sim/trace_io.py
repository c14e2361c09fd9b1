"""Line-oriented CSV export of traces: time, var=value pairs, label."""
from __future__ import annotations

import io
from typing import Iterable

from .runner import Trace


def trace_to_csv(trace: Trace) -> str:
    out = io.StringIO()
    for step in trace:
        values = " ".join(f"{v.name}={x:.12g}" for v, x in step.state)
        out.write(f"{step.time:.12g},{values},{step.label}\n")
    return out.getvalue()


def traces_to_csv(traces: Iterable[Trace]) -> str:
    parts = []
    for i, tr in enumerate(traces):
        parts.append(f"# trace {i}\n")
        parts.append(trace_to_csv(tr))
    return "".join(parts)
