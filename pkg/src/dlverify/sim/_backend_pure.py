"""Pure-Python RK4 integration backend (reference implementation).

The compiled extension in `_rk4` implements the same entry point; `backend`
selects whichever is available at import time.
"""
from __future__ import annotations

from typing import List, Sequence, Tuple

from .compile import FlatODE

BACKEND_NAME = "pure"


def rk4_step(flat: FlatODE, y: Sequence[float], h: float) -> List[float]:
    n = flat.n_ode
    k1 = flat.deriv(y)
    y2 = list(y)
    for i in range(n):
        y2[i] = y[i] + 0.5 * h * k1[i]
    k2 = flat.deriv(y2)
    y3 = list(y)
    for i in range(n):
        y3[i] = y[i] + 0.5 * h * k2[i]
    k3 = flat.deriv(y3)
    y4 = list(y)
    for i in range(n):
        y4[i] = y[i] + h * k3[i]
    k4 = flat.deriv(y4)
    out = list(y)
    for i in range(n):
        out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return out


def integrate(flat: FlatODE, y0: Sequence[float], h: float,
              max_steps: int) -> Tuple[List[List[float]], bool]:
    """Fixed-step RK4 trajectory staying inside the domain.

    Returns (trajectory including y0, exited) where exited means the step
    after the last returned state would leave the evolution domain.
    """
    traj = [list(y0)]
    y = list(y0)
    for _ in range(max_steps):
        nxt = rk4_step(flat, y, h)
        if not flat.domain_holds(nxt):
            return traj, True
        traj.append(nxt)
        y = nxt
    return traj, False
