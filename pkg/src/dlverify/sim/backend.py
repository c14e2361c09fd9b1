"""Integrator backend selection: compiled extension when built, else pure."""
from __future__ import annotations

try:  # pragma: no cover - depends on the build environment
    from . import _rk4 as _impl
    integrate = _impl.integrate
    BACKEND_NAME = _impl.BACKEND_NAME
except ImportError:  # pragma: no cover
    from . import _backend_pure as _impl
    integrate = _impl.integrate
    BACKEND_NAME = _impl.BACKEND_NAME

from ._backend_pure import integrate as integrate_pure, rk4_step
