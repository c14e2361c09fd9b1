# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled RK4 kernel for polynomial vector fields with conjunctive domains.

Mirrors `_backend_pure.integrate`; selected by `backend` when importable.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()

REL_LE = 0
REL_LT = 1
REL_EQ = 2

BACKEND_NAME = "compiled"


cdef double _eval_poly(double[::1] coeffs, signed char[:, ::1] exps,
                       Py_ssize_t start, Py_ssize_t stop,
                       double* y, Py_ssize_t nvars) nogil:
    cdef double total = 0.0
    cdef double val, base
    cdef Py_ssize_t t, i
    cdef signed char e, k
    for t in range(start, stop):
        val = coeffs[t]
        for i in range(nvars):
            e = exps[t, i]
            if e:
                base = y[i]
                for k in range(e):
                    val *= base
        total += val
    return total


cdef void _deriv(double[::1] coeffs, signed char[:, ::1] exps,
                 Py_ssize_t[::1] starts, Py_ssize_t neq,
                 double* y, Py_ssize_t nvars, double* out) nogil:
    cdef Py_ssize_t i
    for i in range(neq):
        out[i] = _eval_poly(coeffs, exps, starts[i], starts[i + 1], y, nvars)


cdef bint _domain_ok(double[::1] dcoeffs, signed char[:, ::1] dexps,
                     Py_ssize_t[::1] dstarts, signed char[::1] drels,
                     Py_ssize_t natoms, double* y, Py_ssize_t nvars) nogil:
    cdef Py_ssize_t i
    cdef double v
    for i in range(natoms):
        v = _eval_poly(dcoeffs, dexps, dstarts[i], dstarts[i + 1], y, nvars)
        if drels[i] == 0:
            if not (v <= 0.0):
                return False
        elif drels[i] == 1:
            if not (v < 0.0):
                return False
        else:
            if v != 0.0:
                return False
    return True


class CompiledSystem:
    """Flattened arrays for one FlatODE (built once, reused per call)."""

    def __init__(self, flat):
        nvars = len(flat.variables)
        self.nvars = nvars
        self.n_ode = flat.n_ode
        starts = [0]
        coeffs = []
        exps = []
        for fp in flat.rhs:
            for c, e in fp:
                coeffs.append(c)
                exps.append(e)
            starts.append(len(coeffs))
        self.starts = np.asarray(starts, dtype=np.intp)
        self.coeffs = np.asarray(coeffs, dtype=np.float64)
        self.exps = np.asarray(exps, dtype=np.int8).reshape(len(coeffs), nvars) \
            if coeffs else np.zeros((0, nvars), dtype=np.int8)
        atoms = flat.domain_atoms
        self.has_domain = atoms is not None
        dstarts = [0]
        dcoeffs = []
        dexps = []
        drels = []
        if atoms:
            for fp, rel in atoms:
                for c, e in fp:
                    dcoeffs.append(c)
                    dexps.append(e)
                dstarts.append(len(dcoeffs))
                drels.append(rel)
        self.dstarts = np.asarray(dstarts, dtype=np.intp)
        self.dcoeffs = np.asarray(dcoeffs, dtype=np.float64)
        self.dexps = np.asarray(dexps, dtype=np.int8).reshape(len(dcoeffs), nvars) \
            if dcoeffs else np.zeros((0, nvars), dtype=np.int8)
        self.drels = np.asarray(drels, dtype=np.int8)


def _system_for(flat):
    sys = getattr(flat, "_compiled_system", None)
    if sys is None:
        sys = CompiledSystem(flat)
        flat._compiled_system = sys
    return sys


def integrate(flat, y0, double h, int max_steps):
    """Fixed-step RK4 trajectory staying inside a conjunctive domain."""
    sys = _system_for(flat)
    if not sys.has_domain:
        # non-conjunctive domain: fall back to the reference implementation
        from . import _backend_pure
        return _backend_pure.integrate(flat, y0, h, max_steps)

    cdef Py_ssize_t nvars = sys.nvars
    cdef Py_ssize_t neq = sys.n_ode
    cdef double[::1] coeffs = sys.coeffs
    cdef signed char[:, ::1] exps = sys.exps
    cdef Py_ssize_t[::1] starts = sys.starts
    cdef double[::1] dcoeffs = sys.dcoeffs
    cdef signed char[:, ::1] dexps = sys.dexps
    cdef Py_ssize_t[::1] dstarts = sys.dstarts
    cdef signed char[::1] drels = sys.drels
    cdef Py_ssize_t natoms = sys.drels.shape[0]

    traj_np = np.empty((max_steps + 1, nvars), dtype=np.float64)
    cdef double[:, ::1] traj = traj_np
    cdef Py_ssize_t i, step
    for i in range(nvars):
        traj[0, i] = y0[i]

    work_np = np.asarray(y0, dtype=np.float64).copy()
    cdef double[::1] work = work_np
    k1_np = np.zeros(neq); k2_np = np.zeros(neq)
    k3_np = np.zeros(neq); k4_np = np.zeros(neq)
    tmp_np = work_np.copy()
    cdef double[::1] k1 = k1_np, k2 = k2_np, k3 = k3_np, k4 = k4_np
    cdef double[::1] tmp = tmp_np
    cdef bint exited = False
    cdef Py_ssize_t accepted = 0

    with nogil:
        for step in range(max_steps):
            _deriv(coeffs, exps, starts, neq, &work[0], nvars, &k1[0])
            for i in range(nvars):
                tmp[i] = work[i]
            for i in range(neq):
                tmp[i] = work[i] + 0.5 * h * k1[i]
            _deriv(coeffs, exps, starts, neq, &tmp[0], nvars, &k2[0])
            for i in range(neq):
                tmp[i] = work[i] + 0.5 * h * k2[i]
            _deriv(coeffs, exps, starts, neq, &tmp[0], nvars, &k3[0])
            for i in range(neq):
                tmp[i] = work[i] + h * k3[i]
            _deriv(coeffs, exps, starts, neq, &tmp[0], nvars, &k4[0])
            for i in range(neq):
                tmp[i] = work[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i]
                                                + 2.0 * k3[i] + k4[i])
            for i in range(neq, nvars):
                tmp[i] = work[i]
            if not _domain_ok(dcoeffs, dexps, dstarts, drels, natoms,
                              &tmp[0], nvars):
                exited = True
                break
            accepted += 1
            for i in range(nvars):
                work[i] = tmp[i]
                traj[accepted, i] = tmp[i]

    rows = traj_np[:accepted + 1]
    return [[float(x) for x in row] for row in rows], bool(exited)
