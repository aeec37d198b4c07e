# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled geodesic kernel; same contract as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, isfinite

BACKEND = "cython"

cdef enum:
    OP_CONST = 0
    OP_U = 1
    OP_V = 2
    OP_ADD = 3
    OP_SUB = 4
    OP_MUL = 5
    OP_DIV = 6
    OP_NEG = 7
    OP_POWI = 8
    OP_SIN = 9
    OP_COS = 10

cnp.import_array()


cdef inline double _powi(double x, int n) noexcept nogil:
    cdef double r = 1.0
    cdef int k = n if n >= 0 else -n
    while k:
        if k & 1:
            r *= x
        x *= x
        k >>= 1
    return r if n >= 0 else 1.0 / r


cdef void _run(const int* code, int n, const double* consts, double u, double v, double* R) noexcept nogil:
    cdef int i, op, a, b
    for i in range(n):
        op = code[3 * i]
        a = code[3 * i + 1]
        b = code[3 * i + 2]
        if op == OP_CONST:
            R[i] = consts[a]
        elif op == OP_U:
            R[i] = u
        elif op == OP_V:
            R[i] = v
        elif op == OP_ADD:
            R[i] = R[a] + R[b]
        elif op == OP_SUB:
            R[i] = R[a] - R[b]
        elif op == OP_MUL:
            R[i] = R[a] * R[b]
        elif op == OP_DIV:
            R[i] = R[a] / R[b]
        elif op == OP_NEG:
            R[i] = -R[a]
        elif op == OP_POWI:
            R[i] = _powi(R[a], b)
        elif op == OP_SIN:
            R[i] = sin(R[a])
        else:
            R[i] = cos(R[a])


cdef int _rhs(const int* code, int n, const double* consts, const int* outs,
              const double* y, double* out, double* R) noexcept nogil:
    _run(code, n, consts, y[0], y[1], R)
    cdef double E = R[outs[0]], F = R[outs[1]], G = R[outs[2]]
    cdef double Eu = R[outs[3]], Ev = R[outs[4]], Fu = R[outs[5]]
    cdef double Fv = R[outs[6]], Gu = R[outs[7]], Gv = R[outs[8]]
    cdef double det = E * G - F * F
    if not det > 1e-12 * (E + G) * (E + G):
        return 0
    cdef double den = 2.0 * det
    cdef double g111 = (Ev * F - 2.0 * Fu * F + Eu * G) / den
    cdef double g222 = (Gv * E - 2.0 * Fv * F + Gu * F) / den
    cdef double g211 = (-Ev * E + 2.0 * Fu * E - Eu * F) / den
    cdef double g122 = (-Gv * F + 2.0 * Fv * G - Gu * G) / den
    cdef double g112 = (Ev * G - Gu * F) / den
    cdef double g212 = (-Ev * F + Gu * E) / den
    cdef double p = y[2], q = y[3]
    out[0] = p
    out[1] = q
    out[2] = -(g111 * p * p + 2.0 * g112 * p * q + g122 * q * q)
    out[3] = -(g211 * p * p + 2.0 * g212 * p * q + g222 * q * q)
    cdef int k
    for k in range(4):
        if not isfinite(out[k]):
            return 0
    return 1


def eval_programs(code, consts, outputs, u, v):
    cdef cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] c = np.ascontiguousarray(code, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] cs = np.ascontiguousarray(consts, dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] outs = np.ascontiguousarray(outputs, dtype=np.int32)
    shape = np.shape(u)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] us = np.ascontiguousarray(u, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] vs = np.ascontiguousarray(
        np.broadcast_to(np.asarray(v, dtype=np.float64), shape), dtype=np.float64).ravel()
    cdef int n = c.shape[0], k, nout = outs.shape[0]
    cdef Py_ssize_t i, npts = us.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] out = np.empty((nout, npts))
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] R = np.empty(max(n, 1))
    for i in range(npts):
        _run(<const int*> &c[0, 0], n, &cs[0], us[i], vs[i], &R[0])
        for k in range(nout):
            out[k, i] = R[outs[k]]
    return out.reshape((nout,) + shape)


def rk4_batch(code, consts, outputs, init, double h, long nsteps, double last):
    cdef cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] c = np.ascontiguousarray(code, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] cs = np.ascontiguousarray(consts, dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] outs = np.ascontiguousarray(outputs, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] Y0 = np.ascontiguousarray(init, dtype=np.float64).reshape(-1, 4)
    cdef Py_ssize_t m = Y0.shape[0]
    cdef long total = nsteps + (1 if last > 0 else 0)
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] traj = np.full((m, total + 1, 4), np.nan)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] nvalid = np.ones(m, dtype=np.int64)
    cdef int n = c.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] regs = np.empty(max(n, 1))
    cdef const int* cp = <const int*> &c[0, 0]
    cdef const double* csp = &cs[0]
    cdef const int* op = <const int*> &outs[0]
    cdef double* R = &regs[0]
    cdef double* T = &traj[0, 0, 0]
    cdef double y[4]
    cdef double t[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double hh
    cdef Py_ssize_t r, j, row = 4 * (total + 1)
    cdef long step
    cdef int ok
    with nogil:
        for r in range(m):
            for j in range(4):
                y[j] = Y0[r, j]
                T[r * row + j] = y[j]
            if not _rhs(cp, n, csp, op, y, k1, R):
                continue
            for step in range(total):
                hh = h if step < nsteps else last
                ok = _rhs(cp, n, csp, op, y, k1, R)
                if ok:
                    for j in range(4):
                        t[j] = y[j] + 0.5 * hh * k1[j]
                    ok = _rhs(cp, n, csp, op, t, k2, R)
                if ok:
                    for j in range(4):
                        t[j] = y[j] + 0.5 * hh * k2[j]
                    ok = _rhs(cp, n, csp, op, t, k3, R)
                if ok:
                    for j in range(4):
                        t[j] = y[j] + hh * k3[j]
                    ok = _rhs(cp, n, csp, op, t, k4, R)
                if ok:
                    for j in range(4):
                        t[j] = y[j] + (hh / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
                        if not isfinite(t[j]):
                            ok = 0
                if not ok:
                    break
                for j in range(4):
                    y[j] = t[j]
                    T[r * row + (step + 1) * 4 + j] = y[j]
                nvalid[r] = step + 2
    return traj, nvalid
