# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tape evaluator for second-order jets.

Same contract as ``_jetcore_py``: row ``k`` of the tape writes slot ``k``;
the return value is the first failing row or -1.
"""

from libc.math cimport sin, cos, tan, exp, log, sqrt, isfinite

import numpy as np

cdef enum:
    OP_CONST = 0
    OP_VAR = 1
    OP_ADD = 2
    OP_SUB = 3
    OP_MUL = 4
    OP_DIV = 5
    OP_NEG = 6
    OP_POW = 7
    OP_SIN = 8
    OP_COS = 9
    OP_TAN = 10
    OP_EXP = 11
    OP_LOG = 12
    OP_SQRT = 13


cdef inline void _chain(double[::1] val, double[:, ::1] grad, double[:, :, ::1] hess,
                        Py_ssize_t k, Py_ssize_t a, Py_ssize_t m,
                        double f0, double f1, double f2) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double h
    val[k] = f0
    for i in range(m):
        grad[k, i] = f1 * grad[a, i]
    for i in range(m):
        for j in range(i, m):
            h = f1 * hess[a, i, j] + f2 * grad[a, i] * grad[a, j]
            hess[k, i, j] = h
            hess[k, j, i] = h


cdef Py_ssize_t _run(const int[:, ::1] code, const double[::1] consts, const double[::1] x,
                     double[::1] val, double[:, ::1] grad, double[:, :, ::1] hess) noexcept nogil:
    cdef Py_ssize_t n_rows = code.shape[0]
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t k, a, b, i, j
    cdef int op
    cdef double va, vb, q, h, lg, p, e, t, r

    for k in range(n_rows):
        op = code[k, 0]
        a = code[k, 1]
        b = code[k, 2]
        if op == OP_CONST:
            val[k] = consts[a]
            for i in range(m):
                grad[k, i] = 0.0
                for j in range(m):
                    hess[k, i, j] = 0.0
        elif op == OP_VAR:
            val[k] = x[a]
            for i in range(m):
                grad[k, i] = 0.0
                for j in range(m):
                    hess[k, i, j] = 0.0
            grad[k, a] = 1.0
        elif op == OP_ADD or op == OP_SUB:
            q = 1.0 if op == OP_ADD else -1.0
            val[k] = val[a] + q * val[b]
            for i in range(m):
                grad[k, i] = grad[a, i] + q * grad[b, i]
                for j in range(m):
                    hess[k, i, j] = hess[a, i, j] + q * hess[b, i, j]
        elif op == OP_NEG:
            val[k] = -val[a]
            for i in range(m):
                grad[k, i] = -grad[a, i]
                for j in range(m):
                    hess[k, i, j] = -hess[a, i, j]
        elif op == OP_MUL:
            va = val[a]
            vb = val[b]
            val[k] = va * vb
            for i in range(m):
                grad[k, i] = grad[a, i] * vb + va * grad[b, i]
            for i in range(m):
                for j in range(i, m):
                    h = (hess[a, i, j] * vb
                         + (grad[a, i] * grad[b, j] + grad[b, i] * grad[a, j])
                         + va * hess[b, i, j])
                    hess[k, i, j] = h
                    hess[k, j, i] = h
        elif op == OP_DIV:
            vb = val[b]
            if vb == 0.0:
                return k
            q = val[a] / vb
            val[k] = q
            for i in range(m):
                grad[k, i] = (grad[a, i] - q * grad[b, i]) / vb
            for i in range(m):
                for j in range(i, m):
                    h = (hess[a, i, j]
                         - (grad[k, i] * grad[b, j] + grad[b, i] * grad[k, j])
                         - q * hess[b, i, j]) / vb
                    hess[k, i, j] = h
                    hess[k, j, i] = h
        elif op == OP_POW:
            # exp(b * log(a)), positive base only
            va = val[a]
            vb = val[b]
            if va <= 0.0:
                return k
            lg = log(va)
            p = vb * lg
            e = exp(p)
            if not isfinite(e):
                return k
            val[k] = e
            # gradient of log(a) and of p = b*log(a), staged in row k
            for i in range(m):
                grad[k, i] = grad[b, i] * lg + vb * (grad[a, i] / va)
            for i in range(m):
                for j in range(i, m):
                    h = (hess[b, i, j] * lg
                         + grad[b, i] * (grad[a, j] / va)
                         + (grad[a, i] / va) * grad[b, j]
                         + vb * (hess[a, i, j] / va - grad[a, i] * grad[a, j] / (va * va)))
                    h = e * (h + grad[k, i] * grad[k, j])
                    hess[k, i, j] = h
                    hess[k, j, i] = h
            for i in range(m):
                grad[k, i] = e * grad[k, i]
        elif op == OP_SIN:
            t = sin(val[a])
            r = cos(val[a])
            _chain(val, grad, hess, k, a, m, t, r, -t)
        elif op == OP_COS:
            t = sin(val[a])
            r = cos(val[a])
            _chain(val, grad, hess, k, a, m, r, -t, -r)
        elif op == OP_TAN:
            if cos(val[a]) == 0.0:
                return k
            t = tan(val[a])
            r = 1.0 + t * t
            _chain(val, grad, hess, k, a, m, t, r, 2.0 * t * r)
        elif op == OP_EXP:
            e = exp(val[a])
            _chain(val, grad, hess, k, a, m, e, e, e)
        elif op == OP_LOG:
            va = val[a]
            if va <= 0.0:
                return k
            _chain(val, grad, hess, k, a, m, log(va), 1.0 / va, -1.0 / (va * va))
        elif op == OP_SQRT:
            va = val[a]
            if va <= 0.0:
                return k
            r = sqrt(va)
            _chain(val, grad, hess, k, a, m, r, 0.5 / r, -0.25 / (r * va))
        else:
            return k
        if not isfinite(val[k]):
            return k
    return -1


def run_tape(const int[:, ::1] code, const double[::1] consts, const double[::1] x,
             double[::1] val, double[:, ::1] grad, double[:, :, ::1] hess):
    cdef Py_ssize_t status
    with nogil:
        status = _run(code, consts, x, val, grad, hess)
    return status


def run_tape_batch(const int[:, ::1] code, const double[::1] consts,
                   const Py_ssize_t[::1] outputs, const double[:, ::1] xs,
                   double[:, ::1] vals, double[:, :, ::1] grads,
                   double[:, :, :, ::1] hesses):
    cdef Py_ssize_t n_rows = code.shape[0]
    cdef Py_ssize_t m = xs.shape[1]
    cdef Py_ssize_t n_out = outputs.shape[0]
    cdef Py_ssize_t p, o, s, i, j, status
    cdef double[::1] val = np.empty(n_rows)
    cdef double[:, ::1] grad = np.empty((n_rows, m))
    cdef double[:, :, ::1] hess = np.empty((n_rows, m, m))
    with nogil:
        for p in range(xs.shape[0]):
            status = _run(code, consts, xs[p], val, grad, hess)
            if status >= 0:
                with gil:
                    return p, status
            for o in range(n_out):
                s = outputs[o]
                vals[p, o] = val[s]
                for i in range(m):
                    grads[p, o, i] = grad[s, i]
                    for j in range(m):
                        hesses[p, o, i, j] = hess[s, i, j]
    return -1, -1
