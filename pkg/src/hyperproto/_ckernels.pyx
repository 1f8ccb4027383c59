# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Contract identical to ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, fabs

cnp.import_array()

cdef double LOG_FLOOR = 1e-12


def rank_accumulate(const double[:, ::1] C, const cnp.int64_t[:, ::1] triplets,
                    const double[::1] sbar):
    cdef Py_ssize_t K = C.shape[0]
    cdef Py_ssize_t T = triplets.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A_arr = np.zeros((K, K), dtype=np.float64)
    cdef double[:, ::1] A = A_arr
    cdef Py_ssize_t t, i, j, k
    cdef double o, e, S, Sc, coef, total = 0.0
    with nogil:
        for t in range(T):
            i = triplets[t, 0]
            j = triplets[t, 1]
            k = triplets[t, 2]
            o = C[i, j] - C[i, k]
            e = exp(-fabs(o))
            if o >= 0:
                S = 1.0 / (1.0 + e)
                Sc = e / (1.0 + e)
            else:
                S = e / (1.0 + e)
                Sc = 1.0 / (1.0 + e)
            if sbar[t] > 0.5:
                total -= log(S if S > LOG_FLOOR else LOG_FLOOR)
                coef = -Sc if S > LOG_FLOOR else 0.0
            else:
                total -= log(Sc if Sc > LOG_FLOOR else LOG_FLOOR)
                coef = S if Sc > LOG_FLOOR else 0.0
            A[i, j] += coef
            A[i, k] -= coef
    return total, A_arr


def rowmax_scatter(const double[:, ::1] M, const double[:, ::1] P, bint both):
    cdef Py_ssize_t K = M.shape[0]
    cdef Py_ssize_t D = P.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] G_arr = np.zeros((K, D), dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] J_arr = np.empty(K, dtype=np.int64)
    cdef double[:, ::1] G = G_arr
    cdef cnp.int64_t[::1] J = J_arr
    cdef Py_ssize_t i, j, d, best
    cdef double m, total = 0.0
    with nogil:
        for i in range(K):
            best = 0
            m = M[i, 0]
            for j in range(1, K):
                if M[i, j] > m:
                    m = M[i, j]
                    best = j
            J[i] = best
            total += m
        for i in range(K):
            best = J[i]
            if best == i:
                for d in range(D):
                    G[i, d] += 2.0 * P[i, d]
            else:
                for d in range(D):
                    G[i, d] += P[best, d]
                if both:
                    for d in range(D):
                        G[best, d] += P[i, d]
    return total, G_arr, J_arr
