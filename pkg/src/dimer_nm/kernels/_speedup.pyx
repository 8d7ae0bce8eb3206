# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled direct RK4 stepper for the Lindblad right-hand side.

Identical numerics to kernels._reference (same operation order within
each gemm-accumulated stage), all inner work in BLAS zgemm with no
Python in the step loop.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport zgemm

cnp.import_array()

ctypedef double complex zcomplex


cdef inline void _mm(zcomplex alpha, zcomplex* a, zcomplex* b,
                     zcomplex beta, zcomplex* c, int n) noexcept nogil:
    # Row-major C = alpha * A @ B + beta * C via the transpose identity:
    # interpret the buffers as their column-major transposes and swap operands.
    cdef char tn = b'N'
    zgemm(&tn, &tn, &n, &n, &n, &alpha, b, &n, a, &n, &beta, c, &n)


cdef void _rhs(zcomplex* r, zcomplex* out, zcomplex* scratch,
               zcomplex* h, zcomplex* hd,
               zcomplex* ls, zcomplex* lds, double* rates,
               int m, int n) noexcept nogil:
    cdef int k
    cdef long nn = <long> n * n
    _mm(-1j, h, r, 0, out, n)
    _mm(1j, r, hd, 1, out, n)
    for k in range(m):
        _mm(1, ls + k * nn, r, 0, scratch, n)
        _mm(rates[k], scratch, lds + k * nn, 1, out, n)


def rk4_lindblad_steps(rho, h_eff, jump_ops, rates, double dt, n_steps):
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] rho_c = \
        np.array(rho, dtype=complex, order="C")
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] h_c = \
        np.ascontiguousarray(h_eff, dtype=complex)
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] hd_c = \
        np.ascontiguousarray(h_c.conj().T)

    cdef int m = len(jump_ops)
    cdef int n = rho_c.shape[0]
    if m > 0:
        ls_arr = np.ascontiguousarray(np.stack(
            [np.asarray(op, dtype=complex) for op in jump_ops]))
    else:
        ls_arr = np.zeros((0, n, n), dtype=complex)
    cdef cnp.ndarray[zcomplex, ndim=3, mode="c"] ls_c = ls_arr
    cdef cnp.ndarray[zcomplex, ndim=3, mode="c"] lds_c = \
        np.ascontiguousarray(ls_arr.conj().transpose(0, 2, 1))
    cdef cnp.ndarray[double, ndim=1, mode="c"] rates_c = \
        np.ascontiguousarray(rates, dtype=float)

    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] k1 = np.empty((n, n), dtype=complex)
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] k2 = np.empty((n, n), dtype=complex)
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] k3 = np.empty((n, n), dtype=complex)
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] k4 = np.empty((n, n), dtype=complex)
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] stage = np.empty((n, n), dtype=complex)
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] scratch = np.empty((n, n), dtype=complex)

    cdef zcomplex* rp = <zcomplex*> rho_c.data
    cdef zcomplex* hp = <zcomplex*> h_c.data
    cdef zcomplex* hdp = <zcomplex*> hd_c.data
    cdef zcomplex* lsp = <zcomplex*> ls_c.data
    cdef zcomplex* ldsp = <zcomplex*> lds_c.data
    cdef double* ratesp = <double*> rates_c.data
    cdef zcomplex* k1p = <zcomplex*> k1.data
    cdef zcomplex* k2p = <zcomplex*> k2.data
    cdef zcomplex* k3p = <zcomplex*> k3.data
    cdef zcomplex* k4p = <zcomplex*> k4.data
    cdef zcomplex* stp = <zcomplex*> stage.data
    cdef zcomplex* scp = <zcomplex*> scratch.data

    cdef long nn = <long> n * n
    cdef long steps = <long> n_steps
    cdef long step, i
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0

    with nogil:
        for step in range(steps):
            _rhs(rp, k1p, scp, hp, hdp, lsp, ldsp, ratesp, m, n)
            for i in range(nn):
                stp[i] = rp[i] + half * k1p[i]
            _rhs(stp, k2p, scp, hp, hdp, lsp, ldsp, ratesp, m, n)
            for i in range(nn):
                stp[i] = rp[i] + half * k2p[i]
            _rhs(stp, k3p, scp, hp, hdp, lsp, ldsp, ratesp, m, n)
            for i in range(nn):
                stp[i] = rp[i] + dt * k3p[i]
            _rhs(stp, k4p, scp, hp, hdp, lsp, ldsp, ratesp, m, n)
            for i in range(nn):
                rp[i] = rp[i] + sixth * (k1p[i] + 2.0 * (k2p[i] + k3p[i]) + k4p[i])
    return rho_c
