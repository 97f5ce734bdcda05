# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled piecewise-constant midpoint stepper.

Same contract as ``_stepper_py.step_propagate``: one hermitian
eigendecomposition (LAPACK zheevd) per step, phases applied in the
eigenbasis, supporting a block of state columns at once. The row-major
hermitian buffer is handed to the column-major LAPACK routine directly: it
then factorizes H^T = conj(H), whose eigenvectors are the conjugates of
those of H, which the application step accounts for.
"""

import numpy as np

cimport numpy as cnp
from libc.string cimport memcpy
from scipy.linalg.cython_blas cimport zgemm
from scipy.linalg.cython_lapack cimport zheevd

cnp.import_array()


cdef extern from "complex.h" nogil:
    double complex cexp(double complex)


def step_propagate(cnp.complex128_t[:, ::1] h_static,
                   cnp.complex128_t[:, :, ::1] ops,
                   cnp.complex128_t[:, ::1] env,
                   double dt,
                   psi_in):
    psi_arr = np.array(psi_in, dtype=np.complex128, copy=True, order="C")
    single = psi_arr.ndim == 1
    if single:
        psi_arr = psi_arr[:, None]

    cdef int n = h_static.shape[0]
    cdef int m = psi_arr.shape[1]
    cdef int n_terms = ops.shape[0]
    cdef int n_steps = env.shape[0]
    cdef int info = 0, lwork = -1, lrwork = -1, liwork = -1
    cdef int i, j, k, step
    cdef double complex e, ec, phase
    cdef double complex one = 1.0, zero = 0.0

    cdef cnp.complex128_t[:, ::1] h = np.zeros((n, n), dtype=np.complex128)
    cdef cnp.float64_t[::1] w = np.zeros(n, dtype=np.float64)
    cdef cnp.complex128_t[:, ::1] psi = psi_arr
    cdef cnp.complex128_t[:, ::1] coef = np.zeros((n, m), dtype=np.complex128)

    # workspace query
    cdef cnp.complex128_t[::1] wq = np.zeros(1, dtype=np.complex128)
    cdef cnp.float64_t[::1] rwq = np.zeros(1, dtype=np.float64)
    cdef int[::1] iwq = np.zeros(1, dtype=np.intc)
    zheevd('V', 'L', &n, &h[0, 0], &n, &w[0], &wq[0], &lwork,
           &rwq[0], &lrwork, &iwq[0], &liwork, &info)
    if info != 0:
        raise RuntimeError(f"zheevd workspace query failed (info={info})")
    lwork = <int>wq[0].real
    lrwork = <int>rwq[0]
    liwork = <int>iwq[0]

    cdef cnp.complex128_t[::1] work = np.zeros(max(lwork, 1), dtype=np.complex128)
    cdef cnp.float64_t[::1] rwork = np.zeros(max(lrwork, 1), dtype=np.float64)
    cdef int[::1] iwork = np.zeros(max(liwork, 1), dtype=np.intc)

    with nogil:
        for step in range(n_steps):
            # assemble H(step) = h_static + sum_k e*ops[k] + conj(e)*ops[k]^dag
            memcpy(&h[0, 0], &h_static[0, 0], n * n * sizeof(double complex))
            for k in range(n_terms):
                e = env[step, k]
                ec = e.conjugate()
                for i in range(n):
                    for j in range(n):
                        h[i, j] = h[i, j] + e * ops[k, i, j] + ec * ops[k, j, i].conjugate()

            zheevd('V', 'L', &n, &h[0, 0], &n, &w[0], &work[0], &lwork,
                   &rwork[0], &lrwork, &iwork[0], &liwork, &info)
            if info != 0:
                break

            # Rows of h (row-major) now hold eigenvectors v_k of conj(H); the
            # eigenvectors of H are conj(v_k). The update is
            #   coef = V_rows @ psi            (no conjugation)
            #   coef[k, :] *= exp(-i w_k dt)
            #   psi  = V_rows^H @ coef
            # Column-major zgemm computes C_cm = A_cm B_cm; a row-major
            # product C_rm = A_rm B_rm maps to C_cm(m x n) = B_cm A_cm with
            # the same buffers, i.e. swap the operand order.
            zgemm("N", "N", &m, &n, &n, &one, &psi[0, 0], &m,
                  &h[0, 0], &n, &zero, &coef[0, 0], &m)
            for k in range(n):
                phase.real = 0.0
                phase.imag = -w[k] * dt
                e = cexp(phase)
                for j in range(m):
                    coef[k, j] = coef[k, j] * e
            # psi_rm = (V_rows)^H coef_rm -> psi_cm = coef_cm * conj(V_cm):
            # with V stored row-major, V_cm = V_rm^T, so op(B)='C' on the
            # V buffer supplies (V_rm^T)^H = conj(V_rm), as required.
            zgemm("N", "C", &m, &n, &n, &one, &coef[0, 0], &m,
                  &h[0, 0], &n, &zero, &psi[0, 0], &m)

    if info != 0:
        raise RuntimeError(f"zheevd failed during stepping (info={info})")
    out = np.asarray(psi_arr)
    return out[:, 0] if single else out
