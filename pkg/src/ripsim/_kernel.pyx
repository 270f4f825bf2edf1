# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 propagation kernel.

Identical scheme to `_kernel_py.propagate` (that module's docstring states
the algorithm); the heavy lifting is zgemm on Fortran-ordered buffers, with
the rank-(d/4) singlet factorization Q_S = U U+ cutting the cost of the
Q_S rho Q_S term.
"""

import numpy as np

cimport numpy as cnp
from libc.string cimport memcpy
from scipy.linalg.cython_blas cimport zgemm

cnp.import_array()

IS_COMPILED = True

ctypedef double complex zdbl


cdef void _mm(char ta, char tb, int m, int n, int k, zdbl alpha,
              zdbl* a, int lda, zdbl* b, int ldb, zdbl beta, zdbl* c, int ldc) noexcept nogil:
    zgemm(&ta, &tb, &m, &n, &k, &alpha, a, &lda, b, &ldb, &beta, c, &ldc)


cdef double _trace_re(int d, zdbl* s) noexcept nogil:
    cdef int i
    cdef double out = 0.0
    for i in range(d):
        out += s[i + i * d].real
    return out


cdef double _q_expect(int d, zdbl* qs, zdbl* s) noexcept nogil:
    # Re tr(Q_S s) = Re sum_ij Q_S[i,j] s[j,i]
    cdef int i, j
    cdef double out = 0.0
    for j in range(d):
        for i in range(d):
            out += (qs[i + j * d] * s[j + i * d]).real
    return out


cdef void _deriv(int d, int r, bint quantum,
                 zdbl* g, zdbl* qs, zdbl* u,
                 double k_s, double k_t, double kappa,
                 zdbl* s, double p,
                 zdbl* x, zdbl* w, zdbl* v, zdbl* t,
                 zdbl* k, double* scal) noexcept nogil:
    """k = d rho/dt at stage state s; scal = (dp, dY_S, dY_T)."""
    cdef int i, j
    cdef double q, q_t, tr_s

    _mm(b'N', b'N', d, d, d, 1.0, g, d, s, d, 0.0, x, d)
    for j in range(d):
        for i in range(d):
            k[i + j * d] = -(x[i + j * d] + x[j + i * d].conjugate())

    tr_s = _trace_re(d, s)
    if quantum:
        _mm(b'C', b'N', r, d, d, 1.0, u, d, s, d, 0.0, w, r)
        _mm(b'N', b'N', r, r, d, 1.0, w, r, u, d, 0.0, v, r)
        q = _trace_re(r, v)
        _mm(b'N', b'N', d, r, r, 1.0, u, d, v, r, 0.0, t, d)
        _mm(b'N', b'C', d, d, r, 2.0 * kappa, t, d, u, d, 1.0, k, d)
        q_t = tr_s - q
        scal[0] = -2.0 * (k_s * q + k_t * q_t) * p
        scal[1] = 2.0 * k_s * q * p
        scal[2] = 2.0 * k_t * q_t * p
    else:
        q = _q_expect(d, qs, s)
        q_t = tr_s - q
        scal[0] = 0.0
        scal[1] = 2.0 * k_s * q
        scal[2] = 2.0 * k_t * q_t


def propagate(zdbl[::1, :] h, zdbl[::1, :] qs, zdbl[::1, :] u,
              double k_s, double k_t, bint quantum,
              zdbl[::1, :] rho, double dt, long max_steps, long stride, double eps,
              long long[::1] rec_idx, double[::1] rec_q, double[::1] rec_tr,
              double[::1] rec_p, double[::1] rec_ys, double[::1] rec_yt):
    """Same contract as `_kernel_py.propagate`."""
    cdef int d = rho.shape[0]
    cdef int r = u.shape[1]
    cdef double kappa = k_s + k_t

    buf = np.empty((d, 10 * d + 3 * r), dtype=complex, order="F")
    cdef zdbl[::1, :] bufv = buf
    cdef zdbl* base = &bufv[0, 0]
    cdef zdbl* g = base
    cdef zdbl* x = base + d * d
    cdef zdbl* s = base + 2 * d * d
    cdef zdbl* k1 = base + 3 * d * d
    cdef zdbl* k2 = base + 4 * d * d
    cdef zdbl* k3 = base + 5 * d * d
    cdef zdbl* k4 = base + 6 * d * d
    cdef zdbl* w = base + 7 * d * d            # r x d
    cdef zdbl* v = base + 7 * d * d + r * d    # r x r
    cdef zdbl* t = base + 7 * d * d + r * d + r * r  # d x r

    cdef zdbl* rho_p = &rho[0, 0]
    cdef zdbl* qs_p = &qs[0, 0]
    cdef zdbl* u_p = &u[0, 0]
    cdef zdbl* h_p = &h[0, 0]

    cdef int i, j
    for j in range(d):
        for i in range(d):
            g[i + j * d] = 1j * h_p[i + j * d]
            if quantum:
                g[i + j * d] += kappa * qs_p[i + j * d]
            else:
                g[i + j * d] += (k_s - k_t) * qs_p[i + j * d]
        if not quantum:
            g[j + j * d] += k_t

    cdef double p = 1.0, ys = 0.0, yt = 0.0
    cdef double d1[3]
    cdef double d2[3]
    cdef double d3[3]
    cdef double d4[3]
    cdef double tr, surv, h6 = dt / 6.0, h2 = dt / 2.0
    cdef long n, steps_done = 0, n_rec = 0
    cdef bint done
    cdef zdbl tmp

    # record step 0
    tr = _trace_re(d, rho_p)
    rec_idx[0] = 0
    rec_q[0] = _q_expect(d, qs_p, rho_p)
    rec_tr[0] = tr
    rec_p[0] = p if quantum else tr
    rec_ys[0] = ys
    rec_yt[0] = yt
    n_rec = 1

    with nogil:
        for n in range(max_steps):
            _deriv(d, r, quantum, g, qs_p, u_p, k_s, k_t, kappa, rho_p, p, x, w, v, t, k1, d1)
            for i in range(d * d):
                s[i] = rho_p[i] + h2 * k1[i]
            _deriv(d, r, quantum, g, qs_p, u_p, k_s, k_t, kappa, s, p + h2 * d1[0], x, w, v, t, k2, d2)
            for i in range(d * d):
                s[i] = rho_p[i] + h2 * k2[i]
            _deriv(d, r, quantum, g, qs_p, u_p, k_s, k_t, kappa, s, p + h2 * d2[0], x, w, v, t, k3, d3)
            for i in range(d * d):
                s[i] = rho_p[i] + dt * k3[i]
            _deriv(d, r, quantum, g, qs_p, u_p, k_s, k_t, kappa, s, p + dt * d3[0], x, w, v, t, k4, d4)

            for i in range(d * d):
                rho_p[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            # symmetrize: rho <- (rho + rho+)/2
            for j in range(d):
                rho_p[j + j * d] = rho_p[j + j * d].real + 0j
                for i in range(j + 1, d):
                    tmp = 0.5 * (rho_p[i + j * d] + rho_p[j + i * d].conjugate())
                    rho_p[i + j * d] = tmp
                    rho_p[j + i * d] = tmp.conjugate()

            p += h6 * (d1[0] + 2.0 * d2[0] + 2.0 * d3[0] + d4[0])
            ys += h6 * (d1[1] + 2.0 * d2[1] + 2.0 * d3[1] + d4[1])
            yt += h6 * (d1[2] + 2.0 * d2[2] + 2.0 * d3[2] + d4[2])
            steps_done = n + 1

            surv = p if quantum else _trace_re(d, rho_p)
            done = steps_done == max_steps or surv < eps
            if done or steps_done % stride == 0:
                tr = _trace_re(d, rho_p)
                rec_idx[n_rec] = steps_done
                rec_q[n_rec] = _q_expect(d, qs_p, rho_p)
                rec_tr[n_rec] = tr
                rec_p[n_rec] = p if quantum else tr
                rec_ys[n_rec] = ys
                rec_yt[n_rec] = yt
                n_rec += 1
            if done:
                break

    return steps_done, n_rec
