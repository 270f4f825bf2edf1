"""Pure-numpy propagation kernel (fallback for the compiled extension).

Fixed-step RK4 for either master equation, with survival probability and
accumulated yields integrated as auxiliary ODE components so that the
closure Y_S + Y_T + survival = const holds to round-off by construction.

Both master equations reduce to

    d rho/dt = -(G rho + rho G+) + 2 kappa Q_S rho Q_S   (quantum scheme)
    d rho/dt = -(G rho + rho G+)                         (phenomenological)

with G = i H + kappa Q_S (quantum, kappa = k_S + k_T) or
G = i H + (k_S - k_T) Q_S + k_T (phenomenological, using Q_T = 1 - Q_S),
which keeps the per-stage cost at a handful of matrix products.  The
compiled kernel implements the identical scheme; `tests/test_kernels.py`
asserts their agreement.
"""

from __future__ import annotations

import numpy as np

IS_COMPILED = False


def propagate(h, qs, u, k_s, k_t, quantum, rho, dt, max_steps, stride, eps,
              rec_idx, rec_q, rec_tr, rec_p, rec_ys, rec_yt):
    """Advance ``rho`` in place by up to ``max_steps`` RK4 steps of size ``dt``.

    Records observables every ``stride`` steps (always at step 0 and at the
    final step) into the rec_* arrays.  Stops early once the survival
    probability (quantum: auxiliary p; phenomenological: trace of rho)
    drops below ``eps``.

    Returns (steps_done, n_records).
    """
    d = rho.shape[0]
    kappa = k_s + k_t
    if quantum:
        g = 1j * h + kappa * qs
    else:
        g = 1j * h + (k_s - k_t) * qs + k_t * np.eye(d)

    def deriv(s, p):
        x = g @ s
        k = -(x + x.conj().T)
        tr_s = s.trace().real
        if quantum:
            w = u.conj().T @ s
            v = w @ u
            q = v.trace().real
            k += (2.0 * kappa) * (u @ v @ u.conj().T)
            q_t = tr_s - q
            return (k, -2.0 * (k_s * q + k_t * q_t) * p,
                    2.0 * k_s * q * p, 2.0 * k_t * q_t * p)
        q = np.vdot(qs, s).real  # tr(Q_S s), Q_S Hermitian
        q_t = tr_s - q
        return k, 0.0, 2.0 * k_s * q, 2.0 * k_t * q_t

    p, ys, yt = 1.0, 0.0, 0.0
    n_rec = 0

    def record(step):
        nonlocal n_rec
        tr = rho.trace().real
        rec_idx[n_rec] = step
        rec_q[n_rec] = np.vdot(qs, rho).real
        rec_tr[n_rec] = tr
        rec_p[n_rec] = p if quantum else tr
        rec_ys[n_rec] = ys
        rec_yt[n_rec] = yt
        n_rec += 1

    record(0)
    steps_done = 0
    for n in range(max_steps):
        k1, pd1, ysd1, ytd1 = deriv(rho, p)
        k2, pd2, ysd2, ytd2 = deriv(rho + (dt / 2) * k1, p + (dt / 2) * pd1)
        k3, pd3, ysd3, ytd3 = deriv(rho + (dt / 2) * k2, p + (dt / 2) * pd2)
        k4, pd4, ysd4, ytd4 = deriv(rho + dt * k3, p + dt * pd3)
        rho += (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho[:] = (rho + rho.conj().T) / 2
        p += (dt / 6) * (pd1 + 2 * pd2 + 2 * pd3 + pd4)
        ys += (dt / 6) * (ysd1 + 2 * ysd2 + 2 * ysd3 + ysd4)
        yt += (dt / 6) * (ytd1 + 2 * ytd2 + 2 * ytd3 + ytd4)
        steps_done = n + 1

        surv = p if quantum else rho.trace().real
        done = steps_done == max_steps or surv < eps
        if done or steps_done % stride == 0:
            record(steps_done)
        if done:
            break

    return steps_done, n_rec
