"""Pure-numpy piecewise-constant midpoint stepper (fallback backend)."""

import numpy as np


def step_propagate(h_static, ops, env, dt, psi):
    """March ``psi`` through ``env.shape[0]`` equal steps of length ``dt``.

    Step ``j`` applies ``exp(-i H_j dt)`` with
    ``H_j = h_static + sum_k env[j,k]*ops[k] + conj(env[j,k])*ops[k]^dag``,
    i.e. every drive term enters together with its hermitian partner.
    ``psi`` may be a vector or a ``(dim, n_columns)`` block, which shares the
    per-step eigendecomposition across columns.
    """
    psi = np.array(psi, dtype=np.complex128, copy=True)
    single = psi.ndim == 1
    if single:
        psi = psi[:, None]
    n_terms = ops.shape[0]
    for j in range(env.shape[0]):
        h = h_static.copy()
        for k in range(n_terms):
            e = env[j, k]
            h += e * ops[k]
            h += np.conj(e) * ops[k].conj().T
        w, v = np.linalg.eigh(h)
        psi = v @ (np.exp(-1j * w * dt)[:, None] * (v.conj().T @ psi))
    return psi[:, 0] if single else psi
