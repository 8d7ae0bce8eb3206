"""Pure numpy fallback for the direct RK4 master-equation stepper.

Same contract as the compiled kernel: advance rho by n_steps of
fixed-step RK4 under

    rho_dot = -i (h_eff rho - rho h_eff^dag) + sum_k rate_k L_k rho L_k^dag

Work buffers are allocated once; matmuls write into them to keep the
per-step Python overhead down.
"""

import numpy as np


def rk4_lindblad_steps(rho, h_eff, jump_ops, rates, dt, n_steps):
    rho = np.array(rho, dtype=complex, order="C")
    h = np.ascontiguousarray(h_eff, dtype=complex)
    hd = np.ascontiguousarray(h.conj().T)
    ls = [np.ascontiguousarray(op, dtype=complex) for op in jump_ops]
    lds = [np.ascontiguousarray(op.conj().T) for op in ls]
    rs = [float(r) for r in rates]

    d = rho.shape[0]
    k1, k2, k3, k4 = (np.empty((d, d), dtype=complex) for _ in range(4))
    stage = np.empty((d, d), dtype=complex)
    t1 = np.empty((d, d), dtype=complex)
    t2 = np.empty((d, d), dtype=complex)

    def rhs(r, out):
        np.matmul(h, r, out=t1)
        np.matmul(r, hd, out=t2)
        np.multiply(t1, -1j, out=out)
        out += 1j * t2
        for op, opd, rate in zip(ls, lds, rs):
            np.matmul(op, r, out=t1)
            np.matmul(t1, opd, out=t2)
            np.multiply(t2, rate, out=t2)
            out += t2

    half = 0.5 * dt
    for _ in range(int(n_steps)):
        rhs(rho, k1)
        np.multiply(k1, half, out=stage)
        stage += rho
        rhs(stage, k2)
        np.multiply(k2, half, out=stage)
        stage += rho
        rhs(stage, k3)
        np.multiply(k3, dt, out=stage)
        stage += rho
        rhs(stage, k4)
        k2 += k3
        k2 *= 2.0
        k1 += k4
        k1 += k2
        k1 *= dt / 6.0
        rho += k1
    return rho
